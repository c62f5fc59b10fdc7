use thiserror::Error;

/// A lattice bond: horizontal bonds join (i,j)-(i+1,j), vertical ones (i,j)-(i,j+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Bond {
    pub i: usize,
    pub j: usize,
    pub horizontal: bool,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid {nx}x{ny} is too small: {need}")]
    GridTooSmall { nx: usize, ny: usize, need: &'static str },

    #[error("vector is not unit length (|v| = {0})")]
    NonUnit(f64),

    #[error("closed form of rho is singular at ({0}, {1})")]
    Singular(f64, f64),

    #[error("plaquette ({i},{j}) has vorticity {value}, not a multiple of 2pi")]
    VorticitySnap { i: usize, j: usize, value: f64 },

    #[error("pair is not the image of a single-valued lifting: closure fails on {} plaquette(s), max residual {max_residual:e}", plaquettes.len())]
    Inadmissible { plaquettes: Vec<(usize, usize)>, max_residual: f64 },

    #[error("invalid mesh: {reason} (triangles {triangles:?})")]
    InvalidMesh { reason: String, triangles: Vec<usize> },

    #[error("point ({0}, {1}) lies outside the evaluation region")]
    OutOfDomain(f64, f64),

    #[error("bond-angle overflow on {} bond(s); epsilon too large for this mesh", bonds.len())]
    Overflow { bonds: Vec<Bond> },

    #[error("enumeration needs {0:e} evaluations, budget is 1e8")]
    Budget(f64),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Numerical failures (as opposed to rejected input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular(..) | Error::VorticitySnap { .. } | Error::Inadmissible { .. } | Error::Overflow { .. }
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::GridTooSmall { .. } => "grid_too_small",
            Error::NonUnit(_) => "non_unit",
            Error::Singular(..) => "singular",
            Error::VorticitySnap { .. } => "vorticity_snap",
            Error::Inadmissible { .. } => "inadmissible",
            Error::InvalidMesh { .. } => "invalid_mesh",
            Error::OutOfDomain(..) => "out_of_domain",
            Error::Overflow { .. } => "overflow",
            Error::Budget(_) => "budget",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
