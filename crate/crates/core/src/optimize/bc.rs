use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ModelParams, SpinField};

/// Which sides of the rectangle carry frozen layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Sides {
    pub left: bool,
    pub right: bool,
    pub bottom: bool,
    pub top: bool,
}

impl Sides {
    pub const LEFT_RIGHT: Sides = Sides { left: true, right: true, bottom: false, top: false };
    pub const ALL: Sides = Sides { left: true, right: true, bottom: true, top: true };
}

/// Dirichlet data on frozen sites of an `nx × ny` lattice (a chain when `ny = 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub nx: usize,
    pub ny: usize,
    pub frozen: Vec<bool>,
    /// Prescribed angles; entries at free sites are ignored.
    pub values: Vec<f64>,
}

/// Default frozen depth: the three-point stencil needs two determined neighbours.
pub const DEPTH: usize = 2;

impl BoundaryCondition {
    pub fn free(nx: usize, ny: usize) -> Self {
        BoundaryCondition { nx, ny, frozen: vec![false; nx * ny], values: vec![0.0; nx * ny] }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nx * self.ny;
        if n == 0 || self.frozen.len() != n || self.values.len() != n {
            return Err(Error::InvalidInput(format!(
                "boundary condition arrays do not match {}x{}",
                self.nx, self.ny
            )));
        }
        if self.values.iter().zip(&self.frozen).any(|(v, &f)| f && !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite frozen angle".into()));
        }
        Ok(())
    }

    pub fn check_dims(&self, nx: usize, ny: usize) -> Result<()> {
        self.validate()?;
        if (self.nx, self.ny) != (nx, ny) {
            return Err(Error::InvalidInput(format!(
                "boundary condition is {}x{}, field is {nx}x{ny}",
                self.nx, self.ny
            )));
        }
        Ok(())
    }

    /// Freeze `depth` layers on the chosen sides at `ψ = θ₀ φ(λi, λj) / λ`.
    pub fn from_potential(
        nx: usize,
        ny: usize,
        params: &ModelParams<f64>,
        depth: usize,
        sides: Sides,
        phi: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidInput("frozen depth must be positive".into()));
        }
        let mut bc = Self::free(nx, ny);
        let (l, t0) = (params.lambda, params.theta0());
        for j in 0..ny {
            for i in 0..nx {
                let hit = (sides.left && i < depth)
                    || (sides.right && i + depth >= nx)
                    || (sides.bottom && j < depth)
                    || (sides.top && j + depth >= ny);
                if hit {
                    let k = j * nx + i;
                    bc.frozen[k] = true;
                    bc.values[k] = t0 * phi(l * i as f64, l * j as f64) / l;
                }
            }
        }
        Ok(bc)
    }

    /// Left and right columns in the ground states with chiralities `a` and `b`.
    ///
    /// The potentials `a·x` and `b·x + (a−b)·c` agree at the centre `c`, so a pair
    /// like `(−1,−1)` against `(1,1)` asks for the anti-diagonal wall.
    pub fn chirality_sides(nx: usize, ny: usize, params: &ModelParams<f64>, a: [i8; 2], b: [i8; 2]) -> Result<Self> {
        for s in [a, b] {
            if s.iter().any(|v| v.abs() != 1) {
                return Err(Error::InvalidInput(format!("chirality labels must be +-1, got {s:?}")));
            }
        }
        let (a, b) = ([a[0] as f64, a[1] as f64], [b[0] as f64, b[1] as f64]);
        let l = params.lambda;
        let c = [l * (nx - 1) as f64 / 2.0, l * (ny - 1) as f64 / 2.0];
        let shift = (a[0] - b[0]) * c[0] + (a[1] - b[1]) * c[1];
        Self::from_potential(nx, ny, params, DEPTH, Sides::LEFT_RIGHT, |x, y| {
            if x <= c[0] {
                a[0] * x + a[1] * y
            } else {
                b[0] * x + b[1] * y + shift
            }
        })
    }

    /// Chain of `len` sites with both ends frozen to `ψ = θ₀ φ(λi) / λ`.
    pub fn chain(len: usize, params: &ModelParams<f64>, depth: usize, phi: impl Fn(f64) -> f64) -> Result<Self> {
        if len < 2 * depth + 1 {
            return Err(Error::GridTooSmall { nx: len, ny: 1, need: "a free site between the frozen ends" });
        }
        Self::from_potential(len, 1, params, depth, Sides::LEFT_RIGHT, |x, _| phi(x))
    }

    /// Chain with chirality `−1` on the left, `+1` on the right, kink near the middle.
    ///
    /// The kink sits `0.37λ` right of the centre so that no site is equidistant.
    pub fn chain_wall(len: usize, params: &ModelParams<f64>) -> Result<Self> {
        let c = chain_wall_center(len, params.lambda);
        Self::chain(len, params, DEPTH, move |x| (x - c).abs())
    }

    /// Chain with chirality `w` at both ends.
    pub fn chain_helix(len: usize, params: &ModelParams<f64>, w: i8) -> Result<Self> {
        let w = w.signum() as f64;
        Self::chain(len, params, DEPTH, move |x| w * x)
    }

    pub fn free_count(&self) -> usize {
        self.frozen.iter().filter(|&&f| !f).count()
    }

    /// Overwrite the frozen entries of `psi`.
    pub fn apply(&self, psi: &mut [f64]) {
        for ((p, &f), &v) in psi.iter_mut().zip(&self.frozen).zip(&self.values) {
            if f {
                *p = v;
            }
        }
    }

    /// Row-wise linear interpolation between the nearest frozen sites.
    ///
    /// Rows without frozen sites fall back to columns, then to zero.
    pub fn linear_init(&self) -> Vec<f64> {
        let (nx, ny) = (self.nx, self.ny);
        let mut psi = vec![0.0; nx * ny];
        self.apply(&mut psi);
        let mut done = self.frozen.clone();
        let lerp_line = |idx: &[usize], psi: &mut [f64], done: &mut [bool]| {
            let known: Vec<usize> = (0..idx.len()).filter(|&p| self.frozen[idx[p]]).collect();
            if known.is_empty() {
                return;
            }
            for p in 0..idx.len() {
                if self.frozen[idx[p]] {
                    continue;
                }
                let left = known.iter().rev().find(|&&q| q < p).copied();
                let right = known.iter().find(|&&q| q > p).copied();
                psi[idx[p]] = match (left, right) {
                    (Some(a), Some(b)) => {
                        let t = (p - a) as f64 / (b - a) as f64;
                        (1.0 - t) * self.values[idx[a]] + t * self.values[idx[b]]
                    }
                    (Some(a), None) => self.values[idx[a]],
                    (None, Some(b)) => self.values[idx[b]],
                    (None, None) => unreachable!(),
                };
                done[idx[p]] = true;
            }
        };
        for j in 0..ny {
            let idx: Vec<usize> = (0..nx).map(|i| j * nx + i).collect();
            lerp_line(&idx, &mut psi, &mut done);
        }
        for i in 0..nx {
            let idx: Vec<usize> = (0..ny).map(|j| j * nx + i).collect();
            if idx.iter().any(|&k| !done[k]) {
                let mut tmp = psi.clone();
                let mut d = done.clone();
                lerp_line(&idx, &mut tmp, &mut d);
                for &k in &idx {
                    if !done[k] {
                        psi[k] = tmp[k];
                    }
                }
            }
        }
        psi
    }

    pub fn linear_init_field(&self, lambda: f64) -> Result<SpinField<f64>> {
        SpinField::new(self.nx, self.ny, lambda, self.linear_init())
    }
}

/// Start for [`BoundaryCondition::chirality_sides`] with a sharp wall between the
/// two ground states.
///
/// When the sides differ in `w` the wall is the kink of `max` or `min` of the two
/// potentials; otherwise the potentials are switched at the centre column.
pub fn chirality_wall_init(nx: usize, ny: usize, params: &ModelParams<f64>, a: [i8; 2], b: [i8; 2]) -> Result<SpinField<f64>> {
    let (l, t0) = (params.lambda, params.theta0());
    let (a, b) = ([a[0] as f64, a[1] as f64], [b[0] as f64, b[1] as f64]);
    let c = [l * (nx - 1) as f64 / 2.0, l * (ny - 1) as f64 / 2.0];
    let shift = (a[0] - b[0]) * c[0] + (a[1] - b[1]) * c[1];
    let phi = |x: f64, y: f64| {
        let (pl, pr) = (a[0] * x + a[1] * y, b[0] * x + b[1] * y + shift);
        if b[0] > a[0] {
            pl.max(pr)
        } else if b[0] < a[0] {
            pl.min(pr)
        } else if x <= c[0] {
            pl
        } else {
            pr
        }
    };
    Ok(SpinField::from_fn(nx, ny, l, |i, j| t0 * phi(l * i as f64, l * j as f64) / l))
}

/// Kink position used by [`BoundaryCondition::chain_wall`].
pub fn chain_wall_center(len: usize, lambda: f64) -> f64 {
    lambda * (len - 1) as f64 / 2.0 + 0.37 * lambda
}

/// Sharp-wall start for a chain: `ψ = θ₀ |x − c| / λ` at every site.
pub fn chain_wall_init(len: usize, params: &ModelParams<f64>) -> Vec<f64> {
    let c = chain_wall_center(len, params.lambda);
    let (l, t0) = (params.lambda, params.theta0());
    (0..len).map(|i| t0 * (l * i as f64 - c).abs() / l).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_init_interpolates_rows() {
        let p = ModelParams::new(0.1, 0.2).unwrap();
        let bc = BoundaryCondition::chain_helix(9, &p, 1).unwrap();
        let psi = bc.linear_init();
        let t0 = p.theta0();
        for (i, v) in psi.iter().enumerate() {
            assert!((v - t0 * i as f64).abs() < 1e-12);
        }
        assert_eq!(bc.free_count(), 5);
    }

    #[test]
    fn chirality_sides_is_continuous_at_centre() {
        let p = ModelParams::new(0.1, 0.2).unwrap();
        let bc = BoundaryCondition::chirality_sides(11, 5, &p, [-1, -1], [1, 1]).unwrap();
        assert!(bc.frozen[0] && bc.frozen[10] && !bc.frozen[5]);
        assert!(BoundaryCondition::chirality_sides(11, 5, &p, [0, 1], [1, 1]).is_err());
    }
}
