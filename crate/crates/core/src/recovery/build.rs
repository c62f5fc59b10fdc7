use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{integrate, Kernel};
use super::mollify::{Extension, ExtensionMethod, Mollified, QuadratureRule};
use crate::chirality::{pair_from_theta, theta_fields, ChiralityPair, ThetaFields};
use crate::continuum::{limit_energy, MeshPotential};
use crate::energy::{double_well, energy_h, EnergyReport};
use crate::error::{Bond, Error, Result};
use crate::lattice::{ModelParams, ScalarGrid, SpinField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryOptions {
    pub kernel: Kernel,
    pub extension: ExtensionMethod,
    pub quadrature: QuadratureRule,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        RecoveryOptions {
            kernel: Kernel::default(),
            extension: ExtensionMethod::OddReflection,
            quadrature: QuadratureRule::default(),
        }
    }
}

/// Lattice spin field lifted from a mollified continuum potential.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Recovery {
    pub params: ModelParams<f64>,
    /// `φ_n^{i,j} = φ^ε(λi, λj)`
    pub phi: ScalarGrid<f64>,
    pub spins: SpinField<f64>,
    pub theta: ThetaFields<f64>,
    pub pair: ChiralityPair<f64>,
    pub report: EnergyReport<f64>,
    /// Bonds where `arccos(1−δ) |∂ᵈφ_n|` exceeds π.
    pub overflow: Vec<Bond>,
    /// Largest `|θ − arccos(1−δ) ∂ᵈφ_n|` over bonds without overflow.
    pub identity_residual: f64,
}

impl Recovery {
    pub fn check(&self) -> Result<()> {
        if self.overflow.is_empty() {
            Ok(())
        } else {
            Err(Error::Overflow { bonds: self.overflow.clone() })
        }
    }
}

/// Lattice size covering the domain with sites `0..=floor(x_max/λ)`.
pub fn lattice_dims(m: &MeshPotential, lambda: f64) -> Result<(usize, usize)> {
    let d = &m.domain;
    if d.origin[0] < 0.0 || d.origin[1] < 0.0 {
        return Err(Error::InvalidInput("recovery lattices are anchored at the origin; domain must lie in x, y >= 0".into()));
    }
    let [mx, my] = d.max();
    let n = |v: f64| (v / lambda + 1e-9).floor() as usize + 1;
    Ok((n(mx), n(my)))
}

pub fn build_recovery(m: &MeshPotential, params: &ModelParams<f64>, opts: &RecoveryOptions) -> Result<Recovery> {
    let ext = Extension::new(m.clone(), opts.extension)?;
    build_with_extension(&ext, params, opts)
}

pub(crate) fn build_with_extension(ext: &Extension, params: &ModelParams<f64>, opts: &RecoveryOptions) -> Result<Recovery> {
    let m = ext.mesh();
    let lambda = params.lambda;
    let (nx, ny) = lattice_dims(m, lambda)?;
    if nx < 3 || ny < 3 {
        return Err(Error::GridTooSmall { nx, ny, need: "3x3 lattice inside the domain" });
    }
    let moll = Mollified::new(ext, opts.kernel, params.epsilon, opts.quadrature)?;
    let phi = moll.sample_lattice(nx, ny, lambda)?;
    let t0 = params.theta0();
    let spins = SpinField::from_fn(nx, ny, lambda, |i, j| t0 * phi.get(i, j) / lambda);
    let theta = theta_fields(&spins)?;
    let pair = pair_from_theta(&theta, params.delta)?;
    let report = energy_h(&spins, &m.domain, params);

    let mut overflow = Vec::new();
    let mut residual: f64 = 0.0;
    let pi = std::f64::consts::PI;
    for (grid, horizontal) in [(&theta.theta_hor, true), (&theta.theta_ver, false)] {
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let (a, b) = if horizontal { (phi.get(i + 1, j), phi.get(i, j)) } else { (phi.get(i, j + 1), phi.get(i, j)) };
                let expect = t0 * (a - b) / lambda;
                if expect.abs() > pi || expect == -pi {
                    overflow.push(Bond { i, j, horizontal });
                } else {
                    residual = residual.max((grid.get(i, j) - expect).abs());
                }
            }
        }
    }
    if !overflow.is_empty() {
        log::warn!("{} bond(s) overflow at lambda = {lambda}", overflow.len());
    }
    Ok(Recovery { params: *params, phi, spins, theta, pair, report, overflow, identity_residual: residual })
}

/// `(λ, δ)` steps with strictly decreasing `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSchedule {
    pub steps: Vec<ModelParams<f64>>,
}

impl SweepSchedule {
    pub fn new(steps: Vec<ModelParams<f64>>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidInput("empty schedule".into()));
        }
        if steps.windows(2).any(|w| w[1].epsilon >= w[0].epsilon) {
            return Err(Error::InvalidInput("schedule epsilon must be strictly decreasing".into()));
        }
        Ok(SweepSchedule { steps })
    }

    /// `δ = λ^{2/3}` for each `λ`.
    pub fn from_lambdas(lambdas: &[f64]) -> Result<Self> {
        Self::new(lambdas.iter().map(|&l| ModelParams::with_power_law(l)).collect::<Result<_>>()?)
    }

    /// `δ = λ^{2/3}` with `λ = (√2 ε)^{3/2}` chosen to hit each `ε`.
    pub fn from_epsilons(eps: &[f64]) -> Result<Self> {
        let lambdas: Vec<f64> = eps.iter().map(|&e| (std::f64::consts::SQRT_2 * e).powf(1.5)).collect();
        Self::from_lambdas(&lambdas)
    }

    /// `λ = 2⁻⁴, …, 2⁻⁸` with `δ = λ^{2/3}`.
    pub fn default_schedule() -> Self {
        Self::from_lambdas(&[1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0]).expect("valid schedule")
    }
}

/// Smooth bump `exp(−1/(1 − |x−c|²/r²))` used to test the distributional curl.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center: [f64; 2],
    pub radius: f64,
}

impl TestFunction {
    pub fn centered(m: &MeshPotential) -> Self {
        let d = &m.domain;
        TestFunction {
            center: [d.origin[0] + d.width / 2.0, d.origin[1] + d.height / 2.0],
            radius: 0.35 * d.width.min(d.height),
        }
    }

    pub fn gradient(&self, p: [f64; 2]) -> [f64; 2] {
        let (dx, dy) = (p[0] - self.center[0], p[1] - self.center[1]);
        let r2 = self.radius * self.radius;
        let s = 1.0 - (dx * dx + dy * dy) / r2;
        if s <= 0.0 {
            return [0.0, 0.0];
        }
        let f = (-1.0 / s).exp();
        // d/dx exp(−1/s) = exp(−1/s) · s'/s², with s' = −2dx/r²
        let c = f / (s * s) * (-2.0 / r2);
        [c * dx, c * dy]
    }
}

/// Midpoint value of `⟨curl(w,z), ξ⟩ = −∫ w ∂₂ξ + ∫ z ∂₁ξ` over the cells spanned by the sites.
pub fn curl_residual(pair: &ChiralityPair<f64>, test: &TestFunction) -> Result<f64> {
    let (nx, ny) = pair.spin_dims();
    let l = pair.w.lambda();
    let (xmax, ymax) = (l * (nx - 1) as f64, l * (ny - 1) as f64);
    let [cx, cy] = test.center;
    let r = test.radius;
    if !(r > 0.0) || cx - r < 0.0 || cy - r < 0.0 || cx + r > xmax || cy + r > ymax {
        return Err(Error::InvalidInput("test function support leaves the lattice rectangle".into()));
    }
    let mut terms = Vec::with_capacity((nx - 1) * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let g = test.gradient([l * (i as f64 + 0.5), l * (j as f64 + 0.5)]);
            terms.push(-pair.w.get(i, j) * g[1] + pair.z.get(i, j) * g[0]);
        }
    }
    Ok(l * l * crate::sum::pairwise(&terms))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub lambda: f64,
    pub delta: f64,
    pub h_n_total: f64,
    pub h_n_hor: f64,
    pub h_n_ver: f64,
    pub h_limit: f64,
    pub ratio: f64,
    pub overflow_count: usize,
    pub curl_residual: Option<f64>,
    pub identity_residual: f64,
    /// `None` on success, the error text otherwise.
    pub failure: Option<String>,
}

/// Recovery energies along a schedule, compared with the limit energy of the mesh.
pub fn gamma_sweep(m: &MeshPotential, schedule: &SweepSchedule, opts: &RecoveryOptions) -> Result<Vec<SweepRow>> {
    let h_limit = limit_energy(m)?;
    let ext = Extension::new(m.clone(), opts.extension)?;
    let test = TestFunction::centered(m);
    let rows = schedule
        .steps
        .par_iter()
        .map(|p| {
            let mut row = SweepRow {
                epsilon: p.epsilon,
                lambda: p.lambda,
                delta: p.delta,
                h_n_total: f64::NAN,
                h_n_hor: f64::NAN,
                h_n_ver: f64::NAN,
                h_limit,
                ratio: f64::NAN,
                overflow_count: 0,
                curl_residual: None,
                identity_residual: f64::NAN,
                failure: None,
            };
            match build_with_extension(&ext, p, opts) {
                Ok(rec) => {
                    row.h_n_total = rec.report.total;
                    row.h_n_hor = rec.report.horizontal;
                    row.h_n_ver = rec.report.vertical;
                    row.ratio = if h_limit == 0.0 { 0.0 } else { rec.report.total / h_limit };
                    row.overflow_count = rec.overflow.len();
                    row.curl_residual = curl_residual(&rec.pair, &test).ok();
                    row.identity_residual = rec.identity_residual;
                }
                Err(e) => row.failure = Some(e.to_string()),
            }
            row
        })
        .collect();
    Ok(rows)
}

/// The optimal one-dimensional transition profile `tanh(t)`.
pub fn optimal_profile_1d(t: f64) -> f64 {
    t.tanh()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileEnergy {
    pub potential: f64,
    pub gradient: f64,
    pub total: f64,
}

/// `∫ W(s) + |s′|²` of the optimal profile over `[a, b]`.
pub fn profile_energy(a: f64, b: f64) -> ProfileEnergy {
    let potential = integrate(|t| double_well(optimal_profile_1d(t)), a, b, 400, 8);
    let gradient = integrate(
        |t| {
            let c = t.cosh();
            let d = 1.0 / (c * c);
            d * d
        },
        a,
        b,
        400,
        8,
    );
    ProfileEnergy { potential, gradient, total: potential + gradient }
}
