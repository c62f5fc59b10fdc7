use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bc::BoundaryCondition;
use super::objective::Objective;
use crate::energy::{chain_interval, energy_h, energy_h_1d, EnergyReport};
use crate::error::{Error, Result};
use crate::lattice::{Domain, ModelParams, ScalarGrid, SpinField};

/// Metropolis pre-pass with single-site proposals and a geometric temperature ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealOptions {
    pub t_start: f64,
    pub t_end: f64,
    pub sweeps: usize,
    /// Proposal half-width in radians.
    pub step: f64,
    pub seed: u64,
}

impl Default for AnnealOptions {
    fn default() -> Self {
        AnnealOptions { t_start: 1e-2, t_end: 1e-5, sweeps: 200, step: 0.3, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    /// Stop once the max-norm of the gradient drops below this.
    pub grad_tol: f64,
    pub armijo: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    /// L-BFGS history length; 0 gives steepest descent.
    pub memory: usize,
    pub anneal: Option<AnnealOptions>,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            max_iter: 20_000,
            grad_tol: 1e-8,
            armijo: 1e-4,
            backtrack: 0.5,
            max_backtracks: 60,
            memory: 10,
            anneal: None,
        }
    }
}

impl MinimizeOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.grad_tol > 0.0
            && self.armijo > 0.0
            && self.armijo < 1.0
            && self.backtrack > 0.0
            && self.backtrack < 1.0
            && self.max_backtracks > 0;
        if !ok {
            return Err(Error::InvalidInput("minimize tolerances must be positive and factors in (0, 1)".into()));
        }
        if let Some(a) = &self.anneal {
            if !(a.t_start > 0.0 && a.t_end > 0.0 && a.step > 0.0) {
                return Err(Error::InvalidInput("annealing temperatures and step must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterRow {
    pub iter: usize,
    pub energy: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    /// The line search found no decrease; the best iterate is returned.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimized {
    pub psi: Vec<f64>,
    pub energy: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub log: Vec<IterRow>,
}

fn max_norm(g: &[f64]) -> f64 {
    g.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn anneal(obj: &Objective, psi: &mut [f64], opts: &AnnealOptions) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let free: Vec<usize> = (0..psi.len()).filter(|&k| !obj.frozen()[k]).collect();
    if free.is_empty() || opts.sweeps == 0 {
        return;
    }
    let ratio = if opts.sweeps > 1 { (opts.t_end / opts.t_start).powf(1.0 / (opts.sweeps - 1) as f64) } else { 1.0 };
    let mut t = opts.t_start;
    for _ in 0..opts.sweeps {
        for &k in &free {
            let new = psi[k] + rng.gen_range(-opts.step..opts.step);
            let d = obj.local_delta(psi, k, new);
            if d <= 0.0 || rng.gen::<f64>() < (-d / t).exp() {
                psi[k] = new;
            }
        }
        t *= ratio;
    }
}

/// L-BFGS directions with an Armijo backtracking line search.
///
/// Logged energies accumulate the per-step changes, so the log is strictly
/// decreasing; `energy` is recomputed from the final iterate.
pub fn minimize_objective(obj: &Objective, psi0: &[f64], opts: &MinimizeOptions) -> Result<Minimized> {
    opts.validate()?;
    let mut x = psi0.to_vec();
    if let Some(a) = &opts.anneal {
        anneal(obj, &mut x, a);
    }
    let (mut f, mut g) = obj.energy_and_gradient(&x)?;
    if !f.is_finite() {
        return Err(Error::InvalidInput("initial energy is not finite".into()));
    }
    let mut log = vec![IterRow { iter: 0, energy: f, grad_norm: max_norm(&g), step: 0.0 }];
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut termination = Termination::MaxIterations;
    let mut iter = 0;
    // initial step length for steepest-descent restarts
    let mut sd_scale = 1.0;
    while iter < opts.max_iter {
        if max_norm(&g) <= opts.grad_tol {
            termination = Termination::Converged;
            break;
        }
        let mut accepted = None;
        for use_history in [true, false] {
            let d = if use_history && !hist.is_empty() { two_loop(&g, &hist) } else { g.iter().map(|v| -v).collect() };
            let mut slope = dot(&g, &d);
            let d = if slope < 0.0 {
                d
            } else {
                slope = -dot(&g, &g);
                g.iter().map(|v| -v).collect()
            };
            let mut t = if use_history && !hist.is_empty() { 1.0 } else { sd_scale };
            for _ in 0..=opts.max_backtracks {
                let change = obj.energy_change(&x, &d, t)?;
                if change < 0.0 && change <= opts.armijo * t * slope {
                    let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
                    accepted = Some((xn, f + change, t, d.clone()));
                    break;
                }
                t *= opts.backtrack;
            }
            if accepted.is_some() || !use_history || hist.is_empty() {
                break;
            }
            hist.clear();
        }
        let Some((xn, fn_, t, d)) = accepted else {
            termination = Termination::Stalled;
            break;
        };
        let (_, gn) = obj.energy_and_gradient(&xn)?;
        let s: Vec<f64> = d.iter().map(|v| t * v).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if opts.memory > 0 && sy > 1e-300 {
            if hist.len() == opts.memory {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        sd_scale = (2.0 * t).min(1e6);
        x = xn;
        f = fn_;
        g = gn;
        iter += 1;
        log.push(IterRow { iter, energy: f, grad_norm: max_norm(&g), step: t });
    }
    if termination == Termination::MaxIterations && max_norm(&g) <= opts.grad_tol {
        termination = Termination::Converged;
    }
    let energy = obj.energy(&x)?;
    Ok(Minimized { grad_norm: max_norm(&g), psi: x, energy, iterations: iter, termination, log })
}

fn two_loop(g: &[f64], hist: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(hist.len());
    for (s, y, rho) in hist.iter().rev() {
        let a = rho * dot(s, &q);
        for k in 0..q.len() {
            q[k] -= a * y[k];
        }
        alphas.push(a);
    }
    let (s, y, _) = hist.back().expect("non-empty history");
    let gamma = dot(s, y) / dot(y, y);
    for v in &mut q {
        *v *= gamma;
    }
    for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for k in 0..q.len() {
            q[k] += (a - b) * s[k];
        }
    }
    q.iter().map(|v| -v).collect()
}

/// `∂H_n/∂ψ` of a two-dimensional field, zero at frozen sites.
pub fn energy_gradient(
    psi: &SpinField<f64>,
    domain: &Domain,
    params: &ModelParams<f64>,
    bc: &BoundaryCondition,
) -> Result<ScalarGrid<f64>> {
    bc.check_dims(psi.nx(), psi.ny())?;
    let obj = Objective::lattice(domain, params, bc)?;
    let (_, g) = obj.energy_and_gradient(psi.angles())?;
    ScalarGrid::new(psi.nx(), psi.ny(), psi.lambda(), g)
}

/// Minimized field with its energy report and iteration log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOutcome {
    pub spins: SpinField<f64>,
    pub report: EnergyReport<f64>,
    pub run: Minimized,
}

/// Minimize `H_n` over the free angles of `psi0`; frozen entries are taken from `bc`.
pub fn minimize_h(
    psi0: &SpinField<f64>,
    domain: &Domain,
    params: &ModelParams<f64>,
    bc: &BoundaryCondition,
    opts: &MinimizeOptions,
) -> Result<MinimizeOutcome> {
    bc.check_dims(psi0.nx(), psi0.ny())?;
    let obj = Objective::lattice(domain, params, bc)?;
    let mut start = psi0.angles().to_vec();
    bc.apply(&mut start);
    let run = minimize_objective(&obj, &start, opts)?;
    let spins = SpinField::new(psi0.nx(), psi0.ny(), params.lambda, run.psi.clone())?;
    let report = energy_h(&spins, domain, params);
    Ok(MinimizeOutcome { spins, report, run })
}

/// Chain counterpart of [`minimize_h`]; the report is the one-dimensional `H_n`.
pub fn minimize_chain(
    psi0: &[f64],
    params: &ModelParams<f64>,
    bc: &BoundaryCondition,
    opts: &MinimizeOptions,
) -> Result<(Minimized, EnergyReport<f64>)> {
    let obj = Objective::chain(params, bc)?;
    if psi0.len() != bc.nx {
        return Err(Error::InvalidInput(format!("chain has {} sites, start has {}", bc.nx, psi0.len())));
    }
    let mut start = psi0.to_vec();
    bc.apply(&mut start);
    let run = minimize_objective(&obj, &start, opts)?;
    let report = energy_h_1d(&run.psi, chain_interval(bc.nx, params.lambda), params);
    Ok((run, report))
}
