//! Lattice energies `E_n`, `H_n`, the one-dimensional `H_n`, the correcting factor
//! `ρ`, and the exact Modica–Mortola splitting of `H_n`.

use serde::{Deserialize, Serialize};

use crate::chirality::{chirality_of, reconstruct_spin, theta_fields, ChiralityPair};
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::lattice::{index_set, Domain, ModelParams, ScalarGrid, SpinField};
use crate::scalar::Real;
use crate::sum::pairwise;

/// `W(s) = (1 − s²)²`
#[inline]
pub fn double_well<T: Real>(s: T) -> T {
    let a = T::one() - s * s;
    a * a
}

/// `W̃_n(s) = (1 − (2/δ) sin²(arccos(1−δ) s / 2))²`, a lower bound for `W`.
pub fn tilde_w<T: Real>(s: T, delta: T) -> T {
    let t = (T::one() - delta).acos();
    let sn = (t * s / T::lit(2.0)).sin();
    let a = T::one() - T::lit(2.0) / delta * sn * sn;
    a * a
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split<T = f64> {
    pub potential: T,
    pub gradient: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport<T = f64> {
    pub total: T,
    pub horizontal: T,
    pub vertical: T,
    /// Present only for reports produced by [`mm_decomposition`].
    pub potential_part: Option<T>,
    pub gradient_part: Option<T>,
    pub horizontal_split: Option<Split<T>>,
    pub vertical_split: Option<Split<T>>,
    pub term_count: usize,
    pub horizontal_terms: usize,
    pub vertical_terms: usize,
}

impl<T: Real> EnergyReport<T> {
    fn plain(horizontal: T, vertical: T, nh: usize, nv: usize) -> Self {
        EnergyReport {
            total: horizontal + vertical,
            horizontal,
            vertical,
            potential_part: None,
            gradient_part: None,
            horizontal_split: None,
            vertical_split: None,
            term_count: nh + nv,
            horizontal_terms: nh,
            vertical_terms: nv,
        }
    }
}

/// Sites of `I(Ω)` whose horizontal (resp. vertical) second-neighbour stencil fits
/// in an `nx × ny` grid.
pub fn stencil_sites(domain: &Domain, lambda: f64, nx: usize, ny: usize) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
    let mut hor = Vec::new();
    let mut ver = Vec::new();
    for (i, j) in index_set(domain, lambda) {
        if i < 0 || j < 0 {
            continue;
        }
        let (i, j) = (i as usize, j as usize);
        if j < ny && i + 2 < nx {
            hor.push((i, j));
        }
        if i < nx && j + 2 < ny {
            ver.push((i, j));
        }
    }
    (hor, ver)
}

#[inline]
fn dot<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
fn residual_sq<T: Real>(a: [T; 2], b: [T; 2], c: [T; 2], half_alpha: T) -> T {
    let r0 = c[0] - half_alpha * b[0] + a[0];
    let r1 = c[1] - half_alpha * b[1] + a[1];
    r0 * r0 + r1 * r1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyE<T = f64> {
    pub value: T,
    pub nn_bonds: usize,
    pub third_bonds: usize,
}

/// `E_n(u) = −αλ² Σ (u^{i,j}·u^{i+1,j} + u^{i,j}·u^{i,j+1}) + λ² Σ (u^{i,j}·u^{i+2,j} + u^{i,j}·u^{i,j+2})`,
/// over all pairs with both sites in the grid and in Ω.
pub fn energy_e<T: Real>(u: &SpinField<T>, domain: &Domain, alpha: T) -> EnergyE<T> {
    let (nx, ny) = (u.nx(), u.ny());
    let l = u.lambda();
    let lf = l.as_f64();
    let units = u.units();
    let inside: Vec<bool> = (0..nx * ny).map(|k| domain.contains([lf * (k % nx) as f64, lf * (k / nx) as f64])).collect();
    let mut nn = Vec::new();
    let mut third = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            if !inside[k] {
                continue;
            }
            for (di, dj) in [(1, 0), (0, 1)] {
                let (a, b) = (i + di, j + dj);
                if a < nx && b < ny && inside[b * nx + a] {
                    nn.push(dot(units[k], units[b * nx + a]));
                }
            }
            for (di, dj) in [(2, 0), (0, 2)] {
                let (a, b) = (i + di, j + dj);
                if a < nx && b < ny && inside[b * nx + a] {
                    third.push(dot(units[k], units[b * nx + a]));
                }
            }
        }
    }
    let l2 = l * l;
    EnergyE { value: -alpha * l2 * pairwise(&nn) + l2 * pairwise(&third), nn_bonds: nn.len(), third_bonds: third.len() }
}

/// Renormalized energy `H_n = H_n^hor + H_n^ver` summed over `I(Ω)`.
pub fn energy_h<T: Real>(u: &SpinField<T>, domain: &Domain, params: &ModelParams<T>) -> EnergyReport<T> {
    let (nx, ny) = (u.nx(), u.ny());
    let (hor, ver) = stencil_sites(domain, u.lambda().as_f64(), nx, ny);
    let units = u.units();
    let at = |i: usize, j: usize| units[j * nx + i];
    let ha = params.alpha / T::lit(2.0);
    let th: Vec<T> = hor.iter().map(|&(i, j)| residual_sq(at(i, j), at(i + 1, j), at(i + 2, j), ha)).collect();
    let tv: Vec<T> = ver.iter().map(|&(i, j)| residual_sq(at(i, j), at(i, j + 1), at(i, j + 2), ha)).collect();
    let c = params.scale() * params.lambda * params.lambda / T::lit(2.0);
    EnergyReport::plain(c * pairwise(&th), c * pairwise(&tv), th.len(), tv.len())
}

/// `H_n` through its expanded dot-product form, an independent route to [`energy_h`].
pub fn energy_h_expanded<T: Real>(u: &SpinField<T>, domain: &Domain, params: &ModelParams<T>) -> T {
    let (nx, ny) = (u.nx(), u.ny());
    let (hor, ver) = stencil_sites(domain, u.lambda().as_f64(), nx, ny);
    let units = u.units();
    let at = |i: usize, j: usize| units[j * nx + i];
    let a = params.alpha;
    let diag = T::lit(2.0) + a * a / T::lit(4.0);
    let term = |p: [T; 2], q: [T; 2], r: [T; 2]| diag - a * (dot(r, q) + dot(q, p)) + T::lit(2.0) * dot(r, p);
    let mut terms: Vec<T> = hor.iter().map(|&(i, j)| term(at(i, j), at(i + 1, j), at(i + 2, j))).collect();
    terms.extend(ver.iter().map(|&(i, j)| term(at(i, j), at(i, j + 1), at(i, j + 2))));
    params.scale() * params.lambda * params.lambda / T::lit(2.0) * pairwise(&terms)
}

/// One-dimensional `H_n` for a chain of angles at sites `λi`, summed over the
/// `i` with `[λi, λ(i+2)] ⊂ [a, b]`.
pub fn energy_h_1d<T: Real>(psi: &[T], interval: [f64; 2], params: &ModelParams<T>) -> EnergyReport<T> {
    let lf = params.lambda.as_f64();
    let tol = 1e-9 * (interval[1] - interval[0]).abs().max(lf);
    let ha = params.alpha / T::lit(2.0);
    let units: Vec<[T; 2]> = psi.iter().map(|a| {
        let (s, c) = a.sin_cos();
        [c, s]
    })
    .collect();
    let terms: Vec<T> = (0..psi.len().saturating_sub(2))
        .filter(|&i| lf * i as f64 >= interval[0] - tol && lf * (i + 2) as f64 <= interval[1] + tol)
        .map(|i| residual_sq(units[i], units[i + 1], units[i + 2], ha))
        .collect();
    let c = params.scale() * params.lambda / T::lit(2.0);
    EnergyReport::plain(c * pairwise(&terms), T::zero(), terms.len(), 0)
}

/// Chain covering `[0, λ(len−1)]`.
pub fn chain_interval<T: Real>(len: usize, lambda: T) -> [f64; 2] {
    [0.0, lambda.as_f64() * (len.max(1) - 1) as f64]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoMethod {
    /// The defining quotient, evaluated in double-double arithmetic.
    Definition,
    /// `cos²((θ₂−θ₁)/4) cos(θ₁+θ₂) / cos²((θ₁+θ₂)/4)`
    ClosedForm,
}

/// Correcting factor `ρ(θ₁, θ₂)` for `θ₁, θ₂ ∈ [−π, π]`.
pub fn rho<T: Real>(theta1: T, theta2: T, method: RhoMethod) -> Result<T> {
    let pi = T::PI() * (T::one() + T::epsilon());
    if !(theta1.abs() <= pi && theta2.abs() <= pi) {
        return Err(Error::InvalidInput(format!("angles ({theta1}, {theta2}) outside [-pi, pi]")));
    }
    match method {
        RhoMethod::Definition => {
            if theta1 == theta2 {
                return Ok(T::one());
            }
            Ok(T::lit(rho_definition_dd(theta1.as_f64(), theta2.as_f64())))
        }
        RhoMethod::ClosedForm => {
            let q = ((theta1 + theta2) / T::lit(4.0)).cos();
            if q * q == T::zero() || (theta1 == theta2 && theta1.abs() >= T::PI()) {
                return Err(Error::Singular(theta1.as_f64(), theta2.as_f64()));
            }
            Ok(rho_closed(theta1, theta2))
        }
    }
}

#[inline]
fn rho_closed<T: Real>(t1: T, t2: T) -> T {
    let a = ((t2 - t1) / T::lit(4.0)).cos();
    let b = ((t1 + t2) / T::lit(4.0)).cos();
    a * a * (t1 + t2).cos() / (b * b)
}

/// Total on `[−π, π)²`: the closed form away from the diagonal, 1 on it.
#[inline]
pub(crate) fn rho_total<T: Real>(t1: T, t2: T) -> T {
    if t1 == t2 {
        T::one()
    } else {
        rho_closed(t1, t2)
    }
}

fn rho_definition_dd(t1: f64, t2: f64) -> f64 {
    let (h1, h2) = ((t1 / 2.0).sin(), (t2 / 2.0).sin());
    if (h2 - h1).abs() > 0.25 {
        // no cancellation in the denominator; plain f64 is accurate to a few ulp
        let num = -(1.0 - (t1 + t2).cos()) + t1.sin().powi(2) + t2.sin().powi(2);
        return num / (2.0 * (h2 - h1).powi(2));
    }
    let (s1, _) = Dd::new(t1).sin_cos();
    let (s2, _) = Dd::new(t2).sin_cos();
    let (_, cs) = Dd::sum(t1, t2).sin_cos();
    let (h1, _) = Dd::new(t1 / 2.0).sin_cos();
    let (h2, _) = Dd::new(t2 / 2.0).sin_cos();
    let num = -(Dd::ONE - cs) + s1.sqr() + s2.sqr();
    let den = (h2 - h1).sqr().scale(2.0);
    (num / den).to_f64()
}

/// `H_n` rewritten as `(1/2ε)λ² Σ [W(w) + W(w')] + ελ² Σ ρ |∂w|²` per direction.
pub fn mm_decomposition<T: Real>(u: &SpinField<T>, domain: &Domain, params: &ModelParams<T>) -> Result<EnergyReport<T>> {
    let (nx, ny) = (u.nx(), u.ny());
    let th = theta_fields(u)?;
    let (hor, ver) = stencil_sites(domain, u.lambda().as_f64(), nx, ny);
    let (l, eps, delta) = (params.lambda, params.epsilon, params.delta);
    let l2 = l * l;
    let pot_c = l2 / (T::lit(2.0) * eps);
    let grad_c = eps * l2;
    let split = |sites: &[(usize, usize)], theta: &ScalarGrid<T>, step: (usize, usize)| -> Split<T> {
        let mut pot = Vec::with_capacity(sites.len());
        let mut grad = Vec::with_capacity(sites.len());
        for &(i, j) in sites {
            let (t1, t2) = (theta.get(i, j), theta.get(i + step.0, j + step.1));
            let (w1, w2) = (chirality_of(t1, delta), chirality_of(t2, delta));
            pot.push(double_well(w1) + double_well(w2));
            let dw = (w2 - w1) / l;
            grad.push(rho_total(t1, t2) * dw * dw);
        }
        Split { potential: pot_c * pairwise(&pot), gradient: grad_c * pairwise(&grad) }
    };
    let sh = split(&hor, &th.theta_hor, (1, 0));
    let sv = split(&ver, &th.theta_ver, (0, 1));
    let horizontal = sh.potential + sh.gradient;
    let vertical = sv.potential + sv.gradient;
    Ok(EnergyReport {
        total: horizontal + vertical,
        horizontal,
        vertical,
        potential_part: Some(sh.potential + sv.potential),
        gradient_part: Some(sh.gradient + sv.gradient),
        horizontal_split: Some(sh),
        vertical_split: Some(sv),
        term_count: hor.len() + ver.len(),
        horizontal_terms: hor.len(),
        vertical_terms: ver.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Horizontal,
    Vertical,
}

/// Diagnostic `(1/2ε)λ² Σ [W(g^{i,j}) + W(g^{shift})] + ελ² Σ |∂_k g|²` over every
/// site whose shifted neighbour exists.
pub fn discrete_mm<T: Real>(g: &ScalarGrid<T>, epsilon: T, direction: Direction) -> T {
    let (nx, ny) = (g.nx(), g.ny());
    let l = g.lambda();
    let (di, dj) = match direction {
        Direction::Horizontal => (1, 0),
        Direction::Vertical => (0, 1),
    };
    let mut pot = Vec::new();
    let mut grad = Vec::new();
    for j in 0..ny.saturating_sub(dj) {
        for i in 0..nx.saturating_sub(di) {
            let (a, b) = (g.get(i, j), g.get(i + di, j + dj));
            pot.push(double_well(a) + double_well(b));
            let d = (b - a) / l;
            grad.push(d * d);
        }
    }
    let l2 = l * l;
    l2 / (T::lit(2.0) * epsilon) * pairwise(&pot) + epsilon * l2 * pairwise(&grad)
}

/// One-dimensional version with measure `λ`.
pub fn discrete_mm_1d<T: Real>(g: &[T], lambda: T, epsilon: T) -> T {
    let pot: Vec<T> = g.windows(2).map(|p| double_well(p[0]) + double_well(p[1])).collect();
    let grad: Vec<T> = g.windows(2).map(|p| {
        let d = (p[1] - p[0]) / lambda;
        d * d
    })
    .collect();
    lambda / (T::lit(2.0) * epsilon) * pairwise(&pot) + epsilon * lambda * pairwise(&grad)
}

/// `H_n` of a chirality pair: finite on the image of `T_n`, inadmissible otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PairEnergy<T = f64> {
    Admissible { report: EnergyReport<T> },
    Inadmissible { plaquettes: Vec<(usize, usize)>, max_residual: f64 },
}

pub fn energy_h_pair<T: Real>(pair: &ChiralityPair<T>, domain: &Domain, params: &ModelParams<T>) -> Result<PairEnergy<T>> {
    match reconstruct_spin(pair, params, T::zero()) {
        Ok(u) => Ok(PairEnergy::Admissible { report: energy_h(&u, domain, params) }),
        Err(Error::Inadmissible { plaquettes, max_residual }) => Ok(PairEnergy::Inadmissible { plaquettes, max_residual }),
        Err(e) => Err(e),
    }
}
