use rayon::prelude::*;

use super::bc::BoundaryCondition;
use crate::energy::stencil_sites;
use crate::error::{Error, Result};
use crate::lattice::{Domain, ModelParams};
use crate::sum::pairwise;

/// `H_n` as a smooth function of the free angles: `P Σ |u_c − (α/2) u_b + u_a|²`
/// over three-site stencils `[a, b, c]` of flat indices.
#[derive(Debug, Clone)]
pub struct Objective {
    n: usize,
    stencils: Vec<[usize; 3]>,
    prefactor: f64,
    half_alpha: f64,
    frozen: Vec<bool>,
    row_len: usize,
    // per site: (stencil, slot) pairs in stencil order
    offsets: Vec<usize>,
    incidence: Vec<(usize, u8)>,
}

impl Objective {
    fn build(n: usize, row_len: usize, stencils: Vec<[usize; 3]>, prefactor: f64, half_alpha: f64, frozen: Vec<bool>) -> Self {
        let mut counts = vec![0usize; n + 1];
        for s in &stencils {
            for &k in s {
                counts[k + 1] += 1;
            }
        }
        for k in 0..n {
            counts[k + 1] += counts[k];
        }
        let offsets = counts.clone();
        let mut fill = counts;
        let mut incidence = vec![(0usize, 0u8); offsets[n]];
        for (t, s) in stencils.iter().enumerate() {
            for (slot, &k) in s.iter().enumerate() {
                incidence[fill[k]] = (t, slot as u8);
                fill[k] += 1;
            }
        }
        Objective { n, stencils, prefactor, half_alpha, frozen, row_len, offsets, incidence }
    }

    /// Two-dimensional `H_n` over the stencils of `I(Ω)`.
    pub fn lattice(domain: &Domain, params: &ModelParams<f64>, bc: &BoundaryCondition) -> Result<Self> {
        bc.validate()?;
        let (nx, ny) = (bc.nx, bc.ny);
        let (hor, ver) = stencil_sites(domain, params.lambda, nx, ny);
        let at = |i: usize, j: usize| j * nx + i;
        let mut stencils: Vec<[usize; 3]> = hor.iter().map(|&(i, j)| [at(i, j), at(i + 1, j), at(i + 2, j)]).collect();
        stencils.extend(ver.iter().map(|&(i, j)| [at(i, j), at(i, j + 1), at(i, j + 2)]));
        let p = params.scale() * params.lambda * params.lambda / 2.0;
        Ok(Self::build(nx * ny, nx, stencils, p, params.alpha / 2.0, bc.frozen.clone()))
    }

    /// One-dimensional `H_n` of a chain over `[λ·0, λ(len−1)]`.
    pub fn chain(params: &ModelParams<f64>, bc: &BoundaryCondition) -> Result<Self> {
        bc.validate()?;
        if bc.ny != 1 {
            return Err(Error::InvalidInput(format!("chain boundary condition must have one row, got {}", bc.ny)));
        }
        let len = bc.nx;
        let stencils = (0..len.saturating_sub(2)).map(|i| [i, i + 1, i + 2]).collect();
        let p = params.scale() * params.lambda / 2.0;
        Ok(Self::build(len, len, stencils, p, params.alpha / 2.0, bc.frozen.clone()))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn stencil_count(&self) -> usize {
        self.stencils.len()
    }

    pub fn frozen(&self) -> &[bool] {
        &self.frozen
    }

    fn check(&self, psi: &[f64]) -> Result<()> {
        if psi.len() != self.n {
            return Err(Error::InvalidInput(format!("expected {} angles, got {}", self.n, psi.len())));
        }
        Ok(())
    }

    fn residuals(&self, units: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let h = self.half_alpha;
        self.stencils
            .par_iter()
            .with_min_len(1024)
            .map(|&[a, b, c]| [units[c][0] - h * units[b][0] + units[a][0], units[c][1] - h * units[b][1] + units[a][1]])
            .collect()
    }

    fn units(psi: &[f64]) -> Vec<[f64; 2]> {
        psi.par_iter()
            .with_min_len(1024)
            .map(|a| {
                let (s, c) = a.sin_cos();
                [c, s]
            })
            .collect()
    }

    pub fn energy(&self, psi: &[f64]) -> Result<f64> {
        self.check(psi)?;
        let r = self.residuals(&Self::units(psi));
        let sq: Vec<f64> = r.iter().map(|v| v[0] * v[0] + v[1] * v[1]).collect();
        Ok(self.prefactor * pairwise(&sq))
    }

    /// Energy and `∂H/∂ψ`, zero at frozen sites.
    pub fn energy_and_gradient(&self, psi: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check(psi)?;
        let units = Self::units(psi);
        let r = self.residuals(&units);
        let sq: Vec<f64> = r.iter().map(|v| v[0] * v[0] + v[1] * v[1]).collect();
        let energy = self.prefactor * pairwise(&sq);
        let coef = [1.0, -self.half_alpha, 1.0];
        let two_p = 2.0 * self.prefactor;
        let mut grad = vec![0.0; self.n];
        grad.par_chunks_mut(self.row_len.max(1)).enumerate().for_each(|(row, out)| {
            for (o, g) in out.iter_mut().enumerate() {
                let k = row * self.row_len + o;
                if self.frozen[k] {
                    continue;
                }
                let perp = [-units[k][1], units[k][0]];
                let mut acc = 0.0;
                for &(t, slot) in &self.incidence[self.offsets[k]..self.offsets[k + 1]] {
                    acc += coef[slot as usize] * (r[t][0] * perp[0] + r[t][1] * perp[1]);
                }
                *g = two_p * acc;
            }
        });
        Ok((energy, grad))
    }

    /// `H(ψ + t d) − H(ψ)` from per-stencil differences, accurate when the step is tiny.
    pub fn energy_change(&self, psi: &[f64], dir: &[f64], t: f64) -> Result<f64> {
        self.check(psi)?;
        self.check(dir)?;
        let units = Self::units(psi);
        let r = self.residuals(&units);
        // u(ψ + s) − u(ψ) = −2 sin²(s/2) u + sin(s) u⊥
        let du: Vec<[f64; 2]> = units
            .par_iter()
            .zip(dir.par_iter())
            .with_min_len(1024)
            .map(|(u, d)| {
                let s = t * d;
                let h = (s / 2.0).sin();
                let (a, b) = (-2.0 * h * h, s.sin());
                [a * u[0] - b * u[1], a * u[1] + b * u[0]]
            })
            .collect();
        let dr = self.residuals(&du);
        let terms: Vec<f64> = r
            .iter()
            .zip(&dr)
            .map(|(r, d)| 2.0 * (r[0] * d[0] + r[1] * d[1]) + d[0] * d[0] + d[1] * d[1])
            .collect();
        Ok(self.prefactor * pairwise(&terms))
    }

    /// Change in energy when site `k` moves to angle `new`, from its stencils only.
    pub(crate) fn local_delta(&self, psi: &[f64], k: usize, new: f64) -> f64 {
        let h = self.half_alpha;
        let unit = |m: usize, moved: bool| {
            let (s, c) = if moved && m == k { new.sin_cos() } else { psi[m].sin_cos() };
            [c, s]
        };
        let mut d = 0.0;
        for &(t, _) in &self.incidence[self.offsets[k]..self.offsets[k + 1]] {
            let [a, b, c] = self.stencils[t];
            let (ua, ub, uc) = (unit(a, true), unit(b, true), unit(c, true));
            let (oa, ob, oc) = (unit(a, false), unit(b, false), unit(c, false));
            let rn = [uc[0] - h * ub[0] + ua[0], uc[1] - h * ub[1] + ua[1]];
            let ro = [oc[0] - h * ob[0] + oa[0], oc[1] - h * ob[1] + oa[1]];
            d += rn[0] * rn[0] + rn[1] * rn[1] - ro[0] * ro[0] - ro[1] * ro[1];
        }
        self.prefactor * d
    }
}
