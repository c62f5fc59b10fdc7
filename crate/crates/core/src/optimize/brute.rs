use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bc::BoundaryCondition;
use super::minimize::{minimize_chain, MinimizeOptions};
use super::objective::Objective;
use crate::error::{Error, Result};
use crate::lattice::ModelParams;

pub const MAX_FREE_SITES: usize = 7;
pub const BUDGET: f64 = 1e8;
const KEEP: usize = 10;

/// Exhaustive minimum of a chain over angles `2πk/m` at the free sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForce {
    pub minimum: f64,
    pub argmin: Vec<f64>,
    /// Largest energy change from the argmin to a neighbouring grid point.
    pub slack: f64,
    /// Best grid points, lowest energy first.
    pub best: Vec<(f64, Vec<f64>)>,
    pub evaluations: u64,
}

fn push_best(best: &mut Vec<(f64, Vec<usize>)>, e: f64, idx: &[usize]) {
    if best.len() == KEEP && e >= best[KEEP - 1].0 {
        return;
    }
    let pos = best.partition_point(|b| b.0 <= e);
    best.insert(pos, (e, idx.to_vec()));
    best.truncate(KEEP);
}

pub fn brute_force_1d(params: &ModelParams<f64>, bc: &BoundaryCondition, m: usize) -> Result<BruteForce> {
    let obj = Objective::chain(params, bc)?;
    let free: Vec<usize> = (0..bc.nx).filter(|&k| !bc.frozen[k]).collect();
    let n = free.len();
    if n > MAX_FREE_SITES {
        return Err(Error::InvalidInput(format!("brute force takes at most {MAX_FREE_SITES} free sites, got {n}")));
    }
    if m < 2 {
        return Err(Error::InvalidInput("angle grid needs at least two values".into()));
    }
    let count = (m as f64).powi(n as i32);
    if count > BUDGET {
        return Err(Error::Budget(count));
    }
    let grid: Vec<f64> = (0..m).map(|k| 2.0 * std::f64::consts::PI * k as f64 / m as f64).collect();
    let base: Vec<f64> = (0..bc.nx).map(|k| if bc.frozen[k] { bc.values[k] } else { 0.0 }).collect();
    let ha = params.alpha / 2.0;
    let len = bc.nx;
    let eval = |idx: &[usize], u: &mut Vec<[f64; 2]>| -> f64 {
        for (p, &k) in free.iter().enumerate() {
            let (s, c) = grid[idx[p]].sin_cos();
            u[k] = [c, s];
        }
        let mut e = 0.0;
        for i in 0..len.saturating_sub(2) {
            let r0 = u[i + 2][0] - ha * u[i + 1][0] + u[i][0];
            let r1 = u[i + 2][1] - ha * u[i + 1][1] + u[i][1];
            e += r0 * r0 + r1 * r1;
        }
        e
    };
    let units0: Vec<[f64; 2]> = base
        .iter()
        .map(|a| {
            let (s, c) = a.sin_cos();
            [c, s]
        })
        .collect();
    let outer = if n == 0 { 1 } else { m };
    let parts: Vec<Vec<(f64, Vec<usize>)>> = (0..outer)
        .into_par_iter()
        .map(|first| {
            let mut u = units0.clone();
            let mut idx = vec![0usize; n];
            if n > 0 {
                idx[0] = first;
            }
            let mut best = Vec::with_capacity(KEEP + 1);
            loop {
                let e = eval(&idx, &mut u);
                push_best(&mut best, e, &idx);
                // odometer over the inner indices
                let mut p = n;
                loop {
                    if p <= 1 {
                        return best;
                    }
                    p -= 1;
                    idx[p] += 1;
                    if idx[p] < m {
                        break;
                    }
                    idx[p] = 0;
                }
            }
        })
        .collect();
    let mut best = Vec::new();
    for part in parts {
        for (e, idx) in part {
            push_best(&mut best, e, &idx);
        }
    }
    let to_psi = |idx: &[usize]| {
        let mut psi = base.clone();
        for (p, &k) in free.iter().enumerate() {
            psi[k] = grid[idx[p]];
        }
        psi
    };
    let (_, arg_idx) = best[0].clone();
    let argmin = to_psi(&arg_idx);
    let minimum = obj.energy(&argmin)?;
    let mut slack: f64 = 0.0;
    for p in 0..n {
        for step in [1, m - 1] {
            let mut nb = arg_idx.clone();
            nb[p] = (nb[p] + step) % m;
            slack = slack.max((obj.energy(&to_psi(&nb))? - minimum).abs());
        }
    }
    let best = best.iter().map(|(_, idx)| {
        let psi = to_psi(idx);
        obj.energy(&psi).map(|e| (e, psi))
    })
    .collect::<Result<Vec<_>>>()?;
    Ok(BruteForce { minimum, argmin, slack, best, evaluations: count as u64 })
}

/// Smallest energy reached by [`minimize_chain`] started from each of the oracle's best points.
pub fn multistart_chain(
    params: &ModelParams<f64>,
    bc: &BoundaryCondition,
    oracle: &BruteForce,
    opts: &MinimizeOptions,
) -> Result<f64> {
    let mut best = f64::INFINITY;
    for (_, start) in &oracle.best {
        let (run, _) = minimize_chain(start, params, bc, opts)?;
        best = best.min(run.energy);
    }
    Ok(best)
}

/// Minimizer of a single free site `k` given its neighbours: `u_k = −S/|S|`.
pub fn single_site_optimum(psi: &[f64], k: usize, params: &ModelParams<f64>) -> Result<f64> {
    let h = params.alpha / 2.0;
    let u = |m: isize| -> Option<[f64; 2]> {
        if m < 0 || m as usize >= psi.len() {
            None
        } else {
            let (s, c) = psi[m as usize].sin_cos();
            Some([c, s])
        }
    };
    let k = k as isize;
    let mut s = [0.0, 0.0];
    let mut add = |c: f64, v: [f64; 2]| {
        s[0] += c * v[0];
        s[1] += c * v[1];
    };
    // stencil (k−2, k−1, k): u_k + (u_{k−2} − h u_{k−1})
    if let (Some(a), Some(b)) = (u(k - 2), u(k - 1)) {
        add(1.0, a);
        add(-h, b);
    }
    // stencil (k−1, k, k+1): −h u_k + (u_{k−1} + u_{k+1}), weighted by −h
    if let (Some(a), Some(c)) = (u(k - 1), u(k + 1)) {
        add(-h, a);
        add(-h, c);
    }
    // stencil (k, k+1, k+2): u_k + (u_{k+2} − h u_{k+1})
    if let (Some(b), Some(c)) = (u(k + 1), u(k + 2)) {
        add(-h, b);
        add(1.0, c);
    }
    let norm = s[0].hypot(s[1]);
    if norm == 0.0 {
        return Err(Error::InvalidInput("single-site optimum is not unique".into()));
    }
    Ok((-s[1]).atan2(-s[0]))
}
