//! Oriented bond angles, the chirality transform `T_n`, discrete vorticity and
//! reconstruction of spins from chirality data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ModelParams, ScalarGrid, SpinField};
use crate::scalar::Real;

fn unit_tol<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(16.0))
}

/// Angle from `u` to `v` in `[−π, π)`; antipodal vectors give `−π`.
pub fn oriented_angle<T: Real>(u: [T; 2], v: [T; 2]) -> Result<T> {
    for w in [u, v] {
        let n = (w[0] * w[0] + w[1] * w[1]).sqrt();
        if !((n - T::one()).abs() <= unit_tol()) {
            return Err(Error::NonUnit(n.as_f64()));
        }
    }
    Ok(angle_unchecked(u, v))
}

#[inline]
pub(crate) fn angle_unchecked<T: Real>(u: [T; 2], v: [T; 2]) -> T {
    let cross = u[0] * v[1] - u[1] * v[0];
    let dot = u[0] * v[0] + u[1] * v[1];
    wrap_angle(cross.atan2(dot))
}

/// Maps `+π` (the only value `atan2` can return outside `[−π, π)`) to `−π`.
#[inline]
pub(crate) fn wrap_angle<T: Real>(a: T) -> T {
    if a >= T::PI() {
        -T::PI()
    } else {
        a
    }
}

/// Oriented angles along horizontal bonds (`(nx−1) × ny`) and vertical bonds (`nx × (ny−1)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct ThetaFields<T = f64> {
    pub theta_hor: ScalarGrid<T>,
    pub theta_ver: ScalarGrid<T>,
}

pub fn theta_fields<T: Real>(u: &SpinField<T>) -> Result<ThetaFields<T>> {
    let (nx, ny) = (u.nx(), u.ny());
    if nx < 2 || ny < 2 {
        return Err(Error::GridTooSmall { nx, ny, need: "2x2 spins" });
    }
    let units = u.units();
    let at = |i: usize, j: usize| units[j * nx + i];
    let l = u.lambda();
    Ok(ThetaFields {
        theta_hor: ScalarGrid::from_fn(nx - 1, ny, l, |i, j| angle_unchecked(at(i, j), at(i + 1, j))),
        theta_ver: ScalarGrid::from_fn(nx, ny - 1, l, |i, j| angle_unchecked(at(i, j), at(i, j + 1))),
    })
}

/// Horizontal and vertical chirality order parameters.
///
/// `w` lives on horizontal bonds and has one column fewer than the spin grid;
/// `z` lives on vertical bonds and has one row fewer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    into = "PairRepr<T>",
    try_from = "PairRepr<T>",
    bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>")
)]
pub struct ChiralityPair<T: Real = f64> {
    pub w: ScalarGrid<T>,
    pub z: ScalarGrid<T>,
    pub delta: T,
}

#[derive(Serialize, Deserialize)]
struct PairRepr<T> {
    nx: usize,
    ny: usize,
    lambda: T,
    delta: T,
    w: Vec<T>,
    z: Vec<T>,
}

impl<T: Real> From<ChiralityPair<T>> for PairRepr<T> {
    fn from(p: ChiralityPair<T>) -> Self {
        let (nx, ny, lambda) = (p.z.nx(), p.w.ny(), p.w.lambda());
        PairRepr { nx, ny, lambda, delta: p.delta, w: p.w.into_values(), z: p.z.into_values() }
    }
}

impl<T: Real> TryFrom<PairRepr<T>> for ChiralityPair<T> {
    type Error = Error;
    fn try_from(r: PairRepr<T>) -> Result<Self> {
        if r.nx < 2 || r.ny < 2 {
            return Err(Error::GridTooSmall { nx: r.nx, ny: r.ny, need: "2x2 spins" });
        }
        ChiralityPair::new(
            ScalarGrid::new(r.nx - 1, r.ny, r.lambda, r.w)?,
            ScalarGrid::new(r.nx, r.ny - 1, r.lambda, r.z)?,
            r.delta,
        )
    }
}

impl<T: Real> ChiralityPair<T> {
    pub fn new(w: ScalarGrid<T>, z: ScalarGrid<T>, delta: T) -> Result<Self> {
        if w.nx() + 1 != z.nx() || w.ny() != z.ny() + 1 {
            return Err(Error::InvalidInput(format!(
                "w is {}x{} and z is {}x{}; expected (nx-1)xny and nx(ny-1)",
                w.nx(),
                w.ny(),
                z.nx(),
                z.ny()
            )));
        }
        if !(delta > T::zero() && delta < T::one()) {
            return Err(Error::InvalidInput(format!("delta must lie in (0, 1), got {delta}")));
        }
        Ok(ChiralityPair { w, z, delta })
    }

    /// Dimensions of the underlying spin grid.
    pub fn spin_dims(&self) -> (usize, usize) {
        (self.z.nx(), self.w.ny())
    }

    /// Constant pair on an `nx × ny` spin grid.
    pub fn constant(nx: usize, ny: usize, lambda: T, delta: T, w: T, z: T) -> Result<Self> {
        Self::new(ScalarGrid::constant(nx - 1, ny, lambda, w), ScalarGrid::constant(nx, ny - 1, lambda, z), delta)
    }
}

#[inline]
pub(crate) fn chirality_of<T: Real>(theta: T, delta: T) -> T {
    (T::lit(2.0) / delta).sqrt() * (theta / T::lit(2.0)).sin()
}

/// The transform `T_n`: `w = √(2/δ) sin(θ_hor/2)`, `z = √(2/δ) sin(θ_ver/2)`.
pub fn transform<T: Real>(u: &SpinField<T>, params: &ModelParams<T>) -> Result<(ThetaFields<T>, ChiralityPair<T>)> {
    let th = theta_fields(u)?;
    let pair = pair_from_theta(&th, params.delta)?;
    Ok((th, pair))
}

pub fn pair_from_theta<T: Real>(th: &ThetaFields<T>, delta: T) -> Result<ChiralityPair<T>> {
    let map = |g: &ScalarGrid<T>| {
        ScalarGrid::from_fn(g.nx(), g.ny(), g.lambda(), |i, j| chirality_of(g.get(i, j), delta))
    };
    ChiralityPair::new(map(&th.theta_hor), map(&th.theta_ver), delta)
}

/// Plaquette sum `θ_hor^{i,j} + θ_ver^{i+1,j} − θ_hor^{i,j+1} − θ_ver^{i,j}` before snapping.
pub fn plaquette_sums<T: Real>(th: &ThetaFields<T>) -> Result<ScalarGrid<T>> {
    let (h, v) = (&th.theta_hor, &th.theta_ver);
    if h.nx() + 1 != v.nx() || h.ny() != v.ny() + 1 || v.nx() < 2 {
        return Err(Error::InvalidInput("theta fields have inconsistent shapes".into()));
    }
    Ok(ScalarGrid::from_fn(h.nx(), v.ny(), h.lambda(), |i, j| {
        h.get(i, j) + v.get(i + 1, j) - h.get(i, j + 1) - v.get(i, j)
    }))
}

/// Discrete vorticity, snapped to `{−2π, 0, 2π}`.
pub fn vorticity<T: Real>(th: &ThetaFields<T>) -> Result<ScalarGrid<T>> {
    let raw = plaquette_sums(th)?;
    let tau = T::TAU();
    let tol = T::lit(1e-6).max(T::epsilon() * T::lit(256.0));
    let mut out = raw.clone();
    for j in 0..raw.ny() {
        for i in 0..raw.nx() {
            let v = raw.get(i, j);
            let snapped = [-tau, T::zero(), tau]
                .into_iter()
                .find(|c| (v - *c).abs() <= tol)
                .ok_or(Error::VorticitySnap { i, j, value: v.as_f64() })?;
            out.set(i, j, snapped);
        }
    }
    Ok(out)
}

/// Inverts `T_n` up to a global rotation.
///
/// Bond angles are recovered as `2 arcsin(√(δ/2) w)`, integrated along the bottom
/// row and then up each column; every plaquette must close exactly (not mod 2π).
pub fn reconstruct_spin<T: Real>(pair: &ChiralityPair<T>, params: &ModelParams<T>, anchor: T) -> Result<SpinField<T>> {
    let delta = pair.delta;
    if (delta - params.delta).abs() > T::epsilon() * T::lit(4.0) {
        log::warn!("pair delta {} differs from params delta {}", delta, params.delta);
    }
    let bound = (T::lit(2.0) / delta).sqrt();
    let slack = bound * T::lit(1e-12).max(T::epsilon() * T::lit(4.0));
    let angle = |s: T| -> Result<T> {
        if !(s.abs() <= bound + slack) {
            return Err(Error::InvalidInput(format!("chirality {s} exceeds the bound {bound}")));
        }
        let x = ((delta / T::lit(2.0)).sqrt() * s).max(-T::one()).min(T::one());
        Ok(T::lit(2.0) * x.asin())
    };
    let (nx, ny) = pair.spin_dims();
    let l = pair.w.lambda();
    let mut th = ThetaFields {
        theta_hor: ScalarGrid::constant(nx - 1, ny, l, T::zero()),
        theta_ver: ScalarGrid::constant(nx, ny - 1, l, T::zero()),
    };
    for j in 0..ny {
        for i in 0..nx - 1 {
            th.theta_hor.set(i, j, angle(pair.w.get(i, j))?);
        }
    }
    for j in 0..ny - 1 {
        for i in 0..nx {
            th.theta_ver.set(i, j, angle(pair.z.get(i, j))?);
        }
    }
    let sums = plaquette_sums(&th)?;
    let tol = T::lit(1e-8).max(T::epsilon() * T::lit(64.0));
    let mut bad = Vec::new();
    let mut worst = T::zero();
    for j in 0..sums.ny() {
        for i in 0..sums.nx() {
            let r = sums.get(i, j).abs();
            if r > tol {
                bad.push((i, j));
                worst = worst.max(r);
            }
        }
    }
    if !bad.is_empty() {
        return Err(Error::Inadmissible { plaquettes: bad, max_residual: worst.as_f64() });
    }
    let mut psi = vec![T::zero(); nx * ny];
    psi[0] = anchor;
    for i in 1..nx {
        psi[i] = psi[i - 1] + th.theta_hor.get(i - 1, 0);
    }
    for j in 1..ny {
        for i in 0..nx {
            psi[j * nx + i] = psi[(j - 1) * nx + i] + th.theta_ver.get(i, j - 1);
        }
    }
    SpinField::new(nx, ny, l, psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn oriented_angle_cases() {
        assert_eq!(oriented_angle([1.0, 0.0], [0.0, 1.0]).unwrap(), FRAC_PI_2);
        assert_eq!(oriented_angle([1.0, 0.0], [-1.0, 0.0]).unwrap(), -PI);
        assert_eq!(oriented_angle([0.6, 0.8], [0.6, 0.8]).unwrap(), 0.0);
        assert!(oriented_angle([1.0, 0.1], [1.0, 0.0]).is_err());
    }

    #[test]
    fn four_spin_vortex() {
        let u = SpinField::new(2, 2, 1.0, vec![0.0, FRAC_PI_2, -FRAC_PI_2, PI]).unwrap();
        let th = theta_fields(&u).unwrap();
        let v = vorticity(&th).unwrap();
        assert_eq!(v.get(0, 0), 2.0 * PI);
    }

    #[test]
    fn order_parameter_at_sixty_degrees() {
        assert!((chirality_of(PI / 3.0, 0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closure_violation_is_reported() {
        let p = ModelParams::new(0.1, 0.3).unwrap();
        let mut pair = ChiralityPair::constant(3, 3, 0.1, 0.3, 1.0, 1.0).unwrap();
        pair.w.set(0, 1, -1.0);
        match reconstruct_spin(&pair, &p, 0.0) {
            Err(Error::Inadmissible { plaquettes, .. }) => assert_eq!(plaquettes, vec![(0, 0), (0, 1)]),
            other => panic!("unexpected {other:?}"),
        }
    }
}
