use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Support half-width in units of ε used when none is given.
pub const DEFAULT_RADIUS: f64 = 1.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelShape {
    /// `b(z₁/R) b(z₂/R)` on the square of half-width `R`
    Product,
    /// `b(|z|/R)` on the disc of radius `R`
    Radial,
}

/// Smooth mollifier `η` built from `b(t) = exp(−1/(1−t²))`, normalized to unit mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub shape: KernelShape,
    pub radius: f64,
}

impl Default for Kernel {
    fn default() -> Self {
        Kernel { shape: KernelShape::Product, radius: DEFAULT_RADIUS }
    }
}

/// `exp(−1/(1−t²))` on `(−1, 1)`, zero outside.
#[inline]
pub fn bump(t: f64) -> f64 {
    let s = 1.0 - t * t;
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for m in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * m - 1) as f64 * z * p2 - (m - 1) as f64 * p3) / m as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[k] = -z;
        x[n - 1 - k] = z;
        w[k] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - k] = w[k];
    }
    (x, w)
}

/// Composite Gauss–Legendre integral of `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut s = 0.0;
        for k in 0..order {
            s += w[k] * f(mid + 0.5 * h * x[k]);
        }
        total += 0.5 * h * s;
    }
    total
}

fn mass_1d() -> f64 {
    static M: OnceLock<f64> = OnceLock::new();
    *M.get_or_init(|| integrate(bump, -1.0, 1.0, 256, 12))
}

fn mass_radial() -> f64 {
    static M: OnceLock<f64> = OnceLock::new();
    *M.get_or_init(|| 2.0 * std::f64::consts::PI * integrate(|r| bump(r) * r, 0.0, 1.0, 256, 12))
}

impl Kernel {
    pub fn new(shape: KernelShape, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidInput(format!("kernel radius must be positive, got {radius}")));
        }
        Ok(Kernel { shape, radius })
    }

    pub fn product(radius: f64) -> Result<Self> {
        Self::new(KernelShape::Product, radius)
    }

    /// `η(z)` for `z` in units of ε.
    pub fn eval(&self, z: [f64; 2]) -> f64 {
        let r = self.radius;
        match self.shape {
            KernelShape::Product => {
                let c = mass_1d() * r;
                bump(z[0] / r) * bump(z[1] / r) / (c * c)
            }
            KernelShape::Radial => {
                let n = (z[0] * z[0] + z[1] * z[1]).sqrt();
                bump(n / r) / (mass_radial() * r * r)
            }
        }
    }

    /// Unnormalized one-dimensional factor of the product kernel.
    #[inline]
    pub(crate) fn factor(&self, t: f64) -> f64 {
        bump(t / self.radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(5);
        let q = |p: i32| x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum::<f64>();
        assert!((q(0) - 2.0).abs() < 1e-14);
        assert!((q(8) - 2.0 / 9.0).abs() < 1e-14);
        assert!(q(7).abs() < 1e-14);
    }

    #[test]
    fn bump_support() {
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(-1.5), 0.0);
        assert!((bump(0.0) - (-1f64).exp()).abs() < 1e-16);
    }
}
