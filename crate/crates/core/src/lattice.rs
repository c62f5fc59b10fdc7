//! Scaled square lattice: domains, index sets, grid functions and discrete calculus.
//!
//! Lattice site `(i, j)` sits at the point `(λi, λj)`; the cell `Q(i,j)` is the
//! square `[λi, λ(i+1)] × [λj, λ(j+1)]`. Grids store values row-major,
//! `values[j * nx + i]`, with `(0,0)` anchored at the origin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative slack used when comparing lattice coordinates with domain edges.
const EDGE_TOL: f64 = 1e-9;

/// Axis-aligned rectangle, optionally narrowed to a simple polygon inside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub origin: [f64; 2],
    pub width: f64,
    pub height: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polygon: Option<Vec<[f64; 2]>>,
}

impl Domain {
    pub fn rect(origin: [f64; 2], width: f64, height: f64) -> Result<Self> {
        let d = Domain { origin, width, height, polygon: None };
        d.validate()?;
        Ok(d)
    }

    pub fn unit_square() -> Self {
        Domain { origin: [0.0, 0.0], width: 1.0, height: 1.0, polygon: None }
    }

    /// The rectangle spanned by the sites of an `nx × ny` grid. Its index set is
    /// exactly the set of sites where both second-neighbour stencils fit.
    pub fn of_sites(nx: usize, ny: usize, lambda: f64) -> Self {
        Domain {
            origin: [0.0, 0.0],
            width: lambda * (nx.max(1) - 1) as f64,
            height: lambda * (ny.max(1) - 1) as f64,
            polygon: None,
        }
    }

    /// Polygon domain; the bounding box becomes the rectangle.
    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidInput("polygon needs at least 3 vertices".into()));
        }
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for v in &vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        let d = Domain { origin: lo, width: hi[0] - lo[0], height: hi[1] - lo[1], polygon: Some(vertices) };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.origin.iter().all(|x| x.is_finite()) && self.width.is_finite() && self.height.is_finite();
        if !finite || self.width <= 0.0 || self.height <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "domain needs finite positive extent, got {} x {}",
                self.width, self.height
            )));
        }
        if let Some(p) = &self.polygon {
            if p.len() < 3 || p.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
                return Err(Error::InvalidInput("degenerate polygon".into()));
            }
        }
        Ok(())
    }

    pub fn max(&self) -> [f64; 2] {
        [self.origin[0] + self.width, self.origin[1] + self.height]
    }

    pub fn area(&self) -> f64 {
        match &self.polygon {
            Some(p) => polygon_area(p).abs(),
            None => self.width * self.height,
        }
    }

    fn tol(&self) -> f64 {
        EDGE_TOL * self.width.max(self.height)
    }

    /// Closed membership test.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let t = self.tol();
        let [x1, y1] = self.max();
        let in_rect = p[0] >= self.origin[0] - t && p[0] <= x1 + t && p[1] >= self.origin[1] - t && p[1] <= y1 + t;
        in_rect && self.polygon.as_ref().map_or(true, |poly| point_in_polygon(poly, p, t))
    }

    /// Whether the closed cell `Q(i,j)` lies in the closed domain.
    pub fn contains_cell(&self, i: i64, j: i64, lambda: f64) -> bool {
        let (x0, y0) = (lambda * i as f64, lambda * j as f64);
        let (x1, y1) = (lambda * (i + 1) as f64, lambda * (j + 1) as f64);
        let t = self.tol();
        let [mx, my] = self.max();
        if x0 < self.origin[0] - t || y0 < self.origin[1] - t || x1 > mx + t || y1 > my + t {
            return false;
        }
        let Some(poly) = &self.polygon else { return true };
        let corners = [[x0, y0], [x1, y0], [x1, y1], [x0, y1]];
        if !corners.iter().all(|&c| point_in_polygon(poly, c, t)) {
            return false;
        }
        // a reflex notch entering the cell leaves a polygon vertex strictly inside it
        !poly.iter().any(|v| v[0] > x0 + t && v[0] < x1 - t && v[1] > y0 + t && v[1] < y1 - t)
    }
}

fn polygon_area(p: &[[f64; 2]]) -> f64 {
    let n = p.len();
    (0..n).map(|k| {
        let (a, b) = (p[k], p[(k + 1) % n]);
        a[0] * b[1] - b[0] * a[1]
    })
    .sum::<f64>()
        / 2.0
}

fn point_in_polygon(poly: &[[f64; 2]], p: [f64; 2], tol: f64) -> bool {
    let n = poly.len();
    for k in 0..n {
        if dist_to_segment(p, poly[k], poly[(k + 1) % n]) <= tol {
            return true;
        }
    }
    let mut inside = false;
    for k in 0..n {
        let (a, b) = (poly[k], poly[(k + 1) % n]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

pub(crate) fn dist_to_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 { (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let (qx, qy) = (a[0] + t * dx - p[0], a[1] + t * dy - p[1]);
    (qx * qx + qy * qy).sqrt()
}

/// `I(Ω)`: indices whose closed cells `Q(i,j)`, `Q(i+1,j)`, `Q(i,j+1)` all lie in Ω,
/// in row-major order (`j` outer).
pub fn index_set(domain: &Domain, lambda: f64) -> Vec<(i64, i64)> {
    if !(lambda > 0.0) || domain.validate().is_err() {
        return Vec::new();
    }
    let [mx, my] = domain.max();
    let (i0, i1) = ((domain.origin[0] / lambda).floor() as i64 - 1, (mx / lambda).ceil() as i64 + 1);
    let (j0, j1) = ((domain.origin[1] / lambda).floor() as i64 - 1, (my / lambda).ceil() as i64 + 1);
    let mut out = Vec::new();
    for j in j0..=j1 {
        for i in i0..=i1 {
            if domain.contains_cell(i, j, lambda)
                && domain.contains_cell(i + 1, j, lambda)
                && domain.contains_cell(i, j + 1, lambda)
            {
                out.push((i, j));
            }
        }
    }
    out
}

/// Scaling regime `(λ, δ)` with the derived `α = 4(1−δ)` and `ε = λ/√(2δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr<T>", bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct ModelParams<T = f64> {
    pub lambda: T,
    pub delta: T,
    pub alpha: T,
    pub epsilon: T,
}

#[derive(Deserialize)]
struct ParamsRepr<T> {
    lambda: T,
    delta: T,
}

impl<T: Real> TryFrom<ParamsRepr<T>> for ModelParams<T> {
    type Error = Error;
    fn try_from(r: ParamsRepr<T>) -> Result<Self> {
        ModelParams::new(r.lambda, r.delta)
    }
}

impl<T: Real> ModelParams<T> {
    pub fn new(lambda: T, delta: T) -> Result<Self> {
        if !(lambda.is_finite() && lambda > T::zero()) {
            return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
        }
        if !(delta > T::zero() && delta < T::one()) {
            return Err(Error::InvalidInput(format!("delta must lie in (0, 1), got {delta}")));
        }
        let two = T::lit(2.0);
        let p = ModelParams {
            lambda,
            delta,
            alpha: T::lit(4.0) * (T::one() - delta),
            epsilon: lambda / (two * delta).sqrt(),
        };
        if p.epsilon >= T::one() {
            log::warn!("epsilon = {} >= 1 is outside the intended regime", p.epsilon);
        }
        Ok(p)
    }

    /// Schedule convention `δ = λ^{2/3}`.
    pub fn with_power_law(lambda: T) -> Result<Self> {
        Self::new(lambda, lambda.powf(T::lit(2.0 / 3.0)))
    }

    /// Helix angle `arccos(1−δ)` of the ground states.
    pub fn theta0(&self) -> T {
        (T::one() - self.delta).acos()
    }

    /// `1/(√2 λ δ^{3/2})`, the renormalization in front of the lattice sums.
    pub fn scale(&self) -> T {
        T::one() / (T::SQRT_2() * self.lambda * self.delta.powf(T::lit(1.5)))
    }

    /// Bound `√(2/δ)` on |w| and |z|.
    pub fn chirality_bound(&self) -> T {
        (T::lit(2.0) / self.delta).sqrt()
    }
}

/// Real-valued grid function, piecewise constant on lattice cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr<T>", bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct ScalarGrid<T = f64> {
    nx: usize,
    ny: usize,
    lambda: T,
    values: Vec<T>,
}

#[derive(Deserialize)]
struct GridRepr<T> {
    nx: usize,
    ny: usize,
    lambda: T,
    values: Vec<T>,
}

impl<T: Real> TryFrom<GridRepr<T>> for ScalarGrid<T> {
    type Error = Error;
    fn try_from(r: GridRepr<T>) -> Result<Self> {
        ScalarGrid::new(r.nx, r.ny, r.lambda, r.values)
    }
}

impl<T: Real> ScalarGrid<T> {
    pub fn new(nx: usize, ny: usize, lambda: T, values: Vec<T>) -> Result<Self> {
        check_shape(nx, ny, lambda, &values, "values")?;
        Ok(ScalarGrid { nx, ny, lambda, values })
    }

    pub fn from_fn(nx: usize, ny: usize, lambda: T, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                values.push(f(i, j));
            }
        }
        ScalarGrid { nx, ny, lambda, values }
    }

    pub fn constant(nx: usize, ny: usize, lambda: T, c: T) -> Self {
        ScalarGrid { nx, ny, lambda, values: vec![c; nx * ny] }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn lambda(&self) -> T {
        self.lambda
    }
    pub fn values(&self) -> &[T] {
        &self.values
    }
    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[j * self.nx + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.values[j * self.nx + i] = v;
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

fn check_shape<T: Real>(nx: usize, ny: usize, lambda: T, values: &[T], what: &str) -> Result<()> {
    if nx.checked_mul(ny) != Some(values.len()) {
        return Err(Error::InvalidInput(format!("{nx}x{ny} grid with {} {what}", values.len())));
    }
    if !(lambda.is_finite() && lambda > T::zero()) {
        return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
    }
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite entry at index {k}")));
    }
    Ok(())
}

/// Spin field stored through a lifting `ψ`: `u^{i,j} = (cos ψ, sin ψ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpinRepr<T>", bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct SpinField<T = f64> {
    nx: usize,
    ny: usize,
    lambda: T,
    angles: Vec<T>,
}

#[derive(Deserialize)]
struct SpinRepr<T> {
    nx: usize,
    ny: usize,
    lambda: T,
    angles: Vec<T>,
}

impl<T: Real> TryFrom<SpinRepr<T>> for SpinField<T> {
    type Error = Error;
    fn try_from(r: SpinRepr<T>) -> Result<Self> {
        SpinField::new(r.nx, r.ny, r.lambda, r.angles)
    }
}

impl<T: Real> SpinField<T> {
    pub fn new(nx: usize, ny: usize, lambda: T, angles: Vec<T>) -> Result<Self> {
        check_shape(nx, ny, lambda, &angles, "angles")?;
        Ok(SpinField { nx, ny, lambda, angles })
    }

    pub fn from_fn(nx: usize, ny: usize, lambda: T, f: impl FnMut(usize, usize) -> T) -> Self {
        let g = ScalarGrid::from_fn(nx, ny, lambda, f);
        SpinField { nx, ny, lambda, angles: g.values }
    }

    /// Helical ground state with chiralities `(w, z) ∈ {±1}²`: `ψ = θ₀(w i + z j)`.
    pub fn ground_state(nx: usize, ny: usize, params: &ModelParams<T>, w: i8, z: i8, anchor: T) -> Self {
        let t = params.theta0();
        let (sw, sz) = (T::lit(w.signum() as f64), T::lit(z.signum() as f64));
        Self::from_fn(nx, ny, params.lambda, |i, j| {
            anchor + sw * t * T::lit(i as f64) + sz * t * T::lit(j as f64)
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn lambda(&self) -> T {
        self.lambda
    }
    pub fn angles(&self) -> &[T] {
        &self.angles
    }
    pub fn angles_mut(&mut self) -> &mut [T] {
        &mut self.angles
    }

    #[inline]
    pub fn angle(&self, i: usize, j: usize) -> T {
        self.angles[j * self.nx + i]
    }

    #[inline]
    pub fn unit(&self, i: usize, j: usize) -> [T; 2] {
        let (s, c) = self.angle(i, j).sin_cos();
        [c, s]
    }

    /// Unit vectors of all sites, row-major.
    pub fn units(&self) -> Vec<[T; 2]> {
        self.angles.iter().map(|a| {
            let (s, c) = a.sin_cos();
            [c, s]
        })
        .collect()
    }

    /// Global rotation by `phi`.
    pub fn rotated(&self, phi: T) -> Self {
        SpinField { angles: self.angles.iter().map(|&a| a + phi).collect(), ..self.clone() }
    }

    pub fn as_grid(&self) -> ScalarGrid<T> {
        ScalarGrid { nx: self.nx, ny: self.ny, lambda: self.lambda, values: self.angles.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Derivative {
    D1,
    D2,
    D11,
    D12,
    D22,
}

pub fn d1<T: Real>(g: &ScalarGrid<T>) -> Result<ScalarGrid<T>> {
    if g.nx < 2 {
        return Err(Error::GridTooSmall { nx: g.nx, ny: g.ny, need: "two columns for d1" });
    }
    let l = g.lambda;
    Ok(ScalarGrid::from_fn(g.nx - 1, g.ny, l, |i, j| (g.get(i + 1, j) - g.get(i, j)) / l))
}

pub fn d2<T: Real>(g: &ScalarGrid<T>) -> Result<ScalarGrid<T>> {
    if g.ny < 2 {
        return Err(Error::GridTooSmall { nx: g.nx, ny: g.ny, need: "two rows for d2" });
    }
    let l = g.lambda;
    Ok(ScalarGrid::from_fn(g.nx, g.ny - 1, l, |i, j| (g.get(i, j + 1) - g.get(i, j)) / l))
}

/// Forward-difference derivatives; the output shrinks by the stencil extent.
pub fn discrete_derivative<T: Real>(g: &ScalarGrid<T>, which: Derivative) -> Result<ScalarGrid<T>> {
    match which {
        Derivative::D1 => d1(g),
        Derivative::D2 => d2(g),
        Derivative::D11 => d1(&d1(g)?),
        Derivative::D12 => d1(&d2(g)?),
        Derivative::D22 => d2(&d2(g)?),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Triangle {
    /// `{λ(i+s, j+t) : s ∈ [0,1], t ∈ [0, 1−s]}`
    Lower,
    /// the complementary upper-right half of the cell
    Upper,
}

/// Continuous piecewise-affine interpolant on the two triangles of each cell.
#[derive(Debug, Clone)]
pub struct AffineInterpolant<T = f64> {
    g: ScalarGrid<T>,
}

impl<T: Real> AffineInterpolant<T> {
    pub fn new(g: ScalarGrid<T>) -> Result<Self> {
        if g.nx < 2 || g.ny < 2 {
            return Err(Error::GridTooSmall { nx: g.nx, ny: g.ny, need: "2x2 for interpolation" });
        }
        Ok(AffineInterpolant { g })
    }

    pub fn grid(&self) -> &ScalarGrid<T> {
        &self.g
    }

    /// Gradient on the triangle `(i, j, tri)`.
    pub fn gradient(&self, i: usize, j: usize, tri: Triangle) -> [T; 2] {
        let g = &self.g;
        let l = g.lambda;
        match tri {
            Triangle::Lower => [(g.get(i + 1, j) - g.get(i, j)) / l, (g.get(i, j + 1) - g.get(i, j)) / l],
            Triangle::Upper => [
                (g.get(i + 1, j + 1) - g.get(i, j + 1)) / l,
                (g.get(i + 1, j + 1) - g.get(i + 1, j)) / l,
            ],
        }
    }

    /// All triangle gradients, cell-major then lower before upper.
    pub fn gradient_table(&self) -> Vec<((usize, usize, Triangle), [T; 2])> {
        let mut out = Vec::with_capacity(2 * (self.g.nx - 1) * (self.g.ny - 1));
        for j in 0..self.g.ny - 1 {
            for i in 0..self.g.nx - 1 {
                for tri in [Triangle::Lower, Triangle::Upper] {
                    out.push(((i, j, tri), self.gradient(i, j, tri)));
                }
            }
        }
        out
    }

    pub fn locate(&self, x: T, y: T) -> Result<(usize, usize, Triangle, T, T)> {
        let g = &self.g;
        let (sx, sy) = (x / g.lambda, y / g.lambda);
        let tol = T::lit(1e-9);
        let (mx, my) = (T::lit((g.nx - 1) as f64), T::lit((g.ny - 1) as f64));
        if !(sx >= -tol && sy >= -tol && sx <= mx + tol && sy <= my + tol) {
            return Err(Error::OutOfDomain(x.as_f64(), y.as_f64()));
        }
        let i = sx.floor().max(T::zero()).min(mx - T::one()).to_usize().unwrap_or(0);
        let j = sy.floor().max(T::zero()).min(my - T::one()).to_usize().unwrap_or(0);
        let s = sx - T::lit(i as f64);
        let t = sy - T::lit(j as f64);
        let tri = if s + t <= T::one() { Triangle::Lower } else { Triangle::Upper };
        Ok((i, j, tri, s, t))
    }

    pub fn eval(&self, x: T, y: T) -> Result<T> {
        let (i, j, tri, s, t) = self.locate(x, y)?;
        let g = &self.g;
        Ok(match tri {
            Triangle::Lower => g.get(i, j) + s * (g.get(i + 1, j) - g.get(i, j)) + t * (g.get(i, j + 1) - g.get(i, j)),
            Triangle::Upper => {
                g.get(i, j + 1)
                    + s * (g.get(i + 1, j + 1) - g.get(i, j + 1))
                    + (t - T::one()) * (g.get(i + 1, j + 1) - g.get(i + 1, j))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_half_spacing_has_single_index() {
        assert_eq!(index_set(&Domain::unit_square(), 0.5), vec![(0, 0)]);
    }

    #[test]
    fn of_sites_matches_stencil_range() {
        let d = Domain::of_sites(7, 5, 0.1);
        let idx = index_set(&d, 0.1);
        assert_eq!(idx.len(), 5 * 3);
        assert!(idx.iter().all(|&(i, j)| i <= 4 && j <= 2 && i >= 0 && j >= 0));
    }

    #[test]
    fn tiny_domain_is_empty() {
        let d = Domain::rect([0.1, 0.1], 0.3, 0.3).unwrap();
        assert!(index_set(&d, 0.5).is_empty());
    }

    #[test]
    fn params_derived_quantities() {
        let p = ModelParams::new(0.01f64, 0.5).unwrap();
        assert_eq!(p.alpha, 2.0);
        assert_eq!(p.epsilon, 0.01);
        assert!(ModelParams::new(0.1f64, 1.0).is_err());
        assert!(ModelParams::new(-0.1f64, 0.5).is_err());
    }

    #[test]
    fn grid_json_keys() {
        let g = ScalarGrid::new(2, 1, 0.5, vec![1.0, -0.1]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"nx":2,"ny":1,"lambda":0.5,"values":[1.0,-0.1]}"#);
        let u = SpinField::new(1, 1, 0.5, vec![0.3]).unwrap();
        assert!(serde_json::to_string(&u).unwrap().contains("\"angles\""));
        assert!(serde_json::from_str::<ScalarGrid>(r#"{"nx":2,"ny":2,"lambda":0.5,"values":[1.0]}"#).is_err());
    }

    #[test]
    fn mixed_derivative_of_bilinear() {
        let l = 0.1;
        let g = ScalarGrid::from_fn(5, 4, l, |i, j| l * l * (i * j) as f64);
        let a = discrete_derivative(&g, Derivative::D12).unwrap();
        let b = d2(&d1(&g).unwrap()).unwrap();
        assert_eq!((a.nx(), a.ny()), (4, 3));
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - 1.0).abs() < 1e-12 && (y - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolant_jump_across_diagonal() {
        let l = 0.25;
        let g = ScalarGrid::from_fn(3, 3, l, |i, j| l * l * (i * j) as f64);
        let a = AffineInterpolant::new(g).unwrap();
        let lo = a.gradient(0, 0, Triangle::Lower);
        let up = a.gradient(0, 0, Triangle::Upper);
        assert!((up[0] - lo[0] - l).abs() < 1e-15 && (up[1] - lo[1] - l).abs() < 1e-15);
        assert!(a.eval(0.6, 0.1).is_err());
    }
}
