use std::f64::consts::{FRAC_PI_2, PI, TAU};

use chiral_core::chirality::{plaquette_sums, reconstruct_spin, ChiralityPair};
use chiral_core::lattice::{d1, d2};
use chiral_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn brute_index_set(d: &Domain, l: f64) -> Vec<(i64, i64)> {
    let inside = |i: i64, j: i64| {
        let (x0, y0, x1, y1) = (l * i as f64, l * j as f64, l * (i + 1) as f64, l * (j + 1) as f64);
        let [mx, my] = d.max();
        let t = 1e-12;
        x0 >= d.origin[0] - t && y0 >= d.origin[1] - t && x1 <= mx + t && y1 <= my + t
    };
    let mut out = Vec::new();
    for j in -3..60 {
        for i in -3..60 {
            if inside(i, j) && inside(i + 1, j) && inside(i, j + 1) {
                out.push((i, j));
            }
        }
    }
    out
}

#[test]
fn index_set_matches_three_cell_predicate() {
    for (w, h, l) in [(1.0, 1.0, 0.25), (1.0, 1.0, 0.5), (0.8, 0.6, 0.1), (2.0, 1.0, 0.125)] {
        let d = Domain::rect([0.0, 0.0], w, h).unwrap();
        assert_eq!(index_set(&d, l), brute_index_set(&d, l), "{w}x{h} at {l}");
    }
    // unit square at λ = 1/4: i, j ∈ {0, 1, 2}
    let idx = index_set(&Domain::unit_square(), 0.25);
    assert_eq!(idx.len(), 9);
    assert!(index_set(&Domain::rect([0.0, 0.0], 0.3, 0.3).unwrap(), 0.5).is_empty());
}

#[test]
fn index_set_is_monotone_in_domain() {
    let small = Domain::rect([0.2, 0.1], 0.5, 0.4).unwrap();
    let big = Domain::rect([0.1, 0.0], 0.8, 0.7).unwrap();
    let s = index_set(&small, 0.05);
    let b = index_set(&big, 0.05);
    assert!(s.iter().all(|p| b.contains(p)));
}

#[test]
fn derivatives_of_simple_fields() {
    let l = 0.1;
    let c = ScalarGrid::constant(5, 4, l, 3.0);
    for which in [Derivative::D1, Derivative::D2, Derivative::D11, Derivative::D12, Derivative::D22] {
        assert!(discrete_derivative(&c, which).unwrap().values().iter().all(|v| *v == 0.0));
    }
    let ramp = ScalarGrid::from_fn(6, 5, l, |i, _| l * i as f64);
    assert!(d1(&ramp).unwrap().values().iter().all(|v| (v - 1.0).abs() < 1e-12));
    assert!(d2(&ramp).unwrap().values().iter().all(|v| *v == 0.0));
    let bil = ScalarGrid::from_fn(6, 5, l, |i, j| l * l * (i * j) as f64);
    let a = d1(&d2(&bil).unwrap()).unwrap();
    let b = d2(&d1(&bil).unwrap()).unwrap();
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!((x - 1.0).abs() < 1e-12 && (y - 1.0).abs() < 1e-12);
    }
    assert!(discrete_derivative(&ScalarGrid::constant(1, 4, l, 0.0), Derivative::D1).is_err());
}

#[test]
fn interpolant_gradients_and_values() {
    let l = 0.2;
    let g = ScalarGrid::from_fn(4, 4, l, |i, j| l * l * (i * j) as f64);
    let ip = AffineInterpolant::new(g.clone()).unwrap();
    assert!((ip.eval(2.0 * l, 1.0 * l).unwrap() - g.get(2, 1)).abs() < 1e-15);
    let lo = ip.gradient(1, 1, lattice::Triangle::Lower);
    let up = ip.gradient(1, 1, lattice::Triangle::Upper);
    assert!((up[0] - lo[0] - l).abs() < 1e-12 && (up[1] - lo[1] - l).abs() < 1e-12);
    assert!(ip.eval(-0.1, 0.0).is_err());
    let aff = AffineInterpolant::new(ScalarGrid::from_fn(5, 5, l, |i, j| 2.0 * l * i as f64 - l * j as f64 + 0.5)).unwrap();
    for &(x, y) in &[(0.13, 0.37), (0.71, 0.05), (0.4, 0.8)] {
        assert!((aff.eval(x, y).unwrap() - (2.0 * x - y + 0.5)).abs() < 1e-12);
    }
}

#[test]
fn json_formats_round_trip() {
    let g = ScalarGrid::from_fn(3, 2, 0.1, |i, j| 0.1 * i as f64 + 1.0 / 3.0 * j as f64);
    let s = serde_json::to_string(&g).unwrap();
    assert!(s.contains("\"values\""));
    assert_eq!(serde_json::from_str::<ScalarGrid>(&s).unwrap(), g);
    let u = SpinField::from_fn(3, 3, 0.1, |i, j| (i as f64).sin() + std::f64::consts::E * j as f64);
    let s = serde_json::to_string(&u).unwrap();
    assert!(s.contains("\"angles\""));
    assert_eq!(serde_json::from_str::<SpinField>(&s).unwrap(), u);
    let p = ChiralityPair::constant(4, 3, 0.1, 0.2, 1.0, -1.0).unwrap();
    let s = serde_json::to_string(&p).unwrap();
    assert_eq!(serde_json::from_str::<ChiralityPair>(&s).unwrap(), p);
    assert!(serde_json::from_str::<ScalarGrid>(r#"{"nx":2,"ny":2,"lambda":0.1,"values":[1,2,3]}"#).is_err());
    assert!(serde_json::from_str::<ModelParams>(r#"{"lambda":0.1,"delta":1.5}"#).is_err());
}

#[test]
fn params_derived_fields() {
    let p = ModelParams::new(0.01, 0.1).unwrap();
    assert_eq!(p.alpha, 4.0 * (1.0 - 0.1));
    assert_eq!(p.epsilon, 0.01 / (2.0f64 * 0.1).sqrt());
    assert!(ModelParams::new(-1.0, 0.1).is_err());
    assert!(ModelParams::new(0.1, 0.0).is_err());
}

#[test]
fn oriented_angle_convention() {
    assert_eq!(oriented_angle([1.0, 0.0], [0.0, 1.0]).unwrap(), FRAC_PI_2);
    assert_eq!(oriented_angle([1.0, 0.0], [-1.0, 0.0]).unwrap(), -PI);
    assert_eq!(oriented_angle([0.0, 1.0], [0.0, -1.0]).unwrap(), -PI);
    assert!(oriented_angle([2.0, 0.0], [1.0, 0.0]).is_err());
}

#[test]
fn transform_of_ground_states_and_constants() {
    for delta in [0.5, 0.1, 0.01] {
        let p = ModelParams::new(0.01, delta).unwrap();
        for (w, z) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let u = SpinField::ground_state(8, 8, &p, w, z, 0.3);
            let (_, pair) = transform(&u, &p).unwrap();
            assert!(pair.w.values().iter().all(|v| (v - w as f64).abs() < 1e-12));
            assert!(pair.z.values().iter().all(|v| (v - z as f64).abs() < 1e-12));
        }
    }
    let p = ModelParams::new(0.1, 0.5).unwrap();
    let (_, pair) = transform(&SpinField::from_fn(4, 4, 0.1, |_, _| 1.0), &p).unwrap();
    assert!(pair.w.values().iter().chain(pair.z.values()).all(|v| *v == 0.0));
    // θ = π/3 at δ = 1/2 gives w = 2 sin(π/6) = 1
    let u = SpinField::from_fn(2, 2, 0.1, |i, _| PI / 3.0 * i as f64);
    let (_, pair) = transform(&u, &p).unwrap();
    assert!((pair.w.get(0, 0) - 1.0).abs() < 1e-15);
}

#[test]
fn four_spin_vortex_has_vorticity_two_pi() {
    // (1,0), (0,1), (−1,0), (0,−1) at (0,0), (1,0), (1,1), (0,1)
    let u = SpinField::new(2, 2, 1.0, vec![0.0, FRAC_PI_2, -FRAC_PI_2, PI]).unwrap();
    let v = vorticity(&theta_fields(&u).unwrap()).unwrap();
    assert_eq!(v.get(0, 0), TAU);
    let th = theta_fields(&u).unwrap();
    assert!(reconstruct_spin(&transform(&u, &ModelParams::new(1.0, 0.5).unwrap()).unwrap().1, &ModelParams::new(1.0, 0.5).unwrap(), 0.0).is_err());
    assert!((plaquette_sums(&th).unwrap().get(0, 0) - TAU).abs() < 1e-12);
}

#[test]
fn reconstruction_of_zero_and_unit_pairs() {
    let p = ModelParams::new(0.05f64, 0.2).unwrap();
    let pair = ChiralityPair::constant(5, 4, 0.05, 0.2, 1.0, 1.0).unwrap();
    let u = reconstruct_spin(&pair, &p, 0.0).unwrap();
    let gs = SpinField::ground_state(5, 4, &p, 1, 1, 0.0);
    for (a, b) in u.angles().iter().zip(gs.angles()) {
        assert!((a - b).abs() < 1e-12);
    }
    let zero = ChiralityPair::constant(5, 4, 0.05, 0.2, 0.0, 0.0).unwrap();
    assert!(reconstruct_spin(&zero, &p, 0.7).unwrap().angles().iter().all(|a| *a == 0.7));
    let bad = ChiralityPair::constant(5, 4, 0.05, 0.2, 10.0, 0.0).unwrap();
    assert!(reconstruct_spin(&bad, &p, 0.0).is_err());
}

#[test]
fn inconsistent_theta_fields_fail_to_snap() {
    let u = SpinField::from_fn(3, 3, 0.1, |i, j| 0.1 * (i + j) as f64);
    let mut th = theta_fields(&u).unwrap();
    th.theta_hor.set(0, 0, 1.0);
    assert!(matches!(vorticity(&th), Err(Error::VorticitySnap { .. })));
}

#[test]
fn random_small_angle_fields_are_vortex_free_and_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let (nx, ny) = (rng.gen_range(2..12), rng.gen_range(2..12));
        let p = ModelParams::new(0.05, rng.gen_range(0.05..0.9)).unwrap();
        // ψ = f(i) + g(j) + noise keeps every bond angle below 0.9 in magnitude
        let mut f = vec![rng.gen_range(-PI..PI); nx];
        for i in 1..nx {
            f[i] = f[i - 1] + rng.gen_range(-0.5..0.5);
        }
        let mut g = vec![0.0; ny];
        for j in 1..ny {
            g[j] = g[j - 1] + rng.gen_range(-0.5..0.5);
        }
        let psi: Vec<f64> = (0..nx * ny).map(|k| f[k % nx] + g[k / nx] + rng.gen_range(-0.2..0.2)).collect();
        let u = SpinField::new(nx, ny, 0.05, psi).unwrap();
        let (th, pair) = transform(&u, &p).unwrap();
        assert!(vorticity(&th).unwrap().values().iter().all(|v| *v == 0.0));
        let anchor = u.angle(0, 0);
        let back = reconstruct_spin(&pair, &p, anchor).unwrap();
        for (a, b) in back.units().iter().zip(u.units()) {
            assert!((a[0] - b[0]).abs() < 1e-10 && (a[1] - b[1]).abs() < 1e-10);
        }
    }
}

proptest! {
    #[test]
    fn oriented_angle_is_antisymmetric(a in -10.0f64..10.0, b in -10.0f64..10.0) {
        let (u, v) = ([a.cos(), a.sin()], [b.cos(), b.sin()]);
        let x = oriented_angle(u, v).unwrap();
        let y = oriented_angle(v, u).unwrap();
        prop_assert!((-PI..PI).contains(&x));
        let cross = u[0] * v[1] - u[1] * v[0];
        if cross != 0.0 {
            prop_assert!((x + y).abs() < 1e-12);
        }
    }

    #[test]
    fn transform_output_is_bounded_and_vorticity_snaps(
        seed in 0u64..1000, nx in 2usize..9, ny in 2usize..9, delta in 0.01f64..0.99
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = SpinField::from_fn(nx, ny, 0.1, |_, _| rng.gen_range(-PI..PI));
        let p = ModelParams::new(0.1, delta).unwrap();
        let (th, pair) = transform(&u, &p).unwrap();
        let b = p.chirality_bound() * (1.0 + 1e-15);
        prop_assert!(pair.w.values().iter().chain(pair.z.values()).all(|v| v.abs() <= b));
        let v = vorticity(&th).unwrap();
        prop_assert!(v.values().iter().all(|x| [-TAU, 0.0, TAU].contains(x)));
        prop_assert!(th.theta_hor.values().iter().all(|t| (-PI..PI).contains(t)));
    }

    #[test]
    fn d12_commutes(seed in 0u64..1000, nx in 3usize..10, ny in 3usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = ScalarGrid::from_fn(nx, ny, 0.1f64, |_, _| rng.gen_range(-1.0..1.0));
        let a = d1(&d2(&g).unwrap()).unwrap();
        let b = d2(&d1(&g).unwrap()).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0) * 100.0);
        }
    }

    #[test]
    fn interpolant_is_linear_in_data(seed in 0u64..1000, x in 0.0f64..0.3, y in 0.0f64..0.3, s in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = ScalarGrid::from_fn(4, 4, 0.1, |_, _| rng.gen_range(-1.0..1.0));
        let b = ScalarGrid::from_fn(4, 4, 0.1, |_, _| rng.gen_range(-1.0..1.0));
        let c = ScalarGrid::from_fn(4, 4, 0.1, |i, j| a.get(i, j) + s * b.get(i, j));
        let (ia, ib, ic) = (AffineInterpolant::new(a).unwrap(), AffineInterpolant::new(b).unwrap(), AffineInterpolant::new(c).unwrap());
        let lhs = ic.eval(x, y).unwrap();
        let rhs = ia.eval(x, y).unwrap() + s * ib.eval(x, y).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }
}

#[test]
fn single_precision_aliases_work() {
    let p = ModelParams32::new(0.01, 0.1).unwrap();
    let u = SpinField32::ground_state(8, 8, &p, 1, -1, 0.0);
    let d = Domain::of_sites(8, 8, 0.01);
    let r: EnergyReport32 = energy_h(&u, &d, &p);
    assert!(r.total.abs() < 1e-3);
}
