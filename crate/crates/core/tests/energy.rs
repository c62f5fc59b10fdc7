use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use chiral_core::energy::{chain_interval, discrete_mm_1d, energy_h_expanded, energy_h_pair, Direction, PairEnergy};
use chiral_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(rng: &mut ChaCha8Rng, nx: usize, ny: usize, l: f64) -> SpinField {
    SpinField::from_fn(nx, ny, l, |_, _| rng.gen_range(-PI..PI))
}

#[test]
fn ground_states_have_zero_energy_and_zero_decomposition() {
    for delta in [0.5, 0.1, 0.01] {
        let p = ModelParams::new(1.0 / 63.0, delta).unwrap();
        let d = Domain::of_sites(64, 64, p.lambda);
        for (w, z) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let u = SpinField::ground_state(64, 64, &p, w, z, 0.0);
            assert!(energy_h(&u, &d, &p).total.abs() < 1e-10);
            let mm = mm_decomposition(&u, &d, &p).unwrap();
            assert!(mm.potential_part.unwrap().abs() < 1e-10);
            assert!(mm.gradient_part.unwrap().abs() < 1e-10);
        }
    }
}

#[test]
fn constant_field_closed_forms() {
    let (l, delta) = (0.05, 0.2);
    let p = ModelParams::new(l, delta).unwrap();
    let (nx, ny) = (9, 7);
    let d = Domain::of_sites(nx, ny, l);
    let u = SpinField::from_fn(nx, ny, l, |_, _| 0.4);
    let r = energy_h(&u, &d, &p);
    let terms = r.term_count as f64;
    assert_eq!(r.horizontal_terms + r.vertical_terms, r.term_count);
    assert!(r.horizontal_terms > 0 && r.vertical_terms > 0);
    let expect = SQRT_2 * l * delta.sqrt() * terms;
    assert!((r.total - expect).abs() < 1e-12 * expect);
    let mm = mm_decomposition(&u, &d, &p).unwrap();
    let pot = l * l / (2.0 * p.epsilon) * 2.0 * terms;
    assert!((mm.potential_part.unwrap() - pot).abs() < 1e-12 * pot);
    assert_eq!(mm.gradient_part.unwrap(), 0.0);
    assert!((pot - expect).abs() < 1e-12 * expect);
}

#[test]
fn energy_e_examples() {
    let l = 0.1;
    let d = Domain::of_sites(6, 5, l);
    let alpha = 3.0;
    let c = energy_e(&SpinField::from_fn(6, 5, l, |_, _| 1.1), &d, alpha);
    assert_eq!(c.nn_bonds, 5 * 5 + 6 * 4);
    assert_eq!(c.third_bonds, 4 * 5 + 6 * 3);
    let expect = l * l * (-alpha * c.nn_bonds as f64 + c.third_bonds as f64);
    assert!((c.value - expect).abs() < 1e-12);
    // antipodal alternation along rows, α = 0: third neighbours are parallel
    let alt = energy_e(&SpinField::from_fn(6, 5, l, |i, _| PI * i as f64), &d, 0.0);
    assert!((alt.value - l * l * alt.third_bonds as f64).abs() < 1e-12);
    let delta = 0.3;
    let p = ModelParams::new(l, delta).unwrap();
    let gs = energy_e(&SpinField::ground_state(6, 5, &p, 1, -1, 0.0), &d, p.alpha);
    let t = p.theta0();
    let expect = l * l * (-p.alpha * gs.nn_bonds as f64 * (1.0 - delta) + gs.third_bonds as f64 * (2.0 * t).cos());
    assert!((gs.value - expect).abs() < 1e-12);
}

#[test]
fn single_flip_energy_is_local() {
    let p = ModelParams::new(0.05, 0.2).unwrap();
    let d = Domain::of_sites(12, 12, p.lambda);
    let mut u = SpinField::ground_state(12, 12, &p, 1, 1, 0.0);
    u.angles_mut()[5 * 12 + 5] += 1.0;
    let r = energy_h(&u, &d, &p);
    assert!(r.total > 0.0);
    // three horizontal and three vertical stencils touch the site
    let (hor, ver) = energy::stencil_sites(&d, p.lambda, 12, 12);
    let touching = |s: &[(usize, usize)], horizontal: bool| {
        s.iter()
            .filter(|&&(i, j)| {
                if horizontal {
                    j == 5 && i <= 5 && i + 2 >= 5
                } else {
                    i == 5 && j <= 5 && j + 2 >= 5
                }
            })
            .count()
    };
    assert_eq!(touching(&hor, true) + touching(&ver, false), 6);
}

#[test]
fn chain_energy_examples() {
    let p = ModelParams::new(0.02, 0.1).unwrap();
    let helix: Vec<f64> = (0..20).map(|i| p.theta0() * i as f64).collect();
    assert!(energy_h_1d(&helix, chain_interval(20, p.lambda), &p).total.abs() < 1e-12);
    let short = energy_h_1d(&helix, [0.0, 0.03], &p);
    assert_eq!(short.horizontal_terms, 0);
    assert_eq!(short.total, 0.0);
}

#[test]
fn rho_closed_form_examples() {
    for m in [RhoMethod::Definition, RhoMethod::ClosedForm] {
        assert!((rho(FRAC_PI_2, -FRAC_PI_2, m).unwrap() - 0.5).abs() < 1e-14);
    }
    assert_eq!(rho(0.0, 0.0, RhoMethod::Definition).unwrap(), 1.0);
    assert!((rho(1e-9f64, -1e-9, RhoMethod::ClosedForm).unwrap() - 1.0).abs() < 1e-12);
    assert!(rho(4.0, 0.0, RhoMethod::Definition).is_err());
    assert!(matches!(rho(PI, PI, RhoMethod::ClosedForm), Err(Error::Singular(..))));
}

#[test]
fn tilde_w_lies_below_double_well() {
    for delta in [0.01, 0.1, 0.5, 0.9] {
        for k in 0..=600 {
            let s = -3.0 + 0.01 * k as f64;
            assert!(tilde_w(s, delta) <= double_well(s) + 1e-12, "s = {s}, delta = {delta}");
        }
    }
}

#[test]
fn discrete_mm_of_sampled_tanh_is_near_eight_thirds() {
    let eps = 0.01;
    let l = eps / 20.0;
    let n = (2.0 / l) as usize + 1;
    let g: Vec<f64> = (0..n).map(|i| ((l * i as f64 - 1.0) / eps).tanh()).collect();
    let v = discrete_mm_1d(&g, l, eps);
    assert!((v - 8.0 / 3.0).abs() < 0.01, "{v}");
    let grid = ScalarGrid::from_fn(n, 3, l, |i, _| g[i]);
    let v2 = discrete_mm(&grid, eps, Direction::Horizontal) / (2.0 * l);
    assert!((v2 - v * 3.0 / 2.0).abs() < 0.02 * v, "{v2}");
}

#[test]
fn pair_energy_admissible_and_not() {
    let p = ModelParams::new(0.05, 0.2).unwrap();
    let d = Domain::of_sites(6, 6, p.lambda);
    let u = SpinField::from_fn(6, 6, p.lambda, |i, j| 0.3 * (i as f64).sin() + 0.2 * j as f64);
    let (_, pair) = transform(&u, &p).unwrap();
    match energy_h_pair(&pair, &d, &p).unwrap() {
        PairEnergy::Admissible { report } => {
            assert!((report.total - energy_h(&u, &d, &p).total).abs() < 1e-10 * (1.0 + report.total))
        }
        other => panic!("expected admissible, got {other:?}"),
    }
    let mut bad = pair.clone();
    bad.w.set(2, 2, 0.9);
    assert!(matches!(energy_h_pair(&bad, &d, &p).unwrap(), PairEnergy::Inadmissible { .. }));
}

#[test]
fn polygon_domains_sum_fewer_terms() {
    let p = ModelParams::new(0.05, 0.2).unwrap();
    let u = SpinField::from_fn(21, 21, p.lambda, |i, j| 0.1 * (i * j) as f64);
    let square = Domain::of_sites(21, 21, p.lambda);
    let tri = Domain::polygon(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
    let a = energy_h(&u, &square, &p);
    let b = energy_h(&u, &tri, &p);
    assert!(b.term_count < a.term_count && b.term_count > 0);
    let mm = mm_decomposition(&u, &tri, &p).unwrap();
    assert!((mm.total - b.total).abs() <= 1e-9 * (1.0 + b.total));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_matches_direct_energy(seed in 0u64..10_000, n in 3usize..20, l in 0.001f64..0.2, delta in 0.01f64..0.95) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = ModelParams::new(l, delta).unwrap();
        let u = random_field(&mut rng, n, n + 1, l);
        let d = Domain::of_sites(n, n + 1, l);
        let h = energy_h(&u, &d, &p);
        let mm = mm_decomposition(&u, &d, &p).unwrap();
        prop_assert!((h.total - mm.total).abs() <= 1e-9 * (1.0 + h.total));
        prop_assert!((h.horizontal - mm.horizontal).abs() <= 1e-9 * (1.0 + h.total));
        prop_assert!((h.total - h.horizontal - h.vertical).abs() <= 1e-12 * h.total.max(1e-300));
        prop_assert!(h.horizontal >= 0.0 && h.vertical >= 0.0);
        let e = energy_h_expanded(&u, &d, &p);
        prop_assert!((e - h.total).abs() <= 1e-9 * (1.0 + h.total));
    }

    #[test]
    fn energy_is_rotation_invariant(seed in 0u64..10_000, phi in -10.0f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = ModelParams::new(0.05, 0.3).unwrap();
        let u = random_field(&mut rng, 7, 6, 0.05);
        let d = Domain::of_sites(7, 6, 0.05);
        let a = energy_h(&u, &d, &p).total;
        let b = energy_h(&u.rotated(phi), &d, &p).total;
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0) * 10.0);
    }

    #[test]
    fn rho_methods_agree(t1 in -PI..PI, t2 in -PI..PI) {
        let a = rho(t1, t2, RhoMethod::Definition).unwrap();
        if t1 != t2 {
            let b = rho(t1, t2, RhoMethod::ClosedForm).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{} {}", a, b);
        }
    }
}
