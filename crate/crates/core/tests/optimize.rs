use std::f64::consts::PI;

use chiral_core::optimize::*;
use chiral_core::{energy_h, Domain, Error, ModelParams, SpinField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fd_gradient(obj: &Objective, psi: &[f64], h: f64) -> Vec<f64> {
    let mut dir = vec![0.0; psi.len()];
    (0..psi.len())
        .map(|k| {
            if obj.frozen()[k] {
                return 0.0;
            }
            dir[k] = 1.0;
            let up = obj.energy_change(psi, &dir, h).unwrap();
            let down = obj.energy_change(psi, &dir, -h).unwrap();
            dir[k] = 0.0;
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [4, 6, 9] {
        let p = ModelParams::new(1.0 / (n - 1) as f64, 0.3).unwrap();
        let d = Domain::of_sites(n, n, p.lambda);
        let bc = if n == 9 {
            BoundaryCondition::chirality_sides(n, n, &p, [1, 1], [-1, 1]).unwrap()
        } else {
            BoundaryCondition::free(n, n)
        };
        let obj = Objective::lattice(&d, &p, &bc).unwrap();
        for _ in 0..50 {
            let mut psi: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-PI..PI)).collect();
            bc.apply(&mut psi);
            let (_, g) = obj.energy_and_gradient(&psi).unwrap();
            let fd = fd_gradient(&obj, &psi, 1e-5);
            let err: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
            assert!(max_abs(&err) <= 1e-6 * max_abs(&g).max(1e-300), "n = {n}: {}", max_abs(&err) / max_abs(&g));
            for (k, &f) in bc.frozen.iter().enumerate() {
                if f {
                    assert_eq!(g[k], 0.0);
                }
            }
        }
    }
}

#[test]
fn chain_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = ModelParams::new(0.05, 0.2).unwrap();
    let bc = BoundaryCondition::free(12, 1);
    let obj = Objective::chain(&p, &bc).unwrap();
    for _ in 0..20 {
        let psi: Vec<f64> = (0..12).map(|_| rng.gen_range(-PI..PI)).collect();
        let (e, g) = obj.energy_and_gradient(&psi).unwrap();
        assert!((e - obj.energy(&psi).unwrap()).abs() <= 1e-12 * e);
        let fd = fd_gradient(&obj, &psi, 1e-5);
        let err: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
        assert!(max_abs(&err) <= 1e-6 * max_abs(&g));
    }
}

#[test]
fn ground_states_are_critical_points() {
    let p = ModelParams::new(1.0 / 15.0, 0.2).unwrap();
    let d = Domain::of_sites(16, 16, p.lambda);
    let bc = BoundaryCondition::free(16, 16);
    for [w, z] in [[1, 1], [1, -1], [-1, 1], [-1, -1]] {
        let u = SpinField::ground_state(16, 16, &p, w, z, 0.4);
        let g = energy_gradient(&u, &d, &p, &bc).unwrap();
        assert!(g.max_abs() <= 1e-10, "{}", g.max_abs());
    }
}

#[test]
fn objective_agrees_with_energy_and_is_rotation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = ModelParams::new(0.1, 0.4).unwrap();
    let d = Domain::of_sites(8, 7, p.lambda);
    let obj = Objective::lattice(&d, &p, &BoundaryCondition::free(8, 7)).unwrap();
    for _ in 0..10 {
        let u = SpinField::from_fn(8, 7, p.lambda, |_, _| rng.gen_range(-PI..PI));
        let e = obj.energy(u.angles()).unwrap();
        assert!((e - energy_h(&u, &d, &p).total).abs() <= 1e-12 * e);
        let (e0, g0) = obj.energy_and_gradient(u.angles()).unwrap();
        let (e1, g1) = obj.energy_and_gradient(u.rotated(1.3).angles()).unwrap();
        assert!((e0 - e1).abs() <= 1e-12 * e0);
        for (a, b) in g0.iter().zip(&g1) {
            assert!((a - b).abs() <= 1e-12 * max_abs(&g0));
        }
    }
}

#[test]
fn single_site_optimum_matches_closed_form_minimizer() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = ModelParams::new(0.1, 0.3).unwrap();
    for _ in 0..30 {
        let mut psi: Vec<f64> = (0..5).map(|_| rng.gen_range(-PI..PI)).collect();
        let mut bc = BoundaryCondition::free(5, 1);
        for k in [0, 1, 3, 4] {
            bc.frozen[k] = true;
            bc.values[k] = psi[k];
        }
        let obj = Objective::chain(&p, &bc).unwrap();
        psi[2] = single_site_optimum(&psi, 2, &p).unwrap();
        let best = obj.energy(&psi).unwrap();
        for k in 0..720 {
            let mut q = psi.clone();
            q[2] = 2.0 * PI * k as f64 / 720.0;
            assert!(obj.energy(&q).unwrap() >= best - 1e-12 * best.max(1.0));
        }
        let (_, g) = obj.energy_and_gradient(&psi).unwrap();
        assert!(g[2].abs() <= 1e-9 * best.max(1.0));
    }
}

#[test]
fn helix_boundary_gives_zero_energy_immediately() {
    let p = ModelParams::new(0.05, 0.2).unwrap();
    for w in [1, -1] {
        let bc = BoundaryCondition::chain_helix(21, &p, w).unwrap();
        let (run, report) = minimize_chain(&bc.linear_init(), &p, &bc, &MinimizeOptions::default()).unwrap();
        assert_eq!(run.termination, Termination::Converged);
        assert!(run.iterations <= 1);
        assert!(report.total.abs() < 1e-10);
    }
}

#[test]
fn descent_log_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let p = ModelParams::new(1.0 / 15.0, 0.3).unwrap();
    let d = Domain::of_sites(16, 16, p.lambda);
    let bc = BoundaryCondition::chirality_sides(16, 16, &p, [-1, 1], [1, 1]).unwrap();
    let u = SpinField::from_fn(16, 16, p.lambda, |_, _| rng.gen_range(-PI..PI));
    let opts = MinimizeOptions { max_iter: 300, ..Default::default() };
    let out = minimize_h(&u, &d, &p, &bc, &opts).unwrap();
    let log = &out.run.log;
    assert!(log.len() > 2);
    for w in log.windows(2) {
        assert!(w[1].energy <= w[0].energy, "{} > {}", w[1].energy, w[0].energy);
    }
    assert!((out.report.total - out.run.energy).abs() <= 1e-9 * out.run.energy.max(1.0));
    for (k, &f) in bc.frozen.iter().enumerate() {
        if f {
            assert_eq!(out.spins.angles()[k], bc.values[k]);
        }
    }
}

#[test]
fn annealing_is_reproducible() {
    let p = ModelParams::new(0.1, 0.3).unwrap();
    let bc = BoundaryCondition::chain_wall(11, &p).unwrap();
    let anneal = AnnealOptions { sweeps: 50, seed: 42, ..Default::default() };
    let opts = MinimizeOptions { anneal: Some(anneal), ..Default::default() };
    let start = bc.linear_init();
    let (a, _) = minimize_chain(&start, &p, &bc, &opts).unwrap();
    let (b, _) = minimize_chain(&start, &p, &bc, &opts).unwrap();
    assert_eq!(a.psi, b.psi);
}

#[test]
fn invalid_options_and_shapes_are_rejected() {
    let p = ModelParams::new(0.1, 0.3).unwrap();
    let bc = BoundaryCondition::chain_wall(11, &p).unwrap();
    let bad = MinimizeOptions { grad_tol: -1.0, ..Default::default() };
    assert!(minimize_chain(&bc.linear_init(), &p, &bc, &bad).is_err());
    assert!(minimize_chain(&[0.0; 5], &p, &bc, &MinimizeOptions::default()).is_err());
    assert!(matches!(BoundaryCondition::chain_wall(4, &p), Err(Error::GridTooSmall { .. })));
}

#[test]
fn brute_force_with_everything_frozen_is_the_energy() {
    let p = ModelParams::new(0.1, 0.3).unwrap();
    let mut bc = BoundaryCondition::chain_wall(7, &p).unwrap();
    bc.frozen.iter_mut().for_each(|f| *f = true);
    let bf = brute_force_1d(&p, &bc, 16).unwrap();
    let obj = Objective::chain(&p, &bc).unwrap();
    assert_eq!(bf.minimum, obj.energy(&bc.values).unwrap());
    assert_eq!(bf.slack, 0.0);
}

#[test]
fn brute_force_with_one_free_site_matches_closed_form() {
    let p = ModelParams::new(0.1, 0.3).unwrap();
    let bc = BoundaryCondition::chain_wall(5, &p).unwrap();
    assert_eq!(bc.free_count(), 1);
    let bf = brute_force_1d(&p, &bc, 720).unwrap();
    let mut psi = bc.values.clone();
    psi[2] = single_site_optimum(&psi, 2, &p).unwrap();
    let exact = Objective::chain(&p, &bc).unwrap().energy(&psi).unwrap();
    assert!(exact <= bf.minimum + 1e-12);
    assert!(bf.minimum - exact <= bf.slack);
}

#[test]
fn brute_force_budget_is_enforced() {
    let p = ModelParams::new(0.1, 0.3).unwrap();
    let bc = BoundaryCondition::chain_wall(11, &p).unwrap();
    assert_eq!(bc.free_count(), 7);
    assert!(matches!(brute_force_1d(&p, &bc, 64), Err(Error::Budget(_))));
    let big = BoundaryCondition::chain_wall(13, &p).unwrap();
    assert!(brute_force_1d(&p, &big, 2).is_err());
}

#[test]
fn multistart_reaches_the_enumeration_minimum() {
    let p = ModelParams::new(0.1, 0.3).unwrap();
    for len in [5, 6, 7] {
        let bc = BoundaryCondition::chain_wall(len, &p).unwrap();
        let bf = brute_force_1d(&p, &bc, 64).unwrap();
        let best = multistart_chain(&p, &bc, &bf, &MinimizeOptions::default()).unwrap();
        assert!(best <= bf.minimum + bf.slack + 1e-12, "len {len}: {best} vs {}", bf.minimum);
    }
}
