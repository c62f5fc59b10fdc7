use chiral_core::continuum::{build_example, ExampleKind};
use chiral_core::io::*;
use chiral_core::recovery::{gamma_sweep, RecoveryOptions, SweepSchedule};
use chiral_core::{energy_h, Domain, ModelParams, SpinField};

#[test]
fn empty_tables_still_have_headers() {
    assert_eq!(energy_csv(&[]).unwrap(), "lambda,delta,epsilon,H_total,H_hor,H_ver,potential,gradient\n");
    assert_eq!(
        sweep_csv(&[]).unwrap(),
        "epsilon,lambda,delta,H_n_total,H_n_hor,H_n_ver,H_limit,ratio,overflow_count\n"
    );
    assert_eq!(iteration_csv(&[]).unwrap(), "iter,energy,grad_norm,step\n");
}

#[test]
fn energy_rows_serialize_with_the_same_header() {
    let p = ModelParams::new(0.1, 0.2).unwrap();
    let d = Domain::of_sites(5, 5, 0.1);
    let u = SpinField::from_fn(5, 5, 0.1, |i, j| 0.1 * (i + 2 * j) as f64);
    let row = EnergyRow::new(&p, &energy_h(&u, &d, &p));
    let text = energy_csv(&[row]).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), energy_csv(&[]).unwrap().trim_end());
    assert_eq!(lines.count(), 1);
    let json = to_json_string(&row).unwrap();
    assert!(json.ends_with('\n') && json.contains("\"H_total\""));
    assert_eq!(serde_json::from_str::<EnergyRow>(&json).unwrap(), row);
}

#[test]
fn sweep_csv_round_trips() {
    let m = build_example(ExampleKind::VerticalWall, &Domain::unit_square()).unwrap();
    let s = SweepSchedule::from_lambdas(&[1.0 / 8.0, 1.0 / 16.0]).unwrap();
    let rows = gamma_sweep(&m, &s, &RecoveryOptions::default()).unwrap();
    let text = sweep_csv(&rows).unwrap();
    let back = read_sweep_csv(&text).unwrap();
    assert_eq!(back.len(), rows.len());
    for (a, b) in rows.iter().zip(&back) {
        assert_eq!(a.epsilon, b.epsilon);
        assert_eq!(a.h_n_total, b.h_n_total);
        assert_eq!(a.ratio, b.ratio);
        assert_eq!(a.overflow_count, b.overflow_count);
    }
}

#[test]
fn json_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("field.json");
    let p = ModelParams::new(0.05, 0.2).unwrap();
    let u = SpinField::ground_state(7, 4, &p, -1, 1, 0.3);
    write_json(&path, &u).unwrap();
    let back: SpinField = read_json(&path).unwrap();
    assert_eq!(back, u);
    assert!(read_json::<SpinField>(dir.path().join("missing.json")).is_err());
}
