use regenset_core::minorant::{contact_set_h, contact_set_z, ladder_set_r, lipschitz_minorant, one_sided_infimum};
use regenset_core::sets::set_ops;
use regenset_core::sweep::{alpha_sweep, last_contact_before_zero};
use regenset_core::{simulate, ClosedSet, Interval, JumpLaw, PathGrid, ProcessSpec, Sampling, SweepKind, Window};

fn single_jump() -> PathGrid {
    PathGrid::from_parts(
        vec![-1.0, 0.0, 0.3, 1.0],
        vec![0.0, 0.0, 1.0, 1.0],
        vec![0.0, 0.0, 0.0, 1.0],
        Sampling::Exact { slope: 0.0 },
    )
    .unwrap()
}

fn absolute_value(n: usize) -> PathGrid {
    let h = 1.0 / n as f64;
    let times: Vec<f64> = (0..=2 * n).map(|k| k as f64 * h - 1.0).collect();
    let values = times.iter().map(|t: &f64| t.abs()).collect();
    PathGrid::from_samples(times, values, h).unwrap()
}

#[test]
fn single_jump_contact_and_ladder_sets() {
    let path = single_jump();
    let window = Window::new(-1.0, 1.0).unwrap();
    let h = contact_set_h(&path, 1.0, 0.0).unwrap();
    assert_eq!(h, ClosedSet::from_intervals(window, [Interval::closed(-1.0, 0.3)]));
    let r = ladder_set_r(&path, 1.0, 0.0).unwrap();
    assert!(r.contains(0.0) && r.contains(0.299) && !r.contains(0.3));
    let diff = set_ops(&h, &r).unwrap().difference;
    assert_eq!(diff.intervals(), [Interval::point(0.3)]);
    assert_eq!(last_contact_before_zero(&h).unwrap(), 0.0);
}

#[test]
fn single_jump_sweep_is_flat() {
    let alphas: Vec<f64> = (0..=30).map(|k| 0.5 + 0.05 * k as f64).collect();
    let sweep = alpha_sweep(&single_jump(), &alphas, SweepKind::G, 0.0).unwrap();
    assert!(sweep.values.iter().all(|&g| g == 0.0));
    assert!(sweep.catalog.is_empty());
}

#[test]
fn downward_jump_before_zero_over_a_dense_slope_grid() {
    let path = PathGrid::from_parts(
        vec![-4.0, -0.5, 0.0, 4.0],
        vec![1.0, 0.0, 0.0, 0.0],
        vec![1.0, 1.0, 0.0, 0.0],
        Sampling::Exact { slope: 0.0 },
    )
    .unwrap();
    let coarse = alpha_sweep(&path, &[0.25, 0.5, 1.0, 2.0], SweepKind::G, 0.0).unwrap();
    let dense: Vec<f64> = (0..10_000).map(|k| 0.25 + 1.75 * k as f64 / 9_999.0).collect();
    let fine = alpha_sweep(&path, &dense, SweepKind::G, 0.0).unwrap();
    for (a, g) in coarse.alphas.iter().zip(&coarse.values) {
        let k = dense.partition_point(|d| d < a).min(dense.len() - 1);
        assert_eq!(fine.values[k], *g);
    }
    assert_eq!(coarse.catalog.len(), 0);
    assert_eq!(fine.catalog.len(), 0);
}

#[test]
fn absolute_value_envelopes() {
    let path = absolute_value(200);
    let l = one_sided_infimum(&path, 0.5).unwrap();
    assert!((l.values.last().unwrap() - 0.5).abs() < 1e-12);
    let m = lipschitz_minorant(&path, 0.5).unwrap();
    for (t, v) in m.times.iter().zip(&m.values) {
        assert!((v - 0.5 * t.abs()).abs() < 1e-12);
    }
    let z = contact_set_z(&path, 0.5, 0.0).unwrap();
    assert_eq!(z.intervals(), [Interval::point(0.0)]);
}

#[test]
fn zero_path_is_all_contact() {
    let path = simulate(&ProcessSpec::pure_drift(0.0, 1.0), 7).unwrap();
    let full = ClosedSet::full(Window::new(-1.0, 1.0).unwrap());
    assert_eq!(contact_set_h(&path, 1.0, 0.0).unwrap(), full);
    assert_eq!(contact_set_z(&path, 1.0, 0.0).unwrap(), full);
    assert_eq!(ladder_set_r(&path, 1.0, 0.0).unwrap(), full);
}

#[test]
fn poisson_jump_counts() {
    let spec = ProcessSpec::compound_poisson(0.0, 2.0, JumpLaw::TwoPoint { up: 1.0, down: -1.0, p_up: 0.5 }, 10.0);
    let n = 10_000;
    let counts: Vec<f64> = (0..n).map(|s| simulate(&spec, s).unwrap().jump_count() as f64).collect();
    let mean = counts.iter().sum::<f64>() / n as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!((mean - 40.0).abs() <= 3.0 * 40f64.sqrt() / 100.0, "mean {mean}");
    assert!((var / mean - 1.0).abs() < 0.05, "dispersion {}", var / mean);
}
