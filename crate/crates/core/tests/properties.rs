use proptest::prelude::*;
use regenset_core::minorant::{
    contact_set_h, contact_set_z, contact_thresholds, ladder_set_r, lipschitz_minorant,
    one_sided_infimum,
};
use regenset_core::sets::set_ops;
use regenset_core::sweep::{alpha_sweep_with_threshold, ContactRecords};
use regenset_core::{simulate, ClosedSet, JumpLaw, PathGrid, ProcessSpec, Sampling, SweepKind};

/// A grid path from a random walk with occasional jumps, shifted so that
/// `X_0 = 0`.
fn grid_path() -> impl Strategy<Value = PathGrid> {
    (
        prop::collection::vec((-3.0..3.0f64, prop::option::weighted(0.2, -2.0..2.0f64)), 2..120),
        0.0..1.0f64,
        0.01..1.0f64,
    )
        .prop_map(|(steps, origin, h)| {
            let n = steps.len();
            let zero = ((n - 1) as f64 * origin).round() as usize;
            let mut values = Vec::with_capacity(n);
            let mut left = Vec::with_capacity(n);
            let mut x = 0.0;
            for (i, &(dx, jump)) in steps.iter().enumerate() {
                if i > 0 {
                    x += dx;
                }
                left.push(x);
                if i > 0 && i != zero {
                    x += jump.unwrap_or(0.0);
                }
                values.push(x);
            }
            let shift = values[zero];
            let values: Vec<f64> = values.iter().map(|v| v - shift).collect();
            let mut left: Vec<f64> = left.iter().map(|v| v - shift).collect();
            left[zero] = 0.0;
            let times = (0..n).map(|i| (i as f64 - zero as f64) * h).collect();
            PathGrid::from_parts(times, values, left, Sampling::Grid { step: h }).unwrap()
        })
}

fn brute_l(path: &PathGrid, alpha: f64) -> Vec<f64> {
    let (t, lo) = (path.times(), path.lower_values());
    (0..t.len())
        .map(|i| (0..=i).map(|j| lo[j] + alpha * (t[i] - t[j])).fold(f64::INFINITY, f64::min))
        .collect()
}

fn brute_m(path: &PathGrid, alpha: f64) -> Vec<f64> {
    let (t, lo) = (path.times(), path.lower_values());
    (0..t.len())
        .map(|i| (0..t.len()).map(|j| lo[j] + alpha * (t[i] - t[j]).abs()).fold(f64::INFINITY, f64::min))
        .collect()
}

fn brute_left_threshold(path: &PathGrid, i: usize) -> f64 {
    let (t, lo) = (path.times(), path.lower_values());
    (0..i).map(|j| (lo[i] - lo[j]) / (t[i] - t[j])).fold(f64::NEG_INFINITY, f64::max)
}

fn brute_right_threshold(path: &PathGrid, i: usize) -> f64 {
    let (t, lo) = (path.times(), path.lower_values());
    (i + 1..t.len()).map(|j| (lo[i] - lo[j]) / (t[j] - t[i])).fold(f64::NEG_INFINITY, f64::max)
}

fn cpp_spec() -> impl Strategy<Value = ProcessSpec> {
    let law = prop_oneof![
        (0.1..2.0f64, 0.1..2.0f64, 0.0..1.0f64).prop_map(|(u, d, p)| JumpLaw::TwoPoint { up: u, down: -d, p_up: p }),
        (-1.5..1.5f64).prop_filter("nonzero mean", |m| m.abs() > 0.05).prop_map(|mean| JumpLaw::Exponential { mean }),
        (-0.5..0.5f64, 0.0..2.0f64).prop_map(|(mean, var)| JumpLaw::Normal { mean, var }),
    ];
    (-1.0..1.0f64, 0.2..3.0f64, law, 2.0..15.0f64)
        .prop_map(|(drift, rate, law, t)| ProcessSpec::compound_poisson(drift, rate, law, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn two_pass_envelopes_match_brute_force(path in grid_path(), alpha in 0.05..5.0f64) {
        let l = one_sided_infimum(&path, alpha).unwrap();
        let m = lipschitz_minorant(&path, alpha).unwrap();
        for (a, b) in l.values.iter().zip(brute_l(&path, alpha)) {
            prop_assert!((a - b).abs() <= 1e-12, "L {a} vs {b}");
        }
        for (a, b) in m.values.iter().zip(brute_m(&path, alpha)) {
            prop_assert!((a - b).abs() <= 1e-12, "M {a} vs {b}");
        }
    }

    #[test]
    fn envelopes_are_dominated_and_lipschitz(path in grid_path(), alpha in 0.05..5.0f64) {
        let lo = path.lower_values();
        let l = one_sided_infimum(&path, alpha).unwrap();
        let m = lipschitz_minorant(&path, alpha).unwrap();
        prop_assert!(m.lipschitz_excess() <= 1e-12);
        for i in 0..lo.len() {
            prop_assert!(l.values[i] <= lo[i] + 1e-12);
            prop_assert!(m.values[i] <= l.values[i]);
        }
    }

    #[test]
    fn hull_thresholds_match_pairwise_slopes(path in grid_path()) {
        let thr = contact_thresholds(&path).unwrap();
        for i in 0..path.len() {
            let (l, r) = (brute_left_threshold(&path, i), brute_right_threshold(&path, i));
            let close = |a: f64, b: f64| a == b || (a - b).abs() <= 1e-9 * (1.0 + b.abs());
            prop_assert!(close(thr.left[i], l), "left {} vs {l} at {i}", thr.left[i]);
            prop_assert!(close(thr.right[i], r), "right {} vs {r} at {i}", thr.right[i]);
        }
    }

    #[test]
    fn records_give_the_last_contact_before_zero(path in grid_path(), alpha in 0.05..5.0f64) {
        let times = path.times();
        for kind in [SweepKind::G, SweepKind::Y] {
            let threshold = |i: usize| match kind {
                SweepKind::G => brute_left_threshold(&path, i),
                SweepKind::Y => brute_left_threshold(&path, i).max(brute_right_threshold(&path, i)),
            };
            let near_tie = (0..path.len()).any(|i| (threshold(i) - alpha).abs() < 1e-9);
            prop_assume!(!near_tie);
            let brute = (0..path.len()).filter(|&i| times[i] < 0.0 && threshold(i) <= alpha).map(|i| times[i]).last();
            let records = ContactRecords::from_path(&path, kind).unwrap();
            prop_assert_eq!(records.value_at(alpha).ok(), brute);
        }
    }

    #[test]
    fn swept_values_are_monotone(path in grid_path(), lo in 0.05..2.0f64, span in 0.1..3.0f64) {
        let alphas: Vec<f64> = (0..20).map(|k| lo + span * k as f64 / 19.0).collect();
        for kind in [SweepKind::G, SweepKind::Y] {
            if let Ok(sweep) = alpha_sweep_with_threshold(&path, &alphas, kind, 0.0, 0.0) {
                prop_assert!(sweep.values.windows(2).all(|w| w[0] <= w[1]));
                prop_assert!(sweep.values.iter().all(|&v| v < 0.0));
                let jumps: f64 = sweep.catalog.iter().map(|e| e.delta).sum();
                prop_assert!((sweep.value_at_max() - sweep.value_at_min() - jumps).abs() <= 1e-9);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn exact_sets_satisfy_the_ladder_identities(spec in cpp_spec(), seed in any::<u64>(), gaps in (0.05..0.5f64, 0.1..0.5f64, 0.1..1.0f64)) {
        let path = simulate(&spec, seed).unwrap();
        let a1 = spec.mean_slope().unwrap().abs() + gaps.0;
        let alphas = [a1, a1 + gaps.1, a1 + gaps.1 + gaps.2];
        let mut prev: Option<(ClosedSet, ClosedSet)> = None;
        for &a in &alphas {
            let h = contact_set_h(&path, a, 0.0).unwrap();
            let z = contact_set_z(&path, a, 0.0).unwrap();
            let r = ladder_set_r(&path, a, 0.0).unwrap();
            let cmp = set_ops(&r, &h).unwrap();
            prop_assert!(cmp.subset);
            prop_assert!(r.is_right_closed());
            prop_assert!(cmp.closure.is_subset_of(&h).unwrap() && h.is_subset_of(&cmp.closure).unwrap());
            prop_assert!(z.is_subset_of(&h).unwrap());
            let diff = set_ops(&h, &r).unwrap().difference;
            prop_assert!(diff.intervals().iter().all(|iv| iv.is_point()));
            if let Some((ph, pz)) = prev {
                prop_assert!(ph.is_subset_of(&h).unwrap());
                prop_assert!(pz.is_subset_of(&z).unwrap());
            }
            prev = Some((h, z));
        }
    }

    #[test]
    fn exact_h_agrees_with_brute_force_at_events(spec in cpp_spec(), seed in any::<u64>(), extra in 0.05..1.0f64) {
        let path = simulate(&spec, seed).unwrap();
        let alpha = spec.mean_slope().unwrap() + extra;
        let h = contact_set_h(&path, alpha, 0.0).unwrap();
        let l = brute_l(&path, alpha);
        let lo = path.lower_values();
        for (i, &t) in path.times().iter().enumerate() {
            let gap = lo[i] - l[i];
            if gap > 1e-9 {
                prop_assert!(!h.contains(t), "t = {t} above L by {gap} but in H");
            } else if gap < 1e-12 {
                prop_assert!(h.contains(t), "t = {t} on L but not in H");
            }
        }
    }

    #[test]
    fn exact_paths_are_reproducible(spec in cpp_spec(), seed in any::<u64>()) {
        prop_assert_eq!(simulate(&spec, seed).unwrap(), simulate(&spec, seed).unwrap());
    }
}
