//! Sloped infima, Lipschitz minorants and their contact sets on one path.
//!
//! With `lo(t) = X_t ∧ X_{t-}` the forward envelope is
//! `L_t = inf_{s ≤ t} lo(s) + α(t - s)` and the minorant is
//! `M_t = inf_s lo(s) + α|t - s|`. On a piecewise-linear path `lo - α·id` is
//! linear between stored times, so both infima are attained at stored points
//! and one pass in each direction is exact.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{log, sqrt};
use crate::process::{PathGrid, Sampling};
use crate::sets::{ClosedSet, Interval, Window};
use crate::{Error, Result};

/// Which envelope a profile holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinorantKind {
    /// `L`, the infimum over the past only.
    OneSided,
    /// `M`, the α-Lipschitz minorant.
    TwoSided,
}

/// Envelope values on the path's stored times.
#[derive(Debug, Clone, PartialEq)]
pub struct MinorantProfile {
    pub kind: MinorantKind,
    pub alpha: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl MinorantProfile {
    /// Largest `|M_{t'} - M_t| - α|t' - t|` over consecutive samples.
    pub fn lipschitz_excess(&self) -> f64 {
        self.times
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(t, v)| (v[1] - v[0]).abs() - self.alpha * (t[1] - t[0]))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check_alpha(path: &PathGrid, alpha: f64, kind: MinorantKind) -> Result<()> {
    if !alpha.is_finite() {
        return Err(Error::InvalidAlpha(alloc::format!("alpha = {alpha}")));
    }
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    if let Some(mean) = path.spec().and_then(|s| s.mean_slope().ok()) {
        let floor = match kind {
            MinorantKind::OneSided => mean,
            MinorantKind::TwoSided => mean.abs(),
        };
        if alpha <= floor {
            log::warn!("alpha = {alpha} does not exceed the admissible floor {floor}");
        }
    }
    Ok(())
}

// K_i = min_{j ≤ i} lo_j - α t_j.
fn forward_running_min(times: &[f64], lower: &[f64], alpha: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut k = f64::INFINITY;
    for (&t, &lo) in times.iter().zip(lower) {
        k = k.min(lo - alpha * t);
        out.push(k);
    }
    out
}

// min_{j ≥ i} lo_j + α t_j.
fn backward_running_min(times: &[f64], lower: &[f64], alpha: f64) -> Vec<f64> {
    let mut out = vec![0.0; times.len()];
    let mut k = f64::INFINITY;
    for i in (0..times.len()).rev() {
        k = k.min(lower[i] + alpha * times[i]);
        out[i] = k;
    }
    out
}

/// `L` on the stored times.
pub fn one_sided_infimum(path: &PathGrid, alpha: f64) -> Result<MinorantProfile> {
    check_alpha(path, alpha, MinorantKind::OneSided)?;
    let times = path.times();
    let k = forward_running_min(times, &path.lower_values(), alpha);
    let values = k.iter().zip(times).map(|(k, t)| k + alpha * t).collect();
    Ok(MinorantProfile { kind: MinorantKind::OneSided, alpha, times: times.to_vec(), values })
}

/// `M` on the stored times.
pub fn lipschitz_minorant(path: &PathGrid, alpha: f64) -> Result<MinorantProfile> {
    check_alpha(path, alpha, MinorantKind::TwoSided)?;
    let times = path.times();
    let lower = path.lower_values();
    let fwd = forward_running_min(times, &lower, alpha);
    let bwd = backward_running_min(times, &lower, alpha);
    let values = times
        .iter()
        .enumerate()
        .map(|(i, &t)| (fwd[i] + alpha * t).min(bwd[i] - alpha * t))
        .collect();
    Ok(MinorantProfile { kind: MinorantKind::TwoSided, alpha, times: times.to_vec(), values })
}

/// Grid contact tolerance `κ σ √(h log(1/h))`.
pub fn default_tolerance(sigma: f64, step: f64, kappa: f64) -> f64 {
    if step <= 0.0 || step >= 1.0 {
        return kappa * sigma * sqrt(step.max(0.0));
    }
    kappa * sigma * sqrt(step * log(1.0 / step))
}

fn window_of(path: &PathGrid) -> Window {
    let (lo, hi) = path.window();
    Window { lo, hi }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol < 0.0 || tol.is_nan() {
        Err(Error::NegativeTolerance(tol))
    } else {
        Ok(())
    }
}

// Consecutive hit indices closer than two grid steps form one cluster.
fn clusters(times: &[f64], hits: &[usize], step: f64) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    let reach = 2.0 * step * (1.0 + 1e-9);
    for &i in hits {
        match out.last_mut() {
            Some((_, last)) if times[i] - times[*last] <= reach => *last = i,
            _ => out.push((i, i)),
        }
    }
    out
}

// Distance from the lower envelope to L (one-sided) or M (two-sided), formed
// in the shifted coordinates so that contact points give exactly zero.
fn contact_gaps(path: &PathGrid, alpha: f64, kind: MinorantKind) -> Vec<f64> {
    let times = path.times();
    let lower = path.lower_values();
    let fwd = forward_running_min(times, &lower, alpha);
    match kind {
        MinorantKind::OneSided => {
            (0..times.len()).map(|i| lower[i] - alpha * times[i] - fwd[i]).collect()
        }
        MinorantKind::TwoSided => {
            let bwd = backward_running_min(times, &lower, alpha);
            (0..times.len())
                .map(|i| {
                    let a = lower[i] - alpha * times[i] - fwd[i];
                    let b = lower[i] + alpha * times[i] - bwd[i];
                    a.max(b)
                })
                .collect()
        }
    }
}

fn grid_contact(path: &PathGrid, gap: &[f64], tol: f64, step: f64, reduce_to_argmin: bool) -> ClosedSet {
    let times = path.times();
    let hits: Vec<usize> = (0..times.len()).filter(|&i| gap[i] <= tol).collect();
    let groups = clusters(times, &hits, step);
    let window = window_of(path);
    if reduce_to_argmin {
        let points = groups.iter().map(|&(a, b)| {
            let best = hits_between(&hits, a, b)
                .min_by(|&i, &j| gap[i].total_cmp(&gap[j]))
                .unwrap_or(a);
            times[best]
        });
        ClosedSet::from_points(window, points)
    } else {
        let pieces = groups.iter().map(|&(a, b)| Interval::closed(times[a], times[b]));
        ClosedSet::from_intervals(window, pieces)
    }
}

fn hits_between(hits: &[usize], a: usize, b: usize) -> impl Iterator<Item = usize> + '_ {
    let start = hits.partition_point(|&i| i < a);
    hits[start..].iter().copied().take_while(move |&i| i <= b)
}

/// `H_α = {t : X_t ∧ X_{t-} = L_t}`.
///
/// Exact paths are solved segment by segment and `tol` is ignored; grid
/// paths keep samples within `tol` of `L`, merged into clusters.
pub fn contact_set_h(path: &PathGrid, alpha: f64, tol: f64) -> Result<ClosedSet> {
    check_tol(tol)?;
    check_alpha(path, alpha, MinorantKind::OneSided)?;
    match path.sampling() {
        Sampling::Exact { .. } => Ok(exact_forward(path, alpha).0),
        Sampling::Grid { step } => {
            let gap = contact_gaps(path, alpha, MinorantKind::OneSided);
            Ok(grid_contact(path, &gap, tol, step, false))
        }
    }
}

/// `Z_α = {t : X_t ∧ X_{t-} = M_t}`. On grids each cluster of near-contacts
/// is reduced to its best sample.
pub fn contact_set_z(path: &PathGrid, alpha: f64, tol: f64) -> Result<ClosedSet> {
    check_tol(tol)?;
    check_alpha(path, alpha, MinorantKind::TwoSided)?;
    match path.sampling() {
        Sampling::Exact { .. } => {
            let forward = exact_forward(path, alpha).0;
            let backward = exact_forward(&reversed(path)?, alpha).0.mirrored();
            forward.intersection(&backward)
        }
        Sampling::Grid { step } => {
            let gap = contact_gaps(path, alpha, MinorantKind::TwoSided);
            Ok(grid_contact(path, &gap, tol, step, true))
        }
    }
}

/// `R_α = {t : X_t - αt = inf_{u ≤ t} X_u - αu}`, right values only.
pub fn ladder_set_r(path: &PathGrid, alpha: f64, tol: f64) -> Result<ClosedSet> {
    check_tol(tol)?;
    check_alpha(path, alpha, MinorantKind::OneSided)?;
    match path.sampling() {
        Sampling::Exact { .. } => Ok(exact_forward(path, alpha).1),
        Sampling::Grid { step } => {
            let times = path.times();
            let k = forward_running_min(times, &path.lower_values(), alpha);
            let hits: Vec<usize> = (0..times.len())
                .filter(|&i| path.values()[i] - alpha * times[i] - k[i] <= tol)
                .collect();
            let groups = clusters(times, &hits, step);
            Ok(ClosedSet::from_intervals(
                window_of(path),
                groups.iter().map(|&(a, b)| Interval::closed(times[a], times[b])),
            ))
        }
    }
}

/// The same path seen backwards in time: `t ↦ -t`, with the one-sided
/// limits swapped so that the result is again càdlàg.
pub fn reversed(path: &PathGrid) -> Result<PathGrid> {
    let times: Vec<f64> = path.times().iter().rev().map(|t| -t).collect();
    let values: Vec<f64> = path.left_values().iter().rev().copied().collect();
    let mut left: Vec<f64> = path.values().iter().rev().copied().collect();
    left[0] = values[0];
    let sampling = match path.sampling() {
        Sampling::Exact { slope } => Sampling::Exact { slope: -slope },
        grid => grid,
    };
    PathGrid::from_parts(times, values, left, sampling)
}

// Exact H and R of a piecewise-linear path in one forward pass. `m` is the
// running infimum of lo(s) - αs over the part already scanned.
fn exact_forward(path: &PathGrid, alpha: f64) -> (ClosedSet, ClosedSet) {
    let t = path.times();
    let v = path.values();
    let l = path.left_values();
    let n = t.len();
    let window = window_of(path);
    let mut h = Vec::new();
    let mut r = Vec::new();

    let f0 = v[0] - alpha * t[0];
    let mut m = f0.min(l[0] - alpha * t[0]);
    h.push(Interval::point(t[0]));
    if f0 <= m {
        r.push(Interval::point(t[0]));
    }
    for i in 0..n - 1 {
        let fa = v[i] - alpha * t[i];
        let fb = l[i + 1] - alpha * t[i + 1];
        if fb < fa {
            if fb <= m {
                let u = if fa <= m {
                    t[i]
                } else {
                    let frac = (fa - m) / (fa - fb);
                    (t[i] + frac * (t[i + 1] - t[i])).clamp(t[i], t[i + 1])
                };
                if u < t[i + 1] {
                    h.push(Interval::right_open(u, t[i + 1]));
                    r.push(Interval::right_open(u, t[i + 1]));
                }
                m = fb;
            }
        } else if fb == fa && fa <= m {
            h.push(Interval::right_open(t[i], t[i + 1]));
            r.push(Interval::right_open(t[i], t[i + 1]));
            m = fa;
        }
        let right = v[i + 1] - alpha * t[i + 1];
        let lower = fb.min(right);
        if lower <= m {
            h.push(Interval::point(t[i + 1]));
        }
        if right <= m {
            r.push(Interval::point(t[i + 1]));
        }
        m = m.min(lower);
    }
    (ClosedSet::from_intervals(window, h), ClosedSet::from_intervals(window, r))
}

/// Slopes above which each stored sample is a contact point.
///
/// `left[i] = max_{j<i} (lo_i - lo_j)/(t_i - t_j)`, so sample `i` lies in the
/// sampled `H_α` iff `α ≥ left[i]`; `right[i]` is the mirror image and the
/// sample lies in the sampled `Z_α` iff `α ≥ max(left[i], right[i])`. Both
/// come from a monotone-chain lower hull in O(n).
#[derive(Debug, Clone, PartialEq)]
pub struct ContactThresholds {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl ContactThresholds {
    pub fn two_sided(&self, i: usize) -> f64 {
        self.left[i].max(self.right[i])
    }
}

pub fn contact_thresholds(path: &PathGrid) -> Result<ContactThresholds> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    let lower = path.lower_values();
    let left = hull_slopes(path.times().iter().copied(), lower.iter().copied());
    let mut right = hull_slopes(
        path.times().iter().rev().map(|t| -t),
        lower.iter().rev().copied(),
    );
    right.reverse();
    Ok(ContactThresholds { left, right })
}

/// `left` of [`contact_thresholds`] only, for paths where `G` is all that is needed.
pub fn one_sided_thresholds(path: &PathGrid) -> Result<Vec<f64>> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    let lower = path.lower_values();
    Ok(hull_slopes(path.times().iter().copied(), lower.iter().copied()))
}

fn hull_slopes(times: impl Iterator<Item = f64>, values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    let mut out = Vec::new();
    for (t, y) in times.zip(values) {
        while hull.len() >= 2 {
            let (t0, y0) = hull[hull.len() - 2];
            let (t1, y1) = hull[hull.len() - 1];
            // Keep the top only if it lies strictly below the chord to (t, y).
            if (y1 - y0) * (t - t0) < (y - y0) * (t1 - t0) {
                break;
            }
            hull.pop();
        }
        out.push(match hull.last() {
            Some(&(t1, y1)) => (y - y1) / (t - t1),
            None => f64::NEG_INFINITY,
        });
        hull.push((t, y));
    }
    out
}

/// Outcome of the window-truncation check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuardReport {
    pub alpha: f64,
    pub max_deviation: f64,
    pub passed: bool,
}

/// Compare the envelope on the central half of the window with the one
/// recomputed from the path restricted to the central three quarters.
pub fn cone_of_influence_guard(
    path: &PathGrid,
    alpha: f64,
    kind: MinorantKind,
) -> Result<GuardReport> {
    let (lo, hi) = path.window();
    let inner = path.restrict(0.75 * lo, 0.75 * hi)?;
    let envelope = |p: &PathGrid| match kind {
        MinorantKind::OneSided => one_sided_infimum(p, alpha),
        MinorantKind::TwoSided => lipschitz_minorant(p, alpha),
    };
    let full = envelope(path)?;
    let part = envelope(&inner)?;
    let mut max_dev: f64 = 0.0;
    let mut scale: f64 = 1.0;
    let mut j = 0;
    for (i, &t) in full.times.iter().enumerate() {
        if t < 0.5 * lo || t > 0.5 * hi {
            continue;
        }
        while part.times[j] < t {
            j += 1;
        }
        max_dev = max_dev.max((full.values[i] - part.values[j]).abs());
        scale = scale.max(full.values[i].abs());
    }
    Ok(GuardReport { alpha, max_deviation: max_dev, passed: max_dev <= 1e-12 * scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{simulate, JumpLaw, ProcessSpec};

    fn abs_path(n: usize) -> PathGrid {
        let h = 1.0 / n as f64;
        let times: Vec<f64> = (0..=2 * n).map(|k| -1.0 + k as f64 * h).collect();
        let values = times.iter().map(|t: &f64| t.abs()).collect();
        PathGrid::from_samples(times, values, h).unwrap()
    }

    fn single_jump() -> PathGrid {
        let times = vec![-1.0, 0.0, 0.3, 1.0];
        let values = vec![0.0, 0.0, 1.0, 1.0];
        let left = vec![0.0, 0.0, 0.0, 1.0];
        PathGrid::from_parts(times, values, left, Sampling::Exact { slope: 0.0 }).unwrap()
    }

    #[test]
    fn zero_path() {
        let path = PathGrid::from_samples(vec![-1.0, 0.0, 1.0], vec![0.0; 3], 1.0).unwrap();
        assert_eq!(one_sided_infimum(&path, 1.0).unwrap().values, [0.0; 3]);
        assert_eq!(lipschitz_minorant(&path, 1.0).unwrap().values, [0.0; 3]);
        let full = ClosedSet::full(Window { lo: -1.0, hi: 1.0 });
        assert_eq!(contact_set_h(&path, 1.0, 0.0).unwrap(), full);
    }

    #[test]
    fn absolute_value_path() {
        let path = abs_path(10);
        let l = one_sided_infimum(&path, 0.5).unwrap();
        assert!((l.values.last().unwrap() - 0.5).abs() < 1e-12);
        let m = lipschitz_minorant(&path, 0.5).unwrap();
        for (t, v) in m.times.iter().zip(&m.values) {
            assert!((v - 0.5 * t.abs()).abs() < 1e-12);
        }
        let z = contact_set_z(&path, 0.5, 0.0).unwrap();
        assert_eq!(z.intervals(), &[Interval::point(0.0)]);
    }

    #[test]
    fn single_jump_sets() {
        let path = single_jump();
        let h = contact_set_h(&path, 1.0, 0.0).unwrap();
        assert_eq!(h.intervals(), &[Interval::closed(-1.0, 0.3)]);
        let r = ladder_set_r(&path, 1.0, 0.0).unwrap();
        assert_eq!(r.intervals(), &[Interval::right_open(-1.0, 0.3)]);
        let diff = h.difference(&r).unwrap();
        assert_eq!(diff.intervals(), &[Interval::point(0.3)]);
    }

    #[test]
    fn thresholds_reproduce_grid_contacts() {
        let spec = ProcessSpec::brownian(0.1, 1.0, 2.0, 0.01);
        let path = simulate(&spec, 4).unwrap();
        let thr = contact_thresholds(&path).unwrap();
        for alpha in [0.5, 1.0, 2.0, 4.0] {
            let h = contact_set_h(&path, alpha, 0.0).unwrap();
            let gh = contact_gaps(&path, alpha, MinorantKind::OneSided);
            let gz = contact_gaps(&path, alpha, MinorantKind::TwoSided);
            for i in 0..path.len() {
                let in_h = gh[i] <= 0.0;
                let in_z = gz[i] <= 0.0;
                // Ties within rounding are not decidable either way.
                if (thr.left[i] - alpha).abs() > 1e-9 {
                    assert_eq!(in_h, thr.left[i] <= alpha, "H alpha {alpha} index {i}");
                    assert!(!in_h || h.contains(path.times()[i]));
                }
                if (thr.two_sided(i) - alpha).abs() > 1e-9 {
                    assert_eq!(in_z, thr.two_sided(i) <= alpha, "Z alpha {alpha} index {i}");
                }
            }
        }
    }

    #[test]
    fn exact_z_is_within_h() {
        let law = JumpLaw::Normal { mean: 0.0, var: 1.0 };
        let spec = ProcessSpec::compound_poisson(0.2, 1.0, law, 20.0);
        for seed in 0..20 {
            let path = simulate(&spec, seed).unwrap();
            let h = contact_set_h(&path, 1.0, 0.0).unwrap();
            let z = contact_set_z(&path, 1.0, 0.0).unwrap();
            assert!(z.is_subset_of(&h).unwrap());
            assert!(z.is_closed());
        }
    }

    #[test]
    fn reversal_is_an_involution() {
        let law = JumpLaw::Exponential { mean: -0.7 };
        let spec = ProcessSpec::compound_poisson(0.5, 2.0, law, 5.0);
        let path = simulate(&spec, 2).unwrap();
        let back = reversed(&reversed(&path).unwrap()).unwrap();
        assert_eq!(back.times(), path.times());
        assert_eq!(back.values(), path.values());
    }

    #[test]
    fn guard_passes_for_steep_slopes() {
        let spec = ProcessSpec::brownian(0.0, 1.0, 40.0, 0.01);
        let path = simulate(&spec, 9).unwrap();
        let g = cone_of_influence_guard(&path, 3.0, MinorantKind::TwoSided).unwrap();
        assert!(g.passed, "{g:?}");
    }

    #[test]
    fn tolerance_formula() {
        let tol = default_tolerance(2.0, 1e-4, 3.0);
        assert!((tol - 6.0 * (1e-4f64 * (1e4f64).ln()).sqrt()).abs() < 1e-15);
        assert!(matches!(contact_set_h(&abs_path(4), 1.0, -1.0), Err(Error::NegativeTolerance(_))));
    }
}
