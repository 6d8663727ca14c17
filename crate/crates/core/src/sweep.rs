//! The slope-indexed processes `G_α = sup{t < 0 : t ∈ H_α}` and
//! `Y_α = sup{t < 0 : t ∈ Z_α}` and their jump catalogs.
//!
//! On sampled paths with exact contact (`tol = 0`) a single backward scan of
//! the contact thresholds gives the whole map `α ↦ G_α` at once: walking from
//! 0 into the past, the samples whose threshold undercuts every threshold seen
//! so far are exactly the values the map takes, and each such record is where
//! it jumps. Other inputs are swept one slope at a time.

use alloc::vec::Vec;

use crate::minorant::{contact_set_h, contact_set_z, contact_thresholds, ContactThresholds};
#[cfg(doc)]
use crate::minorant::one_sided_thresholds;
use crate::process::PathGrid;
use crate::sets::ClosedSet;
use crate::{Error, Result};

/// Which contact family is swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepKind {
    /// Last point of `H_α` before 0.
    G,
    /// Last point of `Z_α` before 0.
    Y,
}

/// One jump `(α, Δ)` of a swept map, tagged with the path seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogEntry {
    pub seed: u64,
    pub alpha: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub seed: u64,
    pub alphas: Vec<f64>,
    pub values: Vec<f64>,
    pub catalog: Vec<CatalogEntry>,
    /// Jumps no larger than this are left out of the catalog.
    pub jump_threshold: f64,
    /// Number of tolerance-induced decreases that were clamped.
    pub clamped: usize,
}

impl SweepResult {
    pub fn value_at_min(&self) -> f64 {
        self.values[0]
    }

    pub fn value_at_max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `G_{α_max} - G_{α_min}` minus the catalogued jumps.
    pub fn unexplained_increase(&self) -> f64 {
        let jumps: f64 = self.catalog.iter().map(|e| e.delta).sum();
        self.value_at_max() - self.value_at_min() - jumps
    }
}

/// `sup (set ∩ (-∞, 0))`.
pub fn last_contact_before_zero(set: &ClosedSet) -> Result<f64> {
    set.last_point_before(0.0).ok_or(Error::WindowTooSmall)
}

/// Record samples of the backward threshold scan, nearest to 0 first.
///
/// `thresholds` is strictly decreasing along the list; the swept value at
/// slope `α` is the time of the first record whose threshold is `≤ α`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactRecords {
    pub kind: SweepKind,
    pub times: Vec<f64>,
    pub thresholds: Vec<f64>,
}

impl ContactRecords {
    pub fn from_path(path: &PathGrid, kind: SweepKind) -> Result<Self> {
        let thr = contact_thresholds(path)?;
        Ok(Self::from_thresholds(path.times(), &thr, kind))
    }

    /// Records from thresholds already computed for the sample times `times`.
    pub fn from_thresholds(times: &[f64], thr: &ContactThresholds, kind: SweepKind) -> Self {
        Self::scan(times, kind, |i| threshold_of(thr, kind, i))
    }

    /// `G` records from the left thresholds alone (see [`one_sided_thresholds`]).
    pub fn from_one_sided(times: &[f64], left: &[f64]) -> Self {
        Self::scan(times, SweepKind::G, |i| left[i])
    }

    fn scan(times: &[f64], kind: SweepKind, threshold: impl Fn(usize) -> f64) -> Self {
        let zero = times.partition_point(|&t| t < 0.0);
        let mut out_times = Vec::new();
        let mut thresholds = Vec::new();
        let mut best = f64::INFINITY;
        for i in (0..zero).rev() {
            let theta = threshold(i);
            if theta < best {
                best = theta;
                out_times.push(times[i]);
                thresholds.push(theta);
            }
        }
        Self { kind, times: out_times, thresholds }
    }

    pub fn value_at(&self, alpha: f64) -> Result<f64> {
        let k = self.thresholds.partition_point(|&theta| theta > alpha);
        self.times.get(k).copied().ok_or(Error::WindowTooSmall)
    }

    /// Jumps `(α*, Δ)` with `lo < α* ≤ hi` and `Δ > threshold`.
    pub fn jumps(&self, lo: f64, hi: f64, threshold: f64) -> Vec<(f64, f64)> {
        (0..self.times.len().saturating_sub(1))
            .filter(|&k| self.thresholds[k] > lo && self.thresholds[k] <= hi)
            .map(|k| (self.thresholds[k], self.times[k] - self.times[k + 1]))
            .filter(|&(_, d)| d > threshold)
            .rev()
            .collect()
    }
}

fn threshold_of(thr: &ContactThresholds, kind: SweepKind, i: usize) -> f64 {
    match kind {
        SweepKind::G => thr.left[i],
        SweepKind::Y => thr.two_sided(i),
    }
}

/// First sample strictly after `t` lying in the sampled `H_α` (kind `G`) or
/// `Z_α` (kind `Y`).
pub fn next_sampled_contact(
    times: &[f64],
    thr: &ContactThresholds,
    kind: SweepKind,
    alpha: f64,
    t: f64,
) -> Option<f64> {
    let start = times.partition_point(|&s| s <= t);
    (start..times.len()).find(|&i| threshold_of(thr, kind, i) <= alpha).map(|i| times[i])
}

/// Default catalog floor: five grid steps, or zero on exact paths.
pub fn default_jump_threshold(path: &PathGrid) -> f64 {
    path.step().map_or(0.0, |h| 5.0 * h)
}

fn check_alphas(path: &PathGrid, alphas: &[f64], kind: SweepKind) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::InvalidAlpha("empty slope grid".into()));
    }
    if alphas.iter().any(|a| !a.is_finite()) || alphas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidAlpha("slope grid must be finite and strictly increasing".into()));
    }
    if let Some(mean) = path.spec().and_then(|s| s.mean_slope().ok()) {
        let floor = match kind {
            SweepKind::G => mean,
            SweepKind::Y => mean.abs(),
        };
        if alphas[0] <= floor {
            return Err(Error::InvalidAlpha(alloc::format!(
                "smallest slope {} must exceed {floor}",
                alphas[0]
            )));
        }
    }
    Ok(())
}

/// Sweep `alphas` with the default jump threshold.
pub fn alpha_sweep(path: &PathGrid, alphas: &[f64], kind: SweepKind, tol: f64) -> Result<SweepResult> {
    alpha_sweep_with_threshold(path, alphas, kind, tol, default_jump_threshold(path))
}

pub fn alpha_sweep_with_threshold(
    path: &PathGrid,
    alphas: &[f64],
    kind: SweepKind,
    tol: f64,
    jump_threshold: f64,
) -> Result<SweepResult> {
    check_alphas(path, alphas, kind)?;
    if tol < 0.0 || tol.is_nan() {
        return Err(Error::NegativeTolerance(tol));
    }
    let seed = path.seed();
    if !path.is_exact() && tol == 0.0 {
        let records = ContactRecords::from_path(path, kind)?;
        let values = alphas.iter().map(|&a| records.value_at(a)).collect::<Result<Vec<_>>>()?;
        let catalog = records
            .jumps(alphas[0], alphas[alphas.len() - 1], jump_threshold)
            .into_iter()
            .map(|(alpha, delta)| CatalogEntry { seed, alpha, delta })
            .collect();
        return Ok(SweepResult {
            kind,
            seed,
            alphas: alphas.to_vec(),
            values,
            catalog,
            jump_threshold,
            clamped: 0,
        });
    }

    let resolution = path.step().unwrap_or_else(|| {
        let (lo, hi) = path.window();
        1e-9 * lo.abs().max(hi.abs()).max(1.0)
    });
    let mut values = Vec::with_capacity(alphas.len());
    let mut catalog = Vec::new();
    let mut clamped = 0;
    for &alpha in alphas {
        let set = match kind {
            SweepKind::G => contact_set_h(path, alpha, tol)?,
            SweepKind::Y => contact_set_z(path, alpha, tol)?,
        };
        let mut value = last_contact_before_zero(&set)?;
        if let Some(&prev) = values.last() {
            let drop = prev - value;
            if drop > resolution {
                return Err(Error::Monotonicity { alpha, drop });
            }
            if drop > 0.0 {
                clamped += 1;
                value = prev;
            }
            let delta = value - prev;
            if delta > jump_threshold {
                catalog.push(CatalogEntry { seed, alpha, delta });
            }
        }
        values.push(value);
    }
    if clamped > 0 {
        log::debug!("clamped {clamped} tolerance-induced decreases on seed {seed}");
    }
    Ok(SweepResult { kind, seed, alphas: alphas.to_vec(), values, catalog, jump_threshold, clamped })
}

/// Pool the catalogs of sweeps over the same slope grid.
pub fn jump_catalog_merge(results: &[SweepResult]) -> Result<Vec<CatalogEntry>> {
    let Some(first) = results.first() else {
        return Ok(Vec::new());
    };
    for r in results {
        if r.kind != first.kind {
            return Err(Error::IncompatibleSweeps("mixed G and Y sweeps".into()));
        }
        if r.alphas != first.alphas {
            return Err(Error::IncompatibleSweeps("different slope grids".into()));
        }
    }
    Ok(results.iter().flat_map(|r| r.catalog.iter().copied()).collect())
}

/// Geometric grid from `lo` to `hi` with `per_decade` points per factor 10.
pub fn geometric_alpha_grid(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && per_decade > 0) {
        return Err(Error::InvalidAlpha("geometric grid needs 0 < lo < hi".into()));
    }
    let decades = libm::log10(hi / lo);
    let count = (libm::ceil(decades * per_decade as f64) as usize).max(1) + 1;
    geometric_grid_count(lo, hi, count)
}

/// Geometric grid of exactly `count` points from `lo` to `hi`.
pub fn geometric_grid_count(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && count >= 2) {
        return Err(Error::InvalidAlpha("geometric grid needs 0 < lo < hi and 2 points".into()));
    }
    let ratio = libm::log(hi / lo) / (count - 1) as f64;
    let mut grid: Vec<f64> = (0..count).map(|k| lo * libm::exp(ratio * k as f64)).collect();
    grid[count - 1] = hi;
    Ok(grid)
}
