//! Monte Carlo replicas and the statistical tests run on them.
//!
//! A [`ReplicaPlan`] says which statistics to extract from each simulated
//! path; [`run_replicas`] evaluates it in parallel and returns a
//! [`ReplicaSet`] in replica order. The `*_test` functions are plain
//! functions of samples and oracles, so they can be exercised on synthetic
//! data as well.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use regenset_core::minorant::{contact_thresholds, one_sided_thresholds};
use regenset_core::seed::replica_seed;
use regenset_core::sets::set_ops;
use regenset_core::stats::{
    chi_square_gof, dispersion_index, independence_chi_square, ks_two_sample, laplace_estimate,
    pearson, z_score,
};
use regenset_core::sweep::{
    alpha_sweep_with_threshold, default_jump_threshold, last_contact_before_zero,
    next_sampled_contact, ContactRecords,
};
use regenset_core::theory::{nu_laplace, y_increment_lt};
use regenset_core::{minorant, process, CatalogEntry, ClosedSet, Error, PathGrid, ProcessSpec, SweepKind};
use serde::{Deserialize, Serialize};

use crate::error::{RunError, RunResult};

/// Share of replicas allowed to depend on the window edge before a run aborts.
pub const MAX_GUARD_FAILURE_RATE: f64 = 1e-3;

/// Offset of the refinement stream in [`replica_seed`].
const REFINE_STREAM: u64 = 0x5EED_F1E5;

/// Gap statistic `d_t - t` sampled at `t = 0` on even replicas and at
/// `t = shift` on odd ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapPlan {
    pub alpha: f64,
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaPlan {
    pub spec: ProcessSpec,
    pub n: usize,
    pub master_seed: u64,
    pub g_alphas: Vec<f64>,
    pub y_alphas: Vec<f64>,
    /// Slope range whose `G` jumps are catalogued.
    pub g_jumps: Option<(f64, f64)>,
    pub y_jumps: Option<(f64, f64)>,
    /// Catalog floor; `None` uses the per-path default.
    pub jump_threshold: Option<f64>,
    pub gap: Option<GapPlan>,
    /// Also evaluate `G` at `g_alphas` on the negative half refined by this factor.
    pub refine: Option<usize>,
    /// Slope grid for per-α sweeps on exact paths.
    pub exact_sweep_points: usize,
}

impl ReplicaPlan {
    pub fn new(spec: ProcessSpec, n: usize, master_seed: u64) -> Self {
        Self {
            spec,
            n,
            master_seed,
            g_alphas: Vec::new(),
            y_alphas: Vec::new(),
            g_jumps: None,
            y_jumps: None,
            jump_threshold: None,
            gap: None,
            refine: None,
            exact_sweep_points: 401,
        }
    }

    fn needs_two_sided(&self) -> bool {
        !self.y_alphas.is_empty() || self.y_jumps.is_some() || self.gap.is_some()
    }

    fn gap_time(&self, index: u64) -> f64 {
        match self.gap {
            Some(g) if index % 2 == 1 => g.shift,
            _ => 0.0,
        }
    }
}

/// Statistics extracted from one path.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReplicaStats {
    pub g: Vec<f64>,
    pub y: Vec<f64>,
    pub g_jumps: Vec<(f64, f64)>,
    pub y_jumps: Vec<(f64, f64)>,
    pub h_gap: Option<f64>,
    pub z_gap: Option<f64>,
}

impl ReplicaStats {
    fn agrees_with(&self, other: &Self) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
        let all = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| close(*x, *y));
        let pairs = |a: &[(f64, f64)], b: &[(f64, f64)]| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| close(x.0, y.0) && close(x.1, y.1))
        };
        let opt = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => close(x, y),
            (None, None) => true,
            _ => false,
        };
        all(&self.g, &other.g)
            && all(&self.y, &other.y)
            && pairs(&self.g_jumps, &other.g_jumps)
            && pairs(&self.y_jumps, &other.y_jumps)
            && opt(self.h_gap, other.h_gap)
            && opt(self.z_gap, other.z_gap)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replica {
    pub index: u64,
    pub seed: u64,
    pub stats: ReplicaStats,
    /// `G` at the plan's slopes on the refined negative half.
    pub fine_g: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ReplicaSet {
    pub plan: ReplicaPlan,
    pub replicas: Vec<Replica>,
    /// Replicas dropped because their statistics moved when the window shrank.
    pub excluded: Vec<u64>,
    pub runtime: Duration,
}

impl ReplicaSet {
    pub fn g_values(&self, k: usize) -> Vec<f64> {
        self.replicas.iter().map(|r| r.stats.g[k]).collect()
    }

    pub fn y_values(&self, k: usize) -> Vec<f64> {
        self.replicas.iter().map(|r| r.stats.y[k]).collect()
    }

    pub fn fine_g_values(&self, k: usize) -> Vec<f64> {
        self.replicas.iter().map(|r| r.fine_g[k]).collect()
    }

    pub fn jumps(&self, kind: SweepKind) -> Vec<&[(f64, f64)]> {
        self.replicas
            .iter()
            .map(|r| match kind {
                SweepKind::G => r.stats.g_jumps.as_slice(),
                SweepKind::Y => r.stats.y_jumps.as_slice(),
            })
            .collect()
    }

    /// All catalogued jumps tagged with their replica seed.
    pub fn catalog(&self, kind: SweepKind) -> Vec<CatalogEntry> {
        self.replicas
            .iter()
            .flat_map(|r| {
                let jumps = match kind {
                    SweepKind::G => &r.stats.g_jumps,
                    SweepKind::Y => &r.stats.y_jumps,
                };
                jumps.iter().map(move |&(alpha, delta)| CatalogEntry { seed: r.seed, alpha, delta })
            })
            .collect()
    }

    /// Gap samples `(at t = 0, at t = shift)` for `H` (kind `G`) or `Z` (kind `Y`).
    pub fn gaps(&self, kind: SweepKind) -> (Vec<f64>, Vec<f64>) {
        let mut zero = Vec::new();
        let mut shifted = Vec::new();
        for r in &self.replicas {
            let g = match kind {
                SweepKind::G => r.stats.h_gap,
                SweepKind::Y => r.stats.z_gap,
            };
            if let Some(v) = g {
                if r.index % 2 == 0 { zero.push(v) } else { shifted.push(v) }
            }
        }
        (zero, shifted)
    }
}

fn with_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> RunResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| RunError::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// Simulate and reduce `plan.n` replicas on `workers` threads (default: all cores).
pub fn run_replicas(plan: &ReplicaPlan, workers: Option<usize>) -> RunResult<ReplicaSet> {
    plan.spec.validate()?;
    let start = Instant::now();
    let outcomes: Vec<Result<Option<Replica>, Error>> = with_pool(workers, || {
        (0..plan.n as u64).into_par_iter().map(|i| one_replica(plan, i)).collect()
    })?;
    let mut replicas = Vec::with_capacity(plan.n);
    let mut excluded = Vec::new();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome? {
            Some(r) => replicas.push(r),
            None => excluded.push(i as u64),
        }
    }
    if excluded.len() as f64 > MAX_GUARD_FAILURE_RATE * plan.n as f64 {
        return Err(RunError::WindowTooSmall {
            failures: excluded.len(),
            n: plan.n,
            half_width: plan.spec.half_width,
        });
    }
    if !excluded.is_empty() {
        log::info!("{} replicas excluded by the window guard", excluded.len());
    }
    Ok(ReplicaSet { plan: plan.clone(), replicas, excluded, runtime: start.elapsed() })
}

// `None` when the replica fails the window guard.
fn one_replica(plan: &ReplicaPlan, index: u64) -> Result<Option<Replica>, Error> {
    let seed = replica_seed(plan.master_seed, index);
    let path = process::simulate(&plan.spec, seed)?;
    let (lo, hi) = path.window();
    let inner = path.restrict(0.75 * lo, 0.75 * hi)?;
    let (full, part) = match (extract(plan, &path, index), extract(plan, &inner, index)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(Error::WindowTooSmall), _) | (_, Err(Error::WindowTooSmall)) => return Ok(None),
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    if !full.agrees_with(&part) {
        return Ok(None);
    }
    let fine_g = match plan.refine {
        Some(factor) if !path.is_exact() && !plan.g_alphas.is_empty() => {
            let negative = path.restrict(lo, 0.0)?;
            let fine = process::refine_by_bridging(&negative, factor, replica_seed(seed, REFINE_STREAM))?;
            let left = one_sided_thresholds(&fine)?;
            let records = ContactRecords::from_one_sided(fine.times(), &left);
            match plan.g_alphas.iter().map(|&a| records.value_at(a)).collect() {
                Ok(v) => v,
                Err(Error::WindowTooSmall) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
        _ => Vec::new(),
    };
    Ok(Some(Replica { index, seed, stats: full, fine_g }))
}

fn extract(plan: &ReplicaPlan, path: &PathGrid, index: u64) -> Result<ReplicaStats, Error> {
    if path.is_exact() {
        extract_exact(plan, path, index)
    } else {
        extract_grid(plan, path, index)
    }
}

fn jump_floor(plan: &ReplicaPlan, path: &PathGrid) -> f64 {
    plan.jump_threshold.unwrap_or_else(|| default_jump_threshold(path))
}

/// `d - t` in whole grid steps when both times sit on the grid, so that
/// equal offsets compare equal whatever the rounding in the stored times.
fn grid_gap(d: f64, t: f64, h: f64) -> f64 {
    let node = |x: f64| {
        let k = (x / h).round();
        ((x / h - k).abs() < 1e-6).then_some(k)
    };
    match (node(d), node(t)) {
        (Some(a), Some(b)) if h > 0.0 => (a - b) * h,
        _ => d - t,
    }
}

fn extract_grid(plan: &ReplicaPlan, path: &PathGrid, index: u64) -> Result<ReplicaStats, Error> {
    let times = path.times();
    let floor = jump_floor(plan, path);
    let mut out = ReplicaStats::default();
    if plan.needs_two_sided() {
        let thr = contact_thresholds(path)?;
        let g = ContactRecords::from_thresholds(times, &thr, SweepKind::G);
        let y = ContactRecords::from_thresholds(times, &thr, SweepKind::Y);
        fill(&mut out, plan, &g, &y, floor)?;
        if let Some(gap) = plan.gap {
            let t = plan.gap_time(index);
            let h = path.step().unwrap_or(0.0);
            let next = |kind| next_sampled_contact(times, &thr, kind, gap.alpha, t).map(|d| grid_gap(d, t, h));
            out.h_gap = Some(next(SweepKind::G).ok_or(Error::WindowTooSmall)?);
            out.z_gap = Some(next(SweepKind::Y).ok_or(Error::WindowTooSmall)?);
        }
    } else {
        let left = one_sided_thresholds(path)?;
        let g = ContactRecords::from_one_sided(times, &left);
        let empty = ContactRecords { kind: SweepKind::Y, times: Vec::new(), thresholds: Vec::new() };
        fill(&mut out, plan, &g, &empty, floor)?;
    }
    Ok(out)
}

fn fill(
    out: &mut ReplicaStats,
    plan: &ReplicaPlan,
    g: &ContactRecords,
    y: &ContactRecords,
    floor: f64,
) -> Result<(), Error> {
    out.g = plan.g_alphas.iter().map(|&a| g.value_at(a)).collect::<Result<_, _>>()?;
    out.y = plan.y_alphas.iter().map(|&a| y.value_at(a)).collect::<Result<_, _>>()?;
    if let Some((lo, hi)) = plan.g_jumps {
        g.value_at(lo)?;
        out.g_jumps = g.jumps(lo, hi, floor);
    }
    if let Some((lo, hi)) = plan.y_jumps {
        y.value_at(lo)?;
        out.y_jumps = y.jumps(lo, hi, floor);
    }
    Ok(())
}

fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let k = points.max(2) - 1;
    (0..=k).map(|i| lo + (hi - lo) * i as f64 / k as f64).collect()
}

fn extract_exact(plan: &ReplicaPlan, path: &PathGrid, index: u64) -> Result<ReplicaStats, Error> {
    let last = |set: ClosedSet| last_contact_before_zero(&set);
    let mut out = ReplicaStats::default();
    for &a in &plan.g_alphas {
        out.g.push(last(minorant::contact_set_h(path, a, 0.0)?)?);
    }
    for &a in &plan.y_alphas {
        out.y.push(last(minorant::contact_set_z(path, a, 0.0)?)?);
    }
    let floor = jump_floor(plan, path);
    let sweep_jumps = |range: (f64, f64), kind| -> Result<Vec<(f64, f64)>, Error> {
        let alphas = linear_grid(range.0, range.1, plan.exact_sweep_points);
        let r = alpha_sweep_with_threshold(path, &alphas, kind, 0.0, floor)?;
        Ok(r.catalog.iter().map(|e| (e.alpha, e.delta)).collect())
    };
    if let Some(range) = plan.g_jumps {
        out.g_jumps = sweep_jumps(range, SweepKind::G)?;
    }
    if let Some(range) = plan.y_jumps {
        out.y_jumps = sweep_jumps(range, SweepKind::Y)?;
    }
    if let Some(gap) = plan.gap {
        let t = plan.gap_time(index);
        let h = minorant::contact_set_h(path, gap.alpha, 0.0)?;
        let z = minorant::contact_set_z(path, gap.alpha, 0.0)?;
        out.h_gap = Some(h.next_point_after(t).ok_or(Error::WindowTooSmall)? - t);
        out.z_gap = Some(z.next_point_after(t).ok_or(Error::WindowTooSmall)? - t);
    }
    Ok(out)
}

/// Thresholds a report is judged against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub z_band: f64,
    pub p_floor: f64,
    /// Absolute bound for deterministic comparisons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { z_band: 3.0, p_floor: 0.01, bound: None }
    }
}

impl Tolerance {
    pub fn with_floor(self, p_floor: f64) -> Self {
        Self { p_floor, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    Skipped,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok { Verdict::Pass } else { Verdict::Fail }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
            Verdict::Skipped => "SKIPPED",
        }
    }
}

// Non-finite floats travel through JSON as null.
mod lossy {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() { s.serialize_f64(*x) } else { s.serialize_none() }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// One compared quantity of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// `[slope_lo, slope_hi, delta_lo, delta_hi]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bin: Option<[f64; 4]>,
    #[serde(with = "lossy")]
    pub estimate: f64,
    #[serde(with = "lossy")]
    pub oracle: f64,
    #[serde(with = "lossy")]
    pub std_error: f64,
    #[serde(with = "lossy")]
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub id: String,
    pub claim: String,
    pub n: usize,
    pub master_seed: u64,
    #[serde(with = "lossy")]
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub z_max: Option<f64>,
    pub tolerance: Tolerance,
    pub verdict: Verdict,
    pub gating: bool,
    pub rows: Vec<Row>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub runtime: Duration,
}

impl TestReport {
    pub fn new(id: &str, claim: &str, tolerance: Tolerance) -> Self {
        Self {
            id: id.to_string(),
            claim: claim.to_string(),
            n: 0,
            master_seed: 0,
            statistic: f64::NAN,
            p_value: None,
            z_max: None,
            tolerance,
            verdict: Verdict::Skipped,
            gating: true,
            rows: Vec::new(),
            notes: Vec::new(),
            runtime: Duration::ZERO,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    pub fn non_gating(mut self) -> Self {
        self.gating = false;
        self
    }

    pub fn skipped(id: &str, claim: &str, tolerance: Tolerance, why: &str) -> Self {
        let mut r = Self::new(id, claim, tolerance);
        r.notes.push(why.to_string());
        r
    }

    fn finite_z_max(&self) -> f64 {
        self.rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max)
    }

    pub fn to_json_line(&self) -> RunResult<String> {
        Ok(serde_json::to_string(self)?)
    }
}

fn laplace_rows(
    label: &str,
    samples: &[f64],
    lambdas: &[f64],
    oracle: &dyn Fn(f64) -> regenset_core::Result<f64>,
) -> RunResult<Vec<Row>> {
    lambdas
        .iter()
        .map(|&lambda| {
            let est = laplace_estimate(samples, lambda)?;
            let target = oracle(lambda)?;
            Ok(Row {
                label: label.to_string(),
                lambda: Some(lambda),
                bin: None,
                estimate: est.mean,
                oracle: target,
                std_error: est.std_error,
                z: z_score(est.mean, target, est.std_error),
            })
        })
        .collect()
}

/// Empirical `E[exp(-λx)]` of nonnegative `samples` against `oracle(λ)`;
/// passes when every `|z|` is within the band.
pub fn laplace_test(
    id: &str,
    claim: &str,
    samples: &[f64],
    lambdas: &[f64],
    oracle: impl Fn(f64) -> regenset_core::Result<f64>,
    tol: Tolerance,
) -> RunResult<TestReport> {
    let start = Instant::now();
    let mut r = TestReport::new(id, claim, tol);
    r.n = samples.len();
    r.rows = laplace_rows("laplace", samples, lambdas, &oracle)?;
    let z = r.finite_z_max();
    r.statistic = z;
    r.z_max = Some(z);
    r.verdict = Verdict::from_bool(z <= tol.z_band);
    r.runtime = start.elapsed();
    Ok(r)
}

/// `-G_α` against the top-case `ν` transform of `spec`.
pub fn test_g_marginal(
    set: &ReplicaSet,
    k: usize,
    lambdas: &[f64],
    tol: Tolerance,
) -> RunResult<TestReport> {
    let alpha = set.plan.g_alphas[k];
    let spec = &set.plan.spec;
    let id = format!("g-marginal[beta={},alpha={alpha}]", spec.drift);
    let claim = "-G_alpha has the law nu of the top slope class";
    let samples: Vec<f64> = set.g_values(k).iter().map(|g| -g).collect();
    let oracle = |l: f64| nu_laplace(spec, alpha, None, l, 1e-10).map(|e| e.value);
    let r = laplace_test(&id, claim, &samples, lambdas, oracle, tol)?;
    Ok(r.with_seed(set.plan.master_seed))
}

/// [`test_g_marginal`] at the plan step and at the refined step; a verdict
/// that changes with the step is reported as inconclusive.
pub fn test_g_marginal_two_steps(
    set: &ReplicaSet,
    k: usize,
    lambdas: &[f64],
    tol: Tolerance,
) -> RunResult<TestReport> {
    let coarse = test_g_marginal(set, k, lambdas, tol)?;
    if set.replicas.first().is_none_or(|r| r.fine_g.is_empty()) {
        return Ok(coarse);
    }
    let alpha = set.plan.g_alphas[k];
    let spec = &set.plan.spec;
    let samples: Vec<f64> = set.fine_g_values(k).iter().map(|g| -g).collect();
    let oracle = |l: f64| nu_laplace(spec, alpha, None, l, 1e-10).map(|e| e.value);
    let fine = laplace_test(&coarse.id, &coarse.claim, &samples, lambdas, oracle, tol)?;
    Ok(resolution_stability(coarse, fine))
}

/// Merge the reports of one test at two grid steps.
pub fn resolution_stability(coarse: TestReport, fine: TestReport) -> TestReport {
    let mut out = coarse.clone();
    out.rows.extend(fine.rows.into_iter().map(|mut row| {
        row.label = format!("{} (refined)", row.label);
        row
    }));
    out.statistic = coarse.statistic.max(fine.statistic);
    out.z_max = match (coarse.z_max, fine.z_max) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    };
    out.verdict = match (coarse.verdict, fine.verdict) {
        (a, b) if a == b => a,
        _ => Verdict::Inconclusive,
    };
    if out.verdict == Verdict::Inconclusive {
        out.notes.push(format!(
            "verdict moved with the grid step: {} at h, {} at the refined step",
            coarse.verdict.as_str(),
            fine.verdict.as_str()
        ));
    }
    out.runtime += fine.runtime;
    out
}

/// Independence of two increment columns plus their marginal transforms.
#[allow(clippy::too_many_arguments)]
pub fn increment_independence_test(
    id: &str,
    claim: &str,
    a: &[f64],
    b: &[f64],
    lambdas: &[f64],
    oracle_a: impl Fn(f64) -> regenset_core::Result<f64>,
    oracle_b: impl Fn(f64) -> regenset_core::Result<f64>,
    tol: Tolerance,
) -> RunResult<TestReport> {
    let start = Instant::now();
    let mut r = TestReport::new(id, claim, tol);
    r.n = a.len();
    let constant = |x: &[f64]| x.iter().all(|v| *v == x[0]);
    if a.is_empty() || constant(a) || constant(b) {
        r.notes.push("degenerate increments: a column is constant".into());
        return Ok(r);
    }
    let corr = pearson(a, b)?;
    let chi = independence_chi_square(a, b, 4)?;
    r.rows.push(Row {
        label: "correlation".into(),
        lambda: None,
        bin: None,
        estimate: corr.r,
        oracle: 0.0,
        std_error: 1.0 / ((a.len() - 3) as f64).sqrt(),
        z: corr.z,
    });
    r.rows.extend(laplace_rows("first increment", a, lambdas, &oracle_a)?);
    r.rows.extend(laplace_rows("second increment", b, lambdas, &oracle_b)?);
    let z = r.finite_z_max();
    r.z_max = Some(z);
    r.p_value = Some(chi.p_value);
    r.statistic = chi.statistic;
    r.notes.push(format!("chi-square {:.3} on {} dof", chi.statistic, chi.dof));
    r.verdict = Verdict::from_bool(z <= tol.z_band && chi.p_value > tol.p_floor);
    r.runtime = start.elapsed();
    Ok(r)
}

/// `G` increments over the plan slopes with indices `idx[0] < idx[1] < idx[2]`.
pub fn test_increment_independence(
    set: &ReplicaSet,
    idx: [usize; 3],
    lambdas: &[f64],
    tol: Tolerance,
) -> RunResult<TestReport> {
    let al = idx.map(|i| set.plan.g_alphas[i]);
    let spec = &set.plan.spec;
    let [g0, g1, g2] = idx.map(|i| set.g_values(i));
    let a: Vec<f64> = g1.iter().zip(&g0).map(|(x, y)| x - y).collect();
    let b: Vec<f64> = g2.iter().zip(&g1).map(|(x, y)| x - y).collect();
    let id = format!("increment-independence[beta={},alphas={}/{}/{}]", spec.drift, al[0], al[1], al[2]);
    let claim = "G increments over disjoint slope classes are independent with laws nu_i";
    let r = increment_independence_test(
        &id,
        claim,
        &a,
        &b,
        lambdas,
        |l| nu_laplace(spec, al[0], Some(al[1]), l, 1e-10).map(|e| e.value),
        |l| nu_laplace(spec, al[1], Some(al[2]), l, 1e-10).map(|e| e.value),
        tol,
    )?;
    Ok(r.with_seed(set.plan.master_seed))
}

/// Slope and jump-size bin edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Bins {
    pub alpha_edges: Vec<f64>,
    pub delta_edges: Vec<f64>,
}

impl Bins {
    pub fn count(&self) -> usize {
        (self.alpha_edges.len() - 1) * (self.delta_edges.len() - 1)
    }

    fn locate(&self, alpha: f64, delta: f64) -> Option<usize> {
        let cell = |edges: &[f64], x: f64| {
            let k = edges.partition_point(|&e| e <= x);
            (k >= 1 && k < edges.len()).then(|| k - 1)
        };
        let i = cell(&self.alpha_edges, alpha)?;
        let j = cell(&self.delta_edges, delta)?;
        Some(i * (self.delta_edges.len() - 1) + j)
    }

    fn cell(&self, b: usize) -> [f64; 4] {
        let m = self.delta_edges.len() - 1;
        let (i, j) = (b / m, b % m);
        [self.alpha_edges[i], self.alpha_edges[i + 1], self.delta_edges[j], self.delta_edges[j + 1]]
    }
}

/// Smallest expected count for a bin to enter the test.
pub const MIN_EXPECTED: f64 = 10.0;
/// Smallest expected count for the per-replica dispersion check.
pub const MIN_EXPECTED_DISPERSION: f64 = 50.0;
/// Share of admissible bins that must fall inside the z band.
pub const BIN_PASS_SHARE: f64 = 0.95;
pub const DISPERSION_RANGE: (f64, f64) = (0.8, 1.2);

/// Pooled jump counts per bin against Poisson means `N Λ_b`, where
/// `oracle(slope_bin, delta_bin)` returns `Λ_b` per path.
pub fn jump_intensity_test(
    id: &str,
    claim: &str,
    per_replica: &[&[(f64, f64)]],
    bins: &Bins,
    oracle: impl Fn((f64, f64), (f64, f64)) -> regenset_core::Result<f64>,
    tol: Tolerance,
) -> RunResult<TestReport> {
    let start = Instant::now();
    let mut r = TestReport::new(id, claim, tol);
    let n = per_replica.len();
    r.n = n;
    let nb = bins.count();
    let mut per_seed = vec![vec![0.0; n]; nb];
    for (s, jumps) in per_replica.iter().enumerate() {
        for &(alpha, delta) in jumps.iter() {
            if let Some(b) = bins.locate(alpha, delta) {
                per_seed[b][s] += 1.0;
            }
        }
    }
    let mut observed = Vec::new();
    let mut expected = Vec::new();
    let mut inside = 0usize;
    let mut excluded = 0usize;
    let mut dispersion_ok = true;
    for (b, counts) in per_seed.iter().enumerate() {
        let c = bins.cell(b);
        let lambda = oracle((c[0], c[1]), (c[2], c[3]))?;
        let mean = n as f64 * lambda;
        let count: f64 = counts.iter().sum();
        let se = mean.sqrt();
        let z = z_score(count, mean, se);
        r.rows.push(Row {
            label: "bin".into(),
            lambda: None,
            bin: Some(c),
            estimate: count,
            oracle: mean,
            std_error: se,
            z,
        });
        if mean < MIN_EXPECTED {
            excluded += 1;
            if mean == 0.0 && count > 0.0 {
                r.notes.push(format!("bin {c:?} has zero intensity but {count} jumps"));
                dispersion_ok = false;
            }
            continue;
        }
        observed.push(count);
        expected.push(mean);
        if z.abs() <= tol.z_band {
            inside += 1;
        }
        if mean >= MIN_EXPECTED_DISPERSION {
            let d = dispersion_index(counts);
            if !(DISPERSION_RANGE.0..=DISPERSION_RANGE.1).contains(&d) {
                dispersion_ok = false;
                r.notes.push(format!("bin {c:?}: variance/mean {d:.3}"));
            }
        }
    }
    if excluded > 0 {
        r.notes.push(format!("{excluded} of {nb} bins have expected count below {MIN_EXPECTED}"));
    }
    if observed.is_empty() {
        r.notes.push("no admissible bin".into());
        r.verdict = Verdict::Skipped;
        return Ok(r);
    }
    let chi = chi_square_gof(&observed, &expected, 0)?;
    let share = inside as f64 / observed.len() as f64;
    r.statistic = chi.statistic;
    r.p_value = Some(chi.p_value);
    r.z_max = Some(r.finite_z_max_admissible());
    r.notes.push(format!(
        "{inside} of {} admissible bins within the band; chi-square {:.2} on {} dof",
        observed.len(),
        chi.statistic,
        chi.dof
    ));
    r.verdict =
        Verdict::from_bool(share >= BIN_PASS_SHARE && chi.p_value > tol.p_floor && dispersion_ok);
    r.runtime = start.elapsed();
    Ok(r)
}

impl TestReport {
    fn finite_z_max_admissible(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.oracle >= MIN_EXPECTED)
            .map(|r| r.z.abs())
            .fold(0.0, f64::max)
    }
}

/// Catalogued jumps of kind `kind` against `oracle`.
pub fn test_jump_intensity(
    set: &ReplicaSet,
    kind: SweepKind,
    bins: &Bins,
    oracle: impl Fn((f64, f64), (f64, f64)) -> regenset_core::Result<f64>,
    tol: Tolerance,
) -> RunResult<TestReport> {
    let (name, claim) = match kind {
        SweepKind::G => ("jump-intensity-G", "jumps of G form a Poisson process with intensity t^-1 P{X_t/t in dx} dt"),
        SweepKind::Y => ("jump-intensity-Y", "jumps of Y form a Poisson process with the stated Brownian intensity"),
    };
    let id = format!("{name}[beta={}]", set.plan.spec.drift);
    let jumps = set.jumps(kind);
    let r = jump_intensity_test(&id, claim, &jumps, bins, oracle, tol)?;
    Ok(r.with_seed(set.plan.master_seed))
}

/// `Y_{α₂} - Y_{α₁}` for plan slopes `i < j` against `oracle(λ)`.
pub fn y_increment_test(
    set: &ReplicaSet,
    i: usize,
    j: usize,
    lambdas: &[f64],
    oracle: impl Fn(f64) -> regenset_core::Result<f64>,
    tol: Tolerance,
) -> RunResult<TestReport> {
    let (a1, a2) = (set.plan.y_alphas[i], set.plan.y_alphas[j]);
    let id = format!("y-increment-lt[beta={},alphas={a1}/{a2}]", set.plan.spec.drift);
    let claim = "Laplace transform of Y increments is a ratio of minorant exponents";
    let (y1, y2) = (set.y_values(i), set.y_values(j));
    let samples: Vec<f64> = y2.iter().zip(&y1).map(|(b, a)| b - a).collect();
    let r = laplace_test(&id, claim, &samples, lambdas, oracle, tol)?;
    Ok(r.with_seed(set.plan.master_seed))
}

/// [`y_increment_test`] against the closed form at drift `beta`.
pub fn test_y_increment_lt(
    set: &ReplicaSet,
    i: usize,
    j: usize,
    beta: f64,
    lambdas: &[f64],
    tol: Tolerance,
) -> RunResult<TestReport> {
    let (a1, a2) = (set.plan.y_alphas[i], set.plan.y_alphas[j]);
    y_increment_test(set, i, j, lambdas, |l| y_increment_lt(beta, a1, a2, l), tol)
}

/// Two-sample KS between gap samples at two times.
pub fn stationarity_test(
    id: &str,
    claim: &str,
    at_zero: &[f64],
    at_shift: &[f64],
    tol: Tolerance,
) -> RunResult<TestReport> {
    let start = Instant::now();
    let mut r = TestReport::new(id, claim, tol);
    r.n = at_zero.len() + at_shift.len();
    let ks = ks_two_sample(at_zero, at_shift)?;
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    for (label, x) in [("gap at 0", at_zero), ("gap at shift", at_shift)] {
        r.rows.push(Row {
            label: label.into(),
            lambda: None,
            bin: None,
            estimate: mean(x),
            oracle: f64::NAN,
            std_error: regenset_core::stats::std_error(x),
            z: f64::NAN,
        });
    }
    r.statistic = ks.statistic;
    r.p_value = Some(ks.p_value);
    r.verdict = Verdict::from_bool(ks.p_value > tol.p_floor);
    r.runtime = start.elapsed();
    Ok(r)
}

/// KS stationarity of the `H` (kind `G`) or `Z` (kind `Y`) gap statistic.
pub fn test_stationarity(set: &ReplicaSet, kind: SweepKind, tol: Tolerance) -> RunResult<TestReport> {
    let gap = set.plan.gap.ok_or_else(|| RunError::Config("plan has no gap statistic".into()))?;
    let which = match kind {
        SweepKind::G => "H",
        SweepKind::Y => "Z",
    };
    let backend = if set.plan.spec.is_exact() { "exact" } else { "grid" };
    let id = format!(
        "stationarity-{which}[{backend},beta={},alpha={},u={}]",
        set.plan.spec.drift, gap.alpha, gap.shift
    );
    let claim = "the contact set is stationary: d_t - t has the same law at t = 0 and t = u";
    let (a, b) = set.gaps(kind);
    let r = stationarity_test(&id, claim, &a, &b, tol)?;
    Ok(r.with_seed(set.plan.master_seed))
}

/// Violations of the exact set identities on one path for nested slopes.
pub fn set_algebra_violations(path: &PathGrid, alphas: &[f64], tol: f64) -> RunResult<Vec<String>> {
    let mut out = Vec::new();
    let mut prev: Option<(f64, ClosedSet, ClosedSet)> = None;
    for &a in alphas {
        let h = minorant::contact_set_h(path, a, tol)?;
        let r = minorant::ladder_set_r(path, a, tol)?;
        let z = minorant::contact_set_z(path, a, tol)?;
        let cmp = set_ops(&r, &h)?;
        if !cmp.subset {
            out.push(format!("alpha {a}: R not inside H"));
        }
        if !r.is_right_closed() {
            out.push(format!("alpha {a}: R not right-closed"));
        }
        let cl = cmp.closure;
        if !(cl.is_subset_of(&h)? && h.is_subset_of(&cl)?) {
            out.push(format!("alpha {a}: closure of R differs from H"));
        }
        let isolated = h.isolated_right_points();
        let eps = h.window().slack();
        for iv in set_ops(&h, &r)?.difference.intervals() {
            if !iv.is_point() {
                out.push(format!("alpha {a}: H minus R has a non-degenerate piece at {}", iv.lo));
            } else if !isolated.iter().any(|p| (p - iv.lo).abs() <= eps) {
                out.push(format!("alpha {a}: point {} of H minus R is not right-isolated", iv.lo));
            }
        }
        if let Some((pa, ph, pz)) = &prev {
            if !ph.is_subset_of(&h)? {
                out.push(format!("H at {pa} not inside H at {a}"));
            }
            if !pz.is_subset_of(&z)? {
                out.push(format!("Z at {pa} not inside Z at {a}"));
            }
        }
        prev = Some((a, h, z));
    }
    Ok(out)
}

/// Set-identity check over `n` replicas of `spec`.
pub fn test_set_algebra(
    spec: &ProcessSpec,
    alphas: &[f64],
    n: usize,
    master_seed: u64,
    tol: f64,
    workers: Option<usize>,
) -> RunResult<TestReport> {
    let start = Instant::now();
    let found: Vec<RunResult<Vec<String>>> = with_pool(workers, || {
        (0..n as u64)
            .into_par_iter()
            .map(|i| {
                let seed = replica_seed(master_seed, i);
                let path = process::simulate(spec, seed)?;
                Ok(set_algebra_violations(&path, alphas, tol)?
                    .into_iter()
                    .map(|v| format!("seed {seed}: {v}"))
                    .collect())
            })
            .collect()
    })?;
    let mut violations = Vec::new();
    for v in found {
        violations.extend(v?);
    }
    let backend = if spec.is_exact() { "exact" } else { "grid" };
    let id = format!("set-algebra[{backend},beta={}]", spec.drift);
    let mut r = TestReport::new(&id, "R in H, R right-closed, cl(R) = H, H minus R right-isolated, nesting", Tolerance::default());
    r.n = n;
    r.master_seed = master_seed;
    r.statistic = violations.len() as f64;
    r.verdict = Verdict::from_bool(violations.is_empty());
    r.notes.extend(violations.iter().take(20).cloned());
    if !spec.is_exact() {
        r.gating = false;
        r.notes.push(format!("grid contact sets with tolerance {tol}; identities hold only approximately"));
    }
    r.runtime = start.elapsed();
    Ok(r)
}
