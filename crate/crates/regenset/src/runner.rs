//! Orchestration of a configured run: simulate once, run the selected
//! suites, write the artifact directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use regenset_core::minorant::default_tolerance;
use regenset_core::stats::bonferroni;
use regenset_core::theory::{gamma_h_intensity, gamma_z_intensity, gamma_z_intensity_from_transform};
use regenset_core::{ProcessKind, ProcessSpec, SweepKind, SweepResult, TheoryCurve};

use crate::config::{ExperimentConfig, Suite};
use crate::error::{RunError, RunResult};
use crate::formats;
use crate::oracles::oracle_suite;
use crate::verify::{self, Bins, GapPlan, ReplicaPlan, ReplicaSet, TestReport, Tolerance, Verdict};

pub const INDEX_FILE: &str = "index.txt";
pub const REPORT_DIR: &str = "reports";
pub const LAPLACE_LAMBDAS: [f64; 3] = [0.5, 1.0, 2.0];
pub const INDEPENDENCE_LAMBDAS: [f64; 2] = [0.5, 2.0];
const ORACLE_TOL: f64 = 1e-9;

/// Reports of one suite.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub reports: Vec<TestReport>,
    pub runtime: Duration,
}

impl SuiteOutcome {
    /// Gating reports all pass (skipped ones do not count against the suite).
    pub fn passed(&self) -> bool {
        self.reports
            .iter()
            .filter(|r| r.gating)
            .all(|r| matches!(r.verdict, Verdict::Pass | Verdict::Skipped))
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub suites: Vec<SuiteOutcome>,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn failing_suites(&self) -> Vec<String> {
        self.suites.iter().filter(|s| !s.passed()).map(|s| s.suite.to_string()).collect()
    }

    /// Plain-text table, one line per report.
    pub fn summary_table(&self) -> String {
        let mut out = format!(
            "{:<14} {:<58} {:>8} {:>12} {:>10} {:<12}\n",
            "suite", "test", "n", "statistic", "p-value", "verdict"
        );
        for s in &self.suites {
            for r in &s.reports {
                let p = r.p_value.map_or("-".to_string(), |p| format!("{p:.4}"));
                let verdict = if r.gating {
                    r.verdict.as_str().to_string()
                } else {
                    format!("{} (info)", r.verdict.as_str())
                };
                out += &format!(
                    "{:<14} {:<58} {:>8} {:>12.4e} {:>10} {:<12}\n",
                    s.suite.name(),
                    r.id,
                    r.n,
                    r.statistic,
                    p,
                    verdict
                );
            }
        }
        out
    }

    /// `Ok` iff every selected suite passed.
    pub fn into_result(self) -> RunResult<Self> {
        let failing = self.failing_suites();
        if failing.is_empty() { Ok(self) } else { Err(RunError::Verification(failing)) }
    }
}

fn needs_replicas(suites: &[Suite]) -> bool {
    suites.iter().any(|s| {
        matches!(
            s,
            Suite::Marginals | Suite::IntensityG | Suite::IntensityY | Suite::LaplaceY | Suite::Stationarity
        )
    })
}

/// Slope grid of the run plus the midpoint used by the independence test.
fn marginal_alphas(cfg: &ExperimentConfig) -> (Vec<f64>, [usize; 3]) {
    let mut alphas = cfg.alphas();
    let mid = 0.5 * (cfg.alpha_min + cfg.alpha_max);
    if !alphas.iter().any(|a| (a - mid).abs() < 1e-12) {
        alphas.push(mid);
        alphas.sort_by(f64::total_cmp);
    }
    let m = alphas.iter().position(|a| (a - mid).abs() < 1e-12).unwrap_or(1);
    let last = alphas.len() - 1;
    (alphas, [0, m, last])
}

fn is_standard_brownian(spec: &ProcessSpec) -> bool {
    spec.kind == ProcessKind::BrownianDrift && spec.sigma == 1.0
}

fn plan_for(cfg: &ExperimentConfig) -> ReplicaPlan {
    let spec = cfg.process_spec();
    let mut plan = ReplicaPlan::new(spec.clone(), cfg.n, cfg.seed);
    let s = &cfg.suites;
    let range = (cfg.alpha_min, cfg.alpha_max);
    plan.g_alphas = marginal_alphas(cfg).0;
    if s.contains(&Suite::IntensityY) || s.contains(&Suite::LaplaceY) {
        plan.y_alphas = cfg.alphas();
    }
    if s.contains(&Suite::IntensityG) {
        plan.g_jumps = Some(range);
    }
    if s.contains(&Suite::IntensityY) {
        plan.y_jumps = Some(range);
    }
    if s.contains(&Suite::Stationarity) {
        plan.gap = Some(GapPlan { alpha: cfg.alpha_min, shift: cfg.shift });
    }
    if s.contains(&Suite::Marginals) && spec.kind == ProcessKind::BrownianDrift {
        plan.refine = Some(4);
    }
    plan
}

fn tolerance(cfg: &ExperimentConfig, p_tests: usize) -> Tolerance {
    Tolerance { z_band: cfg.z_band, p_floor: bonferroni(cfg.p_floor, p_tests), bound: None }
}

fn bins(cfg: &ExperimentConfig) -> Bins {
    Bins { alpha_edges: cfg.alphas(), delta_edges: cfg.delta_edges.clone() }
}

struct Extras {
    curves: Vec<TheoryCurve>,
}

fn run_suite(
    suite: Suite,
    cfg: &ExperimentConfig,
    set: Option<&ReplicaSet>,
    extras: &mut Extras,
) -> RunResult<Vec<TestReport>> {
    let spec = cfg.process_spec();
    let lambdas = &LAPLACE_LAMBDAS;
    let set = || set.ok_or_else(|| RunError::Config("no replicas were simulated".into()));
    let reports = match suite {
        Suite::Oracles => {
            let o = oracle_suite()?;
            extras.curves.extend(o.curves);
            o.reports
        }
        Suite::SetAlgebra => {
            let tol = if spec.is_exact() {
                0.0
            } else {
                default_tolerance(cfg.sigma, spec.step, cfg.tol_scale)
            };
            let mid = 0.5 * (cfg.alpha_min + cfg.alpha_max);
            let alphas = [cfg.alpha_min, mid, cfg.alpha_max];
            vec![verify::test_set_algebra(&spec, &alphas, cfg.n, cfg.seed, tol, cfg.workers)?]
        }
        Suite::Marginals => {
            let set = set()?;
            let (alphas, idx) = marginal_alphas(cfg);
            let tol = tolerance(cfg, 1);
            let mut out = Vec::new();
            for k in 0..alphas.len() {
                out.push(verify::test_g_marginal_two_steps(set, k, lambdas, tol)?);
                extras.curves.push(TheoryCurve::nu_laplace(&spec, alphas[k], None, lambdas, ORACLE_TOL)?);
            }
            out.push(verify::test_increment_independence(set, idx, &INDEPENDENCE_LAMBDAS, tol)?);
            out
        }
        Suite::IntensityG => {
            let set = set()?;
            let b = bins(cfg);
            let oracle = |x, t| gamma_h_intensity(&spec, x, t, ORACLE_TOL).map(|e| e.value);
            vec![verify::test_jump_intensity(set, SweepKind::G, &b, oracle, tolerance(cfg, 1))?]
        }
        Suite::IntensityY => {
            let set = set()?;
            let tol = tolerance(cfg, 1);
            let id = format!("jump-intensity-Y[beta={}]", cfg.beta);
            if !is_standard_brownian(&spec) {
                let why = "the Y intensity is only known for standard Brownian motion with drift";
                vec![TestReport::skipped(&id, "", tol, why)]
            } else {
                let b = bins(cfg);
                let beta = cfg.beta;
                let stated = |s, r| gamma_z_intensity(beta, s, r, ORACLE_TOL).map(|e| e.value);
                let derived =
                    |s, r| gamma_z_intensity_from_transform(beta, s, r, ORACLE_TOL).map(|e| e.value);
                let mut alt = verify::test_jump_intensity(set, SweepKind::Y, &b, derived, tol)?.non_gating();
                alt.id = format!("jump-intensity-Y-from-transform[beta={beta}]");
                alt.notes.push("intensity whose exponential formula reproduces the Y increment transform".into());
                vec![verify::test_jump_intensity(set, SweepKind::Y, &b, stated, tol)?, alt]
            }
        }
        Suite::LaplaceY => {
            let set = set()?;
            let tol = tolerance(cfg, 1);
            if !is_standard_brownian(&spec) {
                let id = format!("y-increment-lt[beta={}]", cfg.beta);
                let why = "the Y increment transform is only known for standard Brownian motion with drift";
                vec![TestReport::skipped(&id, "", tol, why)]
            } else {
                let last = set.plan.y_alphas.len() - 1;
                let (a1, a2) = (set.plan.y_alphas[0], set.plan.y_alphas[last]);
                extras.curves.push(TheoryCurve::y_increment_lt(cfg.beta, a1, a2, lambdas)?);
                vec![verify::test_y_increment_lt(set, 0, last, cfg.beta, lambdas, tol)?]
            }
        }
        Suite::Stationarity => {
            let set = set()?;
            let tol = tolerance(cfg, 2);
            vec![
                verify::test_stationarity(set, SweepKind::G, tol)?,
                verify::test_stationarity(set, SweepKind::Y, tol)?,
            ]
        }
    };
    Ok(reports)
}

/// Single writer for the artifact directory; remembers every file it wrote.
struct ArtifactWriter {
    root: PathBuf,
    files: Vec<PathBuf>,
}

impl ArtifactWriter {
    fn new(root: &Path) -> RunResult<Self> {
        fs::create_dir_all(root.join(REPORT_DIR)).map_err(|e| RunError::io(root, e))?;
        Ok(Self { root: root.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> RunResult<()>) -> RunResult<()> {
        let path = self.root.join(name);
        let file = File::create(&path).map_err(|e| RunError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush().map_err(|e| RunError::io(&path, e))?;
        self.files.push(PathBuf::from(name));
        Ok(())
    }

    fn text(&mut self, name: &str, text: &str) -> RunResult<()> {
        let path = self.root.join(name);
        self.write(name, |w| w.write_all(text.as_bytes()).map_err(|e| RunError::io(&path, e)))
    }
}

fn sweeps(set: &ReplicaSet, kind: SweepKind) -> Vec<SweepResult> {
    let alphas = match kind {
        SweepKind::G => &set.plan.g_alphas,
        SweepKind::Y => &set.plan.y_alphas,
    };
    set.replicas
        .iter()
        .map(|r| SweepResult {
            kind,
            seed: r.seed,
            alphas: alphas.clone(),
            values: match kind {
                SweepKind::G => r.stats.g.clone(),
                SweepKind::Y => r.stats.y.clone(),
            },
            catalog: Vec::new(),
            jump_threshold: set.plan.jump_threshold.unwrap_or(0.0),
            clamped: 0,
        })
        .collect()
}

/// Run every selected suite and write the artifact set under `cfg.out`.
///
/// Returns the outcome whether or not the suites passed; see
/// [`RunOutcome::into_result`].
pub fn run(cfg: &ExperimentConfig) -> RunResult<RunOutcome> {
    cfg.validate()?;
    let start = Instant::now();
    let mut writer = ArtifactWriter::new(&cfg.out)?;
    let spec = cfg.process_spec();

    let set = if needs_replicas(&cfg.suites) {
        log::info!("simulating {} replicas", cfg.n);
        Some(verify::run_replicas(&plan_for(cfg), cfg.workers)?)
    } else {
        None
    };

    let mut extras = Extras { curves: Vec::new() };
    let mut outcomes = Vec::new();
    let mut suites = cfg.suites.clone();
    suites.sort();
    suites.dedup();
    for suite in suites {
        let t = Instant::now();
        log::info!("running suite {suite}");
        let mut reports = run_suite(suite, cfg, set.as_ref(), &mut extras)?;
        for r in &mut reports {
            r.master_seed = cfg.seed;
        }
        outcomes.push(SuiteOutcome { suite, reports, runtime: t.elapsed() });
    }

    writer.text("config.txt", &cfg.to_text())?;
    writer.text("spec.txt", &formats::spec_to_text(&spec))?;
    for o in &outcomes {
        let name = format!("{REPORT_DIR}/{}.jsonl", o.suite.name());
        let mut lines = String::new();
        for r in &o.reports {
            lines += &r.to_json_line()?;
            lines.push('\n');
        }
        writer.text(&name, &lines)?;
    }
    if let Some(set) = &set {
        writer.write("sweeps-G.csv", |w| formats::write_sweep_csv(&sweeps(set, SweepKind::G), w))?;
        if !set.plan.y_alphas.is_empty() {
            writer.write("sweeps-Y.csv", |w| formats::write_sweep_csv(&sweeps(set, SweepKind::Y), w))?;
        }
        if set.plan.g_jumps.is_some() {
            writer.write("catalog-G.csv", |w| formats::write_catalog_csv(&set.catalog(SweepKind::G), w))?;
        }
        if set.plan.y_jumps.is_some() {
            writer.write("catalog-Y.csv", |w| formats::write_catalog_csv(&set.catalog(SweepKind::Y), w))?;
        }
    }
    if !extras.curves.is_empty() {
        writer.write("theory.csv", |w| formats::write_theory_csv(&extras.curves, w))?;
    }

    let outcome = RunOutcome { suites: outcomes, out_dir: cfg.out.clone(), files: writer.files.clone() };
    writer.text(INDEX_FILE, &index_text(&outcome, set.as_ref(), start.elapsed()))?;
    Ok(RunOutcome { files: writer.files, ..outcome })
}

fn index_text(outcome: &RunOutcome, set: Option<&ReplicaSet>, runtime: Duration) -> String {
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let mut out = format!("created_unix = {stamp}\nruntime_s = {:.3}\n", runtime.as_secs_f64());
    if let Some(set) = set {
        out += &format!(
            "replicas = {}\nexcluded_by_window_guard = {}\nsimulation_s = {:.3}\n",
            set.replicas.len(),
            set.excluded.len(),
            set.runtime.as_secs_f64()
        );
    }
    for s in &outcome.suites {
        out += &format!(
            "suite.{} = {} ({:.3} s)\n",
            s.suite.name(),
            if s.passed() { "pass" } else { "fail" },
            s.runtime.as_secs_f64()
        );
    }
    for f in &outcome.files {
        out += &format!("file = {}\n", f.display());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_joins_even_grids() {
        let cfg = ExperimentConfig { alpha_count: 4, ..ExperimentConfig::default() };
        let (alphas, idx) = marginal_alphas(&cfg);
        assert_eq!(alphas.len(), 5);
        assert_eq!(alphas[idx[1]], 1.5);
        let cfg = ExperimentConfig::default();
        let (alphas, idx) = marginal_alphas(&cfg);
        assert_eq!(alphas.len(), 5);
        assert_eq!(idx, [0, 2, 4]);
    }
}
