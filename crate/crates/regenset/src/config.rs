//! Experiment configuration: flat `key = value` text with optional
//! `[section]` headers. Keys are the long CLI flag names without dashes, so
//! every key can be overridden on the command line.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use regenset_core::{JumpLaw, ProcessSpec};

use crate::error::{RunError, RunResult};

/// A verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    SetAlgebra,
    Marginals,
    IntensityG,
    IntensityY,
    LaplaceY,
    Stationarity,
    Oracles,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::SetAlgebra,
        Suite::Marginals,
        Suite::IntensityG,
        Suite::IntensityY,
        Suite::LaplaceY,
        Suite::Stationarity,
        Suite::Oracles,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::SetAlgebra => "set-algebra",
            Suite::Marginals => "marginals",
            Suite::IntensityG => "intensity-G",
            Suite::IntensityY => "intensity-Y",
            Suite::LaplaceY => "laplace-Y",
            Suite::Stationarity => "stationarity",
            Suite::Oracles => "oracles",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = RunError;

    fn from_str(s: &str) -> RunResult<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| RunError::Config(format!("unknown suite '{s}'")))
    }
}

/// Process family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessChoice {
    Bm,
    Cpp,
    Jd,
}

impl FromStr for ProcessChoice {
    type Err = RunError;

    fn from_str(s: &str) -> RunResult<Self> {
        match s.trim() {
            "bm" => Ok(ProcessChoice::Bm),
            "cpp" => Ok(ProcessChoice::Cpp),
            "jd" => Ok(ProcessChoice::Jd),
            other => Err(RunError::Config(format!("unknown process '{other}' (bm|cpp|jd)"))),
        }
    }
}

impl ProcessChoice {
    pub fn name(self) -> &'static str {
        match self {
            ProcessChoice::Bm => "bm",
            ProcessChoice::Cpp => "cpp",
            ProcessChoice::Jd => "jd",
        }
    }
}

/// Parse `two-point:up,down,p`, `exponential:mean` or `normal:mean,var`.
pub fn parse_jump_law(s: &str) -> RunResult<JumpLaw> {
    let bad = || RunError::Config(format!("bad jump law '{s}'"));
    let (name, args) = s.trim().split_once(':').ok_or_else(bad)?;
    let nums: Vec<f64> = args
        .split(',')
        .map(|a| a.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    let law = match (name.trim(), nums.as_slice()) {
        ("two-point", &[up, down, p_up]) => JumpLaw::TwoPoint { up, down, p_up },
        ("exponential", &[mean]) => JumpLaw::Exponential { mean },
        ("normal", &[mean, var]) => JumpLaw::Normal { mean, var },
        _ => return Err(bad()),
    };
    law.validate().map_err(|e| RunError::Config(e.to_string()))?;
    Ok(law)
}

pub fn format_jump_law(law: &JumpLaw) -> String {
    match *law {
        JumpLaw::TwoPoint { up, down, p_up } => format!("two-point:{up},{down},{p_up}"),
        JumpLaw::Exponential { mean } => format!("exponential:{mean}"),
        JumpLaw::Normal { mean, var } => format!("normal:{mean},{var}"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub suites: Vec<Suite>,
    pub process: ProcessChoice,
    pub beta: f64,
    pub sigma: f64,
    pub rate: f64,
    pub jumps: Option<JumpLaw>,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_count: usize,
    pub half_width: f64,
    pub step: f64,
    pub n: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// Multiplier `κ` of the grid contact tolerance `κσ√(h log(1/h))`.
    pub tol_scale: f64,
    pub workers: Option<usize>,
    pub z_band: f64,
    pub p_floor: f64,
    /// Shift `u` of the stationarity suite.
    pub shift: f64,
    /// Edges of the jump-size bins of the intensity suites.
    pub delta_edges: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            suites: vec![Suite::Oracles],
            process: ProcessChoice::Bm,
            beta: 0.0,
            sigma: 1.0,
            rate: 1.0,
            jumps: None,
            alpha_min: 1.0,
            alpha_max: 2.0,
            alpha_count: 5,
            half_width: 50.0,
            step: 1e-3,
            n: 10_000,
            seed: 1,
            out: PathBuf::from("regenset-out"),
            tol_scale: 3.0,
            workers: None,
            z_band: 3.0,
            p_floor: 0.01,
            shift: 1.0,
            delta_edges: vec![0.1, 0.2, 0.4, 1.0],
        }
    }
}

/// Raw `key -> value` pairs in file order of precedence (later wins).
pub type Overrides = BTreeMap<String, String>;

/// Parse configuration text into key/value pairs.
pub fn parse_config_text(text: &str) -> RunResult<Overrides> {
    let mut out = Overrides::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| RunError::Config(format!("line {}: expected key = value", no + 1)))?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

fn parse<T: FromStr>(key: &str, value: &str) -> RunResult<T> {
    value
        .trim()
        .parse()
        .map_err(|_| RunError::Config(format!("bad value '{value}' for key '{key}'")))
}

impl ExperimentConfig {
    /// Apply `key = value` overrides on top of `self`.
    pub fn apply(&mut self, overrides: &Overrides) -> RunResult<()> {
        for (key, value) in overrides {
            match key.as_str() {
                "suite" => {
                    self.suites = value
                        .split(',')
                        .filter(|s| !s.trim().is_empty())
                        .map(Suite::from_str)
                        .collect::<RunResult<_>>()?;
                }
                "process" => self.process = value.parse()?,
                "beta" => self.beta = parse(key, value)?,
                "sigma" => self.sigma = parse(key, value)?,
                "rate" => self.rate = parse(key, value)?,
                "jumps" => self.jumps = Some(parse_jump_law(value)?),
                "alpha-min" => self.alpha_min = parse(key, value)?,
                "alpha-max" => self.alpha_max = parse(key, value)?,
                "alpha-count" => self.alpha_count = parse(key, value)?,
                "T" => self.half_width = parse(key, value)?,
                "h" => self.step = parse(key, value)?,
                "n" => self.n = parse(key, value)?,
                "seed" => self.seed = parse(key, value)?,
                "out" => self.out = PathBuf::from(value),
                "tol-scale" => self.tol_scale = parse(key, value)?,
                "workers" => self.workers = Some(parse(key, value)?),
                "z-band" => self.z_band = parse(key, value)?,
                "p-floor" => self.p_floor = parse(key, value)?,
                "shift" => self.shift = parse(key, value)?,
                "delta-edges" => {
                    self.delta_edges = value
                        .split(',')
                        .map(|v| parse::<f64>(key, v))
                        .collect::<RunResult<_>>()?;
                }
                other => return Err(RunError::Config(format!("unknown key '{other}'"))),
            }
        }
        self.validate()
    }

    pub fn validate(&self) -> RunResult<()> {
        let fail = |msg: &str| Err(RunError::Config(msg.to_string()));
        if self.suites.is_empty() {
            return fail("no suite selected");
        }
        if !(self.alpha_min < self.alpha_max) || self.alpha_count < 2 {
            return fail("need alpha-min < alpha-max and alpha-count >= 2");
        }
        if self.n == 0 {
            return fail("n must be positive");
        }
        if self.seed == 0 {
            return fail("seed must be positive");
        }
        if !(self.z_band > 0.0 && self.p_floor > 0.0 && self.p_floor < 1.0) {
            return fail("need z-band > 0 and 0 < p-floor < 1");
        }
        if self.delta_edges.len() < 2 || self.delta_edges.windows(2).any(|w| !(w[0] < w[1])) {
            return fail("delta-edges must be increasing with at least two entries");
        }
        if self.workers == Some(0) {
            return fail("workers must be >= 1");
        }
        self.process_spec().validate().map_err(|e| RunError::Config(e.to_string()))
    }

    /// The linear slope grid `alpha-min ..= alpha-max`.
    pub fn alphas(&self) -> Vec<f64> {
        let k = self.alpha_count - 1;
        (0..=k)
            .map(|i| self.alpha_min + (self.alpha_max - self.alpha_min) * i as f64 / k as f64)
            .collect()
    }

    pub fn process_spec(&self) -> ProcessSpec {
        let t = self.half_width;
        match self.process {
            ProcessChoice::Bm => ProcessSpec::brownian(self.beta, self.sigma, t, self.step),
            ProcessChoice::Cpp => ProcessSpec::compound_poisson(
                self.beta,
                self.rate,
                self.jumps.unwrap_or(JumpLaw::TwoPoint { up: 1.0, down: -1.0, p_up: 0.5 }),
                t,
            ),
            ProcessChoice::Jd => ProcessSpec::jump_diffusion(
                self.beta,
                self.sigma,
                self.rate,
                self.jumps.unwrap_or(JumpLaw::Normal { mean: 0.0, var: 1.0 }),
                t,
                self.step,
            ),
        }
    }

    /// Canonical `key = value` rendering, readable by [`parse_config_text`].
    pub fn to_text(&self) -> String {
        let suites: Vec<&str> = self.suites.iter().map(|s| s.name()).collect();
        let edges: Vec<String> = self.delta_edges.iter().map(f64::to_string).collect();
        let mut out = String::new();
        out += "[run]\n";
        out += &format!("suite = {}\nn = {}\nseed = {}\n", suites.join(","), self.n, self.seed);
        out += &format!("out = {}\n", self.out.display());
        if let Some(w) = self.workers {
            out += &format!("workers = {w}\n");
        }
        out += "\n[process]\n";
        out += &format!("process = {}\nbeta = {}\nsigma = {}\nrate = {}\n", self.process.name(), self.beta, self.sigma, self.rate);
        if let Some(law) = &self.jumps {
            out += &format!("jumps = {}\n", format_jump_law(law));
        }
        out += &format!("T = {}\nh = {}\n", self.half_width, self.step);
        out += "\n[alpha]\n";
        out += &format!(
            "alpha-min = {}\nalpha-max = {}\nalpha-count = {}\n",
            self.alpha_min, self.alpha_max, self.alpha_count
        );
        out += "\n[tolerances]\n";
        out += &format!(
            "tol-scale = {}\nz-band = {}\np-floor = {}\nshift = {}\ndelta-edges = {}\n",
            self.tol_scale,
            self.z_band,
            self.p_floor,
            self.shift,
            edges.join(",")
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_comments() {
        let text = "[run]\nsuite = oracles, marginals # two suites\n\n[process]\nbeta = 0.5\n";
        let mut cfg = ExperimentConfig::default();
        cfg.apply(&parse_config_text(text).unwrap()).unwrap();
        assert_eq!(cfg.suites, [Suite::Oracles, Suite::Marginals]);
        assert_eq!(cfg.beta, 0.5);
    }

    #[test]
    fn round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.process = ProcessChoice::Cpp;
        cfg.jumps = Some(JumpLaw::Exponential { mean: -0.5 });
        cfg.suites = vec![Suite::SetAlgebra, Suite::Stationarity];
        cfg.workers = Some(3);
        let mut back = ExperimentConfig::default();
        back.apply(&parse_config_text(&cfg.to_text()).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn errors() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.apply(&parse_config_text("bogus = 1").unwrap()).is_err());
        assert!(parse_config_text("no equals sign").is_err());
        assert!(cfg.apply(&parse_config_text("suite = nope").unwrap()).is_err());
        assert!(parse_jump_law("normal:0").is_err());
        assert_eq!(
            parse_jump_law("two-point:1,-1,0.5").unwrap(),
            JumpLaw::TwoPoint { up: 1.0, down: -1.0, p_up: 0.5 }
        );
    }

    #[test]
    fn alpha_grid() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.alphas(), [1.0, 1.25, 1.5, 1.75, 2.0]);
    }
}
