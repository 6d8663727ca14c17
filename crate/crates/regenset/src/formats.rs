//! Text and CSV formats for specs, paths, sets, profiles, sweeps and oracle
//! curves.

use std::io::{Read, Write};

use regenset_core::sweep::CatalogEntry;
use regenset_core::{ClosedSet, JumpLaw, MinorantProfile, PathGrid, ProcessKind, ProcessSpec, SweepResult, TheoryCurve};
use serde::{Deserialize, Serialize};

use crate::config::{format_jump_law, parse_config_text, parse_jump_law};
use crate::error::{RunError, RunResult};

fn kind_name(kind: ProcessKind) -> &'static str {
    match kind {
        ProcessKind::BrownianDrift => "brownian-drift",
        ProcessKind::CompoundPoissonDrift => "compound-poisson-drift",
        ProcessKind::JumpDiffusion => "jump-diffusion",
    }
}

/// `key = value` block describing a process.
pub fn spec_to_text(spec: &ProcessSpec) -> String {
    let mut out = format!(
        "kind = {}\ndrift = {}\nsigma = {}\nrate = {}\n",
        kind_name(spec.kind),
        spec.drift,
        spec.sigma,
        spec.rate
    );
    if let Some(law) = &spec.jumps {
        out += &format!("jumps = {}\n", format_jump_law(law));
    }
    out += &format!("T = {}\nh = {}\ndegenerate = {}\n", spec.half_width, spec.step, spec.degenerate);
    out
}

pub fn spec_from_text(text: &str) -> RunResult<ProcessSpec> {
    let kv = parse_config_text(text)?;
    let get = |k: &str| kv.get(k).ok_or_else(|| RunError::Config(format!("spec lacks '{k}'")));
    let num = |k: &str| -> RunResult<f64> {
        get(k)?.parse().map_err(|_| RunError::Config(format!("bad number for '{k}'")))
    };
    let kind = match get("kind")?.as_str() {
        "brownian-drift" => ProcessKind::BrownianDrift,
        "compound-poisson-drift" => ProcessKind::CompoundPoissonDrift,
        "jump-diffusion" => ProcessKind::JumpDiffusion,
        other => return Err(RunError::Config(format!("unknown process kind '{other}'"))),
    };
    let jumps: Option<JumpLaw> = kv.get("jumps").map(|s| parse_jump_law(s)).transpose()?;
    let degenerate = kv.get("degenerate").is_some_and(|v| v == "true");
    let spec = ProcessSpec {
        kind,
        drift: num("drift")?,
        sigma: num("sigma")?,
        rate: num("rate")?,
        jumps,
        half_width: num("T")?,
        step: num("h")?,
        degenerate,
    };
    spec.validate().map_err(|e| RunError::Config(e.to_string()))?;
    Ok(spec)
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct PathRow {
    pub time: f64,
    pub left_value: f64,
    pub value: f64,
    pub is_jump: bool,
}

pub fn write_path_csv<W: Write>(path: &PathGrid, out: W) -> RunResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for i in 0..path.len() {
        w.serialize(PathRow {
            time: path.times()[i],
            left_value: path.left_values()[i],
            value: path.values()[i],
            is_jump: path.is_jump()[i],
        })?;
    }
    w.flush().map_err(|e| RunError::io("<path csv>", e))?;
    Ok(())
}

pub fn read_path_csv<R: Read>(input: R) -> RunResult<Vec<PathRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(RunError::from)
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SetRow {
    pub left: f64,
    pub right: f64,
    pub right_closed: bool,
}

pub fn write_set_csv<W: Write>(set: &ClosedSet, out: W) -> RunResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for iv in set.intervals() {
        w.serialize(SetRow { left: iv.lo, right: iv.hi, right_closed: iv.hi_closed })?;
    }
    w.flush().map_err(|e| RunError::io("<set csv>", e))?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct ProfileRow {
    time: f64,
    x: f64,
    l_or_m: f64,
}

/// Columns `time, x, l_or_m`; `x` is `X_t ∧ X_{t-}`.
pub fn write_profile_csv<W: Write>(path: &PathGrid, profile: &MinorantProfile, out: W) -> RunResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let lower = path.lower_values();
    for (i, (&time, &l_or_m)) in profile.times.iter().zip(&profile.values).enumerate() {
        w.serialize(ProfileRow { time, x: lower[i], l_or_m })?;
    }
    w.flush().map_err(|e| RunError::io("<profile csv>", e))?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SweepRow {
    pub seed: u64,
    pub alpha: f64,
    pub value: f64,
}

pub fn write_sweep_csv<W: Write>(results: &[SweepResult], out: W) -> RunResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        for (&alpha, &value) in r.alphas.iter().zip(&r.values) {
            w.serialize(SweepRow { seed: r.seed, alpha, value })?;
        }
    }
    w.flush().map_err(|e| RunError::io("<sweep csv>", e))?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct CatalogRow {
    pub seed: u64,
    pub alpha: f64,
    pub delta: f64,
}

pub fn write_catalog_csv<'a, W: Write>(
    entries: impl IntoIterator<Item = &'a CatalogEntry>,
    out: W,
) -> RunResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for e in entries {
        w.serialize(CatalogRow { seed: e.seed, alpha: e.alpha, delta: e.delta })?;
    }
    w.flush().map_err(|e| RunError::io("<catalog csv>", e))?;
    Ok(())
}

pub fn read_catalog_csv<R: Read>(input: R) -> RunResult<Vec<CatalogRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(RunError::from)
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct TheoryRow {
    pub formula_id: String,
    /// `name=value` pairs joined by `;`.
    pub params: String,
    pub arg: f64,
    pub value: f64,
    pub err_estimate: f64,
}

pub fn write_theory_csv<'a, W: Write>(
    curves: impl IntoIterator<Item = &'a TheoryCurve>,
    out: W,
) -> RunResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in curves {
        let params: Vec<String> = c.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let params = params.join(";");
        for i in 0..c.len() {
            w.serialize(TheoryRow {
                formula_id: c.formula.clone(),
                params: params.clone(),
                arg: c.args[i],
                value: c.values[i],
                err_estimate: c.errors[i],
            })?;
        }
    }
    w.flush().map_err(|e| RunError::io("<theory csv>", e))?;
    Ok(())
}

pub fn read_theory_csv<R: Read>(input: R) -> RunResult<Vec<TheoryRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(RunError::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use regenset_core::simulate;

    #[test]
    fn spec_round_trip() {
        let law = JumpLaw::Normal { mean: -1.0, var: 0.5 };
        let spec = ProcessSpec::jump_diffusion(0.25, 1.5, 2.0, law, 7.0, 0.01);
        assert_eq!(spec_from_text(&spec_to_text(&spec)).unwrap(), spec);
        let drift = ProcessSpec::pure_drift(1.0, 1.0);
        assert_eq!(spec_from_text(&spec_to_text(&drift)).unwrap(), drift);
    }

    #[test]
    fn path_csv_round_trip() {
        let law = JumpLaw::TwoPoint { up: 1.0, down: -1.0, p_up: 0.5 };
        let path = simulate(&ProcessSpec::compound_poisson(0.0, 2.0, law, 3.0), 4).unwrap();
        let mut buf = Vec::new();
        write_path_csv(&path, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("time,left_value,value,is_jump\n"));
        let rows = read_path_csv(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), path.len());
        assert_eq!(rows.iter().filter(|r| r.is_jump).count(), path.jump_count());
        assert!(rows.iter().zip(path.values()).all(|(r, v)| r.value == *v));
    }
}
