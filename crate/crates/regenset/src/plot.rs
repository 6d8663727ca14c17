//! Plot-ready CSV bundles derived from a finished run directory.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{RunError, RunResult};
use crate::formats::{read_theory_csv, TheoryRow};
use crate::runner::{INDEX_FILE, REPORT_DIR};
use crate::verify::TestReport;

pub const PLOT_DIR: &str = "plot";

#[derive(Serialize)]
struct YBinRow {
    s_lo: f64,
    s_hi: f64,
    r_lo: f64,
    r_hi: f64,
    count: f64,
    expected: f64,
    z: f64,
}

#[derive(Serialize)]
struct GBinRow {
    x_lo: f64,
    x_hi: f64,
    t_lo: f64,
    t_hi: f64,
    count: f64,
    expected: f64,
    z: f64,
}

#[derive(Serialize)]
struct LaplaceRow<'a> {
    test: &'a str,
    series: &'a str,
    lambda: f64,
    empirical: f64,
    std_error: f64,
    theory: f64,
}

#[derive(Serialize)]
struct OracleRow {
    lambda: f64,
    phi_ratio_fristedt: f64,
    phi_ratio_closed: f64,
}

/// Every report in the run's JSON-lines files.
pub fn read_reports(dir: &Path) -> RunResult<Vec<TestReport>> {
    let reports_dir = dir.join(REPORT_DIR);
    let mut names: Vec<PathBuf> = fs::read_dir(&reports_dir)
        .map_err(|e| RunError::io(&reports_dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    names.sort();
    let mut out = Vec::new();
    for path in names {
        let file = File::open(&path).map_err(|e| RunError::io(&path, e))?;
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| RunError::io(&path, e))?;
            if !line.trim().is_empty() {
                out.push(serde_json::from_str(&line)?);
            }
        }
    }
    Ok(out)
}

fn slug(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect::<String>()
        .trim_matches('_')
        .to_string()
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> RunResult<()> {
    let file = File::create(path).map_err(|e| RunError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| RunError::io(path, e))?;
    Ok(())
}

fn param(row: &TheoryRow, key: &str) -> Option<String> {
    row.params
        .split(';')
        .filter_map(|kv| kv.split_once('='))
        .find(|(k, _)| *k == key)
        .map(|(_, v)| v.to_string())
}

/// Write the CSV bundle for the run in `dir` into `dir/plot`, returning the
/// files written. A directory without a run index is rejected.
pub fn emit_plot_data(dir: &Path) -> RunResult<Vec<PathBuf>> {
    if !dir.join(INDEX_FILE).is_file() || !dir.join(REPORT_DIR).is_dir() {
        return Err(RunError::MissingArtifacts(dir.to_path_buf()));
    }
    let reports = read_reports(dir)?;
    let out_dir = dir.join(PLOT_DIR);
    fs::create_dir_all(&out_dir).map_err(|e| RunError::io(&out_dir, e))?;
    let mut written = Vec::new();

    for r in &reports {
        let bins = r.rows.iter().filter_map(|row| row.bin.map(|b| (b, row)));
        if r.id.starts_with("jump-intensity-Y") {
            let path = out_dir.join(format!("intensity-{}.csv", slug(&r.id)));
            write_rows(
                &path,
                bins.map(|(b, row)| YBinRow {
                    s_lo: b[0],
                    s_hi: b[1],
                    r_lo: b[2],
                    r_hi: b[3],
                    count: row.estimate,
                    expected: row.oracle,
                    z: row.z,
                }),
            )?;
            written.push(path);
        } else if r.id.starts_with("jump-intensity-G") {
            let path = out_dir.join(format!("intensity-{}.csv", slug(&r.id)));
            write_rows(
                &path,
                bins.map(|(b, row)| GBinRow {
                    x_lo: b[0],
                    x_hi: b[1],
                    t_lo: b[2],
                    t_hi: b[3],
                    count: row.estimate,
                    expected: row.oracle,
                    z: row.z,
                }),
            )?;
            written.push(path);
        }
    }

    let laplace: Vec<LaplaceRow> = reports
        .iter()
        .filter(|r| r.rows.iter().any(|row| row.lambda.is_some() && row.std_error > 0.0 && row.z.is_finite()))
        .flat_map(|r| {
            r.rows.iter().filter_map(move |row| {
                row.lambda.map(|lambda| LaplaceRow {
                    test: &r.id,
                    series: &row.label,
                    lambda,
                    empirical: row.estimate,
                    std_error: row.std_error,
                    theory: row.oracle,
                })
            })
        })
        .collect();
    if !laplace.is_empty() {
        let path = out_dir.join("laplace.csv");
        write_rows(&path, laplace)?;
        written.push(path);
    }

    let theory_path = dir.join("theory.csv");
    if theory_path.is_file() {
        let file = File::open(&theory_path).map_err(|e| RunError::io(&theory_path, e))?;
        let rows = read_theory_csv(file)?;
        let fristedt: Vec<&TheoryRow> = rows.iter().filter(|r| r.formula_id == "phi_fristedt").collect();
        let closed: Vec<&TheoryRow> = rows.iter().filter(|r| r.formula_id == "phi_brownian_ratio").collect();
        let mut keys: Vec<(String, String)> = fristedt
            .iter()
            .filter_map(|r| Some((param(r, "beta")?, param(r, "alpha")?)))
            .collect();
        keys.dedup();
        for (beta, alpha) in keys {
            let pick = |set: &[&TheoryRow]| -> Vec<(f64, f64)> {
                set.iter()
                    .filter(|r| param(r, "beta").as_deref() == Some(&beta) && param(r, "alpha").as_deref() == Some(&alpha))
                    .map(|r| (r.arg, r.value))
                    .collect()
            };
            let f = pick(&fristedt);
            let c = pick(&closed);
            let rows = f.iter().filter_map(|&(lambda, v)| {
                c.iter().find(|(l, _)| *l == lambda).map(|&(_, w)| OracleRow {
                    lambda,
                    phi_ratio_fristedt: v,
                    phi_ratio_closed: w,
                })
            });
            let path = out_dir.join(format!("oracles-beta{beta}-alpha{alpha}.csv"));
            write_rows(&path, rows)?;
            written.push(path);
        }
    }

    let listing: String = written.iter().map(|p| format!("{}\n", p.display())).collect();
    let mut f = File::create(out_dir.join("files.txt")).map_err(|e| RunError::io(&out_dir, e))?;
    f.write_all(listing.as_bytes()).map_err(|e| RunError::io(&out_dir, e))?;
    Ok(written)
}
