use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use regenset::plot::read_reports;

fn regenset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regenset")).args(args).output().expect("spawn regenset")
}

fn small_run(out: &Path, workers: &str) -> Output {
    regenset(&[
        "run",
        "--suite", "marginals,stationarity,intensity-G",
        "--n", "24",
        "--T", "8",
        "--h", "0.01",
        "--seed", "5",
        "--workers", workers,
        "--out", out.to_str().unwrap(),
    ])
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() == "config.txt" {
                let text = fs::read_to_string(&p).unwrap();
                let kept: String = text
                    .lines()
                    .filter(|l| !l.starts_with("out") && !l.starts_with("workers"))
                    .map(|l| format!("{l}\n"))
                    .collect();
                out.push(("config.txt".into(), kept.into_bytes()));
            } else if p.file_name().unwrap() != "index.txt" {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn oracle_suite_passes_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = regenset(&["run", "--suite", "oracles", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let reports = read_reports(&out).unwrap();
    assert!(reports.iter().any(|r| r.id == "phi-normalization" && r.passed()));
    assert!(out.join("theory.csv").is_file());
    assert!(out.join("index.txt").is_file());
}

#[test]
fn emit_plot_data_rejects_a_directory_without_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = regenset(&["emit-plot-data", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_configuration_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "suite = oracles\nalpha-min = 2\nalpha-max = 1\n").unwrap();
    let o = regenset(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = regenset(&["run", "--suite", "no-such-suite"]);
    assert_eq!(o.status.code(), Some(2));
    let o = regenset(&["run", "--suite", "oracles", "--frobnicate", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let out = dir.path().join("run");
    fs::write(&cfg, format!("[run]\nsuite = oracles\nseed = 3\nbeta = 0.25\nout = {}\n", out.display())).unwrap();
    let o = regenset(&["run", "--config", cfg.to_str().unwrap(), "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(text.lines().any(|l| l.replace(' ', "") == "seed=9"), "{text}");
    assert!(text.lines().any(|l| l.replace(' ', "") == "beta=0.25"), "{text}");
}

#[test]
fn artifacts_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("one"), dir.path().join("two"));
    let oa = small_run(&a, "1");
    let ob = small_run(&b, "2");
    assert_ne!(oa.status.code(), Some(2), "{}", String::from_utf8_lossy(&oa.stderr));
    assert_eq!(oa.status.code(), ob.status.code());
    let (fa, fb) = (artifacts(&a), artifacts(&b));
    assert!(!fa.is_empty());
    assert_eq!(fa.len(), fb.len());
    for ((na, ca), (nb, cb)) in fa.iter().zip(&fb) {
        assert_eq!(na, nb);
        assert!(ca == cb, "{na} differs");
    }
}

#[test]
fn plot_bundle_has_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    small_run(&out, "1");
    let o = regenset(&["run", "--suite", "oracles", "--out", out.join("oracles").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));

    let o = regenset(&["emit-plot-data", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let header = |p: &Path| fs::read_to_string(p).unwrap().lines().next().unwrap_or("").to_string();
    let plot = out.join("plot");
    assert_eq!(header(&plot.join("laplace.csv")), "test,series,lambda,empirical,std_error,theory");
    let g = fs::read_dir(&plot)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.file_name().unwrap().to_str().unwrap().starts_with("intensity-jump-intensity-G"))
        .expect("G intensity file");
    assert_eq!(header(&g), "x_lo,x_hi,t_lo,t_hi,count,expected,z");
    assert!(plot.join("files.txt").is_file());

    let o = regenset(&["emit-plot-data", out.join("oracles").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let curves = out.join("oracles").join("plot").join("oracles-beta0-alpha1.csv");
    assert_eq!(header(&curves), "lambda,phi_ratio_fristedt,phi_ratio_closed");
}
