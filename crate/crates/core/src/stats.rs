//! Small-sample statistics used by the verification harness.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{chi_square_sf, exp, kolmogorov_sf, sqrt, two_sided_p};
use crate::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

pub fn std_error(xs: &[f64]) -> f64 {
    sqrt(variance(xs) / xs.len() as f64)
}

/// `(estimate - target) / se`, with the degenerate `se = 0` case mapped to
/// 0 on exact agreement and to an infinite score otherwise.
pub fn z_score(estimate: f64, target: f64, se: f64) -> f64 {
    let diff = estimate - target;
    if se > 0.0 {
        diff / se
    } else if diff.abs() <= 1e-12 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Empirical Laplace transform `mean(exp(-λ x))` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceEstimate {
    pub lambda: f64,
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

pub fn laplace_estimate(samples: &[f64], lambda: f64) -> Result<LaplaceEstimate> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("no samples".into()));
    }
    let values: Vec<f64> = samples.iter().map(|x| exp(-lambda * x)).collect();
    Ok(LaplaceEstimate { lambda, mean: mean(&values), std_error: std_error(&values), n: samples.len() })
}

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("KS test needs two non-empty samples".into()));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let root = sqrt(ne);
    let p_value = kolmogorov_sf((root + 0.12 + 0.11 / root) * d);
    Ok(KsResult { statistic: d, p_value })
}

/// Pearson chi-square statistic with its degrees of freedom and p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: f64,
    pub p_value: f64,
}

/// Goodness of fit of counts to expected counts; `constraints` parameters
/// were estimated from the data.
pub fn chi_square_gof(observed: &[f64], expected: &[f64], constraints: usize) -> Result<ChiSquare> {
    if observed.len() != expected.len() || observed.is_empty() {
        return Err(Error::InvalidInput("observed/expected length mismatch".into()));
    }
    if expected.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidInput("expected counts must be > 0".into()));
    }
    let statistic = observed.iter().zip(expected).map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = observed.len().saturating_sub(constraints).max(1) as f64;
    Ok(ChiSquare { statistic, dof, p_value: chi_square_sf(statistic, dof) })
}

/// Sample correlation and its Fisher z-score against zero correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    pub z: f64,
    pub p_value: f64,
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    let n = x.len();
    if n != y.len() || n < 4 {
        return Err(Error::InvalidInput("correlation needs paired samples, n >= 4".into()));
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidInput("constant sample".into()));
    }
    let r = (sxy / sqrt(sxx * syy)).clamp(-1.0, 1.0);
    let z = libm::atanh(r.clamp(-1.0 + 1e-15, 1.0 - 1e-15)) * sqrt((n - 3) as f64);
    Ok(Correlation { r, z, p_value: two_sided_p(z) })
}

/// Upper edges of `k` equal-count classes, merged where ties (atoms) make
/// neighbouring quantiles coincide.
pub fn quantile_edges(xs: &[f64], k: usize) -> Vec<f64> {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut edges: Vec<f64> = Vec::with_capacity(k);
    for q in 1..k {
        let idx = (q * n / k).min(n - 1);
        let e = sorted[idx.saturating_sub(1)];
        if edges.last() != Some(&e) {
            edges.push(e);
        }
    }
    if edges.last() == sorted.last() {
        edges.pop();
    }
    edges
}

fn class_of(edges: &[f64], x: f64) -> usize {
    edges.partition_point(|&e| e < x)
}

/// Chi-square test of independence of two paired samples, each cut into at
/// most `k` quantile classes.
pub fn independence_chi_square(x: &[f64], y: &[f64], k: usize) -> Result<ChiSquare> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::InvalidInput("independence test needs paired samples".into()));
    }
    let ex = quantile_edges(x, k);
    let ey = quantile_edges(y, k);
    let (rows, cols) = (ex.len() + 1, ey.len() + 1);
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidInput("degenerate marginal: a single class".into()));
    }
    let mut table = vec![vec![0.0; cols]; rows];
    for (a, b) in x.iter().zip(y) {
        table[class_of(&ex, *a)][class_of(&ey, *b)] += 1.0;
    }
    let n = x.len() as f64;
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<f64> = (0..cols).map(|c| table.iter().map(|r| r[c]).sum()).collect();
    let mut statistic = 0.0;
    for r in 0..rows {
        for c in 0..cols {
            let e = row_sums[r] * col_sums[c] / n;
            if e > 0.0 {
                statistic += (table[r][c] - e) * (table[r][c] - e) / e;
            }
        }
    }
    let live_rows = row_sums.iter().filter(|&&s| s > 0.0).count();
    let live_cols = col_sums.iter().filter(|&&s| s > 0.0).count();
    let dof = ((live_rows - 1) * (live_cols - 1)).max(1) as f64;
    Ok(ChiSquare { statistic, dof, p_value: chi_square_sf(statistic, dof) })
}

/// Per-test floor after a Bonferroni split over `tests` comparisons.
pub fn bonferroni(floor: f64, tests: usize) -> f64 {
    floor / tests.max(1) as f64
}

/// Sample variance over sample mean.
pub fn dispersion_index(counts: &[f64]) -> f64 {
    let m = mean(counts);
    if m == 0.0 {
        return f64::NAN;
    }
    variance(counts) / m
}
