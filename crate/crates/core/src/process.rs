//! Two-sided Lévy sample paths on a symmetric window `[-T, T]`.
//!
//! Three families are supported: Brownian motion with drift, compound Poisson
//! with drift, and their sum (jump diffusion). Compound Poisson paths are
//! stored exactly (finitely many jumps plus a linear drift); anything with a
//! Brownian part is sampled on a time grid, with jump times inserted into the
//! grid so that both one-sided limits are recorded.
//!
//! The negative half-line is an independent copy run backwards: with `X'` the
//! copy, `X_{-t} = -X'_{t-}`, so increments stay stationary and independent
//! across the origin and `X_0 = 0` exactly.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::math::{floor, sqrt};
use crate::{Error, Result};

/// Process family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessKind {
    BrownianDrift,
    CompoundPoissonDrift,
    JumpDiffusion,
}

/// Catalog of jump-size laws with exactly computable moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpLaw {
    /// `up` with probability `p_up`, `down` otherwise.
    TwoPoint { up: f64, down: f64, p_up: f64 },
    /// Exponential magnitude `|mean|`, carrying the sign of `mean`.
    Exponential { mean: f64 },
    /// Gaussian with the given mean and variance.
    Normal { mean: f64, var: f64 },
}

impl JumpLaw {
    pub fn mean(&self) -> f64 {
        match *self {
            JumpLaw::TwoPoint { up, down, p_up } => p_up * up + (1.0 - p_up) * down,
            JumpLaw::Exponential { mean } => mean,
            JumpLaw::Normal { mean, .. } => mean,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            JumpLaw::TwoPoint { up, down, p_up } => {
                up.is_finite() && down.is_finite() && (0.0..=1.0).contains(&p_up)
            }
            JumpLaw::Exponential { mean } => mean.is_finite() && mean != 0.0,
            JumpLaw::Normal { mean, var } => mean.is_finite() && var.is_finite() && var >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(alloc::format!("bad jump law parameters: {self:?}")))
        }
    }

    pub fn sample<R: RngCore>(&self, rng: &mut R) -> f64 {
        match *self {
            JumpLaw::TwoPoint { up, down, p_up } => {
                if unit_uniform(rng) < p_up {
                    up
                } else {
                    down
                }
            }
            JumpLaw::Exponential { mean } => {
                let e: f64 = Exp1.sample(rng);
                e * mean
            }
            JumpLaw::Normal { mean, var } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sqrt(var) * z
            }
        }
    }
}

fn unit_uniform<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Parameters of a two-sided Lévy process and of its simulation window.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec {
    pub kind: ProcessKind,
    /// Linear drift (value per unit time).
    pub drift: f64,
    /// Diffusion coefficient (value per square-root time).
    pub sigma: f64,
    /// Jump rate (events per unit time).
    pub rate: f64,
    pub jumps: Option<JumpLaw>,
    /// Window half-width `T`.
    pub half_width: f64,
    /// Grid step `h`, used only when there is a Brownian component.
    pub step: f64,
    /// Allows the pure-drift case `sigma = rate = 0`.
    pub degenerate: bool,
}

impl ProcessSpec {
    pub fn brownian(drift: f64, sigma: f64, half_width: f64, step: f64) -> Self {
        Self {
            kind: ProcessKind::BrownianDrift,
            drift,
            sigma,
            rate: 0.0,
            jumps: None,
            half_width,
            step,
            degenerate: false,
        }
    }

    pub fn compound_poisson(drift: f64, rate: f64, jumps: JumpLaw, half_width: f64) -> Self {
        Self {
            kind: ProcessKind::CompoundPoissonDrift,
            drift,
            sigma: 0.0,
            rate,
            jumps: Some(jumps),
            half_width,
            step: 0.0,
            degenerate: false,
        }
    }

    pub fn jump_diffusion(
        drift: f64,
        sigma: f64,
        rate: f64,
        jumps: JumpLaw,
        half_width: f64,
        step: f64,
    ) -> Self {
        Self {
            kind: ProcessKind::JumpDiffusion,
            drift,
            sigma,
            rate,
            jumps: Some(jumps),
            half_width,
            step,
            degenerate: false,
        }
    }

    /// The degenerate path `X_t = drift * t`.
    pub fn pure_drift(drift: f64, half_width: f64) -> Self {
        Self {
            kind: ProcessKind::CompoundPoissonDrift,
            drift,
            sigma: 0.0,
            rate: 0.0,
            jumps: None,
            half_width,
            step: 0.0,
            degenerate: true,
        }
    }

    /// Whether simulated paths are exact piecewise-linear objects.
    pub fn is_exact(&self) -> bool {
        self.kind == ProcessKind::CompoundPoissonDrift
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(msg.into()));
        if !(self.half_width.is_finite() && self.half_width > 0.0) {
            return bad("window half-width T must be finite and > 0");
        }
        if !self.drift.is_finite() {
            return bad("drift must be finite");
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return bad("sigma must be finite and >= 0");
        }
        if !(self.rate.is_finite() && self.rate >= 0.0) {
            return bad("jump rate must be finite and >= 0");
        }
        if let Some(law) = &self.jumps {
            law.validate()?;
        }
        if self.rate > 0.0 && self.jumps.is_none() {
            return bad("positive jump rate requires a jump law");
        }
        match self.kind {
            ProcessKind::BrownianDrift => {
                if self.rate > 0.0 {
                    return bad("Brownian family has no jumps; use the jump-diffusion family");
                }
                if self.sigma == 0.0 && !self.degenerate {
                    return bad("sigma = 0 and rate = 0 requires the degenerate flag");
                }
            }
            ProcessKind::CompoundPoissonDrift => {
                if self.sigma != 0.0 {
                    return bad("compound Poisson family has sigma = 0");
                }
                if self.rate == 0.0 && !self.degenerate {
                    return bad("sigma = 0 and rate = 0 requires the degenerate flag");
                }
            }
            ProcessKind::JumpDiffusion => {
                if self.sigma <= 0.0 || self.rate <= 0.0 {
                    return bad("jump diffusion needs sigma > 0 and rate > 0");
                }
            }
        }
        if self.kind != ProcessKind::CompoundPoissonDrift {
            if !(self.step.is_finite() && self.step > 0.0) {
                return bad("grid step h must be finite and > 0");
            }
            if self.step > self.half_width {
                return bad("grid step h exceeds the window half-width");
            }
        }
        Ok(())
    }

    /// `E[X_1] = drift + rate * E[jump]`.
    pub fn mean_slope(&self) -> Result<f64> {
        mean_slope(self)
    }
}

/// Exact expectation of `X_1`.
pub fn mean_slope(spec: &ProcessSpec) -> Result<f64> {
    let jump_mean = match (&spec.jumps, spec.rate > 0.0) {
        (Some(law), true) => {
            law.validate()?;
            law.mean()
        }
        (None, true) => {
            return Err(Error::Unsupported("jump rate without a jump law".into()));
        }
        _ => 0.0,
    };
    Ok(spec.drift + spec.rate * jump_mean)
}

/// How a path interpolates between its stored times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampling {
    /// Linear between consecutive stored times with the given slope; exact.
    Exact { slope: f64 },
    /// Samples of a path with a Brownian component; `step` is the grid step.
    Grid { step: f64 },
}

/// A two-sided càdlàg path with explicit one-sided limits.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGrid {
    times: Vec<f64>,
    values: Vec<f64>,
    left_values: Vec<f64>,
    is_jump: Vec<bool>,
    sampling: Sampling,
    seed: u64,
    spec: Option<ProcessSpec>,
}

impl PathGrid {
    /// Assemble a path from its parts. `left_values[i] != values[i]` marks a
    /// jump; times must be strictly increasing and contain `0` with `X_0 = 0`.
    pub fn from_parts(
        times: Vec<f64>,
        values: Vec<f64>,
        left_values: Vec<f64>,
        sampling: Sampling,
    ) -> Result<Self> {
        let n = times.len();
        if n == 0 {
            return Err(Error::EmptyPath);
        }
        if values.len() != n || left_values.len() != n {
            return Err(Error::InvalidInput("times/values/left_values lengths differ".into()));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput("times must be strictly increasing".into()));
        }
        if times.iter().chain(&values).chain(&left_values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite path entry".into()));
        }
        match times.iter().position(|&t| t == 0.0) {
            Some(i) if values[i] == 0.0 && left_values[i] == 0.0 => {}
            _ => return Err(Error::InvalidInput("path must contain t = 0 with X_0 = 0".into())),
        }
        if let Sampling::Exact { slope } = sampling {
            for i in 0..n - 1 {
                let predicted = values[i] + slope * (times[i + 1] - times[i]);
                let scale = 1.0 + predicted.abs() + values[i].abs();
                if (predicted - left_values[i + 1]).abs() > 1e-9 * scale {
                    return Err(Error::InvalidInput(
                        "exact path is not linear with the given slope between events".into(),
                    ));
                }
            }
        }
        let is_jump = values.iter().zip(&left_values).map(|(v, l)| v != l).collect();
        Ok(Self { times, values, left_values, is_jump, sampling, seed: 0, spec: None })
    }

    /// A grid path sampling a continuous function.
    pub fn from_samples(times: Vec<f64>, values: Vec<f64>, step: f64) -> Result<Self> {
        let left = values.clone();
        Self::from_parts(times, values, left, Sampling::Grid { step })
    }

    pub fn with_spec(mut self, spec: ProcessSpec, seed: u64) -> Self {
        self.spec = Some(spec);
        self.seed = seed;
        self
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
    /// Right limits `X_t`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    /// Left limits `X_{t-}`.
    pub fn left_values(&self) -> &[f64] {
        &self.left_values
    }
    pub fn is_jump(&self) -> &[bool] {
        &self.is_jump
    }
    pub fn sampling(&self) -> Sampling {
        self.sampling
    }
    pub fn is_exact(&self) -> bool {
        matches!(self.sampling, Sampling::Exact { .. })
    }
    /// Grid step, or `None` for exact paths.
    pub fn step(&self) -> Option<f64> {
        match self.sampling {
            Sampling::Grid { step } => Some(step),
            Sampling::Exact { .. } => None,
        }
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn spec(&self) -> Option<&ProcessSpec> {
        self.spec.as_ref()
    }
    pub fn len(&self) -> usize {
        self.times.len()
    }
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
    pub fn window(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }
    pub fn jump_count(&self) -> usize {
        self.is_jump.iter().filter(|&&j| j).count()
    }

    /// `X_t ∧ X_{t-}` at every stored time.
    pub fn lower_values(&self) -> Vec<f64> {
        self.values.iter().zip(&self.left_values).map(|(v, l)| v.min(*l)).collect()
    }

    /// Right-continuous value at an arbitrary time in the window. Exact paths
    /// interpolate linearly; grid paths use the last sample at or before `t`.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let (lo, hi) = self.window();
        if !(t >= lo && t <= hi) {
            return None;
        }
        let i = self.times.partition_point(|&s| s <= t) - 1;
        Some(match self.sampling {
            Sampling::Exact { slope } => self.values[i] + slope * (t - self.times[i]),
            Sampling::Grid { .. } => self.values[i],
        })
    }

    /// The sub-path on `[lo, hi]` (which must contain 0). Exact paths gain
    /// interpolated endpoints; grid paths keep the samples inside.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= 0.0 && hi >= 0.0) {
            return Err(Error::InvalidInput("restriction window must contain 0".into()));
        }
        let first = self.times.partition_point(|&t| t < lo);
        let last = self.times.partition_point(|&t| t <= hi);
        let mut times = self.times[first..last].to_vec();
        let mut values = self.values[first..last].to_vec();
        let mut left = self.left_values[first..last].to_vec();
        if let Sampling::Exact { slope } = self.sampling {
            let (wlo, whi) = self.window();
            if lo > wlo && times.first() != Some(&lo) {
                let v = self.value_at(lo).expect("inside window");
                times.insert(0, lo);
                values.insert(0, v);
                left.insert(0, v);
            }
            if hi < whi && times.last() != Some(&hi) {
                let prev = times.len() - 1;
                let v = values[prev] + slope * (hi - times[prev]);
                times.push(hi);
                values.push(v);
                left.push(v);
            }
        }
        // The window start carries no left limit.
        left[0] = values[0];
        let mut out = Self::from_parts(times, values, left, self.sampling)?;
        out.seed = self.seed;
        out.spec = self.spec.clone();
        Ok(out)
    }
}

/// Simulate the two-sided path of `spec` with the given seed.
pub fn simulate(spec: &ProcessSpec, seed: u64) -> Result<PathGrid> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let path = if spec.is_exact() {
        simulate_exact(spec, &mut rng)
    } else {
        simulate_grid(spec, &mut rng)
    }?;
    Ok(path.with_spec(spec.clone(), seed))
}

fn jump_times<R: RngCore>(rate: f64, horizon: f64, law: &JumpLaw, rng: &mut R) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if rate <= 0.0 {
        return out;
    }
    let mut t = 0.0;
    loop {
        let e: f64 = Exp1.sample(rng);
        t += e / rate;
        if t >= horizon {
            break;
        }
        out.push((t, law.sample(rng)));
    }
    out
}

fn simulate_exact<R: RngCore>(spec: &ProcessSpec, rng: &mut R) -> Result<PathGrid> {
    let big_t = spec.half_width;
    let beta = spec.drift;
    let law = spec.jumps.unwrap_or(JumpLaw::Normal { mean: 0.0, var: 0.0 });
    let pos = jump_times(spec.rate, big_t, &law, rng);
    let neg = jump_times(spec.rate, big_t, &law, rng);

    let cap = pos.len() + neg.len() + 3;
    let mut times = Vec::with_capacity(cap);
    let mut values = Vec::with_capacity(cap);
    let mut left = Vec::with_capacity(cap);

    // Negative half, built outwards from 0 then reversed.
    let mut cur_left = 0.0;
    let mut prev = 0.0;
    for &(s, jump) in &neg {
        let r = -s;
        let v = cur_left - beta * (prev - r);
        times.push(r);
        values.push(v);
        left.push(v - jump);
        cur_left = v - jump;
        prev = r;
    }
    let v_start = cur_left - beta * (prev + big_t);
    times.push(-big_t);
    values.push(v_start);
    left.push(v_start);
    times.reverse();
    values.reverse();
    left.reverse();

    times.push(0.0);
    values.push(0.0);
    left.push(0.0);

    let mut cur = 0.0;
    let mut prev = 0.0;
    for &(t, jump) in &pos {
        let l = cur + beta * (t - prev);
        times.push(t);
        left.push(l);
        values.push(l + jump);
        cur = l + jump;
        prev = t;
    }
    let v_end = cur + beta * (big_t - prev);
    times.push(big_t);
    values.push(v_end);
    left.push(v_end);

    PathGrid::from_parts(times, values, left, Sampling::Exact { slope: beta })
}

fn simulate_grid<R: RngCore>(spec: &ProcessSpec, rng: &mut R) -> Result<PathGrid> {
    let h = spec.step;
    let n = floor(spec.half_width / h + 1e-9) as usize;
    if n == 0 {
        return Err(Error::InvalidSpec("grid step larger than the window".into()));
    }
    let horizon = n as f64 * h;
    let law = spec.jumps.unwrap_or(JumpLaw::Normal { mean: 0.0, var: 0.0 });

    let pos = half_line(spec, &law, n, horizon, rng);
    let neg = half_line(spec, &law, n, horizon, rng);

    let total = pos.times.len() + neg.times.len() + 1;
    let mut times = Vec::with_capacity(total);
    let mut values = Vec::with_capacity(total);
    let mut left = Vec::with_capacity(total);

    // Negative side: X_{-s} = -(X'_{s-}); the left limit at -s is -(X'_s).
    for i in (0..neg.times.len()).rev() {
        times.push(-neg.times[i]);
        values.push(-neg.left[i]);
        left.push(-neg.values[i]);
    }
    times.push(0.0);
    values.push(0.0);
    left.push(0.0);
    times.extend_from_slice(&pos.times);
    values.extend_from_slice(&pos.values);
    left.extend_from_slice(&pos.left);
    // The window start has no observed left limit.
    left[0] = values[0];

    PathGrid::from_parts(times, values, left, Sampling::Grid { step: h })
}

struct HalfLine {
    times: Vec<f64>,
    values: Vec<f64>,
    left: Vec<f64>,
}

// One-sided path on (0, horizon] sampled on the grid k*h plus its jump times.
fn half_line<R: RngCore>(
    spec: &ProcessSpec,
    law: &JumpLaw,
    n: usize,
    horizon: f64,
    rng: &mut R,
) -> HalfLine {
    let h = spec.step;
    let beta = spec.drift;
    let sigma = spec.sigma;
    let jumps = jump_times(spec.rate, horizon, law, rng);
    let cap = n + jumps.len();
    let mut out = HalfLine {
        times: Vec::with_capacity(cap),
        values: Vec::with_capacity(cap),
        left: Vec::with_capacity(cap),
    };
    let mut cur = 0.0;
    let mut prev = 0.0;
    let mut next_jump = 0;
    let sd_step = sigma * sqrt(h);
    for k in 1..=n {
        let grid_t = k as f64 * h;
        while next_jump < jumps.len() && jumps[next_jump].0 < grid_t {
            let (t, size) = jumps[next_jump];
            let dt = t - prev;
            let z: f64 = StandardNormal.sample(rng);
            let l = cur + beta * dt + sigma * sqrt(dt) * z;
            out.times.push(t);
            out.left.push(l);
            out.values.push(l + size);
            cur = l + size;
            prev = t;
            next_jump += 1;
        }
        let dt = grid_t - prev;
        let z: f64 = StandardNormal.sample(rng);
        let incr = if prev == (k - 1) as f64 * h {
            beta * h + sd_step * z
        } else {
            beta * dt + sigma * sqrt(dt) * z
        };
        cur += incr;
        out.times.push(grid_t);
        out.values.push(cur);
        out.left.push(cur);
        prev = grid_t;
    }
    out
}

/// Refine a grid path by Brownian-bridge interpolation: every interval is
/// split into `factor` equal pieces whose interior values are drawn from the
/// bridge of the diffusion part between the stored right value and the next
/// left limit. The result samples the same underlying path more finely.
pub fn refine_by_bridging(path: &PathGrid, factor: usize, seed: u64) -> Result<PathGrid> {
    let step = match path.sampling {
        Sampling::Grid { step } => step,
        Sampling::Exact { .. } => {
            return Err(Error::InvalidInput("exact paths need no refinement".into()));
        }
    };
    let sigma = path
        .spec
        .as_ref()
        .map(|s| s.sigma)
        .ok_or_else(|| Error::InvalidInput("refinement needs the process spec".into()))?;
    if factor == 0 {
        return Err(Error::InvalidInput("refinement factor must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = path.len();
    let cap = (n - 1) * factor + 1;
    let mut times = Vec::with_capacity(cap);
    let mut values = Vec::with_capacity(cap);
    let mut left = Vec::with_capacity(cap);
    let sigma2 = sigma * sigma;
    for i in 0..n - 1 {
        times.push(path.times[i]);
        values.push(path.values[i]);
        left.push(path.left_values[i]);
        let (a, b) = (path.times[i], path.times[i + 1]);
        let end = path.left_values[i + 1];
        let width = (b - a) / factor as f64;
        let mut s_prev = a;
        let mut x_prev = path.values[i];
        for j in 1..factor {
            let s = a + j as f64 * width;
            let frac = (s - s_prev) / (b - s_prev);
            let mean = x_prev + frac * (end - x_prev);
            let var = sigma2 * (s - s_prev) * (b - s) / (b - s_prev);
            let z: f64 = StandardNormal.sample(&mut rng);
            let x = mean + sqrt(var.max(0.0)) * z;
            times.push(s);
            values.push(x);
            left.push(x);
            s_prev = s;
            x_prev = x;
        }
    }
    times.push(path.times[n - 1]);
    values.push(path.values[n - 1]);
    left.push(path.left_values[n - 1]);
    let mut out =
        PathGrid::from_parts(times, values, left, Sampling::Grid { step: step / factor as f64 })?;
    out.seed = path.seed;
    out.spec = path.spec.clone().map(|mut s| {
        s.step = step / factor as f64;
        s
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brownian_grid_layout() {
        let spec = ProcessSpec::brownian(0.0, 1.0, 1.0, 0.5);
        let path = simulate(&spec, 11).unwrap();
        assert_eq!(path.times(), &[-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(path.values()[2], 0.0);
        assert_eq!(path.jump_count(), 0);
    }

    #[test]
    fn pure_drift_is_linear() {
        let spec = ProcessSpec::pure_drift(1.0, 1.0);
        let path = simulate(&spec, 3).unwrap();
        assert_eq!(path.times(), &[-1.0, 0.0, 1.0]);
        assert_eq!(path.values(), &[-1.0, 0.0, 1.0]);
        assert_eq!(path.jump_count(), 0);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = ProcessSpec::brownian(0.0, 0.0, 1.0, 0.1);
        assert!(matches!(simulate(&spec, 1), Err(Error::InvalidSpec(_))));
        spec.sigma = 1.0;
        spec.step = 0.0;
        assert!(matches!(simulate(&spec, 1), Err(Error::InvalidSpec(_))));
        spec.step = 0.1;
        spec.half_width = -1.0;
        assert!(matches!(simulate(&spec, 1), Err(Error::InvalidSpec(_))));
        let law = JumpLaw::TwoPoint { up: 1.0, down: -1.0, p_up: 0.5 };
        let mut cpp = ProcessSpec::compound_poisson(0.0, 0.0, law, 1.0);
        assert!(matches!(simulate(&cpp, 1), Err(Error::InvalidSpec(_))));
        cpp.degenerate = true;
        assert!(simulate(&cpp, 1).is_ok());
    }

    #[test]
    fn mean_slope_examples() {
        assert_eq!(mean_slope(&ProcessSpec::brownian(0.3, 1.0, 1.0, 0.1)).unwrap(), 0.3);
        let exp = ProcessSpec::compound_poisson(-1.0, 2.0, JumpLaw::Exponential { mean: 0.5 }, 1.0);
        assert_eq!(mean_slope(&exp).unwrap(), 0.0);
        let jd = ProcessSpec::jump_diffusion(
            1.0,
            1.0,
            3.0,
            JumpLaw::Normal { mean: -1.0, var: 1.0 },
            1.0,
            0.1,
        );
        assert_eq!(mean_slope(&jd).unwrap(), -2.0);
    }

    #[test]
    fn reproducible() {
        let law = JumpLaw::Normal { mean: 0.2, var: 1.0 };
        let spec = ProcessSpec::jump_diffusion(0.1, 0.7, 1.5, law, 5.0, 0.01);
        assert_eq!(simulate(&spec, 99).unwrap(), simulate(&spec, 99).unwrap());
        assert_ne!(simulate(&spec, 99).unwrap(), simulate(&spec, 100).unwrap());
    }

    #[test]
    fn compound_poisson_is_exact_reconstruction() {
        let law = JumpLaw::TwoPoint { up: 1.0, down: -1.0, p_up: 0.5 };
        let spec = ProcessSpec::compound_poisson(0.4, 2.0, law, 10.0);
        for seed in 0..50 {
            let p = simulate(&spec, seed).unwrap();
            let z = p.times().iter().position(|&t| t == 0.0).unwrap();
            // Rebuild from jump records and drift, outwards from 0.
            for i in z + 1..p.len() {
                let mut x = 0.4 * p.times()[i];
                for j in z + 1..=i {
                    x += p.values()[j] - p.left_values()[j];
                }
                assert!((x - p.values()[i]).abs() < 1e-12);
            }
            for i in 0..z {
                let mut x = 0.4 * p.times()[i];
                for j in i + 1..z {
                    x -= p.values()[j] - p.left_values()[j];
                }
                assert!((x - p.values()[i]).abs() < 1e-12, "seed {seed} index {i}");
            }
        }
    }

    #[test]
    fn jump_diffusion_records_both_limits() {
        let law = JumpLaw::Normal { mean: 1.0, var: 0.0 };
        let spec = ProcessSpec::jump_diffusion(0.0, 1.0, 3.0, law, 4.0, 0.01);
        let p = simulate(&spec, 5).unwrap();
        assert!(p.jump_count() > 0);
        for i in 0..p.len() {
            if p.is_jump()[i] {
                let size = p.values()[i] - p.left_values()[i];
                // Negative-time jumps enter as +1 too: X_{-s} - X_{-s-} = J.
                assert!((size - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn restriction_keeps_origin_and_interpolates() {
        let law = JumpLaw::Normal { mean: 0.0, var: 1.0 };
        let spec = ProcessSpec::compound_poisson(0.5, 1.0, law, 8.0);
        let p = simulate(&spec, 17).unwrap();
        let r = p.restrict(-6.0, 6.0).unwrap();
        assert_eq!(r.window(), (-6.0, 6.0));
        assert_eq!(r.value_at(-6.0), p.value_at(-6.0));
        assert_eq!(r.value_at(0.0), Some(0.0));
    }

    #[test]
    fn bridging_keeps_coarse_samples() {
        let spec = ProcessSpec::brownian(0.2, 1.3, 2.0, 0.1);
        let p = simulate(&spec, 8).unwrap();
        let f = refine_by_bridging(&p, 4, 1).unwrap();
        assert_eq!(f.len(), (p.len() - 1) * 4 + 1);
        for i in 0..p.len() {
            assert_eq!(f.values()[4 * i], p.values()[i]);
            assert!((f.times()[4 * i] - p.times()[i]).abs() < 1e-12);
        }
        assert_eq!(f.step(), Some(0.025));
    }
}
