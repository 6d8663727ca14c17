//! Closed forms and quadratures for ladder exponents, increment laws and
//! jump intensities.
//!
//! Everything here is deterministic. Brownian quantities have closed forms
//! which double as independent checks on the quadrature routes.

use alloc::string::String;
use alloc::vec::Vec;

use crate::math::{
    exp, expm1, gamma_p, gamma_q, ln_poisson_pmf, log, norm_cdf, norm_pdf, norm_sf,
    poisson_support, sqrt, LN_2,
};
use crate::process::{JumpLaw, ProcessKind, ProcessSpec};
use crate::quad::{Estimate, Quadrature};
use crate::{Error, Result};

/// `P{X_t ≥ c}` for `t > 0`.
pub fn prob_at_least(spec: &ProcessSpec, t: f64, c: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(alloc::format!("time must be > 0, got {t}")));
    }
    let shift = c - spec.drift * t;
    let diffusion_sd = spec.sigma * sqrt(t);
    let tail = |x: f64, extra_var: f64| {
        let sd = sqrt(diffusion_sd * diffusion_sd + extra_var);
        if sd == 0.0 {
            if x <= 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            norm_sf(x / sd)
        }
    };
    let law = match (&spec.jumps, spec.rate > 0.0) {
        (Some(law), true) => *law,
        _ => return Ok(tail(shift, 0.0)),
    };
    let mean = spec.rate * t;
    let p = match law {
        JumpLaw::Normal { mean: m, var } => poisson_mix(mean, |n| {
            let nf = n as f64;
            tail(shift - nf * m, nf * var)
        }),
        JumpLaw::TwoPoint { up, down, p_up } => {
            two_point_tail(mean * p_up, mean * (1.0 - p_up), up, down, shift, diffusion_sd)
        }
        JumpLaw::Exponential { mean: m } => {
            if diffusion_sd == 0.0 {
                poisson_mix(mean, |n| gamma_sum_tail(n, m, shift))
            } else {
                poisson_mix(mean, |n| smoothed_gamma_tail(n, m, shift, diffusion_sd))
            }
        }
    };
    Ok(p.clamp(0.0, 1.0))
}

/// `P{a ≤ X_t ≤ b}` up to atoms at `b`, which carry no weight in any of the
/// time integrals below.
pub fn prob_between(spec: &ProcessSpec, t: f64, a: f64, b: f64) -> Result<f64> {
    Ok((prob_at_least(spec, t, a)? - prob_at_least(spec, t, b)?).max(0.0))
}

fn poisson_mix(mean: f64, mut term: impl FnMut(u64) -> f64) -> f64 {
    let (lo, hi) = poisson_support(mean);
    (lo..=hi).map(|n| exp(ln_poisson_pmf(n, mean)) * term(n)).sum()
}

// P{S_n ≥ x} for a sum of n exponentials with signed mean m.
fn gamma_sum_tail(n: u64, m: f64, x: f64) -> f64 {
    if n == 0 {
        return if x <= 0.0 { 1.0 } else { 0.0 };
    }
    let scale = m.abs();
    if m > 0.0 {
        if x <= 0.0 {
            1.0
        } else {
            gamma_q(n as f64, x / scale)
        }
    } else if x > 0.0 {
        0.0
    } else {
        gamma_p(n as f64, -x / scale)
    }
}

// P{sd·Z + S_n ≥ x} by integrating the normal tail against the gamma law.
fn smoothed_gamma_tail(n: u64, m: f64, x: f64, sd: f64) -> f64 {
    if n == 0 {
        return norm_sf(x / sd);
    }
    let scale = m.abs();
    let sign = m.signum();
    let nf = n as f64;
    let ln_norm = crate::math::lgamma(nf);
    let density = |g: f64| {
        if g <= 0.0 {
            return 0.0;
        }
        let u = g / scale;
        exp((nf - 1.0) * log(u) - u - ln_norm) / scale
    };
    let q = Quadrature { abs_tol: 1e-13, rel_tol: 1e-11, max_panels: 2000 };
    q.integrate_to_infinity(|g| density(g) * norm_sf((x - sign * g) / sd), 0.0)
        .map(|e| e.value)
        .unwrap_or_else(|e| match e {
            Error::Quadrature { value, .. } => value,
            _ => f64::NAN,
        })
}

// up·N⁺ + down·N⁻ (+ Gaussian noise of width sd) at least `x`, with
// independent Poisson counts of means `m_up`, `m_down`.
fn two_point_tail(m_up: f64, m_down: f64, up: f64, down: f64, x: f64, sd: f64) -> f64 {
    let (lo_d, hi_d) = poisson_support(m_down);
    let mut total = 0.0;
    for j in lo_d..=hi_d {
        let w = exp(ln_poisson_pmf(j, m_down));
        if w == 0.0 {
            continue;
        }
        let rest = x - down * j as f64;
        let inner = if sd > 0.0 {
            poisson_mix(m_up, |k| norm_sf((rest - up * k as f64) / sd))
        } else {
            count_tail(m_up, up, rest)
        };
        total += w * inner;
    }
    total
}

// P{up·N ≥ x} for N ~ Poisson(mean).
fn count_tail(mean: f64, up: f64, x: f64) -> f64 {
    let at_least = |k: f64| {
        if k <= 0.0 {
            1.0
        } else if mean == 0.0 {
            0.0
        } else {
            gamma_p(k, mean)
        }
    };
    if up > 0.0 {
        at_least(libm::ceil(x / up))
    } else if up < 0.0 {
        1.0 - at_least(libm::floor(x / up) + 1.0)
    } else if x <= 0.0 {
        1.0
    } else {
        0.0
    }
}

fn check_mean(spec: &ProcessSpec, alpha: f64) -> Result<f64> {
    let mean = spec.mean_slope()?;
    if alpha <= mean {
        return Err(Error::Domain(alloc::format!(
            "slope {alpha} must exceed E[X_1] = {mean}; the time integral diverges"
        )));
    }
    Ok(mean)
}

// ∫_0^∞ kernel(t) p(t) dt where p ≤ 1 decays exponentially. Brownian
// integrands go to infinity in one piece; others are cut where both the
// kernel bound and p fall below 1e-17, in dyadic pieces.
fn time_integral(
    spec: &ProcessSpec,
    tol: f64,
    kernel: impl Fn(f64) -> f64,
    p: impl Fn(f64) -> f64,
) -> Result<Estimate> {
    let f = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let k = kernel(t);
        if k == 0.0 {
            0.0
        } else {
            k * p(t)
        }
    };
    let mut q = Quadrature::with_tol(tol);
    let mut total = q.integrate(&f, 0.0, 1.0)?;
    let add = |total: &mut Estimate, e: Estimate| {
        total.value += e.value;
        total.error += e.error;
        total.evaluations += e.evaluations;
    };
    if spec.kind == ProcessKind::BrownianDrift {
        let tail = q.integrate_to_infinity(&f, 1.0)?;
        add(&mut total, tail);
        return Ok(total);
    }
    q.max_panels = 20_000;
    let mut a = 1.0;
    loop {
        let b = 2.0 * a;
        let piece = q.integrate(&f, a, b)?;
        add(&mut total, piece);
        if (p(b) < 1e-17 && p(2.0 * b) < 1e-17) || kernel(b).abs() < 1e-18 {
            return Ok(total);
        }
        if b > 1e7 {
            return Err(Error::Domain("time integral does not decay".into()));
        }
        a = b;
    }
}

// (e^{-t} - e^{-λt}) / t without cancellation near 0.
fn fristedt_kernel(lambda: f64, t: f64) -> f64 {
    if t > 1.0 {
        (exp(-t) - exp(-lambda * t)) / t
    } else {
        -exp(-t) * expm1(-(lambda - 1.0) * t) / t
    }
}

// (1 - e^{-λt}) / t.
fn laplace_kernel(lambda: f64, t: f64) -> f64 {
    -expm1(-lambda * t) / t
}

/// Ladder-time exponent from the time integral of `t⁻¹ P{X_t ≥ αt}`,
/// normalized so that its value at `λ = 1` is exactly 1.
pub fn phi_fristedt(spec: &ProcessSpec, alpha: f64, lambda: f64, tol: f64) -> Result<Estimate> {
    spec.validate()?;
    if !(lambda > 0.0) {
        return Err(Error::Domain("lambda must be > 0".into()));
    }
    check_mean(spec, alpha)?;
    if lambda == 1.0 {
        return Ok(Estimate { value: 1.0, error: 0.0, evaluations: 0 });
    }
    let est = time_integral(
        spec,
        tol,
        |t| fristedt_kernel(lambda, t),
        |t| prob_at_least(spec, t, alpha * t).unwrap_or(0.0),
    )?;
    let value = exp(est.value);
    Ok(Estimate { value, error: value * est.error, ..est })
}

fn brownian_domain(beta: f64, alpha: f64, lambda: f64) -> Result<()> {
    if !(alpha > beta.abs()) {
        return Err(Error::Domain(alloc::format!("need alpha > |beta|, got alpha = {alpha}, beta = {beta}")));
    }
    if !(lambda >= 0.0) {
        return Err(Error::Domain("lambda must be >= 0".into()));
    }
    Ok(())
}

// (√(2λ + a²) + a)(√(2λ + b²) + b) with a = α - β, b = α + β.
fn minorant_product(beta: f64, alpha: f64, lambda: f64) -> f64 {
    let a = alpha - beta;
    let b = alpha + beta;
    (sqrt(2.0 * lambda + a * a) + a) * (sqrt(2.0 * lambda + b * b) + b)
}

/// Closed-form exponent of the minorant contact set for standard Brownian
/// motion with drift `β`: `4(α² - β²)λ / ((√(2λ+(α-β)²)+α-β)(√(2λ+(α+β)²)+α+β))`.
pub fn phi_brownian(beta: f64, alpha: f64, lambda: f64) -> Result<f64> {
    brownian_domain(beta, alpha, lambda)?;
    Ok(4.0 * (alpha * alpha - beta * beta) * lambda / minorant_product(beta, alpha, lambda))
}

/// [`phi_brownian`] for `βt + σW_t`: dividing space by `σ` maps the problem
/// to drift `β/σ` and slope `α/σ` with time untouched.
pub fn phi_brownian_scaled(beta: f64, sigma: f64, alpha: f64, lambda: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Domain("sigma must be > 0".into()));
    }
    phi_brownian(beta / sigma, alpha / sigma, lambda)
}

/// Closed form of the ladder exponent of `H_α` for `βt + σW_t`, normalized
/// like [`phi_fristedt`]: `(μ + √(μ² + 2λ)) / (μ + √(μ² + 2))`, `μ = (α-β)/σ`.
pub fn phi_ladder_brownian(beta: f64, sigma: f64, alpha: f64, lambda: f64) -> Result<f64> {
    let mu = brownian_mu(beta, sigma, alpha)?;
    Ok((mu + sqrt(mu * mu + 2.0 * lambda)) / (mu + sqrt(mu * mu + 2.0)))
}

fn brownian_mu(beta: f64, sigma: f64, alpha: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Domain("sigma must be > 0".into()));
    }
    if !(alpha > beta) {
        return Err(Error::Domain("slope must exceed the drift".into()));
    }
    Ok((alpha - beta) / sigma)
}

/// Laplace transform of the law `ν` of `G_{α_hi} - G_{α_lo}` (or of `-G_{α_lo}`
/// when `alpha_hi` is `None`), as the exponential of minus the time integral
/// of `(1 - e^{-λt}) t⁻¹ P{α_lo t ≤ X_t ≤ α_hi t}`.
pub fn nu_laplace(
    spec: &ProcessSpec,
    alpha_lo: f64,
    alpha_hi: Option<f64>,
    lambda: f64,
    tol: f64,
) -> Result<Estimate> {
    spec.validate()?;
    check_mean(spec, alpha_lo)?;
    if let Some(hi) = alpha_hi {
        if !(hi > alpha_lo) {
            return Err(Error::Domain("need alpha_lo < alpha_hi".into()));
        }
    }
    if !(lambda >= 0.0) {
        return Err(Error::Domain("lambda must be >= 0".into()));
    }
    if lambda == 0.0 {
        return Ok(Estimate { value: 1.0, error: 0.0, evaluations: 0 });
    }
    let p = |t: f64| match alpha_hi {
        None => prob_at_least(spec, t, alpha_lo * t).unwrap_or(0.0),
        Some(hi) => prob_between(spec, t, alpha_lo * t, hi * t).unwrap_or(0.0),
    };
    let est = time_integral(spec, tol, |t| laplace_kernel(lambda, t), p)?;
    let value = exp(-est.value);
    Ok(Estimate { value, error: value * est.error, ..est })
}

/// Closed form of [`nu_laplace`] for `βt + σW_t`.
pub fn nu_laplace_brownian(
    beta: f64,
    sigma: f64,
    alpha_lo: f64,
    alpha_hi: Option<f64>,
    lambda: f64,
) -> Result<f64> {
    let top = |alpha: f64| -> Result<f64> {
        let mu = brownian_mu(beta, sigma, alpha)?;
        Ok(2.0 * mu / (mu + sqrt(mu * mu + 2.0 * lambda)))
    };
    match alpha_hi {
        None => top(alpha_lo),
        Some(hi) => Ok(top(alpha_lo)? / top(hi)?),
    }
}

/// Pointwise intensity `t⁻¹ × density of X_t/t at x` of the `(α, Δ)` jumps
/// of `G`. Needs a Gaussian marginal.
pub fn gamma_h_density(spec: &ProcessSpec, x: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain("time must be > 0".into()));
    }
    // The density of X_t/t at x is t times the density of X_t at xt.
    let at = |mean: f64, var: f64| {
        let sd = sqrt(var);
        norm_pdf((x * t - mean) / sd) / sd
    };
    match (spec.kind, spec.jumps) {
        (ProcessKind::BrownianDrift, _) if spec.sigma > 0.0 => {
            Ok(at(spec.drift * t, spec.sigma * spec.sigma * t))
        }
        (ProcessKind::JumpDiffusion, Some(JumpLaw::Normal { mean, var })) => {
            let rate_t = spec.rate * t;
            Ok(poisson_mix(rate_t, |n| {
                let nf = n as f64;
                at(spec.drift * t + nf * mean, spec.sigma * spec.sigma * t + nf * var)
            }))
        }
        _ => Err(Error::Unsupported("no density for this family; use bin integrals".into())),
    }
}

/// Expected number of `(α, Δ)` jumps of `G` per path in `[x_lo, x_hi] × [t_lo, t_hi]`:
/// `∫ t⁻¹ P{x_lo ≤ X_t/t ≤ x_hi} dt`.
pub fn gamma_h_intensity(
    spec: &ProcessSpec,
    x_bin: (f64, f64),
    t_bin: (f64, f64),
    tol: f64,
) -> Result<Estimate> {
    spec.validate()?;
    let (x_lo, x_hi) = x_bin;
    let (t_lo, t_hi) = t_bin;
    if !(x_lo < x_hi && 0.0 < t_lo && t_lo < t_hi) {
        return Err(Error::Domain("bin must be a non-empty box with t > 0".into()));
    }
    let mean = spec.mean_slope()?;
    if x_lo <= mean {
        log::warn!("slope bin starts at {x_lo}, not above E[X_1] = {mean}");
    }
    let q = Quadrature { max_panels: 20_000, ..Quadrature::with_tol(tol) };
    q.integrate(
        |t| prob_between(spec, t, x_lo * t, x_hi * t).unwrap_or(0.0) / t,
        t_lo,
        t_hi,
    )
}

fn z_bin_domain(beta: f64, s_bin: (f64, f64), r_bin: (f64, f64)) -> Result<()> {
    let (s_lo, s_hi) = s_bin;
    let (r_lo, r_hi) = r_bin;
    if !(s_lo < s_hi && 0.0 <= r_lo && r_lo < r_hi) {
        return Err(Error::Domain("bin must be a non-empty box with r >= 0".into()));
    }
    if !(s_lo > beta.abs()) {
        return Err(Error::Domain(alloc::format!("slope bin must lie above |beta| = {}", beta.abs())));
    }
    if s_lo < beta.abs() * 1.01 {
        log::warn!("slope bin starts close to |beta|");
    }
    Ok(())
}

/// Pointwise intensity `[φ(√r/(s-β)) + φ(√r/(s+β))]/√r` of the `(s, r)`
/// jumps of `Y` as stated for standard Brownian motion with drift `β`.
pub fn gamma_z_density(beta: f64, s: f64, r: f64) -> Result<f64> {
    if !(s > beta.abs() && r > 0.0) {
        return Err(Error::Domain("need s > |beta| and r > 0".into()));
    }
    let root = sqrt(r);
    Ok((norm_pdf(root / (s - beta)) + norm_pdf(root / (s + beta))) / root)
}

/// Bin integral of [`gamma_z_density`]. With `u = √r` the `r`-integral is
/// `2a[Φ(u/a)]` between the bin ends for each scale `a = s ∓ β`, leaving one
/// adaptive quadrature in `s`.
pub fn gamma_z_intensity(
    beta: f64,
    s_bin: (f64, f64),
    r_bin: (f64, f64),
    tol: f64,
) -> Result<Estimate> {
    z_bin_domain(beta, s_bin, r_bin)?;
    let (u1, u2) = (sqrt(r_bin.0), sqrt(r_bin.1));
    let inner = |a: f64| 2.0 * a * (norm_cdf(u2 / a) - norm_cdf(u1 / a));
    Quadrature::with_tol(tol).integrate(|s| inner(s - beta) + inner(s + beta), s_bin.0, s_bin.1)
}

/// Pointwise intensity `[φ((s-β)√r) + φ((s+β)√r)]/√r`: the measure whose
/// exponential formula reproduces [`y_increment_lt`] exactly.
pub fn gamma_z_density_from_transform(beta: f64, s: f64, r: f64) -> Result<f64> {
    if !(s > beta.abs() && r > 0.0) {
        return Err(Error::Domain("need s > |beta| and r > 0".into()));
    }
    let root = sqrt(r);
    Ok((norm_pdf((s - beta) * root) + norm_pdf((s + beta) * root)) / root)
}

/// Bin integral of [`gamma_z_density_from_transform`].
pub fn gamma_z_intensity_from_transform(
    beta: f64,
    s_bin: (f64, f64),
    r_bin: (f64, f64),
    tol: f64,
) -> Result<Estimate> {
    z_bin_domain(beta, s_bin, r_bin)?;
    let (u1, u2) = (sqrt(r_bin.0), sqrt(r_bin.1));
    let inner = |a: f64| 2.0 / a * (norm_cdf(a * u2) - norm_cdf(a * u1));
    Quadrature::with_tol(tol).integrate(|s| inner(s - beta) + inner(s + beta), s_bin.0, s_bin.1)
}

/// `E[exp(-λ(Y_{α₂} - Y_{α₁}))]` for standard Brownian motion with drift `β`:
/// `c · P(α₂)/P(α₁)` with `c = (α₁² - β²)/(α₂² - β²)` and `P` the product in the
/// denominator of [`phi_brownian`]; equivalently `Φ_{α₁}(λ)/Φ_{α₂}(λ)`.
pub fn y_increment_lt(beta: f64, alpha1: f64, alpha2: f64, lambda: f64) -> Result<f64> {
    brownian_domain(beta, alpha1, lambda)?;
    if !(alpha2 > alpha1) {
        return Err(Error::Domain("need alpha1 < alpha2".into()));
    }
    let c = (alpha1 * alpha1 - beta * beta) / (alpha2 * alpha2 - beta * beta);
    Ok(c * minorant_product(beta, alpha2, lambda) / minorant_product(beta, alpha1, lambda))
}

/// The closed form `f(x) = -log(1 + √(2λx² + 1))`.
pub fn f_closed_form(x: f64, lambda: f64) -> f64 {
    -log(1.0 + sqrt(2.0 * lambda * x * x + 1.0))
}

/// `-∫_0^∞ (1 - e^{-λr}) r^{-1/2} ∫_0^x t^{-2} φ(√r/t) dt dr` by nested
/// adaptive quadrature.
///
/// The kernel is read as `φ(√r/t)`: with `φ(t√r)` the inner integral
/// diverges at `t = 0` for every `r`.
pub fn f_integral(x: f64, lambda: f64, tol: f64) -> Result<Estimate> {
    if !(x > 0.0 && lambda > 0.0) {
        return Err(Error::Domain("need x > 0 and lambda > 0".into()));
    }
    let inner_q = Quadrature { abs_tol: tol * 1e-3, rel_tol: tol * 1e-3, max_panels: 4000 };
    let inner = |r: f64| -> f64 {
        let root = sqrt(r);
        let g = |t: f64| if t <= 0.0 { 0.0 } else { norm_pdf(root / t) / (t * t) };
        match inner_q.integrate(g, 0.0, x) {
            Ok(e) => e.value,
            Err(Error::Quadrature { value, .. }) => value,
            Err(_) => f64::NAN,
        }
    };
    let outer = |r: f64| {
        if r <= 0.0 {
            return 0.0;
        }
        -expm1(-lambda * r) / sqrt(r) * inner(r)
    };
    let q = Quadrature::with_tol(tol);
    // Split where the Gaussian cutoff of the inner integral sets in.
    let knee = (x * x).max(1e-3);
    let near = q.integrate(outer, 0.0, knee)?;
    let far = q.integrate_to_infinity(outer, knee)?;
    Ok(Estimate {
        value: -(near.value + far.value),
        error: near.error + far.error,
        evaluations: near.evaluations + far.evaluations,
    })
}

/// Both sides of the `f` identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FIdentity {
    pub x: f64,
    pub lambda: f64,
    pub closed_form: f64,
    pub quadrature: f64,
    pub residual: f64,
    pub error: f64,
}

pub fn f_identity_check(x: f64, lambda: f64, tol: f64) -> Result<FIdentity> {
    let closed_form = f_closed_form(x, lambda);
    let est = f_integral(x, lambda, tol)?;
    Ok(FIdentity {
        x,
        lambda,
        closed_form,
        quadrature: est.value,
        residual: (closed_form - est.value).abs(),
        error: est.error,
    })
}

/// `-log((1 + √(1 + 2λx²))/2)`, the value [`f_integral`] converges to.
pub fn f_integral_closed_form(x: f64, lambda: f64) -> f64 {
    f_closed_form(x, lambda) + LN_2
}

/// A tabulated oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryCurve {
    pub formula: String,
    pub params: Vec<(String, f64)>,
    pub args: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
}

impl TheoryCurve {
    pub fn new(formula: &str, params: &[(&str, f64)]) -> Self {
        Self {
            formula: formula.into(),
            params: params.iter().map(|(k, v)| ((*k).into(), *v)).collect(),
            args: Vec::new(),
            values: Vec::new(),
            errors: Vec::new(),
        }
    }

    pub fn push(&mut self, arg: f64, value: f64, error: f64) {
        self.args.push(arg);
        self.values.push(value);
        self.errors.push(error);
    }

    pub fn len(&self) -> usize {
        self.args.len()
    }

    pub fn is_empty(&self) -> bool {
        self.args.is_empty()
    }

    /// `λ ↦ Φ(λ)` from [`phi_fristedt`].
    pub fn phi_fristedt(spec: &ProcessSpec, alpha: f64, lambdas: &[f64], tol: f64) -> Result<Self> {
        let mut curve = Self::new(
            "phi_fristedt",
            &[("beta", spec.drift), ("sigma", spec.sigma), ("rate", spec.rate), ("alpha", alpha)],
        );
        for &l in lambdas {
            let e = phi_fristedt(spec, alpha, l, tol)?;
            curve.push(l, e.value, e.error);
        }
        Ok(curve)
    }

    /// `λ ↦ Φ(λ)/Φ(1)` from [`phi_brownian`].
    pub fn phi_brownian_ratio(beta: f64, alpha: f64, lambdas: &[f64]) -> Result<Self> {
        let mut curve = Self::new("phi_brownian_ratio", &[("beta", beta), ("alpha", alpha)]);
        let norm = phi_brownian(beta, alpha, 1.0)?;
        for &l in lambdas {
            curve.push(l, phi_brownian(beta, alpha, l)? / norm, 0.0);
        }
        Ok(curve)
    }

    /// `λ ↦ ν̂(λ)` from [`nu_laplace`].
    pub fn nu_laplace(
        spec: &ProcessSpec,
        alpha_lo: f64,
        alpha_hi: Option<f64>,
        lambdas: &[f64],
        tol: f64,
    ) -> Result<Self> {
        let mut curve = Self::new(
            "nu_laplace",
            &[
                ("beta", spec.drift),
                ("sigma", spec.sigma),
                ("alpha_lo", alpha_lo),
                ("alpha_hi", alpha_hi.unwrap_or(f64::INFINITY)),
            ],
        );
        for &l in lambdas {
            let e = nu_laplace(spec, alpha_lo, alpha_hi, l, tol)?;
            curve.push(l, e.value, e.error);
        }
        Ok(curve)
    }

    /// `λ ↦ E[e^{-λ(Y_{α₂} - Y_{α₁})}]`.
    pub fn y_increment_lt(beta: f64, alpha1: f64, alpha2: f64, lambdas: &[f64]) -> Result<Self> {
        let mut curve =
            Self::new("y_increment_lt", &[("beta", beta), ("alpha1", alpha1), ("alpha2", alpha2)]);
        for &l in lambdas {
            curve.push(l, y_increment_lt(beta, alpha1, alpha2, l)?, 0.0);
        }
        Ok(curve)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bm(beta: f64) -> ProcessSpec {
        ProcessSpec::brownian(beta, 1.0, 50.0, 1e-3)
    }

    #[test]
    fn phi_brownian_reference() {
        let v = phi_brownian(0.0, 1.0, 2.0).unwrap();
        let five: f64 = 5.0;
        assert!((v - 8.0 / (five.sqrt() + 1.0).powi(2)).abs() < 1e-15);
        assert!((v - 0.763_932_0).abs() < 1e-7);
        assert_eq!(phi_brownian(0.3, 1.0, 0.0).unwrap(), 0.0);
        assert_eq!(phi_brownian(0.3, 1.2, 1.7).unwrap(), phi_brownian(-0.3, 1.2, 1.7).unwrap());
        assert!(matches!(phi_brownian(1.0, 1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn fristedt_at_one_is_one() {
        let e = phi_fristedt(&bm(0.2), 1.0, 1.0, 1e-10).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn fristedt_matches_ladder_closed_form() {
        for beta in [0.0, 0.5] {
            for alpha in [1.0, 2.0] {
                for lambda in [0.5, 2.0, 5.0] {
                    let q = phi_fristedt(&bm(beta), alpha, lambda, 1e-11).unwrap().value;
                    let c = phi_ladder_brownian(beta, 1.0, alpha, lambda).unwrap();
                    assert!((q / c - 1.0).abs() < 1e-8, "{beta} {alpha} {lambda}: {q} vs {c}");
                }
            }
        }
    }

    #[test]
    fn nu_quadrature_matches_closed_form() {
        for (lo, hi) in [(1.0, None), (1.0, Some(2.0)), (1.5, Some(2.0))] {
            for lambda in [0.5, 1.0, 2.0] {
                let q = nu_laplace(&bm(0.0), lo, hi, lambda, 1e-11).unwrap().value;
                let c = nu_laplace_brownian(0.0, 1.0, lo, hi, lambda).unwrap();
                assert!((q - c).abs() < 1e-9, "{lo} {hi:?} {lambda}");
            }
        }
        assert_eq!(nu_laplace(&bm(0.0), 1.0, None, 0.0, 1e-8).unwrap().value, 1.0);
    }

    #[test]
    fn compound_poisson_tail_matches_direct_sum() {
        let law = JumpLaw::TwoPoint { up: 1.0, down: -1.0, p_up: 0.5 };
        let spec = ProcessSpec::compound_poisson(0.1, 2.0, law, 10.0);
        // Direct: condition on the total count, then on the number of up jumps.
        let t = 1.7;
        let c = 0.9;
        let mean = 2.0 * t;
        let mut direct = 0.0;
        for n in 0..80u64 {
            let pn = exp(ln_poisson_pmf(n, mean));
            for k in 0..=n {
                let binom = exp(
                    crate::math::lgamma(n as f64 + 1.0)
                        - crate::math::lgamma(k as f64 + 1.0)
                        - crate::math::lgamma((n - k) as f64 + 1.0),
                ) * 0.5f64.powi(n as i32);
                let x = 0.1 * t + k as f64 - (n - k) as f64;
                if x >= c {
                    direct += pn * binom;
                }
            }
        }
        let p = prob_at_least(&spec, t, c).unwrap();
        assert!((p - direct).abs() < 1e-13, "{p} vs {direct}");
    }

    #[test]
    fn exponential_jump_tail() {
        let spec = ProcessSpec::compound_poisson(-1.0, 2.0, JumpLaw::Exponential { mean: 0.5 }, 10.0);
        // One jump at most matters when the rate time is tiny.
        let t = 1e-6;
        let p = prob_at_least(&spec, t, 0.0).unwrap();
        assert!((p - 2.0 * t).abs() < 1e-10);
    }

    #[test]
    fn gamma_pointwise_references() {
        let d = gamma_h_density(&bm(0.0), 1.0, 1.0).unwrap();
        assert!((d - 0.241_970_7).abs() < 1e-7);
        let z = gamma_z_density(0.0, 1.0, 1.0).unwrap();
        assert!((z - 0.483_941_4).abs() < 1e-7);
        assert_eq!(gamma_z_density(0.4, 1.3, 0.7).unwrap(), gamma_z_density(-0.4, 1.3, 0.7).unwrap());
    }

    #[test]
    fn gamma_h_bin_matches_density_integral() {
        let spec = bm(0.0);
        let bin = gamma_h_intensity(&spec, (1.0, 2.0), (0.1, 1.0), 1e-10).unwrap().value;
        let q = Quadrature::with_tol(1e-11);
        let double = q
            .integrate(
                |t| {
                    q.integrate(|x| gamma_h_density(&spec, x, t).unwrap(), 1.0, 2.0)
                        .unwrap()
                        .value
                },
                0.1,
                1.0,
            )
            .unwrap()
            .value;
        assert!(bin > 0.0);
        assert!((bin - double).abs() < 1e-9);
    }

    #[test]
    fn gamma_z_bins_match_density_integrals() {
        let q = Quadrature::with_tol(1e-11);
        for beta in [0.0, 0.3] {
            let verbatim = gamma_z_intensity(beta, (1.0, 1.5), (0.1, 0.4), 1e-11).unwrap().value;
            let derived = gamma_z_intensity_from_transform(beta, (1.0, 1.5), (0.1, 0.4), 1e-11)
                .unwrap()
                .value;
            let integrate = |f: &dyn Fn(f64, f64) -> f64| {
                q.integrate(|s| q.integrate(|r| f(s, r), 0.1, 0.4).unwrap().value, 1.0, 1.5)
                    .unwrap()
                    .value
            };
            let v = integrate(&|s, r| gamma_z_density(beta, s, r).unwrap());
            let d = integrate(&|s, r| gamma_z_density_from_transform(beta, s, r).unwrap());
            assert!((verbatim - v).abs() < 1e-9);
            assert!((derived - d).abs() < 1e-9);
        }
    }

    #[test]
    fn y_transform_reference_values() {
        let expected = [
            ((0.0, 1.0, 2.0), [0.769_69, 0.663_11, 0.556_57]),
            ((0.3, 0.8, 1.6), [0.633_08, 0.529_36, 0.441_22]),
        ];
        for ((beta, a1, a2), values) in expected {
            for (lambda, v) in [0.5, 1.0, 2.0].into_iter().zip(values) {
                let got = y_increment_lt(beta, a1, a2, lambda).unwrap();
                assert!((got - v).abs() < 1e-5, "{beta} {lambda}: {got}");
            }
            assert!((y_increment_lt(beta, a1, a2, 0.0).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn y_transform_is_the_exponential_formula_of_the_derived_intensity() {
        // exp(-∫∫ (1 - e^{-λr}) γ(ds dr)) over s ∈ (α₁, α₂].
        let (beta, a1, a2, lambda) = (0.3, 0.8, 1.6, 1.3);
        let q = Quadrature::with_tol(1e-11);
        let inner = |s: f64| {
            let f = |r: f64| -expm1(-lambda * r) * gamma_z_density_from_transform(beta, s, r).unwrap();
            q.integrate_sqrt_half_line(f).unwrap().value
        };
        let mass = q.integrate(inner, a1, a2).unwrap().value;
        let lt = y_increment_lt(beta, a1, a2, lambda).unwrap();
        assert!((exp(-mass) - lt).abs() < 1e-8);
    }

    #[test]
    fn f_integral_converges_to_shifted_closed_form() {
        for (x, lambda) in [(1.0, 1.0), (0.3, 2.0), (2.0, 0.5)] {
            let e = f_integral(x, lambda, 1e-10).unwrap();
            assert!((e.value - f_integral_closed_form(x, lambda)).abs() < 1e-7, "{x} {lambda}");
        }
        assert!((f_closed_form(1.0, 1.0) + (1.0 + 3f64.sqrt()).ln()).abs() < 1e-15);
        assert!((f_closed_form(1e-9, 1.0) + LN_2).abs() < 1e-12);
    }
}
