//! Scalar special functions used by the oracles and the test statistics.
//!
//! Everything here is `no_std`; transcendental functions come from `libm`.

pub use libm::{erfc, exp, expm1, fabs, floor, ceil, log, log1p, lgamma, pow, sqrt};

pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_677_939_946_059_934;
pub const SQRT_2: f64 = core::f64::consts::SQRT_2;
pub const LN_2: f64 = core::f64::consts::LN_2;

/// Standard normal density.
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * exp(-0.5 * x * x)
}

/// Standard normal distribution function.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Upper tail `P{N(0,1) >= x}`, accurate far into the tail.
#[inline]
pub fn norm_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// `ln P{N = k}` for `N ~ Poisson(mean)`.
pub fn ln_poisson_pmf(k: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let kf = k as f64;
    kf * log(mean) - mean - lgamma(kf + 1.0)
}

/// Index range `[lo, hi]` carrying all but ~1e-15 of a Poisson(mean) law.
pub fn poisson_support(mean: f64) -> (u64, u64) {
    if mean <= 0.0 {
        return (0, 0);
    }
    let spread = 12.0 * sqrt(mean);
    let lo = floor(mean - spread - 5.0).max(0.0) as u64;
    let hi = ceil(mean + spread + 12.0) as u64;
    (lo, hi)
}

/// Regularized lower incomplete gamma function `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_cont_frac(a, x)
    }
}

/// Regularized upper incomplete gamma function `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_cont_frac(a, x)
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..10_000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if fabs(term) < fabs(sum) * 1e-17 {
            break;
        }
    }
    sum * exp(-x + a * log(x) - lgamma(a))
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
fn gamma_cont_frac(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = b + an / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if fabs(del - 1.0) < 1e-16 {
            break;
        }
    }
    exp(-x + a * log(x) - lgamma(a)) * h
}

/// Survival function of the chi-square law with `dof` degrees of freedom.
pub fn chi_square_sf(statistic: f64, dof: f64) -> f64 {
    if statistic <= 0.0 {
        return 1.0;
    }
    gamma_q(0.5 * dof, 0.5 * statistic)
}

/// `P{K > x}` for the Kolmogorov distribution.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        // Jacobi-transformed series, fast for small arguments.
        let pi = core::f64::consts::PI;
        let mut cdf = 0.0;
        for k in 1..=20 {
            let odd = (2 * k - 1) as f64;
            cdf += exp(-odd * odd * pi * pi / (8.0 * x * x));
        }
        let cdf = sqrt(2.0 * pi) / x * cdf;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = exp(-2.0 * kf * kf * x * x);
        sum += sign * term;
        if term < 1e-18 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sided normal p-value of a z-score.
#[inline]
pub fn two_sided_p(z: f64) -> f64 {
    (2.0 * norm_sf(fabs(z))).min(1.0)
}
