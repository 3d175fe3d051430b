//! Log-gamma, (incomplete) beta functions, truncated beta sampling and
//! log-space categorical helpers.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (reflection is used below 1/2).
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // Γ(x)Γ(1-x) = π / sin(πx)
        let pi = T::PI();
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::from_count(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    half * (T::lit(2.0) * T::PI()).ln() + (x + half) * t.ln() - t + acc.ln()
}

/// `ln B(a, b)`.
pub fn ln_beta<T: Real>(a: T, b: T) -> T {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

const CF_MAX_ITER: usize = 10_000;

/// Continued fraction for the regularized incomplete beta (modified Lentz).
fn beta_cf<T: Real>(x: T, a: T, b: T) -> T {
    let one = T::one();
    let tiny = T::lit(1e-300).max(T::min_positive_value());
    let eps = T::epsilon();
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = one / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = T::from_count(m);
        let m2 = m + m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        h = h * d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        let del = d * c;
        h = h * del;
        if (del - one).abs() <= eps {
            break;
        }
    }
    h
}

fn check_beta_args<T: Real>(x: T, a: T, b: T) -> Result<()> {
    if !(a > T::zero() && b > T::zero() && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "beta shape parameters must be positive, got a={a}, b={b}"
        )));
    }
    if !(x >= T::zero() && x <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "incomplete beta argument must lie in [0, 1], got {x}"
        )));
    }
    Ok(())
}

/// `ln I_x(a, b)`, the log of the regularized incomplete beta function.
pub fn log_reg_inc_beta<T: Real>(x: T, a: T, b: T) -> Result<T> {
    check_beta_args(x, a, b)?;
    Ok(log_reg_inc_beta_unchecked(x, a, b))
}

fn log_reg_inc_beta_unchecked<T: Real>(x: T, a: T, b: T) -> T {
    let one = T::one();
    if x <= T::zero() {
        return T::neg_infinity();
    }
    if x >= one {
        return T::zero();
    }
    let lbeta = ln_beta(a, b);
    if x < (a + one) / (a + b + T::lit(2.0)) {
        a * x.ln() + b * (-x).ln_1p() - lbeta - a.ln() + beta_cf(x, a, b).ln()
    } else {
        let y = one - x;
        let log_comp = b * y.ln() + a * x.ln() - lbeta - b.ln() + beta_cf(y, b, a).ln();
        (-log_comp.exp()).ln_1p()
    }
}

/// `I_x(a, b)`.
pub fn reg_inc_beta<T: Real>(x: T, a: T, b: T) -> Result<T> {
    log_reg_inc_beta(x, a, b).map(T::exp)
}

/// `ln B(q; a, b) = ln ∫₀^q t^{a-1}(1-t)^{b-1} dt`, for `q ∈ (0, 1]`.
pub fn log_inc_beta<T: Real>(q: T, a: T, b: T) -> Result<T> {
    if q.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidParameter(format!(
            "incomplete beta upper limit must be in (0, 1], got {q}"
        )));
    }
    Ok(ln_beta(a, b) + log_reg_inc_beta(q, a, b)?)
}

/// Draws from Beta(a, b) restricted to `(0, limit)` by inverting the CDF
/// with bisection.
pub fn sample_truncated_beta<T: Real, R: Rng + ?Sized>(
    limit: T,
    a: T,
    b: T,
    rng: &mut R,
) -> Result<T> {
    check_beta_args(limit, a, b)?;
    if limit.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidParameter("truncation limit must be positive".into()));
    }
    let log_total = log_reg_inc_beta_unchecked(limit, a, b);
    // u in (0, 1)
    let u: f64 = loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            break u;
        }
    };
    let target = T::lit(u).ln() + log_total;
    let mut lo = T::zero();
    let mut hi = limit;
    let tol = T::lit(1e-12);
    for _ in 0..200 {
        if hi - lo <= tol * hi {
            break;
        }
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if log_reg_inc_beta_unchecked(mid, a, b) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = (lo + hi) * T::lit(0.5);
    // keep the draw strictly inside the open support
    if x <= T::zero() {
        Ok(hi.min(limit * T::lit(0.5)))
    } else if x >= limit {
        Ok(lo.max(limit * T::lit(0.5)))
    } else {
        Ok(x)
    }
}

/// Numerically stable `ln Σ exp(x_i)`; `-inf` for an empty slice.
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if !max.is_finite() {
        return max;
    }
    let sum = xs.iter().fold(T::zero(), |acc, &x| acc + (x - max).exp());
    max + sum.ln()
}

/// Samples an index with probability proportional to `exp(log_weights[i])`.
pub fn sample_log_categorical<R: Rng + ?Sized>(log_weights: &[f64], rng: &mut R) -> Result<usize> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Numerical(format!(
            "no finite log weight among {} candidates",
            log_weights.len()
        )));
    }
    let total: f64 = log_weights.iter().map(|&w| (w - max).exp()).sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &w) in log_weights.iter().enumerate() {
        let p = (w - max).exp();
        if p > 0.0 {
            last = i;
            if u < p {
                return Ok(i);
            }
            u -= p;
        }
    }
    Ok(last)
}
