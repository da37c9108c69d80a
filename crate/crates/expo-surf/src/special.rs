//! Log-space special functions underpinning every other module.
//!
//! Everything of magnitude `t^n e^{-t^p/p}` is kept as a natural logarithm
//! end to end; exponentiation happens only in final reporting. For n >= 100
//! the intermediate values would otherwise overflow or underflow binary64.

use crate::error::{Error, Result};
use statrs::function::gamma;

/// ln Gamma(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(gamma::ln_gamma(x))
}

/// ln of the volume of the unit Euclidean ball in dimension n:
/// ln(pi^(n/2) / Gamma(n/2 + 1)).
pub fn log_unit_ball_volume(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("unit ball volume requires n >= 1"));
    }
    let half = n as f64 / 2.0;
    Ok(half * std::f64::consts::PI.ln() - log_gamma(half + 1.0)?)
}

/// ln J_{a,p} where J_{a,p} = int_0^inf t^a e^{-t^p/p} dt.
///
/// Closed form via u = t^p/p: J_{a,p} = p^((a+1)/p - 1) Gamma((a+1)/p).
pub fn log_j(a: f64, p: f64) -> Result<f64> {
    if !(a >= 0.0) {
        return Err(Error::domain(format!("log_j requires a >= 0, got {a}")));
    }
    if !(p > 0.0) {
        return Err(Error::domain(format!("log_j requires p > 0, got {p}")));
    }
    let s = (a + 1.0) / p;
    Ok((s - 1.0) * p.ln() + log_gamma(s)?)
}

/// ln of the Laplace-method approximation of J_{a,p} for large a:
/// sqrt(2 pi / p) a^(1/p - 1/2) a^(a/p) e^(-a/p).
pub fn log_j_laplace(a: f64, p: f64) -> Result<f64> {
    if !(a > 1.0) {
        return Err(Error::domain(format!(
            "log_j_laplace is an asymptotic form, requires a > 1, got {a}"
        )));
    }
    if !(p > 0.0) {
        return Err(Error::domain(format!("log_j_laplace requires p > 0, got {p}")));
    }
    Ok(0.5 * (2.0 * std::f64::consts::PI / p).ln() + (1.0 / p - 0.5) * a.ln()
        + (a / p) * (a.ln() - 1.0))
}

/// Second-order Laplace approximation sqrt(-2 pi / (h''(0) t)) of
/// int e^{t h(x)} dx for an interior maximum with h(max) = 0.
pub fn laplace_second_order(h_second_at_max: f64, t: f64) -> Result<f64> {
    if !(h_second_at_max < 0.0) {
        return Err(Error::domain(format!(
            "laplace_second_order requires h''(0) < 0, got {h_second_at_max}"
        )));
    }
    if !(t > 0.0) {
        return Err(Error::domain(format!("laplace_second_order requires t > 0, got {t}")));
    }
    Ok((-2.0 * std::f64::consts::PI / (h_second_at_max * t)).sqrt())
}

/// Regularized lower incomplete gamma function P(shape, x).
pub fn regularized_gamma_p(shape: f64, x: f64) -> Result<f64> {
    if !(shape > 0.0) {
        return Err(Error::domain(format!(
            "regularized_gamma_p requires shape > 0, got {shape}"
        )));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x < 1e-10 {
        // gamma_lr short-circuits tiny x to 0, which is badly wrong for
        // small shapes. Two terms of the lower-incomplete series give
        // relative error below x/(shape + 1) here.
        let lead = shape * x.ln() - x - log_gamma(shape + 1.0)?;
        return Ok(lead.exp() * (1.0 + x / (shape + 1.0)));
    }
    Ok(gamma::gamma_lr(shape, x))
}

/// Inverse of P(shape, .): the x with P(shape, x) = q.
///
/// Bracketed bisection refined by Newton steps; robust over the full
/// supported shape range including quantiles within one ulp of 1.
pub fn inverse_regularized_gamma_p(shape: f64, q: f64) -> Result<f64> {
    if !(shape > 0.0) {
        return Err(Error::domain(format!(
            "inverse_regularized_gamma_p requires shape > 0, got {shape}"
        )));
    }
    if !(0.0..1.0).contains(&q) {
        return Err(Error::domain(format!(
            "inverse_regularized_gamma_p requires q in [0, 1), got {q}"
        )));
    }
    if q == 0.0 {
        return Ok(0.0);
    }

    let mut hi = shape + 1.0;
    while regularized_gamma_p(shape, hi)? < q {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::accuracy(
                format!("inverse_regularized_gamma_p bracket failed (shape {shape}, q {q})"),
                hi,
            ));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if regularized_gamma_p(shape, mid)? < q {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);

    // Newton polish; dP/dx = exp((shape-1) ln x - x - lnGamma(shape)).
    let lg = log_gamma(shape)?;
    for _ in 0..4 {
        let f = regularized_gamma_p(shape, x)? - q;
        let dlog = (shape - 1.0) * x.ln() - x - lg;
        if dlog < -700.0 {
            break;
        }
        let step = f / dlog.exp();
        let next = x - step;
        if next > lo && next < hi {
            x = next;
        } else {
            break;
        }
    }
    Ok(x)
}
