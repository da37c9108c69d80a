//! Sampler for the in-plane radial law of a hyperplane at distance `rho`
//! from the origin: density proportional to
//! `s^(n-2) exp(-(s^2 + rho^2)^(p/2) / p)` on [0, T].
//!
//! The inverse CDF is tabulated once per (n, p, offset) on Chebyshev-spaced
//! nodes and then binary-searched per draw; facet estimators call it
//! millions of times.

use crate::error::{Error, Result};
use crate::measure::MeasureParams;
use crate::special::inverse_regularized_gamma_p;
use rand::Rng;

const NODES: usize = 4096;

#[derive(Debug, Clone)]
pub struct InPlaneSampler {
    nodes: Vec<f64>,
    cdf: Vec<f64>,
}

/// Truncation radius for the in-plane integrals: the (n-1)-dimensional
/// radial Gamma law's 1 - 1e-16 quantile dominates the coupled tail.
pub fn in_plane_truncation(params: &MeasureParams) -> Result<f64> {
    let p = params.p();
    let shape = (params.n() as f64 - 1.0) / p;
    Ok((p * inverse_regularized_gamma_p(shape, 1.0 - 1e-16)?).powf(1.0 / p))
}

/// Log of the unnormalized in-plane radial density.
pub fn in_plane_log_density(params: &MeasureParams, rho: f64, s: f64) -> f64 {
    let n = params.n();
    let p = params.p();
    let radial = if n == 2 {
        0.0
    } else if s <= 0.0 {
        return f64::NEG_INFINITY;
    } else {
        (n as f64 - 2.0) * s.ln()
    };
    radial - (s * s + rho * rho).powf(p / 2.0) / p
}

impl InPlaneSampler {
    pub fn new(params: &MeasureParams, rho: f64) -> Result<Self> {
        if params.n() < 2 {
            return Err(Error::domain("in-plane sampler requires n >= 2"));
        }
        if !(rho >= 0.0) {
            return Err(Error::domain("offset must be nonnegative"));
        }
        let t_max = in_plane_truncation(params)?;
        let mut nodes = Vec::with_capacity(NODES);
        for j in 0..NODES {
            let theta = std::f64::consts::PI * j as f64 / (NODES - 1) as f64;
            nodes.push(t_max * 0.5 * (1.0 - theta.cos()));
        }
        let logs: Vec<f64> = nodes
            .iter()
            .map(|&s| in_plane_log_density(params, rho, s))
            .collect();
        let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return Err(Error::accuracy(
                "in-plane density vanishes on the whole table".to_string(),
                0.0,
            ));
        }
        let w: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
        let mut cdf = vec![0.0; NODES];
        for j in 1..NODES {
            cdf[j] = cdf[j - 1] + 0.5 * (w[j] + w[j - 1]) * (nodes[j] - nodes[j - 1]);
        }
        let total = cdf[NODES - 1];
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::accuracy(
                format!("in-plane CDF table construction failed (total {total})"),
                total,
            ));
        }
        for c in cdf.iter_mut() {
            *c /= total;
        }
        Ok(InPlaneSampler { nodes, cdf })
    }

    /// One draw of the in-plane radius.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let hi = self.cdf.partition_point(|c| *c < u).min(self.cdf.len() - 1);
        if hi == 0 {
            return self.nodes[0];
        }
        let lo = hi - 1;
        let span = self.cdf[hi] - self.cdf[lo];
        let frac = if span > 0.0 { (u - self.cdf[lo]) / span } else { 0.0 };
        self.nodes[lo] + frac * (self.nodes[hi] - self.nodes[lo])
    }
}
