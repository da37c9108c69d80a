//! The random halfspace-polytope construction achieving the lower bound:
//! parameters, sampling, and surface-area experiments cross-checked against
//! the expectation integral.

use crate::bodies::ConvexBody;
use crate::error::{Error, Result};
use crate::measure::{norm, MeasureParams};
use crate::rng::{child_seed, substream};
use crate::surface::{facet_estimate, EstimateOpts, SurfaceEstimate};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

/// Hard cap on the halfspace count; it grows like e^(sqrt(n)/2).
pub const MAX_HALFSPACES: u64 = 10_000_000;

/// The construction's parameters: offset rho = n^(1/p-1/4), radial window
/// half-width W = n^(1/p-1/2), and halfspace count
/// N = round(sqrt(2 pi) e^(-5/4) n^(1/4) e^(sqrt(n)/2)).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConstructionParameters {
    pub rho: f64,
    pub window: f64,
    pub n_halfspaces: u64,
}

/// One trial of the experiment; one CSV row.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRecord {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub p: f64,
    pub n_halfspaces: u64,
    pub rho: f64,
    pub estimate: SurfaceEstimate,
    /// Full-facet cross-check, run when the facet count permits.
    #[serde(skip)]
    pub estimate_full: Option<SurfaceEstimate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub mean: f64,
    pub std_error: f64,
    pub records: Vec<ExperimentRecord>,
}

pub fn construction_parameters(params: &MeasureParams) -> Result<ConstructionParameters> {
    if params.n() < 4 {
        return Err(Error::domain("construction parameters require n >= 4"));
    }
    let n = params.n() as f64;
    let p = params.p();
    let count = (2.0 * std::f64::consts::PI).sqrt() / 1.25_f64.exp()
        * n.powf(0.25)
        * (0.5 * n.sqrt()).exp();
    if !(count <= MAX_HALFSPACES as f64) {
        return Err(Error::Resource(format!(
            "halfspace count {count:.3e} exceeds {MAX_HALFSPACES}; choose a smaller n"
        )));
    }
    Ok(ConstructionParameters {
        rho: n.powf(1.0 / p - 0.25),
        window: n.powf(1.0 / p - 0.5),
        n_halfspaces: (count.round() as u64).max(1),
    })
}

/// A random polytope: N i.i.d. uniform directions on the sphere, all at
/// common offset rho. May be unbounded for small N; the facet estimator
/// does not need boundedness.
pub fn construct<R: Rng + ?Sized>(
    params: &MeasureParams,
    n_halfspaces: u64,
    rho: f64,
    rng: &mut R,
) -> Result<ConvexBody> {
    if n_halfspaces < 1 {
        return Err(Error::domain("need at least one halfspace"));
    }
    let n = params.n();
    let mut directions = Vec::with_capacity(n_halfspaces as usize);
    for _ in 0..n_halfspaces {
        loop {
            let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
            let nn = norm(&v);
            if nn > 1e-12 {
                v.iter_mut().for_each(|x| *x /= nn);
                directions.push(v);
                break;
            }
        }
    }
    ConvexBody::halfspace_intersection(n, rho, directions)
}

/// Maximum facet count for which the full-facet cross-check also runs.
const FULL_MODE_LIMIT: u64 = 64;

/// Repeated construction + facet estimation. Trials are parallelized, each
/// with its own substream family, so the result is deterministic for a
/// fixed (seed, workers).
pub fn run_experiment(
    params: &MeasureParams,
    trials: usize,
    samples_per_facet: u64,
    opts: &EstimateOpts,
) -> Result<ExperimentResult> {
    run_experiment_with(params, trials, samples_per_facet, opts, None)
}

/// As `run_experiment`, with an optional (N, rho) override replacing the
/// construction's own parameters.
pub fn run_experiment_with(
    params: &MeasureParams,
    trials: usize,
    samples_per_facet: u64,
    opts: &EstimateOpts,
    override_params: Option<(u64, f64)>,
) -> Result<ExperimentResult> {
    if trials < 2 {
        return Err(Error::domain("experiment needs at least 2 trials"));
    }
    let (n_halfspaces, rho) = match override_params {
        Some(pair) => pair,
        None => {
            let pp = construction_parameters(params)?;
            (pp.n_halfspaces, pp.rho)
        }
    };
    let records: Vec<Result<ExperimentRecord>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let trial_seed = child_seed(opts.seed, trial as u64);
            let mut rng = substream(trial_seed, 0);
            let body = construct(params, n_halfspaces, rho, &mut rng)?;
            let trial_opts = EstimateOpts {
                samples: samples_per_facet,
                seed: child_seed(trial_seed, 1),
                single_facet: true,
                workers: 1,
                ..opts.clone()
            };
            let estimate = facet_estimate(params, &body, &trial_opts)?;
            let estimate_full = if n_halfspaces <= FULL_MODE_LIMIT {
                let full_opts = EstimateOpts {
                    single_facet: false,
                    seed: child_seed(trial_seed, 2),
                    ..trial_opts.clone()
                };
                Some(facet_estimate(params, &body, &full_opts)?)
            } else {
                None
            };
            Ok(ExperimentRecord {
                trial,
                seed: trial_seed,
                n: params.n(),
                p: params.p(),
                n_halfspaces,
                rho,
                estimate,
                estimate_full,
            })
        })
        .collect();
    let records: Vec<ExperimentRecord> = records.into_iter().collect::<Result<_>>()?;

    let k = records.len() as f64;
    let mean = records.iter().map(|r| r.estimate.value).sum::<f64>() / k;
    let var = records
        .iter()
        .map(|r| (r.estimate.value - mean).powi(2))
        .sum::<f64>()
        / (k - 1.0);
    Ok(ExperimentResult {
        mean,
        std_error: (var / k).sqrt(),
        records,
    })
}

/// CSV rows for the experiment records:
/// `trial,seed,n,p,N,rho,estimate,std_error,method`.
pub fn records_csv(records: &[ExperimentRecord], fmt: impl Fn(f64) -> String) -> String {
    let mut out = String::from("trial,seed,n,p,N,rho,estimate,std_error,method\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.trial,
            r.seed,
            r.n,
            fmt(r.p),
            r.n_halfspaces,
            fmt(r.rho),
            fmt(r.estimate.value),
            fmt(r.estimate.std_error),
            r.estimate.method.as_str()
        ));
    }
    out
}
