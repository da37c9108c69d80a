//! Mutually cross-validating evaluators of the gamma_p surface area:
//! closed form for spheres, 1-D quadrature for hyperplanes and slabs, shell
//! Monte Carlo from the Minkowski-content definition, and per-facet Monte
//! Carlo from the boundary integral.
//!
//! Each evaluator sits behind the [`SurfaceEstimator`] trait and is
//! registered by name, so the CLI and experiment drivers select methods at
//! runtime.

mod inplane;

pub use inplane::{in_plane_log_density, in_plane_truncation, InPlaneSampler};

use crate::bodies::{ConvexBody, DistanceFlag};
use crate::error::{Error, Result};
use crate::measure::{dot, MeasureParams};
use crate::quadrature::{quadrature_log, QuadratureSpec};
use crate::rng::{substream, DEFAULT_SEED};
use crate::special::{log_j, log_unit_ball_volume};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Which evaluator produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Quadrature,
    ShellMc,
    FacetMc,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Quadrature => "quadrature",
            Method::ShellMc => "shell_mc",
            Method::FacetMc => "facet_mc",
        }
    }
}

/// The universal estimator output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceEstimate {
    pub value: f64,
    /// 0 for the deterministic methods.
    pub std_error: f64,
    pub method: Method,
    pub samples: u64,
    /// Shell width used, for the shell estimator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

/// Sampling controls shared by the Monte Carlo evaluators.
///
/// The sample budget is split into `workers` fixed chunks with substreams
/// seeded from (seed, chunk index); the reduction is an ordered sum of
/// per-chunk tallies, so results are bit-deterministic for a fixed
/// (seed, workers).
#[derive(Debug, Clone)]
pub struct EstimateOpts {
    /// Total draws for the shell estimator; draws per facet for the facet
    /// estimator.
    pub samples: u64,
    /// Shell width override; default 0.05 n^(1/p - 1/2).
    pub epsilon: Option<f64>,
    /// Extrapolate the shell estimate from (eps, eps/2) as 2 S(eps/2) - S(eps).
    pub richardson: bool,
    pub workers: usize,
    pub seed: u64,
    /// Estimate one facet's conditional mass and multiply by the facet
    /// count. Valid when facets are exchangeable, as in the random polytope
    /// construction.
    pub single_facet: bool,
}

impl Default for EstimateOpts {
    fn default() -> Self {
        EstimateOpts {
            samples: 100_000,
            epsilon: None,
            richardson: true,
            workers: 1,
            seed: DEFAULT_SEED,
            single_facet: false,
        }
    }
}

/// gamma_p surface area of the sphere of radius `r`:
/// exp((n-1) ln r - r^p/p - ln J_{n-1,p}).
pub fn sphere_surface_exact(params: &MeasureParams, r: f64) -> Result<SurfaceEstimate> {
    if !(r > 0.0) {
        return Err(Error::domain("sphere radius must be positive"));
    }
    let n = params.n() as f64;
    let p = params.p();
    let log_value = (n - 1.0) * r.ln() - r.powf(p) / p - log_j(n - 1.0, p)?;
    let value = if log_value < -745.0 { 0.0 } else { log_value.exp() };
    Ok(SurfaceEstimate {
        value,
        std_error: 0.0,
        method: Method::Exact,
        samples: 0,
        epsilon: None,
    })
}

/// gamma_p surface area of a hyperplane at distance `rho` from the origin,
/// by radial quadrature in the plane.
pub fn hyperplane_surface(params: &MeasureParams, rho: f64) -> Result<SurfaceEstimate> {
    if params.n() < 2 {
        return Err(Error::domain("hyperplane surface requires n >= 2"));
    }
    if !(rho >= 0.0) {
        return Err(Error::domain("hyperplane offset must be nonnegative"));
    }
    let n = params.n();
    let t_max = in_plane_truncation(params)?;
    let spec = QuadratureSpec::default();
    let integral = quadrature_log(
        |s| in_plane_log_density(params, rho, s),
        0.0,
        t_max,
        &spec,
    )?;
    let log_plane = (n as f64 - 1.0).ln() + log_unit_ball_volume(n - 1)?;
    let value = (params.log_c() + log_plane + integral).exp();
    Ok(SurfaceEstimate {
        value,
        std_error: 0.0,
        method: Method::Quadrature,
        samples: 0,
        epsilon: None,
    })
}

/// Rough upper bound J_{n+p-2,p} / J_{n-1,p} on the gamma_p surface area of
/// any convex body.
pub fn rough_upper_bound(params: &MeasureParams) -> Result<f64> {
    if params.n() < 2 {
        return Err(Error::domain("rough upper bound requires n >= 2"));
    }
    let n = params.n() as f64;
    let p = params.p();
    Ok((log_j(n + p - 2.0, p)? - log_j(n - 1.0, p)?).exp())
}

/// Default shell width: matches the width of the radial concentration zone
/// so the shell sits in a near-linear regime of the distance law.
pub fn default_shell_width(params: &MeasureParams) -> f64 {
    0.05 * (params.n() as f64).powf(1.0 / params.p() - 0.5)
}

fn chunk_sizes(total: u64, workers: usize) -> Vec<u64> {
    let w = workers.max(1) as u64;
    let base = total / w;
    let rem = total % w;
    (0..w).map(|i| base + u64::from(i < rem)).collect()
}

/// Binomial tally split over fixed chunks; ordered reduction keeps the
/// result independent of thread scheduling.
fn parallel_hits<F>(total: u64, workers: usize, count: F) -> u64
where
    F: Fn(u64, u64) -> u64 + Sync,
{
    chunk_sizes(total, workers)
        .into_par_iter()
        .enumerate()
        .map(|(i, size)| count(i as u64, size))
        .collect::<Vec<u64>>()
        .into_iter()
        .sum()
}

/// Shell Monte Carlo estimate of the surface area from the fraction of
/// gamma_p samples within distance eps outside the body.
///
/// Restricted to bodies with exact Euclidean distance; using the
/// halfspace-intersection lower bound here would bias the estimate upward
/// by an uncontrolled factor.
pub fn shell_estimate(
    params: &MeasureParams,
    body: &ConvexBody,
    opts: &EstimateOpts,
) -> Result<SurfaceEstimate> {
    if body.dim() != params.n() {
        return Err(Error::domain("body dimension does not match measure dimension"));
    }
    let origin = vec![0.0; params.n()];
    if body.distance(&origin)?.1 != DistanceFlag::Exact {
        return Err(Error::Unsupported(
            "shell estimator requires a body with exact distance (ball, cube, slab)".to_string(),
        ));
    }
    if opts.samples < 1000 {
        return Err(Error::domain("shell estimator needs at least 10^3 samples"));
    }
    let eps = opts.epsilon.unwrap_or_else(|| default_shell_width(params));
    if !(eps > 0.0) {
        return Err(Error::domain("shell width must be positive"));
    }
    let workers = opts.workers.max(1);

    let raw = |eps: f64, stream_base: u64| -> Result<(f64, f64)> {
        let hits = parallel_hits(opts.samples, workers, |chunk, size| {
            let mut rng = substream(opts.seed, stream_base + chunk);
            let mut buf = vec![0.0; params.n()];
            let mut h = 0u64;
            for _ in 0..size {
                params.sample_into(&mut buf, &mut rng);
                let (d, _) = body.distance(&buf).expect("dimension checked");
                if d > 0.0 && d <= eps {
                    h += 1;
                }
            }
            h
        });
        let m = opts.samples as f64;
        let frac = hits as f64 / m;
        let se = (frac * (1.0 - frac) / m).sqrt() / eps;
        Ok((frac / eps, se))
    };

    let (value, std_error, samples) = if opts.richardson {
        let (full, se_full) = raw(eps, 0)?;
        let (half, se_half) = raw(eps / 2.0, workers as u64)?;
        (
            (2.0 * half - full).max(0.0),
            (4.0 * se_half * se_half + se_full * se_full).sqrt(),
            2 * opts.samples,
        )
    } else {
        let (v, se) = raw(eps, 0)?;
        (v, se, opts.samples)
    };

    Ok(SurfaceEstimate {
        value,
        std_error,
        method: Method::ShellMc,
        samples,
        epsilon: Some(eps),
    })
}

/// Facet Monte Carlo: per facet, the hyperplane surface measure times the
/// conditional in-facet probability under the restricted density.
pub fn facet_estimate(
    params: &MeasureParams,
    body: &ConvexBody,
    opts: &EstimateOpts,
) -> Result<SurfaceEstimate> {
    if body.dim() != params.n() {
        return Err(Error::domain("body dimension does not match measure dimension"));
    }
    if params.n() < 2 {
        return Err(Error::domain("facet estimator requires n >= 2"));
    }
    let facets = body.facets()?;
    if facets.is_empty() {
        return Err(Error::Unsupported("body has no facets".to_string()));
    }
    let workers = opts.workers.max(1);
    let total_facets = facets.len();
    let active: Vec<usize> = if opts.single_facet {
        match facets.iter().position(|f| !f.is_covered()) {
            Some(i) => vec![i],
            None => Vec::new(),
        }
    } else {
        (0..total_facets).filter(|&i| !facets[i].is_covered()).collect()
    };

    // Hyperplane measures and inverse-CDF tables are cached per offset;
    // cubes and the random polytopes share one offset across all facets.
    let mut plane_cache: HashMap<u64, (f64, InPlaneSampler)> = HashMap::new();
    for &i in &active {
        let key = facets[i].offset.to_bits();
        if let std::collections::hash_map::Entry::Vacant(slot) = plane_cache.entry(key) {
            let h = hyperplane_surface(params, facets[i].offset)?.value;
            let sampler = InPlaneSampler::new(params, facets[i].offset)?;
            slot.insert((h, sampler));
        }
    }

    let n = params.n();
    let m = opts.samples;
    let mut value = 0.0;
    let mut variance = 0.0;
    for (slot, &i) in active.iter().enumerate() {
        let facet = &facets[i];
        let (h_plane, sampler) = &plane_cache[&facet.offset.to_bits()];
        let hits = parallel_hits(m, workers, |chunk, size| {
            let mut rng = substream(opts.seed, (slot as u64) * workers as u64 + chunk);
            let mut point = vec![0.0; n];
            let mut hcount = 0u64;
            for _ in 0..size {
                let s = sampler.sample(&mut rng);
                sample_on_hyperplane(&facet.normal, facet.offset, s, &mut point, &mut rng);
                if facet.on_facet(&point) {
                    hcount += 1;
                }
            }
            hcount
        });
        let frac = hits as f64 / m as f64;
        let mut mass = h_plane * frac;
        let mut var = h_plane * h_plane * frac * (1.0 - frac) / m as f64;
        if opts.single_facet {
            mass *= total_facets as f64;
            var *= (total_facets as f64).powi(2);
        }
        value += mass;
        variance += var;
    }

    Ok(SurfaceEstimate {
        value,
        std_error: variance.sqrt(),
        method: Method::FacetMc,
        samples: m * active.len() as u64,
        epsilon: None,
    })
}

/// Writes `offset * normal + s * v` into `point`, with `v` uniform on the
/// unit sphere of the normal's orthogonal complement.
fn sample_on_hyperplane<R: Rng + ?Sized>(
    normal: &[f64],
    offset: f64,
    s: f64,
    point: &mut [f64],
    rng: &mut R,
) {
    loop {
        for v in point.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        let along = dot(point, normal);
        let mut norm2 = 0.0;
        for (v, u) in point.iter_mut().zip(normal) {
            *v -= along * u;
            norm2 += *v * *v;
        }
        if norm2 > 1e-300 {
            let scale = s / norm2.sqrt();
            for (v, u) in point.iter_mut().zip(normal) {
                *v = *v * scale + offset * u;
            }
            return;
        }
    }
}

/// A surface-area evaluation strategy, selectable by name at runtime.
pub trait SurfaceEstimator: Sync {
    fn name(&self) -> &'static str;
    fn supports(&self, body: &ConvexBody) -> bool;
    fn estimate(
        &self,
        params: &MeasureParams,
        body: &ConvexBody,
        opts: &EstimateOpts,
    ) -> Result<SurfaceEstimate>;
}

/// Closed form for spheres.
pub struct ExactSphere;

impl SurfaceEstimator for ExactSphere {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn supports(&self, body: &ConvexBody) -> bool {
        matches!(body, ConvexBody::Ball { .. })
    }

    fn estimate(
        &self,
        params: &MeasureParams,
        body: &ConvexBody,
        _opts: &EstimateOpts,
    ) -> Result<SurfaceEstimate> {
        match body {
            ConvexBody::Ball { radius, .. } => sphere_surface_exact(params, *radius),
            _ => Err(Error::Unsupported(
                "exact estimator supports balls only".to_string(),
            )),
        }
    }
}

/// Deterministic quadrature for slabs (two parallel hyperplanes).
pub struct QuadratureSlab;

impl SurfaceEstimator for QuadratureSlab {
    fn name(&self) -> &'static str {
        "quadrature"
    }

    fn supports(&self, body: &ConvexBody) -> bool {
        matches!(body, ConvexBody::Slab { .. })
    }

    fn estimate(
        &self,
        params: &MeasureParams,
        body: &ConvexBody,
        _opts: &EstimateOpts,
    ) -> Result<SurfaceEstimate> {
        match body {
            ConvexBody::Slab { offset, .. } => {
                let one = hyperplane_surface(params, *offset)?;
                Ok(SurfaceEstimate {
                    value: 2.0 * one.value,
                    ..one
                })
            }
            _ => Err(Error::Unsupported(
                "quadrature estimator supports slabs only".to_string(),
            )),
        }
    }
}

/// Minkowski-shell Monte Carlo.
pub struct ShellMonteCarlo;

impl SurfaceEstimator for ShellMonteCarlo {
    fn name(&self) -> &'static str {
        "shell_mc"
    }

    fn supports(&self, body: &ConvexBody) -> bool {
        matches!(
            body,
            ConvexBody::Ball { .. } | ConvexBody::Cube { .. } | ConvexBody::Slab { .. }
        )
    }

    fn estimate(
        &self,
        params: &MeasureParams,
        body: &ConvexBody,
        opts: &EstimateOpts,
    ) -> Result<SurfaceEstimate> {
        shell_estimate(params, body, opts)
    }
}

/// Per-facet Monte Carlo.
pub struct FacetMonteCarlo;

impl SurfaceEstimator for FacetMonteCarlo {
    fn name(&self) -> &'static str {
        "facet_mc"
    }

    fn supports(&self, body: &ConvexBody) -> bool {
        matches!(
            body,
            ConvexBody::Cube { .. }
                | ConvexBody::Slab { .. }
                | ConvexBody::HalfspaceIntersection { .. }
        )
    }

    fn estimate(
        &self,
        params: &MeasureParams,
        body: &ConvexBody,
        opts: &EstimateOpts,
    ) -> Result<SurfaceEstimate> {
        facet_estimate(params, body, opts)
    }
}

static ESTIMATORS: [&dyn SurfaceEstimator; 4] =
    [&ExactSphere, &QuadratureSlab, &ShellMonteCarlo, &FacetMonteCarlo];

/// All registered evaluation strategies.
pub fn registry() -> &'static [&'static dyn SurfaceEstimator] {
    &ESTIMATORS
}

/// Strategy lookup by name.
pub fn lookup(name: &str) -> Option<&'static dyn SurfaceEstimator> {
    registry().iter().copied().find(|e| e.name() == name)
}
