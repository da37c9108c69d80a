//! Command-line front end: estimator runs, bounds tables, scaling sweeps,
//! the random-polytope experiment, and the verification gate.
//!
//! Every flag may also come from a JSON config file (`--config`); explicit
//! command-line flags win. The effective seed resolves as flag, then config,
//! then the `EXPO_SURF_SEED` environment variable, then 0x5EED.

use crate::bodies::ConvexBody;
use crate::bounds::{self, ConstantVariant};
use crate::error::{Error, Result};
use crate::measure::MeasureParams;
use crate::randpoly;
use crate::rng::DEFAULT_SEED;
use crate::surface::{self, EstimateOpts};
use crate::verify;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use std::io::Write;
use std::path::PathBuf;

pub const SEED_ENV: &str = "EXPO_SURF_SEED";

#[derive(Debug, Parser)]
#[command(name = "expo-surf", version, about = "Surface area under exp(-|y|^p / p) measures")]
pub struct Cli {
    /// JSON config file; command-line flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the surface area of one body.
    Surface(SurfaceArgs),
    /// Print the theoretical bounds and constants for one (n, p).
    Bounds(BoundsArgs),
    /// Sweep n at fixed p and fit the growth exponent.
    Scaling(ScalingArgs),
    /// Run the random-polytope experiment.
    Randpoly(RandpolyArgs),
    /// Run the release-gate check suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    /// Body: inline JSON, a path to a JSON file, or a preset
    /// (ball, ball=R, cube, cube=H, slab=RHO).
    #[arg(long)]
    pub body: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    /// One of: exact, quadrature, shell_mc, facet_mc.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub samples: Option<u64>,
    /// Shell width override for shell_mc.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Which upper-bound constant to report as `upper_bound`.
    #[arg(long, value_parser = ["stated", "derived"])]
    pub variant: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[arg(long)]
    pub p: Option<f64>,
    /// Comma-separated dimensions, e.g. 8,12,16,24,32.
    #[arg(long = "n-list")]
    pub n_list: Option<String>,
    /// What to measure at each n.
    #[arg(long, value_parser = ["randpoly", "ball", "cube"])]
    pub target: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RandpolyArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Halfspace count override (default: the construction's own N).
    #[arg(long = "N")]
    pub n_halfspaces: Option<u64>,
    /// Offset override (default: the construction's own rho).
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Draws per facet and per trial.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Corrupt one frozen constant to exercise the failure path.
    #[arg(long, hide = true)]
    pub tamper: bool,
}

/// Format with 9 significant digits, the round-trip-stable output precision.
pub fn fmt9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Round to the 9-significant-digit output grid so JSON numbers match the
/// CSV precision.
fn round9(x: f64) -> f64 {
    if x.is_finite() { fmt9(x).parse().unwrap() } else { x }
}

fn round9_value(v: &mut Value) {
    match v {
        Value::Number(num) => {
            if let Some(f) = num.as_f64() {
                if num.as_i64().is_none() && num.as_u64().is_none() {
                    if let Some(r) = serde_json::Number::from_f64(round9(f)) {
                        *num = r;
                    }
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round9_value),
        Value::Object(o) => o.values_mut().for_each(round9_value),
        _ => {}
    }
}

fn print_json(mut v: Value) {
    round9_value(&mut v);
    println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
}

struct Config(Value);

impl Config {
    fn load(path: &Option<PathBuf>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Config(json!({})));
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("bad JSON in {}: {e}", path.display())))?;
        if !v.is_object() {
            return Err(Error::Config("config must be a JSON object".into()));
        }
        Ok(Config(v))
    }

    fn u64(&self, key: &str) -> Option<u64> {
        self.0.get(key).and_then(Value::as_u64)
    }
    fn usize(&self, key: &str) -> Option<usize> {
        self.0.get(key).and_then(Value::as_u64).map(|v| v as usize)
    }
    fn f64(&self, key: &str) -> Option<f64> {
        self.0.get(key).and_then(Value::as_f64)
    }
    fn string(&self, key: &str) -> Option<String> {
        self.0.get(key).and_then(Value::as_str).map(str::to_owned)
    }
}

fn resolve_seed(flag: Option<u64>, cfg: &Config) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(s) = cfg.u64("seed") {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(text) => text
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_ENV} is not a 64-bit integer: {text:?}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn resolve_workers(flag: Option<usize>, cfg: &Config) -> Result<usize> {
    let w = flag.or_else(|| cfg.usize("workers")).unwrap_or(1);
    if w == 0 {
        return Err(Error::Config("workers must be >= 1".into()));
    }
    Ok(w)
}

fn require<T>(value: Option<T>, name: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing required parameter `{name}`")))
}

fn parse_body(spec: &str, params: &MeasureParams) -> Result<ConvexBody> {
    let n = params.n();
    if spec.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(spec)
            .map_err(|e| Error::Config(format!("bad body JSON: {e}")))?;
        return ConvexBody::from_json(&v);
    }
    if let Some(path) = spec.strip_prefix('@') {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read body file {path}: {e}")))?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("bad body JSON in {path}: {e}")))?;
        return ConvexBody::from_json(&v);
    }
    let (kind, arg) = match spec.split_once('=') {
        Some((k, a)) => (k, Some(a)),
        None => (spec, None),
    };
    let parsed = arg
        .map(|a| {
            a.parse::<f64>()
                .map_err(|_| Error::Config(format!("bad numeric body parameter {a:?}")))
        })
        .transpose()?;
    match kind {
        "ball" => {
            let r = match parsed {
                Some(r) => r,
                None => params.radial_mode()?,
            };
            ConvexBody::ball(n, r)
        }
        "cube" => {
            let h = match parsed {
                Some(h) => h,
                None => params.radial_mode()? / (n as f64).sqrt(),
            };
            ConvexBody::cube(n, h)
        }
        "slab" => {
            let rho = require(parsed, "slab offset (use slab=RHO)")?;
            let mut normal = vec![0.0; n];
            normal[0] = 1.0;
            ConvexBody::slab(n, rho, normal)
        }
        other => Err(Error::Config(format!(
            "unknown body {other:?}; use inline JSON, @file, ball[=R], cube[=H], or slab=RHO"
        ))),
    }
}

fn parse_n_list(text: &str) -> Result<Vec<usize>> {
    let ns: Vec<usize> = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad dimension {t:?} in n-list")))
        })
        .collect::<Result<_>>()?;
    if ns.is_empty() {
        return Err(Error::Config("n-list must be nonempty".into()));
    }
    Ok(ns)
}

fn parse_variant(text: Option<String>) -> Result<ConstantVariant> {
    match text.as_deref() {
        None | Some("derived") => Ok(ConstantVariant::Derived),
        Some("stated") => Ok(ConstantVariant::Stated),
        Some(other) => Err(Error::Config(format!("unknown variant {other:?}"))),
    }
}

/// Write CSV to `output` (stdout when None). The first line is a comment
/// recording the (seed, workers) pair that makes the bytes reproducible.
fn emit_csv(output: &Option<PathBuf>, seed: u64, workers: usize, body: &str) -> Result<()> {
    let text = format!("# seed={seed} workers={workers}\n{body}");
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Resource(format!("cannot write {}: {e}", path.display()))),
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Error::Resource(format!("stdout: {e}")))
        }
    }
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let se = if k > 2.0 { (ss_res / (k - 2.0) / sxx).sqrt() } else { 0.0 };
    (slope, se)
}

/// Run one parsed command; Ok carries the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    let cfg = Config::load(&cli.config)?;
    match cli.command {
        Command::Surface(args) => run_surface(args, &cfg),
        Command::Bounds(args) => run_bounds(args, &cfg),
        Command::Scaling(args) => run_scaling(args, &cfg),
        Command::Randpoly(args) => run_randpoly(args, &cfg),
        Command::Verify(args) => run_verify(args, &cfg),
    }
}

fn run_surface(args: SurfaceArgs, cfg: &Config) -> Result<i32> {
    let n = require(args.n.or_else(|| cfg.usize("n")), "n")?;
    let p = require(args.p.or_else(|| cfg.f64("p")), "p")?;
    let params = MeasureParams::new(n, p)?;
    let body_spec = require(args.body.or_else(|| cfg.string("body")), "body")?;
    let body = parse_body(&body_spec, &params)?;
    let method = args
        .method
        .or_else(|| cfg.string("method"))
        .unwrap_or_else(|| "shell_mc".into());
    let estimator = surface::lookup(&method)
        .ok_or_else(|| Error::Config(format!("unknown method {method:?}")))?;
    if !estimator.supports(&body) {
        return Err(Error::Unsupported(format!(
            "method {method} does not support this body type"
        )));
    }
    let opts = EstimateOpts {
        samples: args.samples.or_else(|| cfg.u64("samples")).unwrap_or(100_000),
        epsilon: args.epsilon.or_else(|| cfg.f64("epsilon")),
        seed: resolve_seed(args.seed, cfg)?,
        workers: resolve_workers(args.workers, cfg)?,
        ..EstimateOpts::default()
    };
    let est = estimator.estimate(&params, &body, &opts)?;
    print_json(json!({
        "n": n,
        "p": p,
        "body": body.to_json(),
        "seed": opts.seed,
        "workers": opts.workers,
        "estimate": serde_json::to_value(&est).expect("serializable"),
    }));
    Ok(0)
}

fn run_bounds(args: BoundsArgs, cfg: &Config) -> Result<i32> {
    let n = require(args.n.or_else(|| cfg.usize("n")), "n")?;
    let p = require(args.p.or_else(|| cfg.f64("p")), "p")?;
    let variant = parse_variant(args.variant.or_else(|| cfg.string("variant")))?;
    let report = bounds::theorem_bounds(&MeasureParams::new(n, p)?)?;
    let upper = match variant {
        ConstantVariant::Stated => report.upper_bound_as_stated,
        ConstantVariant::Derived => report.upper_bound_as_derived,
    };
    let mut v = serde_json::to_value(&report).expect("serializable");
    v["variant"] = json!(match variant {
        ConstantVariant::Stated => "stated",
        ConstantVariant::Derived => "derived",
    });
    v["upper_bound"] = json!(upper);
    print_json(v);
    Ok(0)
}

fn run_scaling(args: ScalingArgs, cfg: &Config) -> Result<i32> {
    let p = require(args.p.or_else(|| cfg.f64("p")), "p")?;
    let n_list = parse_n_list(&require(
        args.n_list.or_else(|| cfg.string("n_list")),
        "n-list",
    )?)?;
    if n_list.len() < 4 {
        return Err(Error::Config(format!(
            "scaling needs at least 4 dimensions, got {}",
            n_list.len()
        )));
    }
    let target = args
        .target
        .or_else(|| cfg.string("target"))
        .unwrap_or_else(|| "randpoly".into());
    let trials = args.trials.or_else(|| cfg.usize("trials")).unwrap_or(64);
    let samples = args.samples.or_else(|| cfg.u64("samples")).unwrap_or(20_000);
    let seed = resolve_seed(args.seed, cfg)?;
    let workers = resolve_workers(args.workers, cfg)?;
    let output = args.output.or_else(|| cfg.string("output").map(PathBuf::from));

    let mut csv = String::from("n,mean,stderr,lower_bound,upper_as_derived,rough_bound\n");
    let mut lns = Vec::new();
    let mut lmeans = Vec::new();
    for &n in &n_list {
        let params = MeasureParams::new(n, p)?;
        let report = bounds::theorem_bounds(&params)?;
        let (mean, stderr) = match target.as_str() {
            "randpoly" => {
                let opts = EstimateOpts {
                    seed: crate::rng::child_seed(seed, n as u64),
                    workers,
                    ..EstimateOpts::default()
                };
                let res = randpoly::run_experiment(&params, trials, samples, &opts)?;
                (res.mean, res.std_error)
            }
            "ball" => {
                let r = params.radial_mode()?;
                (surface::sphere_surface_exact(&params, r)?.value, 0.0)
            }
            "cube" => {
                let h = params.radial_mode()? / (n as f64).sqrt();
                let body = ConvexBody::cube(n, h)?;
                let opts = EstimateOpts {
                    samples,
                    seed: crate::rng::child_seed(seed, n as u64),
                    workers,
                    ..EstimateOpts::default()
                };
                let est = surface::facet_estimate(&params, &body, &opts)?;
                (est.value, est.std_error)
            }
            other => return Err(Error::Config(format!("unknown target {other:?}"))),
        };
        csv.push_str(&format!(
            "{n},{},{},{},{},{}\n",
            fmt9(mean),
            fmt9(stderr),
            fmt9(report.lower_bound),
            fmt9(report.upper_bound_as_derived),
            fmt9(report.rough_bound),
        ));
        if mean > 0.0 {
            lns.push((n as f64).ln());
            lmeans.push(mean.ln());
        }
    }
    emit_csv(&output, seed, workers, &csv)?;
    if lns.len() < 4 {
        return Err(Error::accuracy(
            "too few positive means to fit a slope",
            f64::NAN,
        ));
    }
    let (slope, slope_stderr) = least_squares(&lns, &lmeans);
    print_json(json!({
        "p": p,
        "target": target,
        "seed": seed,
        "workers": workers,
        "slope": slope,
        "slope_stderr": slope_stderr,
        "theory": 0.75 - 1.0 / p,
    }));
    Ok(0)
}

fn run_randpoly(args: RandpolyArgs, cfg: &Config) -> Result<i32> {
    let n = require(args.n.or_else(|| cfg.usize("n")), "n")?;
    let p = require(args.p.or_else(|| cfg.f64("p")), "p")?;
    let params = MeasureParams::new(n, p)?;
    let trials = args.trials.or_else(|| cfg.usize("trials")).unwrap_or(64);
    let samples = args.samples.or_else(|| cfg.u64("samples")).unwrap_or(20_000);
    let seed = resolve_seed(args.seed, cfg)?;
    let workers = resolve_workers(args.workers, cfg)?;
    let output = args.output.or_else(|| cfg.string("output").map(PathBuf::from));

    let n_halfspaces = args.n_halfspaces.or_else(|| cfg.u64("N"));
    let rho = args.rho.or_else(|| cfg.f64("rho"));
    let defaults = randpoly::construction_parameters(&params);
    let override_params = match (n_halfspaces, rho) {
        (None, None) => None,
        (nh, r) => {
            let pp = defaults.as_ref().ok().copied();
            Some((
                nh.or(pp.map(|d| d.n_halfspaces))
                    .ok_or_else(|| Error::Config("need --N when defaults are unavailable".into()))?,
                r.or(pp.map(|d| d.rho))
                    .ok_or_else(|| Error::Config("need --rho when defaults are unavailable".into()))?,
            ))
        }
    };

    let opts = EstimateOpts { seed, workers, ..EstimateOpts::default() };
    let res = randpoly::run_experiment_with(&params, trials, samples, &opts, override_params)?;
    emit_csv(&output, seed, workers, &randpoly::records_csv(&res.records, fmt9))?;

    let (used_n, used_rho) = override_params
        .or_else(|| defaults.ok().map(|d| (d.n_halfspaces, d.rho)))
        .expect("experiment ran, so parameters resolved");
    let expected = bounds::expected_random_polytope_surface(&params, used_n, used_rho)?;
    let report = bounds::theorem_bounds(&params)?;
    print_json(json!({
        "n": n,
        "p": p,
        "N": used_n,
        "rho": used_rho,
        "trials": trials,
        "samples": samples,
        "seed": seed,
        "workers": workers,
        "mean": res.mean,
        "std_error": res.std_error,
        "expected": expected,
        "lower_bound": report.lower_bound,
    }));
    Ok(0)
}

fn run_verify(args: VerifyArgs, cfg: &Config) -> Result<i32> {
    let seed = resolve_seed(args.seed, cfg)?;
    let report = verify::run(seed, args.tamper);
    let all_passed = report.all_passed;
    print_json(serde_json::to_value(&report).expect("serializable"));
    Ok(if all_passed { 0 } else { 1 })
}
