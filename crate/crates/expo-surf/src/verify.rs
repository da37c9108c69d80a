//! Release-gate verification: a reduced-grid run of every module's
//! invariants, reported as named pass/fail checks.

use crate::bodies::ConvexBody;
use crate::bounds::{
    self, cap_probability, cap_probability_bound, constants, expected_random_polytope_surface,
};
use crate::measure::{delta_p, MeasureParams};
use crate::quadrature::{quadrature_log, QuadratureSpec};
use crate::randpoly;
use crate::rng::substream;
use crate::special::{
    inverse_regularized_gamma_p, laplace_second_order, log_gamma, log_j, log_j_laplace,
    log_unit_ball_volume,
};
use crate::surface::{
    facet_estimate, hyperplane_surface, registry, shell_estimate, sphere_surface_exact,
    EstimateOpts,
};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub total: usize,
    pub failed: usize,
    pub all_passed: bool,
    pub checks: Vec<Check>,
}

fn check(
    out: &mut Vec<Check>,
    name: &'static str,
    body: impl FnOnce() -> std::result::Result<String, String>,
) {
    let (passed, detail) = match body() {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    out.push(Check { name, passed, detail });
}

fn close(label: &str, got: f64, want: f64, tol: f64) -> std::result::Result<String, String> {
    if (got - want).abs() <= tol {
        Ok(format!("{label}: {got:.12e}"))
    } else {
        Err(format!("{label}: got {got:.12e}, want {want:.12e} (tol {tol:.1e})"))
    }
}

/// Run the full check suite. `tamper` deliberately corrupts one frozen
/// constant so the harness's failure path can be exercised.
pub fn run(seed: u64, tamper: bool) -> VerifyReport {
    let mut checks = Vec::new();
    let c = &mut checks;
    let spec = QuadratureSpec::default();

    check(c, "gamma_half", || {
        close(
            "ln Gamma(1/2)",
            log_gamma(0.5).map_err(|e| e.to_string())?,
            std::f64::consts::PI.sqrt().ln(),
            1e-13,
        )
    });
    check(c, "gamma_recurrence", || {
        let mut worst = 0.0_f64;
        let mut x = 0.5;
        while x <= 100.0 {
            let r = (log_gamma(x + 1.0).unwrap() - log_gamma(x).unwrap() - x.ln()).abs();
            worst = worst.max(r);
            x += 3.7;
        }
        if worst <= 1e-12 {
            Ok(format!("worst residual {worst:.2e}"))
        } else {
            Err(format!("worst residual {worst:.2e} > 1e-12"))
        }
    });
    check(c, "unit_ball_volumes", || {
        close("ln nu_1", log_unit_ball_volume(1).unwrap(), 2.0_f64.ln(), 1e-13)?;
        close("ln nu_2", log_unit_ball_volume(2).unwrap(), std::f64::consts::PI.ln(), 1e-13)?;
        close(
            "ln nu_3",
            log_unit_ball_volume(3).unwrap(),
            (4.0 * std::f64::consts::PI / 3.0).ln(),
            1e-13,
        )
    });
    check(c, "j_closed_form_trivial", || {
        close("ln J_{0,1}", log_j(0.0, 1.0).unwrap(), 0.0, 1e-14)?;
        close("ln J_{1,2}", log_j(1.0, 2.0).unwrap(), 0.0, 1e-14)
    });
    check(c, "j_closed_form_vs_quadrature", || {
        let mut worst = 0.0_f64;
        for &(a, p) in &[(0.0, 0.5), (50.0, 2.0), (200.0, 4.0), (120.0, 1.0)] {
            let shape = (a + 1.0) / p;
            let t = (p * inverse_regularized_gamma_p(shape, 1.0 - 1e-16).unwrap()).powf(1.0 / p);
            let q = quadrature_log(|x| if x > 0.0 { a * x.ln() - x.powf(p) / p } else { f64::NEG_INFINITY }, 0.0, t, &spec)
                .map_err(|e| e.to_string())?;
            worst = worst.max((q - log_j(a, p).unwrap()).abs());
        }
        if worst <= 1e-8 {
            Ok(format!("worst |closed - quadrature| {worst:.2e}"))
        } else {
            Err(format!("worst deviation {worst:.2e} > 1e-8"))
        }
    });
    check(c, "j_laplace_convergence", || {
        let dev = |a: f64| ((log_j_laplace(a, 2.0).unwrap() - log_j(a, 2.0).unwrap()).exp() - 1.0).abs();
        let (d2, d3, d4) = (dev(1e2), dev(1e3), dev(1e4));
        if d4 <= 1e-2 && d3 < d2 && d4 < d3 {
            Ok(format!("ratio deviations {d2:.2e} > {d3:.2e} > {d4:.2e}"))
        } else {
            Err(format!("deviations not improving: {d2:.2e}, {d3:.2e}, {d4:.2e}"))
        }
    });
    check(c, "laplace_second_order", || {
        close(
            "sqrt(2 pi / 100)",
            laplace_second_order(-1.0, 100.0).unwrap(),
            (2.0 * std::f64::consts::PI / 100.0).sqrt(),
            1e-14,
        )
    });
    check(c, "quadrature_half_gaussian", || {
        let q = quadrature_log(|t| -t * t / 2.0, 0.0, 40.0, &spec).map_err(|e| e.to_string())?;
        close("ln int", q, (std::f64::consts::PI / 2.0).sqrt().ln(), 1e-10)
    });
    check(c, "quadrature_sharp_moment", || {
        let q = quadrature_log(
            |t| if t > 0.0 { 199.0 * t.ln() - t * t / 2.0 } else { f64::NEG_INFINITY },
            0.0,
            60.0,
            &spec,
        )
        .map_err(|e| e.to_string())?;
        close("ln J_{199,2}", q, log_j(199.0, 2.0).unwrap(), 1e-9)
    });
    check(c, "radial_normalization", || {
        let mut worst = 0.0_f64;
        for &(n, p) in &[(10usize, 2.0), (30, 1.0), (100, 4.0), (5, 0.5)] {
            let m = MeasureParams::new(n, p).unwrap();
            let t = m.truncation_radius();
            let a = n as f64 - 1.0;
            let q = quadrature_log(
                |r| if r > 0.0 { a * r.ln() - r.powf(p) / p } else { f64::NEG_INFINITY },
                0.0,
                t,
                &spec,
            )
            .map_err(|e| e.to_string())?
                - log_j(a, p).unwrap();
            worst = worst.max(q.abs());
        }
        if worst <= 1e-8 {
            Ok(format!("worst |ln mass| {worst:.2e}"))
        } else {
            Err(format!("worst |ln mass| {worst:.2e} > 1e-8"))
        }
    });
    check(c, "radial_median_gaussian", || {
        let m = MeasureParams::new(2, 2.0).unwrap();
        close(
            "median |X|, n=2, p=2",
            m.radial_quantile(0.5).unwrap(),
            (2.0 * 2.0_f64.ln()).sqrt(),
            1e-10,
        )
    });
    check(c, "radial_mode", || {
        let m = MeasureParams::new(17, 3.0).unwrap();
        close("mode (n-1)^(1/p)", m.radial_mode().unwrap(), 16.0_f64.powf(1.0 / 3.0), 1e-12)
    });
    check(c, "sampler_moment", || {
        let m = MeasureParams::new(10, 2.0).unwrap();
        let mut rng = substream(seed, 7);
        let draws = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        let mut x = vec![0.0; 10];
        for _ in 0..draws {
            m.sample_into(&mut x, &mut rng);
            let v = crate::measure::norm(&x).powi(2);
            s += v;
            s2 += v * v;
        }
        let mean = s / draws as f64;
        let se = ((s2 / draws as f64 - mean * mean) / draws as f64).sqrt();
        close("E|X|^p / n", mean / 10.0, 1.0, 3.0 * se / 10.0)
    });
    check(c, "annulus_frozen", || {
        close("Delta_1", delta_p(1.0), 1.0 - (-1.0_f64).exp(), 1e-15)?;
        let a = MeasureParams::new(10, 2.0).unwrap().concentration_annulus().unwrap();
        let e = (-0.5_f64).exp();
        close("annulus inner", a.inner, 3.0 * e, 1e-12)?;
        close("annulus outer", a.outer, 3.0 * (2.0 - e), 1e-12)
    });
    check(c, "sphere_closed_form", || {
        let m = MeasureParams::new(2, 2.0).unwrap();
        close(
            "sphere n=2, r=1",
            sphere_surface_exact(&m, 1.0).unwrap().value,
            (-0.5_f64).exp(),
            1e-12,
        )
    });
    check(c, "hyperplane_origin_gaussian", || {
        let m = MeasureParams::new(8, 2.0).unwrap();
        close(
            "hyperplane rho=0",
            hyperplane_surface(&m, 0.0).unwrap().value,
            0.398942280401432678,
            1e-9,
        )
    });
    check(c, "hyperplane_offset_gaussian", || {
        let m = MeasureParams::new(8, 2.0).unwrap();
        close(
            "hyperplane rho=1",
            hyperplane_surface(&m, 1.0).unwrap().value,
            0.241970724519143365,
            1e-9,
        )
    });
    check(c, "slab_two_hyperplanes", || {
        let m = MeasureParams::new(6, 1.5).unwrap();
        let mut normal = vec![0.0; 6];
        normal[0] = 1.0;
        let slab = ConvexBody::slab(6, 1.2, normal).unwrap();
        let est = crate::surface::lookup("quadrature")
            .unwrap()
            .estimate(&m, &slab, &EstimateOpts::default())
            .map_err(|e| e.to_string())?;
        close(
            "slab vs 2 x hyperplane",
            est.value,
            2.0 * hyperplane_surface(&m, 1.2).unwrap().value,
            1e-10,
        )
    });
    check(c, "shell_vs_exact_ball", || {
        let m = MeasureParams::new(5, 2.0).unwrap();
        let ball = ConvexBody::ball(5, 2.0).unwrap();
        let exact = sphere_surface_exact(&m, 2.0).unwrap().value;
        let est = shell_estimate(
            &m,
            &ball,
            &EstimateOpts { samples: 200_000, seed, ..EstimateOpts::default() },
        )
        .map_err(|e| e.to_string())?;
        let tol = (4.0 * est.std_error).max(0.02 * exact);
        close("shell vs exact", est.value, exact, tol)
    });
    check(c, "facet_cube_gaussian", || {
        // p = 2 separates: one face of [-s, s]^5 carries
        // phi(s) (2 Phi(s) - 1)^4; ten faces total.
        let m = MeasureParams::new(5, 2.0).unwrap();
        let s = 1.0;
        let cube = ConvexBody::cube(5, s).unwrap();
        let est = facet_estimate(
            &m,
            &cube,
            &EstimateOpts { samples: 60_000, seed, ..EstimateOpts::default() },
        )
        .map_err(|e| e.to_string())?;
        let phi = (-s * s / 2.0_f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let inside = crate::special::regularized_gamma_p(0.5, s * s / 2.0).unwrap();
        let exact = 10.0 * phi * inside.powi(4);
        let tol = (3.0 * est.std_error).max(0.02 * exact);
        close("cube facets vs separable form", est.value, exact, tol)
    });
    check(c, "constants_gaussian", || {
        let k = constants(2.0).unwrap();
        close("C1(2)", k.c1, 2.786938680574733, 1e-12)?;
        close("C(2)", k.c, 0.6065306597126334, 1e-12)?;
        close("C_stated(2)", k.c_upper_as_stated, 1.2421674271154048, 1e-12)?;
        close("C_derived(2)", k.c_upper_as_derived, 0.8050444554984245, 1e-12)
    });
    check(c, "combined_certificate", || {
        let m = MeasureParams::new(16, 2.0).unwrap();
        let a = bounds::alpha_star(&m).unwrap();
        let (_, _, combined) = bounds::xi_lower_bounds(&m, 1.0, a).unwrap();
        close("combined at alpha*", combined, 0.5159270949943198, 1e-12)
    });
    check(c, "theorem_ordering", || {
        for &(n, p) in &[(16usize, 2.0), (32, 1.0), (64, 4.0)] {
            let r = bounds::theorem_bounds(&MeasureParams::new(n, p).unwrap()).unwrap();
            if !(r.lower_bound > 0.0
                && r.lower_bound < r.lower_bound_sharp
                && r.lower_bound < r.upper_bound_as_derived
                && r.lower_bound < r.upper_bound_as_stated
                && r.upper_bound_as_stated.max(r.upper_bound_as_derived) < r.rough_bound)
            {
                return Err(format!("ordering violated at n={n}, p={p}: {r:?}"));
            }
        }
        Ok("lower < sharp-lower, lower < both uppers < rough".into())
    });
    check(c, "cap_probability_origin", || {
        close("p(r) at rho=0", cap_probability(8, 1.7, 0.0).unwrap(), 0.5, 1e-10)
    });
    check(c, "cap_probability_n3", || {
        // n = 3: the angular integrand is constant, so
        // p(r) = (R - rho) / (2 R) with R = sqrt(r^2 + rho^2).
        let (r, rho) = (2.0_f64, 0.7_f64);
        let big_r = (r * r + rho * rho).sqrt();
        close(
            "n=3 closed form",
            cap_probability(3, r, rho).unwrap(),
            (big_r - rho) / (2.0 * big_r),
            1e-10,
        )
    });
    check(c, "cap_bound_dominates", || {
        // Valid on the construction's radial window sqrt(n) +/- 1 at p = 2.
        let n = 64;
        let rho = (n as f64).powf(0.25);
        let bound = cap_probability_bound(n);
        for &w in &[-1.0, 0.0, 1.0] {
            let r = (n as f64).sqrt() + w;
            let p = cap_probability(n, r, rho).unwrap();
            if p > bound * 1.25 {
                return Err(format!("p({r}) = {p:.3e} exceeds bound {bound:.3e}"));
            }
        }
        Ok(format!("bound {bound:.3e} dominates on the window"))
    });
    check(c, "expectation_single_halfspace", || {
        let m = MeasureParams::new(8, 2.0).unwrap();
        let e1 = expected_random_polytope_surface(&m, 1, 1.5).map_err(|e| e.to_string())?;
        let h = hyperplane_surface(&m, 1.5).unwrap().value;
        close("E[surface], N=1", e1, h, 1e-9 * h)
    });
    check(c, "construction_parameters", || {
        let pp16 = randpoly::construction_parameters(&MeasureParams::new(16, 2.0).unwrap()).unwrap();
        let pp100 = randpoly::construction_parameters(&MeasureParams::new(100, 2.0).unwrap()).unwrap();
        if pp16.n_halfspaces == 11 && pp100.n_halfspaces == 337 && (pp16.rho - 2.0).abs() < 1e-12 {
            Ok("N(16) = 11, N(100) = 337, rho(16) = 2".into())
        } else {
            Err(format!("got N(16) = {}, N(100) = {}", pp16.n_halfspaces, pp100.n_halfspaces))
        }
    });
    check(c, "experiment_determinism", || {
        let m = MeasureParams::new(8, 2.0).unwrap();
        let opts = EstimateOpts { seed, ..EstimateOpts::default() };
        let a = randpoly::run_experiment(&m, 4, 500, &opts).map_err(|e| e.to_string())?;
        let b = randpoly::run_experiment(&m, 4, 500, &opts).map_err(|e| e.to_string())?;
        if a.mean.to_bits() == b.mean.to_bits() {
            Ok(format!("replayed mean {:.9e}", a.mean))
        } else {
            Err(format!("means differ: {:.17e} vs {:.17e}", a.mean, b.mean))
        }
    });
    check(c, "body_json_round_trip", || {
        let bodies = [
            ConvexBody::ball(4, 1.5).unwrap(),
            ConvexBody::cube(3, 0.8).unwrap(),
            ConvexBody::slab(3, 1.0, vec![0.0, 1.0, 0.0]).unwrap(),
            ConvexBody::halfspace_intersection(3, 1.0, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]])
                .unwrap(),
        ];
        for b in &bodies {
            let back = ConvexBody::from_json(&b.to_json()).map_err(|e| e.to_string())?;
            if back.to_json() != b.to_json() {
                return Err(format!("round trip changed {:?}", b.to_json()));
            }
        }
        Ok("ball, cube, slab, halfspace_intersection".into())
    });
    check(c, "estimator_registry", || {
        let names: Vec<_> = registry().iter().map(|e| e.name()).collect();
        if names == ["exact", "quadrature", "shell_mc", "facet_mc"] {
            Ok(names.join(", "))
        } else {
            Err(format!("unexpected registry: {names:?}"))
        }
    });
    check(c, "internal_consistency", || {
        let bump = if tamper { 1e-3 } else { 0.0 };
        close("ln J_{0,2}", log_j(0.0, 2.0).unwrap() + bump, (std::f64::consts::PI / 2.0).sqrt().ln(), 1e-13)
    });

    let failed = checks.iter().filter(|k| !k.passed).count();
    VerifyReport {
        seed,
        total: checks.len(),
        failed,
        all_passed: failed == 0,
        checks,
    }
}
