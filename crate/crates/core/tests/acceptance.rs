//! Acceptance suite: one pass/fail line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use parabolic_casimir::approx::{
    edge_coefficient_fit, pfa_energy, window_sensitivity, EdgeFit, EdgeSample,
};
use parabolic_casimir::cli::validation::{self, Check};
use parabolic_casimir::energy::{
    c_perp, c_theta, classical_coefficient, energy_per_length, QuadratureSpec,
};
use parabolic_casimir::{Channel, Geometry};

struct Outcome {
    passed: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            passed: true,
            summary: String::new(),
            details: Vec::new(),
        }
    }

    /// Records a sub-check.
    fn check(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.details
            .push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, line: String) {
        self.details.push(format!("     {line}"));
    }
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn knife_edge_constant() -> Outcome {
    let mut out = Outcome::new();
    let r = c_perp(160, &QuadratureSpec::default(), Channel::Full).expect("C_perp");
    out.note(format!("series {:?}", r.series));
    out.check(
        within(r.extrapolated, 0.0067415, 5e-5),
        format!(
            "C_perp = {:.7} +- {:.1e} (target 0.0067415 +- 5e-5)",
            r.extrapolated,
            r.total_error()
        ),
    );
    out.summary = format!("C_perp = {:.7}", r.extrapolated);
    out
}

fn dirichlet_split() -> Outcome {
    let mut out = Outcome::new();
    let r = c_perp(160, &QuadratureSpec::default(), Channel::Dirichlet).expect("C_perp Dirichlet");
    let v = r.extrapolated;
    out.check(
        within(v, 0.0060485, 5e-5),
        format!(
            "C^D_perp = {v:.7} +- {:.1e} (target 0.0060485 +- 5e-5)",
            r.total_error()
        ),
    );
    out.check(
        within(v, 0.00600, 2e-5),
        format!(
            "C^D_perp = {v:.7} in world-line band 0.00600(2): offset {:.2e}",
            v - 0.00600
        ),
    );
    out.summary = format!("C^D_perp = {v:.7}");
    out
}

fn pfa_ratio(h_over_r: f64, nu_max: usize) -> (f64, f64) {
    let geom = Geometry::new(1.0, h_over_r, 0.0).unwrap();
    let r = energy_per_length(&geom, &QuadratureSpec::default(), nu_max, Channel::Full)
        .expect("energy");
    let pfa = pfa_energy(h_over_r, 1.0).unwrap().value;
    (r.extrapolated / pfa, r.total_error() / pfa.abs())
}

fn pfa_approach() -> Outcome {
    let mut out = Outcome::new();
    let (quarter, quarter_err) = pfa_ratio(0.25, 400);
    let (tenth, tenth_err) = pfa_ratio(0.1, 400);
    out.check(
        within(quarter, 0.9961, 0.002),
        format!("ratio at H/R = 0.25: {quarter:.5} +- {quarter_err:.1e} (target 0.9961 +- 0.002)"),
    );
    let closer = (1.0 - tenth).abs() < (1.0 - quarter).abs();
    out.check(
        closer && tenth < 1.0 && quarter < 1.0,
        format!(
            "ratio at H/R = 0.1: {tenth:.5} +- {tenth_err:.1e}, closer to 1 than at 0.25: {closer}"
        ),
    );
    out.summary = format!("ratios {quarter:.5} (0.25), {tenth:.5} (0.1)");
    out
}

struct TiltSamples {
    full: Vec<EdgeSample>,
    dirichlet: Vec<EdgeSample>,
    neumann: Vec<EdgeSample>,
}

fn tilt_samples(degrees: &[f64], nu_max: usize) -> TiltSamples {
    let spec = QuadratureSpec::default();
    let mut samples = TiltSamples {
        full: Vec::new(),
        dirichlet: Vec::new(),
        neumann: Vec::new(),
    };
    for &d in degrees {
        let r = c_theta(d.to_radians(), nu_max, &spec).expect("c(theta)");
        for (channel, list) in [
            (Channel::Full, &mut samples.full),
            (Channel::Dirichlet, &mut samples.dirichlet),
            (Channel::Neumann, &mut samples.neumann),
        ] {
            let e = r.get(channel);
            list.push(EdgeSample {
                theta: r.theta,
                value: e.extrapolated,
                error: e.total_error(),
            });
        }
    }
    samples
}

fn describe(fit: &EdgeFit) -> String {
    format!(
        "[{:.0}, {:.0}] deg: slope {:+.5} +- {:.1e}, intercept {:.7}, residual {:.1e}",
        fit.fit_window.0.to_degrees(),
        fit.fit_window.1.to_degrees(),
        fit.c_edge,
        fit.c_edge_error,
        fit.c_parallel_half,
        fit.residual
    )
}

const WINDOWS_DEG: [(f64, f64); 5] = [
    (70.0, 87.0),
    (75.0, 88.0),
    (80.0, 88.0),
    (82.0, 88.0),
    (80.0, 86.0),
];

fn parallel_endpoint(samples: &TiltSamples, spot: &[(f64, f64, f64)]) -> Outcome {
    let mut out = Outcome::new();
    for &(deg, value, nu) in spot {
        out.check(
            value.is_finite() && nu >= 200.0,
            format!("c({deg:.0} deg) = {value:.7} at nu_max {nu:.0}"),
        );
    }
    let fit = window_fit(&samples.full);
    let target = PI * PI / 1440.0;
    let rel = fit.c_parallel_half / target - 1.0;
    out.check(
        rel.abs() <= 0.02,
        format!(
            "intercept {:.7} vs pi^2/1440 = {target:.7} ({:+.2}%)",
            fit.c_parallel_half,
            100.0 * rel
        ),
    );
    out.summary = format!("intercept off by {:+.2}%", 100.0 * rel);
    out
}

fn window_fit(samples: &[EdgeSample]) -> EdgeFit {
    let (lo, hi) = parabolic_casimir::approx::DEFAULT_EDGE_WINDOW;
    let inside: Vec<EdgeSample> = samples
        .iter()
        .copied()
        .filter(|s| s.theta >= lo - 1e-12 && s.theta <= hi + 1e-12)
        .collect();
    edge_coefficient_fit(&inside).expect("edge fit")
}

fn edge_coefficients(samples: &TiltSamples) -> Outcome {
    let mut out = Outcome::new();
    let full = window_fit(&samples.full);
    let dirichlet = window_fit(&samples.dirichlet);
    let neumann = window_fit(&samples.neumann);
    out.check(
        (0.0003..=0.0015).contains(&full.c_edge),
        format!("full slope {:+.5} in [0.0003, 0.0015]", full.c_edge),
    );
    out.check(
        within(dirichlet.c_edge, -0.0025, 0.001),
        format!(
            "Dirichlet slope {:+.5} (target -0.0025 +- 0.001)",
            dirichlet.c_edge
        ),
    );
    out.check(
        within(neumann.c_edge, 0.0034, 0.001),
        format!(
            "Neumann slope {:+.5} (target +0.0034 +- 0.001)",
            neumann.c_edge
        ),
    );
    let sum = dirichlet.c_edge + neumann.c_edge;
    let sum_err = 3.0
        * (dirichlet.c_edge_error.powi(2)
            + neumann.c_edge_error.powi(2)
            + full.c_edge_error.powi(2))
        .sqrt();
    out.note(format!(
        "D + N slopes {sum:+.5} vs full {:+.5} (difference {:.1e}, 3 sigma {sum_err:.1e})",
        full.c_edge,
        (sum - full.c_edge).abs()
    ));
    let windows: Vec<(f64, f64)> = WINDOWS_DEG
        .iter()
        .map(|&(a, b)| (a.to_radians(), b.to_radians()))
        .collect();
    for (name, list) in [
        ("em", &samples.full),
        ("dirichlet", &samples.dirichlet),
        ("neumann", &samples.neumann),
    ] {
        for fit in window_sensitivity(list, &windows) {
            out.note(format!("window sensitivity {name:>9} {}", describe(&fit)));
        }
    }
    out.summary = format!(
        "slopes em {:+.5}, D {:+.5}, N {:+.5}",
        full.c_edge, dirichlet.c_edge, neumann.c_edge
    );
    out
}

fn classical_limit() -> Outcome {
    let mut out = Outcome::new();
    let spec = QuadratureSpec {
        qmin_scaled: 1e-6,
        ..QuadratureSpec::default()
    };
    let geom = Geometry::knife_edge(1.0, 0.0).unwrap();
    let full = classical_coefficient(&geom, 160, &spec, Channel::Full).expect("classical");
    let dirichlet =
        classical_coefficient(&geom, 160, &spec, Channel::Dirichlet).expect("classical D");
    out.check(
        within(full.extrapolated, 0.0472, 5e-4),
        format!(
            "C_T=inf = {:.5} +- {:.1e} (target 0.0472 +- 5e-4)",
            full.extrapolated,
            full.total_error()
        ),
    );
    out.check(
        within(dirichlet.extrapolated, 0.0394, 5e-4),
        format!(
            "C^D_T=inf = {:.5} +- {:.1e} (target 0.0394 +- 5e-4)",
            dirichlet.extrapolated,
            dirichlet.total_error()
        ),
    );
    out.summary = format!(
        "C_T=inf = {:.5}, C^D = {:.5}",
        full.extrapolated, dirichlet.extrapolated
    );
    out
}

fn spectral_concentration() -> Outcome {
    let mut out = Outcome::new();
    let total = c_perp(160, &QuadratureSpec::default(), Channel::Full)
        .expect("C_perp")
        .extrapolated;
    let fraction = |qmax: f64| {
        let spec = QuadratureSpec {
            qmax_scaled: qmax,
            ..QuadratureSpec::default()
        };
        100.0
            * c_perp(160, &spec, Channel::Full)
                .expect("partial")
                .extrapolated
            / total
    };
    let (two, three) = (fraction(2.0), fraction(3.0));
    out.check(
        within(two, 95.0, 1.0),
        format!("q < 2/H captures {two:.2}% (target 95 +- 1)"),
    );
    out.check(
        within(three, 99.0, 0.5),
        format!("q < 3/H captures {three:.2}% (target 99 +- 0.5)"),
    );
    out.summary = format!("{two:.2}% and {three:.2}%");
    out
}

fn from_checks(checks: Vec<Check>) -> Outcome {
    let mut out = Outcome::new();
    let count = checks.len();
    for c in checks {
        out.check(
            c.passed,
            format!(
                "{:<22} {:.2e} <= {:.0e} ({})",
                c.name, c.measured, c.tolerance, c.detail
            ),
        );
    }
    out.summary = format!("{count} checks");
    out
}

fn identity_suite() -> Outcome {
    let checks: Vec<Check> = validation::identity_suite(0x5eed)
        .into_iter()
        .filter(|c| c.name != "specfun-fixtures")
        .collect();
    from_checks(checks)
}

fn fixture_oracle() -> Outcome {
    from_checks(vec![
        validation::specfun_fixtures(1e-10).expect("fixture table")
    ])
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut results: Vec<(u32, &str, Outcome, f64)> = Vec::new();
    let mut timed = |n: u32, name: &'static str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let outcome = f();
        results.push((n, name, outcome, t.elapsed().as_secs_f64()));
        let (n, name, outcome, secs) = results.last().unwrap();
        print_outcome(*n, name, outcome, *secs);
    };
    timed(1, "knife-edge constant", &knife_edge_constant);
    timed(2, "Dirichlet split", &dirichlet_split);
    timed(3, "PFA approach", &pfa_approach);

    let t = Instant::now();
    let mut degrees: Vec<f64> = vec![70.0, 72.0, 74.0, 75.0, 76.0, 78.0];
    degrees.extend((80..=88).map(f64::from));
    let samples = tilt_samples(&degrees, 400);
    let spot: Vec<(f64, f64, f64)> = [80.0, 85.0]
        .iter()
        .map(|&d| {
            let r = c_theta(f64::to_radians(d), 200, &QuadratureSpec::default()).expect("c(theta)");
            (d, r.get(Channel::Full).value, r.nu_max as f64)
        })
        .collect();
    let tilt_secs = t.elapsed().as_secs_f64();
    timed(4, "parallel endpoint", &|| {
        parallel_endpoint(&samples, &spot)
    });
    timed(5, "edge coefficients", &|| edge_coefficients(&samples));
    println!("     (tilt samples: {:.1} s)", tilt_secs);

    timed(6, "classical limit", &classical_limit);
    timed(7, "spectral concentration", &spectral_concentration);
    timed(8, "identity suite", &identity_suite);
    timed(9, "special-function oracle", &fixture_oracle);

    let failed: Vec<u32> = results
        .iter()
        .filter(|r| !r.2.passed)
        .map(|r| r.0)
        .collect();
    println!();
    println!(
        "acceptance: {}/{} criteria passed in {:.1} s",
        results.len() - failed.len(),
        results.len(),
        started.elapsed().as_secs_f64()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}

fn print_outcome(n: u32, name: &str, outcome: &Outcome, secs: f64) {
    let tag = if outcome.passed { "PASS" } else { "FAIL" };
    println!(
        "criterion {n} [{tag}] {name}: {} ({secs:.1} s)",
        outcome.summary
    );
    for line in &outcome.details {
        println!("    {line}");
    }
}
