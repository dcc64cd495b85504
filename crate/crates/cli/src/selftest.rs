//! Built-in oracle suite.

use std::f64::consts::{PI, SQRT_2};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riesz_core::diagnostics::{self, ReportBuilder};
use riesz_core::model::{self, Params, PrimitiveState, Regime, SymState};
use riesz_core::spectral::{self, Complex64, Field, Grid, Multiplier, VectorField};
use riesz_core::timestep::{self, Scheme, StepperConfig};
use serde_json::json;

use crate::error::LabError;
use crate::scenarios::Outcome;

/// Deliberate defects used to check that the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Applies every Fourier multiplier with the opposite sign.
    FlipMultiplierSign,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl SelftestReport {
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

struct Suite {
    fault: Option<Fault>,
    checks: Vec<Check>,
}

impl Suite {
    fn record(&mut self, name: impl Into<String>, result: Result<String, String>) {
        let (passed, detail) = match result {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    }

    fn bound(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        let detail = format!("{value:.3e} (limit {limit:.1e})");
        self.record(name, if value <= limit { Ok(detail) } else { Err(detail) });
    }

    fn apply(&self, f: &Field, m: &Multiplier) -> riesz_core::Result<Field> {
        match self.fault {
            Some(Fault::FlipMultiplierSign) => {
                spectral::apply_multiplier(f, &m.scaled(Complex64::new(-1.0, 0.0)))
            }
            None => spectral::apply_multiplier(f, m),
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random trigonometric polynomial with `|n_j| ≤ band`, zero mean.
fn trig_field(grid: &Grid, band: i64, seed: u64) -> Field {
    let mut r = rng(seed);
    let d = grid.dim();
    let total = (2 * band + 1).pow(d as u32) as usize;
    let modes: Vec<(Vec<i64>, f64, f64)> = (0..total)
        .filter_map(|mut i| {
            let n: Vec<i64> = (0..d)
                .map(|_| {
                    let v = (i % (2 * band as usize + 1)) as i64 - band;
                    i /= 2 * band as usize + 1;
                    v
                })
                .collect();
            let a = r.random_range(-1.0..1.0);
            let ph = r.random_range(0.0..2.0 * PI);
            (!n.iter().all(|&v| v == 0)).then_some((n, a, ph))
        })
        .collect();
    Field::from_fn(grid, |x| {
        modes
            .iter()
            .map(|(n, a, ph)| {
                let arg: f64 = n.iter().zip(x).map(|(n, x)| *n as f64 * x).sum();
                a * (arg + ph).cos()
            })
            .sum()
    })
    .expect("finite")
}

/// Direct `Σ_x f(x) e^{-i n·x}` for every wavevector slot.
fn naive_forward(f: &Field) -> Vec<Complex64> {
    let grid = f.grid();
    let d = grid.dim();
    (0..grid.len())
        .map(|k| {
            let n = grid.wavevector(k);
            f.samples()
                .iter()
                .enumerate()
                .map(|(x, v)| {
                    let c = grid.coordinate(x);
                    let arg: f64 = (0..d).map(|j| n[j] as f64 * c[j]).sum();
                    v * Complex64::from_polar(1.0, -arg)
                })
                .sum()
        })
        .collect()
}

/// Direct `P^{-d} Σ_n a(n) f̂(n) e^{i n·x}`, real part.
fn naive_apply(f: &Field, symbol: impl Fn(&[i64]) -> Complex64) -> Field {
    let grid = f.grid();
    let d = grid.dim();
    let coeffs: Vec<Complex64> = naive_forward(f)
        .into_iter()
        .enumerate()
        .map(|(k, c)| c * symbol(&grid.wavevector(k)[..d]))
        .collect();
    let scale = 1.0 / grid.len() as f64;
    let samples = (0..grid.len())
        .map(|x| {
            let c = grid.coordinate(x);
            coeffs
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let n = grid.wavevector(k);
                    let arg: f64 = (0..d).map(|j| n[j] as f64 * c[j]).sum();
                    (v * Complex64::from_polar(1.0, arg)).re
                })
                .sum::<f64>()
                * scale
        })
        .collect();
    Field::new(grid, samples).expect("finite")
}

fn rel(a: &Field, b: &Field) -> f64 {
    let diff = a.sub(b).expect("same grid").max_abs();
    diff / b.max_abs().max(f64::MIN_POSITIVE)
}

fn norm_sq(n: &[i64]) -> f64 {
    n.iter().map(|v| (v * v) as f64).sum()
}

fn frac_symbol(s: f64) -> impl Fn(&[i64]) -> Complex64 {
    move |n| {
        let r2 = norm_sq(n);
        if r2 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(r2.powf(s / 2.0), 0.0)
        }
    }
}

fn spectral_checks(s: &mut Suite) {
    for d in [1, 2] {
        let grid = Grid::new(d, 16).expect("grid");
        let f = trig_field(&grid, 7, 10 + d as u64);
        for sv in [-0.5, 0.7, 1.0, 2.0] {
            let name = format!("fractional-power d={d} s={sv}");
            let result = s
                .apply(&f, &Multiplier::fractional(sv))
                .map(|fast| rel(&fast, &naive_apply(&f, frac_symbol(sv))));
            match result {
                Ok(e) => s.bound(name, e, 1e-12),
                Err(e) => s.record(name, Err(e.to_string())),
            }
        }
        for axis in 0..d {
            let name = format!("derivative d={d} axis={axis}");
            let fast = s.apply(&f, &Multiplier::derivative(axis)).expect("mean-free input");
            let slow = naive_apply(&f, |n| Complex64::new(0.0, n[axis] as f64));
            s.bound(name, rel(&fast, &slow), 1e-12);
        }
        let name = format!("green-potential d={d}");
        let fast = s.apply(&f, &Multiplier::inverse_neg_laplacian()).expect("mean-free input");
        s.bound(name, rel(&fast, &naive_apply(&f, frac_symbol(-2.0))), 1e-12);

        let grad = spectral::gradient(&f);
        let div = spectral::divergence(&grad);
        let lap = s.apply(&f, &Multiplier::neg_laplacian()).expect("laplacian");
        s.bound(
            format!("divergence-of-gradient d={d}"),
            rel(&div.scale(-1.0), &lap),
            1e-11,
        );

        let back = spectral::inverse_transform(&spectral::forward_transform(&f));
        s.bound(format!("transform-round-trip d={d}"), rel(&back, &f), 1e-14);
    }

    let grid = Grid::new(2, 32).expect("grid");
    let f = trig_field(&grid, 10, 5);
    let l2 = f.l2_norm();
    s.bound(
        "parseval",
        (spectral::spectral_l2_norm(&f) - l2).abs() / l2,
        1e-13,
    );
    let once = spectral::dealias(&f);
    s.bound("dealias-idempotent", rel(&spectral::dealias(&once), &once), 1e-14);
    s.bound(
        "realness",
        spectral::imaginary_residue(&spectral::forward_transform(&f)),
        1e-12,
    );

    let mut worst: f64 = 0.0;
    let mut r = rng(99);
    for seed in 0..50 {
        let g = trig_field(&Grid::new(1, 32).expect("grid"), 10, 1000 + seed);
        let a = r.random_range(-1.0..3.0);
        let b = r.random_range(-1.0..3.0);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let excess = spectral::fractional_seminorm(&g, lo) - spectral::fractional_seminorm(&g, hi);
        worst = worst.max(excess / spectral::fractional_seminorm(&g, hi));
    }
    s.bound("sobolev-ordering", worst, 1e-12);

    let composed = s
        .apply(&s.apply(&f, &Multiplier::fractional(0.6)).expect("ok"), &Multiplier::fractional(0.9))
        .expect("ok");
    let direct = s.apply(&f, &Multiplier::fractional(1.5)).expect("ok");
    s.bound("powers-add", rel(&composed, &direct), 1e-12);
}

fn f_checks(s: &mut Suite) {
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let r = 0.05 + 3.95 * i as f64 / 99.0;
        let f = diagnostics::compute_f(2.0, r, 1.0).expect("domain");
        worst = worst.max((f - (r - 1.0).powi(2)).abs());
    }
    s.bound("f-quadratic-closed-form", worst, 1e-12);

    let mut worst: f64 = 0.0;
    for i in 1..100 {
        let r = 0.04 * i as f64;
        let f = diagnostics::compute_f(1.0, r, 1.0).expect("domain");
        worst = worst.max((f - (r * r.ln() - r + 1.0)).abs());
    }
    s.bound("f-logarithmic-closed-form", worst, 1e-12);

    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let r = 0.05 + 0.04 * i as f64;
        let f = diagnostics::compute_f(3.0, r, 1.5).expect("domain");
        let r0: f64 = 1.5;
        let exact = 0.5 * r.powi(3) - 1.5 * r0 * r0 * r + r0.powi(3);
        worst = worst.max((f - exact).abs() / exact.abs().max(1.0));
    }
    s.bound("f-cubic-closed-form", worst, 1e-12);

    for gamma in [1.0, 1.5, 2.0, 3.0] {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..=290 {
            let r = 0.1 + 0.01 * i as f64;
            if (r - 1.0).abs() < 1e-9 {
                continue;
            }
            let q = diagnostics::compute_f(gamma, r, 1.0).expect("domain") / (r - 1.0).powi(2);
            lo = lo.min(q);
            hi = hi.max(q);
        }
        let detail = format!("f/(r-1)^2 in [{lo:.4}, {hi:.4}]");
        s.record(
            format!("f-sandwich gamma={gamma}"),
            if lo > 0.0 && hi.is_finite() { Ok(detail) } else { Err(detail) },
        );
    }
}

fn constants_checks(s: &mut Suite) {
    let p = Params::new(2, 2.0, 1.0, 0.1, 1.5).expect("params");
    let k0 = diagnostics::k0(&p, 3);
    s.record(
        "k0 d=2 alpha=1.5 m=3",
        match k0 {
            Ok(2) => Ok("2".into()),
            other => Err(format!("{other:?}")),
        },
    );
    match diagnostics::compute_constants(&p, 3, 1.5) {
        Ok(c) => s.bound("C0 gamma=2", (c.c_0 - 1.5 / SQRT_2).abs(), 1e-12),
        Err(e) => s.record("C0 gamma=2", Err(e.to_string())),
    }
    s.record(
        "k0 empty range",
        match diagnostics::k0(&p, 0) {
            Err(riesz_core::Error::EmptyRange { .. }) => Ok("EmptyRange".into()),
            other => Err(format!("{other:?}")),
        },
    );
    let mut wrong = Vec::new();
    for d in [1usize, 2, 3] {
        let lo = (d as f64 - 2.0).max(0.0);
        for i in 0..7 {
            let alpha = lo + (d as f64 - lo) * i as f64 / 7.0;
            let p = Params::new(d, 2.0, 1.0, 0.1, alpha).expect("params");
            let expected = if alpha > d as f64 - 1.0 {
                Regime::SuperManev
            } else {
                Regime::SubManev
            };
            if p.regime() != expected {
                wrong.push(format!("d={d} alpha={alpha}"));
            }
        }
    }
    s.record(
        "regime-classification",
        if wrong.is_empty() { Ok("21 cases".into()) } else { Err(wrong.join(", ")) },
    );
    let p = Params::new(1, 2.0, 0.7, 0.05, 0.5).expect("params");
    let mut worst: f64 = 0.0;
    for n in 1..=10 {
        let n = n as f64;
        let k = n * n * (2.0 - 0.05 * n.powf(-0.5));
        for z in diagnostics::dispersion_roots(n, &p).expect("n >= 1") {
            worst = worst.max((z * z + 0.7 * z + k).norm() / k);
        }
    }
    s.bound("dispersion-roots", worst, 1e-12);
}

fn model_checks(s: &mut Suite) {
    let grid = Grid::new(2, 16).expect("grid");
    for gamma in [1.0, 2.0] {
        let p = Params::new(2, gamma, 1.0, 0.1, 1.5).expect("params");
        let eq = SymState::equilibrium(&grid, &p);
        let (dh, du) = model::rhs_sym(&eq, &p).expect("rhs");
        let size = dh.max_abs().max(du.max_magnitude());
        s.bound(format!("equilibrium-fixed-point gamma={gamma}"), size, 1e-13);
    }

    let p = Params::new(2, 1.4, 1.0, 0.1, 1.5).expect("params");
    let rho = trig_field(&grid, 3, 7).scale(0.05).offset(1.0);
    let prim = PrimitiveState::new(rho.clone(), VectorField::zeros(&grid), 0.0).expect("state");
    let round = model::to_sym(&prim, &p)
        .and_then(|h| model::to_primitive(&h, &p))
        .map(|back| rel(&back.rho, &rho));
    match round {
        Ok(e) => s.bound("change-of-variables-round-trip", e, 1e-13),
        Err(e) => s.record("change-of-variables-round-trip", Err(e.to_string())),
    }

    let (drho, _) = model::rhs_primitive(&prim, &p).expect("rhs");
    s.bound("mass-rate-zero", drho.integral().abs(), 1e-12);

    // m_c(t) = m_c(0) e^{-νt} on a short run
    let grid = Grid::new(1, 32).expect("grid");
    let p = Params::new(1, 2.0, 0.8, 0.05, 0.5).expect("params");
    let sigma = p.sigma().expect("gamma > 1");
    let h = trig_field(&grid, 3, 21).scale(0.05 * sigma);
    let u = VectorField::new(vec![trig_field(&grid, 3, 22).scale(0.05).offset(0.02)]).expect("u");
    let mut s0 = SymState::new(h, u, 0.0).expect("state");
    let run = s0.project_to_neutral(&p).map_err(|e| e.to_string()).and_then(|_| {
        let builder = ReportBuilder::new(&s0, &p, 2).map_err(|e| e.to_string())?;
        let cfg = StepperConfig::fixed(Scheme::Rk4ExpDamping, 0.01, 1.0);
        timestep::run_sym(&s0, &p, &cfg, |s| builder.report(s)).map_err(|e| e.to_string())
    });
    match run {
        Ok(traj) => {
            let reports: Vec<_> = traj.samples.into_iter().map(|(_, r)| r).collect();
            let m0 = reports[0].m_c[0].abs();
            s.bound("m_c-law", diagnostics::momentum_law_deviation(&reports, p.nu) / m0, 1e-6);
            let e = diagnostics::energy_identity_residual(&reports).unwrap_or(f64::INFINITY);
            let scale = reports.iter().map(|r| r.d).fold(0.0, f64::max);
            s.bound("energy-identity-short-run", e / scale, 1e-3);
            let ok = reports.windows(2).all(|w| w[1].e <= w[0].e + 1e-14);
            s.record(
                "energy-nonincreasing",
                if ok { Ok("monotone".into()) } else { Err("E increased".into()) },
            );
        }
        Err(e) => {
            for name in ["m_c-law", "energy-identity-short-run", "energy-nonincreasing"] {
                s.record(name, Err(e.clone()));
            }
        }
    }
}

/// Runs every check; `fault` injects a known defect.
pub fn run(fault: Option<Fault>) -> SelftestReport {
    let start = Instant::now();
    let mut suite = Suite {
        fault,
        checks: Vec::new(),
    };
    spectral_checks(&mut suite);
    f_checks(&mut suite);
    constants_checks(&mut suite);
    model_checks(&mut suite);
    SelftestReport {
        checks: suite.checks,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn outcome(report: &SelftestReport) -> Outcome {
    let mut lines: Vec<String> = report
        .checks
        .iter()
        .map(|c| format!("[{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail))
        .collect();
    let failures = report.failures();
    lines.push(format!(
        "checks run: {}, passed: {}, failed: {} ({:.2} s)",
        report.checks.len(),
        report.checks.len() - failures.len(),
        failures.len(),
        report.seconds
    ));
    let summary = json!({
        "scenario": "selftest",
        "checks_run": report.checks.len(),
        "failed": failures.iter().map(|c| c.name.clone()).collect::<Vec<_>>(),
        "seconds": report.seconds,
    });
    let failure = (!failures.is_empty()).then(|| {
        LabError::Check(format!(
            "selftest failures: {}",
            failures.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(", ")
        ))
    });
    Outcome {
        lines,
        summary,
        failure,
    }
}
