//! The `verify` suite: weight audits, Stein oracles, inequality families
//! and the A₂ dichotomy. Every check reports a measured value next to the
//! limit it was held to.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use bozk_core::diagnostics::{inequality_ratio, InequalityKind, InterpolationWeight};
use bozk_core::stein::{self, DivergenceConfig, Samples, SteinConfig, Verdict};
use bozk_core::weights::{self, TruncatedWeight};
use bozk_core::{fields, Grid2D, RealField};

use crate::commands::{Completed, ConfigFailure, EXIT_OK, EXIT_VERIFY};
use crate::manifest::{RunManifest, VerifySettings};
use crate::output::{Cell, Outputs, Table};
use crate::pool::{self, Job};

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            pass: value <= limit,
        }
    }

    fn holds(name: impl Into<String>, value: f64, ok: bool) -> Self {
        Self {
            name: name.into(),
            value,
            limit: f64::NAN,
            pass: ok,
        }
    }

    fn failed(name: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Self {
            name: format!("{} ({err})", name.into()),
            value: f64::NAN,
            limit: f64::NAN,
            pass: false,
        }
    }
}

fn beta_checks(ns: &[u32]) -> Vec<Check> {
    let mut out = Vec::new();
    for &n in ns {
        match TruncatedWeight::new(n) {
            Ok(w) => {
                let a = w.audit();
                out.push(Check::at_most(format!("beta_{n}_max_slope"), a.max_slope, 1.0 + 1e-8));
                out.push(Check::at_most(format!("beta_{n}_neg_slope"), -a.min_slope, 1e-10));
                let far = w.value(4.0 * n as f64);
                out.push(Check::at_most(
                    format!("beta_{n}_plateau"),
                    (far - 2.0 * n as f64).abs(),
                    1e-12,
                ));
            }
            Err(e) => out.push(Check::failed(format!("beta_{n}"), e)),
        }
    }
    out
}

fn wave(c: f64) -> impl Fn(f64) -> Complex64 {
    move |x| Complex64::new(0.0, c * x).exp()
}

fn plane_wave_check(c: f64) -> Check {
    let name = format!("stein_half_plane_wave_c{c}");
    let run = || -> bozk_core::Result<f64> {
        let cfg = SteinConfig::new(0.5, 400.0)?;
        let f = Samples::sample(wave(c), 0.0, 0.02, -410.0, 410.0)?;
        let want = (2.0 * PI * c).sqrt();
        let vals = stein::stein_derivative(&f, &cfg, &[-3.0, 0.0, 1.0, 4.5])?;
        Ok(vals.iter().map(|v| (v.value - want).abs() / want).fold(0.0, f64::max))
    };
    match run() {
        Ok(err) => Check::at_most(name, err, 1e-3),
        Err(e) => Check::failed(name, e),
    }
}

/// Measured `𝒟^b e^{itη²x}` (with its tail bar) against the closed-form bound.
fn phase_check(b: f64) -> Check {
    let name = format!("stein_phase_bound_b{b}");
    let run = || -> bozk_core::Result<f64> {
        let mut worst = 0.0_f64;
        for (eta, t) in [(1.0, 1.0), (2.0, 0.5), (0.5, 3.0)] {
            let c = eta * eta * t;
            let cfg = SteinConfig::new(b, 2000.0)?;
            let v = stein::stein_derivative_fn(
                wave(c),
                |x| Complex64::new(0.0, c) * Complex64::new(0.0, c * x).exp(),
                0.1 / c,
                1.0,
                &cfg,
                &[0.0],
            )?[0];
            worst = worst.max(v.upper() / stein::phase_bound(b, eta, t)?);
        }
        Ok(worst)
    };
    match run() {
        Ok(r) => Check::at_most(name, r, 1.0),
        Err(e) => Check::failed(name, e),
    }
}

fn refinement_check(name: &str, f: impl Fn(f64) -> Complex64, want: Verdict) -> Check {
    match stein::refine_divergence(f, &DivergenceConfig::default()) {
        Ok(rep) => Check::holds(
            format!("refine_{name}_{}", want.as_str()),
            *rep.ratios.last().unwrap_or(&f64::NAN),
            rep.verdict == want,
        ),
        Err(e) => Check::failed(format!("refine_{name}"), e),
    }
}

pub fn inequality_kinds() -> Vec<(InequalityKind, &'static str)> {
    let interp = |weight| InequalityKind::Interpolation {
        a: 2.0,
        b: 1.0,
        alpha: 0.5,
        weight,
    };
    vec![
        (interp(InterpolationWeight::Japanese), "interpolation"),
        (interp(InterpolationWeight::Truncated { n: 4 }), "interpolation"),
        (interp(InterpolationWeight::Truncated { n: 8 }), "interpolation"),
        (interp(InterpolationWeight::Truncated { n: 16 }), "interpolation"),
        (interp(InterpolationWeight::Truncated { n: 32 }), "interpolation"),
        (InequalityKind::Commutator { l: 1, m: 0 }, "commutator"),
        (InequalityKind::Commutator { l: 1, m: 1 }, "commutator"),
        (InequalityKind::Commutator { l: 2, m: 1 }, "commutator"),
        (InequalityKind::HalfDerivativeCommutator, "half_derivative"),
        (InequalityKind::Algebra { s1: 3.0, s2: 3.0 }, "algebra"),
        (InequalityKind::Trilinear { s1: 3.0, s2: 3.0 }, "trilinear"),
    ]
}

fn kind_label(kind: &InequalityKind) -> String {
    match kind {
        InequalityKind::Interpolation { weight, .. } => match weight {
            InterpolationWeight::Japanese => "interp_japanese".into(),
            InterpolationWeight::Truncated { n } => format!("interp_w{n}"),
        },
        InequalityKind::Commutator { l, m } => format!("commutator_{l}_{m}"),
        InequalityKind::HalfDerivativeCommutator => "half_derivative_commutator".into(),
        InequalityKind::Algebra { .. } => "algebra".into(),
        InequalityKind::Trilinear { .. } => "trilinear".into(),
    }
}

/// Pairs of seeded random fields on a fixed 64² box.
pub fn random_family(seed: u64, size: usize) -> Vec<(RealField, RealField)> {
    let g = Grid2D::new(64, 64, 24.0, 24.0).expect("valid grid");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size)
        .map(|_| {
            let f = fields::random_smooth_field(g, &mut rng, 1.0, 3.0);
            let a = fields::random_smooth_field(g, &mut rng, 1.0, 3.0);
            (f, a)
        })
        .collect()
}

fn ceiling(v: &VerifySettings, group: &str) -> f64 {
    match group {
        "interpolation" => v.interpolation_ceiling,
        "commutator" => v.commutator_ceiling,
        "half_derivative" => v.half_derivative_ceiling,
        "algebra" => v.algebra_ceiling,
        _ => v.trilinear_ceiling,
    }
}

fn family_checks(kind: InequalityKind, group: &str, family: &[(RealField, RealField)], limit: f64) -> Vec<Check> {
    let label = kind_label(&kind);
    let mut worst = 0.0_f64;
    for (f, a) in family {
        match inequality_ratio(&kind, f, Some(a)) {
            Ok(r) => worst = worst.max(r),
            Err(e) => return vec![Check::failed(label, e)],
        }
    }
    let mut out = vec![Check::at_most(format!("{label}_max_ratio[{group}]"), worst, limit)];
    // amplitude scaling leaves every ratio unchanged
    let (f, a) = &family[0];
    let scaled = (
        inequality_ratio(&kind, f, Some(a)),
        inequality_ratio(&kind, &f.scaled(3.7), Some(&a.scaled(0.3))),
    );
    match scaled {
        (Ok(r0), Ok(r1)) => out.push(Check::at_most(format!("{label}_scaling"), (r1 - r0).abs() / r0, 1e-12)),
        (Err(e), _) | (_, Err(e)) => out.push(Check::failed(format!("{label}_scaling"), e)),
    }
    out
}

fn a2_checks() -> Vec<Check> {
    let mut out = Vec::new();
    for l in [1.0, 10.0, 100.0] {
        let name = format!("a2_half_symmetric_L{l}");
        match weights::a2_statistic(0.5, -l, l) {
            Ok(v) => out.push(Check::at_most(name, (v - 4.0 / 3.0).abs(), 1e-12)),
            Err(e) => out.push(Check::failed(name, e)),
        }
    }
    for (a, b) in [(-1.0, 1.0), (0.0, 2.0)] {
        let name = format!("a2_three_halves_[{a},{b}]_infinite");
        match weights::a2_statistic(1.5, a, b) {
            Ok(v) => out.push(Check::holds(name, v, v == f64::INFINITY)),
            Err(e) => out.push(Check::failed(name, e)),
        }
    }
    out
}

pub fn run_suite(m: &RunManifest, threads: usize) -> Vec<Check> {
    let family = random_family(m.seed, m.verify.family_size);
    let fam = &family;
    let v = &m.verify;
    let mut jobs: Vec<Job<Vec<Check>>> = vec![
        Box::new(move || beta_checks(&v.beta_n)),
        Box::new(a2_checks),
        Box::new(|| {
            let heaviside = |x: f64| Complex64::new(if x >= 0.0 { 1.0 } else { 0.0 }, 0.0);
            let bump = |x: f64| Complex64::new((-4.0 * x * x).exp(), 0.0);
            vec![
                refinement_check("heaviside", heaviside, Verdict::Divergent),
                refinement_check("bump", bump, Verdict::Convergent),
            ]
        }),
    ];
    for c in [1.0, 2.0, 4.0] {
        jobs.push(Box::new(move || vec![plane_wave_check(c)]));
    }
    for b in [0.25, 0.5, 0.75] {
        jobs.push(Box::new(move || vec![phase_check(b)]));
    }
    for (kind, group) in inequality_kinds() {
        let limit = ceiling(v, group);
        jobs.push(Box::new(move || family_checks(kind, group, fam, limit)));
    }
    pool::run_jobs(jobs, threads).into_iter().flatten().collect()
}

pub fn verify(m: &RunManifest, threads: usize) -> Result<Completed, ConfigFailure> {
    let checks = run_suite(m, threads);
    let mut table = Table::new(&[("check", "label"), ("value", "1"), ("limit", "1"), ("pass", "bool")]);
    for c in &checks {
        table.push(vec![
            Cell::S(c.name.clone()),
            Cell::F(c.value),
            Cell::F(c.limit),
            Cell::S(c.pass.to_string()),
        ]);
    }
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.pass).collect();
    let mut outputs = Outputs::default();
    outputs.add("verify.csv", table.to_bytes());
    outputs.add_json(
        "summary.json",
        &json!({
            "command": "verify",
            "seed": m.seed,
            "family_size": m.verify.family_size,
            "checks": checks.len(),
            "failed": failed.iter().map(|c| c.name.clone()).collect::<Vec<_>>(),
        }),
    );
    let code = if failed.is_empty() { EXIT_OK } else { EXIT_VERIFY };
    Ok(Completed {
        outputs,
        code,
        message: format!("verify: {}/{} checks passed", checks.len() - failed.len(), checks.len()),
    })
}
