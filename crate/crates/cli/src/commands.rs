//! The subcommands. Each returns the files it wants written and an exit
//! code; nothing touches the filesystem until the command has finished.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use bozk_core::diagnostics::{self, NormSpec};
use bozk_core::solver::{self, DiagnosticsSpec, RunOutput, SolverConfig, TimeSeries};
use bozk_core::uc_lab::{self, B1Config, CutoffSpec, PersistenceConfig, PersistenceTable, UcReport};
use bozk_core::{fields, snapshot, Error, RealField};

use crate::manifest::{DataSpec, RunManifest};
use crate::output::{Cell, Outputs, Table};
use crate::pool::{self, Job};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ABORT: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// A command that ran to a decision (success, abort or failed suite).
#[derive(Debug)]
pub struct Completed {
    pub outputs: Outputs,
    pub code: i32,
    pub message: String,
}

/// Errors that stop a command before any output exists.
#[derive(Debug)]
pub struct ConfigFailure(pub String);

impl From<Error> for ConfigFailure {
    fn from(e: Error) -> Self {
        ConfigFailure(e.to_string())
    }
}

/// Failures that come from the numerics rather than from the input.
pub fn is_abort(e: &Error) -> bool {
    e.is_numerical_abort() || matches!(e, Error::Unresolved { .. } | Error::BoundaryContact { .. })
}

fn audit_name(e: &Error) -> &'static str {
    match e {
        Error::CflViolation { .. } => "cfl",
        Error::BlowUp { .. } => "blowup",
        Error::NoConvergence { .. } => "picard_convergence",
        Error::Unresolved { .. } => "resolution",
        Error::BoundaryContact { .. } => "boundary_contact",
        _ => "other",
    }
}

pub fn abort_record(e: &Error) -> Value {
    let t = match e {
        Error::CflViolation { t, .. } | Error::BlowUp { t, .. } => json!(t),
        _ => Value::Null,
    };
    json!({ "audit": audit_name(e), "t": t, "message": e.to_string() })
}

pub fn initial_data(m: &RunManifest) -> Result<RealField, ConfigFailure> {
    let g = m.grid;
    Ok(match &m.data {
        DataSpec::Gaussian(p) => fields::gaussian(g, p),
        DataSpec::DxGaussian(p) => fields::dx_gaussian(g, p),
        DataSpec::TwoSolitaryBumps {
            amplitude,
            width,
            separation,
        } => fields::two_solitary_bumps(g, *amplitude, *width, *separation),
        DataSpec::RandomSmooth { k0, sigma } => {
            let mut rng = ChaCha8Rng::seed_from_u64(m.seed);
            fields::random_smooth_field(g, &mut rng, *k0, *sigma)
        }
        DataSpec::File(path) => {
            let mut f = std::fs::File::open(path).map_err(|e| ConfigFailure(format!("{}: {e}", path.display())))?;
            snapshot::read(&mut f)?
        }
    })
}

fn grid_json(m: &RunManifest) -> Value {
    json!({ "nx": m.grid.nx(), "ny": m.grid.ny(), "lx": m.grid.lx(), "ly": m.grid.ly() })
}

fn data_kind(m: &RunManifest) -> &'static str {
    match m.data {
        DataSpec::Gaussian(_) => "gaussian",
        DataSpec::DxGaussian(_) => "dx_gaussian",
        DataSpec::TwoSolitaryBumps { .. } => "two_solitary_bumps",
        DataSpec::RandomSmooth { .. } => "random_smooth",
        DataSpec::File(_) => "file",
    }
}

fn summary_head(m: &RunManifest, command: &str) -> serde_json::Map<String, Value> {
    let mut s = serde_json::Map::new();
    s.insert("command".into(), json!(command));
    s.insert("grid".into(), grid_json(m));
    s.insert("data".into(), json!(data_kind(m)));
    s.insert("seed".into(), json!(m.seed));
    s
}

/// `series.csv`: t, l2, hs_<s>..., zmode_linf_drift, moment_x, w_<id>...
pub fn series_table(ts: &TimeSeries) -> Table {
    let mut t = Table::new(&[("t", "time"), ("l2", "norm")]);
    for s in &ts.spec.hs_orders {
        t.column(format!("hs_{s}"), "norm");
    }
    t.column("zmode_linf_drift", "amplitude");
    t.column("moment_x", "length*amplitude");
    for w in &ts.spec.weights {
        t.column(format!("w_{}", w.id()), "norm");
    }
    for (rec, drift) in ts.records.iter().zip(ts.zero_mode_drift()) {
        let mut row = vec![Cell::F(rec.t), Cell::F(rec.l2)];
        row.extend(rec.hs.iter().map(|&v| Cell::F(v)));
        row.push(Cell::F(drift));
        row.push(Cell::F(rec.moment_x));
        row.extend(rec.weighted.iter().map(|&v| Cell::F(v)));
        t.push(row);
    }
    t
}

fn diagnostics_spec(m: &RunManifest) -> DiagnosticsSpec {
    DiagnosticsSpec {
        hs_orders: m.hs.clone(),
        weights: m.weights.clone(),
    }
}

pub fn simulate(m: &RunManifest, linear: bool) -> Result<Completed, ConfigFailure> {
    let command = if linear { "linear" } else { "simulate" };
    let phi = initial_data(m)?;
    let cfg = SolverConfig {
        nonlinear: !linear,
        ..m.solver
    };
    let RunOutput {
        series,
        final_state,
        abort,
    } = solver::run(&phi, &cfg, &diagnostics_spec(m))?;

    let mut outputs = Outputs::default();
    outputs.add("series.csv", series_table(&series).to_bytes());
    outputs.add("final.bozk", snapshot::encode(&final_state.field()));

    let mut s = summary_head(m, command);
    s.insert("solver".into(), json!(cfg));
    s.insert("records".into(), json!(series.records.len()));
    s.insert("t_reached".into(), json!(final_state.t));
    let conservation = match diagnostics::conservation_report(&series) {
        Ok(r) => json!(r),
        Err(_) => Value::Null,
    };
    s.insert("conservation".into(), conservation);
    s.insert("abort".into(), abort.as_ref().map_or(Value::Null, abort_record));
    outputs.add_json("summary.json", &Value::Object(s));

    Ok(match abort {
        Some(e) => Completed {
            outputs,
            code: EXIT_ABORT,
            message: format!("{command}: aborted: {e}"),
        },
        None => Completed {
            outputs,
            code: EXIT_OK,
            message: format!(
                "{command}: reached t = {} in {} steps",
                final_state.t, final_state.steps
            ),
        },
    })
}

pub fn picard(m: &RunManifest) -> Result<Completed, ConfigFailure> {
    let phi = initial_data(m)?;
    let cfg = SolverConfig {
        nonlinear: true,
        ..m.solver
    };
    let mut s = summary_head(m, "picard");
    s.insert("solver".into(), json!(cfg));
    let outcome = solver::picard_solve(&phi, cfg.t_final, cfg.mu, m.picard.max_iter, m.picard.tol, cfg.dealias);
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) if is_abort(&e) => {
            let mut outputs = Outputs::default();
            s.insert("abort".into(), abort_record(&e));
            outputs.add_json("summary.json", &Value::Object(s));
            return Ok(Completed {
                outputs,
                code: EXIT_ABORT,
                message: format!("picard: aborted: {e}"),
            });
        }
        Err(e) => return Err(e.into()),
    };
    // the same flow by the time-stepper, for comparison
    let (stepped, abort) = solver::evolve(&phi, &cfg, |st| Ok(st.field().max_abs()))?;
    let gap = match abort {
        None => json!(outcome.solution.zip_with(&stepped.field(), |a, b| a - b)?.l2_norm()),
        Some(_) => Value::Null,
    };

    let mut table = Table::new(&[("iteration", "index"), ("residual", "norm")]);
    for (k, r) in outcome.residuals.iter().enumerate() {
        table.push(vec![Cell::I(k as u64 + 1), Cell::F(*r)]);
    }
    let mut outputs = Outputs::default();
    outputs.add("picard_residuals.csv", table.to_bytes());
    outputs.add("final.bozk", snapshot::encode(&outcome.solution));
    s.insert("iterations".into(), json!(outcome.iterations));
    s.insert("final_residual".into(), json!(outcome.residuals.last()));
    s.insert("stepper_gap".into(), gap);
    s.insert("abort".into(), Value::Null);
    outputs.add_json("summary.json", &Value::Object(s));
    Ok(Completed {
        outputs,
        code: EXIT_OK,
        message: format!("picard: converged in {} iterations", outcome.iterations),
    })
}

/// `uc_report.csv`: one row per refinement level.
pub fn uc_table(rep: &UcReport) -> Table {
    let mut t = Table::new(&[
        ("level", "index"),
        ("window_norm", "norm"),
        ("ratio", "1"),
        ("verdict", "label"),
    ]);
    for (k, w) in rep.window_norms.iter().enumerate() {
        let ratio = if k == 0 {
            Cell::S(String::new())
        } else {
            Cell::F(rep.ratios[k - 1])
        };
        t.push(vec![
            Cell::I(k as u64),
            Cell::F(*w),
            ratio,
            Cell::S(rep.verdict.as_str().into()),
        ]);
    }
    t
}

pub fn persistence_csv(tab: &PersistenceTable) -> Table {
    let mut t = Table::new(&[("t", "time")]);
    for row in &tab.rows {
        t.column(format!("z_{}_{}", tab.s, row.r), "norm");
    }
    for row in &tab.rows {
        t.column(format!("l2r_{}", row.r), "norm");
    }
    for (k, &time) in tab.times.iter().enumerate() {
        let mut cells = vec![Cell::F(time)];
        cells.extend(tab.rows.iter().map(|r| Cell::F(r.series[k])));
        cells.extend(tab.rows.iter().map(|r| Cell::F(r.weighted[k])));
        t.push(cells);
    }
    t
}

enum UcPart {
    B1(bozk_core::Result<UcReport>),
    Persistence(bozk_core::Result<PersistenceTable>),
    Moment(Option<bozk_core::Result<uc_lab::MomentDrift>>),
}

pub fn uc(m: &RunManifest, threads: usize) -> Result<Completed, ConfigFailure> {
    let phi = initial_data(m)?;
    let cfg = SolverConfig {
        nonlinear: true,
        ..m.solver
    };
    let b1 = B1Config {
        cut: CutoffSpec { epsilon: m.uc.epsilon },
        levels: m.uc.levels,
        ..B1Config::default()
    };
    let pcfg = PersistenceConfig {
        r_list: m.uc.r_list.clone(),
        s: m.uc.s,
        growth_factor: m.uc.growth_factor,
        boundary_band: m.uc.boundary_band,
        boundary_tolerance: m.uc.boundary_tolerance,
    };
    pcfg.validate()?;
    b1.cut.validate()?;

    let t = m.uc.t;
    let phi_ref = &phi;
    let (pcfg_ref, cfg_ref) = (&pcfg, &cfg);
    let jobs: Vec<Job<UcPart>> = vec![
        Box::new(move || UcPart::B1(uc_lab::b1_indicator_with(phi_ref, t, &b1))),
        Box::new(move || UcPart::Persistence(uc_lab::persistence_scan(phi_ref, cfg_ref, pcfg_ref))),
        Box::new(move || {
            UcPart::Moment((cfg_ref.mu == 0.0).then(|| {
                let out = solver::run(phi_ref, cfg_ref, &DiagnosticsSpec::default())?.into_result()?;
                uc_lab::moment_drift(&out.series)
            }))
        }),
    ];
    let mut parts = pool::run_jobs(jobs, threads).into_iter();
    let (Some(UcPart::B1(b1_res)), Some(UcPart::Persistence(p_res)), Some(UcPart::Moment(m_res))) =
        (parts.next(), parts.next(), parts.next())
    else {
        unreachable!("jobs return in order")
    };

    let mut outputs = Outputs::default();
    let mut s = summary_head(m, "uc");
    s.insert("solver".into(), json!(cfg));
    let mut aborts = Vec::new();
    let mut check = |r: bozk_core::Result<()>| -> Result<(), ConfigFailure> {
        match r {
            Err(e) if is_abort(&e) => {
                aborts.push(e);
                Ok(())
            }
            Err(e) => Err(e.into()),
            Ok(()) => Ok(()),
        }
    };

    let mut b1_json = Value::Null;
    check(b1_res.map(|rep| {
        outputs.add("uc_report.csv", uc_table(&rep).to_bytes());
        b1_json = json!({ "t": t, "epsilon": m.uc.epsilon, "report": rep });
    }))?;
    let mut p_json = Value::Null;
    check(p_res.map(|tab| {
        outputs.add("persistence.csv", persistence_csv(&tab).to_bytes());
        p_json = json!(tab);
    }))?;
    let mut m_json = Value::Null;
    if let Some(res) = m_res {
        check(res.map(|d| m_json = json!(d)))?;
    }
    s.insert("b1_indicator".into(), b1_json);
    s.insert("persistence".into(), p_json);
    s.insert("moment_drift".into(), m_json);
    s.insert("aborts".into(), Value::Array(aborts.iter().map(abort_record).collect()));
    outputs.add_json("summary.json", &Value::Object(s));

    Ok(if aborts.is_empty() {
        Completed {
            outputs,
            code: EXIT_OK,
            message: "uc: done".into(),
        }
    } else {
        let msg = aborts.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ");
        Completed {
            outputs,
            code: EXIT_ABORT,
            message: format!("uc: aborted: {msg}"),
        }
    })
}

pub fn diagnose(m: &RunManifest) -> Result<Completed, ConfigFailure> {
    let u = initial_data(m)?;
    let mut specs = vec![NormSpec::Hs { s: 0.0 }];
    specs.extend(m.norms.iter().copied());
    let mut table = Table::new(&[("norm", "label"), ("value", "norm")]);
    let mut values = serde_json::Map::new();
    for spec in &specs {
        let v = diagnostics::norm(&u, spec)?;
        table.push(vec![Cell::S(spec.id()), Cell::F(v)]);
        values.insert(spec.id(), json!(v));
    }
    let mut outputs = Outputs::default();
    outputs.add("norms.csv", table.to_bytes());
    let mut s = summary_head(m, "diagnose");
    s.insert("norms".into(), Value::Object(values));
    s.insert(
        "boundary_mass_fraction".into(),
        json!(diagnostics::boundary_mass_fraction(&u, m.uc.boundary_band)),
    );
    s.insert("resolution_ratio".into(), json!(uc_lab::resolution_ratio(&u)));
    outputs.add_json("summary.json", &Value::Object(s));
    Ok(Completed {
        outputs,
        code: EXIT_OK,
        message: format!("diagnose: {} norms", specs.len()),
    })
}
