//! Time evolution of `u_t + H u_xx + u_xyy + u u_x = μ Δu`.
//!
//! The stepper is classical RK4 applied to the integrating-factor variable
//! `v = E_μ(-t) û`, with the linear factors evaluated exactly. Only the
//! quadratic term is dealiased. [`picard_solve`] solves the same flow as a
//! fixed point of the Duhamel map on a fixed time grid.

use num_complex::Complex64;

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::operators;
use crate::spectral::{self, Grid2D, RealField, SpectrumField};
use crate::weights::WeightSpec;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_final: f64,
    pub mu: f64,
    pub dealias: bool,
    /// Record diagnostics every `stride` steps (and at the final time).
    pub stride: usize,
    /// Turns the quadratic term off (linear evolution only).
    pub nonlinear: bool,
    /// Upper bound for `dt max|u| max|ξ|`.
    pub cfl_limit: f64,
    /// Samples above this magnitude count as blow-up.
    pub blowup_threshold: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_final: 1.0,
            mu: 0.0,
            dealias: true,
            stride: 10,
            nonlinear: true,
            cfl_limit: 0.5,
            blowup_threshold: 1e8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!("T = {} must be positive", self.t_final)));
        }
        if self.dt > self.t_final * (1.0 + 1e-12) {
            return Err(Error::Config(format!("dt = {} exceeds T = {}", self.dt, self.t_final)));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::Config(format!("mu = {} must be >= 0", self.mu)));
        }
        if self.stride == 0 {
            return Err(Error::Config("diagnostic stride must be at least 1".into()));
        }
        if !(self.cfl_limit > 0.0) || !(self.blowup_threshold > 0.0) {
            return Err(Error::Config("audit limits must be positive".into()));
        }
        Ok(())
    }

    /// Number of steps to reach `t_final`; the last one may be shorter.
    pub fn steps(&self) -> usize {
        ((self.t_final / self.dt) - 1e-9).ceil().max(1.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    pub t: f64,
    pub spectrum: SpectrumField,
    pub steps: usize,
}

impl SimulationState {
    pub fn new(phi: &RealField) -> Self {
        Self {
            t: 0.0,
            spectrum: spectral::forward(phi),
            steps: 0,
        }
    }

    pub fn field(&self) -> RealField {
        spectral::inverse(&self.spectrum)
    }
}

/// Spectrum of `-½ ∂x(u²)`, and `max|u|` of the input field.
pub fn nonlinear_rhs_with_max(spec: &SpectrumField, dealias: bool) -> (SpectrumField, f64) {
    let grid = *spec.grid();
    let u = if dealias {
        spectral::inverse(&spectral::dealias(spec))
    } else {
        spectral::inverse(spec)
    };
    let max_abs = u.data().iter().fold(
        0.0_f64,
        |m, v| {
            if v.is_finite() {
                m.max(v.abs())
            } else {
                f64::INFINITY
            }
        },
    );
    let sq = u.map(|v| v * v);
    let mut out = spectral::forward(&sq);
    if dealias {
        spectral::dealias_in_place(&mut out);
    }
    let nx = grid.nx();
    for j in 0..grid.ny() {
        for i in 0..nx {
            let factor = if grid.is_x_nyquist(i) {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -0.5 * grid.xi(i))
            };
            out.data_mut()[j * nx + i] *= factor;
        }
    }
    (out, max_abs)
}

pub fn nonlinear_rhs(spec: &SpectrumField, dealias: bool) -> SpectrumField {
    nonlinear_rhs_with_max(spec, dealias).0
}

/// Precomputed integrating-factor RK4 stepper for a fixed `dt`.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: Grid2D,
    cfg: SolverConfig,
    dt: f64,
    full: Vec<Complex64>,
    half: Vec<Complex64>,
}

impl Stepper {
    pub fn new(grid: Grid2D, cfg: SolverConfig, dt: f64) -> Result<Self> {
        Ok(Self {
            grid,
            cfg,
            dt,
            full: operators::propagator_factors(&grid, dt, cfg.mu)?,
            half: operators::propagator_factors(&grid, 0.5 * dt, cfg.mu)?,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn rhs(&self, spec: &SpectrumField) -> (SpectrumField, f64) {
        if self.cfg.nonlinear {
            nonlinear_rhs_with_max(spec, self.cfg.dealias)
        } else {
            (SpectrumField::zeros(self.grid), f64::NAN)
        }
    }

    /// One step; also returns `max|u|` at the start of the step when the
    /// nonlinearity is active.
    pub fn advance(&self, state: &SimulationState) -> Result<(SimulationState, f64)> {
        let h = self.dt;
        let u0 = state.spectrum.data();
        let (a, max_abs) = self.rhs(&state.spectrum);
        if self.cfg.nonlinear && !(max_abs <= self.cfg.blowup_threshold) {
            return Err(Error::BlowUp { t: state.t, max_abs });
        }
        let n = u0.len();
        let e1 = &self.full;
        let e2 = &self.half;
        let stage = |f: &dyn Fn(usize) -> Complex64| -> SpectrumField {
            let data = (0..n).map(f).collect();
            SpectrumField::new(self.grid, data).expect("same grid")
        };

        let ua = stage(&|k| e2[k] * (u0[k] + 0.5 * h * a.data()[k]));
        let (b, _) = self.rhs(&ua);
        let ub = stage(&|k| e2[k] * u0[k] + 0.5 * h * b.data()[k]);
        let (c, _) = self.rhs(&ub);
        let uc = stage(&|k| e1[k] * u0[k] + h * e2[k] * c.data()[k]);
        let (d, _) = self.rhs(&uc);
        let mut next = stage(&|k| {
            e1[k] * u0[k] + h / 6.0 * (e1[k] * a.data()[k] + 2.0 * e2[k] * (b.data()[k] + c.data()[k]) + d.data()[k])
        });
        spectral::enforce_nyquist(&mut next);
        if next.data().iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::BlowUp {
                t: state.t + h,
                max_abs: f64::INFINITY,
            });
        }
        Ok((
            SimulationState {
                t: state.t + h,
                spectrum: next,
                steps: state.steps + 1,
            },
            max_abs,
        ))
    }
}

/// Advances `state` by `cfg.dt`.
pub fn step(state: &SimulationState, cfg: &SolverConfig) -> Result<SimulationState> {
    cfg.validate()?;
    let stepper = Stepper::new(*state.spectrum.grid(), *cfg, cfg.dt)?;
    Ok(stepper.advance(state)?.0)
}

/// What to record along a run.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DiagnosticsSpec {
    pub hs_orders: Vec<f64>,
    pub weights: Vec<WeightSpec>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Record {
    pub t: f64,
    pub l2: f64,
    pub hs: Vec<f64>,
    /// `û(0, η_j, t)` in FFT order.
    #[serde(skip)]
    pub zero_mode: Vec<Complex64>,
    /// First x-moment `Σ x u dx dy` with `x` wrapped to `[-Lx/2, Lx/2)`.
    pub moment_x: f64,
    /// `‖w u‖` for each configured weight.
    pub weighted: Vec<f64>,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub grid: Grid2D,
    pub mu: f64,
    pub spec: DiagnosticsSpec,
    pub records: Vec<Record>,
}

impl TimeSeries {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    /// `max_j |û(0, η_j, t) - û(0, η_j, 0)|` per record.
    pub fn zero_mode_drift(&self) -> Vec<f64> {
        let Some(first) = self.records.first() else {
            return Vec::new();
        };
        self.records
            .iter()
            .map(|r| {
                r.zero_mode
                    .iter()
                    .zip(&first.zero_mode)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max)
            })
            .collect()
    }
}

/// Evaluates the recorded quantities on one field.
#[derive(Debug, Clone)]
pub struct Recorder {
    spec: DiagnosticsSpec,
    weights: Vec<RealField>,
    xs: RealField,
}

impl Recorder {
    pub fn new(grid: &Grid2D, spec: &DiagnosticsSpec) -> Result<Self> {
        let weights = spec
            .weights
            .iter()
            .map(|w| crate::weights::weight_field(grid, w))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec: spec.clone(),
            weights,
            xs: RealField::from_fn(*grid, |x, _| x),
        })
    }

    pub fn record(&self, t: f64, spectrum: &SpectrumField) -> Record {
        let u = spectral::inverse(spectrum);
        let hs = self
            .spec
            .hs_orders
            .iter()
            .map(|&s| diagnostics::sobolev_norm_spectrum(spectrum, s))
            .collect();
        let weighted = self.weights.iter().map(|w| diagnostics::weighted_l2(&u, w)).collect();
        Record {
            t,
            l2: u.l2_norm(),
            hs,
            zero_mode: spectrum.zero_mode(),
            moment_x: u.dot(&self.xs).expect("same grid"),
            weighted,
            max_abs: u.max_abs(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: TimeSeries,
    pub final_state: SimulationState,
    /// Set when the run stopped early on a failed audit.
    pub abort: Option<Error>,
}

impl RunOutput {
    pub fn final_field(&self) -> RealField {
        self.final_state.field()
    }

    pub fn into_result(self) -> Result<RunOutput> {
        match self.abort {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }
}

fn cfl_value(grid: &Grid2D, dt: f64, max_abs: f64) -> f64 {
    dt * max_abs * grid.xi_max()
}

/// Evolves `phi` to `cfg.t_final`, calling `observe` at `t = 0`, every
/// `stride` steps and at the final time. `observe` returns `max|u|` of the
/// observed state, which feeds the CFL and blow-up audits.
///
/// Errors from `observe` are returned as `Err`. A failed audit stops the
/// evolution and is returned alongside the last state.
pub fn evolve(
    phi: &RealField,
    cfg: &SolverConfig,
    mut observe: impl FnMut(&SimulationState) -> Result<f64>,
) -> Result<(SimulationState, Option<Error>)> {
    cfg.validate()?;
    let grid = *phi.grid();
    let steps = cfg.steps();
    let stepper = Stepper::new(grid, *cfg, cfg.dt)?;
    let last_dt = cfg.t_final - (steps - 1) as f64 * cfg.dt;
    let last = if (last_dt - cfg.dt).abs() > 1e-12 * cfg.dt {
        Some(Stepper::new(grid, *cfg, last_dt)?)
    } else {
        None
    };

    let audit = |t: f64, max_abs: f64| -> Option<Error> {
        if !(max_abs <= cfg.blowup_threshold) {
            return Some(Error::BlowUp { t, max_abs });
        }
        let cfl = cfl_value(&grid, cfg.dt, max_abs);
        if cfg.nonlinear && cfl > cfg.cfl_limit {
            return Some(Error::CflViolation {
                t,
                value: cfl,
                limit: cfg.cfl_limit,
            });
        }
        None
    };

    let mut state = SimulationState::new(phi);
    let max0 = observe(&state)?;
    if let Some(e) = audit(0.0, max0) {
        return Ok((state, Some(e)));
    }
    for k in 1..=steps {
        let st = match (&last, k == steps) {
            (Some(l), true) => l,
            _ => &stepper,
        };
        match st.advance(&state) {
            Ok((mut next, _)) => {
                next.t = if k == steps { cfg.t_final } else { k as f64 * cfg.dt };
                state = next;
            }
            Err(e) => return Ok((state, Some(e))),
        }
        if k % cfg.stride == 0 || k == steps {
            let max_abs = observe(&state)?;
            if let Some(e) = audit(state.t, max_abs) {
                return Ok((state, Some(e)));
            }
        }
    }
    Ok((state, None))
}

/// Evolves `phi` to `cfg.t_final`, recording diagnostics every stride.
///
/// Configuration errors are returned as `Err`; audit failures during the run
/// stop it and are reported in [`RunOutput::abort`] together with the
/// records gathered so far.
pub fn run(phi: &RealField, cfg: &SolverConfig, diag: &DiagnosticsSpec) -> Result<RunOutput> {
    cfg.validate()?;
    let grid = *phi.grid();
    let recorder = Recorder::new(&grid, diag)?;
    let mut records = Vec::new();
    let (final_state, abort) = evolve(phi, cfg, |s| {
        let rec = recorder.record(s.t, &s.spectrum);
        let m = rec.max_abs;
        records.push(rec);
        Ok(m)
    })?;
    Ok(RunOutput {
        series: TimeSeries {
            grid,
            mu: cfg.mu,
            spec: diag.clone(),
            records,
        },
        final_state,
        abort,
    })
}

/// Result of [`picard_solve`].
#[derive(Debug, Clone)]
pub struct PicardOutcome {
    pub solution: RealField,
    /// `sup_k ‖u^{(n+1)}(t_k) - u^{(n)}(t_k)‖` per iteration.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// Number of nodes of the fixed Picard time grid.
pub const PICARD_NODES: usize = 33;

/// `∫_0^1 e^{z(1-σ)} σ^p dσ` for `p = 0, 1, 2`.
fn phi_integrals(z: Complex64) -> [Complex64; 3] {
    if z.norm() < 0.5 {
        // Σ_n z^n p! / (n + p + 1)!
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (p, slot) in out.iter_mut().enumerate() {
            let mut term = Complex64::new(1.0 / (p as f64 + 1.0), 0.0);
            let mut sum = term;
            for n in 1..30 {
                term *= z / (n as f64 + p as f64 + 1.0);
                sum += term;
            }
            *slot = sum;
        }
        out
    } else {
        let ez = z.exp();
        let one = Complex64::new(1.0, 0.0);
        [
            (ez - one) / z,
            (ez - one - z) / (z * z),
            2.0 * (ez - one - z - 0.5 * z * z) / (z * z * z),
        ]
    }
}

/// Solves `u(t) = E_μ(t)φ - ∫_0^t E_μ(t - s) ½∂x(u²)(s) ds` on `[0, T]` by
/// Picard iteration.
///
/// The time integral uses composite Simpson on 33 equispaced nodes; nodes
/// with an odd index close with Simpson's 3/8 rule, and the first node uses
/// exact exponential weights for the quadratic interpolant of the nonlinear
/// term (so the diffusive factor is never applied backwards in time).
pub fn picard_solve(
    phi: &RealField,
    t_final: f64,
    mu: f64,
    max_iter: usize,
    tol: f64,
    dealias: bool,
) -> Result<PicardOutcome> {
    if !(mu > 0.0) {
        return Err(Error::Config(format!("Picard solver needs mu > 0 (got {mu})")));
    }
    if !(t_final > 0.0) || max_iter == 0 || !(tol > 0.0) {
        return Err(Error::Config(
            "Picard solver needs T > 0, max_iter >= 1, tol > 0".into(),
        ));
    }
    let grid = *phi.grid();
    let m = PICARD_NODES - 1;
    let h = t_final / m as f64;
    let len = grid.len();

    // powers[j] = E_μ(j h)
    let powers: Vec<Vec<Complex64>> = (0..=m)
        .map(|j| operators::propagator_factors(&grid, j as f64 * h, mu))
        .collect::<Result<_>>()?;
    let first_weights = first_panel_weights(&grid, h, mu);

    let phi_hat = spectral::forward(phi);
    let free: Vec<Vec<Complex64>> = powers
        .iter()
        .map(|e| e.iter().zip(phi_hat.data()).map(|(a, b)| a * b).collect())
        .collect();

    let mut current = free.clone();
    let mut residuals = Vec::new();
    for iter in 1..=max_iter {
        let nonlinear: Vec<Vec<Complex64>> = current
            .iter()
            .map(|u| {
                let s = SpectrumField::new(grid, u.clone()).expect("same grid");
                nonlinear_rhs(&s, dealias).data().to_vec()
            })
            .collect();

        let mut next = free.clone();
        for k in 1..=m {
            let target = &mut next[k];
            if k == 1 {
                for s in 0..len {
                    let w = &first_weights[s];
                    target[s] += w[0] * nonlinear[0][s] + w[1] * nonlinear[1][s] + w[2] * nonlinear[2][s];
                }
                continue;
            }
            for (l, w) in time_weights(k, h) {
                let e = &powers[k - l];
                let n = &nonlinear[l];
                for s in 0..len {
                    target[s] += w * e[s] * n[s];
                }
            }
        }

        let mut residual = 0.0_f64;
        for (a, b) in next.iter().zip(&current) {
            let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
            residual = residual.max((d * grid.spectral_cell()).sqrt());
        }
        residuals.push(residual);
        current = next;
        if residual < tol {
            let mut last = SpectrumField::new(grid, current[m].clone())?;
            spectral::enforce_nyquist(&mut last);
            return Ok(PicardOutcome {
                solution: spectral::inverse(&last),
                residuals,
                iterations: iter,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: *residuals.last().unwrap_or(&f64::NAN),
    })
}

/// Quadrature weights `(l, w_l)` for `∫_0^{t_k} g`, `k ≥ 2`, on nodes `l h`.
fn time_weights(k: usize, h: f64) -> Vec<(usize, f64)> {
    let mut w = vec![0.0; k + 1];
    let start = if k % 2 == 1 {
        // 3/8 rule on [t_0, t_3]
        for (l, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[l] += 3.0 * h / 8.0 * c;
        }
        3
    } else {
        0
    };
    let mut l = start;
    while l + 2 <= k {
        w[l] += h / 3.0;
        w[l + 1] += 4.0 * h / 3.0;
        w[l + 2] += h / 3.0;
        l += 2;
    }
    w.into_iter().enumerate().collect()
}

/// Per-slot weights of `∫_0^h E(h - s) q(s) ds` where `q` is the quadratic
/// through the values at `0, h, 2h`.
fn first_panel_weights(grid: &Grid2D, h: f64, mu: f64) -> Vec<[Complex64; 3]> {
    let mut out = Vec::with_capacity(grid.len());
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let z = spectral::symbol_at(grid, i, j, &|xi, eta| {
                Complex64::new(-mu * (xi * xi + eta * eta), operators::dispersion(xi, eta))
            }) * h;
            let [i0, i1, i2] = phi_integrals(z);
            out.push([
                h * 0.5 * (i2 - 3.0 * i1 + 2.0 * i0),
                h * (2.0 * i1 - i2),
                h * 0.5 * (i2 - i1),
            ]);
        }
    }
    out
}
