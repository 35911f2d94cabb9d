//! Browser bindings: a live BO-ZK evolution for a heatmap, the truncated
//! weight `β_N`, and a Stein half-derivative profile.

use std::f64::consts::PI;

use num_complex::Complex64;
use wasm_bindgen::prelude::*;

use bozk_core::fields::{self, GaussianParams};
use bozk_core::solver::{SimulationState, SolverConfig, Stepper};
use bozk_core::stein::{self, SteinConfig};
use bozk_core::uc_lab::{self, CutoffSpec};
use bozk_core::{weights, Grid2D, RealField};

fn js_err(e: bozk_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// A running simulation on an `n × n` grid over `[-L/2, L/2)²`.
#[wasm_bindgen]
pub struct Lab {
    stepper: Stepper,
    initial: RealField,
    state: SimulationState,
    dt: f64,
}

#[wasm_bindgen]
impl Lab {
    /// `kind` is `"gaussian"`, `"dx_gaussian"` or `"bumps"`.
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, length: f64, kind: &str, amplitude: f64, dt: f64, mu: f64) -> Result<Lab, JsError> {
        let grid = Grid2D::new(n, n, length, length).map_err(js_err)?;
        let p = GaussianParams {
            amplitude,
            ..Default::default()
        };
        let phi = match kind {
            "gaussian" => fields::gaussian(grid, &p),
            "dx_gaussian" => fields::dx_gaussian(grid, &p),
            "bumps" => fields::two_solitary_bumps(grid, amplitude, 1.0, 0.25 * length),
            other => return Err(JsError::new(&format!("unknown data kind '{other}'"))),
        };
        let cfg = SolverConfig {
            dt,
            t_final: dt,
            mu,
            ..Default::default()
        };
        cfg.validate().map_err(js_err)?;
        Ok(Lab {
            stepper: Stepper::new(grid, cfg, dt).map_err(js_err)?,
            state: SimulationState::new(&phi),
            initial: phi,
            dt,
        })
    }

    /// Advances `k` steps; fails on a CFL violation or blow-up.
    pub fn advance(&mut self, k: usize) -> Result<(), JsError> {
        for _ in 0..k {
            let (mut next, max_abs) = self.stepper.advance(&self.state).map_err(js_err)?;
            let limit = 0.5;
            let cfl = self.dt * max_abs * self.state.spectrum.grid().xi_max();
            if !(cfl <= limit) {
                return Err(JsError::new(&format!("CFL audit violated: {cfl:.3} > {limit}")));
            }
            next.t = self.state.t + self.dt;
            self.state = next;
        }
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.state.t
    }

    pub fn l2(&self) -> f64 {
        self.state.spectrum.l2_norm()
    }

    /// Row-major samples (x fastest) of the current field.
    pub fn field(&self) -> Vec<f64> {
        self.state.field().into_data()
    }

    /// Unique-continuation verdict for the initial data. Evolved fields, and
    /// the sech² bumps, fail the indicator's resolution audit on demo grids.
    pub fn uc_verdict(&self, t: f64) -> Result<String, JsError> {
        let rep = uc_lab::b1_indicator(&self.initial, t, CutoffSpec::default(), 4).map_err(js_err)?;
        Ok(rep.verdict.as_str().to_string())
    }
}

/// `β_N` sampled at `samples` points on `[0, x_max]`.
#[wasm_bindgen]
pub fn beta_curve(n: u32, x_max: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    let w = weights::TruncatedWeight::new(n).map_err(js_err)?;
    let m = samples.max(2);
    Ok((0..m).map(|k| w.value(x_max * k as f64 / (m - 1) as f64)).collect())
}

/// `𝒟^b f` at `samples` points on `[-width, width]` for `f` a Heaviside
/// step (`"step"`), a Gaussian bump (`"bump"`) or the phase `e^{iπx²/4}`
/// (`"chirp"`).
#[wasm_bindgen]
pub fn stein_profile(kind: &str, b: f64, width: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    let f: Box<dyn Fn(f64) -> Complex64> = match kind {
        "step" => Box::new(|x| Complex64::new(if x >= 0.0 { 1.0 } else { 0.0 }, 0.0)),
        "bump" => Box::new(|x| Complex64::new((-x * x).exp(), 0.0)),
        "chirp" => Box::new(|x| Complex64::new(0.0, 0.25 * PI * x * x).exp()),
        other => return Err(JsError::new(&format!("unknown profile '{other}'"))),
    };
    let r = 20.0;
    let cfg = SteinConfig::new(b, r).map_err(js_err)?;
    let step = 1e-2;
    let half = width + r + 4.0 * step;
    let sampled = stein::Samples::sample(f, 0.0, step, -half, half).map_err(js_err)?;
    let m = samples.max(2);
    let xs: Vec<f64> = (0..m)
        .map(|k| -width + 2.0 * width * k as f64 / (m - 1) as f64)
        .collect();
    let vals = stein::stein_derivative(&sampled, &cfg, &xs).map_err(js_err)?;
    Ok(vals.into_iter().map(|v| v.value).collect())
}
