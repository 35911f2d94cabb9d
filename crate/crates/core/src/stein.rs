//! The Stein derivative
//!
//! ```text
//! D^b f(x) = ( ∫ |f(x) - f(y)|² / |x - y|^{1+2b} dy )^{1/2},   0 < b < 1,
//! ```
//!
//! evaluated by quadrature for functions of one variable, together with the
//! closed-form phase bounds and a refinement test that tells jump
//! discontinuities (where `D^{1/2} f` is not locally square integrable) from
//! smooth functions.
//!
//! The integral is split at `ρ = |x - y|` into an inner patch `ρ < h`, where
//! `f` is replaced by its linear model and integrated exactly, the quadrature
//! range `h ≤ ρ ≤ R`, and the tail `ρ > R`, which is only bounded.

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quadrature::Rule;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SteinConfig {
    pub b: f64,
    /// Outer truncation radius `R`.
    pub r_outer: f64,
    /// Inner cutoff radius `h`.
    pub h_inner: f64,
    /// Gauss nodes per decade of `ρ` between `h` and the sample step.
    pub nodes_per_decade: usize,
}

impl SteinConfig {
    pub fn new(b: f64, r_outer: f64) -> Result<Self> {
        let cfg = Self {
            b,
            r_outer,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_order(self.b)?;
        if !(self.h_inner > 0.0 && self.h_inner < 1.0 && self.r_outer > 1.0 && self.r_outer.is_finite()) {
            return Err(Error::Config(format!(
                "Stein radii must satisfy 0 < h < 1 < R (h = {}, R = {})",
                self.h_inner, self.r_outer
            )));
        }
        if self.nodes_per_decade < GAUSS_NODES {
            return Err(Error::Config(format!(
                "nodes_per_decade must be at least {GAUSS_NODES}"
            )));
        }
        Ok(())
    }

    /// `2 · 4 sup|f|² R^{-2b} / (2b)`, a bound for the omitted `ρ > R` part
    /// of the squared integral (both sides of `x`).
    pub fn tail_bound(&self, sup_abs: f64) -> f64 {
        8.0 * sup_abs * sup_abs * self.r_outer.powf(-2.0 * self.b) / (2.0 * self.b)
    }
}

impl Default for SteinConfig {
    fn default() -> Self {
        Self {
            b: 0.5,
            r_outer: 10.0,
            h_inner: 1e-8,
            nodes_per_decade: 16,
        }
    }
}

fn check_order(b: f64) -> Result<()> {
    if b > 0.0 && b < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("Stein order b = {b} outside (0, 1)")))
    }
}

const GAUSS_NODES: usize = 4;

/// Uniform samples `values[k] = f(origin + k step)`, interpolated by local
/// cubics between nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    origin: f64,
    step: f64,
    values: Vec<Complex64>,
}

impl Samples {
    pub fn new(origin: f64, step: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite() && origin.is_finite()) {
            return Err(Error::Config(format!("sample step {step} must be positive")));
        }
        if values.len() < 4 {
            return Err(Error::InsufficientData("need at least 4 samples".into()));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Config("samples must be finite".into()));
        }
        Ok(Self { origin, step, values })
    }

    pub fn from_real(origin: f64, step: f64, values: &[f64]) -> Result<Self> {
        Self::new(origin, step, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Samples `f` on `origin + k step` covering `[a, b]`.
    pub fn sample(f: impl Fn(f64) -> Complex64, origin: f64, step: f64, a: f64, b: f64) -> Result<Self> {
        let k0 = ((a - origin) / step).floor() as i64;
        let k1 = ((b - origin) / step).ceil() as i64;
        let start = origin + k0 as f64 * step;
        let values = (0..=(k1 - k0)).map(|k| f(start + k as f64 * step)).collect();
        Self::new(start, step, values)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.origin, self.node(self.values.len() - 1))
    }

    fn node(&self, k: usize) -> f64 {
        self.origin + k as f64 * self.step
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Stencil start and local coordinate for the cubic through four nodes.
    fn stencil(&self, x: f64) -> (usize, f64) {
        let n = self.values.len();
        let s = (x - self.origin) / self.step;
        let cell = (s.floor().max(0.0) as usize).min(n - 2);
        let start = cell.saturating_sub(1).min(n - 4);
        (start, s - start as f64)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let (k, t) = self.stencil(x);
        let v = &self.values[k..k + 4];
        let w = [
            -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0,
            t * (t - 2.0) * (t - 3.0) / 2.0,
            -t * (t - 1.0) * (t - 3.0) / 2.0,
            t * (t - 1.0) * (t - 2.0) / 6.0,
        ];
        v[0] * w[0] + v[1] * w[1] + v[2] * w[2] + v[3] * w[3]
    }

    pub fn derivative(&self, x: f64) -> Complex64 {
        let (k, t) = self.stencil(x);
        let v = &self.values[k..k + 4];
        let w = [
            -(3.0 * t * t - 12.0 * t + 11.0) / 6.0,
            (3.0 * t * t - 10.0 * t + 6.0) / 2.0,
            -(3.0 * t * t - 8.0 * t + 3.0) / 2.0,
            (3.0 * t * t - 6.0 * t + 2.0) / 6.0,
        ];
        (v[0] * w[0] + v[1] * w[1] + v[2] * w[2] + v[3] * w[3]) / self.step
    }
}

/// One evaluation of `D^b f(x)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SteinValue {
    pub x: f64,
    /// Square root of the inner patch plus the quadrature part.
    pub value: f64,
    /// Bound on the omitted tail of the squared integral.
    pub tail_bound: f64,
}

impl SteinValue {
    /// Upper end of the error bar: `(value² + tail)^{1/2}`.
    pub fn upper(&self) -> f64 {
        (self.value * self.value + self.tail_bound).sqrt()
    }
}

/// Something the engine can integrate: point values, a derivative for the
/// inner patch, and the places where the quadrature must break panels.
trait Signal {
    fn value(&self, x: f64) -> Complex64;
    fn slope(&self, x: f64) -> Complex64;
    /// Panel breakpoints `ρ` in `(lo, hi)` for the side `sign` of `x`.
    fn breaks(&self, x: f64, sign: f64, lo: f64, hi: f64, out: &mut Vec<f64>);
    /// Scale below which the integrand is smooth in `ρ`.
    fn resolution(&self) -> f64;
}

impl Signal for Samples {
    fn value(&self, x: f64) -> Complex64 {
        self.eval(x)
    }

    fn slope(&self, x: f64) -> Complex64 {
        self.derivative(x)
    }

    fn breaks(&self, x: f64, sign: f64, lo: f64, hi: f64, out: &mut Vec<f64>) {
        // nodes at distance ρ = sign (x_k - x)
        let s = (x - self.origin) / self.step;
        if sign > 0.0 {
            let mut k = s.floor() as i64 + 1;
            loop {
                let rho = self.origin + k as f64 * self.step - x;
                if rho >= hi {
                    break;
                }
                if rho > lo {
                    out.push(rho);
                }
                k += 1;
            }
        } else {
            let mut k = s.ceil() as i64 - 1;
            loop {
                let rho = x - (self.origin + k as f64 * self.step);
                if rho >= hi {
                    break;
                }
                if rho > lo {
                    out.push(rho);
                }
                k -= 1;
            }
        }
    }

    fn resolution(&self) -> f64 {
        self.step
    }
}

struct Analytic<F, G> {
    f: F,
    df: G,
    panel: f64,
}

impl<F: Fn(f64) -> Complex64, G: Fn(f64) -> Complex64> Signal for Analytic<F, G> {
    fn value(&self, x: f64) -> Complex64 {
        (self.f)(x)
    }

    fn slope(&self, x: f64) -> Complex64 {
        (self.df)(x)
    }

    fn breaks(&self, _x: f64, _sign: f64, lo: f64, hi: f64, out: &mut Vec<f64>) {
        let mut k = (lo / self.panel).floor() + 1.0;
        while k * self.panel < hi {
            out.push(k * self.panel);
            k += 1.0;
        }
    }

    fn resolution(&self) -> f64 {
        self.panel
    }
}

/// Squared Stein integral over `ρ ≤ R`, with the inner patch modelled.
fn squared_integral(sig: &impl Signal, cfg: &SteinConfig, rule: &Rule, x: f64) -> f64 {
    let b = cfg.b;
    let h = cfg.h_inner;
    let fx = sig.value(x);
    let inner = 2.0 * sig.slope(x).norm_sqr() * h.powf(2.0 - 2.0 * b) / (2.0 - 2.0 * b);

    let near_end = sig.resolution().min(cfg.r_outer).max(h);
    let panels_per_decade = (cfg.nodes_per_decade / GAUSS_NODES).max(1);
    let decades = (near_end / h).log10();
    let n_log = (decades * panels_per_decade as f64).ceil().max(1.0) as usize;

    let mut total = inner;
    let mut pts = Vec::new();
    for sign in [1.0, -1.0] {
        pts.clear();
        pts.push(h);
        for k in 1..n_log {
            pts.push(h * (near_end / h).powf(k as f64 / n_log as f64));
        }
        pts.push(near_end);
        sig.breaks(x, sign, h, cfg.r_outer, &mut pts);
        pts.push(cfg.r_outer);
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
        for w in pts.windows(2) {
            let (a, c) = (w[0], w[1]);
            if c <= a {
                continue;
            }
            total += rule.integrate(a, c, |rho| {
                (fx - sig.value(x + sign * rho)).norm_sqr() * rho.powf(-1.0 - 2.0 * b)
            });
        }
    }
    total
}

/// `D^b f` at each point of `xs` from uniform samples of `f`.
///
/// Every evaluation point must keep a distance `R` (plus two sample steps)
/// from the ends of the sampled interval.
pub fn stein_derivative(f: &Samples, cfg: &SteinConfig, xs: &[f64]) -> Result<Vec<SteinValue>> {
    cfg.validate()?;
    let (lo, hi) = f.domain();
    let margin = cfg.r_outer + 2.0 * f.step;
    let rule = Rule::new(GAUSS_NODES);
    let tail = cfg.tail_bound(f.sup_abs());
    xs.iter()
        .map(|&x| {
            if !(x - margin >= lo && x + margin <= hi) {
                return Err(Error::OutOfDomain { x });
            }
            Ok(SteinValue {
                x,
                value: squared_integral(f, cfg, &rule, x).sqrt(),
                tail_bound: tail,
            })
        })
        .collect()
}

/// `D^b f` for a function given in closed form on all of `ℝ`.
///
/// `panel` is the quadrature panel width beyond the near field; it should
/// resolve the oscillations of `f`. `sup_abs` bounds `|f|` for the tail bar.
pub fn stein_derivative_fn(
    f: impl Fn(f64) -> Complex64,
    df: impl Fn(f64) -> Complex64,
    panel: f64,
    sup_abs: f64,
    cfg: &SteinConfig,
    xs: &[f64],
) -> Result<Vec<SteinValue>> {
    cfg.validate()?;
    if !(panel > 0.0 && panel.is_finite()) {
        return Err(Error::Config(format!("panel width {panel} must be positive")));
    }
    let sig = Analytic { f, df, panel };
    let rule = Rule::new(GAUSS_NODES);
    let tail = cfg.tail_bound(sup_abs);
    Ok(xs
        .iter()
        .map(|&x| SteinValue {
            x,
            value: squared_integral(&sig, cfg, &rule, x).sqrt(),
            tail_bound: tail,
        })
        .collect())
}

/// `(2/(1-b) + 2/b)^{1/2} (η² t)^b`, the explicit upper bound for
/// `D^b(e^{i t η² x})`.
pub fn phase_bound(b: f64, eta: f64, t: f64) -> Result<f64> {
    check_order(b)?;
    if !(t >= 0.0) {
        return Err(Error::Config(format!("t = {t} must be >= 0")));
    }
    Ok((2.0 / (1.0 - b) + 2.0 / b).sqrt() * (eta * eta * t).powf(b))
}

/// `D^b(e^{i a x}) / |a|^b`, from `∫ |1 - e^{iy}|² |y|^{-1-2b} dy = -4Γ(-2b)cos(πb)`.
pub fn plane_wave_constant(b: f64) -> Result<f64> {
    check_order(b)?;
    let u = 1.0 - 2.0 * b;
    // cos(πb) / (1 - 2b), continuous through b = 1/2
    let ratio = if u.abs() < 1e-6 {
        0.5 * std::f64::consts::PI * (1.0 - (std::f64::consts::PI * u).powi(2) / 24.0)
    } else {
        (std::f64::consts::PI * b).cos() / u
    };
    Ok((4.0 * gamma(2.0 - 2.0 * b) * ratio / (2.0 * b)).sqrt())
}

/// `D^b(e^{-i x|x|})(0) = (-2Γ(-b)cos(πb/2))^{1/2}`.
pub fn mixed_phase_origin(b: f64) -> Result<f64> {
    check_order(b)?;
    Ok((2.0 * gamma(1.0 - b) * (0.5 * std::f64::consts::PI * b).cos() / b).sqrt())
}

/// Safety factor on the calibrated constant of [`mixed_phase_bound`].
pub const MIXED_PHASE_MARGIN: f64 = 1.25;

/// Constant `c₀(b)` of [`mixed_phase_bound`].
///
/// By scaling, `D^b(e^{-itx|x|})(x) = t^{b/2} G_b(√t x)` with
/// `G_b = D^b(e^{-iz|z|})`. `G_b(0)` is known in closed form and
/// `G_b(z) ~ (2|z|)^b D^b(e^{iy})` for large `|z|`, so the larger of the two
/// end values, times a margin, bounds `G_b(z) / (1 + |z|^b)`.
pub fn mixed_phase_constant(b: f64) -> Result<f64> {
    let far = 2f64.powf(b) * plane_wave_constant(b)?;
    Ok(MIXED_PHASE_MARGIN * mixed_phase_origin(b)?.max(far))
}

/// `c₀(b) (t^{b/2} + t^b |x|^b)`, bounding `D^b(e^{-itx|x|})(x)`.
pub fn mixed_phase_bound(b: f64, t: f64, x: f64) -> Result<f64> {
    check_order(b)?;
    if !(t >= 0.0) {
        return Err(Error::Config(format!("t = {t} must be >= 0")));
    }
    Ok(mixed_phase_constant(b)? * (t.powf(0.5 * b) + t.powf(b) * x.abs().powf(b)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Divergent,
    Convergent,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Divergent => "divergent",
            Verdict::Convergent => "convergent",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Settings of the refinement test. Window masses `Σ h |D^b f(x_j)|²` over
/// `|x_j - center| < half_width` are compared level to level, with
/// `x_j = center + (j + ½) h` so that a jump at `center` falls between
/// evaluation points.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DivergenceConfig {
    pub b: f64,
    pub levels: usize,
    pub center: f64,
    pub half_width: f64,
    /// Step at level 0; level `k` uses `h0 2^{-k}`.
    pub h0: f64,
    pub r_outer: f64,
    /// Mass ratio above `1 + delta_div` (last two levels) means divergence.
    pub delta_div: f64,
    /// Mass ratio within `1 ± delta_conv` (last two levels) means convergence.
    pub delta_conv: f64,
}

impl Default for DivergenceConfig {
    fn default() -> Self {
        Self {
            b: 0.5,
            levels: 4,
            center: 0.0,
            half_width: 0.25,
            h0: 0.25 / 8.0,
            r_outer: 2.0,
            delta_div: 0.10,
            delta_conv: 0.02,
        }
    }
}

impl DivergenceConfig {
    pub fn validate(&self) -> Result<()> {
        check_order(self.b)?;
        if self.levels < 3 {
            return Err(Error::InsufficientData(format!(
                "need at least 3 levels, got {}",
                self.levels
            )));
        }
        if !(self.half_width > 0.0 && self.h0 > 0.0 && self.h0 <= self.half_width) {
            return Err(Error::Config("need 0 < h0 <= half_width".into()));
        }
        if !(self.r_outer > 1.0) {
            return Err(Error::Config("outer radius must exceed 1".into()));
        }
        if !(self.delta_div > 0.0 && self.delta_conv > 0.0) {
            return Err(Error::Config("thresholds must be positive".into()));
        }
        Ok(())
    }

    pub fn step(&self, level: usize) -> f64 {
        self.h0 * 0.5f64.powi(level as i32)
    }

    /// Evaluation points of one level.
    pub fn window_points(&self, level: usize) -> Vec<f64> {
        let h = self.step(level);
        let j = (self.half_width / h).round() as i64;
        (-j..j).map(|k| self.center + (k as f64 + 0.5) * h).collect()
    }

    /// Sampled interval needed at one level.
    pub fn sample_range(&self) -> (f64, f64) {
        let m = self.half_width + self.r_outer + 4.0 * self.h0;
        (self.center - m, self.center + m)
    }

    fn stein(&self) -> SteinConfig {
        SteinConfig {
            b: self.b,
            r_outer: self.r_outer,
            ..SteinConfig::default()
        }
    }
}

/// Per-level window masses, ratios and the verdict.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RefinementReport {
    pub steps: Vec<f64>,
    /// `Σ h |D^b f(x_j)|²` over the window.
    pub masses: Vec<f64>,
    /// `masses[k+1] / masses[k]`.
    pub ratios: Vec<f64>,
    pub verdict: Verdict,
}

impl RefinementReport {
    pub fn norms(&self) -> Vec<f64> {
        self.masses.iter().map(|m| m.sqrt()).collect()
    }
}

/// Verdict from the last two mass ratios. A sequence of zero masses is
/// convergent.
pub fn classify(masses: &[f64], delta_div: f64, delta_conv: f64) -> (Vec<f64>, Verdict) {
    let ratios: Vec<f64> = masses
        .windows(2)
        .map(|w| if w[0] == 0.0 && w[1] == 0.0 { 1.0 } else { w[1] / w[0] })
        .collect();
    let tail = &ratios[ratios.len().saturating_sub(2)..];
    let verdict = if tail.iter().all(|&r| r > 1.0 + delta_div) {
        Verdict::Divergent
    } else if tail.iter().all(|&r| (r - 1.0).abs() <= delta_conv) {
        Verdict::Convergent
    } else {
        Verdict::Inconclusive
    };
    (ratios, verdict)
}

/// Window mass of `D^b f` at one level from samples of `f`.
pub fn window_mass(f: &Samples, cfg: &DivergenceConfig, level: usize) -> Result<f64> {
    let xs = cfg.window_points(level);
    let vals = stein_derivative(f, &cfg.stein(), &xs)?;
    Ok(cfg.step(level) * vals.iter().map(|v| v.value * v.value).sum::<f64>())
}

/// Refines the sampling of `f` level by level and classifies the growth of
/// the window mass of `D^b f`.
pub fn refine_divergence(f: impl Fn(f64) -> Complex64, cfg: &DivergenceConfig) -> Result<RefinementReport> {
    cfg.validate()?;
    let (a, b) = cfg.sample_range();
    let mut steps = Vec::with_capacity(cfg.levels);
    let mut masses = Vec::with_capacity(cfg.levels);
    for level in 0..cfg.levels {
        let h = cfg.step(level);
        let samples = Samples::sample(&f, cfg.center, h, a, b)?;
        steps.push(h);
        masses.push(window_mass(&samples, cfg, level)?);
    }
    let (ratios, verdict) = classify(&masses, cfg.delta_div, cfg.delta_conv);
    Ok(RefinementReport {
        steps,
        masses,
        ratios,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn wave(c: f64) -> impl Fn(f64) -> Complex64 {
        move |x| Complex64::new(0.0, c * x).exp()
    }

    fn sampled_wave(c: f64, half: f64, step: f64) -> Samples {
        Samples::sample(wave(c), 0.0, step, -half, half).unwrap()
    }

    /// `∫_0^∞ (1 - cos y) y^{-1-2b} dy` by splitting off the tail in closed
    /// form: independent of the gamma-function identity.
    fn cosine_integral(b: f64) -> f64 {
        let rule = Rule::new(20);
        let big = 2.0 * PI * 4000.0;
        // [0, 1] with y = u², which removes the endpoint singularity
        let mut s = rule.integrate(0.0, 1.0, |u| {
            let y = u * u;
            let c = if y < 1e-3 {
                0.5 * y * y - y.powi(4) / 24.0
            } else {
                1.0 - y.cos()
            };
            2.0 * c * u.powf(-1.0 - 4.0 * b)
        });
        let mut a = 1.0;
        let panel = PI / 8.0;
        while a < big {
            s += rule.integrate(a, a + panel, |y| (1.0 - y.cos()) * y.powf(-1.0 - 2.0 * b));
            a += panel;
        }
        // beyond `big` the cosine averages out: ∫ y^{-1-2b}
        s + big.powf(-2.0 * b) / (2.0 * b)
    }

    #[test]
    fn plane_wave_constant_matches_direct_quadrature() {
        for b in [0.25, 0.5, 0.75] {
            let want = (4.0 * cosine_integral(b)).sqrt();
            let got = plane_wave_constant(b).unwrap();
            assert!((got - want).abs() < 1e-4 * want, "b = {b}: {got} vs {want}");
        }
        assert!((plane_wave_constant(0.5).unwrap() - (2.0 * PI).sqrt()).abs() < 1e-12);
        let near = plane_wave_constant(0.5 + 1e-7).unwrap();
        assert!((near - (2.0 * PI).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn mixed_phase_origin_matches_quadrature() {
        // G_b(0)² = 2∫_0^∞ 2(1 - cos y²) y^{-1-2b} dy = 2 ∫ (1 - cos u) u^{-1-b} du
        for b in [0.25, 0.5, 0.75] {
            let want = (2.0 * cosine_integral(0.5 * b)).sqrt();
            let got = mixed_phase_origin(b).unwrap();
            assert!((got - want).abs() < 1e-4 * want, "b = {b}: {got} vs {want}");
        }
    }

    #[test]
    fn constant_gives_zero() {
        let f = Samples::sample(|_| Complex64::new(3.0, -1.0), 0.0, 0.1, -20.0, 20.0).unwrap();
        let cfg = SteinConfig::new(0.5, 10.0).unwrap();
        for v in stein_derivative(&f, &cfg, &[-2.0, 0.0, 3.3]).unwrap() {
            assert!(v.value < 1e-10, "{}", v.value);
        }
    }

    #[test]
    fn plane_wave_half_derivative() {
        for c in [1.0, 2.0, 4.0] {
            let cfg = SteinConfig::new(0.5, 400.0).unwrap();
            let f = sampled_wave(c, 410.0, 0.02);
            let xs = [-3.0, -0.37, 0.0, 1.0, 4.5];
            let vals = stein_derivative(&f, &cfg, &xs).unwrap();
            let want = (2.0 * PI * c).sqrt();
            for v in &vals {
                assert!((v.value - want).abs() < 1e-3 * want, "c = {c}: {} vs {want}", v.value);
                assert!(v.upper() >= v.value);
            }
            let (lo, hi) = vals
                .iter()
                .fold((f64::MAX, 0.0_f64), |(a, b), v| (a.min(v.value), b.max(v.value)));
            assert!(hi - lo < 1e-3 * want);
        }
    }

    #[test]
    fn plane_wave_general_order() {
        for (b, r) in [(0.25, 2.0e5), (0.75, 2.0e3)] {
            let c = 1.5;
            let cfg = SteinConfig::new(b, r).unwrap();
            let vals = stein_derivative_fn(
                wave(c),
                |x| Complex64::new(0.0, c) * Complex64::new(0.0, c * x).exp(),
                0.2,
                1.0,
                &cfg,
                &[0.0, 2.0],
            )
            .unwrap();
            let want = plane_wave_constant(b).unwrap() * c.powf(b);
            for v in vals {
                assert!((v.value - want).abs() < 1e-3 * want, "b = {b}: {} vs {want}", v.value);
                assert!(v.upper() >= want);
            }
        }
    }

    #[test]
    fn measured_phase_respects_bound() {
        for b in [0.25, 0.5, 0.75] {
            for (eta, t) in [(1.0, 1.0), (2.0, 0.5), (0.5, 3.0)] {
                let c = eta * eta * t;
                let cfg = SteinConfig::new(b, 2000.0).unwrap();
                let v = stein_derivative_fn(
                    wave(c),
                    |x| Complex64::new(0.0, c) * Complex64::new(0.0, c * x).exp(),
                    0.1 / c,
                    1.0,
                    &cfg,
                    &[0.0],
                )
                .unwrap()[0];
                assert!(v.upper() <= phase_bound(b, eta, t).unwrap());
            }
        }
    }

    #[test]
    fn phase_bound_examples() {
        assert!((phase_bound(0.5, 1.0, 1.0).unwrap() - 8f64.sqrt()).abs() < 1e-12);
        assert_eq!(phase_bound(0.5, 1.0, 0.0).unwrap(), 0.0);
        // η^{2b} = 2
        assert!((phase_bound(0.5, 2.0, 1.0).unwrap() - 2.0 * 8f64.sqrt()).abs() < 1e-12);
        assert!(phase_bound(1.0, 1.0, 1.0).is_err());
        assert!(phase_bound(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn mixed_phase_bound_holds_and_is_monotone() {
        for b in [0.25, 0.5, 0.75] {
            assert_eq!(mixed_phase_bound(b, 0.0, 3.0).unwrap(), 0.0);
            let mut prev = 0.0;
            for k in 0..20 {
                let v = mixed_phase_bound(b, 1.0, 0.25 * k as f64).unwrap();
                assert!(v >= prev);
                prev = v;
            }
        }
        let b = 0.5;
        let t = 1.0;
        let cfg = SteinConfig::new(b, 400.0).unwrap();
        let f = |x: f64| Complex64::new(0.0, -t * x * x.abs()).exp();
        let df = |x: f64| Complex64::new(0.0, -2.0 * t * x.abs()) * f(x);
        let xs: Vec<f64> = (0..9).map(|k| 0.5 * k as f64).collect();
        // the phase oscillates faster far out; resolve up to |x| ≈ R
        let vals = stein_derivative_fn(f, df, 1e-3, 1.0, &cfg, &xs).unwrap();
        for v in vals {
            assert!(v.upper() <= mixed_phase_bound(b, t, v.x).unwrap(), "x = {}", v.x);
        }
    }

    #[test]
    fn config_is_validated() {
        assert!(SteinConfig::new(0.0, 10.0).is_err());
        assert!(SteinConfig::new(1.0, 10.0).is_err());
        assert!(SteinConfig::new(0.5, 0.5).is_err());
        let f = sampled_wave(1.0, 5.0, 0.1);
        let cfg = SteinConfig::new(0.5, 4.0).unwrap();
        assert!(matches!(
            stein_derivative(&f, &cfg, &[2.0]),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn cubic_interpolation_is_exact_on_cubics() {
        let p = |x: f64| Complex64::new(x * x * x - 2.0 * x, 0.5 * x * x);
        let dp = |x: f64| Complex64::new(3.0 * x * x - 2.0, x);
        let s = Samples::sample(p, 0.0, 0.3, -2.0, 2.0).unwrap();
        for x in [-1.95, -0.1, 0.0, 0.77, 1.99] {
            assert!((s.eval(x) - p(x)).norm() < 1e-12);
            assert!((s.derivative(x) - dp(x)).norm() < 1e-11);
        }
    }

    fn heaviside(x: f64) -> Complex64 {
        Complex64::new(if x >= 0.0 { 1.0 } else { 0.0 }, 0.0)
    }

    #[test]
    fn heaviside_half_derivative_is_inverse_sqrt() {
        // away from the jump, D^{1/2}H(x)² = ∫ over the other side = 1/|x|
        let f = Samples::sample(heaviside, 0.0, 1e-3, -30.0, 30.0).unwrap();
        let cfg = SteinConfig::new(0.5, 25.0).unwrap();
        for x in [-0.5, 0.3, 1.0] {
            let v = stein_derivative(&f, &cfg, &[x]).unwrap()[0];
            // the far side is cut at R: ∫_{|x|}^{R} ρ^{-2} dρ
            let want = (1.0 / x.abs() - 1.0 / 25.0).sqrt();
            assert!((v.value - want).abs() < 2e-3 * want, "x = {x}: {} vs {want}", v.value);
        }
    }

    #[test]
    fn heaviside_diverges() {
        let rep = refine_divergence(heaviside, &DivergenceConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Divergent, "{rep:?}");
    }

    #[test]
    fn smooth_bump_converges() {
        let bump = |x: f64| Complex64::new((-4.0 * x * x).exp(), 0.0);
        let rep = refine_divergence(bump, &DivergenceConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Convergent, "{rep:?}");
    }

    #[test]
    fn wide_ramp_loses_divergence() {
        // a tanh ramp wider than the window behaves like a smooth function
        let ramp = |w: f64| move |x: f64| Complex64::new(0.5 * (1.0 + (x / w).tanh()), 0.0);
        let cfg = DivergenceConfig::default();
        let wide = refine_divergence(ramp(1.0), &cfg).unwrap();
        assert_eq!(wide.verdict, Verdict::Convergent, "{wide:?}");
        let sharp = refine_divergence(ramp(1e-6), &cfg).unwrap();
        assert_eq!(sharp.verdict, Verdict::Divergent, "{sharp:?}");
    }

    #[test]
    fn too_few_levels() {
        let cfg = DivergenceConfig {
            levels: 2,
            ..Default::default()
        };
        assert!(matches!(
            refine_divergence(heaviside, &cfg),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn zero_masses_are_convergent() {
        let (r, v) = classify(&[0.0, 0.0, 0.0], 0.1, 0.02);
        assert_eq!(r, vec![1.0, 1.0]);
        assert_eq!(v, Verdict::Convergent);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn absolutely_homogeneous(lambda in -5.0f64..5.0, x in -1.0f64..1.0) {
            let f = |x: f64| Complex64::new((-x * x).exp(), 0.3 * (x).sin());
            let cfg = SteinConfig::new(0.5, 5.0).unwrap();
            let s1 = Samples::sample(f, 0.0, 0.01, -7.0, 7.0).unwrap();
            let s2 = Samples::sample(|x| f(x) * lambda, 0.0, 0.01, -7.0, 7.0).unwrap();
            let a = stein_derivative(&s1, &cfg, &[x]).unwrap()[0].value;
            let b = stein_derivative(&s2, &cfg, &[x]).unwrap()[0].value;
            prop_assert!((b - lambda.abs() * a).abs() <= 1e-12 * a.max(1e-300) * lambda.abs().max(1.0));
        }

        #[test]
        fn translation_invariant(shift in -1.0f64..1.0, x in -1.0f64..1.0) {
            let f = |x: f64| Complex64::new((-x * x).exp(), 0.0);
            let cfg = SteinConfig::new(0.5, 5.0).unwrap();
            let s1 = Samples::sample(f, 0.0, 0.005, -8.0, 8.0).unwrap();
            let s2 = Samples::sample(|y| f(y - shift), 0.0, 0.005, -8.0, 8.0).unwrap();
            let a = stein_derivative(&s1, &cfg, &[x]).unwrap()[0].value;
            let b = stein_derivative(&s2, &cfg, &[x + shift]).unwrap()[0].value;
            prop_assert!((a - b).abs() < 1e-4 * a);
        }
    }
}
