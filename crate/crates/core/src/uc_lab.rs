//! Numerical exhibits around persistence of spatial decay and unique
//! continuation.
//!
//! * [`b1_indicator`] isolates the `-2it sgn(ξ) φ̂` term of the short-time
//!   expansion of `û` near `ξ = 0` and asks whether its half Stein
//!   derivative in `ξ` is locally square integrable. It is not when
//!   `φ̂(0, η) ≠ 0`, which is what obstructs decay of order `|x|^{5/2}`.
//! * [`persistence_scan`] and [`domain_growth`] track weighted norms along
//!   the flow on the periodic box.
//! * [`moment_drift`] checks that the first x-moment grows linearly with
//!   slope `½‖φ‖²`.

use num_complex::Complex64;

use crate::diagnostics::{self, NormSpec};
use crate::error::{Error, Result};
use crate::solver::{self, SolverConfig, TimeSeries};
use crate::spectral::{self, Grid2D, RealField};
use crate::stein::{self, DivergenceConfig, Samples, Verdict};

/// `e^{-1/u}` for `u > 0`, else 0.
fn glue(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for `u ≤ 0`, 1 for `u ≥ 1`, C^∞ in between.
fn smooth_step(u: f64) -> f64 {
    let (a, b) = (glue(u), glue(1.0 - u));
    a / (a + b)
}

/// The cutoff `χ(ξ, η) = χ̃(ξ) e^{-η²}` with `χ̃ = 1` on `|ξ| ≤ ε/2` and
/// `χ̃ = 0` on `|ξ| ≥ ε`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CutoffSpec {
    pub epsilon: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self { epsilon: 0.5 }
    }
}

impl CutoffSpec {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon > 0.0 && self.epsilon.is_finite() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "cutoff epsilon = {} must be positive",
                self.epsilon
            )))
        }
    }

    pub fn chi_tilde(&self, xi: f64) -> f64 {
        let e = self.epsilon;
        smooth_step((e - xi.abs()) / (0.5 * e))
    }

    pub fn chi(&self, xi: f64, eta: f64) -> f64 {
        self.chi_tilde(xi) * (-eta * eta).exp()
    }

    /// Checks range, plateau and support on the given ξ values.
    pub fn audit(&self, xis: &[f64]) -> Result<()> {
        for &xi in xis {
            let v = self.chi_tilde(xi);
            let ok = (0.0..=1.0).contains(&v)
                && (xi.abs() > 0.5 * self.epsilon || v == 1.0)
                && (xi.abs() < self.epsilon || v == 0.0);
            if !ok {
                return Err(Error::Config(format!(
                    "cutoff fails its audit at xi = {xi} (value {v})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UcVerdict {
    Persists,
    Obstructed,
    /// The ratios neither settle nor grow clearly.
    Inconclusive,
}

impl UcVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            UcVerdict::Persists => "persists",
            UcVerdict::Obstructed => "obstructed",
            UcVerdict::Inconclusive => "inconclusive",
        }
    }
}

impl From<Verdict> for UcVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Divergent => UcVerdict::Obstructed,
            Verdict::Convergent => UcVerdict::Persists,
            Verdict::Inconclusive => UcVerdict::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct UcReport {
    pub levels: usize,
    /// ξ-step of each level.
    pub steps: Vec<f64>,
    /// Window L²_ξ norm at each level, summed in square over η.
    pub window_norms: Vec<f64>,
    /// Ratios of successive squared window norms.
    pub ratios: Vec<f64>,
    pub verdict: UcVerdict,
    /// The η values that were aggregated.
    pub etas: Vec<f64>,
}

/// Settings of [`b1_indicator_with`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct B1Config {
    pub cut: CutoffSpec,
    pub levels: usize,
    /// Largest |η| aggregated; `e^{-η²}` makes larger values irrelevant.
    pub eta_max: f64,
    /// At most this many η values are used (evenly thinned).
    pub eta_count: usize,
    /// Largest admissible edge-to-peak ratio of `|φ|` and `|φ̂|`.
    pub resolution_limit: f64,
    pub delta_div: f64,
    pub delta_conv: f64,
}

impl Default for B1Config {
    fn default() -> Self {
        Self {
            cut: CutoffSpec::default(),
            levels: 4,
            eta_max: 4.0,
            eta_count: 9,
            resolution_limit: 1e-8,
            delta_div: 0.10,
            delta_conv: 0.02,
        }
    }
}

impl B1Config {
    fn divergence(&self) -> DivergenceConfig {
        let a = 0.5 * self.cut.epsilon;
        DivergenceConfig {
            b: 0.5,
            levels: self.levels,
            center: 0.0,
            half_width: a,
            h0: a / 8.0,
            r_outer: (2.0 * self.cut.epsilon).max(2.0),
            delta_div: self.delta_div,
            delta_conv: self.delta_conv,
        }
    }
}

/// Largest of the edge-to-peak ratios of `|φ|` on the outer ring of the
/// box and of `|φ̂|` on the outer ring of the spectrum.
pub fn resolution_ratio(phi: &RealField) -> f64 {
    let g = phi.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let spec = spectral::forward(phi);
    let on_ring = |i: usize, j: usize| {
        let (m, n) = (g.mx(i).unsigned_abs() as usize, g.my(j).unsigned_abs() as usize);
        m + 1 >= nx / 2 || n + 1 >= ny / 2
    };
    let on_edge = |i: usize, j: usize| {
        let (x, y) = (g.x(i).abs(), g.y(j).abs());
        x + 1.5 * g.dx() >= 0.5 * g.lx() || y + 1.5 * g.dy() >= 0.5 * g.ly()
    };
    let (mut s_peak, mut s_edge, mut p_peak, mut p_edge) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for j in 0..ny {
        for i in 0..nx {
            let s = spec.at(i, j).norm();
            let p = phi.at(i, j).abs();
            s_peak = s_peak.max(s);
            p_peak = p_peak.max(p);
            if on_ring(i, j) {
                s_edge = s_edge.max(s);
            }
            if on_edge(i, j) {
                p_edge = p_edge.max(p);
            }
        }
    }
    let r = |e: f64, p: f64| if p > 0.0 { e / p } else { 0.0 };
    r(s_edge, s_peak).max(r(p_edge, p_peak))
}

/// `φ̂(ξ, η_j)` at arbitrary `ξ`, from the partial transform in `y`.
struct OffGridTransform {
    xs: Vec<f64>,
    dx: f64,
    /// y-transform of each x-column, at the chosen η indices.
    columns: Vec<Vec<Complex64>>,
}

impl OffGridTransform {
    fn new(phi: &RealField, eta_index: &[usize]) -> Self {
        let g = phi.grid();
        let (nx, ny) = (g.nx(), g.ny());
        let ys = g.ys();
        let columns = eta_index
            .iter()
            .map(|&j| {
                let eta = g.eta(j);
                let kernel: Vec<Complex64> = ys.iter().map(|&y| Complex64::new(0.0, -eta * y).exp()).collect();
                (0..nx)
                    .map(|i| {
                        let mut s = Complex64::new(0.0, 0.0);
                        for (jj, k) in kernel.iter().enumerate().take(ny) {
                            s += phi.at(i, jj) * k;
                        }
                        s * g.dy()
                    })
                    .collect()
            })
            .collect();
        Self {
            xs: g.xs(),
            dx: g.dx(),
            columns,
        }
    }

    fn eval(&self, col: usize, xi: f64) -> Complex64 {
        let c = &self.columns[col];
        let mut s = Complex64::new(0.0, 0.0);
        for (x, v) in self.xs.iter().zip(c) {
            s += v * Complex64::new(0.0, -xi * x).exp();
        }
        s * self.dx
    }
}

/// [`b1_indicator_with`] with default settings and the given cutoff and
/// number of levels.
pub fn b1_indicator(phi: &RealField, t: f64, cut: CutoffSpec, levels: usize) -> Result<UcReport> {
    b1_indicator_with(
        phi,
        t,
        &B1Config {
            cut,
            levels,
            ..B1Config::default()
        },
    )
}

/// Refinement test on
///
/// ```text
/// F_η(ξ) = χ̃(ξ) e^{-η²} e^{itξ(η² - |ξ|)} (-2it) sgn(ξ) φ̂(ξ, η)
/// ```
///
/// for each η of a coarse set: the window mass of `D^{1/2}_ξ F_η` near
/// `ξ = 0` is summed over η and followed under refinement of the ξ-grid.
pub fn b1_indicator_with(phi: &RealField, t: f64, cfg: &B1Config) -> Result<UcReport> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Config(format!("t = {t} must be positive")));
    }
    cfg.cut.validate()?;
    let div = cfg.divergence();
    div.validate()?;
    let ratio = resolution_ratio(phi);
    if ratio > cfg.resolution_limit {
        return Err(Error::Unresolved {
            ratio,
            limit: cfg.resolution_limit,
        });
    }

    let g = phi.grid();
    let mut eta_index: Vec<usize> = (0..g.ny())
        .filter(|&j| g.eta(j).abs() <= cfg.eta_max && !g.is_y_nyquist(j))
        .collect();
    eta_index.sort_by(|&a, &b| g.eta(a).total_cmp(&g.eta(b)));
    if eta_index.len() > cfg.eta_count && cfg.eta_count > 1 {
        let n = eta_index.len();
        let k = cfg.eta_count;
        eta_index = (0..k).map(|q| eta_index[q * (n - 1) / (k - 1)]).collect();
    }
    let etas: Vec<f64> = eta_index.iter().map(|&j| g.eta(j)).collect();
    let transform = OffGridTransform::new(phi, &eta_index);

    let (lo, hi) = div.sample_range();
    let mut masses = vec![0.0; div.levels];
    let mut steps = Vec::with_capacity(div.levels);
    for (level, mass) in masses.iter_mut().enumerate() {
        let h = div.step(level);
        steps.push(h);
        for (col, &eta) in etas.iter().enumerate() {
            let f = |xi: f64| {
                let chi = cfg.cut.chi(xi, eta);
                if chi == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let phase = Complex64::new(0.0, t * xi * (eta * eta - xi.abs())).exp();
                let sgn = if xi > 0.0 {
                    1.0
                } else if xi < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                chi * sgn * phase * Complex64::new(0.0, -2.0 * t) * transform.eval(col, xi)
            };
            let samples = Samples::sample(f, div.center, h, lo, hi)?;
            *mass += stein::window_mass(&samples, &div, level)?;
        }
    }
    let (ratios, verdict) = stein::classify(&masses, div.delta_div, div.delta_conv);
    Ok(UcReport {
        levels: div.levels,
        steps,
        window_norms: masses.iter().map(|m| m.sqrt()).collect(),
        ratios,
        verdict: verdict.into(),
        etas,
    })
}

/// Settings of [`persistence_scan`].
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PersistenceConfig {
    pub r_list: Vec<f64>,
    pub s: f64,
    /// A series is flagged when `max_t N(t) - N(0)` exceeds
    /// `(growth_factor - 1) N(0)` plus the tail error bar.
    pub growth_factor: f64,
    /// Relative width of the outer band used for the tail error bar and the
    /// boundary-contact check.
    pub boundary_band: f64,
    /// Largest admissible fraction of `‖u‖²` in the outer band.
    pub boundary_tolerance: f64,
}

impl Default for PersistenceConfig {
    fn default() -> Self {
        Self {
            r_list: vec![1.0, 2.0, 3.0],
            s: 6.0,
            growth_factor: 1.5,
            boundary_band: 0.1,
            boundary_tolerance: 1e-10,
        }
    }
}

impl PersistenceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.r_list.is_empty() {
            return Err(Error::Config("persistence scan needs at least one r".into()));
        }
        let r_max = self.r_list.iter().cloned().fold(0.0, f64::max);
        for &r in &self.r_list {
            if !(0.0..3.5).contains(&r) {
                return Err(Error::Config(format!("r = {r} outside [0, 7/2)")));
            }
        }
        if !(self.s >= 2.0 * r_max) {
            return Err(Error::Config(format!(
                "s = {} must be at least 2 max(r) = {}",
                self.s,
                2.0 * r_max
            )));
        }
        if !(self.growth_factor > 1.0) {
            return Err(Error::Config("growth factor must exceed 1".into()));
        }
        if !(self.boundary_band > 0.0 && self.boundary_band < 1.0 && self.boundary_tolerance > 0.0) {
            return Err(Error::Config(
                "boundary band must lie in (0, 1) and tolerance be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PersistenceRow {
    pub r: f64,
    /// `‖u(t)‖_{Z_{s,r}}` at each recorded time.
    pub series: Vec<f64>,
    /// The weighted part `‖⟨x, y⟩^r u(t)‖` alone.
    pub weighted: Vec<f64>,
    pub max_over_t: f64,
    /// Largest weighted norm carried by the outer band.
    pub tail_bar: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PersistenceTable {
    pub s: f64,
    pub times: Vec<f64>,
    pub rows: Vec<PersistenceRow>,
    pub max_boundary_fraction: f64,
}

fn band_weighted_norm(u: &RealField, r: f64, band: f64) -> f64 {
    let g = u.grid();
    let (hx, hy) = (0.5 * g.lx() * (1.0 - band), 0.5 * g.ly() * (1.0 - band));
    let mut sum = 0.0;
    for j in 0..g.ny() {
        let y = g.y(j);
        for i in 0..g.nx() {
            let x = g.x(i);
            if x.abs() >= hx || y.abs() >= hy {
                sum += (1.0 + x * x + y * y).powf(r) * u.at(i, j).powi(2);
            }
        }
    }
    (sum * g.cell()).sqrt()
}

/// Runs the solver and records `‖u(t)‖_{Z_{s,r}}` for every configured `r`.
pub fn persistence_scan(phi: &RealField, cfg: &SolverConfig, pcfg: &PersistenceConfig) -> Result<PersistenceTable> {
    pcfg.validate()?;
    let mut times = Vec::new();
    let mut series: Vec<Vec<f64>> = vec![Vec::new(); pcfg.r_list.len()];
    let mut weighted: Vec<Vec<f64>> = vec![Vec::new(); pcfg.r_list.len()];
    let mut bars = vec![0.0_f64; pcfg.r_list.len()];
    let mut worst = 0.0_f64;
    let (_, abort) = solver::evolve(phi, cfg, |state| {
        let u = state.field();
        let frac = diagnostics::boundary_mass_fraction(&u, pcfg.boundary_band);
        worst = worst.max(frac);
        if frac > pcfg.boundary_tolerance {
            return Err(Error::BoundaryContact {
                fraction: frac,
                limit: pcfg.boundary_tolerance,
            });
        }
        times.push(state.t);
        for (k, &r) in pcfg.r_list.iter().enumerate() {
            series[k].push(diagnostics::norm(&u, &NormSpec::Zsr { s: pcfg.s, r })?);
            weighted[k].push(diagnostics::norm(&u, &NormSpec::L2r { r })?);
            bars[k] = bars[k].max(band_weighted_norm(&u, r, pcfg.boundary_band));
        }
        Ok(u.max_abs())
    })?;
    if let Some(e) = abort {
        return Err(e);
    }
    let rows = pcfg
        .r_list
        .iter()
        .zip(series)
        .zip(weighted)
        .zip(bars)
        .map(|(((&r, series), weighted), tail_bar)| {
            let n0 = series[0];
            let max_over_t = series.iter().cloned().fold(0.0, f64::max);
            let flagged = max_over_t - n0 > (pcfg.growth_factor - 1.0) * n0 + tail_bar;
            PersistenceRow {
                r,
                series,
                weighted,
                max_over_t,
                tail_bar,
                flagged,
            }
        })
        .collect();
    Ok(PersistenceTable {
        s: pcfg.s,
        times,
        rows,
        max_boundary_fraction: worst,
    })
}

/// One domain of the growth protocol.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DomainRun {
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
    /// `max_t ‖⟨x, y⟩^r u(t)‖` on the box.
    pub indicator: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DomainGrowth {
    pub r: f64,
    pub runs: Vec<DomainRun>,
    /// `indicator(2L) / indicator(L)` for consecutive domains.
    pub factors: Vec<f64>,
}

/// Runs the same physical data on boxes `L₀, 2L₀, …` (`doublings + 1`
/// domains) at fixed resolution density and compares `max_t ‖⟨x,y⟩^r u‖`.
///
/// `data` builds the initial field on a given grid.
pub fn domain_growth(
    data: impl Fn(Grid2D) -> RealField,
    base: Grid2D,
    doublings: usize,
    cfg: &SolverConfig,
    r_list: &[f64],
) -> Result<Vec<DomainGrowth>> {
    if doublings == 0 {
        return Err(Error::Config("domain growth needs at least one doubling".into()));
    }
    let mut per_r: Vec<Vec<DomainRun>> = vec![Vec::new(); r_list.len()];
    for d in 0..=doublings {
        let k = 1usize << d;
        let grid = Grid2D::new(base.nx() * k, base.ny() * k, base.lx() * k as f64, base.ly() * k as f64)?;
        let phi = data(grid);
        let weights: Vec<RealField> = r_list
            .iter()
            .map(|&r| RealField::from_fn(grid, |x, y| (1.0 + x * x + y * y).powf(0.5 * r)))
            .collect();
        let mut best = vec![0.0_f64; r_list.len()];
        let (_, abort) = solver::evolve(&phi, cfg, |state| {
            let u = state.field();
            for (b, w) in best.iter_mut().zip(&weights) {
                *b = b.max(diagnostics::weighted_l2(&u, w));
            }
            Ok(u.max_abs())
        })?;
        if let Some(e) = abort {
            return Err(e);
        }
        for (runs, v) in per_r.iter_mut().zip(best) {
            runs.push(DomainRun {
                lx: grid.lx(),
                ly: grid.ly(),
                nx: grid.nx(),
                ny: grid.ny(),
                indicator: v,
            });
        }
    }
    Ok(r_list
        .iter()
        .zip(per_r)
        .map(|(&r, runs)| {
            let factors = runs.windows(2).map(|w| w[1].indicator / w[0].indicator).collect();
            DomainGrowth { r, runs, factors }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MomentDrift {
    /// Least-squares slope of `M_x(t)`.
    pub slope: f64,
    /// `½‖φ‖²`.
    pub predicted: f64,
    /// `|slope - predicted| / predicted` (absolute when `φ = 0`).
    pub relative_error: f64,
    /// Sign changes of `M_x` along the records.
    pub zero_crossings: usize,
}

pub fn moment_drift(ts: &TimeSeries) -> Result<MomentDrift> {
    if ts.mu > 0.0 {
        return Err(Error::DissipativeSeries(ts.mu));
    }
    let n = ts.records.len();
    if n < 4 {
        return Err(Error::InsufficientData(format!(
            "moment drift needs 4 records, got {n}"
        )));
    }
    let ts_: Vec<f64> = ts.records.iter().map(|r| r.t).collect();
    let ms: Vec<f64> = ts.records.iter().map(|r| r.moment_x).collect();
    let tm = ts_.iter().sum::<f64>() / n as f64;
    let mm = ms.iter().sum::<f64>() / n as f64;
    let sxy: f64 = ts_.iter().zip(&ms).map(|(t, m)| (t - tm) * (m - mm)).sum();
    let sxx: f64 = ts_.iter().map(|t| (t - tm).powi(2)).sum();
    let slope = sxy / sxx;
    let predicted = 0.5 * ts.records[0].l2.powi(2);
    let relative_error = if predicted > 0.0 {
        (slope - predicted).abs() / predicted
    } else {
        slope.abs()
    };
    let mut zero_crossings = 0;
    let mut last_sign = 0.0;
    for &m in &ms {
        let s = if m > 0.0 {
            1.0
        } else if m < 0.0 {
            -1.0
        } else {
            0.0
        };
        if s != 0.0 {
            if last_sign != 0.0 && s != last_sign {
                zero_crossings += 1;
            }
            last_sign = s;
        }
    }
    Ok(MomentDrift {
        slope,
        predicted,
        relative_error,
        zero_crossings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{self, GaussianParams};
    use crate::solver::DiagnosticsSpec;
    use std::f64::consts::PI;

    fn box_grid() -> Grid2D {
        Grid2D::new(128, 128, 16.0 * PI, 16.0 * PI).unwrap()
    }

    #[test]
    fn cutoff_has_plateau_and_support() {
        let cut = CutoffSpec::default();
        let xis: Vec<f64> = (-400..=400).map(|k| k as f64 * 0.0025).collect();
        cut.audit(&xis).unwrap();
        assert_eq!(cut.chi_tilde(0.25), 1.0);
        assert_eq!(cut.chi_tilde(0.5), 0.0);
        assert!(cut.chi_tilde(0.4) > 0.0 && cut.chi_tilde(0.4) < 1.0);
        assert_eq!(cut.chi(0.0, 1.0), (-1.0f64).exp());
    }

    #[test]
    fn smooth_step_is_symmetric() {
        for k in 0..=20 {
            let u = k as f64 / 20.0;
            assert!((smooth_step(u) + smooth_step(1.0 - u) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn off_grid_transform_matches_fft_on_grid() {
        let g = Grid2D::new(32, 32, 20.0, 20.0).unwrap();
        let phi = fields::gaussian(
            g,
            &GaussianParams {
                center_x: 1.0,
                ..Default::default()
            },
        );
        let spec = spectral::forward(&phi);
        let tr = OffGridTransform::new(&phi, &[0, 3]);
        for i in [0usize, 1, 5, 30] {
            for (col, j) in [0usize, 3].iter().enumerate() {
                let got = tr.eval(col, g.xi(i));
                assert!((got - spec.at(i, *j)).norm() < 1e-12, "i = {i}, j = {j}");
            }
        }
    }

    #[test]
    fn zero_data_persists() {
        let rep = b1_indicator(&RealField::zeros(box_grid()), 0.1, CutoffSpec::default(), 4).unwrap();
        assert!(rep.window_norms.iter().all(|&v| v == 0.0));
        assert_eq!(rep.verdict, UcVerdict::Persists);
    }

    #[test]
    fn unresolved_data_is_rejected() {
        let g = Grid2D::new(32, 32, 16.0 * PI, 16.0 * PI).unwrap();
        let phi = fields::gaussian(g, &GaussianParams::default());
        assert!(matches!(
            b1_indicator(&phi, 0.1, CutoffSpec::default(), 4),
            Err(Error::Unresolved { .. })
        ));
    }

    #[test]
    fn gaussian_is_obstructed_and_derivative_persists() {
        let g = box_grid();
        let p = GaussianParams::default();
        let gauss = fields::gaussian(g, &p);
        let dgauss = fields::dx_gaussian(g, &p);
        for t in [0.1, 1.0] {
            let a = b1_indicator(&gauss, t, CutoffSpec::default(), 4).unwrap();
            assert_eq!(a.verdict, UcVerdict::Obstructed, "t = {t}: {a:?}");
            let b = b1_indicator(&dgauss, t, CutoffSpec::default(), 4).unwrap();
            assert_eq!(b.verdict, UcVerdict::Persists, "t = {t}: {b:?}");
        }
    }

    #[test]
    fn persistence_scan_validates_balance() {
        let g = Grid2D::new(16, 16, 20.0, 20.0).unwrap();
        let bad = PersistenceConfig {
            r_list: vec![2.0],
            s: 3.0,
            ..Default::default()
        };
        let cfg = SolverConfig {
            dt: 0.01,
            t_final: 0.02,
            ..Default::default()
        };
        assert!(persistence_scan(&RealField::zeros(g), &cfg, &bad).is_err());
        let bad = PersistenceConfig {
            r_list: vec![3.5],
            s: 8.0,
            ..Default::default()
        };
        assert!(persistence_scan(&RealField::zeros(g), &cfg, &bad).is_err());
    }

    #[test]
    fn persistence_at_r0_is_l2() {
        let phi = fields::dx_gaussian(box_grid(), &GaussianParams::default());
        let cfg = SolverConfig {
            dt: 2e-3,
            t_final: 0.1,
            stride: 10,
            ..Default::default()
        };
        let pcfg = PersistenceConfig {
            r_list: vec![0.0],
            s: 0.0,
            boundary_tolerance: 1e-6,
            ..Default::default()
        };
        let table = persistence_scan(&phi, &cfg, &pcfg).unwrap();
        let run = solver::run(&phi, &cfg, &DiagnosticsSpec::default()).unwrap();
        let row = &table.rows[0];
        for ((w, z), rec) in row.weighted.iter().zip(&row.series).zip(&run.series.records) {
            assert!((w - rec.l2).abs() < 1e-12 * rec.l2);
            // with s = 0 the Sobolev part is ‖u‖ again
            assert!((z / 2f64.sqrt() - rec.l2).abs() < 1e-12 * rec.l2);
        }
    }

    #[test]
    fn boundary_contact_is_reported() {
        let g = Grid2D::new(32, 32, 10.0, 10.0).unwrap();
        let phi = RealField::from_fn(g, |x, _| (2.0 * PI * x / 10.0).cos());
        let cfg = SolverConfig {
            dt: 1e-3,
            t_final: 0.01,
            ..Default::default()
        };
        let r = persistence_scan(
            &phi,
            &cfg,
            &PersistenceConfig {
                r_list: vec![1.0],
                s: 2.0,
                ..Default::default()
            },
        );
        assert!(matches!(r, Err(Error::BoundaryContact { .. })));
    }

    #[test]
    fn moment_drift_of_zero_data() {
        let g = Grid2D::new(16, 16, 10.0, 10.0).unwrap();
        let cfg = SolverConfig {
            dt: 0.01,
            t_final: 0.05,
            stride: 1,
            ..Default::default()
        };
        let run = solver::run(&RealField::zeros(g), &cfg, &DiagnosticsSpec::default()).unwrap();
        let d = moment_drift(&run.series).unwrap();
        assert_eq!(d.slope, 0.0);
        assert_eq!(d.zero_crossings, 0);
    }

    #[test]
    fn moment_drift_needs_records() {
        let g = Grid2D::new(16, 16, 10.0, 10.0).unwrap();
        let cfg = SolverConfig {
            dt: 0.01,
            t_final: 0.02,
            stride: 1,
            ..Default::default()
        };
        let run = solver::run(&RealField::zeros(g), &cfg, &DiagnosticsSpec::default()).unwrap();
        assert!(matches!(moment_drift(&run.series), Err(Error::InsufficientData(_))));
    }
}
