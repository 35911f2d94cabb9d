//! Norms, conservation reports and numerical ratio checks for the
//! functional inequalities behind the well-posedness theory.
//!
//! Inequality checks return `LHS / RHS` with the unknown constant left out.
//! They are meant to be compared against recorded ceilings, never against a
//! claimed constant.

use crate::error::{Error, Result};
use crate::operators::{self, FractionalKind};
use crate::solver::TimeSeries;
use crate::spectral::{self, Grid2D, RealField, SpectrumField};
use crate::weights::{self, WeightSpec};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormSpec {
    /// `‖J^s u‖`
    Hs { s: f64 },
    /// `(‖u‖² + ‖J_x^{s1} u‖² + ‖J_y^{s2} u‖²)^{1/2}`
    Aniso { s1: f64, s2: f64 },
    /// `‖⟨x, y⟩^r u‖`
    L2r { r: f64 },
    /// `(‖u‖²_{H^s} + ‖u‖²_{L²_r})^{1/2}`
    Zsr { s: f64, r: f64 },
    /// `‖w u‖`
    L2w { w: WeightSpec },
}

impl NormSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64| v.is_finite();
        match *self {
            NormSpec::Hs { s } if finite(s) => Ok(()),
            NormSpec::Aniso { s1, s2 } if finite(s1) && finite(s2) => Ok(()),
            NormSpec::L2r { r } if finite(r) && r >= 0.0 => Ok(()),
            NormSpec::Zsr { s, r } if finite(s) && finite(r) && r >= 0.0 => Ok(()),
            NormSpec::L2w { w } => w.validate(),
            _ => Err(Error::Config(format!("invalid norm spec {self:?}"))),
        }
    }

    pub fn id(&self) -> String {
        match self {
            NormSpec::Hs { s } => format!("hs_{s}"),
            NormSpec::Aniso { s1, s2 } => format!("aniso_{s1}_{s2}"),
            NormSpec::L2r { r } => format!("l2r_{r}"),
            NormSpec::Zsr { s, r } => format!("z_{s}_{r}"),
            NormSpec::L2w { w } => format!("w_{}", w.id()),
        }
    }
}

/// `Σ m(ξ, η) |û|²` with the Plancherel normalisation.
fn spectral_energy(spec: &SpectrumField, m: impl Fn(f64, f64) -> f64) -> f64 {
    let g = spec.grid();
    let mut sum = 0.0;
    for j in 0..g.ny() {
        let eta = g.eta(j);
        for i in 0..g.nx() {
            sum += m(g.xi(i), eta) * spec.at(i, j).norm_sqr();
        }
    }
    sum * g.spectral_cell()
}

pub fn sobolev_norm_spectrum(spec: &SpectrumField, s: f64) -> f64 {
    spectral_energy(spec, |xi, eta| (1.0 + xi * xi + eta * eta).powf(s)).sqrt()
}

pub fn aniso_norm_spectrum(spec: &SpectrumField, s1: f64, s2: f64) -> f64 {
    spectral_energy(spec, |xi, eta| aniso_symbol(xi, eta, s1, s2)).sqrt()
}

fn aniso_symbol(xi: f64, eta: f64, s1: f64, s2: f64) -> f64 {
    1.0 + (1.0 + xi * xi).powf(s1) + (1.0 + eta * eta).powf(s2)
}

/// `(Σ w² u² dx dy)^{1/2}` on the grid.
pub fn weighted_l2(u: &RealField, w: &RealField) -> f64 {
    let sum: f64 = u.data().iter().zip(w.data()).map(|(a, b)| (a * b).powi(2)).sum();
    (sum * u.grid().cell()).sqrt()
}

fn l2r(u: &RealField, r: f64) -> f64 {
    if r == 0.0 {
        return u.l2_norm();
    }
    let w = RealField::from_fn(*u.grid(), |x, y| (1.0 + x * x + y * y).powf(0.5 * r));
    weighted_l2(u, &w)
}

pub fn norm(u: &RealField, spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    Ok(match *spec {
        NormSpec::Hs { s } => sobolev_norm_spectrum(&spectral::forward(u), s),
        NormSpec::Aniso { s1, s2 } => aniso_norm_spectrum(&spectral::forward(u), s1, s2),
        NormSpec::L2r { r } => l2r(u, r),
        NormSpec::Zsr { s, r } => sobolev_norm_spectrum(&spectral::forward(u), s).hypot(l2r(u, r)),
        NormSpec::L2w { w } => weighted_l2(u, &weights::weight_field(u.grid(), &w)?),
    })
}

/// Fraction of `‖u‖²` carried by the outer band of relative width `band`
/// (in each direction) of the periodic box.
pub fn boundary_mass_fraction(u: &RealField, band: f64) -> f64 {
    let g = u.grid();
    let (hx, hy) = (0.5 * g.lx() * (1.0 - band), 0.5 * g.ly() * (1.0 - band));
    let mut edge = 0.0;
    let mut total = 0.0;
    for j in 0..g.ny() {
        let y = g.y(j);
        for i in 0..g.nx() {
            let v = u.at(i, j).powi(2);
            total += v;
            if g.x(i).abs() >= hx || y.abs() >= hy {
                edge += v;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        edge / total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConservationReport {
    /// `max_t |‖u(t)‖ - ‖φ‖| / ‖φ‖`
    pub l2_drift: f64,
    /// `max_{t, η} |û(0, η, t) - û(0, η, 0)|`
    pub zero_mode_drift: f64,
    /// `max_t |M_x(t) - M_x(0) - (t/2)‖φ‖²| / ((T/2)‖φ‖²)`
    pub moment_residual: f64,
}

pub fn conservation_report(ts: &TimeSeries) -> Result<ConservationReport> {
    if ts.mu > 0.0 {
        return Err(Error::DissipativeSeries(ts.mu));
    }
    let (Some(first), Some(last)) = (ts.records.first(), ts.records.last()) else {
        return Err(Error::InsufficientData("empty time series".into()));
    };
    let l0 = first.l2;
    let mass = l0 * l0;
    let scale = |v: f64, s: f64| if s > 0.0 { v / s } else { v };
    let l2_drift = ts
        .records
        .iter()
        .map(|r| scale((r.l2 - l0).abs(), l0))
        .fold(0.0, f64::max);
    let zero_mode_drift = ts.zero_mode_drift().into_iter().fold(0.0, f64::max);
    let moment_scale = 0.5 * last.t * mass;
    let moment_residual = ts
        .records
        .iter()
        .map(|r| scale((r.moment_x - first.moment_x - 0.5 * r.t * mass).abs(), moment_scale))
        .fold(0.0, f64::max);
    Ok(ConservationReport {
        l2_drift,
        zero_mode_drift,
        moment_residual,
    })
}

/// Weight used by the interpolation inequality.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InterpolationWeight {
    /// `⟨x, y⟩`
    Japanese,
    /// The truncated weight `w_N`.
    Truncated { n: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InequalityKind {
    /// `‖J^{αa}(w^{(1-α)b} f)‖ / (‖w^b f‖^{1-α} ‖J^a f‖^α)`
    Interpolation {
        a: f64,
        b: f64,
        alpha: f64,
        weight: InterpolationWeight,
    },
    /// `‖∂x^l [H; a] ∂x^m f‖ / (‖∂x^{l+m} a‖_∞ ‖f‖)`
    Commutator { l: u32, m: u32 },
    /// `‖[D_x^{1/2}; φ] f‖ / (‖φ‖_{H²} ‖f‖)`
    HalfDerivativeCommutator,
    /// `‖uv‖_{s1,s2} / (‖u‖_{s1,s2} ‖v‖_{s1,s2})`
    Algebra { s1: f64, s2: f64 },
    /// `|(u, u u_x)_{s1,s2}| / ‖u‖³_{s1,s2}`
    Trilinear { s1: f64, s2: f64 },
}

impl InequalityKind {
    /// Whether the ratio takes a second field (coefficient or factor).
    pub fn needs_second(&self) -> bool {
        matches!(
            self,
            InequalityKind::Commutator { .. }
                | InequalityKind::HalfDerivativeCommutator
                | InequalityKind::Algebra { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            InequalityKind::Interpolation { a, b, alpha, .. } => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::Config(format!("alpha = {alpha} outside (0, 1)")));
                }
                if !(a.is_finite() && b.is_finite()) {
                    return Err(Error::Config("interpolation orders must be finite".into()));
                }
            }
            InequalityKind::Commutator { l, m } => {
                if !(1..=3).contains(&(l + m)) {
                    return Err(Error::Config(format!(
                        "commutator needs 1 <= l + m <= 3 (got {})",
                        l + m
                    )));
                }
            }
            InequalityKind::HalfDerivativeCommutator => {}
            InequalityKind::Algebra { s1, s2 } => {
                if !(s1.is_finite() && s2.is_finite()) {
                    return Err(Error::Config("algebra orders must be finite".into()));
                }
            }
            InequalityKind::Trilinear { s1, s2 } => {
                if !(s2 > 2.0 && s1 >= s2) {
                    return Err(Error::Config(format!(
                        "trilinear needs s2 > 2 and s1 >= s2 (got {s1}, {s2})"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn ratio(num: f64, den: f64, what: &str) -> Result<f64> {
    if den == 0.0 || !den.is_finite() {
        return Err(Error::ZeroInput(format!("{what}: denominator is {den}")));
    }
    Ok(num / den)
}

/// Evaluates one inequality ratio on `f` (and `g`, when the kind takes a
/// second field: the commutator coefficient, or the second factor).
pub fn inequality_ratio(kind: &InequalityKind, f: &RealField, g: Option<&RealField>) -> Result<f64> {
    kind.validate()?;
    let second = || g.ok_or_else(|| Error::Config("this inequality needs a second field".into()));
    match *kind {
        InequalityKind::Interpolation { a, b, alpha, weight } => interpolation_ratio(f, a, b, alpha, weight),
        InequalityKind::Commutator { l, m } => commutator_ratio(second()?, f, l, m),
        InequalityKind::HalfDerivativeCommutator => half_derivative_commutator_ratio(second()?, f),
        InequalityKind::Algebra { s1, s2 } => algebra_ratio(f, second()?, s1, s2),
        InequalityKind::Trilinear { s1, s2 } => trilinear_ratio(f, s1, s2),
    }
}

fn interpolation_ratio(f: &RealField, a: f64, b: f64, alpha: f64, weight: InterpolationWeight) -> Result<f64> {
    let base = match weight {
        InterpolationWeight::Japanese => weights::weight_field(f.grid(), &WeightSpec::Polynomial { r: 1.0 })?,
        InterpolationWeight::Truncated { n } => weights::weight_field(f.grid(), &WeightSpec::Truncated { n })?,
    };
    let inner = f.zip_with(&base, |v, w| v * w.powf((1.0 - alpha) * b))?;
    let lhs = sobolev_norm_spectrum(&spectral::forward(&inner), alpha * a);
    let wb = weighted_l2(f, &base.map(|w| w.powf(b)));
    let ja = sobolev_norm_spectrum(&spectral::forward(f), a);
    ratio(lhs, wb.powf(1.0 - alpha) * ja.powf(alpha), "interpolation")
}

/// `∂x^l [H; a] ∂x^m f`, built from pointwise products and single
/// multipliers only.
pub fn hilbert_commutator(a: &RealField, f: &RealField, l: u32, m: u32) -> Result<RealField> {
    let g = operators::derivative(f, m, 0);
    let ag = a.zip_with(&g, |p, q| p * q)?;
    let h_ag = operators::hilbert_x(&ag);
    let a_hg = a.zip_with(&operators::hilbert_x(&g), |p, q| p * q)?;
    let comm = h_ag.zip_with(&a_hg, |p, q| p - q)?;
    Ok(operators::derivative(&comm, l, 0))
}

fn commutator_ratio(a: &RealField, f: &RealField, l: u32, m: u32) -> Result<f64> {
    let lhs = hilbert_commutator(a, f, l, m)?.l2_norm();
    let da = operators::derivative(a, l + m, 0).max_abs();
    ratio(lhs, da * f.l2_norm(), "commutator")
}

fn half_derivative_commutator_ratio(phi: &RealField, f: &RealField) -> Result<f64> {
    let d = |v: &RealField| operators::fractional_op(v, FractionalKind::Dx, 0.5);
    let pf = phi.zip_with(f, |p, q| p * q)?;
    let comm = d(&pf)?.zip_with(&phi.zip_with(&d(f)?, |p, q| p * q)?, |p, q| p - q)?;
    let h2 = sobolev_norm_spectrum(&spectral::forward(phi), 2.0);
    ratio(comm.l2_norm(), h2 * f.l2_norm(), "half-derivative commutator")
}

fn algebra_ratio(u: &RealField, v: &RealField, s1: f64, s2: f64) -> Result<f64> {
    let uv = u.zip_with(v, |p, q| p * q)?;
    let n = |w: &RealField| aniso_norm_spectrum(&spectral::forward(w), s1, s2);
    ratio(n(&uv), n(u) * n(v), "algebra")
}

/// `(u, v)_{s1,s2}` evaluated spectrally.
pub fn aniso_inner(u: &RealField, v: &RealField, s1: f64, s2: f64) -> Result<f64> {
    u.grid().ensure_same(v.grid())?;
    let (uh, vh) = (spectral::forward(u), spectral::forward(v));
    let g: Grid2D = *u.grid();
    let mut sum = 0.0;
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            let w = aniso_symbol(g.xi(i), g.eta(j), s1, s2);
            sum += w * (uh.at(i, j) * vh.at(i, j).conj()).re;
        }
    }
    Ok(sum * g.spectral_cell())
}

fn trilinear_ratio(u: &RealField, s1: f64, s2: f64) -> Result<f64> {
    let ux = operators::derivative(u, 1, 0);
    let uux = u.zip_with(&ux, |p, q| p * q)?;
    let lhs = aniso_inner(u, &uux, s1, s2)?.abs();
    let n = aniso_norm_spectrum(&spectral::forward(u), s1, s2);
    ratio(lhs, n.powi(3), "trilinear")
}
