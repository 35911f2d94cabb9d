//! Weight families for the weighted norms and the A₂ statistic.
//!
//! The truncated weight `w_N(x, y) = β_N(√(x² + y²))` equals `⟨r⟩` on the
//! disk `r ≤ N` and the constant `2N` for `r ≥ 3N`. In between, the slope of
//! `⟨r⟩` is faded out by a quintic smoothstep over `[N, N + δ]`, with `δ`
//! solved so that the weight lands exactly on `2N`:
//!
//! ```text
//! β_N'(s) = ⟨s⟩' (1 - S((s - N) / δ)),   ∫_N^{N+δ} β_N' ds = 2N - ⟨N⟩
//! ```
//!
//! This keeps `β_N` in C², non-decreasing, with `0 ≤ β_N' ≤ ⟨s⟩' < 1`.

use std::fmt;

use crate::error::{Error, Result};
use crate::quadrature::Rule;
use crate::spectral::{Grid2D, RealField};

/// `⟨s⟩ = (1 + s²)^{1/2}`.
pub fn japanese(s: f64) -> f64 {
    (1.0 + s * s).sqrt()
}

fn japanese_d1(s: f64) -> f64 {
    s / japanese(s)
}

fn japanese_d2(s: f64) -> f64 {
    (1.0 + s * s).powf(-1.5)
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

fn smoothstep_d1(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    30.0 * t * t * (1.0 - t) * (1.0 - t)
}

/// Measurements taken when a truncated weight is built.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BetaAudit {
    /// Width `δ` of the transition band `[N, N + δ]`.
    pub band: f64,
    pub min_slope: f64,
    pub max_slope: f64,
    /// Measured `max |β_N''(s)| / ∂²⟨s⟩` over the sample.
    pub curvature_constant: f64,
}

#[derive(Debug, Clone)]
pub struct TruncatedWeight {
    n: f64,
    band: f64,
    rule: Rule,
    audit: BetaAudit,
}

impl TruncatedWeight {
    pub fn new(n: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::Config("truncation level N must be at least 1".into()));
        }
        let nf = n as f64;
        let rule = Rule::new(24);
        let target = 2.0 * nf - japanese(nf);
        let rise = |band: f64| rule.integrate(nf, nf + band, |s| japanese_d1(s) * (1.0 - smoothstep((s - nf) / band)));
        let (mut lo, mut hi) = (0.0, 2.0 * nf);
        if rise(hi) < target {
            return Err(Error::Config(format!("no admissible transition band for N = {n}")));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if rise(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 * nf {
                break;
            }
        }
        let mut w = Self {
            n: nf,
            band: 0.5 * (lo + hi),
            rule,
            audit: BetaAudit {
                band: 0.0,
                min_slope: 0.0,
                max_slope: 0.0,
                curvature_constant: 0.0,
            },
        };
        w.audit = w.run_audit()?;
        Ok(w)
    }

    fn run_audit(&self) -> Result<BetaAudit> {
        let samples = 4000;
        let top = 4.0 * self.n;
        let h = top / samples as f64;
        let mut min_slope = f64::INFINITY;
        let mut max_slope = f64::NEG_INFINITY;
        let mut curvature_constant = 0.0_f64;
        let mut prev = self.value(0.0);
        for k in 1..=samples {
            let s = k as f64 * h;
            let v = self.value(s);
            let fd = (v - prev) / h;
            prev = v;
            min_slope = min_slope.min(fd);
            max_slope = max_slope.max(fd);
            curvature_constant = curvature_constant.max(self.second_derivative(s).abs() / japanese_d2(s));
        }
        if min_slope < -1e-10 || max_slope > 1.0 + 1e-8 {
            return Err(Error::Config(format!(
                "truncated weight failed its audit: slope range [{min_slope}, {max_slope}]"
            )));
        }
        Ok(BetaAudit {
            band: self.band,
            min_slope,
            max_slope,
            curvature_constant,
        })
    }

    pub fn audit(&self) -> BetaAudit {
        self.audit
    }

    pub fn level(&self) -> f64 {
        self.n
    }

    /// `β_N(s)`; symmetric in `s`.
    pub fn value(&self, s: f64) -> f64 {
        let s = s.abs();
        let n = self.n;
        if s <= n {
            return japanese(s);
        }
        if s >= n + self.band {
            return 2.0 * n;
        }
        let lost = self
            .rule
            .integrate(n, s, |r| japanese_d1(r) * smoothstep((r - n) / self.band));
        japanese(s) - lost
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let sign = s.signum();
        let s = s.abs();
        sign * japanese_d1(s) * (1.0 - smoothstep((s - self.n) / self.band))
    }

    pub fn second_derivative(&self, s: f64) -> f64 {
        let s = s.abs();
        let t = (s - self.n) / self.band;
        japanese_d2(s) * (1.0 - smoothstep(t)) - japanese_d1(s) * smoothstep_d1(t) / self.band
    }
}

/// `β_N(x)` as a free function.
pub fn beta(n: u32, x: f64) -> Result<f64> {
    Ok(TruncatedWeight::new(n)?.value(x))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    Truncated { n: u32 },
    Polynomial { r: f64 },
    GammaPower { gamma: f64 },
    Damped { gamma: f64, lambda: f64 },
}

impl WeightSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightSpec::Truncated { n } if n < 1 => Err(Error::Config("truncated weight needs N >= 1".into())),
            WeightSpec::Polynomial { r } if !(r >= 0.0 && r.is_finite()) => {
                Err(Error::Config(format!("polynomial weight order {r} must be >= 0")))
            }
            WeightSpec::GammaPower { gamma } if !(0.0..=1.0).contains(&gamma) => {
                Err(Error::Config(format!("gamma = {gamma} outside [0, 1]")))
            }
            WeightSpec::Damped { gamma, lambda } => {
                if !(0.0..=1.0).contains(&gamma) {
                    Err(Error::Config(format!("gamma = {gamma} outside [0, 1]")))
                } else if !(lambda > 0.0 && lambda < 1.0) {
                    Err(Error::Config(format!("lambda = {lambda} outside (0, 1)")))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Short identifier used in CSV column names.
    pub fn id(&self) -> String {
        self.to_string()
    }

    pub fn build(&self) -> Result<Weight> {
        self.validate()?;
        Ok(match *self {
            WeightSpec::Truncated { n } => Weight::Truncated(TruncatedWeight::new(n)?),
            WeightSpec::Polynomial { r } => Weight::Power(r),
            WeightSpec::GammaPower { gamma } => Weight::Power(gamma),
            WeightSpec::Damped { gamma, lambda } => Weight::Damped { gamma, lambda },
        })
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Truncated { n } => write!(f, "trunc{n}"),
            WeightSpec::Polynomial { r } => write!(f, "poly{r}"),
            WeightSpec::GammaPower { gamma } => write!(f, "gamma{gamma}"),
            WeightSpec::Damped { gamma, lambda } => write!(f, "damped{gamma}_{lambda}"),
        }
    }
}

/// A constructed weight, ready for pointwise evaluation.
#[derive(Debug, Clone)]
pub enum Weight {
    Truncated(TruncatedWeight),
    /// `⟨x, y⟩^p`
    Power(f64),
    Damped {
        gamma: f64,
        lambda: f64,
    },
}

impl Weight {
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let r2 = x * x + y * y;
        match self {
            Weight::Truncated(w) => w.value(r2.sqrt()),
            Weight::Power(p) => {
                if *p == 0.0 {
                    1.0
                } else {
                    (1.0 + r2).powf(0.5 * p)
                }
            }
            Weight::Damped { gamma, lambda } => (1.0 + r2).powf(0.5 * gamma) * (-lambda * r2).exp(),
        }
    }
}

pub fn weight_field(grid: &Grid2D, spec: &WeightSpec) -> Result<RealField> {
    let w = spec.build()?;
    Ok(RealField::from_fn(*grid, |x, y| w.value(x, y)))
}

/// `∫_0^b |x|^p dx` for `b ≥ 0`, or `None` when it diverges.
fn power_integral(p: f64, b: f64) -> Option<f64> {
    if b == 0.0 {
        return Some(0.0);
    }
    if p > -1.0 {
        Some(b.powf(p + 1.0) / (p + 1.0))
    } else {
        None
    }
}

/// `∫_a^b |x|^p dx` for `0 < a < b`, always finite.
fn power_integral_away(p: f64, a: f64, b: f64) -> f64 {
    if (p + 1.0).abs() < 1e-15 {
        (b / a).ln()
    } else {
        (b.powf(p + 1.0) - a.powf(p + 1.0)) / (p + 1.0)
    }
}

/// `∫_a^b |x|^p dx` by exact antiderivatives; `None` when divergent.
fn abs_power_integral(p: f64, a: f64, b: f64) -> Option<f64> {
    if a >= 0.0 {
        if a > 0.0 {
            Some(power_integral_away(p, a, b))
        } else {
            power_integral(p, b)
        }
    } else if b <= 0.0 {
        abs_power_integral(p, -b, -a)
    } else {
        Some(power_integral(p, -a)? + power_integral(p, b)?)
    }
}

/// `(avg_I |x|^α)(avg_I |x|^{-α})` on `I = [a, b]`; `f64::INFINITY` when
/// either average diverges.
pub fn a2_statistic(alpha: f64, a: f64, b: f64) -> Result<f64> {
    if !(a < b) || !a.is_finite() || !b.is_finite() || !alpha.is_finite() {
        return Err(Error::Config(format!("invalid interval [{a}, {b}] or alpha {alpha}")));
    }
    if alpha == 0.0 {
        return Ok(1.0);
    }
    let len = b - a;
    match (abs_power_integral(alpha, a, b), abs_power_integral(-alpha, a, b)) {
        (Some(p), Some(m)) => Ok((p / len) * (m / len)),
        _ => Ok(f64::INFINITY),
    }
}
