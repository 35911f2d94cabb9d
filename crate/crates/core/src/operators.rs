//! Linear symbols of the equation, the Hilbert transform in `x`, fractional
//! operators and the exact linear propagators.
//!
//! Fourier conventions: `∂x ↔ iξ`, `H ↔ -i sgn ξ`, so
//! `H ∂x² + ∂x ∂y² ↔ -i ω(ξ, η)` with `ω = ξη² - ξ|ξ|`, and the linear flow
//! of `u_t + H u_xx + u_xyy = μ Δu` multiplies `û` by
//! `exp(i t ω - t μ (ξ² + η²))`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{self, Grid2D, RealField, SpectrumField};

/// Dispersion relation `ω(ξ, η) = ξη² - ξ|ξ|`.
pub fn dispersion(xi: f64, eta: f64) -> f64 {
    xi * eta * eta - xi * xi.abs()
}

/// `sgn` with `sgn(0) = 0`.
pub fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn hilbert_symbol(xi: f64, _eta: f64) -> Complex64 {
    Complex64::new(0.0, -sgn(xi))
}

pub fn hilbert_x(f: &RealField) -> RealField {
    let spec = spectral::forward(f);
    // the symbol is bounded, so the multiplier cannot fail
    let out = spectral::apply_multiplier(&spec, hilbert_symbol).expect("bounded symbol");
    spectral::inverse(&out)
}

/// `H ∂x² f + ∂x ∂y² f`, the dispersive part of the equation.
pub fn dispersive_operator(f: &RealField) -> RealField {
    let spec = spectral::forward(f);
    let out =
        spectral::apply_multiplier(&spec, |xi, eta| Complex64::new(0.0, -dispersion(xi, eta))).expect("finite symbol");
    spectral::inverse(&out)
}

/// Applies `(iξ)^l (iη)^k`.
pub fn derivative(f: &RealField, l: u32, k: u32) -> RealField {
    let spec = spectral::forward(f);
    spectral::inverse(&derivative_spectrum(&spec, l, k))
}

pub fn derivative_spectrum(spec: &SpectrumField, l: u32, k: u32) -> SpectrumField {
    let i = Complex64::new(0.0, 1.0);
    spectral::apply_multiplier(spec, |xi, eta| (i * xi).powu(l) * (i * eta).powu(k)).expect("polynomial symbol")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FractionalKind {
    /// `(1 + ξ² + η²)^{z/2}`
    J,
    /// `(1 + ξ²)^{z/2}`
    Jx,
    /// `(1 + η²)^{z/2}`
    Jy,
    /// `(ξ² + η²)^{z/2}`
    D,
    /// `|ξ|^z`
    Dx,
}

impl FractionalKind {
    pub fn symbol(self, z: f64) -> impl Fn(f64, f64) -> f64 {
        move |xi: f64, eta: f64| match self {
            FractionalKind::J => (1.0 + xi * xi + eta * eta).powf(0.5 * z),
            FractionalKind::Jx => (1.0 + xi * xi).powf(0.5 * z),
            FractionalKind::Jy => (1.0 + eta * eta).powf(0.5 * z),
            FractionalKind::D => {
                let r2 = xi * xi + eta * eta;
                if z == 0.0 {
                    1.0
                } else if r2 == 0.0 {
                    if z > 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    r2.powf(0.5 * z)
                }
            }
            FractionalKind::Dx => {
                if z == 0.0 {
                    1.0
                } else if xi == 0.0 {
                    if z > 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    xi.abs().powf(z)
                }
            }
        }
    }

    fn homogeneous(self) -> bool {
        matches!(self, FractionalKind::D | FractionalKind::Dx)
    }
}

/// Applies a fractional multiplier in Fourier space.
///
/// For the homogeneous operators with negative order the singular set
/// (the origin for `D`, the line `ξ = 0` for `D_x`) must carry no mass; it is
/// then annihilated.
pub fn fractional_spectrum(spec: &SpectrumField, kind: FractionalKind, z: f64) -> Result<SpectrumField> {
    if !z.is_finite() {
        return Err(Error::Config(format!("order {z} is not finite")));
    }
    let sym = kind.symbol(z);
    if kind.homogeneous() && z < 0.0 {
        let g = spec.grid();
        let scale = spec.data().iter().map(|c| c.norm()).fold(0.0, f64::max);
        let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                if sym(g.xi(i), g.eta(j)).is_infinite() && spec.at(i, j).norm() > tol {
                    return Err(Error::NonzeroMean);
                }
            }
        }
        return spectral::apply_multiplier(spec, |xi, eta| {
            let v = sym(xi, eta);
            Complex64::new(if v.is_infinite() { 0.0 } else { v }, 0.0)
        });
    }
    spectral::apply_multiplier(spec, |xi, eta| Complex64::new(sym(xi, eta), 0.0))
}

pub fn fractional_op(f: &RealField, kind: FractionalKind, z: f64) -> Result<RealField> {
    let spec = fractional_spectrum(&spectral::forward(f), kind, z)?;
    Ok(spectral::inverse(&spec))
}

/// Exponent `i t ω - t μ |k|²` of the linear propagator at slot `(i, j)`,
/// with the Nyquist averaging of [`spectral::symbol_at`] applied to the
/// exponent so that the group law survives on Nyquist modes.
fn propagator_exponent(grid: &Grid2D, i: usize, j: usize, t: f64, mu: f64) -> Complex64 {
    spectral::symbol_at(grid, i, j, &|xi, eta| {
        Complex64::new(-t * mu * (xi * xi + eta * eta), t * dispersion(xi, eta))
    })
}

/// Pointwise factors of `E_μ(t)` in slot order.
pub fn propagator_factors(grid: &Grid2D, t: f64, mu: f64) -> Result<Vec<Complex64>> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::Config(format!("viscosity mu = {mu} must be >= 0")));
    }
    if mu > 0.0 && t < 0.0 {
        return Err(Error::BackwardDiffusion { mu, t });
    }
    let mut out = Vec::with_capacity(grid.len());
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            out.push(propagator_exponent(grid, i, j, t, mu).exp());
        }
    }
    Ok(out)
}

/// `E_μ(t) F`; for `μ = 0` this is the unitary group `U(t)`.
pub fn propagate(spec: &SpectrumField, t: f64, mu: f64) -> Result<SpectrumField> {
    let factors = propagator_factors(spec.grid(), t, mu)?;
    let mut out = spec.clone();
    for (c, e) in out.data_mut().iter_mut().zip(&factors) {
        *c *= e;
    }
    spectral::enforce_nyquist(&mut out);
    Ok(out)
}

/// `‖J^λ E_μ(t) φ‖ / ((1 + t^{-λ/2}) ‖φ‖)`.
pub fn smoothing_ratio(phi: &RealField, mu: f64, t: f64, lambda: f64) -> Result<f64> {
    if !(mu > 0.0 && t > 0.0 && lambda > 0.0) {
        return Err(Error::Config(format!(
            "smoothing ratio needs mu, t, lambda > 0 (got {mu}, {t}, {lambda})"
        )));
    }
    let norm = phi.l2_norm();
    if norm == 0.0 {
        return Err(Error::ZeroInput("smoothing ratio of the zero field".into()));
    }
    let evolved = propagate(&spectral::forward(phi), t, mu)?;
    let smoothed = fractional_spectrum(&evolved, FractionalKind::J, lambda)?;
    Ok(smoothed.l2_norm() / ((1.0 + t.powf(-0.5 * lambda)) * norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid2D {
        Grid2D::new(n, n, 2.0 * PI, 2.0 * PI).unwrap()
    }

    fn random_field(g: Grid2D, seed: u64) -> RealField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RealField::new(g, (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    fn max_diff(a: &RealField, b: &RealField) -> f64 {
        a.zip_with(b, |x, y| x - y).unwrap().max_abs()
    }

    #[test]
    fn symbol_properties() {
        for &eta in &[-3.0, 0.0, 0.5, 7.0] {
            assert_eq!(dispersion(0.0, eta), 0.0);
            for &xi in &[-2.0, 0.3, 5.0] {
                assert_eq!(dispersion(-xi, -eta), -dispersion(xi, eta));
            }
        }
        assert_eq!(dispersion(1.0, 1.0), 0.0);
    }

    #[test]
    fn hilbert_examples() {
        let g = grid(32);
        let h = hilbert_x(&RealField::from_fn(g, |x, _| x.cos()));
        assert!(max_diff(&h, &RealField::from_fn(g, |x, _| x.sin())) < 1e-12);

        let h1 = hilbert_x(&RealField::from_fn(g, |_, _| 1.0));
        assert!(h1.max_abs() < 1e-14);

        // remove the x-mean and the Nyquist column, where sgn is zero
        let f = random_field(g, 7);
        let spec = spectral::apply_multiplier(&spectral::forward(&f), |xi, _| {
            let keep = xi != 0.0 && xi.abs() < g.xi_max();
            Complex64::new(if keep { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap();
        let f0 = spectral::inverse(&spec);
        let hh = hilbert_x(&hilbert_x(&f0));
        assert!(max_diff(&hh, &f0.scaled(-1.0)) < 1e-12);
    }

    #[test]
    fn fractional_examples() {
        let g = grid(16);
        let f = random_field(g, 8);
        assert!(max_diff(&fractional_op(&f, FractionalKind::J, 0.0).unwrap(), &f) < 1e-13);

        let mode = RealField::from_fn(g, |x, y| (x + y).cos());
        let j2 = fractional_op(&mode, FractionalKind::J, 2.0).unwrap();
        assert!(max_diff(&j2, &mode.scaled(3.0)) < 1e-12);

        let c = RealField::from_fn(g, |x, _| x.cos());
        let d = fractional_op(&c, FractionalKind::Dx, 1.0).unwrap();
        assert!(max_diff(&d, &c) < 1e-12);

        assert_eq!(
            fractional_op(&RealField::from_fn(g, |_, _| 1.0), FractionalKind::D, -1.0),
            Err(Error::NonzeroMean)
        );
        assert!(fractional_op(&c, FractionalKind::Dx, -0.5).is_ok());
        assert_eq!(
            fractional_op(&RealField::from_fn(g, |_, y| y.cos()), FractionalKind::Dx, -0.5),
            Err(Error::NonzeroMean)
        );
    }

    #[test]
    fn unitary_and_decay() {
        let g = grid(16);
        let spec = spectral::forward(&random_field(g, 9));
        let out = propagate(&spec, 3.7, 0.0).unwrap();
        for (a, b) in spec.data().iter().zip(out.data()) {
            assert!((a.norm() - b.norm()).abs() < 1e-12 * a.norm().max(1e-300));
        }

        let mode = spectral::forward(&RealField::from_fn(g, |x, y| (x + y).cos()));
        let mu = 0.3;
        let t = 0.8;
        let out = propagate(&mode, t, mu).unwrap();
        let want = mode.mode(1, 1) * (-2.0 * mu * t).exp();
        assert!((out.mode(1, 1) - want).norm() < 1e-12);
    }

    #[test]
    fn backward_diffusion_rejected() {
        let g = grid(8);
        let spec = SpectrumField::zeros(g);
        assert!(matches!(
            propagate(&spec, -1.0, 0.1),
            Err(Error::BackwardDiffusion { .. })
        ));
        assert!(propagate(&spec, -1.0, 0.0).is_ok());
    }

    #[test]
    fn group_and_semigroup_laws() {
        let g = Grid2D::new(32, 16, 9.0, 4.0).unwrap();
        let spec = spectral::forward(&random_field(g, 10));
        for &mu in &[0.0, 0.05] {
            let two = propagate(&propagate(&spec, 0.3, mu).unwrap(), 0.45, mu).unwrap();
            let one = propagate(&spec, 0.75, mu).unwrap();
            let err = two
                .data()
                .iter()
                .zip(one.data())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            let scale = spec.data().iter().map(|c| c.norm()).fold(0.0, f64::max);
            assert!(err <= 1e-12 * scale, "mu = {mu}: {err}");
        }
    }

    #[test]
    fn propagator_keeps_fields_real() {
        let g = Grid2D::new(16, 16, 5.0, 5.0).unwrap();
        let f = random_field(g, 11);
        for &mu in &[0.0, 0.1] {
            let out = propagate(&spectral::forward(&f), 1.3, mu).unwrap();
            let imag = spectral::inverse_complex(&out)
                .iter()
                .fold(0.0_f64, |m, c| m.max(c.im.abs()));
            assert!(imag < 1e-12, "mu = {mu}: {imag}");
        }
    }

    #[test]
    fn dispersive_operator_is_skew() {
        let g = Grid2D::new(32, 32, 10.0, 7.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..5 {
            let f = random_field(g, rng.gen());
            let lf = dispersive_operator(&f);
            let pairing = f.dot(&lf).unwrap();
            let scale = f.l2_norm() * lf.l2_norm();
            assert!(pairing.abs() < 1e-12 * scale, "{pairing} vs {scale}");
        }
    }

    #[test]
    fn smoothing_ratio_cases() {
        let g = grid(32);
        let phi = random_field(g, 13);
        let r = smoothing_ratio(&phi, 0.1, 0.5, 1e-9).unwrap();
        assert!(r <= 0.5 + 1e-8);
        assert!(smoothing_ratio(&phi, 0.0, 0.5, 1.0).is_err());
        assert!(matches!(
            smoothing_ratio(&RealField::zeros(g), 0.1, 0.5, 1.0),
            Err(Error::ZeroInput(_))
        ));
    }
}
