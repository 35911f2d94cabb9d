//! Initial-data families and seeded random fields.

use rand::Rng;

use crate::spectral::{self, Grid2D, RealField};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GaussianParams {
    pub amplitude: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub center_x: f64,
    pub center_y: f64,
}

impl Default for GaussianParams {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            sigma_x: 1.0,
            sigma_y: 1.0,
            center_x: 0.0,
            center_y: 0.0,
        }
    }
}

/// `A exp(-(x-cx)²/(2σx²) - (y-cy)²/(2σy²))`.
pub fn gaussian(grid: Grid2D, p: &GaussianParams) -> RealField {
    RealField::from_fn(grid, |x, y| {
        let ax = (x - p.center_x) / p.sigma_x;
        let ay = (y - p.center_y) / p.sigma_y;
        p.amplitude * (-0.5 * (ax * ax + ay * ay)).exp()
    })
}

/// `∂x` of [`gaussian`] (scaled by `σx` so the amplitude stays comparable).
/// Its transform vanishes on the whole line `ξ = 0`.
pub fn dx_gaussian(grid: Grid2D, p: &GaussianParams) -> RealField {
    RealField::from_fn(grid, |x, y| {
        let ax = (x - p.center_x) / p.sigma_x;
        let ay = (y - p.center_y) / p.sigma_y;
        -p.amplitude * ax * (-0.5 * (ax * ax + ay * ay)).exp()
    })
}

/// Two `sech²` bumps of equal amplitude placed at `±separation/2` on the x-axis.
pub fn two_solitary_bumps(grid: Grid2D, amplitude: f64, width: f64, separation: f64) -> RealField {
    let sech2 = |s: f64| {
        let c = s.cosh();
        1.0 / (c * c)
    };
    RealField::from_fn(grid, |x, y| {
        let a = sech2((x - 0.5 * separation) / width);
        let b = sech2((x + 0.5 * separation) / width);
        amplitude * (a + b) * sech2(y / width)
    })
}

/// A smooth, spatially localized random field: random Fourier modes under a
/// Gaussian spectral envelope of width `k0`, multiplied by a Gaussian of
/// width `sigma` in physical space.
pub fn random_smooth_field(grid: Grid2D, rng: &mut impl Rng, k0: f64, sigma: f64) -> RealField {
    let mut spec = spectral::SpectrumField::zeros(grid);
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let (xi, eta) = (grid.xi(i), grid.eta(j));
            let env = (-(xi * xi + eta * eta) / (2.0 * k0 * k0)).exp();
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            spec.data_mut()[j * grid.nx() + i] = c * env;
        }
    }
    // inverse keeps the real part, which symmetrizes the random spectrum
    let base = spectral::inverse(&spec);
    let env = RealField::from_fn(grid, |x, y| (-(x * x + y * y) / (2.0 * sigma * sigma)).exp());
    let f = base.zip_with(&env, |a, b| a * b).expect("same grid");
    let n = f.l2_norm();
    if n > 0.0 {
        f.scaled(1.0 / n)
    } else {
        f
    }
}

/// White noise with unit L² norm (rough data for smoothing checks).
pub fn rough_field(grid: Grid2D, rng: &mut impl Rng) -> RealField {
    let data: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let f = RealField::new(grid, data).expect("finite samples");
    let n = f.l2_norm();
    f.scaled(1.0 / n)
}
