//! Periodic 2-D grids, Fourier transforms of real fields and diagonal
//! Fourier multipliers.
//!
//! Samples are stored row-major with `x` fastest: index `j * nx + i` holds
//! the sample at `(x_i, y_j) = (i dx, j dy)`. Spectra use the same layout in
//! FFT order, so column `i` carries the signed index `m = i` for `i < nx/2`
//! and `m = i - nx` otherwise; the Nyquist index is `m = -nx/2`.
//!
//! Forward transforms are scaled by `dx dy` so that coefficients approximate
//! the continuum transform `∫ e^{-i(xξ + yη)} u dx dy`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        for (name, n) in [("nx", nx), ("ny", ny)] {
            if n < 8 || n % 2 != 0 {
                return Err(Error::Config(format!("{name} = {n} must be even and at least 8")));
            }
        }
        for (name, l) in [("Lx", lx), ("Ly", ly)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::Config(format!("{name} = {l} must be positive")));
            }
        }
        Ok(Self { nx, ny, lx, ly })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    /// Cell area `dx dy`.
    pub fn cell(&self) -> f64 {
        self.dx() * self.dy()
    }

    /// Spectral spacing `dξ dη / (2π)^2 = 1 / (Lx Ly)` used by Plancherel.
    pub fn spectral_cell(&self) -> f64 {
        1.0 / (self.lx * self.ly)
    }

    /// Signed x-index of spectral column `i`.
    pub fn mx(&self, i: usize) -> i64 {
        signed_index(i, self.nx)
    }

    pub fn my(&self, j: usize) -> i64 {
        signed_index(j, self.ny)
    }

    /// Wavenumber ξ of spectral column `i`.
    pub fn xi(&self, i: usize) -> f64 {
        2.0 * PI * self.mx(i) as f64 / self.lx
    }

    pub fn eta(&self, j: usize) -> f64 {
        2.0 * PI * self.my(j) as f64 / self.ly
    }

    pub fn xis(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.xi(i)).collect()
    }

    pub fn etas(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.eta(j)).collect()
    }

    /// Largest |ξ| on the grid (the Nyquist wavenumber).
    pub fn xi_max(&self) -> f64 {
        PI * self.nx as f64 / self.lx
    }

    pub fn eta_max(&self) -> f64 {
        PI * self.ny as f64 / self.ly
    }

    pub fn is_x_nyquist(&self, i: usize) -> bool {
        i == self.nx / 2
    }

    pub fn is_y_nyquist(&self, j: usize) -> bool {
        j == self.ny / 2
    }

    /// Position of sample column `i` measured from the origin on the torus,
    /// wrapped into `[-Lx/2, Lx/2)`.
    pub fn x(&self, i: usize) -> f64 {
        self.dx() * signed_index(i, self.nx) as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        self.dy() * signed_index(j, self.ny) as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.y(j)).collect()
    }

    /// Index of the spectral partner `(-m, -n)`.
    pub fn conjugate_index(&self, i: usize, j: usize) -> (usize, usize) {
        ((self.nx - i) % self.nx, (self.ny - j) % self.ny)
    }

    pub fn ensure_same(&self, other: &Grid2D) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: Grid2D,
    data: Vec<f64>,
}

impl RealField {
    pub fn new(grid: Grid2D, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a {}x{} grid",
                data.len(),
                grid.nx(),
                grid.ny()
            )));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!("sample {k} is not finite")));
        }
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            data: vec![0.0; grid.len()],
        }
    }

    /// Samples `f(x, y)` at the wrapped sample positions.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let xs = grid.xs();
        let mut data = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            let y = grid.y(j);
            data.extend(xs.iter().map(|&x| f(x, y)));
        }
        Self { grid, data }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.grid.nx() + i]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Discrete L² norm `(Σ |u|² dx dy)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() * self.grid.cell()).sqrt()
    }

    /// Discrete inner product `Σ u v dx dy`.
    pub fn dot(&self, other: &RealField) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum::<f64>() * self.grid.cell())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &RealField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumField {
    grid: Grid2D,
    data: Vec<Complex64>,
}

impl SpectrumField {
    pub fn new(grid: Grid2D, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} coefficients for a {}x{} grid",
                data.len(),
                grid.nx(),
                grid.ny()
            )));
        }
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            data: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[j * self.grid.nx() + i]
    }

    /// Coefficient at signed indices `(m, n)`.
    pub fn mode(&self, m: i64, n: i64) -> Complex64 {
        let i = m.rem_euclid(self.grid.nx() as i64) as usize;
        let j = n.rem_euclid(self.grid.ny() as i64) as usize;
        self.at(i, j)
    }

    /// The `ξ = 0` column, `û(0, η_j)` for every `j` in FFT order.
    pub fn zero_mode(&self) -> Vec<Complex64> {
        (0..self.grid.ny()).map(|j| self.at(0, j)).collect()
    }

    /// `(Σ |û|² dξ dη)^{1/2} / (2π)`, equal to the physical L² norm.
    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.spectral_cell()).sqrt()
    }

    /// Largest violation of `û(-ξ,-η) = conj û(ξ,η)`.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let g = self.grid;
        let mut worst = 0.0_f64;
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                let (ci, cj) = g.conjugate_index(i, j);
                worst = worst.max((self.at(i, j) - self.at(ci, cj).conj()).norm());
            }
        }
        worst
    }

    pub fn scale(&mut self, s: Complex64) {
        for c in &mut self.data {
            *c *= s;
        }
    }

    pub fn axpy(&mut self, a: Complex64, other: &SpectrumField) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        for (c, o) in self.data.iter_mut().zip(&other.data) {
            *c += a * o;
        }
        Ok(())
    }
}

type PlanCache = Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry((len, inverse))
        .or_insert_with(|| {
            let dir = if inverse {
                FftDirection::Inverse
            } else {
                FftDirection::Forward
            };
            FftPlanner::new().plan_fft(len, dir)
        })
        .clone()
}

/// Unnormalized 2-D DFT in place.
fn fft2(grid: &Grid2D, buf: &mut [Complex64], inverse: bool) {
    let (nx, ny) = (grid.nx(), grid.ny());
    let px = plan(nx, inverse);
    let py = plan(ny, inverse);
    let mut scratch = vec![Complex64::new(0.0, 0.0); px.get_inplace_scratch_len().max(py.get_inplace_scratch_len())];
    px.process_with_scratch(buf, &mut scratch);

    let mut cols = vec![Complex64::new(0.0, 0.0); nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            cols[i * ny + j] = buf[j * nx + i];
        }
    }
    py.process_with_scratch(&mut cols, &mut scratch);
    for i in 0..nx {
        for j in 0..ny {
            buf[j * nx + i] = cols[i * ny + j];
        }
    }
}

pub fn forward(f: &RealField) -> SpectrumField {
    let grid = *f.grid();
    let mut buf: Vec<Complex64> = f.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(&grid, &mut buf, false);
    let cell = grid.cell();
    for c in &mut buf {
        *c *= cell;
    }
    SpectrumField { grid, data: buf }
}

/// Inverse transform keeping the imaginary parts (useful for realness audits).
pub fn inverse_complex(spec: &SpectrumField) -> Vec<Complex64> {
    let grid = *spec.grid();
    let mut buf = spec.data().to_vec();
    fft2(&grid, &mut buf, true);
    let scale = grid.spectral_cell();
    for c in &mut buf {
        *c *= scale;
    }
    buf
}

pub fn inverse(spec: &SpectrumField) -> RealField {
    let grid = *spec.grid();
    let data = inverse_complex(spec).into_iter().map(|c| c.re).collect();
    RealField { grid, data }
}

/// Evaluates `symbol` at spectral slot `(i, j)`. On a Nyquist row or column the
/// aliased wavenumber is ambiguous in sign, so the symbol is averaged over both
/// representatives; odd symbols therefore vanish there.
pub fn symbol_at(grid: &Grid2D, i: usize, j: usize, symbol: &impl Fn(f64, f64) -> Complex64) -> Complex64 {
    let xi = grid.xi(i);
    let eta = grid.eta(j);
    match (grid.is_x_nyquist(i), grid.is_y_nyquist(j)) {
        (false, false) => symbol(xi, eta),
        (true, false) => 0.5 * (symbol(xi, eta) + symbol(-xi, eta)),
        (false, true) => 0.5 * (symbol(xi, eta) + symbol(xi, -eta)),
        (true, true) => 0.25 * (symbol(xi, eta) + symbol(-xi, eta) + symbol(xi, -eta) + symbol(-xi, -eta)),
    }
}

/// Projects the Nyquist row and column onto the conjugate-symmetric subspace.
pub fn enforce_nyquist(spec: &mut SpectrumField) {
    let g = spec.grid;
    let (nx, ny) = (g.nx(), g.ny());
    let fix = |i: usize, j: usize, data: &mut [Complex64]| {
        let (ci, cj) = g.conjugate_index(i, j);
        let a = data[j * nx + i];
        let b = data[cj * nx + ci];
        data[j * nx + i] = 0.5 * (a + b.conj());
        data[cj * nx + ci] = 0.5 * (b + a.conj());
    };
    let ix = nx / 2;
    for j in 0..ny {
        fix(ix, j, &mut spec.data);
    }
    let jy = ny / 2;
    for i in 0..nx {
        fix(i, jy, &mut spec.data);
    }
}

pub fn apply_multiplier(spec: &SpectrumField, symbol: impl Fn(f64, f64) -> Complex64) -> Result<SpectrumField> {
    let g = spec.grid;
    let mut out = spec.clone();
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            let m = symbol_at(&g, i, j, &symbol);
            if !(m.re.is_finite() && m.im.is_finite()) {
                return Err(Error::NonFiniteMultiplier {
                    xi: g.xi(i),
                    eta: g.eta(j),
                });
            }
            out.data[j * g.nx() + i] *= m;
        }
    }
    enforce_nyquist(&mut out);
    Ok(out)
}

/// Whether slot `(i, j)` survives the 2/3 rule.
pub fn dealias_keeps(grid: &Grid2D, i: usize, j: usize) -> bool {
    // |m| <= nx/3  <=>  3|m| <= nx
    3 * grid.mx(i).unsigned_abs() as usize <= grid.nx() && 3 * grid.my(j).unsigned_abs() as usize <= grid.ny()
}

pub fn dealias_in_place(spec: &mut SpectrumField) {
    let g = spec.grid;
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            if !dealias_keeps(&g, i, j) {
                spec.data[j * g.nx() + i] = Complex64::new(0.0, 0.0);
            }
        }
    }
}

pub fn dealias(spec: &SpectrumField) -> SpectrumField {
    let mut out = spec.clone();
    dealias_in_place(&mut out);
    out
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn field(seed: u64) -> RealField {
        use rand::{Rng, SeedableRng};
        let g = Grid2D::new(16, 16, 5.0, 3.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        RealField::new(g, (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    proptest! {
        #[test]
        fn multiplier_is_linear(sa in any::<u64>(), sb in any::<u64>(), a in -3i32..3, b in -3i32..3) {
            // integer coefficients keep the combination exact in floating point
            let (a, b) = (a as f64, b as f64);
            let f = forward(&field(sa));
            let g = forward(&field(sb));
            let mut comb = f.clone();
            comb.scale(Complex64::new(a, 0.0));
            comb.axpy(Complex64::new(b, 0.0), &g).unwrap();
            let sym = |xi: f64, eta: f64| Complex64::new(1.0 + xi * xi, xi * eta * eta);
            let lhs = apply_multiplier(&comb, sym).unwrap();
            let mf = apply_multiplier(&f, sym).unwrap();
            let mg = apply_multiplier(&g, sym).unwrap();
            let scale = lhs.data().iter().map(|c| c.norm()).fold(1.0, f64::max);
            for k in 0..lhs.data().len() {
                let rhs = mf.data()[k] * a + mg.data()[k] * b;
                prop_assert!((lhs.data()[k] - rhs).norm() <= 1e-13 * scale);
            }
        }

        #[test]
        fn dealias_is_projection(seed in any::<u64>()) {
            let once = dealias(&forward(&field(seed)));
            prop_assert_eq!(dealias(&once), once);
        }
    }
}
