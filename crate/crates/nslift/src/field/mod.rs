//! Spectral representation of periodic vector fields on the 2-pi torus and
//! the spatial operators acting on them.
//!
//! A [`SpectralField`] stores the Fourier coefficients of a real 3-vector
//! field; wavenumbers per axis range over {-N/2+1, ..., N/2}. Fields are
//! immutable once constructed and all operators are pure functions, so values
//! can be shared freely across threads.

mod fft;
mod io;
mod ops;

pub use io::{
    read_field, read_jet_entries, write_field, write_jet_entries, write_physical_csv,
    write_scalar_physical_csv,
};
pub use ops::{
    convect, dealias, divergence, gradient, inner_l2, laplacian, norm_h1_semi, norm_h2_symbol,
    norm_l2, norm_lq, project_leray, stokes_apply, trilinear_b, zero_mean,
};

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Relative tolerance for the divergence-free invariant.
pub const EPS_DIV: f64 = 1e-13;

/// Box volume (2 pi)^3; the period is fixed at 2 pi per axis.
pub const VOLUME: f64 = 8.0 * std::f64::consts::PI * std::f64::consts::PI * std::f64::consts::PI;

/// Uniform periodic grid: N points per axis on [0, 2 pi)^3 with a rational
/// dealias fraction (defaults to 2/3).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Grid {
    n: usize,
    dealias_num: u32,
    dealias_den: u32,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_dealias(n, 2, 3)
    }

    pub fn with_dealias(n: usize, num: u32, den: u32) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidGridSize(n));
        }
        if num == 0 || den == 0 || num > den {
            return Err(Error::InvalidDealiasFraction { num, den });
        }
        Ok(Grid {
            n,
            dealias_num: num,
            dealias_den: den,
        })
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn dealias_fraction(&self) -> (u32, u32) {
        (self.dealias_num, self.dealias_den)
    }

    /// Largest wavenumber magnitude (per axis) kept by the dealias rule.
    pub fn dealias_max(&self) -> i64 {
        (self.n as u64 * self.dealias_num as u64 / (2 * self.dealias_den as u64)) as i64
    }

    pub fn mode_count(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Wavenumber of a storage index along one axis: 0..=N/2 then negatives.
    pub fn wavenumber(&self, idx: usize) -> i64 {
        if idx <= self.n / 2 {
            idx as i64
        } else {
            idx as i64 - self.n as i64
        }
    }

    /// Storage index of a wavenumber triple (each component in (-N/2, N/2]).
    pub fn index_of(&self, k: [i64; 3]) -> usize {
        let n = self.n as i64;
        let wrap = |c: i64| ((c % n) + n) % n;
        ((wrap(k[0]) * n + wrap(k[1])) * n + wrap(k[2])) as usize
    }

    /// Iterate (flat index, wavenumber triple) over all modes, z innermost.
    pub fn modes(&self) -> impl Iterator<Item = (usize, [i64; 3])> + '_ {
        let n = self.n;
        (0..n).flat_map(move |ix| {
            (0..n).flat_map(move |iy| {
                (0..n).map(move |iz| {
                    let idx = (ix * n + iy) * n + iz;
                    (idx, [self.wavenumber(ix), self.wavenumber(iy), self.wavenumber(iz)])
                })
            })
        })
    }

    fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            Err(Error::GridMismatch(self.n, other.n))
        } else {
            Ok(())
        }
    }
}

/// Fourier coefficients of a real 3-vector field.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    coeffs: [Vec<Complex64>; 3],
    divergence_free: bool,
    dealiased: bool,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        let m = grid.mode_count();
        SpectralField {
            grid,
            coeffs: [vec![Complex64::ZERO; m], vec![Complex64::ZERO; m], vec![Complex64::ZERO; m]],
            divergence_free: true,
            dealiased: true,
        }
    }

    /// Build a field from explicit modes. Each (k, value) entry also sets the
    /// conjugate value at -k so the physical field is real.
    pub fn from_modes(grid: Grid, modes: &[([i64; 3], [Complex64; 3])]) -> Self {
        let mut f = SpectralField::zeros(grid);
        for &(k, v) in modes {
            let idx = grid.index_of(k);
            let midx = grid.index_of([-k[0], -k[1], -k[2]]);
            for c in 0..3 {
                f.coeffs[c][idx] = v[c];
                f.coeffs[c][midx] = v[c].conj();
            }
            if idx == midx {
                for c in 0..3 {
                    f.coeffs[c][idx] = Complex64::new(v[c].re, 0.0);
                }
            }
        }
        f.divergence_free = f.max_divergence_residual() <= EPS_DIV;
        f.dealiased = f.is_outside_dealias_zero();
        f
    }

    pub(crate) fn from_parts(
        grid: Grid,
        coeffs: [Vec<Complex64>; 3],
        divergence_free: bool,
        dealiased: bool,
    ) -> Self {
        SpectralField {
            grid,
            coeffs,
            divergence_free,
            dealiased,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.coeffs[c]
    }

    pub fn coeff(&self, k: [i64; 3]) -> [Complex64; 3] {
        let idx = self.grid.index_of(k);
        [self.coeffs[0][idx], self.coeffs[1][idx], self.coeffs[2][idx]]
    }

    pub fn divergence_free_flag(&self) -> bool {
        self.divergence_free
    }

    pub fn dealiased_flag(&self) -> bool {
        self.dealiased
    }

    /// max_k |k . c(k)| / (plain coefficient l2 norm), 0 for the zero field.
    pub fn max_divergence_residual(&self) -> f64 {
        let norm = self.coeff_l2();
        if norm == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for (idx, k) in self.grid.modes() {
            let dot = self.coeffs[0][idx] * k[0] as f64
                + self.coeffs[1][idx] * k[1] as f64
                + self.coeffs[2][idx] * k[2] as f64;
            worst = worst.max(dot.norm());
        }
        worst / norm
    }

    fn is_outside_dealias_zero(&self) -> bool {
        let kmax = self.grid.dealias_max();
        for (idx, k) in self.grid.modes() {
            if k.iter().any(|&c| c.abs() > kmax)
                && self.coeffs.iter().any(|comp| comp[idx] != Complex64::ZERO)
            {
                return false;
            }
        }
        true
    }

    /// Plain l2 norm of the coefficient array (no volume factor).
    pub fn coeff_l2(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|comp| comp.iter().map(|c| c.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|comp| comp.iter().all(|c| c.re.is_finite() && c.im.is_finite()))
    }

    /// Inverse transform to physical samples.
    pub fn to_physical(&self) -> PhysicalField {
        let n = self.grid.n;
        let mut data: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for c in 0..3 {
            let mut buf = self.coeffs[c].clone();
            fft::inverse3(&mut buf, n);
            data[c] = buf.into_iter().map(|z| z.re).collect();
        }
        PhysicalField {
            grid: self.grid,
            data,
        }
    }

    /// Forward transform from physical samples, with exact Hermitian symmetry.
    pub fn from_physical(samples: &PhysicalField) -> Result<Self> {
        let grid = samples.grid;
        let want = grid.mode_count();
        let n = grid.n;
        let mut coeffs: [Vec<Complex64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for c in 0..3 {
            if samples.data[c].len() != want {
                return Err(Error::SampleSizeMismatch {
                    got: samples.data[c].len(),
                    want,
                });
            }
            let mut buf: Vec<Complex64> = samples.data[c]
                .iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect();
            fft::forward3(&mut buf, n);
            fft::hermitianize(&mut buf, n);
            coeffs[c] = buf;
        }
        Ok(SpectralField {
            grid,
            coeffs,
            divergence_free: false,
            dealiased: false,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let mut out = self.clone();
        for c in 0..3 {
            for (a, b) in out.coeffs[c].iter_mut().zip(other.coeffs[c].iter()) {
                *a += b;
            }
        }
        out.divergence_free = self.divergence_free && other.divergence_free;
        out.dealiased = self.dealiased && other.dealiased;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for c in 0..3 {
            for a in out.coeffs[c].iter_mut() {
                *a *= s;
            }
        }
        out
    }

    /// self + s * other, reused by the integrators and polynomial evaluation.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let mut out = self.clone();
        for c in 0..3 {
            for (a, b) in out.coeffs[c].iter_mut().zip(other.coeffs[c].iter()) {
                *a += s * b;
            }
        }
        out.divergence_free = self.divergence_free && other.divergence_free;
        out.dealiased = self.dealiased && other.dealiased;
        Ok(out)
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Vec<Complex64>; 3] {
        &mut self.coeffs
    }

    pub(crate) fn set_flags(&mut self, divergence_free: bool, dealiased: bool) {
        self.divergence_free = divergence_free;
        self.dealiased = dealiased;
    }
}

/// Fourier coefficients of a real scalar field (pressure lives here).
#[derive(Clone, Debug)]
pub struct ScalarSpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl ScalarSpectralField {
    pub fn zeros(grid: Grid) -> Self {
        ScalarSpectralField {
            grid,
            coeffs: vec![Complex64::ZERO; grid.mode_count()],
        }
    }

    pub fn from_modes(grid: Grid, modes: &[([i64; 3], Complex64)]) -> Self {
        let mut f = ScalarSpectralField::zeros(grid);
        for &(k, v) in modes {
            let idx = grid.index_of(k);
            let midx = grid.index_of([-k[0], -k[1], -k[2]]);
            f.coeffs[idx] = v;
            f.coeffs[midx] = v.conj();
            if idx == midx {
                f.coeffs[idx] = Complex64::new(v.re, 0.0);
            }
        }
        f
    }

    pub(crate) fn from_parts(grid: Grid, coeffs: Vec<Complex64>) -> Self {
        ScalarSpectralField { grid, coeffs }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: [i64; 3]) -> Complex64 {
        self.coeffs[self.grid.index_of(k)]
    }

    pub fn norm_l2(&self) -> f64 {
        (self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * VOLUME).sqrt()
    }

    pub fn to_physical(&self) -> Vec<f64> {
        let mut buf = self.coeffs.clone();
        fft::inverse3(&mut buf, self.grid.n);
        buf.into_iter().map(|z| z.re).collect()
    }
}

/// Physical-space samples of a 3-vector field, row-major with z innermost.
#[derive(Clone, Debug)]
pub struct PhysicalField {
    grid: Grid,
    data: [Vec<f64>; 3],
}

impl PhysicalField {
    pub fn zeros(grid: Grid) -> Self {
        let m = grid.mode_count();
        PhysicalField {
            grid,
            data: [vec![0.0; m], vec![0.0; m], vec![0.0; m]],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        let n = grid.n;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let mut out = PhysicalField::zeros(grid);
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    let idx = (ix * n + iy) * n + iz;
                    let v = f(ix as f64 * h, iy as f64 * h, iz as f64 * h);
                    for c in 0..3 {
                        out.data[c][idx] = v[c];
                    }
                }
            }
        }
        out
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.data[c]
    }

    pub(crate) fn component_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c]
    }

    pub(crate) fn into_data(self) -> [Vec<f64>; 3] {
        self.data
    }

    pub(crate) fn from_data(grid: Grid, data: [Vec<f64>; 3]) -> Self {
        PhysicalField { grid, data }
    }
}
