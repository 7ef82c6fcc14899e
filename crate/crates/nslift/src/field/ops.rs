//! Spatial operators: Leray projection, Fourier-symbol derivatives, the
//! Stokes operator, pseudo-spectral convection, the trilinear form, and norms.

use super::{PhysicalField, ScalarSpectralField, SpectralField, EPS_DIV, VOLUME};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Leray projection onto divergence-free fields: per mode k != 0 apply
/// I - k k^T / |k|^2; the mean mode passes through unchanged.
pub fn project_leray(f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    let mut out = f.clone();
    {
        let coeffs = out.coeffs_mut();
        for (idx, k) in grid.modes() {
            let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            if k2 == 0.0 {
                continue;
            }
            let dot = coeffs[0][idx] * k[0] as f64
                + coeffs[1][idx] * k[1] as f64
                + coeffs[2][idx] * k[2] as f64;
            let factor = dot / k2;
            for c in 0..3 {
                coeffs[c][idx] -= factor * k[c] as f64;
            }
        }
    }
    let dealiased = f.dealiased_flag();
    out.set_flags(true, dealiased);
    out
}

/// Force the mean mode to zero (optional convention for the k = 0 mode).
pub fn zero_mean(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    let idx = f.grid().index_of([0, 0, 0]);
    {
        let coeffs = out.coeffs_mut();
        for c in 0..3 {
            coeffs[c][idx] = Complex64::ZERO;
        }
    }
    out
}

/// Zero every mode outside the dealias box |k_i| <= kmax per axis.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    let kmax = grid.dealias_max();
    let mut out = f.clone();
    {
        let coeffs = out.coeffs_mut();
        for (idx, k) in grid.modes() {
            if k.iter().any(|&c| c.abs() > kmax) {
                for comp in coeffs.iter_mut() {
                    comp[idx] = Complex64::ZERO;
                }
            }
        }
    }
    let div_free = f.divergence_free_flag();
    out.set_flags(div_free, true);
    out
}

/// Multiply every mode by -|k|^2.
pub fn laplacian(f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    let mut out = f.clone();
    {
        let coeffs = out.coeffs_mut();
        for (idx, k) in grid.modes() {
            let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            for comp in coeffs.iter_mut() {
                comp[idx] *= -k2;
            }
        }
    }
    out
}

/// Gradient of a scalar: (i k_1 s, i k_2 s, i k_3 s).
pub fn gradient(s: &ScalarSpectralField) -> SpectralField {
    let grid = s.grid();
    let mut out = SpectralField::zeros(grid);
    {
        let coeffs = out.coeffs_mut();
        for (idx, k) in grid.modes() {
            let v = s.coeffs()[idx];
            for c in 0..3 {
                coeffs[c][idx] = Complex64::new(0.0, k[c] as f64) * v;
            }
        }
    }
    out.set_flags(false, false);
    out
}

/// Divergence: i k . c(k).
pub fn divergence(f: &SpectralField) -> ScalarSpectralField {
    let grid = f.grid();
    let mut coeffs = vec![Complex64::ZERO; grid.mode_count()];
    for (idx, k) in grid.modes() {
        let dot = f.component(0)[idx] * k[0] as f64
            + f.component(1)[idx] * k[1] as f64
            + f.component(2)[idx] * k[2] as f64;
        coeffs[idx] = Complex64::new(0.0, 1.0) * dot;
    }
    ScalarSpectralField::from_parts(grid, coeffs)
}

/// Stokes operator A = -P Laplacian, defined on divergence-free fields where
/// it reduces to multiplication by |k|^2.
pub fn stokes_apply(f: &SpectralField) -> Result<SpectralField> {
    let residual = f.max_divergence_residual();
    if residual > EPS_DIV {
        return Err(Error::NotDivergenceFree {
            residual,
            tolerance: EPS_DIV,
        });
    }
    let out = project_leray(&laplacian(f)).scale(-1.0);
    Ok(out)
}

/// Partial derivative of one component as physical samples.
fn derivative_physical(f: &SpectralField, comp: usize, axis: usize) -> Vec<f64> {
    let grid = f.grid();
    let mut buf: Vec<Complex64> = f.component(comp).to_vec();
    for (idx, k) in grid.modes() {
        buf[idx] *= Complex64::new(0.0, k[axis] as f64);
    }
    super::fft::inverse3(&mut buf, grid.points_per_axis());
    buf.into_iter().map(|z| z.re).collect()
}

/// Pseudo-spectral convection (u . grad) v: products are formed in physical
/// space and the result is dealiased by the 2/3 rule. The output is not
/// projected.
pub fn convect(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    let grid = u.grid();
    if grid != v.grid() {
        return Err(Error::GridMismatch(
            grid.points_per_axis(),
            v.grid().points_per_axis(),
        ));
    }
    let u_phys = u.to_physical();
    let m = grid.mode_count();
    let mut out_phys = PhysicalField::zeros(grid);
    for comp in 0..3 {
        let mut acc = vec![0.0f64; m];
        for axis in 0..3 {
            let dv = derivative_physical(v, comp, axis);
            let ua = u_phys.component(axis);
            for i in 0..m {
                acc[i] += ua[i] * dv[i];
            }
        }
        out_phys.component_mut(comp).copy_from_slice(&acc);
    }
    let spectral = SpectralField::from_physical(&out_phys)?;
    Ok(dealias(&spectral))
}

/// Trilinear form b(u, v, w) = integral of (u . grad) v . w.
pub fn trilinear_b(u: &SpectralField, v: &SpectralField, w: &SpectralField) -> Result<f64> {
    let conv = convect(u, v)?;
    inner_l2(&conv, w)
}

/// L2 inner product via Parseval (includes the box volume).
pub fn inner_l2(f: &SpectralField, g: &SpectralField) -> Result<f64> {
    f.grid().check_same(&g.grid())?;
    let mut acc = 0.0;
    for c in 0..3 {
        let fc = f.component(c);
        let gc = g.component(c);
        for i in 0..fc.len() {
            acc += (fc[i] * gc[i].conj()).re;
        }
    }
    Ok(acc * VOLUME)
}

/// L2 norm via Parseval.
pub fn norm_l2(f: &SpectralField) -> f64 {
    f.coeff_l2() * VOLUME.sqrt()
}

/// H1 seminorm |grad f|_2 via the Fourier symbol.
pub fn norm_h1_semi(f: &SpectralField) -> f64 {
    let grid = f.grid();
    let mut acc = 0.0;
    for (idx, k) in grid.modes() {
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        for c in 0..3 {
            acc += k2 * f.component(c)[idx].norm_sqr();
        }
    }
    (acc * VOLUME).sqrt()
}

/// Full H2 norm through the torus symbol sqrt(1 + |k|^2 + |k|^4).
pub fn norm_h2_symbol(f: &SpectralField) -> f64 {
    let grid = f.grid();
    let mut acc = 0.0;
    for (idx, k) in grid.modes() {
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        let w = 1.0 + k2 + k2 * k2;
        for c in 0..3 {
            acc += w * f.component(c)[idx].norm_sqr();
        }
    }
    (acc * VOLUME).sqrt()
}

/// Lq norm of the pointwise vector magnitude, by uniform-grid quadrature.
/// Valid for q in [2, 6].
pub fn norm_lq(f: &SpectralField, q: f64) -> Result<f64> {
    if !(2.0..=6.0).contains(&q) || !q.is_finite() {
        return Err(Error::InvalidLqExponent(q));
    }
    let grid = f.grid();
    let phys = f.to_physical();
    let n = grid.points_per_axis() as f64;
    let cell = (2.0 * std::f64::consts::PI / n).powi(3);
    let mut acc = 0.0;
    for i in 0..grid.mode_count() {
        let mag2 = phys.component(0)[i] * phys.component(0)[i]
            + phys.component(1)[i] * phys.component(1)[i]
            + phys.component(2)[i] * phys.component(2)[i];
        acc += mag2.powf(q / 2.0);
    }
    Ok((acc * cell).powf(1.0 / q))
}
