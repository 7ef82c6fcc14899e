//! Independent cross-validation engines.
//!
//! The Taylor-series oracle differentiates the assembled right-hand side of
//! the truncated ODE systems recursively (Cauchy products for the quadratic
//! terms), so it shares no code path with the jet recurrences in `compat`;
//! the two derivations certify each other. The residual-forcing coefficients
//! are likewise rebuilt here from the lift polynomial alone.

use crate::compat::{factorial, ForcingModel, LiftPolynomial};
use crate::error::{Error, Result};
use crate::field::{
    convect, laplacian, norm_l2, project_leray, Grid, SpectralField,
};
use crate::galerkin::ModeCutoff;
use serde::Serialize;

/// Taylor coefficients a_i = d_t^i x(t0) / i! of a truncated-system solution.
#[derive(Clone, Debug)]
pub struct TaylorSeriesState {
    coefficients: Vec<SpectralField>,
}

impl TaylorSeriesState {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficient(&self, i: usize) -> &SpectralField {
        &self.coefficients[i]
    }

    /// Plain derivative d_t^i x(t0) = i! a_i.
    pub fn derivative(&self, i: usize) -> SpectralField {
        self.coefficients[i].scale(factorial(i))
    }

    /// Series evaluation at offset s from the expansion point.
    pub fn eval(&self, s: f64) -> SpectralField {
        let mut acc = self.coefficients.last().expect("nonempty").clone();
        for i in (0..self.coefficients.len() - 1).rev() {
            acc = self.coefficients[i]
                .axpy(s, &acc)
                .expect("coefficients share a grid");
        }
        acc
    }
}

/// Which truncated system the oracle differentiates.
pub enum OdeFormulation<'a> {
    DirectNs {
        forcing: &'a ForcingModel,
    },
    ProblemB {
        beta: &'a LiftPolynomial,
        forcing: &'a ForcingModel,
    },
}

/// Taylor coefficients of the truncated-system solution around t = 0 with
/// the given initial value. Forcing and lift are polynomial in time, so every
/// coefficient is exact up to rounding.
pub fn taylor_coefficients_ode(
    initial: &SpectralField,
    cutoff: ModeCutoff,
    formulation: &OdeFormulation,
    order: usize,
) -> Result<TaylorSeriesState> {
    taylor_coefficients_ode_at(0.0, initial, cutoff, formulation, order)
}

/// Taylor coefficients around an arbitrary expansion time t0; the polynomial
/// time dependencies are shifted exactly.
pub fn taylor_coefficients_ode_at(
    t0: f64,
    initial: &SpectralField,
    cutoff: ModeCutoff,
    formulation: &OdeFormulation,
    order: usize,
) -> Result<TaylorSeriesState> {
    cutoff.check_resolved(initial.grid())?;
    match formulation {
        OdeFormulation::DirectNs { forcing } => {
            let f_coeffs = shifted_taylor(forcing, t0, order);
            taylor_direct(initial, cutoff, &f_coeffs, order)
        }
        OdeFormulation::ProblemB { beta, forcing } => {
            let max = 2 * (beta.i_star() + 1) + 2;
            if order > max {
                return Err(Error::TaylorOrderTooHigh { order, max });
            }
            let deg = beta.degree();
            let b_coeffs: Vec<SpectralField> = (0..=deg + 1)
                .map(|k| beta.dt_eval(t0, k).scale(1.0 / factorial(k)))
                .collect();
            let f_coeffs = shifted_taylor(forcing, t0, order.max(2 * deg));
            taylor_problem_b(initial, cutoff, &b_coeffs, deg, &f_coeffs, order)
        }
    }
}

fn shifted_taylor(forcing: &ForcingModel, t0: f64, through: usize) -> Vec<SpectralField> {
    // Taylor coefficients of t -> f(t0 + t): exact polynomial shift.
    let grid = forcing.grid();
    let deg = forcing.degree();
    (0..=through.max(deg))
        .map(|m| {
            if m > deg {
                return SpectralField::zeros(grid);
            }
            // d_t^m f(t0) / m! = sum_{k>=m} e_k t0^{k-m} / (k-m)! / m!
            let mut acc = SpectralField::zeros(grid);
            for k in (m..=deg).rev() {
                let w = t0.powi((k - m) as i32) / (factorial(k - m) * factorial(m));
                acc = forcing
                    .jet()
                    .entry(k)
                    .scale(w)
                    .add(&acc)
                    .expect("forcing entries share a grid");
            }
            acc
        })
        .collect()
}

fn taylor_direct(
    initial: &SpectralField,
    cutoff: ModeCutoff,
    f_coeffs: &[SpectralField],
    order: usize,
) -> Result<TaylorSeriesState> {
    let grid = initial.grid();
    let mut a: Vec<SpectralField> = Vec::with_capacity(order + 1);
    a.push(cutoff.apply(&project_leray(initial)));
    for i in 0..order {
        let mut inner = SpectralField::zeros(grid);
        for r in 0..=i {
            inner = inner.axpy(-1.0, &convect(&a[r], &a[i - r])?)?;
        }
        if i < f_coeffs.len() {
            inner = inner.add(&f_coeffs[i])?;
        }
        let projected = cutoff.apply(&project_leray(&inner));
        let next = laplacian(&a[i]).add(&projected)?.scale(1.0 / (i + 1) as f64);
        a.push(next);
    }
    Ok(TaylorSeriesState { coefficients: a })
}

fn taylor_problem_b(
    initial: &SpectralField,
    cutoff: ModeCutoff,
    b_coeffs: &[SpectralField],
    beta_degree: usize,
    f_coeffs: &[SpectralField],
    order: usize,
) -> Result<TaylorSeriesState> {
    let grid = initial.grid();
    let b = |k: usize| -> &SpectralField { &b_coeffs[k.min(b_coeffs.len() - 1)] };
    // residual-forcing Taylor coefficients, derived from the lift alone:
    // c_i = -(i+1) b_{i+1} + Lap b_i - sum_r b_r . grad b_{i-r} + f_i
    let mut c: Vec<SpectralField> = Vec::with_capacity(order + 1);
    for i in 0..=order.max(2 * beta_degree) {
        let mut ci = if i + 1 <= beta_degree {
            b(i + 1).scale(-((i + 1) as f64))
        } else {
            SpectralField::zeros(grid)
        };
        if i <= beta_degree {
            ci = ci.add(&laplacian(b(i)))?;
        }
        for r in 0..=i.min(beta_degree) {
            if i - r <= beta_degree {
                ci = ci.axpy(-1.0, &convect(b(r), b(i - r))?)?;
            }
        }
        if i < f_coeffs.len() {
            ci = ci.add(&f_coeffs[i])?;
        }
        c.push(ci);
    }

    let mut a: Vec<SpectralField> = Vec::with_capacity(order + 1);
    a.push(cutoff.apply(&project_leray(initial)));
    for i in 0..order {
        let mut inner = c[i].clone();
        for r in 0..=i {
            inner = inner.axpy(-1.0, &convect(&a[r], &a[i - r])?)?;
            if r <= beta_degree {
                inner = inner.axpy(-1.0, &convect(b(r), &a[i - r])?)?;
            }
            if i - r <= beta_degree {
                inner = inner.axpy(-1.0, &convect(&a[r], b(i - r))?)?;
            }
        }
        let projected = cutoff.apply(&project_leray(&inner));
        let next = laplacian(&a[i]).add(&projected)?.scale(1.0 / (i + 1) as f64);
        a.push(next);
    }
    Ok(TaylorSeriesState { coefficients: a })
}

/// Per-order comparison between a derivative jet and i! times the oracle
/// coefficients; the gap at order i is normalized by max(|jet_i|, scale).
#[derive(Clone, Debug, Serialize)]
pub struct OracleComparison {
    pub orders: usize,
    pub jet_norms: Vec<f64>,
    pub oracle_norms: Vec<f64>,
    pub absolute_gaps: Vec<f64>,
    /// |i! a_i - jet_i| / max(|jet_i|, scale).
    pub relative_gaps: Vec<f64>,
    pub max_relative_gap: f64,
}

impl OracleComparison {
    /// Gaps renormalized by a per-order floor (for instance the norms of the
    /// companion velocity jet, the natural size of order-i arithmetic).
    pub fn gaps_with_floor(&self, floors: &[f64], scale: f64) -> Vec<f64> {
        (0..self.orders)
            .map(|i| {
                let floor = floors.get(i).copied().unwrap_or(0.0);
                self.absolute_gaps[i] / self.jet_norms[i].max(floor).max(scale)
            })
            .collect()
    }
}

pub fn compare_jet_with_taylor(
    jet: &crate::compat::FieldJet,
    taylor: &TaylorSeriesState,
    scale: f64,
) -> Result<OracleComparison> {
    let orders = jet.len().min(taylor.coefficients.len());
    let mut jet_norms = Vec::with_capacity(orders);
    let mut oracle_norms = Vec::with_capacity(orders);
    let mut abs_gaps = Vec::with_capacity(orders);
    let mut gaps = Vec::with_capacity(orders);
    let mut max_gap = 0.0f64;
    for i in 0..orders {
        let oracle_deriv = taylor.derivative(i);
        let jn = norm_l2(jet.entry(i));
        let on = norm_l2(&oracle_deriv);
        let abs = norm_l2(&oracle_deriv.sub(jet.entry(i))?);
        let gap = abs / jn.max(scale);
        jet_norms.push(jn);
        oracle_norms.push(on);
        abs_gaps.push(abs);
        gaps.push(gap);
        max_gap = max_gap.max(gap);
    }
    Ok(OracleComparison {
        orders,
        jet_norms,
        oracle_norms,
        absolute_gaps: abs_gaps,
        relative_gaps: gaps,
        max_relative_gap: max_gap,
    })
}

const FD_STENCILS: [&[f64]; 4] = [
    &[-1.5, 2.0, -0.5],
    &[2.0, -5.0, 4.0, -1.0],
    &[-2.5, 9.0, -12.0, 7.0, -1.5],
    &[3.0, -14.0, 26.0, -24.0, 11.0, -2.0],
];

fn fd_apply(samples: &[SpectralField], stride: usize, h: f64, d: usize) -> Result<SpectralField> {
    let stencil = FD_STENCILS[d - 1];
    let needed = (stencil.len() - 1) * stride;
    if samples.len() <= needed {
        return Err(Error::TooFewSamples {
            got: samples.len(),
            needed: needed + 1,
        });
    }
    let scale = h.powi(d as i32);
    let mut acc = SpectralField::zeros(samples[0].grid());
    for (j, &w) in stencil.iter().enumerate() {
        acc = acc.axpy(w / scale, &samples[j * stride])?;
    }
    Ok(acc)
}

/// Derivative estimates at t = 0 from a uniformly sampled trajectory, via
/// one-sided second-order stencils Richardson-extrapolated across a step
/// doubling. Returns one (estimate, error estimate) pair per order 1..=order.
pub fn finite_difference_jet(
    samples: &[SpectralField],
    sample_dt: f64,
    order: usize,
    base_step: f64,
) -> Result<Vec<(SpectralField, f64)>> {
    if order == 0 || order > 4 {
        return Err(Error::UnsupportedFdOrder(order));
    }
    let stride = (base_step / sample_dt).round() as usize;
    if stride == 0 || (stride as f64 * sample_dt - base_step).abs() > 1e-9 * base_step {
        return Err(Error::InvalidStepSize(base_step));
    }
    let mut out = Vec::with_capacity(order);
    for d in 1..=order {
        let fine = fd_apply(samples, stride, stride as f64 * sample_dt, d)?;
        let coarse = fd_apply(samples, 2 * stride, 2.0 * stride as f64 * sample_dt, d)?;
        // second-order stencils: Richardson weights 4/3 and -1/3
        let extrapolated = fine.scale(4.0 / 3.0).axpy(-1.0 / 3.0, &coarse)?;
        let err = norm_l2(&fine.sub(&coarse)?) / 3.0;
        out.push((extrapolated, err));
    }
    Ok(out)
}

/// Scalar-series variant of the same stencils, used to validate the error
/// estimates on known functions.
pub fn finite_difference_scalar(
    samples: &[f64],
    sample_dt: f64,
    order: usize,
    base_step: f64,
) -> Result<Vec<(f64, f64)>> {
    if order == 0 || order > 4 {
        return Err(Error::UnsupportedFdOrder(order));
    }
    let stride = (base_step / sample_dt).round() as usize;
    if stride == 0 {
        return Err(Error::InvalidStepSize(base_step));
    }
    let apply = |stride: usize, d: usize| -> Result<f64> {
        let stencil = FD_STENCILS[d - 1];
        let needed = (stencil.len() - 1) * stride;
        if samples.len() <= needed {
            return Err(Error::TooFewSamples {
                got: samples.len(),
                needed: needed + 1,
            });
        }
        let h = stride as f64 * sample_dt;
        Ok(stencil
            .iter()
            .enumerate()
            .map(|(j, &w)| w * samples[j * stride])
            .sum::<f64>()
            / h.powi(d as i32))
    };
    let mut out = Vec::with_capacity(order);
    for d in 1..=order {
        let fine = apply(stride, d)?;
        let coarse = apply(2 * stride, d)?;
        out.push((4.0 / 3.0 * fine - coarse / 3.0, (fine - coarse).abs() / 3.0));
    }
    Ok(out)
}

/// Closed-form reference e^{-t} (sin x2, 0, 0): the shear flow has vanishing
/// self-advection, so this solves the full system exactly.
pub fn reference_shear(grid: Grid, t: f64) -> SpectralField {
    crate::presets::shear(grid).scale((-t).exp())
}
