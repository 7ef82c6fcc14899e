//! A-priori-quantity monitors: per-step diagnostics, the discrete energy
//! balance, empirical constant fitting, continuation-window calculators, and
//! the interpolation-inequality checks backing them.
//!
//! The constants fitted here are empirical surrogates measured on a field
//! corpus; they are never claimed to bound the continuous problem and every
//! report labels them as fitted.

use crate::compat::{ForcingModel, LiftPolynomial};
use crate::error::{Error, Result};
use crate::field::{
    inner_l2, norm_h1_semi, norm_l2, norm_lq, project_leray, stokes_apply, trilinear_b,
    zero_mean, SpectralField,
};
use crate::galerkin::{Formulation, GalerkinState, Rhs, Trajectory};
use crate::oracle::{self, OdeFormulation};
use serde::Serialize;

/// Everything `record` needs to differentiate the dynamics at a state.
pub struct RhsContext<'a> {
    pub rhs: &'a dyn Rhs,
    /// Lift polynomial when the dynamics is the shifted formulation.
    pub lift: Option<&'a LiftPolynomial>,
    pub forcing: &'a ForcingModel,
}

impl<'a> RhsContext<'a> {
    fn oracle_formulation(&self) -> OdeFormulation<'_> {
        match self.rhs.formulation() {
            Formulation::DirectNs => OdeFormulation::DirectNs {
                forcing: self.forcing,
            },
            Formulation::ProblemB => OdeFormulation::ProblemB {
                beta: self.lift.expect("shifted context carries the lift"),
                forcing: self.forcing,
            },
        }
    }
}

/// Norms and derivative norms monitored along a trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub l2_norm: f64,
    pub h1_semi: f64,
    pub stokes_norm: f64,
    /// (|d_t^i v|_2, |grad d_t^i v|_2) for i = 0 ..= i_monitor.
    pub jet_norms: Vec<(f64, f64)>,
    /// Residual of the discrete energy identity, filled by `diagnose`.
    pub energy_residual: Option<f64>,
}

/// Populate a diagnostics record at one state. Time derivatives come from
/// the oracle's recursive differentiation of the assembled right-hand side
/// at the current state, exact for the polynomial-forced truncated system.
pub fn record(
    state: &GalerkinState,
    ctx: &RhsContext,
    i_monitor: usize,
) -> Result<DiagnosticsRecord> {
    let series = oracle::taylor_coefficients_ode_at(
        state.t,
        &state.field,
        ctx.rhs.cutoff(),
        &ctx.oracle_formulation(),
        i_monitor,
    )?;
    let mut jet_norms = Vec::with_capacity(i_monitor + 1);
    for i in 0..=i_monitor {
        let d = series.derivative(i);
        jet_norms.push((norm_l2(&d), norm_h1_semi(&d)));
    }
    let rec = DiagnosticsRecord {
        t: state.t,
        l2_norm: norm_l2(&state.field),
        h1_semi: norm_h1_semi(&state.field),
        stokes_norm: norm_l2(&stokes_apply(&state.field)?),
        jet_norms,
        energy_residual: None,
    };
    let finite = rec.l2_norm.is_finite()
        && rec.h1_semi.is_finite()
        && rec.stokes_norm.is_finite()
        && rec.jet_norms.iter().all(|(a, b)| a.is_finite() && b.is_finite());
    if !finite {
        return Err(Error::NonFiniteDiagnostics { t: state.t });
    }
    Ok(rec)
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticsSeries {
    pub records: Vec<DiagnosticsRecord>,
}

/// Diagnostics for every output state of a trajectory, with the discrete
/// energy residual filled on interior samples.
pub fn diagnose(
    trajectory: &Trajectory,
    ctx: &RhsContext,
    i_monitor: usize,
) -> Result<DiagnosticsSeries> {
    let mut records = Vec::with_capacity(trajectory.times.len());
    for (i, &t) in trajectory.times.iter().enumerate() {
        let state = GalerkinState::new(t, trajectory.states[i].clone(), trajectory.formulation);
        records.push(record(&state, ctx, i_monitor)?);
    }
    if records.len() >= 3 {
        let balance = energy_balance_residual(trajectory, ctx)?;
        for (j, &r) in balance.identity_residuals.iter().enumerate() {
            records[j + 1].energy_residual = Some(r);
        }
    }
    Ok(DiagnosticsSeries { records })
}

/// Discrete energy-balance series over the interior output times.
#[derive(Clone, Debug, Serialize)]
pub struct EnergyBalance {
    pub times: Vec<f64>,
    /// | centered d/dt |v|^2 - 2 (rhs, v) | per interior sample.
    pub identity_residuals: Vec<f64>,
    /// Positive part of centered d/dt |v|^2 + 2 |grad v|^2 minus the
    /// inequality envelope (2 |b(v, beta, v)| + 2 |theta| |v|, or
    /// 2 |f| |u| for the direct formulation).
    pub inequality_excess: Vec<f64>,
    pub max_identity_residual: f64,
    pub max_inequality_excess: f64,
}

pub fn energy_balance_residual(
    trajectory: &Trajectory,
    ctx: &RhsContext,
) -> Result<EnergyBalance> {
    let n = trajectory.times.len();
    if n < 3 {
        return Err(Error::TooFewSamples { got: n, needed: 3 });
    }
    let mut times = Vec::with_capacity(n - 2);
    let mut residuals = Vec::with_capacity(n - 2);
    let mut excesses = Vec::with_capacity(n - 2);
    let energies: Vec<f64> = trajectory
        .states
        .iter()
        .map(|s| norm_l2(s).powi(2))
        .collect();
    for j in 1..n - 1 {
        let t = trajectory.times[j];
        let span = trajectory.times[j + 1] - trajectory.times[j - 1];
        let dedt = (energies[j + 1] - energies[j - 1]) / span;
        let v = &trajectory.states[j];
        let rhs_val = ctx.rhs.eval(t, v)?;
        let production = 2.0 * inner_l2(&rhs_val, v)?;
        let residual = (dedt - production).abs();

        // inequality direction: d/dt |v|^2 + 2 |grad v|^2 <= envelope
        let envelope = match (ctx.rhs.formulation(), ctx.lift) {
            (Formulation::ProblemB, Some(beta)) => {
                let b_at = beta.eval(t);
                let theta = crate::compat::theta_eval(beta, ctx.forcing, t)?;
                2.0 * trilinear_b(v, &b_at, v)?.abs() + 2.0 * norm_l2(&theta) * norm_l2(v)
            }
            _ => 2.0 * norm_l2(&ctx.forcing.eval(t)) * norm_l2(v),
        };
        let lhs = dedt + 2.0 * norm_h1_semi(v).powi(2);
        let excess = (lhs - envelope - residual).max(0.0);

        times.push(t);
        residuals.push(residual);
        excesses.push(excess);
    }
    let max_identity_residual = residuals.iter().cloned().fold(0.0, f64::max);
    let max_inequality_excess = excesses.iter().cloned().fold(0.0, f64::max);
    Ok(EnergyBalance {
        times,
        identity_residuals: residuals,
        inequality_excess: excesses,
        max_identity_residual,
        max_inequality_excess,
    })
}

/// Interpolation-inequality measurement: ratio of |f|_q to
/// |f|_2^(1 + 3/q - 3/2) |f|_H1^(3/2 - 3/q). `None` marks a zero field.
#[derive(Clone, Debug, Serialize)]
pub struct GnReport {
    pub q: f64,
    pub ratio: Option<f64>,
}

pub fn gn_verify(field: &SpectralField, q: f64) -> Result<GnReport> {
    let lq = norm_lq(field, q)?;
    let l2 = norm_l2(field);
    if l2 == 0.0 {
        return Ok(GnReport { q, ratio: None });
    }
    let h1 = (l2 * l2 + norm_h1_semi(field).powi(2)).sqrt();
    let e2 = 1.0 + 3.0 / q - 1.5;
    let e1 = 1.5 - 3.0 / q;
    Ok(GnReport {
        q,
        ratio: Some(lq / (l2.powf(e2) * h1.powf(e1))),
    })
}

/// Constants entering the window calculators. `c2` is the coefficient of the
/// cubic differential inequality for |grad v|^2; `big_c2` scales the
/// continuation increment; `m` is the observed bound |grad v(., T)|^2.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ContinuationParams {
    pub c2: f64,
    pub big_c2: f64,
    pub m: f64,
    pub t_o: f64,
}

impl ContinuationParams {
    /// Validated constructor: c2, big_c2, t_o positive; m nonnegative.
    pub fn new(c2: f64, big_c2: f64, m: f64, t_o: f64) -> Result<Self> {
        for (name, value, ok) in [
            ("c2", c2, c2 > 0.0),
            ("big_c2", big_c2, big_c2 > 0.0),
            ("m", m, m >= 0.0),
            ("t_o", t_o, t_o > 0.0),
        ] {
            if !ok {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        Ok(ContinuationParams { c2, big_c2, m, t_o })
    }
}

/// First window on which |grad v|^2 stays below 1: min{3 / (8 c2), T_o}.
pub fn first_window(params: &ContinuationParams) -> f64 {
    (3.0 / (8.0 * params.c2)).min(params.t_o)
}

/// Extended window from time T: min{T + big_c2 (M+1)^-2, T_o}; the companion
/// bound on it is |grad v|^2 <= 2M + 1.
pub fn continuation_time(params: &ContinuationParams, t: f64) -> f64 {
    (t + params.big_c2 * (params.m + 1.0).powi(-2)).min(params.t_o)
}

/// Empirical constant fit, reported with the measured interpolation ratios.
#[derive(Clone, Debug, Serialize)]
pub struct C2Fit {
    pub c2: f64,
    /// max |v|_3 / (|v|_2^1/2 |grad v|_2^1/2) over the corpus
    pub r3: f64,
    /// max |v|_6 / |grad v|_2
    pub r6: f64,
    /// max |grad v|_3 / (|grad v|_2^1/2 |A v|_2^1/2)
    pub s_grad: f64,
    pub max_gn_ratio: f64,
    pub corpus_size: usize,
    pub provenance: &'static str,
}

/// L3 norm of the gradient tensor (pointwise Frobenius magnitude).
fn norm_l3_gradient(f: &SpectralField) -> f64 {
    use num_complex::Complex64;
    let grid = f.grid();
    let n = grid.points_per_axis();
    let m = grid.mode_count();
    let mut mag2 = vec![0.0f64; m];
    for comp in 0..3 {
        for axis in 0..3 {
            let mut buf: Vec<Complex64> = f.component(comp).to_vec();
            for (idx, k) in grid.modes() {
                buf[idx] *= Complex64::new(0.0, k[axis] as f64);
            }
            let mut tmp = SpectralField::zeros(grid);
            tmp.coeffs_mut()[0] = buf;
            let phys = tmp.to_physical();
            let d = phys.component(0);
            for i in 0..m {
                mag2[i] += d[i] * d[i];
            }
        }
    }
    let cell = (2.0 * std::f64::consts::PI / n as f64).powi(3);
    (mag2.iter().map(|&x| x.powf(1.5)).sum::<f64>() * cell).powf(1.0 / 3.0)
}

/// Fit the smallest c2 for which the interpolation/Young chain behind the
/// cubic gradient inequality holds on every corpus member, with lift and
/// residual-forcing norms normalized to one. The Young split takes a quarter
/// of |A v|^2 from each of the four majorized terms:
///
///   c2 = 108 r6^4 s^4 + 108 s^4 + 4 r3^2 + 4.
///
/// Enlarging the corpus can only increase the fitted value.
pub fn fit_c2(corpus: &[SpectralField]) -> Result<C2Fit> {
    if corpus.len() < 10 {
        return Err(Error::CorpusTooSmall {
            got: corpus.len(),
            needed: 10,
        });
    }
    let mut r3 = 0.0f64;
    let mut r6 = 0.0f64;
    let mut s_grad = 0.0f64;
    let mut max_gn = 0.0f64;
    let mut used = 0usize;
    for f in corpus {
        let f = zero_mean(&project_leray(f));
        let l2 = norm_l2(&f);
        if l2 == 0.0 {
            continue;
        }
        used += 1;
        let h1 = norm_h1_semi(&f);
        let l3 = norm_lq(&f, 3.0)?;
        let l6 = norm_lq(&f, 6.0)?;
        let a = norm_l2(&stokes_apply(&f)?);
        r3 = r3.max(l3 / (l2.sqrt() * h1.sqrt()));
        r6 = r6.max(l6 / h1);
        s_grad = s_grad.max(norm_l3_gradient(&f) / (h1.sqrt() * a.sqrt()));
        for q in [3.0, 4.0, 6.0] {
            if let Some(ratio) = gn_verify(&f, q)?.ratio {
                max_gn = max_gn.max(ratio);
            }
        }
    }
    if used == 0 {
        return Err(Error::CorpusTooSmall { got: 0, needed: 10 });
    }
    let c2 = 108.0 * r6.powi(4) * s_grad.powi(4) + 108.0 * s_grad.powi(4) + 4.0 * r3 * r3 + 4.0;
    Ok(C2Fit {
        c2,
        r3,
        r6,
        s_grad,
        max_gn_ratio: max_gn,
        corpus_size: used,
        provenance: "empirical (corpus fit, unit lift normalization)",
    })
}

/// Does |grad v(., t)|^2 <= bound hold over [t_from, t_to] on the sampled
/// trajectory?
pub fn gradient_bound_holds(
    samples: &[(f64, f64)],
    t_from: f64,
    t_to: f64,
    bound: f64,
) -> bool {
    samples
        .iter()
        .filter(|(t, _)| *t >= t_from - 1e-12 && *t <= t_to + 1e-12)
        .all(|(_, g2)| *g2 <= bound)
}

/// Largest big_c2 in (0, cap] whose extended window keeps |grad v|^2 below
/// 2M + 1 on the sampled trajectory, found by bisection. The predicate is
/// monotone: growing big_c2 only widens the window.
pub fn fit_big_c2_bisection(
    samples: &[(f64, f64)],
    t_start: f64,
    m: f64,
    t_o: f64,
    cap: f64,
) -> f64 {
    let bound = 2.0 * m + 1.0;
    let passes = |c: f64| {
        let t_plus = (t_start + c * (m + 1.0).powi(-2)).min(t_o);
        gradient_bound_holds(samples, t_start, t_plus, bound)
    };
    if passes(cap) {
        return cap;
    }
    let mut lo = 0.0f64;
    let mut hi = cap;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if passes(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Least-squares slope of log |v| against log t.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub enum FlatnessFit {
    Slope { slope: f64, points: usize },
    NotApplicable,
}

/// Fit the flatness order from (t, |v(., t)|_2) samples near zero. Needs at
/// least five positive samples; an all-zero trajectory is reported as
/// not applicable rather than an error.
pub fn flatness_fit(samples: &[(f64, f64)]) -> Result<FlatnessFit> {
    let usable: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(t, v)| *t > 0.0 && *v > 0.0)
        .cloned()
        .collect();
    if usable.is_empty() {
        if samples.iter().all(|(_, v)| *v == 0.0) {
            return Ok(FlatnessFit::NotApplicable);
        }
        return Err(Error::TooFewSamples {
            got: 0,
            needed: 5,
        });
    }
    if usable.len() < 5 {
        return Err(Error::TooFewSamples {
            got: usable.len(),
            needed: 5,
        });
    }
    let n = usable.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (t, v) in &usable {
        let x = t.ln();
        let y = v.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Ok(FlatnessFit::Slope {
        slope,
        points: usable.len(),
    })
}
