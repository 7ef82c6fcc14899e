//! Time integration of the truncated systems: classical RK4, an
//! integrating-factor RK4 that treats the Stokes term exactly, and an
//! embedded adaptive 5(4) pair.

use super::{GalerkinState, ModeCutoff, Rhs};
use crate::error::{Error, Result};
use crate::field::{norm_h1_semi, norm_l2, SpectralField};

/// Advisory step bound for the explicit schemes against the stiff -A v term.
pub fn cfl_advisory_dt(cutoff: ModeCutoff) -> f64 {
    0.5 / (cutoff.k() as f64).powi(2)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Scheme {
    /// Classical explicit 4th-order Runge-Kutta.
    Rk4,
    /// Lawson integrating-factor RK4: exact e^{-|k|^2 t} for the linear part.
    IntegratingFactorRk4,
    /// Embedded adaptive 5(4) pair with step control.
    AdaptiveRk54,
}

#[derive(Clone, Copy, Debug)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    /// Local error tolerance, used by the adaptive scheme only.
    pub tolerance: f64,
    /// Trajectory output cadence in steps (fixed schemes) or in nominal
    /// output intervals dt * output_every (adaptive).
    pub output_every: usize,
}

impl IntegratorConfig {
    pub fn rk4(dt: f64, t_end: f64, output_every: usize) -> Self {
        IntegratorConfig {
            scheme: Scheme::Rk4,
            dt,
            t_end,
            tolerance: 1e-10,
            output_every: output_every.max(1),
        }
    }
}

/// Trajectory sampled at the output cadence.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub formulation: super::Formulation,
    pub times: Vec<f64>,
    pub states: Vec<SpectralField>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn last(&self) -> (&f64, &SpectralField) {
        (
            self.times.last().expect("trajectory never empty"),
            self.states.last().expect("trajectory never empty"),
        )
    }

    /// State at the output time closest to t.
    pub fn state_at(&self, t: f64) -> (&f64, &SpectralField) {
        let mut best = 0;
        let mut best_gap = f64::INFINITY;
        for (i, &ti) in self.times.iter().enumerate() {
            let gap = (ti - t).abs();
            if gap < best_gap {
                best_gap = gap;
                best = i;
            }
        }
        (&self.times[best], &self.states[best])
    }
}

fn check_finite(t: f64, field: &SpectralField, prev: &SpectralField) -> Result<()> {
    if field.is_finite() {
        Ok(())
    } else {
        Err(Error::BlowUp {
            t,
            last_l2: norm_l2(prev),
            last_h1: norm_h1_semi(prev),
        })
    }
}

/// Per-mode multiplication by exp(-|k|^2 tau).
fn exp_stokes(field: &SpectralField, tau: f64) -> SpectralField {
    let grid = field.grid();
    let mut out = field.clone();
    {
        let coeffs = out.coeffs_mut();
        for (idx, k) in grid.modes() {
            let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            let e = (-k2 * tau).exp();
            for comp in coeffs.iter_mut() {
                comp[idx] *= e;
            }
        }
    }
    out
}

fn rk4_step(rhs: &dyn Rhs, t: f64, v: &SpectralField, h: f64) -> Result<SpectralField> {
    let k1 = rhs.eval(t, v)?;
    let k2 = rhs.eval(t + 0.5 * h, &v.axpy(0.5 * h, &k1)?)?;
    let k3 = rhs.eval(t + 0.5 * h, &v.axpy(0.5 * h, &k2)?)?;
    let k4 = rhs.eval(t + h, &v.axpy(h, &k3)?)?;
    let mut incr = k1;
    incr = incr.axpy(2.0, &k2)?;
    incr = incr.axpy(2.0, &k3)?;
    incr = incr.axpy(1.0, &k4)?;
    v.axpy(h / 6.0, &incr)
}

fn lawson_rk4_step(rhs: &dyn Rhs, t: f64, v: &SpectralField, h: f64) -> Result<SpectralField> {
    let half = 0.5 * h;
    let a = rhs.nonlinear(t, v)?;
    let b = rhs.nonlinear(t + half, &exp_stokes(&v.axpy(half, &a)?, half))?;
    let c = rhs.nonlinear(t + half, &exp_stokes(v, half).axpy(half, &b)?)?;
    let d = rhs.nonlinear(t + h, &exp_stokes(v, h).axpy(h, &exp_stokes(&c, half))?)?;
    let mut out = exp_stokes(v, h);
    out = out.axpy(h / 6.0, &exp_stokes(&a, h))?;
    out = out.axpy(h / 3.0, &exp_stokes(&b.add(&c)?, half))?;
    out = out.axpy(h / 6.0, &d)?;
    Ok(out)
}

/// One explicit step of the configured fixed scheme. Aborts with a blow-up
/// report carrying t and the last valid norms when non-finite values appear.
pub fn step(rhs: &dyn Rhs, state: &GalerkinState, h: f64, scheme: Scheme) -> Result<GalerkinState> {
    if !(h > 0.0) {
        return Err(Error::InvalidStepSize(h));
    }
    let next = match scheme {
        Scheme::Rk4 => rk4_step(rhs, state.t, &state.field, h)?,
        Scheme::IntegratingFactorRk4 => lawson_rk4_step(rhs, state.t, &state.field, h)?,
        Scheme::AdaptiveRk54 => {
            let (v, _err) = dopri_step(rhs, state.t, &state.field, h)?;
            v
        }
    };
    check_finite(state.t + h, &next, &state.field)?;
    Ok(GalerkinState::new(state.t + h, next, state.formulation))
}

/// Dormand-Prince 5(4) step; returns the 5th-order value and the embedded
/// error estimate.
fn dopri_step(
    rhs: &dyn Rhs,
    t: f64,
    v: &SpectralField,
    h: f64,
) -> Result<(SpectralField, f64)> {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let mut k: Vec<SpectralField> = Vec::with_capacity(7);
    k.push(rhs.eval(t, v)?);
    for s in 0..6 {
        let mut stage = v.clone();
        for (j, kj) in k.iter().enumerate() {
            let a = A[s][j];
            if a != 0.0 {
                stage = stage.axpy(h * a, kj)?;
            }
        }
        k.push(rhs.eval(t + C[s] * h, &stage)?);
    }
    let mut y5 = v.clone();
    let mut err = SpectralField::zeros(v.grid());
    for (j, kj) in k.iter().enumerate() {
        if B5[j] != 0.0 {
            y5 = y5.axpy(h * B5[j], kj)?;
        }
        let d = B5[j] - B4[j];
        if d != 0.0 {
            err = err.axpy(h * d, kj)?;
        }
    }
    Ok((y5, norm_l2(&err)))
}

/// Integrate from the initial state to t_end, recording states at the output
/// cadence. Divergence-freeness and cutoff support are preserved exactly by
/// the right-hand sides; non-finite values abort with a blow-up report.
pub fn integrate(
    rhs: &dyn Rhs,
    initial: GalerkinState,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    if !(config.dt > 0.0) {
        return Err(Error::InvalidStepSize(config.dt));
    }
    let mut warnings = Vec::new();
    let advisory = cfl_advisory_dt(rhs.cutoff());
    if config.dt > advisory && config.scheme == Scheme::Rk4 {
        warnings.push(format!(
            "dt = {:.3e} exceeds the stiff-term advisory bound 0.5/K^2 = {:.3e}",
            config.dt, advisory
        ));
    }

    let formulation = initial.formulation;
    let mut times = vec![initial.t];
    let mut states = vec![initial.field.clone()];

    match config.scheme {
        Scheme::Rk4 | Scheme::IntegratingFactorRk4 => {
            let span = config.t_end - initial.t;
            let n_steps = (span / config.dt).round().max(1.0) as usize;
            let n_steps = if (n_steps as f64) * config.dt < span - 1e-12 * span.abs() {
                n_steps + 1
            } else {
                n_steps
            };
            let mut state = initial;
            for i in 0..n_steps {
                let remaining = config.t_end - state.t;
                let h = config.dt.min(remaining);
                if h <= 0.0 {
                    break;
                }
                state = step(rhs, &state, h, config.scheme)?;
                if (i + 1) % config.output_every == 0 || i + 1 == n_steps {
                    times.push(state.t);
                    states.push(state.field.clone());
                }
            }
        }
        Scheme::AdaptiveRk54 => {
            let nominal = config.dt * config.output_every as f64;
            let n_out = ((config.t_end - initial.t) / nominal).round().max(1.0) as usize;
            let out_dt = (config.t_end - initial.t) / n_out as f64;
            let mut state = initial;
            let mut h = config.dt;
            for j in 1..=n_out {
                let target = state.t + out_dt * 1.0;
                let target = if j == n_out { config.t_end } else { target };
                while state.t < target - 1e-14 * target.abs().max(1.0) {
                    let h_try = h.min(target - state.t);
                    let (candidate, err) = dopri_step(rhs, state.t, &state.field, h_try)?;
                    let scale = config.tolerance * norm_l2(&state.field).max(1.0);
                    if err <= scale || h_try <= 1e-12 {
                        check_finite(state.t + h_try, &candidate, &state.field)?;
                        state =
                            GalerkinState::new(state.t + h_try, candidate, state.formulation);
                        let growth = if err > 0.0 {
                            0.9 * (scale / err).powf(0.2)
                        } else {
                            5.0
                        };
                        h = (h_try * growth.clamp(0.2, 5.0)).min(config.t_end - state.t + 1e-30);
                        if h <= 0.0 {
                            h = h_try;
                        }
                    } else {
                        let shrink = 0.9 * (scale / err).powf(0.2);
                        h = h_try * shrink.clamp(0.2, 0.9);
                    }
                }
                times.push(state.t);
                states.push(state.field.clone());
            }
        }
    }

    Ok(Trajectory {
        formulation,
        times,
        states,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compat::ForcingModel;
    use crate::field::{norm_l2, Grid, SpectralField};
    use crate::galerkin::{DirectNsRhs, Formulation, GalerkinState, ModeCutoff};
    use crate::presets;

    fn grid() -> Grid {
        Grid::new(8).unwrap()
    }

    fn shear_decay_rhs() -> DirectNsRhs {
        DirectNsRhs::new(ModeCutoff::new(2), ForcingModel::zero(grid())).unwrap()
    }

    #[test]
    fn zero_state_stays_zero() {
        let rhs = shear_decay_rhs();
        let s0 = GalerkinState::new(0.0, SpectralField::zeros(grid()), Formulation::DirectNs);
        let s1 = step(&rhs, &s0, 0.01, Scheme::Rk4).unwrap();
        assert_eq!(norm_l2(&s1.field), 0.0);
    }

    #[test]
    fn rk4_step_matches_scalar_taylor_polynomial() {
        // shear decays per-mode like e^{-h}; one RK4 step multiplies by the
        // degree-4 Taylor polynomial of e^{-h}.
        let rhs = shear_decay_rhs();
        let u0 = presets::shear(grid());
        let h = 0.01;
        let s1 = step(
            &rhs,
            &GalerkinState::new(0.0, u0.clone(), Formulation::DirectNs),
            h,
            Scheme::Rk4,
        )
        .unwrap();
        let factor = 1.0 - h + h * h / 2.0 - h * h * h / 6.0 + h * h * h * h / 24.0;
        let want = u0.scale(factor);
        let gap = norm_l2(&s1.field.sub(&want).unwrap());
        assert!(gap <= 1e-14 * norm_l2(&u0), "gap {gap}");
    }

    #[test]
    fn integrating_factor_is_exact_on_pure_decay() {
        let rhs = shear_decay_rhs();
        let u0 = presets::shear(grid());
        let h = 0.25; // way above the RK4 accuracy range
        let s1 = step(
            &rhs,
            &GalerkinState::new(0.0, u0.clone(), Formulation::DirectNs),
            h,
            Scheme::IntegratingFactorRk4,
        )
        .unwrap();
        let want = u0.scale((-h).exp());
        let gap = norm_l2(&s1.field.sub(&want).unwrap());
        assert!(gap <= 1e-13 * norm_l2(&u0), "gap {gap}");
    }

    #[test]
    fn shear_integrates_to_exact_decay() {
        let rhs = shear_decay_rhs();
        let u0 = presets::shear(grid());
        let config = IntegratorConfig::rk4(1e-3, 1.0, 100);
        let traj = integrate(
            &rhs,
            GalerkinState::new(0.0, u0.clone(), Formulation::DirectNs),
            &config,
        )
        .unwrap();
        let (t, last) = traj.last();
        assert!((t - 1.0).abs() < 1e-12);
        let want = u0.scale((-1.0f64).exp());
        let gap = norm_l2(&last.sub(&want).unwrap());
        assert!(gap <= 1e-8, "gap {gap}");
        // divergence-free and cutoff support preserved along the way
        for s in &traj.states {
            assert!(s.max_divergence_residual() <= 1e-13);
            for (idx, k) in grid().modes() {
                if !rhs.cutoff().contains(k) {
                    for c in 0..3 {
                        assert_eq!(s.component(c)[idx].norm(), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn adaptive_agrees_with_fixed_step() {
        let g = grid();
        let u0 = presets::taylor_green(g);
        let rhs = DirectNsRhs::new(ModeCutoff::new(2), ForcingModel::zero(g)).unwrap();
        let fixed = integrate(
            &rhs,
            GalerkinState::new(0.0, u0.clone(), Formulation::DirectNs),
            &IntegratorConfig::rk4(1e-3, 0.1, 100),
        )
        .unwrap();
        let adaptive = integrate(
            &rhs,
            GalerkinState::new(0.0, u0.clone(), Formulation::DirectNs),
            &IntegratorConfig {
                scheme: Scheme::AdaptiveRk54,
                dt: 5e-3,
                t_end: 0.1,
                tolerance: 1e-10,
                output_every: 20,
            },
        )
        .unwrap();
        let (_, uf) = fixed.last();
        let (_, ua) = adaptive.last();
        let gap = norm_l2(&uf.sub(ua).unwrap());
        assert!(gap <= 1e-7 * norm_l2(&u0).max(1.0), "gap {gap}");
    }

    #[test]
    fn blow_up_is_reported_with_context() {
        // absurdly large data with an oversized step drives RK4 to overflow
        let g = grid();
        let u0 = presets::taylor_green(g).scale(1e150);
        let rhs = DirectNsRhs::new(ModeCutoff::new(2), ForcingModel::zero(g)).unwrap();
        let config = IntegratorConfig::rk4(10.0, 100.0, 1);
        let err = integrate(
            &rhs,
            GalerkinState::new(0.0, u0, Formulation::DirectNs),
            &config,
        )
        .unwrap_err();
        match err {
            crate::error::Error::BlowUp { t, last_l2, .. } => {
                assert!(t > 0.0);
                assert!(last_l2.is_finite());
            }
            other => panic!("expected blow-up, got {other}"),
        }
    }

    #[test]
    fn cfl_warning_emitted() {
        let rhs = shear_decay_rhs();
        let u0 = presets::shear(grid());
        let config = IntegratorConfig::rk4(1.0, 1.0, 1);
        let traj = integrate(
            &rhs,
            GalerkinState::new(0.0, u0, Formulation::DirectNs),
            &config,
        )
        .unwrap();
        assert!(!traj.warnings.is_empty());
    }
}
