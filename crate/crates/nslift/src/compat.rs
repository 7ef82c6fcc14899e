//! Initial-data jets, the polynomial lift, and the shifted-unknown
//! recurrences, together with the vanishing checks that certify them.
//!
//! Conventions: a [`FieldJet`] stores plain time derivatives at t = 0 (entry
//! i is the i-th derivative, not divided by i!). The lift built from a jet of
//! length i* + 2 is the degree-(i* + 1) Taylor polynomial of the velocity in
//! time, so the shifted unknown v = u - beta starts flat to order i* + 1.

use crate::error::{Error, Result};
use crate::field::{
    self, convect, laplacian, norm_l2, project_leray, Grid, SpectralField,
};
use crate::galerkin::ModeCutoff;

/// Relative tolerance for the vanishing of shifted jets.
pub const JET_VANISH_TOL: f64 = 1e-10;

/// Ordered time derivatives of a field at t = 0; entry i holds the i-th
/// derivative.
#[derive(Clone, Debug)]
pub struct FieldJet {
    entries: Vec<SpectralField>,
}

impl FieldJet {
    pub fn new(entries: Vec<SpectralField>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::JetTooShort { len: 0, needed: 1 });
        }
        let grid = entries[0].grid();
        for e in &entries {
            if e.grid() != grid {
                return Err(Error::GridMismatch(
                    grid.points_per_axis(),
                    e.grid().points_per_axis(),
                ));
            }
        }
        Ok(FieldJet { entries })
    }

    pub fn zeros(grid: Grid, len: usize) -> Self {
        FieldJet {
            entries: (0..len.max(1)).map(|_| SpectralField::zeros(grid)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn grid(&self) -> Grid {
        self.entries[0].grid()
    }

    pub fn entry(&self, i: usize) -> &SpectralField {
        &self.entries[i]
    }

    pub fn entries(&self) -> &[SpectralField] {
        &self.entries
    }

    /// Derivative of order i, treating absent entries as zero.
    pub fn derivative_or_zero(&self, i: usize) -> SpectralField {
        if i < self.entries.len() {
            self.entries[i].clone()
        } else {
            SpectralField::zeros(self.grid())
        }
    }

    pub fn norms(&self) -> Vec<f64> {
        self.entries.iter().map(norm_l2).collect()
    }
}

/// The lift beta(x, t) = sum_k jet[k] t^k / k!, a polynomial in time of
/// degree jet.len() - 1 with spectral-field coefficients.
#[derive(Clone, Debug)]
pub struct LiftPolynomial {
    jet: FieldJet,
}

impl LiftPolynomial {
    pub fn degree(&self) -> usize {
        self.jet.len() - 1
    }

    pub fn grid(&self) -> Grid {
        self.jet.grid()
    }

    pub fn jet(&self) -> &FieldJet {
        &self.jet
    }

    /// i* such that degree = i* + 1.
    pub fn i_star(&self) -> usize {
        self.degree() - 1
    }

    pub fn eval(&self, t: f64) -> SpectralField {
        self.dt_eval(t, 0)
    }

    /// Exact evaluation of the order-th time derivative at t (Horner form).
    /// Orders above the degree give the zero field.
    pub fn dt_eval(&self, t: f64, order: usize) -> SpectralField {
        let deg = self.degree();
        if order > deg {
            return SpectralField::zeros(self.grid());
        }
        if t == 0.0 {
            return self.jet.entry(order).clone();
        }
        // d^m/dt^m sum_k e_k t^k/k! = sum_{j>=0} e_{j+m} t^j / j!
        let mut acc = self.jet.entry(deg).clone();
        let mut j = deg - order;
        while j > 0 {
            j -= 1;
            let div = (j + 1) as f64;
            acc = self
                .jet
                .entry(j + order)
                .axpy(t / div, &acc)
                .expect("lift entries share a grid");
        }
        acc
    }

    /// Taylor coefficient of order k (derivative divided by k!), zero above
    /// the degree. Used by the oracle and the assembled right-hand sides.
    pub fn taylor_coefficient(&self, k: usize) -> SpectralField {
        if k > self.degree() {
            return SpectralField::zeros(self.grid());
        }
        self.jet.entry(k).scale(1.0 / factorial(k))
    }
}

/// Smooth forcing ingested as a Taylor jet in time: f(., t) = sum_i entry[i]
/// t^i / i!. Derivatives above the jet degree are exactly zero.
#[derive(Clone, Debug)]
pub struct ForcingModel {
    jet: FieldJet,
}

impl ForcingModel {
    pub fn zero(grid: Grid) -> Self {
        ForcingModel {
            jet: FieldJet::zeros(grid, 1),
        }
    }

    pub fn from_jet(jet: FieldJet) -> Self {
        ForcingModel { jet }
    }

    pub fn grid(&self) -> Grid {
        self.jet.grid()
    }

    pub fn degree(&self) -> usize {
        self.jet.len() - 1
    }

    pub fn jet(&self) -> &FieldJet {
        &self.jet
    }

    pub fn eval(&self, t: f64) -> SpectralField {
        let deg = self.degree();
        let mut acc = self.jet.entry(deg).clone();
        let mut j = deg;
        while j > 0 {
            j -= 1;
            acc = self
                .jet
                .entry(j)
                .axpy(t / (j + 1) as f64, &acc)
                .expect("forcing entries share a grid");
        }
        acc
    }

    /// Exact i-th time derivative at t = 0.
    pub fn derivative_at_zero(&self, i: usize) -> SpectralField {
        self.jet.derivative_or_zero(i)
    }

    pub fn taylor_coefficient(&self, k: usize) -> SpectralField {
        self.jet.derivative_or_zero(k).scale(1.0 / factorial(k))
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

pub(crate) fn binomial(i: usize, r: usize) -> f64 {
    // exact in f64 for every order this crate uses
    let mut acc = 1.0;
    for j in 0..r.min(i - r) {
        acc = acc * (i - j) as f64 / (j + 1) as f64;
    }
    acc.round()
}

/// How the recurrences project: full Leray, or Leray followed by a spherical
/// spectral cutoff (the truncated Galerkin analogue).
#[derive(Clone, Copy, Debug)]
pub(crate) enum Projector {
    Leray,
    Truncated(ModeCutoff),
}

impl Projector {
    fn apply(&self, f: &SpectralField) -> SpectralField {
        match self {
            Projector::Leray => project_leray(f),
            Projector::Truncated(cutoff) => cutoff.apply(&project_leray(f)),
        }
    }
}

fn jet_u_with(
    u0: &SpectralField,
    forcing: &ForcingModel,
    order: usize,
    projector: Projector,
) -> Result<FieldJet> {
    let residual = u0.max_divergence_residual();
    if residual > field::EPS_DIV {
        return Err(Error::NotDivergenceFree {
            residual,
            tolerance: field::EPS_DIV,
        });
    }
    let mut entries = Vec::with_capacity(order + 1);
    entries.push(match projector {
        Projector::Leray => u0.clone(),
        Projector::Truncated(cutoff) => cutoff.apply(u0),
    });
    for i in 0..order {
        let mut rhs = laplacian(&entries[i]);
        for r in 0..=i {
            let conv = convect(&entries[r], &entries[i - r])?;
            rhs = rhs.axpy(-binomial(i, r), &conv)?;
        }
        rhs = rhs.add(&forcing.derivative_at_zero(i))?;
        entries.push(projector.apply(&rhs));
    }
    FieldJet::new(entries)
}

/// Jet of the velocity at t = 0, forced by differentiating the projected
/// equation: entry i+1 = P(Lap entry_i - sum_r C(i,r) entry_r . grad
/// entry_{i-r} + d_t^i f(., 0)).
pub fn compat_jet_u(u0: &SpectralField, forcing: &ForcingModel, order: usize) -> Result<FieldJet> {
    jet_u_with(u0, forcing, order, Projector::Leray)
}

/// Same recurrence with the projection replaced by its spectral truncation;
/// this is the jet consistent with the cutoff Galerkin dynamics.
pub fn compat_jet_u_galerkin(
    u0: &SpectralField,
    forcing: &ForcingModel,
    order: usize,
    cutoff: ModeCutoff,
) -> Result<FieldJet> {
    jet_u_with(u0, forcing, order, Projector::Truncated(cutoff))
}

/// Assemble the lift from a velocity jet; requires jet length >= i* + 2 and
/// keeps exactly the first i* + 2 derivatives.
pub fn build_lift(jet: &FieldJet, i_star: usize) -> Result<LiftPolynomial> {
    let needed = i_star + 2;
    if jet.len() < needed {
        return Err(Error::JetTooShort {
            len: jet.len(),
            needed,
        });
    }
    let entries = jet.entries()[..needed].to_vec();
    Ok(LiftPolynomial {
        jet: FieldJet::new(entries)?,
    })
}

/// Evaluate the lift at time t.
pub fn lift_eval(beta: &LiftPolynomial, t: f64) -> SpectralField {
    beta.eval(t)
}

/// Evaluate the order-th time derivative of the lift at time t.
pub fn lift_dt_eval(beta: &LiftPolynomial, t: f64, order: usize) -> SpectralField {
    beta.dt_eval(t, order)
}

/// Residual forcing theta(., t) = -d_t beta + Lap beta - (beta . grad) beta
/// + f. Not divergence-free in general; not projected here.
pub fn theta_eval(beta: &LiftPolynomial, forcing: &ForcingModel, t: f64) -> Result<SpectralField> {
    let b = beta.eval(t);
    let mut out = beta.dt_eval(t, 1).scale(-1.0);
    out = out.add(&laplacian(&b))?;
    out = out.sub(&convect(&b, &b)?)?;
    out.add(&forcing.eval(t))
}

pub(crate) fn theta_jet_unchecked(
    beta: &LiftPolynomial,
    forcing: &ForcingModel,
    order: usize,
) -> Result<FieldJet> {
    let jet = beta.jet();
    let mut entries = Vec::with_capacity(order + 1);
    for i in 0..=order {
        let mut e = jet.derivative_or_zero(i + 1).scale(-1.0);
        e = e.add(&laplacian(&jet.derivative_or_zero(i)))?;
        for r in 0..=i {
            if r < jet.len() && i - r < jet.len() {
                let conv = convect(jet.entry(r), jet.entry(i - r))?;
                e = e.axpy(-binomial(i, r), &conv)?;
            }
        }
        e = e.add(&forcing.derivative_at_zero(i))?;
        entries.push(e);
    }
    FieldJet::new(entries)
}

/// Time derivatives of theta at t = 0 through the requested order, by the
/// Leibniz expansion over the lift jet. The order may not exceed the lift
/// degree.
pub fn theta_jet(beta: &LiftPolynomial, forcing: &ForcingModel, order: usize) -> Result<FieldJet> {
    if order > beta.degree() {
        return Err(Error::OrderExceedsLift {
            order,
            degree: beta.degree(),
        });
    }
    theta_jet_unchecked(beta, forcing, order)
}

/// Report attached to a shifted jet: per-entry norms and the scale used for
/// the vanishing test.
#[derive(Clone, Debug)]
pub struct VanishReport {
    pub entry_norms: Vec<f64>,
    pub scale: f64,
    pub tolerance: f64,
    pub checked_through: usize,
}

impl VanishReport {
    pub fn max_checked_norm(&self) -> f64 {
        self.entry_norms[..=self.checked_through]
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }
}

fn jet_v_with(
    beta: &LiftPolynomial,
    theta: &FieldJet,
    order: usize,
    projector: Projector,
) -> Result<(FieldJet, VanishReport)> {
    let grid = beta.grid();
    let beta_jet = beta.jet();
    let mut entries: Vec<SpectralField> = Vec::with_capacity(order + 1);
    entries.push(SpectralField::zeros(grid));
    for i in 0..order {
        if i >= theta.len() {
            return Err(Error::JetTooShort {
                len: theta.len(),
                needed: i + 1,
            });
        }
        let mut rhs = laplacian(&entries[i]);
        rhs = rhs.add(theta.entry(i))?;
        for r in 0..=i {
            let c = binomial(i, r);
            let vv = convect(&entries[r], &entries[i - r])?;
            rhs = rhs.axpy(-c, &vv)?;
            let bv = convect(&beta_jet.derivative_or_zero(r), &entries[i - r])?;
            rhs = rhs.axpy(-c, &bv)?;
            let vb = convect(&entries[r], &beta_jet.derivative_or_zero(i - r))?;
            rhs = rhs.axpy(-c, &vb)?;
        }
        entries.push(projector.apply(&rhs));
    }

    let scale = norm_l2(beta_jet.entry(0));
    let tolerance = if scale > 0.0 {
        JET_VANISH_TOL * scale
    } else {
        JET_VANISH_TOL
    };
    let entry_norms: Vec<f64> = entries.iter().map(norm_l2).collect();
    let checked_through = order.min(beta.i_star() + 1);
    for (i, &norm) in entry_norms.iter().enumerate().take(checked_through + 1) {
        if norm > tolerance {
            return Err(Error::JetVanishingViolated {
                index: i,
                norm,
                tolerance,
            });
        }
    }
    let report = VanishReport {
        entry_norms,
        scale,
        tolerance,
        checked_through,
    };
    Ok((FieldJet::new(entries)?, report))
}

/// Jet of the shifted unknown v = u - beta at t = 0, via the projected
/// recurrence. Entries 0 ..= i* + 1 are verified to vanish relative to the
/// data scale; a violation is reported as an error carrying the offending
/// index and norm.
pub fn compat_jet_v(
    beta: &LiftPolynomial,
    theta: &FieldJet,
    order: usize,
) -> Result<(FieldJet, VanishReport)> {
    jet_v_with(beta, theta, order, Projector::Leray)
}

/// Shifted jet for the truncated Galerkin system: identical contract with
/// the projection replaced by Leray-plus-spectral-cutoff.
pub fn compat_jet_v_galerkin(
    beta: &LiftPolynomial,
    theta: &FieldJet,
    order: usize,
    cutoff: ModeCutoff,
) -> Result<(FieldJet, VanishReport)> {
    jet_v_with(beta, theta, order, Projector::Truncated(cutoff))
}
