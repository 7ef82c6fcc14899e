//! Error type shared across the solver library.

use thiserror::Error;

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("grid points per axis must be even and >= 4, got {0}")]
    InvalidGridSize(usize),

    #[error("dealias fraction must be a rational in (0, 1], got {num}/{den}")]
    InvalidDealiasFraction { num: u32, den: u32 },

    #[error("fields live on different grids ({0} vs {1} points per axis)")]
    GridMismatch(usize, usize),

    #[error("physical sample count {got} does not match grid ({want} expected)")]
    SampleSizeMismatch { got: usize, want: usize },

    #[error("field is not divergence-free: relative residual {residual:.3e} exceeds {tolerance:.1e}")]
    NotDivergenceFree { residual: f64, tolerance: f64 },

    #[error("Lq norm requires q in [2, 6], got {0}")]
    InvalidLqExponent(f64),

    #[error("jet holds {len} entries, operation needs at least {needed}")]
    JetTooShort { len: usize, needed: usize },

    #[error("requested derivative order {order} exceeds available lift derivatives (degree {degree})")]
    OrderExceedsLift { order: usize, degree: usize },

    #[error(
        "shifted jet entry {index} does not vanish: |entry| = {norm:.3e} vs tolerance {tolerance:.3e}"
    )]
    JetVanishingViolated { index: usize, norm: f64, tolerance: f64 },

    #[error("Taylor coefficient order {order} exceeds supported maximum {max} for this model")]
    TaylorOrderTooHigh { order: usize, max: usize },

    #[error("solution blew up at t = {t:.6e} (last |v|_2 = {last_l2:.6e}, last |grad v|_2 = {last_h1:.6e})")]
    BlowUp { t: f64, last_l2: f64, last_h1: f64 },

    #[error("non-finite value in diagnostics at t = {t:.6e}")]
    NonFiniteDiagnostics { t: f64 },

    #[error("trajectory has {got} samples, need at least {needed}")]
    TooFewSamples { got: usize, needed: usize },

    #[error("constant fit needs at least {needed} corpus fields, got {got}")]
    CorpusTooSmall { got: usize, needed: usize },

    #[error("finite-difference stencil supports derivative orders 1..=4, got {0}")]
    UnsupportedFdOrder(usize),

    #[error("integrator step size must be positive, got {0}")]
    InvalidStepSize(f64),

    #[error("parameter {name} out of range: {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("cutoff K = {k} is not resolved by the grid (max resolved K = {max})")]
    CutoffUnresolved { k: u32, max: u32 },

    #[error("file format error in {path}: {detail}")]
    FileFormat { path: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
