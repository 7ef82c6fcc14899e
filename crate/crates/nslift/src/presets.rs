//! Canonical initial data and forcings used by the CLI and the test
//! batteries.

use crate::compat::{FieldJet, ForcingModel};
use crate::error::Result;
use crate::field::{dealias, project_leray, zero_mean, Grid, SpectralField};
use num_complex::Complex64;
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

/// Named scenario: initial velocity plus forcing jet.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Preset {
    Zero,
    Shear,
    TaylorGreen,
    RandomSmooth { seed: u64 },
    ForcedShear,
}

impl Preset {
    /// Catalog in deterministic order, with one-line descriptions.
    pub fn catalog() -> Vec<(String, &'static str)> {
        vec![
            ("zero".into(), "u0 = 0, f = 0"),
            ("shear".into(), "u0 = (sin x2, 0, 0), f = 0; exact solution e^{-t} u0"),
            (
                "taylor-green".into(),
                "u0 = (sin x1 cos x2, -cos x1 sin x2, 0), f = 0",
            ),
            (
                "random-smooth(seed)".into(),
                "seeded random divergence-free field, Gaussian spectral decay",
            ),
            (
                "forced-shear".into(),
                "u0 = (sin x2, 0, 0), f = (1 - t) (sin x3, 0, 0) / 2",
            ),
        ]
    }

    pub fn parse(s: &str) -> Option<Preset> {
        match s {
            "zero" => Some(Preset::Zero),
            "shear" => Some(Preset::Shear),
            "taylor-green" => Some(Preset::TaylorGreen),
            "forced-shear" => Some(Preset::ForcedShear),
            _ => {
                let inner = s.strip_prefix("random-smooth(")?.strip_suffix(')')?;
                inner.parse().ok().map(|seed| Preset::RandomSmooth { seed })
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Preset::Zero => "zero".into(),
            Preset::Shear => "shear".into(),
            Preset::TaylorGreen => "taylor-green".into(),
            Preset::RandomSmooth { seed } => format!("random-smooth({seed})"),
            Preset::ForcedShear => "forced-shear".into(),
        }
    }

    pub fn initial_velocity(&self, grid: Grid) -> Result<SpectralField> {
        match self {
            Preset::Zero => Ok(SpectralField::zeros(grid)),
            Preset::Shear | Preset::ForcedShear => Ok(shear(grid)),
            Preset::TaylorGreen => Ok(taylor_green(grid)),
            Preset::RandomSmooth { seed } => Ok(random_smooth(grid, *seed)),
        }
    }

    pub fn forcing(&self, grid: Grid) -> Result<ForcingModel> {
        match self {
            Preset::ForcedShear => {
                // f(x, t) = (1 - t) (sin x3, 0, 0) / 2, supplied as a degree-1 jet
                let base = SpectralField::from_modes(
                    grid,
                    &[(
                        [0, 0, 1],
                        [Complex64::new(0.0, -0.25), Complex64::ZERO, Complex64::ZERO],
                    )],
                );
                let jet = FieldJet::new(vec![base.clone(), base.scale(-1.0)])?;
                Ok(ForcingModel::from_jet(jet))
            }
            _ => Ok(ForcingModel::zero(grid)),
        }
    }
}

/// u0 = (sin x2, 0, 0).
pub fn shear(grid: Grid) -> SpectralField {
    SpectralField::from_modes(
        grid,
        &[(
            [0, 1, 0],
            [Complex64::new(0.0, -0.5), Complex64::ZERO, Complex64::ZERO],
        )],
    )
}

/// Taylor-Green vortex (sin x1 cos x2, -cos x1 sin x2, 0).
pub fn taylor_green(grid: Grid) -> SpectralField {
    let q = Complex64::new(0.0, -0.25);
    SpectralField::from_modes(
        grid,
        &[
            ([1, 1, 0], [q, -q, Complex64::ZERO]),
            ([1, -1, 0], [q, q, Complex64::ZERO]),
        ],
    )
}

fn uniform(rng: &mut ChaCha12Rng) -> f64 {
    // 53-bit uniform in [0, 1)
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn gaussian(rng: &mut ChaCha12Rng) -> f64 {
    // Box-Muller on the portable ChaCha stream
    let u1 = uniform(rng).max(1e-300);
    let u2 = uniform(rng);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Seeded random smooth field: modes with |k|_inf <= 2 drawn from a Gaussian,
/// weighted by exp(-1.5 |k|^2), then projected divergence-free, dealiased,
/// and scaled to |u|_2 = 1. Zero mean by construction. The sharp decay keeps
/// high-order jet growth well inside double-precision headroom.
pub fn random_smooth(grid: Grid, seed: u64) -> SpectralField {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut modes = Vec::new();
    for kx in -2..=2i64 {
        for ky in -2..=2i64 {
            for kz in -2..=2i64 {
                let k2 = (kx * kx + ky * ky + kz * kz) as f64;
                if k2 == 0.0 {
                    continue;
                }
                let w = (-1.5 * k2).exp();
                let v = [
                    Complex64::new(gaussian(&mut rng), gaussian(&mut rng)) * w,
                    Complex64::new(gaussian(&mut rng), gaussian(&mut rng)) * w,
                    Complex64::new(gaussian(&mut rng), gaussian(&mut rng)) * w,
                ];
                modes.push(([kx, ky, kz], v));
            }
        }
    }
    let f = SpectralField::from_modes(grid, &modes);
    let f = dealias(&project_leray(&zero_mean(&f)));
    let n = crate::field::norm_l2(&f);
    if n > 0.0 {
        f.scale(1.0 / n)
    } else {
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{divergence, norm_l2};

    #[test]
    fn catalog_contains_taylor_green_in_fixed_order() {
        let names: Vec<String> = Preset::catalog().into_iter().map(|(n, _)| n).collect();
        assert!(names.contains(&"taylor-green".to_string()));
        assert_eq!(names, {
            let again: Vec<String> = Preset::catalog().into_iter().map(|(n, _)| n).collect();
            again
        });
    }

    #[test]
    fn parse_round_trips() {
        for p in [
            Preset::Zero,
            Preset::Shear,
            Preset::TaylorGreen,
            Preset::RandomSmooth { seed: 17 },
            Preset::ForcedShear,
        ] {
            assert_eq!(Preset::parse(&p.name()), Some(p));
        }
        assert_eq!(Preset::parse("nope"), None);
    }

    #[test]
    fn random_smooth_is_deterministic_and_divergence_free() {
        let grid = Grid::new(16).unwrap();
        let a = random_smooth(grid, 1);
        let b = random_smooth(grid, 1);
        for c in 0..3 {
            assert_eq!(a.component(c), b.component(c));
        }
        let c = random_smooth(grid, 2);
        assert!(norm_l2(&a.sub(&c).unwrap()) > 1e-3);
        assert!(divergence(&a).norm_l2() <= 1e-13 * norm_l2(&a));
        assert!((norm_l2(&a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn forced_shear_jet_degree_one() {
        let grid = Grid::new(8).unwrap();
        let f = Preset::ForcedShear.forcing(grid).unwrap();
        assert_eq!(f.degree(), 1);
        let at_zero = f.eval(0.0);
        let at_one = f.eval(1.0);
        assert!(norm_l2(&at_one) < 1e-14);
        assert!(norm_l2(&at_zero) > 0.0);
    }
}
