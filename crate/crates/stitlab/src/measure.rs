//! Translation-invariant driving measures on hyperplanes.
//!
//! A driving measure assigns to every convex polytope `C` the mass
//! `lambda([C])` of hyperplanes hitting `C` and can sample a hyperplane from
//! the normalized hitting distribution. Hitting masses are homogeneous:
//! `lambda([c C]) = c lambda([C])` for `c > 0`, exactly for the exact
//! variants.
//!
//! Variants:
//! - [`DrivingMeasure::Discrete`]: finitely many normal directions with
//!   positive weights and Lebesgue offsets; masses are exact rationals.
//!   Dimension 2 requires at least two distinct directions, otherwise a
//!   line parallel to all hyperplanes would never be cut.
//! - [`DrivingMeasure::Isotropic`]: rotation-invariant line measure in
//!   dimension 2 with density `rho`; the hitting mass is `rho` times the
//!   perimeter, a float quantity. Sampled directions are rationalized at
//!   double precision so sampled hyperplanes still live in the exact kernel.
//! - [`DrivingMeasure::LebesguePoints`]: dimension 1, point cuts with
//!   Lebesgue intensity; the hitting mass is the length.

use rand_chacha::rand_core::RngCore;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::geometry::{ConvexPolytope, Direction, Hyperplane};
use crate::rng::{dyadic_u01, u01_f64};
use crate::scalar::{from_f64_exact, to_f64, Scalar};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MeasureError {
    #[error("discrete measure needs at least two distinct directions in dimension 2")]
    TooFewDirections,
    #[error("direction weights must be positive")]
    NonPositiveWeight,
    #[error("directions must share one dimension")]
    MixedDimensions,
    #[error("discrete directions are dimension-2 only; use LebesguePoints in dimension 1")]
    WrongDimension,
    #[error("isotropic density must be positive and finite")]
    BadDensity,
}

/// Hitting mass `lambda([C])`: exact where the measure is exact.
#[derive(Debug, Clone, PartialEq)]
pub enum HittingMass {
    Exact(Scalar),
    Float(f64),
}

impl HittingMass {
    pub fn to_f64(&self) -> f64 {
        match self {
            HittingMass::Exact(x) => to_f64(x),
            HittingMass::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Scalar> {
        match self {
            HittingMass::Exact(x) => Some(x),
            HittingMass::Float(_) => None,
        }
    }
}

/// Translation-invariant hyperplane measure; see the module docs.
#[derive(Debug, Clone, PartialEq)]
pub enum DrivingMeasure {
    Discrete { directions: Vec<(Direction, Scalar)> },
    Isotropic { density: f64 },
    LebesguePoints,
}

impl DrivingMeasure {
    /// Weighted normal directions with Lebesgue offsets, dimension 2.
    pub fn discrete(directions: Vec<(Direction, Scalar)>) -> Result<Self, MeasureError> {
        if directions.iter().any(|(d, _)| d.dim() != 2) {
            return Err(MeasureError::WrongDimension);
        }
        if directions.iter().any(|(_, w)| !w.is_positive()) {
            return Err(MeasureError::NonPositiveWeight);
        }
        let mut dirs: Vec<&Direction> = directions.iter().map(|(d, _)| d).collect();
        dirs.sort();
        dirs.dedup();
        if dirs.len() < 2 {
            return Err(MeasureError::TooFewDirections);
        }
        Ok(DrivingMeasure::Discrete { directions })
    }

    /// The two axis directions with unit weights; `lambda([unit square]) = 2`.
    pub fn axis2() -> Self {
        DrivingMeasure::Discrete {
            directions: vec![
                (Direction::from_ints(2, &[1, 0]).unwrap(), Scalar::from_integer(1.into())),
                (Direction::from_ints(2, &[0, 1]).unwrap(), Scalar::from_integer(1.into())),
            ],
        }
    }

    /// Rotation-invariant line measure with density `rho`, dimension 2.
    pub fn isotropic(density: f64) -> Result<Self, MeasureError> {
        if !(density > 0.0) || !density.is_finite() {
            return Err(MeasureError::BadDensity);
        }
        Ok(DrivingMeasure::Isotropic { density })
    }

    /// Lebesgue point cuts, dimension 1.
    pub fn lebesgue_points() -> Self {
        DrivingMeasure::LebesguePoints
    }

    pub fn dim(&self) -> u8 {
        match self {
            DrivingMeasure::Discrete { .. } | DrivingMeasure::Isotropic { .. } => 2,
            DrivingMeasure::LebesguePoints => 1,
        }
    }

    /// Short label for provenance metadata.
    pub fn kind_label(&self) -> String {
        match self {
            DrivingMeasure::Discrete { directions } => {
                let parts: Vec<String> = directions
                    .iter()
                    .map(|(d, w)| format!("{}*{}", crate::scalar::format_scalar(w), d))
                    .collect();
                format!("discrete[{}]", parts.join(" "))
            }
            DrivingMeasure::Isotropic { density } => format!("isotropic[rho={density}]"),
            DrivingMeasure::LebesguePoints => "lebesgue1d".to_string(),
        }
    }

    /// Mass of hyperplanes hitting `C`.
    pub fn lambda_of(&self, c: &ConvexPolytope) -> HittingMass {
        match self {
            DrivingMeasure::Discrete { directions } => {
                let mut acc = Scalar::zero();
                for (d, w) in directions {
                    let (lo, hi) = c.support_interval(d);
                    acc += w * (hi - lo);
                }
                HittingMass::Exact(acc)
            }
            DrivingMeasure::Isotropic { density } => {
                HittingMass::Float(density * c.perimeter_f64())
            }
            DrivingMeasure::LebesguePoints => HittingMass::Exact(c.measure()),
        }
    }

    /// Samples a hyperplane from the hitting distribution on `[C]`.
    ///
    /// The returned hyperplane splits `C` into two parts of positive
    /// measure: offsets landing exactly on the support boundary (a
    /// probability-2^-53 dyadic event) are redrawn, which leaves the
    /// continuous law unchanged.
    pub fn sample_hitting(&self, c: &ConvexPolytope, rng: &mut impl RngCore) -> Hyperplane {
        match self {
            DrivingMeasure::Discrete { directions } => {
                let supports: Vec<(Scalar, Scalar)> =
                    directions.iter().map(|(d, _)| c.support_interval(d)).collect();
                let masses: Vec<Scalar> = directions
                    .iter()
                    .zip(&supports)
                    .map(|((_, w), (lo, hi))| w * (hi - lo))
                    .collect();
                let total: Scalar = masses.iter().sum();
                debug_assert!(total.is_positive());
                let r = dyadic_u01(rng) * &total;
                let mut acc = Scalar::zero();
                let mut idx = masses.len() - 1;
                for (i, m) in masses.iter().enumerate() {
                    acc += m;
                    if r < acc {
                        idx = i;
                        break;
                    }
                }
                let (lo, hi) = &supports[idx];
                let offset = lo + nonzero_dyadic(rng) * (hi - lo);
                Hyperplane::from_direction(directions[idx].0.clone(), offset)
            }
            DrivingMeasure::Isotropic { .. } => {
                let bound = c.diameter_f64();
                loop {
                    let theta = u01_f64(rng) * std::f64::consts::PI;
                    let (ux, uy) = (theta.cos(), theta.sin());
                    let (lo, hi) = c.support_f64(&[ux, uy]);
                    if u01_f64(rng) * bound >= hi - lo {
                        continue;
                    }
                    // Rationalize the unit normal; every finite f64 is an
                    // exact dyadic, so the hyperplane stays exact.
                    let n = [from_f64_exact(ux).unwrap(), from_f64_exact(uy).unwrap()];
                    let Ok(dir) = Direction::new(2, &n) else {
                        continue;
                    };
                    let (lo, hi) = c.support_interval(&dir);
                    let offset = &lo + nonzero_dyadic(rng) * (&hi - &lo);
                    return Hyperplane::from_direction(dir, offset);
                }
            }
            DrivingMeasure::LebesguePoints => {
                let lo = &c.vertices()[0][0];
                let hi = &c.vertices()[1][0];
                let offset = lo + nonzero_dyadic(rng) * (hi - lo);
                Hyperplane::from_direction(Direction::from_ints(1, &[1]).unwrap(), offset)
            }
        }
    }
}

fn nonzero_dyadic(rng: &mut impl RngCore) -> Scalar {
    loop {
        let u = dyadic_u01(rng);
        if !u.is_zero() {
            return u;
        }
    }
}
