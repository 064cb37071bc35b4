//! The rotating spherical plenum and its pressure field.
//!
//! The universe is a ball of radius `radius` spinning about a fixed polar
//! axis with angular speed `omega = 2 pi / period`. A point rides the
//! rotation at linear speed `omega * rho`, where `rho` is its distance from
//! the *axis*, not from the centre: two points equally far from the centre
//! move at very different speeds when one sits near a pole. Pressure grows
//! with the square of that speed.
//!
//! Distance from the axis also assigns each point a proper region: earth
//! innermost, then water, air and fire in concentric cylindrical bands.
//! Band order and the mobility ranking of the kinds agree: the farther out
//! a kind belongs, the more easily it moves.

use crate::polyhedra::ParticleKind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from field evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    /// The queried point lies outside the spherical universe.
    #[error("point (rho {rho}, z {z}) lies outside the universe of radius {radius}")]
    PointOutsideUniverse { rho: f64, z: f64, radius: f64 },
    /// Rotation parameters must be finite and strictly positive.
    #[error("invalid rotation parameter {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    /// Band thresholds must be strictly increasing inside (0, 1).
    #[error("band thresholds {thresholds:?} are not strictly increasing within (0, 1)")]
    InvalidBands { thresholds: [f64; 3] },
}

/// Geometry and kinematics of the rotating universe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationParams {
    /// Radius of the spherical universe, in model length units.
    pub radius: f64,
    /// Time of one full revolution, in model time units.
    pub period: f64,
    /// Pressure per unit speed squared.
    pub pressure_gain: f64,
}

impl RotationParams {
    pub fn new(radius: f64, period: f64, pressure_gain: f64) -> Result<Self, FieldError> {
        let params = RotationParams { radius, period, pressure_gain };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        for (name, value) in [
            ("radius", self.radius),
            ("period", self.period),
            ("pressure_gain", self.pressure_gain),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(FieldError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// Angular speed; `omega * period` recovers one full turn.
    pub fn omega(&self) -> f64 {
        std::f64::consts::TAU / self.period
    }

    fn check_inside(&self, point: CylindricalPoint) -> Result<(), FieldError> {
        let r2 = point.rho * point.rho + point.z * point.z;
        if point.rho < 0.0 || !r2.is_finite() || r2 > self.radius * self.radius {
            return Err(FieldError::PointOutsideUniverse {
                rho: point.rho,
                z: point.z,
                radius: self.radius,
            });
        }
        Ok(())
    }
}

/// Axisymmetric position: distance from the polar axis and height along it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylindricalPoint {
    pub rho: f64,
    pub z: f64,
}

impl CylindricalPoint {
    pub fn new(rho: f64, z: f64) -> Self {
        CylindricalPoint { rho, z }
    }
}

/// Normalised axis-distance thresholds separating the four proper regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionBands {
    /// Boundaries earth/water, water/air and air/fire as fractions of the
    /// universe radius.
    pub thresholds: [f64; 3],
}

impl Default for RegionBands {
    fn default() -> Self {
        RegionBands { thresholds: [0.25, 0.5, 0.75] }
    }
}

impl RegionBands {
    pub fn new(thresholds: [f64; 3]) -> Result<Self, FieldError> {
        let bands = RegionBands { thresholds };
        bands.validate()?;
        Ok(bands)
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        let [t1, t2, t3] = self.thresholds;
        let ok = t1.is_finite()
            && t2.is_finite()
            && t3.is_finite()
            && 0.0 < t1
            && t1 < t2
            && t2 < t3
            && t3 < 1.0;
        if ok {
            Ok(())
        } else {
            Err(FieldError::InvalidBands { thresholds: self.thresholds })
        }
    }

    /// Proper kind for a normalised axis distance in `[0, 1]`. Boundaries
    /// are half-open upward: exactly `t1` is already water.
    pub fn kind_at(&self, normalized_rho: f64) -> ParticleKind {
        let [t1, t2, t3] = self.thresholds;
        if normalized_rho < t1 {
            ParticleKind::Earth
        } else if normalized_rho < t2 {
            ParticleKind::Water
        } else if normalized_rho < t3 {
            ParticleKind::Air
        } else {
            ParticleKind::Fire
        }
    }

    /// The normalised interval `[start, end)` a kind belongs to (fire's end
    /// is closed at 1).
    pub fn band_of(&self, kind: ParticleKind) -> (f64, f64) {
        let [t1, t2, t3] = self.thresholds;
        match kind {
            ParticleKind::Earth => (0.0, t1),
            ParticleKind::Water => (t1, t2),
            ParticleKind::Air => (t2, t3),
            ParticleKind::Fire => (t3, 1.0),
        }
    }
}

/// Linear speed of the rotation at a point: `omega * rho`. Zero on the
/// axis, independent of `z`, linear in axis distance.
pub fn speed_at(point: CylindricalPoint, params: &RotationParams) -> Result<f64, FieldError> {
    params.check_inside(point)?;
    Ok(params.omega() * point.rho)
}

/// Rotational pressure at a point: `pressure_gain * speed^2`. Quadratic in
/// axis distance and inversely quadratic in the period.
pub fn pressure_at(point: CylindricalPoint, params: &RotationParams) -> Result<f64, FieldError> {
    let speed = speed_at(point, params)?;
    Ok(params.pressure_gain * speed * speed)
}

/// Proper region of a point, by normalised axis distance.
pub fn region_of(
    point: CylindricalPoint,
    params: &RotationParams,
    bands: &RegionBands,
) -> Result<ParticleKind, FieldError> {
    params.check_inside(point)?;
    Ok(bands.kind_at(point.rho / params.radius))
}

/// Ease of movement of a kind, higher is freer: fire 4, air 3, water 2,
/// earth 1. The ranking matches band order from the rim inward.
pub const fn mobility_rank(kind: ParticleKind) -> u8 {
    match kind {
        ParticleKind::Fire => 4,
        ParticleKind::Air => 3,
        ParticleKind::Water => 2,
        ParticleKind::Earth => 1,
    }
}
