//! Location-based estimation of the reflection channel and the
//! multiplicative phase-error model induced by a user position error.
//!
//! With the estimated user position `p̂` and the true position `p̂ + Δ`, the
//! reflection channel factors as `g ≈ ĝ ⊙ e(Δ)` with `[e]_i = exp(jπ f_iᵀΔ)`,
//! where `f_i` is the first-order sensitivity of element `i`'s phase to the
//! user position.

use serde::{Deserialize, Serialize};

use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::ReflectChannel;
use crate::error::{domain, Result};
use crate::geometry::{EffectiveAngles, UraGeometry};
use crate::{CVector, Complex64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3D {
    pub const ORIGIN: Self = Self {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_vector(v: Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self.to_vector() - other.to_vector()).norm()
    }

    pub fn offset(self, delta: &LocationError) -> Self {
        Self::from_vector(self.to_vector() + delta.delta)
    }
}

/// User position error `Δ = p − p̂` in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LocationError {
    pub delta: Vector3<f64>,
}

impl LocationError {
    pub fn new(dx: f64, dy: f64, dz: f64) -> Self {
        Self {
            delta: Vector3::new(dx, dy, dz),
        }
    }

    pub fn norm(&self) -> f64 {
        self.delta.norm()
    }
}

/// Closed ball `‖Δ‖ ≤ Υ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyBall {
    pub radius: f64,
}

impl UncertaintyBall {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(domain(format!(
                "uncertainty radius must be >= 0, got {radius}"
            )));
        }
        Ok(Self { radius })
    }

    pub fn contains(&self, delta: &LocationError) -> bool {
        delta.norm() <= self.radius * (1.0 + 1e-12)
    }
}

/// Per-element phase sensitivities `f_i` around the estimated position.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSensitivity {
    /// Row `i` is `f_i = [a, b, c]` (x, y, z components) in rad/π per meter.
    pub f: Vec<Vector3<f64>>,
    /// Estimated IRS–user distance.
    pub d_hat: f64,
    /// Estimated direction cosines `(ϑ̂_x, ϑ̂_y, ϑ̂_z)`.
    pub v_hat: Vector3<f64>,
}

impl ErrorSensitivity {
    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }
}

fn direction_cosines(irs: Position3D, user: Position3D) -> Result<(Vector3<f64>, f64)> {
    let diff = irs.to_vector() - user.to_vector();
    let d = diff.norm();
    if !(d > 0.0) {
        return Err(domain("IRS and user positions coincide"));
    }
    Ok((diff / d, d))
}

/// Effective departure angles from the IRS toward `user`, plus the distance.
pub fn effective_aods_from_positions(
    irs: Position3D,
    user: Position3D,
) -> Result<(EffectiveAngles, f64)> {
    let (v, d) = direction_cosines(irs, user)?;
    Ok((EffectiveAngles::new(v.z, v.y), d))
}

/// `ĝ = α b(ϑ̂_z, ϑ̂_y)` from the estimated user position.
pub fn estimated_reflect_channel(
    irs: Position3D,
    user_est: Position3D,
    alpha: Complex64,
    irs_geom: &UraGeometry,
) -> Result<ReflectChannel> {
    let (angles, _) = effective_aods_from_positions(irs, user_est)?;
    Ok(ReflectChannel::new(alpha, angles, irs_geom))
}

/// Phase sensitivities `f_i` of every IRS element around `user_est`.
pub fn error_sensitivity(
    irs: Position3D,
    user_est: Position3D,
    irs_geom: &UraGeometry,
) -> Result<ErrorSensitivity> {
    let (v, d) = direction_cosines(irs, user_est)?;
    // Gradients of ϑ_z and ϑ_y with respect to the user position.
    let grad_z = Vector3::new(v.z * v.x, v.z * v.y, v.z * v.z - 1.0) / d;
    let grad_y = Vector3::new(v.y * v.x, v.y * v.y - 1.0, v.y * v.z) / d;
    let scale = irs_geom.phase_scale();
    let f = irs_geom
        .offsets()
        .map(|(row, col)| (grad_z * row + grad_y * col) * scale)
        .collect();
    Ok(ErrorSensitivity {
        f,
        d_hat: d,
        v_hat: v,
    })
}

/// `[e]_i = exp(jπ f_iᵀΔ)`.
pub fn error_vector(sens: &ErrorSensitivity, delta: &LocationError) -> CVector {
    CVector::from_iterator(
        sens.len(),
        sens.f
            .iter()
            .map(|fi| Complex64::from_polar(1.0, std::f64::consts::PI * fi.dot(&delta.delta))),
    )
}

/// Draws `Δ` uniformly from the ball.
pub fn sample_error<R: Rng + ?Sized>(ball: &UncertaintyBall, rng: &mut R) -> LocationError {
    if ball.radius == 0.0 {
        return LocationError::default();
    }
    let dir = loop {
        let v = Vector3::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        let n: f64 = v.norm();
        if n > 1e-12 {
            break v / n;
        }
    };
    let r = ball.radius * rng.random::<f64>().cbrt();
    LocationError { delta: dir * r }
}

/// Seeded sampler for location errors. Not shared across threads; derive one
/// per worker with [`ErrorSampler::with_stream`].
#[derive(Debug, Clone)]
pub struct ErrorSampler {
    ball: UncertaintyBall,
    rng: ChaCha8Rng,
}

impl ErrorSampler {
    pub fn new(ball: UncertaintyBall, seed: u64) -> Self {
        Self::with_stream(ball, seed, 0)
    }

    pub fn with_stream(ball: UncertaintyBall, seed: u64, stream: u64) -> Self {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { ball, rng }
    }

    pub fn sample(&mut self) -> LocationError {
        sample_error(&self.ball, &mut self.rng)
    }
}
