//! Channel synthesis, phase-shift application and achievable rate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, domain, Result};
use crate::geometry::{steering_vector, EffectiveAngles, UraGeometry};
use crate::{CMatrix, CVector, Complex64};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// One propagation path of the BS→IRS channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub gain: Complex64,
    /// Departure angles at the BS.
    pub aod: EffectiveAngles,
    /// Arrival angles at the IRS.
    pub aoa: EffectiveAngles,
}

/// BS→IRS channel `G`, `M × N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelB2I {
    pub matrix: CMatrix,
}

impl ChannelB2I {
    pub fn irs_elements(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn bs_antennas(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Line-of-sight IRS→user channel `g = α b(v_z, v_y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectChannel {
    pub alpha: Complex64,
    pub angles: EffectiveAngles,
    pub vector: CVector,
}

impl ReflectChannel {
    pub fn new(alpha: Complex64, angles: EffectiveAngles, irs_geom: &UraGeometry) -> Self {
        let vector = steering_vector(irs_geom, angles) * alpha;
        Self {
            alpha,
            angles,
            vector,
        }
    }

    pub fn len(&self) -> usize {
        self.vector.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vector.is_empty()
    }
}

/// Unit-modulus IRS reflection coefficients ξ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseShifts {
    xi: CVector,
}

impl PhaseShifts {
    const MODULUS_TOL: f64 = 1e-9;

    pub fn new(xi: CVector) -> Result<Self> {
        if let Some((i, x)) = xi
            .iter()
            .enumerate()
            .find(|(_, x)| (x.norm() - 1.0).abs() > Self::MODULUS_TOL)
        {
            return Err(domain(format!(
                "phase shift {} has modulus {} (must be 1)",
                i + 1,
                x.norm()
            )));
        }
        Ok(Self { xi })
    }

    pub fn ones(m: usize) -> Self {
        Self {
            xi: CVector::from_element(m, Complex64::new(1.0, 0.0)),
        }
    }

    pub fn from_phases(phases: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<Complex64> = phases
            .into_iter()
            .map(|p| Complex64::from_polar(1.0, p))
            .collect();
        Self {
            xi: CVector::from_vec(v),
        }
    }

    /// Projects an arbitrary vector onto the unit-modulus set, `exp(j arg z_i)`.
    /// Zero entries map to `1`.
    pub fn project(z: &CVector) -> Self {
        Self::from_phases(z.iter().map(|x| if x.norm() > 0.0 { x.arg() } else { 0.0 }))
    }

    pub fn as_vector(&self) -> &CVector {
        &self.xi
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

/// `G = Σ_l β_l b(aoa_l) a(aod_l)^T`.
pub fn synthesize_b2i(
    paths: &[PathSpec],
    bs_geom: &UraGeometry,
    irs_geom: &UraGeometry,
) -> Result<ChannelB2I> {
    if paths.is_empty() {
        return Err(domain("BS-IRS channel needs at least one path"));
    }
    let mut matrix = CMatrix::zeros(irs_geom.len(), bs_geom.len());
    for p in paths {
        let b = steering_vector(irs_geom, p.aoa);
        let a = steering_vector(bs_geom, p.aod);
        matrix += (b * a.transpose()) * p.gain;
    }
    Ok(ChannelB2I { matrix })
}

/// Cascaded channel `h^T = g^T diag(ξ) G`, returned as an `N`-vector.
pub fn effective_channel(g: &CVector, xi: &PhaseShifts, b2i: &ChannelB2I) -> Result<CVector> {
    let m = b2i.irs_elements();
    check_len("reflection channel", m, g.len())?;
    check_len("phase shifts", m, xi.len())?;
    let weighted = g.component_mul(xi.as_vector());
    Ok(b2i.matrix.transpose() * weighted)
}

/// `|h^T w|²`.
pub fn received_power(h: &CVector, w: &CVector) -> Result<f64> {
    check_len("beamformer", h.len(), w.len())?;
    Ok(h.iter()
        .zip(w.iter())
        .map(|(a, b)| a * b)
        .sum::<Complex64>()
        .norm_sqr())
}

/// `log2(1 + |h^T w|² / σ0²)` in bits/s/Hz.
pub fn achievable_rate(h: &CVector, w: &CVector, noise_power: f64) -> Result<f64> {
    if !(noise_power > 0.0) {
        return Err(domain(format!(
            "noise power must be positive, got {noise_power}"
        )));
    }
    Ok(rate_from_snr(received_power(h, w)? / noise_power))
}

pub fn rate_from_snr(snr: f64) -> f64 {
    (1.0 + snr.max(0.0)).log2()
}

/// SNR needed for `rate` bits/s/Hz, `2^r − 1`.
pub fn snr_for_rate(rate: f64) -> f64 {
    rate.exp2() - 1.0
}

/// Thermal noise power in watts from a density in dBm/Hz and a bandwidth in Hz.
pub fn noise_power_from_scenario(density_dbm_per_hz: f64, bandwidth_hz: f64) -> Result<f64> {
    if !(bandwidth_hz > 0.0) {
        return Err(domain(format!(
            "bandwidth must be positive, got {bandwidth_hz}"
        )));
    }
    Ok(dbm_to_watts(
        density_dbm_per_hz + 10.0 * bandwidth_hz.log10(),
    ))
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn wavelength_m(carrier_hz: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_hz
}

/// Free-space amplitude gain `λ / (4π d)`.
pub fn free_space_gain(wavelength: f64, distance: f64) -> f64 {
    wavelength / (4.0 * PI * distance)
}

/// Unit-norm maximum-ratio beamformer for `h^T w`: `conj(h) / ‖h‖`.
pub fn matched_filter(h: &CVector) -> Result<CVector> {
    let n = h.norm();
    if !(n > 0.0) {
        return Err(crate::Error::ZeroChannel);
    }
    Ok(h.map(|x| x.conj() / n))
}
