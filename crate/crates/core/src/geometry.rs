//! Uniform rectangular array layout and array response vectors.
//!
//! Element indices are 1-based throughout this module: element `i` sits in
//! row `i_m` (along z) and column `i_n` (along y), with rows running fastest.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::{CVector, Complex64};

/// Element spacing, in wavelengths, that the angle formulas assume.
pub const HALF_WAVELENGTH: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UraGeometry {
    pub n_z: usize,
    pub n_y: usize,
    /// Element spacing in carrier wavelengths.
    pub spacing: f64,
}

impl UraGeometry {
    pub fn new(n_z: usize, n_y: usize, spacing: f64) -> Result<Self> {
        if n_z == 0 || n_y == 0 {
            return Err(domain(format!(
                "array dimensions must be positive, got {n_z}x{n_y}"
            )));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(domain(format!(
                "element spacing must be positive, got {spacing}"
            )));
        }
        Ok(Self { n_z, n_y, spacing })
    }

    /// Half-wavelength spaced array.
    pub fn half_wavelength(n_z: usize, n_y: usize) -> Result<Self> {
        Self::new(n_z, n_y, HALF_WAVELENGTH)
    }

    /// Square half-wavelength array with `elements` entries.
    pub fn square(elements: usize) -> Result<Self> {
        let side = (elements as f64).sqrt().round() as usize;
        if side * side != elements {
            return Err(domain(format!(
                "{elements} elements do not form a square array"
            )));
        }
        Self::half_wavelength(side, side)
    }

    pub fn len(&self) -> usize {
        self.n_z * self.n_y
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(i_m, i_n)` of the 1-based flat index `i`, range-checked against the array.
    pub fn grid(&self, i: usize) -> Result<(usize, usize)> {
        if i > self.len() {
            return Err(domain(format!(
                "element index {i} outside 1..={}",
                self.len()
            )));
        }
        flat_to_grid(i, self.n_z)
    }

    /// Phase scale relative to half-wavelength spacing.
    pub(crate) fn phase_scale(&self) -> f64 {
        self.spacing / HALF_WAVELENGTH
    }

    /// Zero-based row/column offsets `(i_m - 1, i_n - 1)` of every element in flat order.
    pub(crate) fn offsets(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.len()).map(move |k| ((k % self.n_z) as f64, (k / self.n_z) as f64))
    }
}

/// Effective angles: per-element phase progression along z and y, divided by π.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EffectiveAngles {
    pub v_z: f64,
    pub v_y: f64,
}

impl EffectiveAngles {
    pub fn new(v_z: f64, v_y: f64) -> Self {
        Self { v_z, v_y }
    }
}

impl std::ops::Neg for EffectiveAngles {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.v_z, -self.v_y)
    }
}

/// Maps a 1-based flat index onto the 1-based `(i_m, i_n)` grid position.
pub fn flat_to_grid(i: usize, n_z: usize) -> Result<(usize, usize)> {
    if n_z == 0 {
        return Err(domain("n_z must be positive"));
    }
    if i == 0 {
        return Err(domain("element indices are 1-based"));
    }
    let i_n = i.div_ceil(n_z);
    let i_m = i - (i_n - 1) * n_z;
    Ok((i_m, i_n))
}

/// Inverse of [`flat_to_grid`].
pub fn grid_to_flat(i_m: usize, i_n: usize, n_z: usize) -> usize {
    (i_n - 1) * n_z + i_m
}

/// Array response `exp(jπ s [(i_m−1) v_z + (i_n−1) v_y])`, `s = spacing / 0.5`.
pub fn steering_vector(geom: &UraGeometry, angles: EffectiveAngles) -> CVector {
    let scale = PI * geom.phase_scale();
    CVector::from_iterator(
        geom.len(),
        geom.offsets().map(|(row, col)| {
            Complex64::from_polar(1.0, scale * (row * angles.v_z + col * angles.v_y))
        }),
    )
}
