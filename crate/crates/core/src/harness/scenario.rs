//! Scenario description and its flat `key = value` file format.
//!
//! ```text
//! # desk profile with a larger uncertainty
//! irs_elements_z = 4
//! irs_elements_y = 4
//! upsilon_m = 2
//! user_true_pos_m = 20, 20, -20
//! ```
//!
//! Unknown keys and malformed values are rejected with the offending line.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channel::{
    free_space_gain, noise_power_from_scenario, synthesize_b2i, wavelength_m, ChannelB2I, PathSpec,
    ReflectChannel,
};
use crate::error::{domain, Error, Result};
use crate::geometry::{EffectiveAngles, UraGeometry};
use crate::location::{
    effective_aods_from_positions, error_sensitivity, LocationError, Position3D, UncertaintyBall,
};
use crate::optimizer::{DesignContext, OptimizerConfig};
use crate::parallel::Execution;
use crate::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// N = 4, M = 16, 2000 trials.
    Desk,
    /// N = 16, M = 100, 10⁴ trials.
    Paper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub carrier_ghz: f64,
    pub bandwidth_hz: f64,
    pub noise_density_dbm_hz: f64,
    pub irs_pos_m: [f64; 3],
    pub bs_pos_m: [f64; 3],
    pub user_true_pos_m: [f64; 3],
    /// Defaults to the true position.
    pub user_est_pos_m: Option<[f64; 3]>,
    pub bs_elements_z: usize,
    pub bs_elements_y: usize,
    pub irs_elements_z: usize,
    pub irs_elements_y: usize,
    pub element_spacing_wavelengths: f64,
    pub upsilon_m: f64,
    pub target_rate_bps_hz: f64,
    pub path_count: usize,
    pub nlos_attenuation_db: f64,
    pub trials: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub max_outer_iters: usize,
    pub randomization_count: usize,
    pub power_scale_cap: f64,
    pub sdp_tol: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self::profile(Profile::Desk)
    }
}

impl Scenario {
    pub fn profile(profile: Profile) -> Self {
        let (bs, irs, trials) = match profile {
            Profile::Desk => (2, 4, 2000),
            Profile::Paper => (4, 10, 10_000),
        };
        Self {
            carrier_ghz: 28.0,
            bandwidth_hz: 1e8,
            noise_density_dbm_hz: -169.0,
            irs_pos_m: [0.0, 0.0, 0.0],
            bs_pos_m: [100.0, -100.0, 0.0],
            user_true_pos_m: [20.0, 20.0, -20.0],
            user_est_pos_m: None,
            bs_elements_z: bs,
            bs_elements_y: bs,
            irs_elements_z: irs,
            irs_elements_y: irs,
            element_spacing_wavelengths: 0.5,
            upsilon_m: 4.0,
            target_rate_bps_hz: 4.0,
            path_count: 3,
            nlos_attenuation_db: 10.0,
            trials,
            seed: 1,
            epsilon: 1e-3,
            max_outer_iters: 30,
            randomization_count: 200,
            power_scale_cap: 1e6,
            sdp_tol: 1e-8,
        }
    }

    pub fn irs_pos(&self) -> Position3D {
        pos(self.irs_pos_m)
    }

    pub fn bs_pos(&self) -> Position3D {
        pos(self.bs_pos_m)
    }

    pub fn user_true_pos(&self) -> Position3D {
        pos(self.user_true_pos_m)
    }

    pub fn user_est_pos(&self) -> Position3D {
        pos(self.user_est_pos_m.unwrap_or(self.user_true_pos_m))
    }

    pub fn bs_geom(&self) -> Result<UraGeometry> {
        UraGeometry::new(
            self.bs_elements_z,
            self.bs_elements_y,
            self.element_spacing_wavelengths,
        )
    }

    pub fn irs_geom(&self) -> Result<UraGeometry> {
        UraGeometry::new(
            self.irs_elements_z,
            self.irs_elements_y,
            self.element_spacing_wavelengths,
        )
    }

    pub fn wavelength(&self) -> f64 {
        wavelength_m(self.carrier_ghz * 1e9)
    }

    pub fn noise_power(&self) -> Result<f64> {
        noise_power_from_scenario(self.noise_density_dbm_hz, self.bandwidth_hz)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("carrier_ghz", self.carrier_ghz),
            ("bandwidth_hz", self.bandwidth_hz),
            (
                "element_spacing_wavelengths",
                self.element_spacing_wavelengths,
            ),
            ("target_rate_bps_hz", self.target_rate_bps_hz),
            ("epsilon", self.epsilon),
            ("sdp_tol", self.sdp_tol),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(format!("{k} must be positive, got {v}")));
            }
        }
        if !(self.upsilon_m >= 0.0 && self.upsilon_m.is_finite()) {
            return Err(domain("upsilon_m must be non-negative"));
        }
        if self.path_count == 0 || self.trials == 0 || self.randomization_count == 0 {
            return Err(domain(
                "path_count, trials and randomization_count must be at least 1",
            ));
        }
        if !(self.power_scale_cap >= 1.0) {
            return Err(domain("power_scale_cap must be >= 1"));
        }
        self.bs_geom()?;
        self.irs_geom()?;
        if self.irs_pos().distance(self.user_est_pos()) <= self.upsilon_m {
            return Err(domain("uncertainty ball reaches the IRS"));
        }
        if self.irs_pos().distance(self.bs_pos()) == 0.0 {
            return Err(domain("BS and IRS positions coincide"));
        }
        Ok(())
    }

    pub fn optimizer_config(&self, execution: Execution) -> OptimizerConfig {
        OptimizerConfig {
            target_rate: self.target_rate_bps_hz,
            epsilon: self.epsilon,
            max_outer_iters: self.max_outer_iters,
            randomization_count: self.randomization_count,
            power_scale_cap: self.power_scale_cap,
            rng_seed: self.seed,
            sdp_tol: self.sdp_tol,
            execution,
        }
    }

    /// Draws the channel realization for this scenario's seed.
    pub fn realize(&self) -> Result<Realization> {
        self.validate()?;
        let lambda = self.wavelength();
        let bs_geom = self.bs_geom()?;
        let irs_geom = self.irs_geom()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut phase = || Complex64::from_polar(1.0, rng.random_range(-PI..PI));

        let (b, i) = (self.bs_pos().to_vector(), self.irs_pos().to_vector());
        let d_bi = (b - i).norm();
        let u = (b - i) / d_bi;
        let los_gain = free_space_gain(lambda, d_bi);
        let mut paths = vec![PathSpec {
            gain: phase() * los_gain,
            aod: EffectiveAngles::new(u.z, u.y),
            aoa: EffectiveAngles::new(-u.z, -u.y),
        }];
        let mut phases: Vec<Complex64> = (1..self.path_count).map(|_| phase()).collect();
        let alpha_phase = phase();
        let weak = los_gain * 10f64.powf(-self.nlos_attenuation_db / 20.0);
        for p in phases.drain(..) {
            paths.push(PathSpec {
                gain: p * weak,
                aod: random_direction(&mut rng),
                aoa: random_direction(&mut rng),
            });
        }
        let b2i = synthesize_b2i(&paths, &bs_geom, &irs_geom)?;
        let d_est = self.irs_pos().distance(self.user_est_pos());
        let alpha_hat = alpha_phase * free_space_gain(lambda, d_est);
        let (angles, _) = effective_aods_from_positions(self.irs_pos(), self.user_est_pos())?;
        let g_hat = ReflectChannel::new(alpha_hat, angles, &irs_geom);
        let ctx = DesignContext {
            g_hat,
            b2i,
            sens: error_sensitivity(self.irs_pos(), self.user_est_pos(), &irs_geom)?,
            ball: UncertaintyBall::new(self.upsilon_m)?,
            noise_power: self.noise_power()?,
        };
        Ok(Realization {
            ctx,
            irs_geom,
            paths,
        })
    }

    /// Parses a scenario file on top of `base`.
    pub fn parse_onto(base: Self, text: &str) -> Result<Self> {
        let mut s = base;
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                msg: format!("expected `key = value`, found `{content}`"),
            })?;
            s.set(key.trim(), value.trim())
                .map_err(|msg| Error::Config { line, msg })?;
        }
        s.validate().map_err(|e| Error::Config {
            line: 0,
            msg: e.to_string(),
        })?;
        Ok(s)
    }

    /// Parses a scenario file on top of the desk profile.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_onto(Self::profile(Profile::Desk), text)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("{key}: invalid value `{v}`"))
        }
        fn triple(key: &str, v: &str) -> std::result::Result<[f64; 3], String> {
            let parts: Vec<&str> = v.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(format!("{key}: expected `x, y, z`, found `{v}`"));
            }
            let mut out = [0.0; 3];
            for (o, p) in out.iter_mut().zip(parts) {
                *o = num(key, p)?;
            }
            Ok(out)
        }
        match key {
            "carrier_ghz" => self.carrier_ghz = num(key, value)?,
            "bandwidth_hz" => self.bandwidth_hz = num(key, value)?,
            "noise_density_dbm_hz" => self.noise_density_dbm_hz = num(key, value)?,
            "irs_pos_m" => self.irs_pos_m = triple(key, value)?,
            "bs_pos_m" => self.bs_pos_m = triple(key, value)?,
            "user_true_pos_m" => self.user_true_pos_m = triple(key, value)?,
            "user_est_pos_m" => self.user_est_pos_m = Some(triple(key, value)?),
            "bs_elements_z" => self.bs_elements_z = num(key, value)?,
            "bs_elements_y" => self.bs_elements_y = num(key, value)?,
            "irs_elements_z" => self.irs_elements_z = num(key, value)?,
            "irs_elements_y" => self.irs_elements_y = num(key, value)?,
            "element_spacing_wavelengths" => self.element_spacing_wavelengths = num(key, value)?,
            "upsilon_m" => self.upsilon_m = num(key, value)?,
            "target_rate_bps_hz" => self.target_rate_bps_hz = num(key, value)?,
            "path_count" => self.path_count = num(key, value)?,
            "nlos_attenuation_db" => self.nlos_attenuation_db = num(key, value)?,
            "trials" => self.trials = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "epsilon" => self.epsilon = num(key, value)?,
            "max_outer_iters" => self.max_outer_iters = num(key, value)?,
            "randomization_count" => self.randomization_count = num(key, value)?,
            "power_scale_cap" => self.power_scale_cap = num(key, value)?,
            "sdp_tol" => self.sdp_tol = num(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Inverse of [`Scenario::parse`].
    pub fn to_kv(&self) -> String {
        let t = |p: [f64; 3]| format!("{:?}, {:?}, {:?}", p[0], p[1], p[2]);
        let mut out = String::new();
        let w = &mut out;
        let _ = writeln!(w, "carrier_ghz = {:?}", self.carrier_ghz);
        let _ = writeln!(w, "bandwidth_hz = {:?}", self.bandwidth_hz);
        let _ = writeln!(w, "noise_density_dbm_hz = {:?}", self.noise_density_dbm_hz);
        let _ = writeln!(w, "irs_pos_m = {}", t(self.irs_pos_m));
        let _ = writeln!(w, "bs_pos_m = {}", t(self.bs_pos_m));
        let _ = writeln!(w, "user_true_pos_m = {}", t(self.user_true_pos_m));
        if let Some(p) = self.user_est_pos_m {
            let _ = writeln!(w, "user_est_pos_m = {}", t(p));
        }
        let _ = writeln!(w, "bs_elements_z = {}", self.bs_elements_z);
        let _ = writeln!(w, "bs_elements_y = {}", self.bs_elements_y);
        let _ = writeln!(w, "irs_elements_z = {}", self.irs_elements_z);
        let _ = writeln!(w, "irs_elements_y = {}", self.irs_elements_y);
        let _ = writeln!(
            w,
            "element_spacing_wavelengths = {:?}",
            self.element_spacing_wavelengths
        );
        let _ = writeln!(w, "upsilon_m = {:?}", self.upsilon_m);
        let _ = writeln!(w, "target_rate_bps_hz = {:?}", self.target_rate_bps_hz);
        let _ = writeln!(w, "path_count = {}", self.path_count);
        let _ = writeln!(w, "nlos_attenuation_db = {:?}", self.nlos_attenuation_db);
        let _ = writeln!(w, "trials = {}", self.trials);
        let _ = writeln!(w, "seed = {}", self.seed);
        let _ = writeln!(w, "epsilon = {:?}", self.epsilon);
        let _ = writeln!(w, "max_outer_iters = {}", self.max_outer_iters);
        let _ = writeln!(w, "randomization_count = {}", self.randomization_count);
        let _ = writeln!(w, "power_scale_cap = {:?}", self.power_scale_cap);
        let _ = writeln!(w, "sdp_tol = {:?}", self.sdp_tol);
        out
    }
}

fn pos(p: [f64; 3]) -> Position3D {
    Position3D::new(p[0], p[1], p[2])
}

/// `(z, y)` components of a uniformly random unit direction.
fn random_direction(rng: &mut ChaCha8Rng) -> EffectiveAngles {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-12 {
            return EffectiveAngles::new(v[2] / n, v[1] / n);
        }
    }
}

/// A drawn channel realization together with what is needed to rebuild
/// the true reflection channel at a perturbed user position.
#[derive(Debug, Clone)]
pub struct Realization {
    pub ctx: DesignContext,
    pub irs_geom: UraGeometry,
    pub paths: Vec<PathSpec>,
}

impl Realization {
    /// True reflection channel for the estimated position offset by `delta`:
    /// same coefficient `α`, angles recomputed from the true position.
    pub fn true_reflect_channel(
        &self,
        irs: Position3D,
        user_est: Position3D,
        delta: &LocationError,
    ) -> Result<ReflectChannel> {
        let (angles, _) = effective_aods_from_positions(irs, user_est.offset(delta))?;
        Ok(ReflectChannel::new(
            self.ctx.g_hat.alpha,
            angles,
            &self.irs_geom,
        ))
    }

    pub fn b2i(&self) -> &ChannelB2I {
        &self.ctx.b2i
    }
}
