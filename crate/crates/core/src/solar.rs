//! Solar geometry and stratospheric PV generation.
//!
//! The irradiance model is direct-normal with a cosine-of-zenith clamp and a
//! single atmospheric transmittance scalar; above-cloud operation makes a
//! diffuse term unnecessary. The default transmittance is calibrated so that
//! a zenith-zero sun yields 1250 W/m².

use crate::scenario::{Environment, HapNode};

/// Transmittance that maps the 1361 W/m² solar constant to a 1250 W/m² peak.
pub const DEFAULT_TRANSMITTANCE: f64 = 1250.0 / 1361.0;

/// Solar constant at the top of the atmosphere, W/m².
pub const SOLAR_CONSTANT_WM2: f64 = 1361.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SunState {
    pub declination_deg: f64,
    pub hour_angle_deg: f64,
    pub zenith_deg: f64,
    pub cos_zenith: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationProfile {
    pub node_id: String,
    /// Electrical output sampled at the start of each step, W.
    pub power_w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolarError {
    #[error("latitude {0} outside [-90, 90] degrees")]
    LatitudeOutOfRange(f64),
    #[error("hour {0} outside [0, 24)")]
    HourOutOfRange(f64),
}

/// Cooper's declination formula, degrees.
pub fn declination_deg(day_of_year: u32) -> f64 {
    23.45 * (360.0 * (284.0 + day_of_year as f64) / 365.0).to_radians().sin()
}

/// Solar position for a latitude, day of year and local solar hour.
pub fn sun_state(latitude_deg: f64, day_of_year: u32, hour: f64) -> Result<SunState, SolarError> {
    if !(-90.0..=90.0).contains(&latitude_deg) {
        return Err(SolarError::LatitudeOutOfRange(latitude_deg));
    }
    if !(0.0..24.0).contains(&hour) {
        return Err(SolarError::HourOutOfRange(hour));
    }
    let decl = declination_deg(day_of_year);
    let hour_angle = 15.0 * (hour - 12.0);
    let phi = latitude_deg.to_radians();
    let delta = decl.to_radians();
    let h = hour_angle.to_radians();
    let cos_zenith = phi.sin() * delta.sin() + phi.cos() * delta.cos() * h.cos();
    let cos_zenith = cos_zenith.clamp(-1.0, 1.0);
    Ok(SunState {
        declination_deg: decl,
        hour_angle_deg: hour_angle,
        zenith_deg: cos_zenith.acos().to_degrees(),
        cos_zenith,
    })
}

/// Stratospheric irradiance on a sun-normal surface, W/m².
///
/// Night (cos zenith <= 0) clamps to zero.
pub fn irradiance(env: &Environment, hour: f64) -> f64 {
    let sun = match sun_state(env.latitude_deg, env.day_of_year, hour) {
        Ok(s) => s,
        Err(_) => return 0.0,
    };
    irradiance_from_cos_zenith(env, sun.cos_zenith)
}

/// Irradiance for an already-computed cosine of the zenith angle.
pub fn irradiance_from_cos_zenith(env: &Environment, cos_zenith: f64) -> f64 {
    env.solar_constant_wm2 * env.atmospheric_transmittance * cos_zenith.max(0.0)
}

/// Electrical PV output of a node under irradiance `g_wm2`, W.
pub fn pv_power(node: &HapNode, g_wm2: f64) -> f64 {
    g_wm2.max(0.0) * node.pv_area_m2 * node.system_efficiency
}

/// Per-step generated electrical power over the horizon.
///
/// Power is sampled at the start of each step (zero-order hold), matching the
/// payload sampling convention used by the load model.
pub fn generation_profile(
    node: &HapNode,
    env: &Environment,
    horizon_hours: f64,
    timestep_hours: f64,
) -> GenerationProfile {
    let steps = (horizon_hours / timestep_hours).round() as usize;
    let power_w = (0..steps)
        .map(|k| {
            let hour = (k as f64 * timestep_hours) % 24.0;
            pv_power(node, irradiance(env, hour))
        })
        .collect();
    GenerationProfile { node_id: node.id.clone(), power_w }
}
