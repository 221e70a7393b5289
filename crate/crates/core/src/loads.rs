//! Electrical demand: station-keeping propulsion plus scheduled payload power.

use crate::scenario::{Environment, HapNode, PayloadSchedule};

pub const GRAVITY_MS2: f64 = 9.81;

/// Per-step load decomposition, W.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LoadComponents {
    pub station_keeping_w: f64,
    pub comm_w: f64,
    pub sensing_w: f64,
    pub compute_w: f64,
}

impl LoadComponents {
    pub fn total_w(&self) -> f64 {
        self.station_keeping_w + self.comm_w + self.sensing_w + self.compute_w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadProfile {
    pub node_id: String,
    pub components: Vec<LoadComponents>,
}

impl LoadProfile {
    pub fn total_w(&self) -> Vec<f64> {
        self.components.iter().map(LoadComponents::total_w).collect()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LoadError {
    #[error("lift_to_drag and propulsive_efficiency must be positive (got {ld}, {eta})")]
    Domain { ld: f64, eta: f64 },
    #[error("wind profile has {got} entries, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
}

/// Propulsion power for steady level flight, W.
///
/// The effective airspeed is the larger of cruise airspeed and wind speed, so
/// demand rises once the platform must fight wind faster than its cruise
/// point.
pub fn station_keeping_power(node: &HapNode, wind_speed_ms: f64) -> Result<f64, LoadError> {
    if node.lift_to_drag <= 0.0 || node.propulsive_efficiency <= 0.0 {
        return Err(LoadError::Domain { ld: node.lift_to_drag, eta: node.propulsive_efficiency });
    }
    let v = node.airspeed_ms.max(wind_speed_ms.max(0.0));
    Ok(node.mass_kg * GRAVITY_MS2 * v / (node.lift_to_drag * node.propulsive_efficiency))
}

/// Payload draw at `hour` under half-open interval semantics `[start, end)`.
pub fn payload_power(schedule: &PayloadSchedule, hour: f64) -> (f64, f64, f64) {
    for entry in &schedule.entries {
        if hour >= entry.start_hour && hour < entry.end_hour {
            return (entry.comm_w, entry.sensing_w, entry.compute_w);
        }
    }
    (0.0, 0.0, 0.0)
}

/// Assembles the per-step demand profile for one node.
///
/// Payload power is sampled at the start of each step (zero-order hold);
/// station-keeping uses the per-step wind profile (all-calm when empty).
pub fn load_profile(
    node: &HapNode,
    env: &Environment,
    horizon_hours: f64,
    timestep_hours: f64,
) -> Result<LoadProfile, LoadError> {
    let steps = (horizon_hours / timestep_hours).round() as usize;
    if !env.wind_speed_ms.is_empty() && env.wind_speed_ms.len() != steps {
        return Err(LoadError::LengthMismatch { got: env.wind_speed_ms.len(), expected: steps });
    }
    let mut components = Vec::with_capacity(steps);
    for k in 0..steps {
        let wind = env.wind_speed_ms.get(k).copied().unwrap_or(0.0);
        let hour = k as f64 * timestep_hours;
        let (comm_w, sensing_w, compute_w) = payload_power(&node.payload_schedule, hour);
        components.push(LoadComponents {
            station_keeping_w: station_keeping_power(node, wind)?,
            comm_w,
            sensing_w,
            compute_w,
        });
    }
    Ok(LoadProfile { node_id: node.id.clone(), components })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{preset, PayloadEntry, SizeClass};
    use proptest::prelude::*;

    fn aquila() -> HapNode {
        let mut node = preset(SizeClass::Custom);
        node.mass_kg = 40.0;
        node.airspeed_ms = 25.0;
        node.lift_to_drag = 25.0;
        node.propulsive_efficiency = 0.8;
        node
    }

    #[test]
    fn aquila_cruise_is_about_500w() {
        let p = station_keeping_power(&aquila(), 0.0).unwrap();
        assert!((p - 490.5).abs() < 1e-9, "p = {p}");
        assert!((p - 500.0).abs() / 500.0 < 0.05);
    }

    #[test]
    fn zero_airspeed_zero_power() {
        let mut node = aquila();
        node.airspeed_ms = 0.0;
        assert_eq!(station_keeping_power(&node, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn wind_above_cruise_raises_power() {
        let p = station_keeping_power(&aquila(), 35.0).unwrap();
        assert!((p - 686.7).abs() < 1e-9, "p = {p}");
    }

    #[test]
    fn degenerate_aero_is_domain_error() {
        let mut node = aquila();
        node.lift_to_drag = 0.0;
        assert!(matches!(station_keeping_power(&node, 0.0), Err(LoadError::Domain { .. })));
    }

    #[test]
    fn payload_half_open_interval() {
        let schedule = PayloadSchedule {
            entries: vec![PayloadEntry {
                start_hour: 13.0,
                end_hour: 14.0,
                comm_w: 0.0,
                sensing_w: 1500.0,
                compute_w: 0.0,
            }],
        };
        assert_eq!(payload_power(&schedule, 13.0), (0.0, 1500.0, 0.0));
        assert_eq!(payload_power(&schedule, 14.0), (0.0, 0.0, 0.0));
        assert_eq!(payload_power(&schedule, 3.0), (0.0, 0.0, 0.0));
    }

    #[test]
    fn comm_window_sampled_inside() {
        let schedule = PayloadSchedule {
            entries: vec![PayloadEntry {
                start_hour: 8.0,
                end_hour: 20.0,
                comm_w: 1500.0,
                sensing_w: 0.0,
                compute_w: 0.0,
            }],
        };
        assert_eq!(payload_power(&schedule, 12.0).0, 1500.0);
    }

    #[test]
    fn profile_totals_are_component_sums() {
        let node = preset(SizeClass::Medium);
        let env = Environment {
            latitude_deg: 0.0,
            day_of_year: 80,
            atmospheric_transmittance: 1.0,
            solar_constant_wm2: 1361.0,
            wind_speed_ms: vec![],
        };
        let profile = load_profile(&node, &env, 24.0, 1.0).unwrap();
        assert_eq!(profile.components.len(), 24);
        for c in &profile.components {
            let total = c.total_w();
            assert_eq!(total, c.station_keeping_w + c.comm_w + c.sensing_w + c.compute_w);
        }
        // Daytime step: station-keeping plus comm plus compute for the medium preset.
        let noon = &profile.components[12];
        assert!(noon.comm_w > 0.0 && noon.compute_w > 0.0);
    }

    #[test]
    fn large_preset_shows_sar_peak_only_in_window() {
        let node = preset(SizeClass::Large);
        let env = Environment {
            latitude_deg: 0.0,
            day_of_year: 80,
            atmospheric_transmittance: 1.0,
            solar_constant_wm2: 1361.0,
            wind_speed_ms: vec![],
        };
        let profile = load_profile(&node, &env, 24.0, 1.0).unwrap();
        for (t, c) in profile.components.iter().enumerate() {
            if (11..14).contains(&t) {
                assert!((1000.0..=2000.0).contains(&c.sensing_w), "hour {t}: {}", c.sensing_w);
            } else {
                assert_eq!(c.sensing_w, 0.0, "hour {t}");
            }
        }
    }

    #[test]
    fn wind_profile_length_checked() {
        let node = preset(SizeClass::Small);
        let env = Environment {
            latitude_deg: 0.0,
            day_of_year: 80,
            atmospheric_transmittance: 1.0,
            solar_constant_wm2: 1361.0,
            wind_speed_ms: vec![0.0; 7],
        };
        assert!(matches!(
            load_profile(&node, &env, 24.0, 1.0),
            Err(LoadError::LengthMismatch { got: 7, expected: 24 })
        ));
    }

    #[test]
    fn calm_wind_gives_constant_station_keeping() {
        let node = aquila();
        let env = Environment {
            latitude_deg: 0.0,
            day_of_year: 80,
            atmospheric_transmittance: 1.0,
            solar_constant_wm2: 1361.0,
            wind_speed_ms: vec![0.0; 24],
        };
        let profile = load_profile(&node, &env, 24.0, 1.0).unwrap();
        for c in &profile.components {
            assert!((c.station_keeping_w - 490.5).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn station_keeping_monotone_in_wind_and_mass(
            mass in 10.0f64..2000.0,
            wind_a in 0.0f64..60.0,
            wind_b in 0.0f64..60.0,
            extra in 0.0f64..500.0,
        ) {
            let mut node = aquila();
            node.mass_kg = mass;
            let (lo, hi) = if wind_a <= wind_b { (wind_a, wind_b) } else { (wind_b, wind_a) };
            let p_lo = station_keeping_power(&node, lo).unwrap();
            let p_hi = station_keeping_power(&node, hi).unwrap();
            prop_assert!(p_hi >= p_lo);

            let mut heavier = node.clone();
            heavier.mass_kg = mass + extra;
            prop_assert!(station_keeping_power(&heavier, lo).unwrap() >= p_lo);
        }
    }
}
