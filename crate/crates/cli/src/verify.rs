//! Built-in verification suite: calibration anchors, published-band
//! consistency, randomized LP-vs-oracle agreement, dominance sampling and
//! determinism. Prints one pass/fail row per check.

use stratgrid_core::dispatch::simplex::DEFAULT_OPT_TOL;
use stratgrid_core::scenario::{preset, SizeClass};
use stratgrid_core::{dispatch, loads, solar, testgen, wptlink};

use crate::{solver_options, Failure, EXIT_VERIFY};

const ORACLE_CASES: usize = 30;
const DOMINANCE_CASES: usize = 40;

struct Table {
    failures: usize,
}

impl Table {
    fn new() -> Self {
        Table { failures: 0 }
    }

    fn row(&mut self, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!("{} {:<28} {}", if ok { "PASS" } else { "FAIL" }, name, detail);
    }
}

pub(crate) fn run(seed: u64) -> Result<(), Failure> {
    let mut table = Table::new();
    let options = solver_options();

    // Station-keeping calibration point.
    let mut node = preset(SizeClass::Custom);
    node.mass_kg = 40.0;
    node.airspeed_ms = 25.0;
    node.lift_to_drag = 25.0;
    node.propulsive_efficiency = 0.8;
    let p = loads::station_keeping_power(&node, 0.0).unwrap_or(f64::NAN);
    table.row(
        "station-keeping 500 W",
        (p - 500.0).abs() / 500.0 <= 0.05,
        format!("{p:.1} W"),
    );

    // Fresnel anchors.
    let d20 = wptlink::fresnel_distance_km(10.0, 0.010);
    table.row("fresnel 10 m / 10 mm", (d20 - 20.0).abs() < 1e-9, format!("{d20:.9} km"));
    let d90 = wptlink::fresnel_distance_km(15.0, 0.005);
    table.row("fresnel 15 m / 5 mm", (d90 - 90.0).abs() < 1e-9, format!("{d90:.9} km"));

    // Optical chain calibration.
    let optical = stratgrid_core::scenario::WptLink {
        from_id: "a".into(),
        to_id: "b".into(),
        modality: stratgrid_core::scenario::Modality::Optical,
        tx_aperture_m: 0.5,
        rx_aperture_m: 0.5,
        wavelength_m: 1.55e-6,
        dc_to_carrier_eff: 0.45,
        carrier_to_dc_eff: 0.55,
        aperture_efficiency: 0.85,
        max_tx_power_w: 1000.0,
        rx_power_density_limit_wm2: 3600.0,
        ris_reflection_eff: 1.0,
        weather_ok: vec![],
    };
    let eta = wptlink::optical_end_to_end_efficiency(&optical, 8.6);
    table.row("optical 20% at 8.6 km", (eta - 0.20).abs() <= 0.005, format!("eta = {eta:.5}"));

    // Irradiance peak.
    let env = stratgrid_core::scenario::Environment {
        latitude_deg: solar::declination_deg(80),
        day_of_year: 80,
        atmospheric_transmittance: solar::DEFAULT_TRANSMITTANCE,
        solar_constant_wm2: solar::SOLAR_CONSTANT_WM2,
        wind_speed_ms: vec![],
    };
    let g = solar::irradiance(&env, 12.0);
    table.row("peak irradiance 1250", (g - 1250.0).abs() < 1e-6, format!("{g:.3} W/m^2"));

    // Published produce bands per platform class.
    let bands = [
        (SizeClass::Small, 5.0, 10.0, 1100.0, 2500.0),
        (SizeClass::Medium, 30.0, 50.0, 6600.0, 12_500.0),
        (SizeClass::Large, 80.0, 90.0, 17_600.0, 22_500.0),
    ];
    let mut produce_ok = true;
    let mut produce_detail = String::new();
    for (class, area_lo, area_hi, lo_w, hi_w) in bands {
        let mut n = preset(class);
        n.pv_area_m2 = area_lo;
        let p_lo = solar::pv_power(&n, 1100.0);
        n.pv_area_m2 = area_hi;
        let p_hi = solar::pv_power(&n, 1250.0);
        let ok = (p_lo - lo_w).abs() / lo_w <= 0.05 && (p_hi - hi_w).abs() / hi_w <= 0.05;
        produce_ok &= ok;
        produce_detail.push_str(&format!("{class:?} {:.0}-{:.0} W  ", p_lo, p_hi));
    }
    let mut hawk = preset(SizeClass::Large);
    hawk.pv_area_m2 = 219.0;
    let hawk_peak = solar::pv_power(&hawk, 1250.0);
    produce_ok &= (48_000.0..=55_000.0).contains(&hawk_peak);
    produce_detail.push_str(&format!("219 m^2 {:.0} W", hawk_peak));
    table.row("class produce bands", produce_ok, produce_detail);

    // Randomized oracle agreement plus the strict optimality certificate.
    let mut worst_gap = 0.0f64;
    let mut worst_dual = 0.0f64;
    let mut oracle_ok = true;
    for k in 0..ORACLE_CASES {
        let instance = testgen::tiny_instance(seed.wrapping_add(k as u64));
        let grid = testgen::ORACLE_GRID_WH;
        match (dispatch::solve_lp(&instance, options), dispatch::brute_force_oracle(&instance, grid)) {
            (Ok(plan), Ok(oracle)) => {
                let gap = oracle - plan.objective_wh;
                let tol_low = -(1e-6 * oracle.abs().max(1.0));
                let tol_high = 2.0 * grid + 1e-6 * oracle.abs().max(1.0);
                let dual = plan.solver.map(|s| s.max_dual_infeasibility).unwrap_or(f64::NAN);
                worst_gap = worst_gap.max(gap.abs());
                worst_dual = worst_dual.max(dual);
                if gap < tol_low || gap > tol_high || dual > DEFAULT_OPT_TOL {
                    oracle_ok = false;
                }
            }
            (Err(_), Err(_)) => {}
            (lp, oracle) => {
                oracle_ok = false;
                log::warn!(
                    "case {k}: lp {:?} vs oracle {:?}",
                    lp.map(|p| p.objective_wh),
                    oracle.as_ref().map(|v| *v)
                );
            }
        }
    }
    table.row(
        "lp vs oracle",
        oracle_ok,
        format!("{ORACLE_CASES} cases, worst gap {worst_gap:.3} Wh, worst dual infeasibility {worst_dual:.2e}"),
    );

    // Dominance sampling.
    let mut dominance_ok = true;
    let mut worst_margin = f64::NEG_INFINITY;
    for k in 0..DOMINANCE_CASES {
        let instance = testgen::random_constellation(seed.wrapping_add(1000 + k as u64));
        let coop = match dispatch::solve_lp(&instance, options) {
            Ok(plan) => plan,
            Err(e) => {
                dominance_ok = false;
                log::warn!("dominance case {k} failed to solve: {e}");
                continue;
            }
        };
        let indep = dispatch::repair_cyclic(&instance, &dispatch::independent_baseline(&instance));
        let margin = indep.objective_wh - coop.objective_wh;
        worst_margin = worst_margin.max(-margin);
        if coop.objective_wh > indep.objective_wh + 1e-6 * indep.objective_wh.max(1.0) {
            dominance_ok = false;
        }
    }
    table.row(
        "cooperative dominance",
        dominance_ok,
        format!("{DOMINANCE_CASES} scenarios, worst violation {:.3e} Wh", worst_margin.max(0.0)),
    );

    // Determinism of the full solve path.
    let instance = testgen::random_constellation(seed.wrapping_add(99));
    let a = dispatch::solve_lp(&instance, options);
    let b = dispatch::solve_lp(&instance, options);
    let deterministic = match (&a, &b) {
        (Ok(pa), Ok(pb)) => pa == pb,
        _ => false,
    };
    table.row("deterministic resolve", deterministic, "two identical solves".into());

    if table.failures == 0 {
        println!("verification passed ({} checks)", 9);
        Ok(())
    } else {
        Err(Failure::new(EXIT_VERIFY, format!("{} verification check(s) failed", table.failures)))
    }
}
