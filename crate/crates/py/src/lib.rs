//! Python bindings: scenario loading, the physical sub-models, relay routing
//! and the cooperative-vs-independent dispatch comparison.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use stratgrid_core::dispatch::simplex::SolverOptions;
use stratgrid_core::scenario::{Modality, SizeClass, WptLink};
use stratgrid_core::{dispatch, engine, loads, profiles, scenario, solar, wptlink};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn parse_class(name: &str) -> PyResult<SizeClass> {
    match name.to_ascii_lowercase().as_str() {
        "small" => Ok(SizeClass::Small),
        "medium" => Ok(SizeClass::Medium),
        "large" => Ok(SizeClass::Large),
        "custom" => Ok(SizeClass::Custom),
        other => Err(value_err(format!("unknown size class \"{other}\""))),
    }
}

/// A validated problem instance.
#[pyclass(frozen)]
struct Scenario {
    inner: scenario::Scenario,
}

#[pymethods]
impl Scenario {
    /// Loads and validates a scenario file (TOML).
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Scenario { inner: scenario::load_scenario(path).map_err(value_err)? })
    }

    /// Parses and validates scenario text (TOML).
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(Scenario { inner: scenario::parse_scenario(text).map_err(value_err)? })
    }

    /// Single-node scenario built from a platform-class preset.
    #[staticmethod]
    fn preset(class: &str) -> PyResult<Self> {
        Ok(Scenario { inner: scenario::scaffold_scenario(parse_class(class)?) })
    }

    #[getter]
    fn node_ids(&self) -> Vec<String> {
        self.inner.nodes.iter().map(|n| n.id.clone()).collect()
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps()
    }

    #[getter]
    fn horizon_hours(&self) -> f64 {
        self.inner.horizon_hours
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml()
    }

    /// Per-node generated power series, W.
    fn generation_profile(&self, node_id: &str) -> PyResult<Vec<f64>> {
        let i = self
            .inner
            .node_index(node_id)
            .ok_or_else(|| value_err(format!("unknown node \"{node_id}\"")))?;
        Ok(solar::generation_profile(
            &self.inner.nodes[i],
            &self.inner.environment,
            self.inner.horizon_hours,
            self.inner.timestep_hours,
        )
        .power_w)
    }

    /// Per-node total load series, W.
    fn load_profile(&self, node_id: &str) -> PyResult<Vec<f64>> {
        let i = self
            .inner
            .node_index(node_id)
            .ok_or_else(|| value_err(format!("unknown node \"{node_id}\"")))?;
        let profile = loads::load_profile(
            &self.inner.nodes[i],
            &self.inner.environment,
            self.inner.horizon_hours,
            self.inner.timestep_hours,
        )
        .map_err(value_err)?;
        Ok(profile.total_w())
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario({} nodes, {} links, {} steps)",
            self.inner.nodes.len(),
            self.inner.links.len(),
            self.inner.steps()
        )
    }
}

/// Cooperative-vs-independent comparison summary.
#[pyclass(frozen)]
struct Report {
    #[pyo3(get)]
    cooperative_objective_wh: f64,
    #[pyo3(get)]
    independent_objective_wh: f64,
    #[pyo3(get)]
    reduction_fraction: f64,
    #[pyo3(get)]
    degenerate_baseline: bool,
    #[pyo3(get)]
    node_ids: Vec<String>,
    #[pyo3(get)]
    coop_mean_soc_swing: Vec<f64>,
    #[pyo3(get)]
    indep_mean_soc_swing: Vec<f64>,
    #[pyo3(get)]
    indep_needed_ground: Vec<bool>,
    text: String,
}

#[pymethods]
impl Report {
    fn __str__(&self) -> String {
        self.text.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Report(reduction_fraction={:.4}, cooperative={:.1} Wh, independent={:.1} Wh)",
            self.reduction_fraction, self.cooperative_objective_wh, self.independent_objective_wh
        )
    }
}

fn simulate_mode(
    instance: &profiles::DispatchInstance,
    mode: &str,
) -> PyResult<engine::SimulationResult> {
    match mode.to_ascii_lowercase().as_str() {
        "cooperative" => {
            let plan = dispatch::solve_lp(instance, SolverOptions::default()).map_err(runtime_err)?;
            engine::simulate_instance(instance, &plan).map_err(runtime_err)
        }
        "independent" => {
            let plan = dispatch::repair_cyclic(instance, &dispatch::independent_baseline(instance));
            engine::simulate_instance(instance, &plan).map_err(runtime_err)
        }
        other => Err(value_err(format!("unknown mode \"{other}\" (cooperative|independent)"))),
    }
}

/// Runs both dispatch modes and compares them.
#[pyfunction]
fn run_dispatch(scenario: &Scenario, py: Python<'_>) -> PyResult<Report> {
    py.detach(|| {
        let built = profiles::build_profiles(&scenario.inner).map_err(value_err)?;
        let coop = simulate_mode(&built.instance, "cooperative")?;
        let indep = simulate_mode(&built.instance, "independent")?;
        let report = engine::compare(&coop, &indep).map_err(runtime_err)?;
        Ok(Report {
            cooperative_objective_wh: report.cooperative_objective_wh,
            independent_objective_wh: report.independent_objective_wh,
            reduction_fraction: report.reduction_fraction,
            degenerate_baseline: report.degenerate_baseline,
            node_ids: report.per_node.iter().map(|n| n.node_id.clone()).collect(),
            coop_mean_soc_swing: report.per_node.iter().map(|n| n.coop_mean_soc_swing).collect(),
            indep_mean_soc_swing: report.per_node.iter().map(|n| n.indep_mean_soc_swing).collect(),
            indep_needed_ground: report.per_node.iter().map(|n| n.indep_needed_ground).collect(),
            text: engine::report_text(&report),
        })
    })
}

/// Simulates one mode and returns the plot-ready CSV text.
#[pyfunction]
fn simulation_csv(scenario: &Scenario, mode: &str, py: Python<'_>) -> PyResult<String> {
    py.detach(|| {
        let built = profiles::build_profiles(&scenario.inner).map_err(value_err)?;
        let result = simulate_mode(&built.instance, mode)?;
        Ok(engine::write_csv(&result))
    })
}

/// Solar position: (declination, hour angle, zenith, cos zenith), degrees.
#[pyfunction]
fn sun_state(latitude_deg: f64, day_of_year: u32, hour: f64) -> PyResult<(f64, f64, f64, f64)> {
    let s = solar::sun_state(latitude_deg, day_of_year, hour).map_err(value_err)?;
    Ok((s.declination_deg, s.hour_angle_deg, s.zenith_deg, s.cos_zenith))
}

/// Stratospheric irradiance, W/m^2, with the calibrated default transmittance.
#[pyfunction]
#[pyo3(signature = (latitude_deg, day_of_year, hour, atmospheric_transmittance=None))]
fn irradiance(latitude_deg: f64, day_of_year: u32, hour: f64, atmospheric_transmittance: Option<f64>) -> f64 {
    let env = stratgrid_core::scenario::Environment {
        latitude_deg,
        day_of_year,
        atmospheric_transmittance: atmospheric_transmittance.unwrap_or(solar::DEFAULT_TRANSMITTANCE),
        solar_constant_wm2: solar::SOLAR_CONSTANT_WM2,
        wind_speed_ms: vec![],
    };
    solar::irradiance(&env, hour)
}

/// PV electrical output, W.
#[pyfunction]
fn pv_power(pv_area_m2: f64, system_efficiency: f64, irradiance_wm2: f64) -> f64 {
    let mut node = scenario::preset(SizeClass::Custom);
    node.pv_area_m2 = pv_area_m2;
    node.system_efficiency = system_efficiency;
    solar::pv_power(&node, irradiance_wm2)
}

/// Station-keeping propulsion power, W.
#[pyfunction]
#[pyo3(signature = (mass_kg, airspeed_ms, lift_to_drag, propulsive_efficiency=0.8, wind_speed_ms=0.0))]
fn station_keeping_power(
    mass_kg: f64,
    airspeed_ms: f64,
    lift_to_drag: f64,
    propulsive_efficiency: f64,
    wind_speed_ms: f64,
) -> PyResult<f64> {
    let mut node = scenario::preset(SizeClass::Custom);
    node.mass_kg = mass_kg;
    node.airspeed_ms = airspeed_ms;
    node.lift_to_drag = lift_to_drag;
    node.propulsive_efficiency = propulsive_efficiency;
    loads::station_keeping_power(&node, wind_speed_ms).map_err(value_err)
}

/// Fresnel distance `2 D^2 / lambda`, km.
#[pyfunction]
fn fresnel_distance_km(tx_aperture_m: f64, wavelength_m: f64) -> f64 {
    wptlink::fresnel_distance_km(tx_aperture_m, wavelength_m)
}

fn default_rf_link(tx_aperture_m: f64, rx_aperture_m: f64, wavelength_m: f64) -> WptLink {
    WptLink {
        from_id: "tx".into(),
        to_id: "rx".into(),
        modality: Modality::Rf,
        tx_aperture_m,
        rx_aperture_m,
        wavelength_m,
        dc_to_carrier_eff: scenario::DEFAULT_RF_DC_TO_CARRIER,
        carrier_to_dc_eff: scenario::DEFAULT_RF_CARRIER_TO_DC,
        aperture_efficiency: 1.0,
        max_tx_power_w: 5000.0,
        rx_power_density_limit_wm2: scenario::DEFAULT_RX_POWER_DENSITY_LIMIT_WM2,
        ris_reflection_eff: 1.0,
        weather_ok: vec![],
    }
}

/// RF beam collection efficiency at a distance.
#[pyfunction]
fn rf_geometric_efficiency(tx_aperture_m: f64, rx_aperture_m: f64, wavelength_m: f64, distance_km: f64) -> f64 {
    wptlink::rf_geometric_efficiency(&default_rf_link(tx_aperture_m, rx_aperture_m, wavelength_m), distance_km)
}

/// End-to-end RF link efficiency with the default conversion chain.
#[pyfunction]
fn rf_end_to_end_efficiency(tx_aperture_m: f64, rx_aperture_m: f64, wavelength_m: f64, distance_km: f64) -> PyResult<f64> {
    let link = default_rf_link(tx_aperture_m, rx_aperture_m, wavelength_m);
    Ok(wptlink::link_budget(&link, distance_km, 1.0).map_err(value_err)?.end_to_end_eff)
}

/// End-to-end optical link efficiency with the calibrated default chain.
#[pyfunction]
fn optical_end_to_end_efficiency(distance_km: f64) -> f64 {
    let link = WptLink {
        from_id: "tx".into(),
        to_id: "rx".into(),
        modality: Modality::Optical,
        tx_aperture_m: 0.5,
        rx_aperture_m: 0.5,
        wavelength_m: scenario::DEFAULT_OPTICAL_WAVELENGTH_M,
        dc_to_carrier_eff: scenario::DEFAULT_OPTICAL_DC_TO_CARRIER,
        carrier_to_dc_eff: scenario::DEFAULT_OPTICAL_CARRIER_TO_DC,
        aperture_efficiency: scenario::DEFAULT_OPTICAL_POINTING_EFFICIENCY,
        max_tx_power_w: 5000.0,
        rx_power_density_limit_wm2: scenario::DEFAULT_RX_POWER_DENSITY_LIMIT_WM2,
        ris_reflection_eff: 1.0,
        weather_ok: vec![],
    };
    wptlink::optical_end_to_end_efficiency(&link, distance_km)
}

/// Maximum-product-efficiency relay path over weighted directed edges.
#[pyfunction]
fn route_max_efficiency(edges: Vec<(String, String, f64)>, src: &str, dst: &str) -> PyResult<(Vec<String>, f64)> {
    let mut vertices: Vec<String> = Vec::new();
    for (a, b, _) in &edges {
        if !vertices.contains(a) {
            vertices.push(a.clone());
        }
        if !vertices.contains(b) {
            vertices.push(b.clone());
        }
    }
    for v in [src, dst] {
        if !vertices.iter().any(|x| x == v) {
            vertices.push(v.to_string());
        }
    }
    let mut graph = wptlink::EnergyGraph::new(vertices);
    for (a, b, eff) in &edges {
        graph.add_edge(a, b, *eff).map_err(value_err)?;
    }
    wptlink::route_max_efficiency(&graph, src, dst).map_err(value_err)
}

#[pymodule]
fn stratgrid_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scenario>()?;
    m.add_class::<Report>()?;
    m.add_function(wrap_pyfunction!(run_dispatch, m)?)?;
    m.add_function(wrap_pyfunction!(simulation_csv, m)?)?;
    m.add_function(wrap_pyfunction!(sun_state, m)?)?;
    m.add_function(wrap_pyfunction!(irradiance, m)?)?;
    m.add_function(wrap_pyfunction!(pv_power, m)?)?;
    m.add_function(wrap_pyfunction!(station_keeping_power, m)?)?;
    m.add_function(wrap_pyfunction!(fresnel_distance_km, m)?)?;
    m.add_function(wrap_pyfunction!(rf_geometric_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(rf_end_to_end_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(optical_end_to_end_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(route_max_efficiency, m)?)?;
    Ok(())
}
