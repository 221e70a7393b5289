//! Problem-instance data model: nodes, links, environment, ground stations.
//!
//! Scenario files are TOML documents with a `format_version` field. Optional
//! fields take documented defaults (see `docs/scenario_format.md`); validation
//! reports JSON-pointer-style field paths.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::solar;

pub const FORMAT_VERSION: u32 = 1;

pub const DEFAULT_SYSTEM_EFFICIENCY: f64 = 0.2;
pub const DEFAULT_PROPULSIVE_EFFICIENCY: f64 = 0.8;
pub const DEFAULT_SOC_FLOOR: f64 = 0.2;
pub const DEFAULT_BATTERY_EFFICIENCY: f64 = 0.95;
/// Square-root split of the 53.4% round-trip efficiency of a regenerative
/// fuel cell system.
pub const DEFAULT_RFCS_EFFICIENCY: f64 = 0.731;
/// Default charge/discharge power as a fraction of capacity per hour.
pub const DEFAULT_C_RATE: f64 = 0.5;
pub const DEFAULT_RF_DC_TO_CARRIER: f64 = 0.7;
pub const DEFAULT_RF_CARRIER_TO_DC: f64 = 0.615;
pub const DEFAULT_OPTICAL_DC_TO_CARRIER: f64 = 0.45;
pub const DEFAULT_OPTICAL_CARRIER_TO_DC: f64 = 0.55;
pub const DEFAULT_OPTICAL_POINTING_EFFICIENCY: f64 = 0.85;
pub const DEFAULT_RF_WAVELENGTH_M: f64 = 0.01;
pub const DEFAULT_OPTICAL_WAVELENGTH_M: f64 = 1.55e-6;
pub const DEFAULT_RX_POWER_DENSITY_LIMIT_WM2: f64 = 3600.0;
/// Receive-side RF-to-DC ceiling for rectenna hardware.
pub const MAX_RF_CARRIER_TO_DC: f64 = 0.615;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeClass {
    Small,
    Medium,
    Large,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StorageTechnology {
    SecondaryBattery,
    Rfcs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Rf,
    Optical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StorageUnit {
    pub technology: StorageTechnology,
    pub specific_energy_wh_per_kg: f64,
    pub storage_mass_kg: f64,
    pub charge_efficiency: f64,
    pub discharge_efficiency: f64,
    pub soc_floor: f64,
    pub max_charge_power_w: f64,
    pub max_discharge_power_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayloadEntry {
    pub start_hour: f64,
    pub end_hour: f64,
    pub comm_w: f64,
    pub sensing_w: f64,
    pub compute_w: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PayloadSchedule {
    pub entries: Vec<PayloadEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HapNode {
    pub id: String,
    pub class: SizeClass,
    pub pv_area_m2: f64,
    pub system_efficiency: f64,
    pub mass_kg: f64,
    pub lift_to_drag: f64,
    pub propulsive_efficiency: f64,
    pub airspeed_ms: f64,
    pub storage: StorageUnit,
    #[serde(rename = "payload")]
    pub payload_schedule: PayloadSchedule,
    /// Static position, km.
    pub position_km: [f64; 3],
    pub receiver_area_m2: f64,
    pub initial_soc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundStation {
    pub id: String,
    pub position_km: [f64; 3],
    pub max_supply_power_w: f64,
    pub modality: Modality,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    pub latitude_deg: f64,
    pub day_of_year: u32,
    pub atmospheric_transmittance: f64,
    pub solar_constant_wm2: f64,
    /// Per-step wind speed, m/s; empty means calm throughout.
    pub wind_speed_ms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WptLink {
    pub from_id: String,
    pub to_id: String,
    pub modality: Modality,
    pub tx_aperture_m: f64,
    pub rx_aperture_m: f64,
    pub wavelength_m: f64,
    pub dc_to_carrier_eff: f64,
    pub carrier_to_dc_eff: f64,
    pub aperture_efficiency: f64,
    pub max_tx_power_w: f64,
    pub rx_power_density_limit_wm2: f64,
    /// Fixed multiplier for reflective (RIS) hops; 1.0 for a direct link.
    pub ris_reflection_eff: f64,
    /// Per-step availability; empty means always available.
    pub weather_ok: Vec<bool>,
}

impl WptLink {
    pub fn weather_ok_at(&self, step: usize) -> bool {
        self.weather_ok.get(step).copied().unwrap_or(true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub format_version: u32,
    pub nodes: Vec<HapNode>,
    pub links: Vec<WptLink>,
    pub ground_stations: Vec<GroundStation>,
    pub environment: Environment,
    pub horizon_hours: f64,
    pub timestep_hours: f64,
}

impl Scenario {
    pub fn steps(&self) -> usize {
        (self.horizon_hours / self.timestep_hours).round() as usize
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn is_ground_id(&self, id: &str) -> bool {
        self.ground_stations.iter().any(|g| g.id == id)
    }

    pub fn position_of(&self, id: &str) -> Option<[f64; 3]> {
        self.nodes
            .iter()
            .find(|n| n.id == id)
            .map(|n| n.position_km)
            .or_else(|| self.ground_stations.iter().find(|g| g.id == id).map(|g| g.position_km))
    }

    /// Serializes back to the TOML scenario format.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serialization cannot fail")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error at {path}: {message}")]
    Validation { path: String, message: String },
    #[error("dangling reference at {path}: unknown id \"{id}\"")]
    DanglingReference { path: String, id: String },
}

// ---------------------------------------------------------------------------
// Raw file schema: every optional field is an Option here, defaults are
// resolved during normalization so the domain types stay fully concrete.
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    format_version: u32,
    #[serde(default)]
    nodes: Vec<RawNode>,
    #[serde(default)]
    links: Vec<RawLink>,
    #[serde(default)]
    ground_stations: Vec<RawGroundStation>,
    environment: RawEnvironment,
    horizon_hours: f64,
    timestep_hours: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: String,
    class: Option<SizeClass>,
    pv_area_m2: f64,
    system_efficiency: Option<f64>,
    mass_kg: f64,
    lift_to_drag: f64,
    propulsive_efficiency: Option<f64>,
    airspeed_ms: Option<f64>,
    storage: RawStorage,
    #[serde(default)]
    payload: Vec<PayloadEntry>,
    position_km: [f64; 3],
    receiver_area_m2: Option<f64>,
    initial_soc: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStorage {
    technology: StorageTechnology,
    specific_energy_wh_per_kg: f64,
    storage_mass_kg: f64,
    charge_efficiency: Option<f64>,
    discharge_efficiency: Option<f64>,
    soc_floor: Option<f64>,
    max_charge_power_w: Option<f64>,
    max_discharge_power_w: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    from: Option<String>,
    from_id: Option<String>,
    to: Option<String>,
    to_id: Option<String>,
    modality: Modality,
    tx_aperture_m: f64,
    rx_aperture_m: f64,
    wavelength_m: Option<f64>,
    dc_to_carrier_eff: Option<f64>,
    carrier_to_dc_eff: Option<f64>,
    aperture_efficiency: Option<f64>,
    max_tx_power_w: f64,
    rx_power_density_limit_wm2: Option<f64>,
    ris_reflection_eff: Option<f64>,
    #[serde(default)]
    weather_ok: Vec<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroundStation {
    id: String,
    position_km: [f64; 3],
    max_supply_power_w: f64,
    modality: Option<Modality>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnvironment {
    latitude_deg: f64,
    day_of_year: u32,
    atmospheric_transmittance: Option<f64>,
    solar_constant_wm2: Option<f64>,
    #[serde(default)]
    wind_speed_ms: Vec<f64>,
}

fn invalid(path: String, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation { path, message: message.into() }
}

fn check(cond: bool, path: impl Into<String>, message: impl Into<String>) -> Result<(), ScenarioError> {
    if cond {
        Ok(())
    } else {
        Err(invalid(path.into(), message))
    }
}

fn unit_interval(value: f64, path: String, allow_zero: bool) -> Result<(), ScenarioError> {
    let ok = if allow_zero { (0.0..=1.0).contains(&value) } else { value > 0.0 && value <= 1.0 };
    check(ok, path, format!("expected value in {} but got {value}", if allow_zero { "[0, 1]" } else { "(0, 1]" }))
}

impl RawStorage {
    fn normalize(self, path: &str) -> Result<StorageUnit, ScenarioError> {
        let default_eff = match self.technology {
            StorageTechnology::SecondaryBattery => DEFAULT_BATTERY_EFFICIENCY,
            StorageTechnology::Rfcs => DEFAULT_RFCS_EFFICIENCY,
        };
        let capacity = self.specific_energy_wh_per_kg * self.storage_mass_kg;
        let unit = StorageUnit {
            technology: self.technology,
            specific_energy_wh_per_kg: self.specific_energy_wh_per_kg,
            storage_mass_kg: self.storage_mass_kg,
            charge_efficiency: self.charge_efficiency.unwrap_or(default_eff),
            discharge_efficiency: self.discharge_efficiency.unwrap_or(default_eff),
            soc_floor: self.soc_floor.unwrap_or(DEFAULT_SOC_FLOOR),
            max_charge_power_w: self.max_charge_power_w.unwrap_or(DEFAULT_C_RATE * capacity),
            max_discharge_power_w: self.max_discharge_power_w.unwrap_or(DEFAULT_C_RATE * capacity),
        };
        check(unit.capacity_wh() > 0.0, format!("{path}/storage_mass_kg"), "capacity must be positive")?;
        unit_interval(unit.charge_efficiency, format!("{path}/charge_efficiency"), false)?;
        unit_interval(unit.discharge_efficiency, format!("{path}/discharge_efficiency"), false)?;
        check(
            (0.0..1.0).contains(&unit.soc_floor),
            format!("{path}/soc_floor"),
            format!("soc_floor must lie in [0, 1) but got {}", unit.soc_floor),
        )?;
        check(unit.max_charge_power_w >= 0.0, format!("{path}/max_charge_power_w"), "must be nonnegative")?;
        check(unit.max_discharge_power_w >= 0.0, format!("{path}/max_discharge_power_w"), "must be nonnegative")?;
        Ok(unit)
    }
}

impl RawNode {
    fn normalize(self, index: usize, horizon_hours: f64) -> Result<HapNode, ScenarioError> {
        let path = format!("/nodes/{index}");
        let storage = self.storage.normalize(&format!("{path}/storage"))?;
        let node = HapNode {
            id: self.id,
            class: self.class.unwrap_or(SizeClass::Custom),
            pv_area_m2: self.pv_area_m2,
            system_efficiency: self.system_efficiency.unwrap_or(DEFAULT_SYSTEM_EFFICIENCY),
            mass_kg: self.mass_kg,
            lift_to_drag: self.lift_to_drag,
            propulsive_efficiency: self.propulsive_efficiency.unwrap_or(DEFAULT_PROPULSIVE_EFFICIENCY),
            airspeed_ms: self.airspeed_ms.unwrap_or(0.0),
            storage,
            payload_schedule: PayloadSchedule { entries: self.payload },
            position_km: self.position_km,
            receiver_area_m2: self.receiver_area_m2.unwrap_or(1.0),
            initial_soc: self.initial_soc,
        };
        check(!node.id.is_empty(), format!("{path}/id"), "id must be nonempty")?;
        check(node.pv_area_m2 > 0.0, format!("{path}/pv_area_m2"), "must be positive")?;
        unit_interval(node.system_efficiency, format!("{path}/system_efficiency"), false)?;
        check(node.mass_kg > 0.0, format!("{path}/mass_kg"), "must be positive")?;
        check(node.lift_to_drag > 0.0, format!("{path}/lift_to_drag"), "must be positive")?;
        unit_interval(node.propulsive_efficiency, format!("{path}/propulsive_efficiency"), false)?;
        check(node.airspeed_ms >= 0.0, format!("{path}/airspeed_ms"), "must be nonnegative")?;
        check(node.receiver_area_m2 > 0.0, format!("{path}/receiver_area_m2"), "must be positive")?;
        check(
            node.initial_soc >= node.storage.soc_floor && node.initial_soc <= 1.0,
            format!("{path}/initial_soc"),
            format!(
                "initial_soc {} must lie in [soc_floor = {}, 1]",
                node.initial_soc, node.storage.soc_floor
            ),
        )?;

        let mut sorted: Vec<&PayloadEntry> = node.payload_schedule.entries.iter().collect();
        sorted.sort_by(|a, b| a.start_hour.total_cmp(&b.start_hour));
        let mut prev_end = f64::NEG_INFINITY;
        for (k, entry) in sorted.iter().enumerate() {
            let epath = format!("{path}/payload/{k}");
            check(entry.start_hour < entry.end_hour, format!("{epath}/end_hour"), "window must be nonempty")?;
            check(
                entry.start_hour >= 0.0 && entry.end_hour <= horizon_hours,
                format!("{epath}/start_hour"),
                format!("window must lie within [0, {horizon_hours}]"),
            )?;
            check(
                entry.comm_w >= 0.0 && entry.sensing_w >= 0.0 && entry.compute_w >= 0.0,
                format!("{epath}/comm_w"),
                "payload powers must be nonnegative",
            )?;
            check(entry.start_hour >= prev_end, format!("{epath}/start_hour"), "payload windows overlap")?;
            prev_end = entry.end_hour;
        }
        Ok(node)
    }
}

impl RawLink {
    fn normalize(self, index: usize, steps: usize) -> Result<WptLink, ScenarioError> {
        let path = format!("/links/{index}");
        let from_id = self
            .from
            .or(self.from_id)
            .ok_or_else(|| invalid(format!("{path}/from"), "missing link origin id"))?;
        let to_id = self
            .to
            .or(self.to_id)
            .ok_or_else(|| invalid(format!("{path}/to"), "missing link destination id"))?;
        let (wavelength, dc2c, c2dc, aperture) = match self.modality {
            Modality::Rf => (
                DEFAULT_RF_WAVELENGTH_M,
                DEFAULT_RF_DC_TO_CARRIER,
                DEFAULT_RF_CARRIER_TO_DC,
                1.0,
            ),
            Modality::Optical => (
                DEFAULT_OPTICAL_WAVELENGTH_M,
                DEFAULT_OPTICAL_DC_TO_CARRIER,
                DEFAULT_OPTICAL_CARRIER_TO_DC,
                DEFAULT_OPTICAL_POINTING_EFFICIENCY,
            ),
        };
        let link = WptLink {
            from_id,
            to_id,
            modality: self.modality,
            tx_aperture_m: self.tx_aperture_m,
            rx_aperture_m: self.rx_aperture_m,
            wavelength_m: self.wavelength_m.unwrap_or(wavelength),
            dc_to_carrier_eff: self.dc_to_carrier_eff.unwrap_or(dc2c),
            carrier_to_dc_eff: self.carrier_to_dc_eff.unwrap_or(c2dc),
            aperture_efficiency: self.aperture_efficiency.unwrap_or(aperture),
            max_tx_power_w: self.max_tx_power_w,
            rx_power_density_limit_wm2: self
                .rx_power_density_limit_wm2
                .unwrap_or(DEFAULT_RX_POWER_DENSITY_LIMIT_WM2),
            ris_reflection_eff: self.ris_reflection_eff.unwrap_or(1.0),
            weather_ok: self.weather_ok,
        };
        check(link.wavelength_m > 0.0, format!("{path}/wavelength_m"), "must be positive")?;
        check(link.tx_aperture_m > 0.0, format!("{path}/tx_aperture_m"), "must be positive")?;
        check(link.rx_aperture_m > 0.0, format!("{path}/rx_aperture_m"), "must be positive")?;
        unit_interval(link.dc_to_carrier_eff, format!("{path}/dc_to_carrier_eff"), false)?;
        unit_interval(link.carrier_to_dc_eff, format!("{path}/carrier_to_dc_eff"), false)?;
        unit_interval(link.aperture_efficiency, format!("{path}/aperture_efficiency"), false)?;
        unit_interval(link.ris_reflection_eff, format!("{path}/ris_reflection_eff"), false)?;
        if link.modality == Modality::Rf {
            check(
                link.carrier_to_dc_eff <= MAX_RF_CARRIER_TO_DC + 1e-12,
                format!("{path}/carrier_to_dc_eff"),
                format!("RF carrier-to-DC efficiency is capped at {MAX_RF_CARRIER_TO_DC}"),
            )?;
        }
        check(link.max_tx_power_w >= 0.0, format!("{path}/max_tx_power_w"), "must be nonnegative")?;
        check(
            link.rx_power_density_limit_wm2 > 0.0,
            format!("{path}/rx_power_density_limit_wm2"),
            "must be positive",
        )?;
        check(
            link.weather_ok.is_empty() || link.weather_ok.len() == steps,
            format!("{path}/weather_ok"),
            format!("expected {steps} per-step entries, got {}", link.weather_ok.len()),
        )?;
        Ok(link)
    }
}

fn normalize(raw: RawScenario) -> Result<Scenario, ScenarioError> {
    check(
        raw.format_version == FORMAT_VERSION,
        "/format_version",
        format!("unsupported format_version {} (expected {FORMAT_VERSION})", raw.format_version),
    )?;
    check(raw.horizon_hours > 0.0, "/horizon_hours", "must be positive")?;
    check(raw.timestep_hours > 0.0, "/timestep_hours", "must be positive")?;
    let ratio = raw.horizon_hours / raw.timestep_hours;
    check(
        (ratio - ratio.round()).abs() < 1e-9 && ratio.round() >= 1.0,
        "/horizon_hours",
        format!(
            "horizon ({}) must be an integer multiple of timestep ({})",
            raw.horizon_hours, raw.timestep_hours
        ),
    )?;
    let steps = ratio.round() as usize;

    let environment = Environment {
        latitude_deg: raw.environment.latitude_deg,
        day_of_year: raw.environment.day_of_year,
        atmospheric_transmittance: raw
            .environment
            .atmospheric_transmittance
            .unwrap_or(solar::DEFAULT_TRANSMITTANCE),
        solar_constant_wm2: raw.environment.solar_constant_wm2.unwrap_or(solar::SOLAR_CONSTANT_WM2),
        wind_speed_ms: raw.environment.wind_speed_ms,
    };
    check(
        (-90.0..=90.0).contains(&environment.latitude_deg),
        "/environment/latitude_deg",
        "latitude must lie in [-90, 90]",
    )?;
    check(
        (1..=365).contains(&environment.day_of_year),
        "/environment/day_of_year",
        "day_of_year must lie in [1, 365]",
    )?;
    unit_interval(environment.atmospheric_transmittance, "/environment/atmospheric_transmittance".into(), false)?;
    check(environment.solar_constant_wm2 > 0.0, "/environment/solar_constant_wm2", "must be positive")?;
    check(
        environment.wind_speed_ms.is_empty() || environment.wind_speed_ms.len() == steps,
        "/environment/wind_speed_ms",
        format!("expected {steps} per-step entries, got {}", environment.wind_speed_ms.len()),
    )?;
    for (k, w) in environment.wind_speed_ms.iter().enumerate() {
        check(*w >= 0.0, format!("/environment/wind_speed_ms/{k}"), "wind speed must be nonnegative")?;
    }

    let mut nodes = Vec::with_capacity(raw.nodes.len());
    for (i, raw_node) in raw.nodes.into_iter().enumerate() {
        nodes.push(raw_node.normalize(i, raw.horizon_hours)?);
    }
    for (i, node) in nodes.iter().enumerate() {
        if nodes.iter().skip(i + 1).any(|other| other.id == node.id) {
            return Err(invalid(format!("/nodes/{i}/id"), format!("duplicate node id \"{}\"", node.id)));
        }
    }

    let mut ground_stations = Vec::with_capacity(raw.ground_stations.len());
    for (i, raw_gs) in raw.ground_stations.into_iter().enumerate() {
        let path = format!("/ground_stations/{i}");
        check(raw_gs.max_supply_power_w >= 0.0, format!("{path}/max_supply_power_w"), "must be nonnegative")?;
        check(!raw_gs.id.is_empty(), format!("{path}/id"), "id must be nonempty")?;
        if nodes.iter().any(|n| n.id == raw_gs.id) || ground_stations.iter().any(|g: &GroundStation| g.id == raw_gs.id)
        {
            return Err(invalid(format!("{path}/id"), format!("duplicate id \"{}\"", raw_gs.id)));
        }
        ground_stations.push(GroundStation {
            id: raw_gs.id,
            position_km: raw_gs.position_km,
            max_supply_power_w: raw_gs.max_supply_power_w,
            modality: raw_gs.modality.unwrap_or(Modality::Rf),
        });
    }

    let mut links = Vec::with_capacity(raw.links.len());
    for (i, raw_link) in raw.links.into_iter().enumerate() {
        links.push(raw_link.normalize(i, steps)?);
    }
    let scenario = Scenario {
        format_version: raw.format_version,
        nodes,
        links,
        ground_stations,
        environment,
        horizon_hours: raw.horizon_hours,
        timestep_hours: raw.timestep_hours,
    };
    for (i, link) in scenario.links.iter().enumerate() {
        for (field, id) in [("from", &link.from_id), ("to", &link.to_id)] {
            if scenario.node_index(id).is_none() && !scenario.is_ground_id(id) {
                return Err(ScenarioError::DanglingReference {
                    path: format!("/links/{i}/{field}"),
                    id: id.clone(),
                });
            }
        }
    }
    Ok(scenario)
}

/// Parses and validates a scenario from TOML text.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    normalize(raw)
}

/// Loads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
    parse_scenario(&text)
}

/// Mid-range single-node presets for the three published platform classes.
pub fn preset(class: SizeClass) -> HapNode {
    let (id, pv_area, mass, lift_to_drag, airspeed, storage_mass, payload, receiver_area) = match class {
        SizeClass::Small => (
            "small_hap",
            7.5,
            60.0,
            35.0,
            18.0,
            10.0,
            vec![PayloadEntry { start_hour: 0.0, end_hour: 24.0, comm_w: 30.0, sensing_w: 0.0, compute_w: 15.0 }],
            1.0,
        ),
        SizeClass::Medium => (
            "medium_hap",
            40.0,
            400.0,
            25.0,
            22.0,
            100.0,
            vec![PayloadEntry { start_hour: 0.0, end_hour: 24.0, comm_w: 1500.0, sensing_w: 0.0, compute_w: 100.0 }],
            2.0,
        ),
        SizeClass::Large => (
            "large_hap",
            85.0,
            1300.0,
            25.0,
            22.0,
            250.0,
            vec![
                PayloadEntry { start_hour: 0.0, end_hour: 11.0, comm_w: 4000.0, sensing_w: 0.0, compute_w: 250.0 },
                PayloadEntry { start_hour: 11.0, end_hour: 14.0, comm_w: 4000.0, sensing_w: 1500.0, compute_w: 250.0 },
                PayloadEntry { start_hour: 14.0, end_hour: 24.0, comm_w: 4000.0, sensing_w: 0.0, compute_w: 250.0 },
            ],
            4.0,
        ),
        SizeClass::Custom => (
            "custom_hap",
            50.0,
            40.0,
            25.0,
            25.0,
            10.0,
            vec![],
            1.0,
        ),
    };
    let capacity = 700.0 * storage_mass;
    HapNode {
        id: id.to_string(),
        class,
        pv_area_m2: pv_area,
        system_efficiency: DEFAULT_SYSTEM_EFFICIENCY,
        mass_kg: mass,
        lift_to_drag,
        propulsive_efficiency: DEFAULT_PROPULSIVE_EFFICIENCY,
        airspeed_ms: airspeed,
        storage: StorageUnit {
            technology: StorageTechnology::SecondaryBattery,
            specific_energy_wh_per_kg: 700.0,
            storage_mass_kg: storage_mass,
            charge_efficiency: DEFAULT_BATTERY_EFFICIENCY,
            discharge_efficiency: DEFAULT_BATTERY_EFFICIENCY,
            soc_floor: DEFAULT_SOC_FLOOR,
            max_charge_power_w: DEFAULT_C_RATE * capacity,
            max_discharge_power_w: DEFAULT_C_RATE * capacity,
        },
        payload_schedule: PayloadSchedule { entries: payload },
        position_km: [0.0, 0.0, 20.0],
        receiver_area_m2: receiver_area,
        initial_soc: 0.5,
    }
}

/// Writes a runnable single-node scenario built from a preset.
pub fn scaffold_scenario(class: SizeClass) -> Scenario {
    let node = preset(class);
    let supply = 4.0 * (node.mass_kg * crate::loads::GRAVITY_MS2 * node.airspeed_ms
        / (node.lift_to_drag * node.propulsive_efficiency)
        + node
            .payload_schedule
            .entries
            .iter()
            .map(|e| e.comm_w + e.sensing_w + e.compute_w)
            .fold(0.0, f64::max));
    Scenario {
        format_version: FORMAT_VERSION,
        nodes: vec![node],
        links: vec![],
        ground_stations: vec![GroundStation {
            id: "gs1".to_string(),
            position_km: [0.0, 0.0, 0.0],
            max_supply_power_w: supply,
            modality: Modality::Rf,
        }],
        environment: Environment {
            latitude_deg: 0.0,
            day_of_year: 80,
            atmospheric_transmittance: solar::DEFAULT_TRANSMITTANCE,
            solar_constant_wm2: solar::SOLAR_CONSTANT_WM2,
            wind_speed_ms: vec![],
        },
        horizon_hours: 24.0,
        timestep_hours: 1.0,
    }
}
