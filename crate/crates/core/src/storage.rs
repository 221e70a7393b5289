//! Battery / regenerative-fuel-cell state-of-charge dynamics.
//!
//! Convention: `charge_wh` and `discharge_wh` are bus-side energies. Charging
//! banks `charge_eff * charge_wh`; delivering `discharge_wh` to the bus drains
//! `discharge_wh / discharge_eff` from the store.

use crate::scenario::StorageUnit;

#[derive(Debug, Clone, PartialEq)]
pub struct SocTrajectory {
    pub node_id: String,
    /// Stored energy per step boundary, Wh; `energy_wh[0]` is the initial state.
    pub energy_wh: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StorageError {
    #[error("stored energy {energy_wh} Wh outside [{floor_wh}, {capacity_wh}] Wh")]
    Bounds { energy_wh: f64, floor_wh: f64, capacity_wh: f64 },
    #[error("charge ({charge_wh} Wh) and discharge ({discharge_wh} Wh) both nonzero in one step")]
    SimultaneousChargeDischarge { charge_wh: f64, discharge_wh: f64 },
    #[error("{side} of {got_wh} Wh exceeds limit {limit_wh} Wh for this timestep")]
    PowerLimit { side: &'static str, got_wh: f64, limit_wh: f64 },
    #[error("charge and discharge energies must be nonnegative")]
    NegativeInput,
}

impl StorageUnit {
    /// Nameplate capacity, Wh.
    pub fn capacity_wh(&self) -> f64 {
        self.specific_energy_wh_per_kg * self.storage_mass_kg
    }

    /// Minimum allowed stored energy, Wh.
    pub fn floor_wh(&self) -> f64 {
        self.soc_floor * self.capacity_wh()
    }
}

/// Advances the stored energy by one step.
///
/// Bounds are checked on the result; callers planning trajectories must keep
/// every intermediate state within `[floor, capacity]`.
pub fn step(
    unit: &StorageUnit,
    energy_wh: f64,
    charge_wh: f64,
    discharge_wh: f64,
    timestep_hours: f64,
) -> Result<f64, StorageError> {
    if charge_wh < 0.0 || discharge_wh < 0.0 {
        return Err(StorageError::NegativeInput);
    }
    let tol = 1e-9 * unit.capacity_wh().max(1.0);
    if charge_wh > tol && discharge_wh > tol {
        return Err(StorageError::SimultaneousChargeDischarge { charge_wh, discharge_wh });
    }
    let charge_limit = unit.max_charge_power_w * timestep_hours;
    if charge_wh > charge_limit + tol {
        return Err(StorageError::PowerLimit { side: "charge", got_wh: charge_wh, limit_wh: charge_limit });
    }
    let discharge_limit = unit.max_discharge_power_w * timestep_hours;
    if discharge_wh > discharge_limit + tol {
        return Err(StorageError::PowerLimit {
            side: "discharge",
            got_wh: discharge_wh,
            limit_wh: discharge_limit,
        });
    }
    let next = energy_wh + unit.charge_efficiency * charge_wh - discharge_wh / unit.discharge_efficiency;
    let (floor, cap) = (unit.floor_wh(), unit.capacity_wh());
    if next < floor - tol || next > cap + tol {
        return Err(StorageError::Bounds { energy_wh: next, floor_wh: floor, capacity_wh: cap });
    }
    Ok(next.clamp(floor, cap))
}

/// Bus-side energy available above the SOC floor, Wh.
pub fn usable_energy(unit: &StorageUnit, energy_wh: f64) -> f64 {
    (unit.discharge_efficiency * (energy_wh - unit.floor_wh())).max(0.0)
}
