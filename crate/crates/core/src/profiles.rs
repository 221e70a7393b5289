//! Assembles the physical profiles a dispatch run needs: per-step generation,
//! load, link efficiencies/caps and the shared ground-supply budget.

use crate::loads::{self, LoadProfile};
use crate::scenario::Scenario;
use crate::solar::{self, GenerationProfile};
use crate::wptlink::{self, LinkBudget};

#[derive(Debug, Clone, PartialEq)]
pub struct StorageParams {
    pub capacity_wh: f64,
    pub floor_wh: f64,
    pub initial_wh: f64,
    pub charge_eff: f64,
    pub discharge_eff: f64,
    pub max_charge_wh: f64,
    pub max_discharge_wh: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    pub from: usize,
    pub to: usize,
    /// End-to-end efficiency per step (0 when weather-blocked).
    pub eff: Vec<f64>,
    /// Cap on energy injected by the sender per step, Wh.
    pub cap_sent_wh: Vec<f64>,
}

/// Self-contained dispatch problem: everything the LP, the greedy baseline
/// and the oracle need, with node-to-node links only.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchInstance {
    pub node_ids: Vec<String>,
    pub steps: usize,
    pub timestep_hours: f64,
    pub storage: Vec<StorageParams>,
    pub gen_wh: Vec<Vec<f64>>,
    pub load_wh: Vec<Vec<f64>>,
    pub links: Vec<LinkParams>,
    /// Total delivered ground supply available per step, Wh.
    pub ground_cap_wh: Vec<f64>,
}

impl DispatchInstance {
    pub fn num_nodes(&self) -> usize {
        self.node_ids.len()
    }

    /// Storage loss plus link loss of a candidate flow set, Wh.
    pub fn losses_wh(&self, charge: &[Vec<f64>], discharge: &[Vec<f64>], transfer: &[Vec<f64>]) -> f64 {
        let mut loss = 0.0;
        for (i, unit) in self.storage.iter().enumerate() {
            for t in 0..self.steps {
                loss += (1.0 - unit.charge_eff) * charge[i][t];
                loss += (1.0 - unit.discharge_eff) * discharge[i][t];
            }
        }
        for (l, link) in self.links.iter().enumerate() {
            for (eff, sent) in link.eff.iter().zip(&transfer[l]) {
                loss += (1.0 - eff) * sent;
            }
        }
        loss
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioProfiles {
    pub generation: Vec<GenerationProfile>,
    pub load: Vec<LoadProfile>,
    /// Per link, per step.
    pub link_budgets: Vec<Vec<LinkBudget>>,
    pub instance: DispatchInstance,
}

#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error(transparent)]
    Load(#[from] loads::LoadError),
    #[error(transparent)]
    Link(#[from] wptlink::LinkError),
}

/// Builds all per-step profiles for a scenario.
///
/// Links between two nodes become dispatch transfer channels. Links that
/// touch a ground station are kept for budget reporting but do not add
/// transfer variables; ground supply is modeled by the shared per-step cap.
pub fn build_profiles(scenario: &Scenario) -> Result<ScenarioProfiles, ProfileError> {
    let steps = scenario.steps();
    let dt = scenario.timestep_hours;

    let generation: Vec<GenerationProfile> = scenario
        .nodes
        .iter()
        .map(|n| solar::generation_profile(n, &scenario.environment, scenario.horizon_hours, dt))
        .collect();
    let load: Vec<LoadProfile> = scenario
        .nodes
        .iter()
        .map(|n| loads::load_profile(n, &scenario.environment, scenario.horizon_hours, dt))
        .collect::<Result<_, _>>()?;

    let mut link_budgets = Vec::with_capacity(scenario.links.len());
    let mut links = Vec::new();
    for link in &scenario.links {
        let mut per_step = Vec::with_capacity(steps);
        for t in 0..steps {
            per_step.push(wptlink::scenario_link_budget(scenario, link, t)?);
        }
        if let (Some(from), Some(to)) = (scenario.node_index(&link.from_id), scenario.node_index(&link.to_id)) {
            let eff: Vec<f64> = per_step.iter().map(|b| b.end_to_end_eff).collect();
            // Delivered energy is capped by the budget; the sender-side cap
            // is that ceiling divided back through the chain.
            let cap_sent_wh: Vec<f64> = per_step
                .iter()
                .map(|b| {
                    if b.end_to_end_eff > 0.0 {
                        b.max_deliverable_power_w * dt / b.end_to_end_eff
                    } else {
                        0.0
                    }
                })
                .collect();
            links.push(LinkParams { from, to, eff, cap_sent_wh });
        }
        link_budgets.push(per_step);
    }

    let ground_total_w: f64 = scenario.ground_stations.iter().map(|g| g.max_supply_power_w).sum();
    let instance = DispatchInstance {
        node_ids: scenario.nodes.iter().map(|n| n.id.clone()).collect(),
        steps,
        timestep_hours: dt,
        storage: scenario
            .nodes
            .iter()
            .map(|n| {
                let cap = n.storage.capacity_wh();
                StorageParams {
                    capacity_wh: cap,
                    floor_wh: n.storage.floor_wh(),
                    initial_wh: n.initial_soc * cap,
                    charge_eff: n.storage.charge_efficiency,
                    discharge_eff: n.storage.discharge_efficiency,
                    max_charge_wh: n.storage.max_charge_power_w * dt,
                    max_discharge_wh: n.storage.max_discharge_power_w * dt,
                }
            })
            .collect(),
        gen_wh: generation.iter().map(|g| g.power_w.iter().map(|p| p * dt).collect()).collect(),
        load_wh: load
            .iter()
            .map(|l| l.components.iter().map(|c| c.total_w() * dt).collect())
            .collect(),
        links,
        ground_cap_wh: vec![ground_total_w * dt; steps],
    };

    Ok(ScenarioProfiles { generation, load, link_budgets, instance })
}
