//! Exhaustive verification oracle for tiny dispatch instances.
//!
//! Enumerates every storage and transfer decision on a `grid_wh` lattice with
//! an exact integer state space: stored energy is tracked in units of
//! `grid_wh / 1000`, so charge efficiencies with at most three decimals map
//! lattice charges onto integer state moves with no rounding. Ground intake
//! and curtailment are forced per step by the balance residuals, which keeps
//! the enumeration over the genuinely free decisions only. Charge and
//! discharge are mutually exclusive per step, matching the storage contract;
//! pricing conversion losses makes that restriction value-neutral relative
//! to the LP relaxation.

use std::collections::HashMap;

use super::DispatchError;
use crate::profiles::DispatchInstance;

pub const MAX_NODES: usize = 2;
pub const MAX_STEPS: usize = 4;
pub const MAX_LINKS: usize = 1;
const MAX_OPTIONS_PER_DECISION: usize = 120;
const MAX_STATES: usize = 4_000_000;

/// Subdivision of the decision lattice used for the exact state space.
const UNITS_PER_GRID: f64 = 1000.0;

#[derive(Debug, Clone, Copy)]
struct NodeMove {
    charge_wh: f64,
    discharge_wh: f64,
    /// Stored-energy change in integer units.
    delta_units: i64,
    cost: f64,
}

fn to_units(value_wh: f64, unit_wh: f64, what: &str) -> Result<i64, DispatchError> {
    let units = value_wh / unit_wh;
    let rounded = units.round();
    if (units - rounded).abs() > 1e-6 {
        return Err(DispatchError::TooLarge(format!(
            "{what} = {value_wh} Wh is not representable on the {unit_wh} Wh state lattice"
        )));
    }
    Ok(rounded as i64)
}

/// Minimal schedulable energy over the quantized decision space.
pub fn solve(instance: &DispatchInstance, grid_wh: f64) -> Result<f64, DispatchError> {
    if grid_wh <= 0.0 {
        return Err(DispatchError::TooLarge("grid_wh must be positive".into()));
    }
    let n = instance.num_nodes();
    if n == 0 || n > MAX_NODES {
        return Err(DispatchError::TooLarge(format!("{n} nodes (oracle cap {MAX_NODES})")));
    }
    if instance.steps == 0 || instance.steps > MAX_STEPS {
        return Err(DispatchError::TooLarge(format!("{} steps (oracle cap {MAX_STEPS})", instance.steps)));
    }
    if instance.links.len() > MAX_LINKS {
        return Err(DispatchError::TooLarge(format!("{} links (oracle cap {MAX_LINKS})", instance.links.len())));
    }

    let unit_wh = grid_wh / UNITS_PER_GRID;
    let mut floors = [0i64; MAX_NODES];
    let mut caps = [0i64; MAX_NODES];
    let mut initial = [0i64; MAX_NODES];
    let mut moves: Vec<Vec<NodeMove>> = Vec::with_capacity(n);
    for (i, unit) in instance.storage.iter().enumerate() {
        // Charge efficiency moves state by eff_c * k * grid; with three-
        // decimal efficiencies this is an exact unit count.
        let eff_scaled = unit.charge_eff * UNITS_PER_GRID;
        if (eff_scaled - eff_scaled.round()).abs() > 1e-9 {
            return Err(DispatchError::TooLarge(format!(
                "charge efficiency {} needs more than 3 decimals",
                unit.charge_eff
            )));
        }
        floors[i] = to_units(unit.floor_wh, unit_wh, "soc floor")?;
        caps[i] = to_units(unit.capacity_wh, unit_wh, "capacity")?;
        initial[i] = to_units(unit.initial_wh, unit_wh, "initial energy")?;

        let charge_steps = (unit.max_charge_wh / grid_wh + 1e-9).floor() as usize;
        let discharge_steps = (unit.max_discharge_wh / grid_wh + 1e-9).floor() as usize;
        if charge_steps + discharge_steps + 1 > MAX_OPTIONS_PER_DECISION {
            return Err(DispatchError::TooLarge(format!(
                "{} lattice options for one storage decision",
                charge_steps + discharge_steps + 1
            )));
        }
        let mut list = Vec::with_capacity(charge_steps + discharge_steps + 1);
        list.push(NodeMove { charge_wh: 0.0, discharge_wh: 0.0, delta_units: 0, cost: 0.0 });
        for k in 1..=charge_steps {
            let ch = k as f64 * grid_wh;
            list.push(NodeMove {
                charge_wh: ch,
                discharge_wh: 0.0,
                delta_units: (k as i64) * eff_scaled.round() as i64,
                cost: (1.0 - unit.charge_eff) * ch,
            });
        }
        for k in 1..=discharge_steps {
            let dis = k as f64 * grid_wh;
            list.push(NodeMove {
                charge_wh: 0.0,
                discharge_wh: dis,
                delta_units: -(k as i64) * UNITS_PER_GRID as i64,
                cost: (1.0 - unit.discharge_eff) * dis,
            });
        }
        moves.push(list);
    }

    // Transfer options per step (link caps vary with weather).
    let mut transfer_options: Vec<Vec<Vec<f64>>> = Vec::new();
    for link in &instance.links {
        let mut per_step = Vec::with_capacity(instance.steps);
        for t in 0..instance.steps {
            let k_max = (link.cap_sent_wh[t] / grid_wh + 1e-9).floor() as usize;
            if k_max + 1 > MAX_OPTIONS_PER_DECISION {
                return Err(DispatchError::TooLarge(format!("{} transfer lattice options", k_max + 1)));
            }
            per_step.push((0..=k_max).map(|k| k as f64 * grid_wh).collect());
        }
        transfer_options.push(per_step);
    }

    let mut states: HashMap<[i64; MAX_NODES], f64> = HashMap::new();
    states.insert(initial, 0.0);

    for t in 0..instance.steps {
        let mut next: HashMap<[i64; MAX_NODES], f64> = HashMap::new();
        let transfers_t: Vec<&[f64]> = transfer_options.iter().map(|o| o[t].as_slice()).collect();
        for (state, cost) in &states {
            enumerate_step(
                instance,
                t,
                state,
                *cost,
                &moves,
                &transfers_t,
                &floors,
                &caps,
                &mut next,
            )?;
            if next.len() > MAX_STATES {
                return Err(DispatchError::TooLarge(format!("state space exceeded {MAX_STATES}")));
            }
        }
        if next.is_empty() {
            return Err(DispatchError::Infeasible {
                detail: format!("no lattice decision balances step {t}"),
            });
        }
        states = next;
    }

    let best = states
        .iter()
        .filter(|(state, _)| (0..n).all(|i| state[i] >= initial[i]))
        .map(|(_, cost)| *cost)
        .fold(f64::INFINITY, f64::min);
    if best.is_finite() {
        Ok(best)
    } else {
        Err(DispatchError::Infeasible { detail: "no lattice plan restores the cyclic end state".into() })
    }
}

#[allow(clippy::too_many_arguments)]
fn enumerate_step(
    instance: &DispatchInstance,
    t: usize,
    state: &[i64; MAX_NODES],
    cost_so_far: f64,
    moves: &[Vec<NodeMove>],
    transfers_t: &[&[f64]],
    floors: &[i64; MAX_NODES],
    caps: &[i64; MAX_NODES],
    next: &mut HashMap<[i64; MAX_NODES], f64>,
) -> Result<(), DispatchError> {
    let n = instance.num_nodes();
    let ground_cap = instance.ground_cap_wh[t];

    let moves_b: &[NodeMove] = if n > 1 {
        &moves[1]
    } else {
        &[NodeMove { charge_wh: 0.0, discharge_wh: 0.0, delta_units: 0, cost: 0.0 }]
    };
    let transfers: &[f64] = if transfers_t.is_empty() { &[0.0] } else { transfers_t[0] };

    for move_a in &moves[0] {
        let e_a = state[0] + move_a.delta_units;
        if e_a < floors[0] || e_a > caps[0] {
            continue;
        }
        for move_b in moves_b {
            let e_b = if n > 1 {
                let e = state[1] + move_b.delta_units;
                if e < floors[1] || e > caps[1] {
                    continue;
                }
                e
            } else {
                0
            };
            for &x in transfers {
                let mut residual = [0.0f64; MAX_NODES];
                for (i, r) in residual.iter_mut().enumerate().take(n) {
                    let mv = if i == 0 { move_a } else { move_b };
                    *r = instance.gen_wh[i][t] - instance.load_wh[i][t]
                        + instance.storage[i].discharge_eff * mv.discharge_wh
                        - mv.charge_wh;
                }
                let mut link_cost = 0.0;
                if let Some(link) = instance.links.first() {
                    residual[link.from] -= x;
                    residual[link.to] += link.eff[t] * x;
                    link_cost = (1.0 - link.eff[t]) * x;
                }
                let mut ground = 0.0;
                let mut curtail = 0.0;
                for r in residual.iter().take(n) {
                    if *r >= 0.0 {
                        curtail += r;
                    } else {
                        ground -= r;
                    }
                }
                if ground > ground_cap + 1e-9 {
                    continue;
                }
                let cost =
                    cost_so_far + ground + curtail + move_a.cost + move_b.cost + link_cost;
                let mut key = [0i64; MAX_NODES];
                key[0] = e_a;
                if n > 1 {
                    key[1] = e_b;
                }
                next.entry(key)
                    .and_modify(|c| {
                        if cost < *c {
                            *c = cost;
                        }
                    })
                    .or_insert(cost);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispatch::{solve_lp, DispatchError};
    use crate::dispatch::simplex::SolverOptions;
    use crate::profiles::{DispatchInstance, LinkParams, StorageParams};

    fn storage(capacity: f64, initial: f64) -> StorageParams {
        StorageParams {
            capacity_wh: capacity,
            floor_wh: 0.2 * capacity,
            initial_wh: initial,
            charge_eff: 0.95,
            discharge_eff: 0.95,
            max_charge_wh: 200.0,
            max_discharge_wh: 200.0,
        }
    }

    #[test]
    fn null_instance_is_zero() {
        let instance = DispatchInstance {
            node_ids: vec!["a".into()],
            steps: 2,
            timestep_hours: 1.0,
            storage: vec![storage(500.0, 100.0)],
            gen_wh: vec![vec![0.0; 2]],
            load_wh: vec![vec![0.0; 2]],
            links: vec![],
            ground_cap_wh: vec![1000.0; 2],
        };
        assert_eq!(solve(&instance, 50.0).unwrap(), 0.0);
    }

    #[test]
    fn night_load_instance_matches_hand_count() {
        let instance = DispatchInstance {
            node_ids: vec!["a".into()],
            steps: 4,
            timestep_hours: 1.0,
            storage: vec![storage(500.0, 100.0)],
            gen_wh: vec![vec![0.0; 4]],
            load_wh: vec![vec![1000.0; 4]],
            links: vec![],
            ground_cap_wh: vec![5000.0; 4],
        };
        let oracle = solve(&instance, 50.0).unwrap();
        assert!((oracle - 4000.0).abs() < 1e-9, "oracle {oracle}");
        let lp = solve_lp(&instance, SolverOptions::default()).unwrap();
        assert!((lp.objective_wh - oracle).abs() < 1e-6);
    }

    #[test]
    fn two_node_transfer_agrees_with_lp_within_quantum() {
        let grid = 100.0;
        let instance = DispatchInstance {
            node_ids: vec!["donor".into(), "recipient".into()],
            steps: 2,
            timestep_hours: 1.0,
            storage: vec![storage(400.0, 80.0), storage(400.0, 80.0)],
            gen_wh: vec![vec![1000.0, 0.0], vec![0.0, 0.0]],
            load_wh: vec![vec![0.0, 0.0], vec![800.0, 0.0]],
            links: vec![LinkParams { from: 0, to: 1, eff: vec![0.8; 2], cap_sent_wh: vec![1000.0; 2] }],
            ground_cap_wh: vec![2000.0; 2],
        };
        let oracle = solve(&instance, grid).unwrap();
        let lp = solve_lp(&instance, SolverOptions::default()).unwrap().objective_wh;
        assert!(oracle >= lp - 1e-6);
        assert!(oracle - lp <= 2.0 * grid + 1e-6, "oracle {oracle} lp {lp}");
    }

    #[test]
    fn oversized_instance_rejected() {
        let instance = DispatchInstance {
            node_ids: (0..3).map(|i| format!("n{i}")).collect(),
            steps: 2,
            timestep_hours: 1.0,
            storage: vec![storage(400.0, 80.0), storage(400.0, 80.0), storage(400.0, 80.0)],
            gen_wh: vec![vec![0.0; 2]; 3],
            load_wh: vec![vec![0.0; 2]; 3],
            links: vec![],
            ground_cap_wh: vec![0.0; 2],
        };
        assert!(matches!(solve(&instance, 50.0), Err(DispatchError::TooLarge(_))));
    }
}
