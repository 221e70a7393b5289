//! Simulation and dispatch-optimization toolkit for a stratospheric energy
//! grid: solar-powered high-altitude platforms exchanging energy over
//! wireless power links, with cooperative LP scheduling against an
//! independent-operation baseline.

pub mod dispatch;
pub mod engine;
pub mod loads;
pub mod profiles;
pub mod scenario;
pub mod solar;
pub mod storage;
pub mod testgen;
pub mod wptlink;

pub use dispatch::{
    brute_force_oracle, build_lp, independent_baseline, repair_cyclic, solve_lp, DispatchError,
    DispatchMode, DispatchPlan,
};
pub use engine::{
    compare, report_text, simulate, simulate_instance, write_csv, DispatchReport, EngineError, SimulationResult,
};
pub use profiles::{build_profiles, DispatchInstance, ScenarioProfiles};
pub use scenario::{load_scenario, parse_scenario, preset, scaffold_scenario, Scenario, ScenarioError, SizeClass};
