//! `stratgrid`: run scenarios, scaffold presets, and self-verify.
//!
//! Diagnostics go to standard error, data files to the output directory, and
//! the summary table to standard output. Every error category maps to a
//! distinct exit code (documented in the README).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use stratgrid_core::dispatch::simplex::SolverOptions;
use stratgrid_core::dispatch::{self, DispatchError};
use stratgrid_core::engine::{self, EngineError};
use stratgrid_core::scenario::{self, ScenarioError, SizeClass};
use stratgrid_core::{profiles, wptlink};

mod verify;

const EXIT_PARSE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_DANGLING: u8 = 4;
const EXIT_INFEASIBLE: u8 = 5;
const EXIT_IO: u8 = 6;
const EXIT_CONSERVATION: u8 = 7;
const EXIT_VERIFY: u8 = 8;
const EXIT_INTERNAL: u8 = 1;

#[derive(Parser)]
#[command(name = "stratgrid", version, about = "Stratospheric energy grid simulator and dispatcher")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Cooperative,
    Independent,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Small,
    Medium,
    Large,
}

impl From<ClassArg> for SizeClass {
    fn from(value: ClassArg) -> Self {
        match value {
            ClassArg::Small => SizeClass::Small,
            ClassArg::Medium => SizeClass::Medium,
            ClassArg::Large => SizeClass::Large,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write CSV series plus a summary report.
    Run {
        /// Scenario file (TOML).
        #[arg(long)]
        scenario: PathBuf,
        /// Dispatch mode to run.
        #[arg(long, value_enum, default_value = "both")]
        mode: ModeArg,
        /// Output directory for CSV and report files.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Seed for randomized self-checks embedded in tooling.
        #[arg(long, default_value = "0")]
        seed: u64,
        /// Also write per-link budget series.
        #[arg(long)]
        emit_link_budgets: bool,
    },
    /// Write a single-node scenario file built from a platform-class preset.
    Scaffold {
        #[arg(long, value_enum)]
        class: ClassArg,
        #[arg(long)]
        path: PathBuf,
    },
    /// Run the built-in verification suite and print a pass/fail table.
    Verify {
        #[arg(long, default_value = "42")]
        seed: u64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("STRATGRID_LOG")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { scenario, mode, out, seed, emit_link_budgets } => {
            run(&scenario, mode, &out, seed, emit_link_budgets)
        }
        Command::Scaffold { class, path } => scaffold(class.into(), &path),
        Command::Verify { seed } => verify::run(seed),
    };
    match code {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.exit)
        }
    }
}

struct Failure {
    exit: u8,
    message: String,
}

impl Failure {
    fn new(exit: u8, message: impl Into<String>) -> Self {
        Failure { exit, message: message.into() }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        let exit = match &e {
            ScenarioError::Io { .. } => EXIT_IO,
            ScenarioError::Parse(_) => EXIT_PARSE,
            ScenarioError::Validation { .. } => EXIT_VALIDATION,
            ScenarioError::DanglingReference { .. } => EXIT_DANGLING,
        };
        Failure::new(exit, e.to_string())
    }
}

impl From<DispatchError> for Failure {
    fn from(e: DispatchError) -> Self {
        let exit = match &e {
            DispatchError::InfeasibleByConstruction { .. } | DispatchError::Infeasible { .. } => EXIT_INFEASIBLE,
            _ => EXIT_INTERNAL,
        };
        Failure::new(exit, e.to_string())
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let exit = match &e {
            EngineError::ConservationViolation { .. }
            | EngineError::PlanMismatch(_)
            | EngineError::ScenarioMismatch(_)
            | EngineError::StorageReplay { .. } => EXIT_CONSERVATION,
            EngineError::Profiles(_) => EXIT_VALIDATION,
        };
        Failure::new(exit, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(EXIT_IO, e.to_string())
    }
}

/// The solver tolerance test hook; production runs use the built-in default.
fn solver_options() -> SolverOptions {
    let mut options = SolverOptions::default();
    if let Ok(raw) = std::env::var("STRATGRID_SOLVER_TOL") {
        if let Ok(tol) = raw.parse::<f64>() {
            log::warn!("solver tolerance overridden to {tol} via STRATGRID_SOLVER_TOL");
            options.opt_tol = tol;
        }
    }
    options
}

fn run(scenario_path: &Path, mode: ModeArg, out: &Path, _seed: u64, emit_link_budgets: bool) -> Result<(), Failure> {
    let scenario = scenario::load_scenario(scenario_path)?;
    let profiles = profiles::build_profiles(&scenario).map_err(EngineError::from)?;
    std::fs::create_dir_all(out)?;
    let options = solver_options();

    let mut cooperative = None;
    let mut independent = None;

    if matches!(mode, ModeArg::Cooperative | ModeArg::Both) {
        let plan = dispatch::solve_lp(&profiles.instance, options)?;
        log::info!(
            "cooperative solve: {} pivots, dual infeasibility {:.3e}",
            plan.solver.map(|s| s.iterations).unwrap_or(0),
            plan.solver.map(|s| s.max_dual_infeasibility).unwrap_or(0.0)
        );
        let result = engine::simulate_instance(&profiles.instance, &plan)?;
        std::fs::write(out.join("cooperative.csv"), engine::write_csv(&result))?;
        println!("cooperative objective : {:>14.3} Wh", result.objective_wh);
        cooperative = Some(result);
    }
    if matches!(mode, ModeArg::Independent | ModeArg::Both) {
        let greedy = dispatch::independent_baseline(&profiles.instance);
        let plan = dispatch::repair_cyclic(&profiles.instance, &greedy);
        if plan.cyclic_shortfall_wh > 1e-6 {
            log::warn!("cyclic repair left a shortfall of {:.3} Wh", plan.cyclic_shortfall_wh);
        }
        let result = engine::simulate_instance(&profiles.instance, &plan)?;
        std::fs::write(out.join("independent.csv"), engine::write_csv(&result))?;
        println!("independent objective : {:>14.3} Wh", result.objective_wh);
        independent = Some(result);
    }
    if let (Some(coop), Some(indep)) = (&cooperative, &independent) {
        let report = engine::compare(coop, indep)?;
        let text = engine::report_text(&report);
        std::fs::write(out.join("report.txt"), &text)?;
        print!("{text}");
    }

    if emit_link_budgets {
        let mut csv = String::from("from,to,step,distance_km,regime,geometric_eff,end_to_end_eff,max_deliverable_w\n");
        for (link, budgets) in scenario.links.iter().zip(&profiles.link_budgets) {
            for (t, b) in budgets.iter().enumerate() {
                use std::fmt::Write as _;
                let _ = writeln!(
                    csv,
                    "{},{},{},{:.6},{},{:.9},{:.9},{:.6}",
                    link.from_id,
                    link.to_id,
                    t,
                    b.distance_km,
                    match b.regime {
                        wptlink::Regime::Fresnel => "fresnel",
                        wptlink::Regime::FarField => "far_field",
                    },
                    b.geometric_eff,
                    b.end_to_end_eff,
                    b.max_deliverable_power_w,
                );
            }
        }
        std::fs::write(out.join("link_budgets.csv"), csv)?;
    }
    Ok(())
}

fn scaffold(class: SizeClass, path: &Path) -> Result<(), Failure> {
    let scenario = scenario::scaffold_scenario(class);
    std::fs::write(path, scenario.to_toml())?;
    println!("wrote {} scenario to {}", scenario.nodes[0].id, path.display());
    Ok(())
}
