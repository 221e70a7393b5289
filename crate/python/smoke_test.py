#!/usr/bin/env python3
"""Smoke test for the stratgrid_py extension module.

Builds the extension with cargo if needed, stages it under a local build
directory with the importable name, then exercises the calibration anchors,
routing, and the cooperative-vs-independent case-study comparison.

Usage: python3 python/smoke_test.py [--debug]
"""

import argparse
import pathlib
import shutil
import subprocess
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def stage_extension(profile: str) -> pathlib.Path:
    flags = [] if profile == "debug" else ["--release"]
    subprocess.run(
        ["cargo", "build", "-p", "stratgrid-py", *flags],
        cwd=ROOT,
        check=True,
    )
    built = ROOT / "target" / profile / "libstratgrid_py.so"
    if not built.exists():  # e.g. macOS
        built = ROOT / "target" / profile / "libstratgrid_py.dylib"
    stage = ROOT / "python" / "build"
    stage.mkdir(exist_ok=True)
    target = stage / "stratgrid_py.so"
    shutil.copy2(built, target)
    return stage


def approx(value, expected, tol):
    assert abs(value - expected) <= tol, f"{value} != {expected} (tol {tol})"


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--debug", action="store_true", help="use the debug build")
    args = parser.parse_args()
    stage = stage_extension("debug" if args.debug else "release")
    sys.path.insert(0, str(stage))

    import stratgrid_py as sg

    # Calibration anchors.
    approx(sg.fresnel_distance_km(10.0, 0.010), 20.0, 1e-9)
    approx(sg.fresnel_distance_km(15.0, 0.005), 90.0, 1e-9)
    approx(sg.optical_end_to_end_efficiency(8.6), 0.20, 0.005)
    approx(sg.station_keeping_power(40.0, 25.0, 25.0), 490.5, 1e-9)
    approx(sg.pv_power(50.0, 0.2, 1250.0), 12500.0, 1e-9)
    decl, _, zenith, cosz = sg.sun_state(0.0, 80, 12.0)
    assert abs(zenith) < 1.0 and cosz > 0.999, (decl, zenith)
    assert sg.irradiance(0.0, 80, 0.0) == 0.0

    # Geometric efficiency anchor and routing.
    approx(sg.rf_geometric_efficiency(10.0, 10.0, 0.01, 20.0), 0.1429, 1e-4)
    path, eff = sg.route_max_efficiency(
        [("a", "c", 0.5), ("a", "b", 0.8), ("b", "c", 0.7)], "a", "c"
    )
    assert path == ["a", "b", "c"] and abs(eff - 0.56) < 1e-12, (path, eff)

    # Case study: cooperative operation beats independent operation.
    scenario = sg.Scenario.load(str(ROOT / "scenarios" / "case_study.toml"))
    assert scenario.node_ids == ["hap1", "hap2", "hap3"]
    gen = scenario.generation_profile("hap1")
    assert len(gen) == 24 and max(gen) > 6000.0

    report = sg.run_dispatch(scenario)
    print(report)
    assert report.cooperative_objective_wh <= report.independent_objective_wh
    assert report.reduction_fraction > 0.10
    assert all(report.indep_needed_ground)
    hap2 = report.node_ids.index("hap2")
    assert report.coop_mean_soc_swing[hap2] > report.indep_mean_soc_swing[hap2]

    csv_text = sg.simulation_csv(scenario, "cooperative")
    assert csv_text.splitlines()[0].startswith("node_id,step,hour")
    assert len(csv_text.splitlines()) == 1 + 3 * 24

    # Presets round-trip through the scenario format.
    medium = sg.Scenario.preset("medium")
    reparsed = sg.Scenario.from_toml(medium.to_toml())
    assert reparsed.steps == 24

    print("smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
