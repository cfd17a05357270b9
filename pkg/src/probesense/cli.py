"""probesense command line: run simulations end-to-end, reproduce the phone
probing experiments, replay archives, and serve the gateway."""
from __future__ import annotations

import csv
import json
import sys
import threading
import time
from importlib import resources
from pathlib import Path

import click
import yaml

from .density import DensityConfig, read_density_series
from .gateway.app import create_app
from .gateway.hub import RealtimeHub
from .gateway.store import ConfigStore, Role
from .journey import DEFAULT_GAP_THRESHOLD_S
from .pipeline import (
    PipelineConfig,
    accuracy_report,
    compute_flows,
    replay_density,
    run_pipeline,
)
from .profiles import ScreenState, builtin_profile
from .sim import (
    DEFAULT_START_MS,
    Scenario,
    ScenarioError,
    SimulatedDevice,
    emit_experiment_report,
    load_scenario,
    run_scenario,
    write_experiment_csv,
)
from .core import MacAddress

EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    doc = yaml.safe_load(Path(path).read_text())
    return doc or {}


def _pipeline_config(cfg_file: dict, posting, sweep, expiry, gap) -> PipelineConfig:
    # precedence: flags > config file > defaults
    def pick(flag, key, default):
        if flag is not None:
            return flag
        return cfg_file.get(key, default)

    return PipelineConfig(
        posting_interval_s=pick(posting, "posting_interval_s", 30.0),
        density=DensityConfig(
            sweep_interval_s=pick(sweep, "sweep_interval_s", 60.0),
            expiry_window_s=pick(expiry, "expiry_window_s", 240.0),
        ),
        gap_threshold_s=pick(gap, "gap_threshold_s", DEFAULT_GAP_THRESHOLD_S),
    )


@click.group()
def main():
    """WiFi probe-request crowd analytics toolkit."""


@main.command()
@click.argument("scenario_path", required=False, type=click.Path(exists=True, dir_okay=False))
@click.option("--demo", is_flag=True, help="Use the bundled demo scenario.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--posting-interval", type=float, default=None)
@click.option("--sweep-interval", type=float, default=None)
@click.option("--expiry-window", type=float, default=None)
@click.option("--gap-threshold", type=float, default=None)
def simulate(scenario_path, demo, out_dir, seed, config_path,
             posting_interval, sweep_interval, expiry_window, gap_threshold):
    """Run a scenario through the full pipeline and write an accuracy report."""
    try:
        if demo:
            with resources.as_file(resources.files("probesense.data") / "demo.yaml") as p:
                scenario = load_scenario(p)
        elif scenario_path:
            scenario = load_scenario(scenario_path)
        else:
            raise ScenarioError("pass a scenario file or --demo")
        if seed is not None:
            scenario.seed = seed
        config = _pipeline_config(_load_config_file(config_path), posting_interval,
                                  sweep_interval, expiry_window, gap_threshold)
    except (ScenarioError, ValueError) as e:
        click.echo(f"validation error: {e}", err=True)
        sys.exit(EXIT_VALIDATION)

    try:
        out = Path(out_dir)
        data_root = out / "data"
        result = run_pipeline(scenario, data_root, config)

        rows = accuracy_report(result)
        with (out / "accuracy_report.csv").open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["ts", "scanner_id", "estimated", "true"])
            writer.writeheader()
            writer.writerows(rows)

        end_ms = scenario.start_time_ms + round(scenario.duration_s * 1000) + 1
        matrix = compute_flows(data_root, scenario.start_time_ms, end_ms, config.gap_threshold_s)
        truth_matrix = result.truth.transition_matrix(dict(
            (zone, scanner) for scanner, zone in scenario.scanners))
        flow_report = {
            "estimated": {f"{a}->{b}": v for (a, b), v in sorted(matrix.flows.items())},
            "ambiguous_devices": matrix.ambiguous_devices,
            "ground_truth": {f"{a}->{b}": v for (a, b), v in sorted(truth_matrix.items())},
        }
        (out / "flows.json").write_text(json.dumps(flow_report, indent=2))
        (out / "ground_truth.json").write_text(json.dumps({
            "itinerary": result.truth.itinerary,
            "transitions": result.truth.transitions,
        }, indent=2, default=list))
        (out / "run.json").write_text(json.dumps({
            "seed": scenario.seed,
            "start_time_ms": scenario.start_time_ms,
            "duration_s": scenario.duration_s,
            "scanners": [s for s, _ in scenario.scanners],
            "posting_interval_s": config.posting_interval_s,
            "sweep_interval_s": config.density.sweep_interval_s,
            "expiry_window_s": config.density.expiry_window_s,
            "gap_threshold_s": config.gap_threshold_s,
        }, indent=2))
        n_obs = len(result.observations)
        click.echo(f"wrote {out_dir}: {n_obs} observations, "
                   f"{sum(len(s) for s in result.samples.values())} density samples, "
                   f"accuracy report with {len(rows)} rows")
    except (ScenarioError, ValueError) as e:
        click.echo(f"validation error: {e}", err=True)
        sys.exit(EXIT_VALIDATION)
    except OSError as e:
        click.echo(f"runtime error: {e}", err=True)
        sys.exit(EXIT_RUNTIME)


@main.command("phone-experiment")
@click.argument("model")
@click.option("--screen", type=click.Choice(["on", "off"]), default="off")
@click.option("--duration-s", type=float, default=3600.0)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="CSV output path (default stdout).")
def phone_experiment(model, screen, duration_s, seed, out_path):
    """Single phone in a single zone; emit the per-event probing report CSV."""
    try:
        profile = builtin_profile(model)
    except ValueError as e:
        click.echo(f"validation error: {e}", err=True)
        sys.exit(EXIT_VALIDATION)
    state = ScreenState.DISPLAY_ON if screen == "on" else ScreenState.DISPLAY_OFF
    device = SimulatedDevice(
        device_id="phone-under-test",
        profile=profile,
        burned_in_mac=MacAddress.from_str("A8:9C:ED:00:00:01"),
        session_ie=b"\x01experiment-session",
        screen_schedule=[(0.0, state)],
    )
    scenario = Scenario(
        seed=seed,
        scanners=[("bench-scanner", "bench")],
        devices=[device],
        itinerary={"phone-under-test": [("bench", 0.0, duration_s)]} if duration_s > 0 else {},
        duration_s=duration_s,
    )
    observations, _ = run_scenario(scenario)
    rows = emit_experiment_report(observations)
    if out_path:
        with open(out_path, "w", newline="") as fh:
            write_experiment_csv(rows, fh)
        click.echo(f"wrote {out_path}: {len(rows)} probe events")
    else:
        write_experiment_csv(rows, sys.stdout)


@main.command()
@click.argument("archive_root", type=click.Path(exists=True, file_okay=False))
@click.option("--run-manifest", type=click.Path(exists=True, dir_okay=False), default=None,
              help="run.json from a simulate run (defaults to sibling of the archive).")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
def replay(archive_root, run_manifest, out_dir):
    """Recompute density series and the flow matrix from an archive."""
    archive = Path(archive_root)
    manifest_path = Path(run_manifest) if run_manifest else archive.parent / "run.json"
    if not manifest_path.is_file():
        click.echo(f"validation error: no run manifest at {manifest_path}", err=True)
        sys.exit(EXIT_VALIDATION)
    manifest = json.loads(manifest_path.read_text())
    config = DensityConfig(
        sweep_interval_s=manifest["sweep_interval_s"],
        expiry_window_s=manifest["expiry_window_s"],
    )
    series = replay_density(archive, config, manifest["start_time_ms"],
                            manifest["duration_s"], scanner_ids=manifest.get("scanners"))
    end_ms = manifest["start_time_ms"] + round(manifest["duration_s"] * 1000) + 1
    matrix = compute_flows(archive, manifest["start_time_ms"], end_ms,
                           manifest.get("gap_threshold_s", DEFAULT_GAP_THRESHOLD_S))
    doc = {
        "density": {
            scanner: [s.to_json() for s in samples] for scanner, samples in series.items()
        },
        "flows": {f"{a}->{b}": v for (a, b), v in sorted(matrix.flows.items())},
        "ambiguous_devices": matrix.ambiguous_devices,
    }
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "replay.json").write_text(json.dumps(doc, indent=2))
        click.echo(f"wrote {out / 'replay.json'}")
    else:
        click.echo(json.dumps(doc, indent=2))


@main.command()
@click.option("--data-root", required=True, type=click.Path(file_okay=False),
              help="Directory holding the archive and density count stores.")
@click.option("--config-dir", required=True, type=click.Path(file_okay=False))
@click.option("--tokens", "tokens_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON file mapping token -> {user, role}.")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
@click.option("--live-scenario", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Feed this scenario through the pipeline in the background for demos.")
def serve(data_root, config_dir, tokens_path, host, port, live_scenario):
    """Start the bus, collector, density service, and API gateway."""
    import uvicorn

    from .bus import InMemoryBus
    from .collector import Collector
    from .density import DensityService

    config_dir = Path(config_dir)
    config_dir.mkdir(parents=True, exist_ok=True)
    if tokens_path:
        tokens = ConfigStore.load_tokens(tokens_path)
    else:
        tokens = {"dev-super": ("dev", Role.SUPER_ADMIN)}
        click.echo("no --tokens given; using development token 'dev-super' (SuperAdmin)")
    store = ConfigStore.load(config_dir / "config.json", tokens)
    hub = RealtimeHub(store)
    bus = InMemoryBus()
    if live_scenario:
        # the demo pipeline brings its own collector and density service
        scenario = load_scenario(live_scenario)
        threading.Thread(
            target=run_pipeline,
            args=(scenario, data_root),
            kwargs={"bus": bus, "realtime_out": hub.publish_sample},
            daemon=True,
        ).start()
    else:
        Collector(bus, data_root)
        density = DensityService(bus, DensityConfig(), data_root,
                                 realtime_out=hub.publish_sample)

        def sweeper():
            while True:
                time.sleep(density.config.sweep_interval_s)
                density.tick(int(time.time() * 1000))

        threading.Thread(target=sweeper, daemon=True).start()

    app = create_app(store, data_root, hub=hub, bus=bus)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
