"""Experiment front-end: config parsing, subcommands, trace emission.

Subcommands:

* ``run``         one simulation (static, or fading when the config says so);
                  writes a per-flop CSV trace and prints a summary block.
* ``replicate``   stock experiment bundles (fig3, fig8, fig11); one
                  mean-error-per-flop CSV per learner/feedback combo.
* ``thresholds``  the derived per-MCS interference threshold table.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import pu_link, scenario
from .constraints import gamma_ratios
from .engine import (
    EnsembleResult,
    Feedback,
    Learner,
    RunTrace,
    default_streams,
    run_ensemble,
    run_fading,
    run_static,
)
from .errors import ConfigError, NonPositiveThreshold, SimulationError
from .scenario import FadingConfig, ScenarioConfig, generate_topology

TRACE_HEADER = "flop,error,i_pu_dbm,capacity,epsilon,mcs,explored"

DEFAULT_FLOPS = 120
DEFAULT_TOPOLOGIES = 100
FIG11_SIZES = (5, 10)


@dataclass
class RunManifest:
    """Everything one CLI invocation needs."""

    subcommand: str
    figure: str | None = None
    config: str | None = None
    out: str = "."
    seed: int | None = None
    overrides: list[str] = field(default_factory=list)
    n_jobs: int | None = None


def _load_manifest_config(manifest: RunManifest) -> tuple[ScenarioConfig, dict]:
    raw = scenario.parse_config_file(manifest.config) if manifest.config else {}
    for item in manifest.overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like key=value")
        key, value = item.split("=", 1)
        raw.update(scenario.parse_config_text(f"{key} = {value}"))
    if manifest.seed is not None:
        raw["seed"] = manifest.seed
    return scenario.config_from_raw(raw)


def _parse_kind(value: str, enum_cls, what: str):
    try:
        return enum_cls(value.lower())
    except ValueError:
        valid = ", ".join(e.value for e in enum_cls)
        raise ConfigError(f"key {what!r}: expected one of {valid}, got {value!r}") from None


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_trace(path: Path, trace: RunTrace):
    lines = [TRACE_HEADER]
    for t in range(len(trace)):
        lines.append(",".join([
            str(t + 1),
            _fmt(trace.rel_error[t]),
            _fmt(trace.i_pu_dbm[t]),
            _fmt(trace.capacity[t]),
            _fmt(trace.epsilon[t]),
            str(int(trace.observed_mcs[t])),
            str(int(trace.explored[t])),
        ]))
    path.write_text("\n".join(lines) + "\n")


def _write_mean_error(path: Path, result: EnsembleResult):
    lines = ["flop,mean_error"]
    for t, err in enumerate(result.mean_error, start=1):
        lines.append(f"{t},{_fmt(err)}")
    path.write_text("\n".join(lines) + "\n")


def cmd_run(manifest: RunManifest) -> int:
    cfg, run_opts = _load_manifest_config(manifest)
    learner = _parse_kind(run_opts.get("learner", "cgcpm"), Learner, "learner")
    feedback = _parse_kind(run_opts.get("feedback", "mcc"), Feedback, "feedback")
    flops = run_opts.get("flops", DEFAULT_FLOPS)

    if cfg.fading is not None:
        trace = run_fading(cfg, learner, flops=flops, feedback=feedback)
    else:
        topo_rng, run_rng = default_streams(cfg)
        topo = generate_topology(cfg, topo_rng)
        trace = run_static(cfg, topo, learner, feedback, flops, rng=run_rng)

    out_dir = Path(manifest.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    trace_path = out_dir / "trace.csv"
    _write_trace(trace_path, trace)

    print(f"run: learner={learner.value} feedback={feedback.value} "
          f"n_su={cfg.n_su} seed={cfg.seed} flops={flops}")
    print(f"flops_to_1pct = {trace.flops_to_1pct}")
    print(f"mean_i_pu_dbm = {trace.mean_i_pu_dbm:.4f}")
    print(f"mean_capacity = {trace.mean_capacity:.4f}")
    print(f"trace = {trace_path}")
    return 0


def _replicate_combos(figure: str, cfg: ScenarioConfig, run_opts: dict):
    """Yield (filename stem, cfg, learner, feedback, flops) per combo."""
    n_topologies = run_opts.get("n_topologies", DEFAULT_TOPOLOGIES)
    if figure == "fig3":
        static_cfg = dataclasses.replace(cfg, fading=None)
        flops = run_opts.get("flops", DEFAULT_FLOPS)
        for learner in (Learner.ACCPM, Learner.CGCPM):
            for feedback in (Feedback.BINARY, Feedback.MCC):
                yield (f"fig3_{learner.value}_{feedback.value}",
                       static_cfg, learner, feedback, flops, n_topologies)
    elif figure == "fig8":
        fading_cfg = cfg if cfg.fading is not None else dataclasses.replace(
            cfg, fading=FadingConfig(t_c=250, n_blocks=3))
        flops = run_opts.get(
            "flops", fading_cfg.fading.t_c * fading_cfg.fading.n_blocks)
        for learner in (Learner.ACCPM, Learner.CGCPM):
            yield (f"fig8_{learner.value}_mcc",
                   fading_cfg, learner, Feedback.MCC, flops, n_topologies)
    elif figure == "fig11":
        flops = run_opts.get("flops", 150)
        for n_su in FIG11_SIZES:
            sized = dataclasses.replace(cfg, n_su=n_su, fading=None)
            for learner in (Learner.ACCPM, Learner.CGCPM):
                yield (f"fig11_n{n_su}_{learner.value}_mcc",
                       sized, learner, Feedback.MCC, flops, n_topologies)
    else:
        raise ConfigError(f"unknown figure {figure!r}; expected fig3, fig8 or fig11")


def cmd_replicate(manifest: RunManifest) -> int:
    cfg, run_opts = _load_manifest_config(manifest)
    out_dir = Path(manifest.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for stem, combo_cfg, learner, feedback, flops, n_topologies in _replicate_combos(
            manifest.figure, cfg, run_opts):
        result = run_ensemble(combo_cfg, learner, feedback, n_topologies,
                              flops=flops, n_jobs=manifest.n_jobs)
        path = out_dir / f"{stem}.csv"
        _write_mean_error(path, result)
        print(f"{stem}: n_topologies={n_topologies} flops={flops} "
              f"mean_flops_to_1pct={result.mean_flops_to_1pct():.2f} -> {path}")
    return 0


def cmd_thresholds(manifest: RunManifest) -> int:
    cfg, _ = _load_manifest_config(manifest)
    proto = cfg.protocol
    i_th_dbm = pu_link.interference_thresholds(
        proto, cfg.received_pu_power_dbm, cfg.pu_noise_dbm)
    ratios = gamma_ratios(proto, cfg.reference_index)
    print(f"received PU power: {cfg.received_pu_power_dbm:.2f} dBm, "
          f"noise: {cfg.pu_noise_dbm:.2f} dBm, "
          f"reference MCS: {proto.label(cfg.reference_index)}")
    print(f"{'MCS':<12} {'gamma_dB':>9} {'I_th_dBm':>9} {'c':>8}")
    for entry in proto.entries:
        mark = "  (ref)" if entry.index == cfg.reference_index else ""
        print(f"{entry.label:<12} {entry.gamma_db:>9.2f} "
              f"{i_th_dbm[entry.index - 1]:>9.2f} "
              f"{ratios.ratio(entry.index):>8.4f}{mark}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crnpc",
        description="Underlay power control with interference-channel learning",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p):
        p.add_argument("--config", help="path to a key = value config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="config override (repeatable)")
        p.add_argument("--jobs", dest="n_jobs", type=int, default=None,
                       help="worker processes for ensembles (default: all cores)")

    add_common(sub.add_parser("run", help="run one simulation and write its trace"))
    rep = sub.add_parser("replicate", help="run a stock experiment bundle")
    rep.add_argument("figure", choices=["fig3", "fig8", "fig11"])
    add_common(rep)
    add_common(sub.add_parser("thresholds", help="print the interference threshold table"))
    return parser


def manifest_from_args(args) -> RunManifest:
    return RunManifest(
        subcommand=args.subcommand,
        figure=getattr(args, "figure", None),
        config=args.config,
        out=args.out,
        seed=args.seed,
        overrides=list(args.overrides),
        n_jobs=args.n_jobs,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    manifest = manifest_from_args(args)
    commands = {
        "run": cmd_run,
        "replicate": cmd_replicate,
        "thresholds": cmd_thresholds,
    }
    try:
        return commands[manifest.subcommand](manifest)
    except (ConfigError, NonPositiveThreshold) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except SimulationError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
