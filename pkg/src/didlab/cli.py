"""Command line front end.

Subcommands: validate, truth, simulate, estimate, experiment, scenarios.
Progress and warnings go to standard error; data goes to standard output or
to files.  Exit codes: 0 success, 1 scenario validation failure, 2 anything
else (bad config, bad panel, I/O trouble).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import _jsonio
from ._rng import derive_seed
from .corpus import shipped_config, shipped_names, shipped_text
from .core import validate_scenario
from .errors import LabError
from .estimators import ESTIMATORS
from .harness import (
    MAX_SEED,
    ExperimentConfig,
    oracle_block,
    panel_csv_lines,
    parse_config,
    read_panel_csv,
    run_experiment,
    write_outputs,
)
from .scenarios import build_joint, draw_panel

__all__ = ["main"]

_CATALOG_NOTES = {
    "past_outcome_selection": "treatment tracks the previous untreated outcome",
    "no_learning": "forward-looking types whose arm means are known up front",
    "treated_arm_learning": "beliefs update only about the treated arm",
    "control_arm_learning": "untreated outcomes reveal the risky arm's quality",
    "roy_repeated": "each period takes whichever arm pays more that period",
    "roy_irreversible": "outcome comparison with treatment lock-in",
    "optimal_stopping": "continue or stop on the expected continuation value",
}


class _ExitCode(Exception):
    def __init__(self, code: int):
        self.code = code


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_text(ref: str) -> str:
    if ref == "-":
        return sys.stdin.read()
    if ref in shipped_names():
        return shipped_text(ref)
    try:
        return Path(ref).read_text(encoding="utf-8")
    except OSError as e:
        raise LabError("io-error", f"cannot read config: {e}", ref) from None


def _apply_overrides(cfg: ExperimentConfig, args) -> None:
    seed = getattr(args, "seed", None)
    if seed is not None:
        if not (0 <= seed <= MAX_SEED):
            raise LabError("schema-error", f"--seed {seed} outside [0, {MAX_SEED}]")
        cfg.seed = seed
    reps = getattr(args, "reps", None)
    if reps is not None:
        if reps < 1:
            raise LabError("schema-error", f"--reps must be >= 1, got {reps}")
        cfg.replications = reps
    n = getattr(args, "n", None)
    if n is not None:
        if n < 1:
            raise LabError("schema-error", f"--n must be >= 1, got {n}")
        cfg.n = n
    out = getattr(args, "out", None)
    if out is not None:
        cfg.outputs = out
    if getattr(args, "emit_latent", False):
        cfg.emit_latent = True


def _validated_config(args) -> ExperimentConfig:
    cfg = parse_config(_load_text(args.config))
    _apply_overrides(cfg, args)
    report = validate_scenario(cfg.scenario)
    for w in report.warnings:
        _log(f"warning: {w}")
    if not report.ok:
        for v in report.violations:
            _log(f"invalid scenario: [{v.rule}] {v.message}")
        raise _ExitCode(1)
    return cfg


def _cmd_validate(args) -> int:
    cfg = parse_config(_load_text(args.config))
    report = validate_scenario(cfg.scenario)
    print(json.dumps(report.to_json(), indent=2, default=repr))
    return 0 if report.ok else 1


def _cmd_truth(args) -> int:
    cfg = _validated_config(args)
    block = oracle_block(cfg.scenario, cfg.estimators)
    print(_jsonio.dumps(block, indent=2))
    return 0


def _cmd_simulate(args) -> int:
    cfg = _validated_config(args)
    joint = build_joint(cfg.scenario)
    panel = draw_panel(joint, cfg.n, derive_seed(cfg.seed, 0))
    lines = panel_csv_lines(panel, cfg.emit_latent)
    if cfg.outputs:
        path = Path(cfg.outputs)
        if path.suffix != ".csv":
            path.mkdir(parents=True, exist_ok=True)
            path = path / "panel.csv"
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                for line in lines:
                    fh.write(line + "\n")
        except OSError as e:
            raise LabError("io-error", f"cannot write panel: {e}", str(path)) from None
        _log(f"wrote {path}")
    else:
        for line in lines:
            print(line)
    return 0


def _cmd_estimate(args) -> int:
    cfg = parse_config(_load_text(args.config))
    panel = read_panel_csv(args.panel)
    print("estimator_id,value,lower,upper")
    for est_id in cfg.estimators:
        try:
            rpt = ESTIMATORS[est_id](panel)
        except LabError as e:
            _log(f"skipping {est_id}: {e}")
            continue
        value = rpt.value
        if hasattr(value, "lower"):
            print(f"{est_id},,{_jsonio.format_float(value.lower)},{_jsonio.format_float(value.upper)}")
        else:
            print(f"{est_id},{_jsonio.format_float(value)},,")
    return 0


def _cmd_experiment(args) -> int:
    cfg = _validated_config(args)
    if not cfg.outputs:
        raise LabError("schema-error", "experiment needs an output directory: pass --out or set 'outputs'")
    report = run_experiment(cfg)
    written = write_outputs(report, [], cfg.outputs)
    for path in written:
        _log(f"wrote {path}")
    return 0


def _cmd_scenarios(args) -> int:
    by_tag: dict[str, list[str]] = {}
    for name in shipped_names():
        by_tag.setdefault(shipped_config(name).scenario_id, []).append(name)
    for tag, note in _CATALOG_NOTES.items():
        names = ", ".join(by_tag.get(tag, [])) or "-"
        print(f"{tag:24s} {note}; shipped: {names}")
    return 0


def _add_config_arg(sub) -> None:
    sub.add_argument(
        "config",
        help="config file path, a shipped config name (see `didlab scenarios`), or - for stdin",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="didlab",
        description="Simulation laboratory for two-period difference-in-differences under dynamic treatment choice.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a config and print the validation report")
    _add_config_arg(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("truth", help="print exact population quantities for a config")
    _add_config_arg(p)
    p.set_defaults(func=_cmd_truth)

    p = sub.add_parser("simulate", help="draw one panel and write it as CSV")
    _add_config_arg(p)
    p.add_argument("--seed", type=int, help="base seed (overrides config)")
    p.add_argument("--n", type=int, help="units per panel (overrides config)")
    p.add_argument("--out", help="output file or directory (default: stdout)")
    p.add_argument("--emit-latent", action="store_true", help="append potential-outcome columns")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("estimate", help="run the configured estimators on an external panel CSV")
    _add_config_arg(p)
    p.add_argument("--panel", required=True, help="panel CSV (as written by simulate/experiment)")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("experiment", help="replicated simulation study with summary outputs")
    _add_config_arg(p)
    p.add_argument("--seed", type=int, help="base seed (overrides config)")
    p.add_argument("--reps", type=int, help="replications (overrides config)")
    p.add_argument("--n", type=int, help="units per panel (overrides config)")
    p.add_argument("--out", help="output directory (overrides config 'outputs')")
    p.add_argument("--emit-latent", action="store_true", help="include potential outcomes in panel.csv")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("scenarios", help="list the scenario catalog and shipped configs")
    p.set_defaults(func=_cmd_scenarios)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _ExitCode as e:
        return e.code
    except LabError as e:
        _log(str(e))
        return 2
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
