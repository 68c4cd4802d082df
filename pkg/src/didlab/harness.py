"""Experiment orchestration: replicated panel draws, estimator aggregation,
and the deterministic file outputs.

Replications run concurrently (thread count from DIDLAB_WORKERS, default
min(8, cpu count)); results are collected in replication order so the report
and every output file are byte-stable regardless of scheduling.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import _jsonio
from ._rng import derive_seed
from .core import BoundsInterval, CELLS, Panel, validate_scenario
from .errors import LabError
from .estimators import ALL_ESTIMATORS, ESTIMATORS
from .oracle import cell_table, check_conditions, pt_deviation, true_att_switchers
from .scenarios import ScenarioConfig, build_joint, draw_panel, scenario_from_json

__all__ = [
    "ExperimentConfig",
    "SummaryReport",
    "parse_config",
    "run_experiment",
    "write_outputs",
    "read_panel_csv",
    "worker_count",
]

DEFAULT_N = 10_000
DEFAULT_REPLICATIONS = 1
MAX_SEED = 2**64 - 1

PANEL_HEADER = ("unit", "d0", "d1", "y0", "y1")
PANEL_HEADER_LATENT = PANEL_HEADER + ("y00", "y01", "y10", "y11")


@dataclass
class ExperimentConfig:
    scenario: ScenarioConfig
    n: int = DEFAULT_N
    replications: int = DEFAULT_REPLICATIONS
    seed: int = 0
    estimators: tuple[str, ...] = ALL_ESTIMATORS
    outputs: Optional[str] = None
    emit_latent: bool = False

    def to_json(self) -> dict:
        out = {
            "scenario": self.scenario.to_json(),
            "n": self.n,
            "replications": self.replications,
            "seed": self.seed,
            "estimators": list(self.estimators),
            "emit_latent": self.emit_latent,
        }
        if self.outputs is not None:
            out["outputs"] = self.outputs
        return out


def _expect_int(obj, lo: int, hi: int, path: str) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise LabError("schema-error", "expected an integer", path)
    if not (lo <= obj <= hi):
        raise LabError("schema-error", f"value {obj} outside [{lo}, {hi}]", path)
    return obj


def parse_config(text: Union[bytes, str]) -> ExperimentConfig:
    """Parse an experiment config, or a bare scenario config wrapped with the
    default experiment settings.  The two are told apart by the "scenario"
    entry: a string tag means the document is the scenario itself."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise LabError("parse-error", f"config is not valid UTF-8: {e}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise LabError("parse-error", f"{e.msg} at line {e.lineno}, column {e.colno}") from None
    if not isinstance(obj, dict):
        raise LabError("schema-error", "top-level config must be a JSON object")
    tag = obj.get("scenario")
    if tag is None:
        raise LabError("schema-error", "missing key 'scenario'", "/scenario")
    if isinstance(tag, str):
        return ExperimentConfig(scenario=scenario_from_json(obj))
    if not isinstance(tag, dict):
        raise LabError("schema-error", "'scenario' must be a scenario object or tag string", "/scenario")

    known = {"scenario", "n", "replications", "seed", "estimators", "outputs", "emit_latent"}
    for key in obj:
        if key not in known:
            raise LabError("schema-error", f"unknown key {key!r}", f"/{key}")
    cfg = ExperimentConfig(scenario=scenario_from_json(tag, path="/scenario"))
    if "n" in obj:
        cfg.n = _expect_int(obj["n"], 1, 10**9, "/n")
    if "replications" in obj:
        cfg.replications = _expect_int(obj["replications"], 1, 10**6, "/replications")
    if "seed" in obj:
        cfg.seed = _expect_int(obj["seed"], 0, MAX_SEED, "/seed")
    if "estimators" in obj:
        ests = obj["estimators"]
        if not isinstance(ests, list) or not ests:
            raise LabError("schema-error", "'estimators' must be a nonempty array of ids", "/estimators")
        for i, e in enumerate(ests):
            if e not in ESTIMATORS:
                raise LabError("schema-error", f"unknown estimator id {e!r}", f"/estimators/{i}")
        cfg.estimators = tuple(ests)
    if "outputs" in obj:
        if not isinstance(obj["outputs"], str):
            raise LabError("schema-error", "'outputs' must be a directory path string", "/outputs")
        cfg.outputs = obj["outputs"]
    if "emit_latent" in obj:
        if not isinstance(obj["emit_latent"], bool):
            raise LabError("schema-error", "'emit_latent' must be a boolean", "/emit_latent")
        cfg.emit_latent = obj["emit_latent"]
    return cfg


def worker_count() -> int:
    raw = os.environ.get("DIDLAB_WORKERS", "").strip()
    if raw:
        try:
            w = int(raw)
        except ValueError:
            raise LabError("schema-error", f"DIDLAB_WORKERS must be an integer, got {raw!r}")
        if w < 1:
            raise LabError("schema-error", f"DIDLAB_WORKERS must be >= 1, got {w}")
        return w
    return min(8, os.cpu_count() or 1)


@dataclass
class SummaryReport:
    """Aggregated experiment results plus the exact oracle block.

    rows carries the per-replication estimates for estimates.csv and
    first_panel the replication-0 panel for panel.csv; neither is part of
    the JSON summary.
    """

    scenario_id: str
    n: int
    replications: int
    seed: int
    emit_latent: bool
    oracle: dict
    estimators: dict
    rows: list = field(repr=False, default_factory=list)
    first_panel: Optional[Panel] = field(repr=False, default=None)

    def to_json(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "n": self.n,
            "replications": self.replications,
            "seed": self.seed,
            "emit_latent": self.emit_latent,
            "oracle": self.oracle,
            "estimators": self.estimators,
        }


def oracle_block(config: ScenarioConfig, estimator_ids=ALL_ESTIMATORS) -> dict:
    """Exact population quantities for a validated config: cell table,
    parallel-trends deviation, condition report, true switcher effect, and
    each estimator's plug-in value on the joint."""
    joint = build_joint(config)
    table = cell_table(joint)
    block: dict = {
        "scenario_id": config.scenario_id,
        "cells": table.to_json(),
        "pt_deviation": pt_deviation(table),
        "conditions": check_conditions(config, joint).to_json(),
    }
    try:
        block["true_att_switchers"] = true_att_switchers(joint)
    except LabError as e:
        block["true_att_switchers"] = None
        block["true_att_switchers_error"] = e.code
    plugin: dict = {}
    for est_id in estimator_ids:
        try:
            rpt = ESTIMATORS[est_id](joint)
        except LabError as e:
            plugin[est_id] = {"error": e.code}
            continue
        if isinstance(rpt.value, BoundsInterval):
            plugin[est_id] = {"lower": rpt.value.lower, "upper": rpt.value.upper}
        else:
            plugin[est_id] = rpt.value
    block["plugin"] = plugin
    return block


def _replicate(joint, cfg: ExperimentConfig, r: int):
    panel = draw_panel(joint, cfg.n, derive_seed(cfg.seed, r))
    results = []
    for est_id in cfg.estimators:
        try:
            rpt = ESTIMATORS[est_id](panel)
            results.append((est_id, rpt.value))
        except LabError as e:
            results.append((est_id, e))
    return panel if r == 0 else None, results


def _aggregate_scalar(values: list[float], truth: Optional[float]) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    out: dict = {
        "n_ok": len(values),
        "mean": float(np.mean(arr)),
        "sd": float(np.std(arr, ddof=1)) if len(values) > 1 else 0.0,
    }
    if truth is not None:
        out["bias"] = out["mean"] - truth
        out["rmse"] = float(np.sqrt(np.mean((arr - truth) ** 2)))
    else:
        out["bias"] = None
        out["rmse"] = None
    return out


def _aggregate_bounds(values: list[BoundsInterval], truth: Optional[float]) -> dict:
    lo = np.asarray([b.lower for b in values], dtype=np.float64)
    hi = np.asarray([b.upper for b in values], dtype=np.float64)
    out: dict = {
        "n_ok": len(values),
        "lower_mean": float(np.mean(lo)),
        "upper_mean": float(np.mean(hi)),
        "lower_sd": float(np.std(lo, ddof=1)) if len(values) > 1 else 0.0,
        "upper_sd": float(np.std(hi, ddof=1)) if len(values) > 1 else 0.0,
    }
    if truth is not None:
        out["coverage"] = float(np.mean((lo <= truth) & (truth <= hi)))
    else:
        out["coverage"] = None
    return out


def run_experiment(cfg: ExperimentConfig) -> SummaryReport:
    report = validate_scenario(cfg.scenario)
    if not report.ok:
        raise ValueError(
            "scenario failed validation: "
            + "; ".join(v.message for v in report.violations)
        )
    joint = build_joint(cfg.scenario)
    joint.arrays()  # warm the cache before threads share the joint
    oracle = oracle_block(cfg.scenario, cfg.estimators)
    truth = oracle.get("true_att_switchers")

    reps = range(cfg.replications)
    workers = worker_count()
    if workers > 1 and cfg.replications > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda r: _replicate(joint, cfg, r), reps))
    else:
        outcomes = [_replicate(joint, cfg, r) for r in reps]

    first_panel = outcomes[0][0]
    rows: list = []
    collected: dict[str, list] = {est_id: [] for est_id in cfg.estimators}
    errors: dict[str, dict[str, int]] = {est_id: {} for est_id in cfg.estimators}
    for r, (_, results) in enumerate(outcomes):
        for est_id, value in results:
            if isinstance(value, LabError):
                tally = errors[est_id]
                tally[value.code] = tally.get(value.code, 0) + 1
            elif isinstance(value, BoundsInterval):
                collected[est_id].append(value)
                rows.append((r, est_id, None, value.lower, value.upper))
            else:
                collected[est_id].append(value)
                rows.append((r, est_id, value, None, None))

    aggregates: dict = {}
    for est_id in cfg.estimators:
        values = collected[est_id]
        if not values:
            agg: dict = {"n_ok": 0}
        elif isinstance(values[0], BoundsInterval):
            agg = _aggregate_bounds(values, truth)
        else:
            agg = _aggregate_scalar(values, truth)
        agg["errors"] = errors[est_id]
        aggregates[est_id] = agg

    return SummaryReport(
        scenario_id=cfg.scenario.scenario_id,
        n=cfg.n,
        replications=cfg.replications,
        seed=cfg.seed,
        emit_latent=cfg.emit_latent,
        oracle=oracle,
        estimators=aggregates,
        rows=rows,
        first_panel=first_panel,
    )


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return _jsonio.format_float(float(x))


def panel_csv_lines(panel: Panel, emit_latent: bool):
    """Yield panel.csv lines (no trailing newline).  Latent columns need the
    panel to carry potential outcomes."""
    if emit_latent and not panel.has_latent:
        raise LabError("latent-required", "panel has no latent columns to emit")
    header = PANEL_HEADER_LATENT if emit_latent else PANEL_HEADER
    yield ",".join(header)
    for i in range(panel.n):
        cells = [str(i), str(int(panel.d0[i])), str(int(panel.d1[i])), _fmt(panel.y0[i]), _fmt(panel.y1[i])]
        if emit_latent:
            cells.extend(_fmt(panel.po[i, j]) for j in range(4))
        yield ",".join(cells)


def write_outputs(report: SummaryReport, panels, out_dir) -> list:
    """Write summary.json, estimates.csv, oracle.csv, panel.csv into out_dir.

    All files are UTF-8 with LF endings and 17-significant-digit floats;
    identical reports produce byte-identical directories."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise LabError("io-error", f"cannot create output directory: {e}", str(out)) from None
    written = []

    def _write_text(name: str, payload: str):
        path = out / name
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(payload)
        except OSError as e:
            raise LabError("io-error", f"cannot write {name}: {e}", str(path)) from None
        written.append(path)

    _write_text("summary.json", _jsonio.dumps(report.to_json(), indent=2) + "\n")

    est_lines = ["replication,estimator_id,value,lower,upper"]
    for r, est_id, value, lower, upper in report.rows:
        est_lines.append(f"{r},{est_id},{_fmt(value)},{_fmt(lower)},{_fmt(upper)}")
    _write_text("estimates.csv", "\n".join(est_lines) + "\n")

    cells = report.oracle.get("cells", {})
    oracle_lines = ["d0,d1,prob,trend_mean,level_y0,level_y1"]
    for d0, d1 in CELLS:
        st = cells.get(f"{d0}{d1}")
        if st is None:
            oracle_lines.append(f"{d0},{d1},{_fmt(0.0)},,,")
        else:
            oracle_lines.append(
                f"{d0},{d1},{_fmt(st['prob'])},{_fmt(st['trend_mean'])},{_fmt(st['level_y0'])},{_fmt(st['level_y1'])}"
            )
    _write_text("oracle.csv", "\n".join(oracle_lines) + "\n")

    panel = panels[0] if panels else report.first_panel
    if panel is not None:
        _write_text("panel.csv", "\n".join(panel_csv_lines(panel, report.emit_latent)) + "\n")
    return written


def read_panel_csv(path) -> Panel:
    """Read a panel written in the panel.csv layout (5 or 9 columns)."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            lines = fh.read().splitlines()
    except OSError as e:
        raise LabError("io-error", f"cannot read panel: {e}", str(path)) from None
    if not lines:
        raise LabError("parse-error", "panel file is empty", str(path))
    header = tuple(lines[0].split(","))
    if header == PANEL_HEADER:
        latent = False
    elif header == PANEL_HEADER_LATENT:
        latent = True
    else:
        raise LabError(
            "schema-error",
            f"unexpected panel header {lines[0]!r}; want {','.join(PANEL_HEADER)} or the latent variant",
            str(path),
        )
    width = len(header)
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != width:
            raise LabError("parse-error", f"line {i}: expected {width} fields, got {len(parts)}", str(path))
        try:
            rows.append([float(p) for p in parts])
        except ValueError as e:
            raise LabError("parse-error", f"line {i}: {e}", str(path)) from None
    if not rows:
        raise LabError("parse-error", "panel has a header but no rows", str(path))
    mat = np.asarray(rows, dtype=np.float64)
    d0 = mat[:, 1].astype(np.int8)
    d1 = mat[:, 2].astype(np.int8)
    if not (np.all((mat[:, 1] == 0) | (mat[:, 1] == 1)) and np.all((mat[:, 2] == 0) | (mat[:, 2] == 1))):
        raise LabError("schema-error", "d0/d1 columns must be 0 or 1", str(path))
    po = mat[:, 5:9] if latent else None
    return Panel(d0=d0, d1=d1, y0=mat[:, 3], y1=mat[:, 4], po=po)
