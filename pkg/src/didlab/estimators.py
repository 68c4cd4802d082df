"""Estimators over observed data (d0, d1, y0, y1) only.

Each estimator accepts either a Panel (sample analog) or a JointDistribution
(exact plug-in): the private accessor below extracts exactly the observed
columns plus weights, so latent counterfactuals are unreachable from any code
path in this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import BoundsInterval, JointDistribution, Panel
from .errors import LabError

__all__ = [
    "EstimateReport",
    "ALL_ESTIMATORS",
    "ESTIMATORS",
    "did_sharp",
    "did_switchers",
    "att_stationary",
    "att_forward_stationary",
    "mts_bounds",
    "run_estimator",
]

Data = Union[Panel, JointDistribution]


@dataclass(frozen=True)
class EstimateReport:
    estimator_id: str
    value: Union[float, BoundsInterval]
    assumptions: tuple[str, ...]
    n_cells: dict

    def to_json(self) -> dict:
        if isinstance(self.value, BoundsInterval):
            value = {"lower": self.value.lower, "upper": self.value.upper}
        else:
            value = self.value
        return {
            "estimator_id": self.estimator_id,
            "value": value,
            "assumptions": list(self.assumptions),
            "n_cells": self.n_cells,
        }


class _Obs:
    """Observed columns with weights summing to 1; the only window estimators
    get onto the data."""

    __slots__ = ("d0", "d1", "y0", "y1", "w", "from_panel")

    def __init__(self, data: Data):
        if isinstance(data, Panel):
            self.d0, self.d1 = data.d0, data.d1
            self.y0, self.y1 = data.y0, data.y1
            self.w = np.full(data.n, 1.0 / data.n)
            self.from_panel = True
        elif isinstance(data, JointDistribution):
            arr = data.arrays()
            self.d0, self.d1 = arr["d0"], arr["d1"]
            self.y0, self.y1 = arr["y0"], arr["y1"]
            total = float(np.sum(arr["prob"]))
            self.w = arr["prob"] / total
            self.from_panel = False
        else:
            raise TypeError(f"estimators take a Panel or JointDistribution, got {type(data).__name__}")

    def mass(self, mask) -> float:
        return float(np.sum(self.w[mask]))

    def mean(self, x, mask, label: str, code: str = "empty-cell") -> float:
        den = self.mass(mask)
        if den <= 0.0:
            raise LabError(code, f"{label} has no mass")
        return float(np.sum(self.w[mask] * x[mask])) / den

    def size(self, mask):
        # counts for panels, probability mass for exact plug-ins
        return int(np.sum(mask)) if self.from_panel else self.mass(mask)


def _require_sharp(obs: _Obs) -> None:
    if obs.mass(obs.d0 == 1) > 0.0:
        raise LabError("not-sharp-design", "period-0 treated units present; this estimator assumes a sharp design")


def did_sharp(data: Data) -> EstimateReport:
    """Change-on-change contrast across period-1 arms, valid under parallel
    trends in a sharp design."""
    obs = _Obs(data)
    _require_sharp(obs)
    dy = obs.y1 - obs.y0
    treated = obs.d1 == 1
    never = obs.d1 == 0
    value = obs.mean(dy, treated, "cell (0,1)") - obs.mean(dy, never, "cell (0,0)")
    return EstimateReport(
        estimator_id="did_sharp",
        value=value,
        assumptions=("sharp-design", "parallel-trends"),
        n_cells={"01": obs.size(treated), "00": obs.size(never)},
    )


def did_switchers(data: Data) -> EstimateReport:
    """Change-on-change contrast of switchers into treatment against the
    never treated; unbiased when those two groups share the untreated
    trend."""
    obs = _Obs(data)
    dy = obs.y1 - obs.y0
    sw = (obs.d0 == 0) & (obs.d1 == 1)
    nt = (obs.d0 == 0) & (obs.d1 == 0)
    value = obs.mean(dy, sw, "switcher cell (0,1)") - obs.mean(dy, nt, "never-treated cell (0,0)")
    return EstimateReport(
        estimator_id="did_switchers",
        value=value,
        assumptions=("pt-switchers-vs-never-treated",),
        n_cells={"01": obs.size(sw), "00": obs.size(nt)},
    )


def att_stationary(data: Data) -> EstimateReport:
    """(E[Y1] - E[Y0]) / P(D1=1): identifies the switcher treatment effect in
    a sharp design when the untreated mean is stable over time, with no
    restriction on who selects into treatment."""
    obs = _Obs(data)
    _require_sharp(obs)
    p_treated = obs.mass(obs.d1 == 1)
    if p_treated <= 0.0:
        raise LabError("no-treated", "no period-1 treated mass")
    everyone = np.ones(len(obs.w), dtype=bool)
    value = (obs.mean(obs.y1, everyone, "panel") - obs.mean(obs.y0, everyone, "panel")) / p_treated
    return EstimateReport(
        estimator_id="att_stationary",
        value=value,
        assumptions=("sharp-design", "mean-stationarity"),
        n_cells={"01": obs.size(obs.d1 == 1), "00": obs.size(obs.d1 == 0)},
    )


def att_forward_stationary(data: Data) -> EstimateReport:
    """att_stationary run inside the period-0 untreated stratum, so it also
    covers fuzzy designs; needs the untreated mean stable within that
    stratum."""
    obs = _Obs(data)
    stratum = obs.d0 == 0
    p_stratum = obs.mass(stratum)
    if p_stratum <= 0.0:
        raise LabError("empty-stratum", "no period-0 untreated mass")
    p_switch = obs.mass(stratum & (obs.d1 == 1)) / p_stratum
    if p_switch <= 0.0:
        raise LabError("no-switchers", "nobody switches into treatment from the period-0 untreated stratum")
    value = (
        obs.mean(obs.y1, stratum, "stratum", code="empty-stratum")
        - obs.mean(obs.y0, stratum, "stratum", code="empty-stratum")
    ) / p_switch
    return EstimateReport(
        estimator_id="att_forward_stationary",
        value=value,
        assumptions=("forward-mean-stationarity",),
        n_cells={"01": obs.size(stratum & (obs.d1 == 1)), "00": obs.size(stratum & (obs.d1 == 0))},
    )


def mts_bounds(data: Data) -> EstimateReport:
    """Interval for the switcher treatment effect under monotone selection:
    switchers are drawn from weakly worse untreated levels (lower end) and
    weakly better untreated trends (upper end) than the never treated.

    The upper end is the same change-on-change contrast did_switchers
    reports; it is recomputed here from its own moments rather than by
    calling that estimator, so the two stay independent checks of one
    identity."""
    obs = _Obs(data)
    sw = (obs.d0 == 0) & (obs.d1 == 1)
    nt = (obs.d0 == 0) & (obs.d1 == 0)
    lower = obs.mean(obs.y1, sw, "switcher cell (0,1)") - obs.mean(obs.y1, nt, "never-treated cell (0,0)")
    dy = obs.y1 - obs.y0
    upper = obs.mean(dy, sw, "switcher cell (0,1)") - obs.mean(dy, nt, "never-treated cell (0,0)")
    return EstimateReport(
        estimator_id="mts_bounds",
        value=BoundsInterval(lower=lower, upper=upper),
        assumptions=("monotone-selection-level", "monotone-selection-trend"),
        n_cells={"01": obs.size(sw), "00": obs.size(nt)},
    )


ALL_ESTIMATORS = (
    "did_sharp",
    "did_switchers",
    "att_stationary",
    "att_forward_stationary",
    "mts_bounds",
)

ESTIMATORS = {
    "did_sharp": did_sharp,
    "did_switchers": did_switchers,
    "att_stationary": att_stationary,
    "att_forward_stationary": att_forward_stationary,
    "mts_bounds": mts_bounds,
}


def run_estimator(estimator_id: str, data: Data) -> EstimateReport:
    try:
        fn = ESTIMATORS[estimator_id]
    except KeyError:
        raise LabError("schema-error", f"unknown estimator id {estimator_id!r}") from None
    return fn(data)
