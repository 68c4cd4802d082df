"""Generative scenarios and their exact treatment-decision rules.

Each scenario is a small structural model of how units choose a two-period
treatment sequence.  decide() reproduces the model's decision rule exactly
(closed form over the finite config support, no simulation), build_joint()
enumerates the full population distribution, and draw_panel() samples from
it reproducibly.

Tie-breaking: the forward-looking choice scenarios treat at indifference
(threshold statistic >= 0); the stopping scenario stops at indifference
(continuation statistic <= 0).  Validation flags configs that sit within
KNIFE_EDGE_MARGIN of a threshold, since results there hinge on the
convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

import numpy as np

from . import _rng
from .core import (
    EXACT_TOL,
    KNIFE_EDGE_MARGIN,
    PMF_TOL,
    Atom,
    CostTable,
    JointDistribution,
    LatentState,
    Panel,
    PotentialOutcomes,
    TreatmentPair,
    ValidationReport,
)
from .errors import LabError

MAX_ATOMS = 10_000_000

Prior = tuple[tuple[float, float], ...]  # ((theta, weight), ...)


def _bern(y: int, p: float) -> float:
    return p if y == 1 else 1.0 - p


def prior_mean(prior: Prior) -> float:
    return float(sum(t * w for t, w in prior))


def posterior_mean(prior: Prior, observations: Sequence[int]) -> float:
    """Posterior mean of a Bernoulli success rate after binary observations.

    The prior is a finite pmf over candidate rates.  With no observations the
    prior mean is returned unchanged.
    """
    for y in observations:
        if y not in (0, 1):
            raise ValueError(f"Bernoulli observation must be 0/1, got {y!r}")
    num = 0.0
    den = 0.0
    for theta, w in prior:
        like = w
        for y in observations:
            like *= _bern(y, theta)
        num += theta * like
        den += like
    if den <= 0.0:
        raise LabError(
            "impossible-observation",
            f"observations {list(observations)} have zero probability under the prior",
        )
    return num / den


def posterior_mean_or_prior(prior: Prior, observation: int) -> float:
    """posterior_mean after one observation, falling back to the prior mean
    when that observation is impossible under the prior (degenerate history)."""
    try:
        return posterior_mean(prior, [observation])
    except LabError:
        return prior_mean(prior)


@dataclass(frozen=True)
class DecisionTrace:
    """Full audit of one unit's decision problem.

    d1_given holds the period-1 choice under each period-0 history;
    continuation holds the period-0 conditional expectations of the period-1
    values (W1(0), W1(1)); gains is the period-0 threshold statistic, or None
    where the scenario fixes d0 outright.
    """

    d0: int
    d1_given: tuple[int, int]
    continuation: tuple[float, float]
    gains: Optional[float]

    def realized(self) -> TreatmentPair:
        return TreatmentPair(self.d0, self.d1_given[self.d0])


def _check_pmf(report: ValidationReport, weights, where: str) -> None:
    total = 0.0
    for i, w in enumerate(weights):
        if w < 0:
            report.add("pmf-negative", f"negative probability {w!r}", f"{where}[{i}]")
        total += w
    if abs(total - 1.0) > PMF_TOL:
        report.add("pmf-sum", f"probabilities at {where} sum to {total!r}, not 1", total)


def _check_unit(report: ValidationReport, x: float, where: str) -> None:
    if not (0.0 <= x <= 1.0):
        report.add("prob-range", f"{where} = {x!r} outside [0, 1]", x)


def _warn_edge(report: ValidationReport, stat: float, what: str) -> None:
    if abs(stat) < KNIFE_EDGE_MARGIN:
        report.warn(f"knife-edge: {what} = {stat!r} is within {KNIFE_EDGE_MARGIN} of the threshold")


# ---------------------------------------------------------------------------
# scenario A: deterministic selection on the realized past outcome


@dataclass(frozen=True)
class PastOutcomeSelection:
    """Period-1 treatment goes to exactly the units whose period-0 untreated
    outcome was 0; nobody is treated in period 0.  Binary outcomes; the
    untreated pair follows a two-state Markov step, treated outcomes are
    independent Bernoulli draws."""

    p_y00: float
    trans_ctrl: tuple[tuple[float, float], tuple[float, float]]
    mean_y_treated: tuple[float, float]

    scenario_id = "past_outcome_selection"

    def validate(self) -> ValidationReport:
        rep = ValidationReport()
        _check_unit(rep, self.p_y00, "p_y00")
        for i, row in enumerate(self.trans_ctrl):
            _check_pmf(rep, row, f"trans_ctrl[{i}]")
            for j, p in enumerate(row):
                _check_unit(rep, p, f"trans_ctrl[{i}][{j}]")
        for t, m in enumerate(self.mean_y_treated):
            _check_unit(rep, m, f"mean_y_treated[{t}]")
        return rep

    def decide(self, state: LatentState) -> DecisionTrace:
        y00 = state.po.y[0][0]
        if y00 not in (0.0, 1.0):
            raise LabError("state-not-in-support", f"binary scenario got Y_0(0) = {y00!r}")
        d1 = 1 - int(y00)
        return DecisionTrace(d0=0, d1_given=(d1, d1), continuation=(0.0, 0.0), gains=None)

    def build_joint(self) -> JointDistribution:
        atoms = []
        for y00, y01, y10, y11 in product((0, 1), repeat=4):
            p = (
                _bern(y00, self.p_y00)
                * self.trans_ctrl[y00][y10]
                * _bern(y01, self.mean_y_treated[0])
                * _bern(y11, self.mean_y_treated[1])
            )
            if p == 0.0:
                continue
            state = LatentState(u0_type=0, po=PotentialOutcomes.of(y00, y01, y10, y11))
            tr = self.decide(state).realized()
            y1 = y11 if tr.d1 else y10
            atoms.append(Atom(state, tr, float(y00), float(y1), p))
        return _finish_joint(atoms, self.scenario_id)

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario_id,
            "p_y00": self.p_y00,
            "trans_ctrl": [list(r) for r in self.trans_ctrl],
            "mean_y_treated": list(self.mean_y_treated),
        }


# ---------------------------------------------------------------------------
# scenario B: forward-looking choice with all means known up front


@dataclass(frozen=True)
class NoLearningType:
    prob: float
    mu: tuple[tuple[float, float], tuple[float, float]]  # mu[t][d]
    costs: CostTable = CostTable()
    beta: float = 0.9


@dataclass(frozen=True)
class NoLearning:
    """Bernoulli means of all four potential outcomes are known to each type
    at the outset, so realized outcomes carry no news and decisions are a
    function of the type alone."""

    types: tuple[NoLearningType, ...]

    scenario_id = "no_learning"

    def validate(self) -> ValidationReport:
        rep = ValidationReport()
        _check_pmf(rep, [t.prob for t in self.types], "types")
        taus = []
        for i, ty in enumerate(self.types):
            for t, d in product((0, 1), repeat=2):
                _check_unit(rep, ty.mu[t][d], f"types[{i}].mu[{t}][{d}]")
            if not (0.0 < ty.beta < 1.0):
                rep.add("beta-range", f"beta = {ty.beta!r} outside (0,1)", f"types[{i}]")
            for v in (*ty.costs.k0, *ty.costs.k1[0], *ty.costs.k1[1]):
                if not np.isfinite(v):
                    rep.add("cost-not-finite", f"non-finite cost in types[{i}]", v)
            taus.append(ty.mu[1][0] - ty.mu[0][0])
            if rep.ok:
                tr = self._type_trace(ty)
                _warn_edge(rep, tr.gains, f"types[{i}] period-0 gain")
                for d0 in (0, 1):
                    _warn_edge(rep, self._g1(ty, d0), f"types[{i}] period-1 gain given d0={d0}")
        if taus and max(taus) - min(taus) > EXACT_TOL:
            rep.add(
                "tau-inconsistent",
                f"untreated trend varies across types: {min(taus)!r} .. {max(taus)!r}",
                *taus,
            )
        return rep

    @staticmethod
    def _g1(ty: NoLearningType, d0: int) -> float:
        k1 = ty.costs.k1[d0]
        return (ty.mu[1][1] - k1[1]) - (ty.mu[1][0] - k1[0])

    def _type_trace(self, ty: NoLearningType) -> DecisionTrace:
        k1 = ty.costs.k1
        w1 = tuple(max(ty.mu[1][1] - k1[d0][1], ty.mu[1][0] - k1[d0][0]) for d0 in (0, 1))
        d1_given = tuple(int(self._g1(ty, d0) >= 0) for d0 in (0, 1))
        k0 = ty.costs.k0
        gains = (ty.mu[0][1] - k0[1]) - (ty.mu[0][0] - k0[0]) + ty.beta * (w1[1] - w1[0])
        return DecisionTrace(int(gains >= 0), d1_given, w1, gains)

    def decide(self, state: LatentState) -> DecisionTrace:
        if not 0 <= state.u0_type < len(self.types):
            raise LabError("state-not-in-support", f"type index {state.u0_type} out of range")
        return self._type_trace(self.types[state.u0_type])

    def build_joint(self) -> JointDistribution:
        atoms = []
        for i, ty in enumerate(self.types):
            tr = self._type_trace(ty).realized()
            for po in product((0, 1), repeat=4):
                p = ty.prob
                for (t, d), y in zip(((0, 0), (0, 1), (1, 0), (1, 1)), po):
                    p *= _bern(y, ty.mu[t][d])
                if p == 0.0:
                    continue
                state = LatentState(
                    u0_type=i, po=PotentialOutcomes.of(*po), beta=ty.beta, costs=ty.costs
                )
                y0 = po[tr.d0]
                y1 = po[2 + tr.d1]
                atoms.append(Atom(state, tr, float(y0), float(y1), p))
        return _finish_joint(atoms, self.scenario_id)

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario_id,
            "types": [
                {
                    "prob": ty.prob,
                    "mu": [list(r) for r in ty.mu],
                    "k0": list(ty.costs.k0),
                    "k1": [list(r) for r in ty.costs.k1],
                    "beta": ty.beta,
                }
                for ty in self.types
            ],
        }


# ---------------------------------------------------------------------------
# scenario C: learning about the treated arm only


@dataclass(frozen=True)
class TreatedLearningType:
    prob: float
    prior: Prior  # pmf over the treated-arm success rate
    mu_ctrl: tuple[float, float]  # known untreated means (period 0, period 1)
    costs: CostTable = CostTable()
    beta: float = 0.9


@dataclass(frozen=True)
class TreatedArmLearning:
    """The treated-arm success rate is unknown; trying treatment in period 0
    reveals one draw from it.  Untreated outcomes are fully known, so nothing
    observed while untreated moves beliefs."""

    types: tuple[TreatedLearningType, ...]

    scenario_id = "treated_arm_learning"

    def validate(self) -> ValidationReport:
        rep = ValidationReport()
        _check_pmf(rep, [t.prob for t in self.types], "types")
        taus = []
        for i, ty in enumerate(self.types):
            _check_pmf(rep, [w for _, w in ty.prior], f"types[{i}].prior")
            for j, (theta, _) in enumerate(ty.prior):
                _check_unit(rep, theta, f"types[{i}].prior[{j}] rate")
            for t in (0, 1):
                _check_unit(rep, ty.mu_ctrl[t], f"types[{i}].mu_ctrl[{t}]")
            if not (0.0 < ty.beta < 1.0):
                rep.add("beta-range", f"beta = {ty.beta!r} outside (0,1)", f"types[{i}]")
            taus.append(ty.mu_ctrl[1] - ty.mu_ctrl[0])
            if rep.ok:
                self._warn_type(rep, ty, i)
        if taus and max(taus) - min(taus) > EXACT_TOL:
            rep.add(
                "tau-inconsistent",
                f"untreated trend varies across types: {min(taus)!r} .. {max(taus)!r}",
                *taus,
            )
        return rep

    def _warn_type(self, rep: ValidationReport, ty: TreatedLearningType, i: int) -> None:
        ybar = prior_mean(ty.prior)
        k1 = ty.costs.k1
        _warn_edge(rep, ybar - ty.mu_ctrl[1] - (k1[0][1] - k1[0][0]), f"types[{i}] period-1 gain given d0=0")
        for y in (0, 1):
            if _bern(y, ybar) == 0.0:
                continue
            post = posterior_mean(ty.prior, [y])
            _warn_edge(
                rep,
                post - ty.mu_ctrl[1] - (k1[1][1] - k1[1][0]),
                f"types[{i}] period-1 gain given d0=1, y01={y}",
            )
        _warn_edge(rep, self._gains(ty), f"types[{i}] period-0 gain")

    def _w1_treated(self, ty: TreatedLearningType, y01: int) -> float:
        post = posterior_mean(ty.prior, [y01])
        k1 = ty.costs.k1[1]
        return max(post - k1[1], ty.mu_ctrl[1] - k1[0])

    def _w1_untreated(self, ty: TreatedLearningType) -> float:
        k1 = ty.costs.k1[0]
        return max(prior_mean(ty.prior) - k1[1], ty.mu_ctrl[1] - k1[0])

    def _expected_w1_treated(self, ty: TreatedLearningType) -> float:
        ybar = prior_mean(ty.prior)
        out = 0.0
        for y in (0, 1):
            w = _bern(y, ybar)
            if w > 0.0:
                out += w * self._w1_treated(ty, y)
        return out

    def _gains(self, ty: TreatedLearningType) -> float:
        ybar = prior_mean(ty.prior)
        k0 = ty.costs.k0
        return (ybar - k0[1]) - (ty.mu_ctrl[0] - k0[0]) + ty.beta * (
            self._expected_w1_treated(ty) - self._w1_untreated(ty)
        )

    def decide(self, state: LatentState) -> DecisionTrace:
        if not 0 <= state.u0_type < len(self.types):
            raise LabError("state-not-in-support", f"type index {state.u0_type} out of range")
        ty = self.types[state.u0_type]
        y01 = state.po.y[0][1]
        if y01 not in (0.0, 1.0):
            raise LabError("state-not-in-support", f"binary scenario got Y_0(1) = {y01!r}")
        ybar = prior_mean(ty.prior)
        k1 = ty.costs.k1
        d1_untreated = int(ybar - ty.mu_ctrl[1] - (k1[0][1] - k1[0][0]) >= 0)
        try:
            post = posterior_mean(ty.prior, [int(y01)])
        except LabError:
            raise LabError(
                "state-not-in-support",
                f"Y_0(1) = {int(y01)} impossible under types[{state.u0_type}] prior",
            )
        d1_treated = int(post - ty.mu_ctrl[1] - (k1[1][1] - k1[1][0]) >= 0)
        gains = self._gains(ty)
        return DecisionTrace(
            d0=int(gains >= 0),
            d1_given=(d1_untreated, d1_treated),
            continuation=(self._w1_untreated(ty), self._expected_w1_treated(ty)),
            gains=gains,
        )

    def build_joint(self) -> JointDistribution:
        atoms = []
        for i, ty in enumerate(self.types):
            for theta, w_theta in ty.prior:
                for po in product((0, 1), repeat=4):
                    y00, y01, y10, y11 = po
                    p = (
                        ty.prob
                        * w_theta
                        * _bern(y00, ty.mu_ctrl[0])
                        * _bern(y01, theta)
                        * _bern(y10, ty.mu_ctrl[1])
                        * _bern(y11, theta)
                    )
                    if p == 0.0:
                        continue
                    state = LatentState(
                        u0_type=i,
                        po=PotentialOutcomes.of(*po),
                        theta=theta,
                        beta=ty.beta,
                        costs=ty.costs,
                    )
                    tr = self.decide(state).realized()
                    y0 = po[tr.d0]
                    y1 = po[2 + tr.d1]
                    atoms.append(Atom(state, tr, float(y0), float(y1), p))
        return _finish_joint(atoms, self.scenario_id)

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario_id,
            "types": [
                {
                    "prob": ty.prob,
                    "prior": [list(pair) for pair in ty.prior],
                    "mu_ctrl": list(ty.mu_ctrl),
                    "k0": list(ty.costs.k0),
                    "k1": [list(r) for r in ty.costs.k1],
                    "beta": ty.beta,
                }
                for ty in self.types
            ],
        }


# ---------------------------------------------------------------------------
# scenario D: learning about the untreated arm, pre-treatment period forced


@dataclass(frozen=True)
class ControlLearningType:
    prob: float
    prior: Prior  # pmf over the untreated-arm success rate
    mu_treat1: float  # known mean of Y_1(1)
    ktilde1: float  # period-1 treatment cost differential


@dataclass(frozen=True)
class ControlArmLearning:
    """Nobody can be treated in period 0; watching the untreated outcome
    updates beliefs about the untreated arm, so the period-1 choice compares
    a fixed treated value against a moving posterior."""

    types: tuple[ControlLearningType, ...]

    scenario_id = "control_arm_learning"

    def validate(self) -> ValidationReport:
        rep = ValidationReport()
        _check_pmf(rep, [t.prob for t in self.types], "types")
        for i, ty in enumerate(self.types):
            _check_pmf(rep, [w for _, w in ty.prior], f"types[{i}].prior")
            for j, (theta, _) in enumerate(ty.prior):
                _check_unit(rep, theta, f"types[{i}].prior[{j}] rate")
            _check_unit(rep, ty.mu_treat1, f"types[{i}].mu_treat1")
            if not np.isfinite(ty.ktilde1):
                rep.add("cost-not-finite", f"ktilde1 not finite in types[{i}]", ty.ktilde1)
            if rep.ok:
                l0 = posterior_mean_or_prior(ty.prior, 0)
                l1 = posterior_mean_or_prior(ty.prior, 1)
                if l0 > l1 + EXACT_TOL:
                    rep.add(
                        "posterior-not-monotone",
                        f"types[{i}]: posterior mean after 0 ({l0!r}) exceeds posterior mean after 1 ({l1!r})",
                        l0,
                        l1,
                    )
                a = ty.mu_treat1 - ty.ktilde1
                _warn_edge(rep, a - l0, f"types[{i}] treated-value margin at l0")
                _warn_edge(rep, a - l1, f"types[{i}] treated-value margin at l1")
        return rep

    def decide(self, state: LatentState) -> DecisionTrace:
        if not 0 <= state.u0_type < len(self.types):
            raise LabError("state-not-in-support", f"type index {state.u0_type} out of range")
        ty = self.types[state.u0_type]
        y00 = state.po.y[0][0]
        if y00 not in (0.0, 1.0):
            raise LabError("state-not-in-support", f"binary scenario got Y_0(0) = {y00!r}")
        a = ty.mu_treat1 - ty.ktilde1
        try:
            l_obs = posterior_mean(ty.prior, [int(y00)])
        except LabError:
            raise LabError(
                "state-not-in-support",
                f"Y_0(0) = {int(y00)} impossible under types[{state.u0_type}] prior",
            )
        d1_untreated = int(a >= l_obs)
        # counterfactual history d0=1: no untreated draw was seen, beliefs stay at the prior
        d1_treated = int(a >= prior_mean(ty.prior))
        return DecisionTrace(
            d0=0,
            d1_given=(d1_untreated, d1_treated),
            continuation=(max(a, l_obs), max(a, prior_mean(ty.prior))),
            gains=None,
        )

    def build_joint(self) -> JointDistribution:
        atoms = []
        for i, ty in enumerate(self.types):
            costs = CostTable(k1=((0.0, ty.ktilde1), (0.0, 0.0)))
            for theta, w_theta in ty.prior:
                for y00, y10, y11 in product((0, 1), repeat=3):
                    p = (
                        ty.prob
                        * w_theta
                        * _bern(y00, theta)
                        * _bern(y10, theta)
                        * _bern(y11, ty.mu_treat1)
                    )
                    if p == 0.0:
                        continue
                    state = LatentState(
                        u0_type=i,
                        po=PotentialOutcomes.of(y00, 0.0, y10, y11),
                        theta=theta,
                        costs=costs,
                    )
                    tr = self.decide(state).realized()
                    y1 = y11 if tr.d1 else y10
                    atoms.append(Atom(state, tr, float(y00), float(y1), p))
        return _finish_joint(atoms, self.scenario_id)

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario_id,
            "types": [
                {
                    "prob": ty.prob,
                    "prior": [list(pair) for pair in ty.prior],
                    "mu_treat1": ty.mu_treat1,
                    "ktilde1": ty.ktilde1,
                }
                for ty in self.types
            ],
        }


# ---------------------------------------------------------------------------
# scenarios E and F: contemporaneous outcome comparison (Roy selection)

Pmf16 = tuple[tuple[tuple[int, int, int, int], float], ...]


def _pmf16_from(entries) -> Pmf16:
    return tuple(sorted(((tuple(po), float(p)) for po, p in entries), key=lambda e: e[0]))


def _validate_pmf16(rep: ValidationReport, pmf: Pmf16) -> None:
    _check_pmf(rep, [p for _, p in pmf], "pmf")
    seen = set()
    for po, _ in pmf:
        if any(y not in (0, 1) for y in po):
            rep.add("pmf-support", f"potential outcomes must be binary, got {po}", po)
        if po in seen:
            rep.add("pmf-duplicate", f"duplicate support point {po}", po)
        seen.add(po)


@dataclass(frozen=True)
class RoyRepeated:
    """Each period's treatment is whichever arm has the larger outcome that
    period, chosen fresh both periods."""

    pmf: Pmf16

    scenario_id = "roy_repeated"

    def validate(self) -> ValidationReport:
        rep = ValidationReport()
        _validate_pmf16(rep, self.pmf)
        return rep

    def decide(self, state: LatentState) -> DecisionTrace:
        y00, y01, y10, y11 = state.po.flat
        if any(y not in (0.0, 1.0) for y in state.po.flat):
            raise LabError("state-not-in-support", f"binary scenario got {state.po.flat}")
        d1 = int(y11 >= y10)
        w = max(y10, y11)
        return DecisionTrace(
            d0=int(y01 >= y00), d1_given=(d1, d1), continuation=(w, w), gains=y01 - y00
        )

    def build_joint(self) -> JointDistribution:
        return _roy_joint(self, self.pmf, beta=0.5)

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario_id,
            "pmf": [[*po, p] for po, p in self.pmf],
        }


@dataclass(frozen=True)
class RoyIrreversible:
    """Roy-style comparison, but leaving treatment is prohibitively costly:
    a unit treated in period 0 stays treated, and period-0 choice weighs the
    foregone option value with discount beta."""

    pmf: Pmf16
    beta: float = 0.9

    scenario_id = "roy_irreversible"

    def validate(self) -> ValidationReport:
        rep = ValidationReport()
        _validate_pmf16(rep, self.pmf)
        if not (0.0 < self.beta < 1.0):
            rep.add("beta-range", f"beta = {self.beta!r} outside (0,1)", self.beta)
        else:
            for po, p in self.pmf:
                if p > 0.0:
                    y00, y01, y10, y11 = po
                    _warn_edge(rep, (y01 - y00) + self.beta * min(y11 - y10, 0), f"period-0 gain at po={po}")
        return rep

    def decide(self, state: LatentState) -> DecisionTrace:
        y00, y01, y10, y11 = state.po.flat
        if any(y not in (0.0, 1.0) for y in state.po.flat):
            raise LabError("state-not-in-support", f"binary scenario got {state.po.flat}")
        w_untreated = max(y10, y11)
        w_treated = y11  # reversal is off the table
        gains = (y01 - y00) + self.beta * (w_treated - w_untreated)
        return DecisionTrace(
            d0=int(gains >= 0),
            d1_given=(int(y11 >= y10), 1),
            continuation=(w_untreated, w_treated),
            gains=gains,
        )

    def build_joint(self) -> JointDistribution:
        return _roy_joint(self, self.pmf, beta=self.beta)

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario_id,
            "beta": self.beta,
            "pmf": [[*po, p] for po, p in self.pmf],
        }


def _roy_joint(cfg, pmf: Pmf16, beta: float) -> JointDistribution:
    atoms = []
    for po, p in pmf:
        if p == 0.0:
            continue
        state = LatentState(u0_type=0, po=PotentialOutcomes.of(*po), beta=beta)
        tr = cfg.decide(state).realized()
        y0 = po[tr.d0]
        y1 = po[2 + tr.d1]
        atoms.append(Atom(state, tr, float(y0), float(y1), p))
    return _finish_joint(atoms, cfg.scenario_id)


# ---------------------------------------------------------------------------
# scenario G: irreversible stopping with terminal value zero


@dataclass(frozen=True)
class StoppingType:
    prob: float
    k0: float  # cost of continuing through period 0
    k1: float  # cost of continuing through period 1
    beta: float
    pmf: tuple[tuple[tuple[float, float], float], ...]  # ((y0, y1), prob)


@dataclass(frozen=True)
class OptimalStopping:
    """Units decide each period whether to stop an activity for good
    (treatment = stopping, yields 0 forever).  Continuing costs k_t and pays
    the latent activity outcome; the period-0 rule folds in the discounted
    option value of period 1."""

    types: tuple[StoppingType, ...]

    scenario_id = "optimal_stopping"

    def validate(self) -> ValidationReport:
        rep = ValidationReport()
        _check_pmf(rep, [t.prob for t in self.types], "types")
        taus = []
        for i, ty in enumerate(self.types):
            _check_pmf(rep, [p for _, p in ty.pmf], f"types[{i}].pmf")
            if not ty.pmf:
                rep.add("pmf-support", f"types[{i}] has empty outcome support")
                continue
            for (y0, y1), _ in ty.pmf:
                if not (np.isfinite(y0) and np.isfinite(y1)):
                    rep.add("pmf-support", f"non-finite outcome pair in types[{i}]", y0, y1)
            if not (0.0 < ty.beta < 1.0):
                rep.add("beta-range", f"beta = {ty.beta!r} outside (0,1)", f"types[{i}]")
            if not (np.isfinite(ty.k0) and np.isfinite(ty.k1)):
                rep.add("cost-not-finite", f"non-finite continuation cost in types[{i}]")
            if not rep.ok:
                continue
            taus.append(sum(p * (y1 - y0) for (y0, y1), p in ty.pmf))
            for y0 in self._support0(ty):
                _warn_edge(rep, self._m(ty, y0) - ty.k1, f"types[{i}] period-1 margin at y0={y0!r}")
            _warn_edge(rep, self._cont0(ty), f"types[{i}] period-0 continuation value")
        if taus and max(taus) - min(taus) > EXACT_TOL:
            rep.add(
                "tau-inconsistent",
                f"untreated trend varies across types: {min(taus)!r} .. {max(taus)!r}",
                *taus,
            )
        return rep

    @staticmethod
    def _support0(ty: StoppingType) -> list[float]:
        out = []
        for (y0, _), p in ty.pmf:
            if p > 0.0 and y0 not in out:
                out.append(y0)
        return out

    @staticmethod
    def _m(ty: StoppingType, y0: float) -> float:
        """E[Y_1(0) | type, Y_0(0) = y0]."""
        num = sum(p * y1 for (a, y1), p in ty.pmf if a == y0)
        den = sum(p for (a, _), p in ty.pmf if a == y0)
        if den <= 0.0:
            raise LabError("state-not-in-support", f"y0 = {y0!r} has zero probability")
        return num / den

    def _cont0(self, ty: StoppingType) -> float:
        """Expected value of continuing through period 0 (stop iff <= 0)."""
        total = 0.0
        for y0 in self._support0(ty):
            p = sum(q for (a, _), q in ty.pmf if a == y0)
            total += p * (y0 + ty.beta * max(0.0, self._m(ty, y0) - ty.k1))
        return total - ty.k0

    def decide(self, state: LatentState) -> DecisionTrace:
        if not 0 <= state.u0_type < len(self.types):
            raise LabError("state-not-in-support", f"type index {state.u0_type} out of range")
        ty = self.types[state.u0_type]
        y0 = state.po.y[0][0]
        mu = self._m(ty, y0)  # raises state-not-in-support off the grid
        cont0 = self._cont0(ty)
        return DecisionTrace(
            d0=int(cont0 <= 0),
            d1_given=(int(mu - ty.k1 <= 0), 1),
            continuation=(max(0.0, mu - ty.k1), 0.0),
            gains=cont0,
        )

    def build_joint(self) -> JointDistribution:
        atoms = []
        for i, ty in enumerate(self.types):
            for (y0, y1), p in ty.pmf:
                p_atom = ty.prob * p
                if p_atom == 0.0:
                    continue
                costs = CostTable(k0=(ty.k0, 0.0), k1=((ty.k1, 0.0), (0.0, 0.0)))
                state = LatentState(
                    u0_type=i,
                    po=PotentialOutcomes.of(y0, 0.0, y1, 0.0),
                    beta=ty.beta,
                    costs=costs,
                )
                tr = self.decide(state).realized()
                ry0 = 0.0 if tr.d0 else y0
                ry1 = 0.0 if tr.d1 else y1
                atoms.append(Atom(state, tr, float(ry0), float(ry1), p_atom))
        return _finish_joint(atoms, self.scenario_id)

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario_id,
            "types": [
                {
                    "prob": ty.prob,
                    "k0": ty.k0,
                    "k1": ty.k1,
                    "beta": ty.beta,
                    "pmf": [[y0, y1, p] for (y0, y1), p in ty.pmf],
                }
                for ty in self.types
            ],
        }


ScenarioConfig = (
    PastOutcomeSelection
    | NoLearning
    | TreatedArmLearning
    | ControlArmLearning
    | RoyRepeated
    | RoyIrreversible
    | OptimalStopping
)

SCENARIO_CLASSES = {
    cls.scenario_id: cls
    for cls in (
        PastOutcomeSelection,
        NoLearning,
        TreatedArmLearning,
        ControlArmLearning,
        RoyRepeated,
        RoyIrreversible,
        OptimalStopping,
    )
}


# ---------------------------------------------------------------------------
# module-level operations


def decide(config: ScenarioConfig, state: LatentState) -> DecisionTrace:
    """Run the scenario's exact decision rule for one latent state."""
    return config.decide(state)


def _finish_joint(atoms: list[Atom], scenario_id: str) -> JointDistribution:
    if len(atoms) > MAX_ATOMS:
        raise LabError(
            "support-too-large", f"{len(atoms)} atoms exceed the cap of {MAX_ATOMS}"
        )
    total = float(np.sum(np.array([a.prob for a in atoms])))
    if abs(total - 1.0) > PMF_TOL:
        raise ValueError(f"joint mass {total!r}; validate the config first")
    if total != 1.0:
        atoms = [
            Atom(a.state, a.treat, a.y0, a.y1, a.prob / total) for a in atoms
        ]
    joint = JointDistribution(atoms, scenario_id)
    joint.check()
    return joint


def _count_support(config: ScenarioConfig) -> int:
    if isinstance(config, PastOutcomeSelection):
        return 16
    if isinstance(config, NoLearning):
        return 16 * len(config.types)
    if isinstance(config, TreatedArmLearning):
        return sum(16 * len(ty.prior) for ty in config.types)
    if isinstance(config, ControlArmLearning):
        return sum(8 * len(ty.prior) for ty in config.types)
    if isinstance(config, (RoyRepeated, RoyIrreversible)):
        return len(config.pmf)
    if isinstance(config, OptimalStopping):
        return sum(len(ty.pmf) for ty in config.types)
    raise LabError("wrong-scenario", f"not a scenario config: {type(config).__name__}")


def build_joint(config: ScenarioConfig) -> JointDistribution:
    """Enumerate the exact population joint distribution for a scenario.

    Atoms appear in canonical order — lexicographic in (type index, latent
    grid index, outcome tuple) — and zero-probability support points are
    dropped.  Probabilities are renormalized by their total so the result
    carries unit mass to within 1e-12 even when config pmfs only sum to 1
    within the looser validation tolerance.
    """
    if _count_support(config) > MAX_ATOMS:
        raise LabError(
            "support-too-large",
            f"support of {_count_support(config)} atoms exceeds the cap of {MAX_ATOMS}",
        )
    return config.build_joint()


def draw_panel(joint: JointDistribution, n: int, seed: int) -> Panel:
    """n i.i.d. draws from the joint; deterministic in (joint, n, seed).

    Sampling is inverse-cdf over the canonical atom order with one uniform
    per draw, so draws are order-independent and parallel-safe.
    """
    if n < 1:
        raise ValueError(f"panel size must be >= 1, got {n}")
    if not joint.atoms:
        raise ValueError("cannot sample from an empty joint")
    arr = joint.arrays()
    cdf = np.cumsum(arr["prob"])
    u = _rng.uniforms(seed, n)
    idx = np.searchsorted(cdf, u, side="right")
    idx = np.minimum(idx, len(joint.atoms) - 1)
    po = np.column_stack([arr["y00"][idx], arr["y01"][idx], arr["y10"][idx], arr["y11"][idx]])
    return Panel(
        d0=arr["d0"][idx],
        d1=arr["d1"][idx],
        y0=arr["y0"][idx],
        y1=arr["y1"][idx],
        po=po,
        atom_index=idx.astype(np.int64),
        atom_states=[a.state for a in joint.atoms],
        scenario_id=joint.scenario_id,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# JSON schema for scenario configs


def _expect_keys(obj: dict, required: set[str], optional: set[str], path: str) -> None:
    for k in obj:
        if k not in required and k not in optional:
            raise LabError("schema-error", f"unknown key {k!r}", f"{path}/{k}")
    for k in required:
        if k not in obj:
            raise LabError("schema-error", f"missing key {k!r}", f"{path}/{k}")


def _num(obj, path: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise LabError("schema-error", f"expected a number, got {type(obj).__name__}", path)
    x = float(obj)
    if not np.isfinite(x):
        raise LabError("schema-error", f"non-finite number {obj!r}", path)
    return x


def _numlist(obj, k: int, path: str) -> list[float]:
    if not isinstance(obj, list) or len(obj) != k:
        raise LabError("schema-error", f"expected a list of {k} numbers", path)
    return [_num(v, f"{path}/{i}") for i, v in enumerate(obj)]


def _binary(obj, path: str) -> int:
    if obj not in (0, 1) or isinstance(obj, bool):
        raise LabError("schema-error", f"expected 0 or 1, got {obj!r}", path)
    return int(obj)


def _prior(obj, path: str) -> Prior:
    if not isinstance(obj, list) or not obj:
        raise LabError("schema-error", "prior must be a nonempty list of [rate, weight] pairs", path)
    return tuple(
        (pair[0], pair[1])
        for pair in (
            tuple(_numlist(e, 2, f"{path}/{i}")) for i, e in enumerate(obj)
        )
    )


def _costs(obj: dict, path: str) -> CostTable:
    k0 = tuple(_numlist(obj["k0"], 2, f"{path}/k0")) if "k0" in obj else (0.0, 0.0)
    if "k1" in obj:
        raw = obj["k1"]
        if not isinstance(raw, list) or len(raw) != 2:
            raise LabError("schema-error", "k1 must be a 2x2 matrix", f"{path}/k1")
        k1 = tuple(tuple(_numlist(r, 2, f"{path}/k1/{i}")) for i, r in enumerate(raw))
    else:
        k1 = ((0.0, 0.0), (0.0, 0.0))
    return CostTable(k0=k0, k1=k1)


def _pmf16_json(obj, path: str) -> Pmf16:
    if not isinstance(obj, list) or not obj:
        raise LabError("schema-error", "pmf must be a nonempty list of [y00,y01,y10,y11,prob]", path)
    entries = []
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != 5:
            raise LabError("schema-error", "pmf row must be [y00,y01,y10,y11,prob]", f"{path}/{i}")
        po = tuple(_binary(v, f"{path}/{i}/{j}") for j, v in enumerate(row[:4]))
        entries.append((po, _num(row[4], f"{path}/{i}/4")))
    return _pmf16_from(entries)


def scenario_from_json(obj, path: str = "") -> ScenarioConfig:
    """Decode one scenario config from parsed JSON; strict about keys."""
    if not isinstance(obj, dict):
        raise LabError("schema-error", "scenario config must be a JSON object", path or "/")
    tag = obj.get("scenario")
    if not isinstance(tag, str) or tag not in SCENARIO_CLASSES:
        raise LabError(
            "schema-error",
            f"scenario tag must be one of {sorted(SCENARIO_CLASSES)}, got {tag!r}",
            f"{path}/scenario",
        )
    if tag == "past_outcome_selection":
        _expect_keys(obj, {"scenario", "p_y00", "trans_ctrl", "mean_y_treated"}, set(), path)
        raw = obj["trans_ctrl"]
        if not isinstance(raw, list) or len(raw) != 2:
            raise LabError("schema-error", "trans_ctrl must be a 2x2 matrix", f"{path}/trans_ctrl")
        trans = tuple(
            tuple(_numlist(r, 2, f"{path}/trans_ctrl/{i}")) for i, r in enumerate(raw)
        )
        return PastOutcomeSelection(
            p_y00=_num(obj["p_y00"], f"{path}/p_y00"),
            trans_ctrl=trans,
            mean_y_treated=tuple(_numlist(obj["mean_y_treated"], 2, f"{path}/mean_y_treated")),
        )
    if tag == "no_learning":
        _expect_keys(obj, {"scenario", "types"}, set(), path)
        types = []
        for i, t in enumerate(_typelist(obj["types"], f"{path}/types")):
            tp = f"{path}/types/{i}"
            _expect_keys(t, {"prob", "mu", "beta"}, {"k0", "k1"}, tp)
            raw = t["mu"]
            if not isinstance(raw, list) or len(raw) != 2:
                raise LabError("schema-error", "mu must be a 2x2 matrix", f"{tp}/mu")
            mu = tuple(tuple(_numlist(r, 2, f"{tp}/mu/{i2}")) for i2, r in enumerate(raw))
            types.append(
                NoLearningType(
                    prob=_num(t["prob"], f"{tp}/prob"),
                    mu=mu,
                    costs=_costs(t, tp),
                    beta=_num(t["beta"], f"{tp}/beta"),
                )
            )
        return NoLearning(types=tuple(types))
    if tag == "treated_arm_learning":
        _expect_keys(obj, {"scenario", "types"}, set(), path)
        types = []
        for i, t in enumerate(_typelist(obj["types"], f"{path}/types")):
            tp = f"{path}/types/{i}"
            _expect_keys(t, {"prob", "prior", "mu_ctrl", "beta"}, {"k0", "k1"}, tp)
            types.append(
                TreatedLearningType(
                    prob=_num(t["prob"], f"{tp}/prob"),
                    prior=_prior(t["prior"], f"{tp}/prior"),
                    mu_ctrl=tuple(_numlist(t["mu_ctrl"], 2, f"{tp}/mu_ctrl")),
                    costs=_costs(t, tp),
                    beta=_num(t["beta"], f"{tp}/beta"),
                )
            )
        return TreatedArmLearning(types=tuple(types))
    if tag == "control_arm_learning":
        _expect_keys(obj, {"scenario", "types"}, set(), path)
        types = []
        for i, t in enumerate(_typelist(obj["types"], f"{path}/types")):
            tp = f"{path}/types/{i}"
            _expect_keys(t, {"prob", "prior", "mu_treat1", "ktilde1"}, set(), tp)
            types.append(
                ControlLearningType(
                    prob=_num(t["prob"], f"{tp}/prob"),
                    prior=_prior(t["prior"], f"{tp}/prior"),
                    mu_treat1=_num(t["mu_treat1"], f"{tp}/mu_treat1"),
                    ktilde1=_num(t["ktilde1"], f"{tp}/ktilde1"),
                )
            )
        return ControlArmLearning(types=tuple(types))
    if tag == "roy_repeated":
        _expect_keys(obj, {"scenario", "pmf"}, set(), path)
        return RoyRepeated(pmf=_pmf16_json(obj["pmf"], f"{path}/pmf"))
    if tag == "roy_irreversible":
        _expect_keys(obj, {"scenario", "pmf", "beta"}, set(), path)
        return RoyIrreversible(
            pmf=_pmf16_json(obj["pmf"], f"{path}/pmf"),
            beta=_num(obj["beta"], f"{path}/beta"),
        )
    # optimal_stopping
    _expect_keys(obj, {"scenario", "types"}, set(), path)
    types = []
    for i, t in enumerate(_typelist(obj["types"], f"{path}/types")):
        tp = f"{path}/types/{i}"
        _expect_keys(t, {"prob", "k0", "k1", "beta", "pmf"}, set(), tp)
        raw = t["pmf"]
        if not isinstance(raw, list) or not raw:
            raise LabError("schema-error", "pmf must be a nonempty list of [y0, y1, prob]", f"{tp}/pmf")
        pmf = []
        for j, row in enumerate(raw):
            vals = _numlist(row, 3, f"{tp}/pmf/{j}")
            pmf.append(((vals[0], vals[1]), vals[2]))
        types.append(
            StoppingType(
                prob=_num(t["prob"], f"{tp}/prob"),
                k0=_num(t["k0"], f"{tp}/k0"),
                k1=_num(t["k1"], f"{tp}/k1"),
                beta=_num(t["beta"], f"{tp}/beta"),
                pmf=tuple(pmf),
            )
        )
    return OptimalStopping(types=tuple(types))


def _typelist(obj, path: str) -> list[dict]:
    if not isinstance(obj, list) or not obj:
        raise LabError("schema-error", "types must be a nonempty list", path)
    for i, t in enumerate(obj):
        if not isinstance(t, dict):
            raise LabError("schema-error", "each type must be a JSON object", f"{path}/{i}")
    return obj
