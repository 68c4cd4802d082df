"""Observed-data estimators: exact plug-in values, error codes, identities."""

import numpy as np
import pytest

from didlab.core import BoundsInterval
from didlab.errors import LabError
from didlab.estimators import (
    ALL_ESTIMATORS,
    att_forward_stationary,
    att_stationary,
    did_sharp,
    did_switchers,
    mts_bounds,
    run_estimator,
)
from didlab.oracle import true_att_switchers
from didlab.scenarios import (
    OptimalStopping,
    RoyRepeated,
    StoppingType,
    build_joint,
    draw_panel,
)

TOL = 1e-12


# --- exact plug-in values on shipped designs --------------------------------------


def test_sharp_design_contrast(shipped_joints):
    joint = shipped_joints["control_arm_learning"]
    rep = did_sharp(joint)
    assert rep.value == pytest.approx(0.82, abs=TOL)
    assert rep.assumptions == ("sharp-design", "parallel-trends")
    assert rep.n_cells["01"] == pytest.approx(0.5, abs=TOL)
    assert did_switchers(joint).value == pytest.approx(0.82, abs=TOL)


def test_stationarity_estimators_recover_truth_when_assumption_holds(shipped_joints):
    # untreated mean is 0.5 in both periods, so the level-shift estimator is
    # exactly unbiased even though parallel trends fails badly (dev = 0.64)
    joint = shipped_joints["control_arm_learning"]
    truth = true_att_switchers(joint)
    assert truth == pytest.approx(0.18, abs=TOL)
    assert att_stationary(joint).value == pytest.approx(truth, abs=TOL)
    assert att_forward_stationary(joint).value == pytest.approx(truth, abs=TOL)


def test_scale_separation_design(shipped_joints):
    # deviation-from-PT inflates the change contrast threefold while the
    # stationarity route stays exactly on target
    joint = shipped_joints["stationary_scale"]
    assert did_sharp(joint).value == pytest.approx(3.0, abs=TOL)
    assert did_switchers(joint).value == pytest.approx(3.0, abs=TOL)
    assert att_stationary(joint).value == pytest.approx(1.0, abs=TOL)
    assert att_forward_stationary(joint).value == pytest.approx(1.0, abs=TOL)
    assert true_att_switchers(joint) == pytest.approx(1.0, abs=TOL)
    b = mts_bounds(joint).value
    assert b.lower == pytest.approx(-1.0, abs=TOL)
    assert b.upper == pytest.approx(3.0, abs=TOL)


def test_switcher_contrast_under_parallel_trends(shipped_joints):
    # four-cell design with PT: the switcher contrast equals the truth
    joint = shipped_joints["known_means"]
    truth = true_att_switchers(joint)
    assert truth == pytest.approx(0.15, abs=TOL)
    assert did_switchers(joint).value == pytest.approx(truth, abs=TOL)
    # forward stationarity fails here (untreated mean drifts 0.5 -> 0.55)
    assert att_forward_stationary(joint).value == pytest.approx(0.25, abs=TOL)


def test_roy_design_values(shipped_joints):
    joint = shipped_joints["roy_repeated"]
    rep = did_switchers(joint)
    assert rep.value == pytest.approx(-1 / 3, abs=TOL)
    assert rep.n_cells == {
        "01": pytest.approx(3 / 16, abs=TOL),
        "00": pytest.approx(1 / 16, abs=TOL),
    }
    assert att_forward_stationary(joint).value == pytest.approx(-1 / 3, abs=TOL)


# --- interval estimator -------------------------------------------------------------


def test_bounds_upper_equals_switcher_contrast_everywhere(shipped_joints):
    for name, joint in shipped_joints.items():
        try:
            upper = mts_bounds(joint).value.upper
        except LabError:
            continue
        assert upper == pytest.approx(did_switchers(joint).value, abs=TOL), name


def test_bounds_bracket_truth_on_learning_design(shipped_joints):
    joint = shipped_joints["learner_bounds"]
    truth = true_att_switchers(joint)
    b = mts_bounds(joint).value
    assert isinstance(b, BoundsInterval)
    assert b.lower <= truth + TOL
    assert truth <= b.upper + TOL
    assert b.lower < b.upper


def test_bounds_report_shape(shipped_joints):
    rep = mts_bounds(shipped_joints["learner_bounds"])
    assert rep.assumptions == ("monotone-selection-level", "monotone-selection-trend")
    j = rep.to_json()
    assert set(j["value"]) == {"lower", "upper"}


# --- panels vs plug-ins --------------------------------------------------------------


def test_panel_estimates_converge_to_plugin(shipped_joints):
    joint = shipped_joints["control_arm_learning"]
    panel = draw_panel(joint, 40000, seed=17)
    assert did_switchers(panel).value == pytest.approx(0.82, abs=0.03)
    assert att_stationary(panel).value == pytest.approx(0.18, abs=0.03)
    rep = did_switchers(panel)
    assert isinstance(rep.n_cells["01"], int)
    assert rep.n_cells["01"] + rep.n_cells["00"] == panel.n


def test_panel_bounds_identity_exact(shipped_joints):
    # the identity is algebraic, so it holds in every finite sample too
    panel = draw_panel(shipped_joints["roy_repeated"], 500, seed=23)
    assert mts_bounds(panel).value.upper == pytest.approx(
        did_switchers(panel).value, abs=TOL
    )


# --- failure modes --------------------------------------------------------------------


def test_sharp_estimators_reject_fuzzy_designs(shipped_joints):
    for fn in (did_sharp, att_stationary):
        with pytest.raises(LabError) as err:
            fn(shipped_joints["roy_repeated"])
        assert err.value.code == "not-sharp-design"


def _all_stay_joint():
    cfg = OptimalStopping(
        types=(StoppingType(prob=1.0, k0=0.0, k1=0.0, beta=0.9, pmf=(((1.0, 1.0), 1.0),)),)
    )
    return build_joint(cfg)


def test_no_treated_mass():
    joint = _all_stay_joint()
    with pytest.raises(LabError) as err:
        att_stationary(joint)
    assert err.value.code == "no-treated"


def test_no_switchers():
    with pytest.raises(LabError) as err:
        att_forward_stationary(_all_stay_joint())
    assert err.value.code == "no-switchers"


def test_empty_switcher_cell():
    joint = _all_stay_joint()
    for fn in (did_sharp, did_switchers, mts_bounds):
        with pytest.raises(LabError) as err:
            fn(joint)
        assert err.value.code == "empty-cell"
        assert "(0,1)" in str(err.value)


def test_empty_stratum():
    # every unit treats immediately: period-0 untreated stratum is empty
    joint = build_joint(RoyRepeated(pmf=(((0, 1, 0, 0), 0.5), ((0, 1, 1, 1), 0.5))))
    with pytest.raises(LabError) as err:
        att_forward_stationary(joint)
    assert err.value.code == "empty-stratum"


def test_run_estimator_dispatch(shipped_joints):
    joint = shipped_joints["stationary_scale"]
    for est_id in ALL_ESTIMATORS:
        rep = run_estimator(est_id, joint)
        assert rep.estimator_id == est_id
    with pytest.raises(LabError) as err:
        run_estimator("did_magic", joint)
    assert err.value.code == "schema-error"
    assert "did_magic" in str(err.value)


def test_estimators_reject_foreign_data():
    with pytest.raises(TypeError):
        did_sharp([1, 2, 3])


def test_scalar_report_json(shipped_joints):
    j = att_stationary(shipped_joints["stationary_scale"]).to_json()
    assert j["value"] == pytest.approx(1.0, abs=TOL)
    assert j["assumptions"] == ["sharp-design", "mean-stationarity"]
