"""Joint-distribution builders and panel sampling."""

import json

import numpy as np
import pytest

from didlab.core import EXACT_TOL
from didlab.errors import LabError
from didlab.scenarios import (
    RoyRepeated,
    build_joint,
    draw_panel,
    scenario_from_json,
)

from _brute import brute_cells


def test_all_shipped_joints_are_tight(shipped, shipped_joints):
    for name, joint in shipped_joints.items():
        joint.check()
        assert joint.scenario_id == shipped[name].scenario_id
        arr = joint.arrays()
        assert arr["prob"].min() > 0.0, name
        # realized outcomes must equal the potential outcome of the chosen arm
        for atom in joint.atoms:
            flat = atom.state.po.flat
            d0, d1 = atom.treat.d0, atom.treat.d1
            if joint.scenario_id == "optimal_stopping":
                assert atom.y0 == (0.0 if d0 else flat[0])
                assert atom.y1 == (0.0 if d1 else flat[2])
            else:
                assert atom.y0 == flat[d0], name
                assert atom.y1 == flat[2 + d1], name


def test_joint_renormalizes_float_dust():
    # 1/3 weights do not sum to binary 1 exactly; the builder must absorb that
    pmf = tuple(((a, b, 0, 0), 1.0 / 3.0) for a, b in ((0, 0), (0, 1), (1, 1)))
    joint = build_joint(RoyRepeated(pmf=pmf))
    assert abs(joint.total_mass() - 1.0) <= EXACT_TOL


def test_zero_probability_atoms_dropped():
    pmf = (((0, 0, 0, 0), 1.0), ((1, 1, 1, 1), 0.0))
    joint = build_joint(RoyRepeated(pmf=pmf))
    assert len(joint) == 1


def test_control_learning_joint_matches_hand_enumeration(shipped_joints):
    cells = brute_cells(shipped_joints["control_arm_learning"])
    assert cells[(0, 1)]["prob"] == pytest.approx(0.5, abs=EXACT_TOL)
    assert cells[(0, 1)]["trend_mean"] == pytest.approx(0.32, abs=EXACT_TOL)
    assert cells[(0, 0)]["trend_mean"] == pytest.approx(-0.32, abs=EXACT_TOL)
    assert cells[(0, 1)]["level_y0"] == 0.0
    assert cells[(0, 0)]["level_y0"] == 1.0


def test_draw_panel_deterministic_and_latent(shipped_joints):
    joint = shipped_joints["stopping_informative"]
    p1 = draw_panel(joint, 500, seed=42)
    p2 = draw_panel(joint, 500, seed=42)
    p3 = draw_panel(joint, 500, seed=43)
    assert np.array_equal(p1.y0, p2.y0) and np.array_equal(p1.d1, p2.d1)
    assert not np.array_equal(p1.y1, p3.y1)
    assert p1.n == 500 and p1.has_latent
    assert p1.po.shape == (500, 4)
    # every row reproduces its generating atom exactly
    for i in range(0, 500, 97):
        atom = joint.atoms[p1.atom_index[i]]
        assert (p1.d0[i], p1.d1[i]) == (atom.treat.d0, atom.treat.d1)
        assert p1.y0[i] == atom.y0 and p1.y1[i] == atom.y1
        assert tuple(p1.po[i]) == atom.state.po.flat
        assert p1.latent[i].po.flat == atom.state.po.flat


def test_draw_panel_frequencies_converge(shipped_joints):
    joint = shipped_joints["control_arm_learning"]
    panel = draw_panel(joint, 20_000, seed=7)
    share = float(np.mean(panel.d1))
    assert abs(share - 0.5) < 0.02


def test_panel_seed_column_annotations(shipped_joints):
    panel = draw_panel(shipped_joints["roy_repeated"], 10, seed=9)
    assert panel.seed == 9
    assert panel.scenario_id == "roy_repeated"


# --- config serialization ----------------------------------------------------


def test_shipped_configs_round_trip(shipped):
    for name, cfg in shipped.items():
        back = scenario_from_json(json.loads(json.dumps(cfg.to_json())))
        assert back == cfg, name


def test_unknown_scenario_tag():
    with pytest.raises(LabError) as err:
        scenario_from_json({"scenario": "nope"})
    assert err.value.code == "schema-error"
    assert "nope" in str(err.value)


def test_unknown_key_has_json_pointer():
    obj = {"scenario": "roy_repeated", "pmf": [[0, 0, 0, 0, 1.0]], "bogus": 3}
    with pytest.raises(LabError) as err:
        scenario_from_json(obj)
    assert err.value.code == "schema-error"
    assert "/bogus" in str(err.value)


def test_missing_required_key():
    with pytest.raises(LabError) as err:
        scenario_from_json({"scenario": "roy_repeated"})
    assert err.value.code == "schema-error"


def test_wrong_type_in_nested_field():
    obj = {"scenario": "roy_repeated", "pmf": [[0, 0, 0, "x", 1.0]]}
    with pytest.raises(LabError) as err:
        scenario_from_json(obj)
    assert err.value.code == "schema-error"
