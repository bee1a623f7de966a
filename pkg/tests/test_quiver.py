import json

import numpy as np
import pytest

from finhall.errors import ConfigError
from finhall.quiver import a2_model, a3_model, load_model, model_from_dict, parse_box_spec, projective_rep


def diagnostics(data, **kw):
    with pytest.raises(ConfigError) as err:
        model_from_dict(data, **kw)
    return err.value.diagnostics


def test_a2_model_is_valid():
    cfg = model_from_dict(a2_model(2))
    assert cfg.nverts == 2 and cfg.arrows == ((0, 1),)
    assert cfg.exceptional == frozenset({1})
    assert cfg.box.total_max == 5


def test_cyclic_quiver_rejected():
    data = a2_model(2)
    data["quiver"] = {"vertices": [1, 2], "arrows": [[1, 2], [1, 1]]}
    assert any("cycle" in d for d in diagnostics(data))


def test_theta_negative_on_exceptional_set():
    data = a2_model(2)
    data["weights"]["theta"] = [-1, -1]
    assert any("exceptional" in d and "theta" in d for d in diagnostics(data))
    # the stability invariants can be bypassed for negative controls
    assert model_from_dict(data, validate=False).theta == (-1, -1)


def test_all_violations_reported_together():
    data = a2_model(6)
    data["weights"] = {"theta": [1, -1], "h": [0, 1], "l": [0, 1]}
    diags = diagnostics(data)
    assert any("prime power" in d for d in diags)
    assert sum("weights" in d for d in diags) >= 3


def test_unknown_keys_are_errors():
    data = a2_model(2)
    data["colour"] = "red"
    assert any("unknown key 'colour'" in d for d in diagnostics(data))
    data = a2_model(2)
    data["weights"]["mu"] = [0, 0]
    assert diagnostics(data)


def test_q_outside_allowed_set():
    assert any("allowed" in d for d in diagnostics(a2_model(7)))


def test_load_model_from_file(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps(a3_model(3)))
    cfg = load_model(path)
    assert cfg.q == 3 and cfg.box.beta_max == (2, 2, 2)
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_model(path)


def test_content_hash_is_canonical():
    a = model_from_dict(a2_model(2))
    b = model_from_dict(json.loads(json.dumps(a2_model(2), indent=3)))
    assert a.content_hash() == b.content_hash()
    assert a.content_hash() != model_from_dict(a2_model(3)).content_hash()


def test_projective_reps_of_a3():
    arrows = ((0, 1), (1, 2))
    P1 = projective_rep(3, arrows, 0)
    assert P1.dims == (1, 1, 1)
    assert all(np.array_equal(m, [[1]]) for m in P1.matrices)
    assert projective_rep(3, arrows, 2).dims == (0, 0, 1)


def test_framing_rep_option():
    data = a2_model(2, framing={"rep": {"dims": [1, 0], "matrices": [[[]]]}})
    cfg = model_from_dict(data)
    assert not cfg.framing.is_projective and cfg.framing_rep().dims == (1, 0)
    bad = a2_model(2, framing={"rep": {"dims": [1, 1], "matrices": [[[3]]]}})
    assert diagnostics(bad)


def test_box_spec_parsing():
    assert parse_box_spec("4", 2).total_max == 4
    assert parse_box_spec("1,2,3", 3).beta_max == (1, 2, 3)
    b = parse_box_spec("2,2,2:4", 3)
    assert b.beta_max == (2, 2, 2) and b.total_max == 4
    with pytest.raises(ConfigError):
        parse_box_spec("1,2", 3)
    with pytest.raises(ConfigError):
        parse_box_spec("x", 2)


def test_euler_form():
    cfg = model_from_dict(a2_model(2))
    assert cfg.euler_form((1, 0), (0, 1)) == -1
    assert cfg.euler_form((0, 1), (1, 0)) == 0
