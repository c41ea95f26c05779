import json
from pathlib import Path

import numpy as np
import pytest

from kolmo.core import KolmogorovModel, LVModel
from kolmo.modelfile import (
    ModelFileError,
    affine_part,
    compile_expression,
    load_model,
    model_from_dict,
    model_to_dict,
)

MODELS = Path(__file__).resolve().parent.parent / "models"


@pytest.mark.parametrize("path", sorted(MODELS.glob("*.json")), ids=lambda p: p.stem)
def test_bundled_models_load(path):
    lm = load_model(str(path))
    assert lm.model.n >= 1
    assert len(lm.sha256) == 64


def test_lv_round_trip(tmp_path):
    m = LVModel([1, 0.5], [[-1, -0.3], [0.2, -2]], [[0.1, 0.02], [0.02, 0.2]], name="pair")
    p = tmp_path / "m.json"
    p.write_text(json.dumps(model_to_dict(m)))
    back = load_model(str(p)).model
    assert np.array_equal(back.m, m.m) and np.array_equal(back.A, m.A)
    assert np.array_equal(back.sigma.matrix, m.sigma.matrix)
    assert back.name == "pair"


def test_sigma_forms():
    base = {"type": "lotka_volterra", "m": [1, 1], "A": [[-1, 0], [0, -1]]}
    assert np.allclose(model_from_dict({**base, "sigma": 0.1}).sigma.matrix, 0.1 * np.eye(2))
    assert np.allclose(model_from_dict({**base, "sigma": [0.1, 0.2]}).sigma.matrix, np.diag([0.1, 0.2]))
    with pytest.raises(ModelFileError, match="sigma"):
        model_from_dict({**base, "sigma": [0.1]})
    with pytest.raises(ModelFileError, match="sigma"):
        model_from_dict({**base, "sigma": [[1, 2], [2, 1]]})


def test_malformed_matrix_message():
    with pytest.raises(ModelFileError, match="A must be n×n"):
        model_from_dict({"type": "lotka_volterra", "m": [1, 1], "A": [[-1, 0]], "sigma": 0.1})
    with pytest.raises(ModelFileError, match="missing field 'm'"):
        model_from_dict({"type": "lotka_volterra", "A": [[-1]], "sigma": 0.1})
    with pytest.raises(ModelFileError, match="type"):
        model_from_dict({"type": "mystery"})


def test_bad_json_reports_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"type": "builtin",\n "name": }')
    with pytest.raises(ModelFileError, match="line 2"):
        load_model(str(p))
    with pytest.raises(ModelFileError, match="cannot read"):
        load_model(str(tmp_path / "missing.json"))


def test_expressions():
    f = compile_expression("1 - x1 - 2*x2 / (1 + x1)", 2)
    assert f(np.array([1.0, 2.0])) == pytest.approx(1 - 1 - 4 / 2)
    for bad, msg in [("x3", "unknown variable"), ("__import__('os')", "unsupported"), ("x1 **", "cannot parse"),
                     ("x1 ** 2", "unsupported")]:
        with pytest.raises(ModelFileError, match=msg):
            compile_expression(bad, 2)


def test_affine_custom_becomes_lv():
    m = model_from_dict({"type": "custom_expression", "f": ["1 - x1 - 2*x2", "1 - 2*x1 - x2"], "sigma": 0.0625})
    assert isinstance(m, LVModel)
    assert m.A.tolist() == [[-1, -2], [-2, -1]]
    nonaff = model_from_dict({"type": "custom_expression", "f": ["1 - x1*x1"], "sigma": 0.1})
    assert isinstance(nonaff, KolmogorovModel)
    assert affine_part(nonaff.f, 1) is None


def test_builtin_params():
    m = model_from_dict({"type": "builtin", "name": "rps", "params": {"alpha": 1.6, "beta": 0.9, "sigma": 0.5}})
    assert m.A[0, 1] == -1.6
    with pytest.raises(ModelFileError):
        model_from_dict({"type": "builtin", "name": "rps", "params": {"gamma": 1}})
    with pytest.raises(ModelFileError):
        model_from_dict({"type": "builtin", "name": "rps", "params": {"alpha": 1.6, "beta": 1.5, "sigma": 0.5}})


def test_serializing_general_model_fails():
    with pytest.raises(ModelFileError):
        model_to_dict(KolmogorovModel(1, lambda x: 1 - x, 0.1))
