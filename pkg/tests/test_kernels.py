import json
import math

import numpy as np
import pytest

import pdklab
from pdklab import (
    DomainError,
    FieldError,
    SpecError,
    builtin,
    eval_derivative,
    gram,
    make_kernel,
)


def test_builtin_zoo_present():
    for name in ("gaussian", "brownian", "cosine", "exp_product", "szego",
                 "re_product", "poly_neg", "sine_asym"):
        assert name in pdklab.BUILTIN_NAMES


def test_gaussian_values(gaussian):
    assert gaussian.eval(0, 0) == 1.0
    assert gaussian.eval(0, 1) == pytest.approx(math.exp(-1), abs=1e-15)


def test_gaussian_scale_parameter():
    k = builtin("gaussian", s=2.0)
    assert k.eval(0, 1) == pytest.approx(math.exp(-2.0), abs=1e-15)


def test_brownian_min(brownian):
    assert brownian.eval(2, 3) == 2.0
    assert brownian.eval(3, 2) == 2.0


def test_szego_values(szego):
    assert szego.eval(0, 0.5) == 1.0
    u, v = 0.3, 0.2 + 0.1j
    assert szego.eval(u, v) == pytest.approx(1 / (1 - u * v.conjugate()), abs=1e-15)


def test_re_product(re_product):
    assert re_product.eval(0.3, 0.2j) == pytest.approx((0.3 * (-0.2j)).real, abs=1e-16)


def test_lift_spec_equals_gaussian(gaussian):
    k = make_kernel({"kind": "lift", "function": "exp_neg_sq", "star": "negation"})
    for x, y in [(0.0, 1.0), (-0.5, 0.25), (2.0, -1.0)]:
        assert k.eval(x, y) == gaussian.eval(x, y)


def test_grid_kernel_lookup():
    spec = {
        "kind": "grid",
        "points": [{"re": 0.0, "im": 0.0}, {"re": 1.0, "im": 0.0}],
        "values": [
            [{"re": 1.0, "im": 0.0}, {"re": 0.5, "im": 0.0}],
            [{"re": 0.5, "im": 0.0}, {"re": 1.0, "im": 0.0}],
        ],
    }
    k = make_kernel(spec)
    assert k.eval(0.0, 1.0) == 0.5
    with pytest.raises(DomainError):
        k.eval(0.0, 0.5)


def test_grid_dimension_mismatch():
    spec = {
        "kind": "grid",
        "points": [{"re": 0.0, "im": 0.0}, {"re": 1.0, "im": 0.0}],
        "values": [[{"re": 1.0, "im": 0.0}]],
    }
    with pytest.raises(SpecError) as exc:
        make_kernel(spec)
    assert exc.value.field == "values"


def test_unknown_builtin():
    with pytest.raises(SpecError) as exc:
        make_kernel({"kind": "builtin", "name": "unknown_kernel"})
    assert exc.value.field == "name"


def test_unresolved_lift_function():
    with pytest.raises(SpecError) as exc:
        make_kernel({"kind": "lift", "function": "mystery", "star": "negation"})
    assert exc.value.field == "function"


def test_real_field_rejects_imaginary(gaussian):
    with pytest.raises(FieldError):
        gaussian.eval(0.5 + 0.1j, 0.0)


def test_domain_enforced(gaussian, szego):
    with pytest.raises(DomainError):
        gaussian.eval(3.5, 0.0)
    with pytest.raises(DomainError):
        szego.eval(0.95, 0.0)


def test_eval_pure(gaussian):
    a = gaussian.eval(0.123456, -1.7)
    b = gaussian.eval(0.123456, -1.7)
    assert a == b


def test_gram_gaussian(gaussian):
    g = gram(gaussian, [0.0, 1.0])
    e = math.exp(-1)
    assert np.allclose(g.entries, [[1.0, e], [e, 1.0]])
    assert g.hermitian_defect == 0.0


def test_gram_single_point(gaussian):
    g = gram(gaussian, [0.7])
    assert g.entries.shape == (1, 1)
    assert g.entries[0, 0] == 1.0


def test_gram_sine_asym_defect(sine_asym):
    g = gram(sine_asym, [0.0, 1.0])
    assert g.entries[0, 1] == pytest.approx(math.sin(-1.0), abs=1e-16)
    assert g.entries[1, 0] == pytest.approx(math.sin(1.0), abs=1e-16)
    assert g.hermitian_defect == pytest.approx(2 * math.sin(1.0), abs=1e-15)


def test_gram_size_cap(gaussian):
    with pytest.raises(ValueError):
        gram(gaussian, [0.0] * 65)


def test_gram_hermitian_defect_small_for_pd_zoo():
    rng = np.random.default_rng(5)
    for name in ("gaussian", "brownian", "cosine", "exp_product", "szego",
                 "re_product"):
        k = builtin(name)
        pts = k.domain.sample(rng, 6)
        g = gram(k, list(pts))
        assert g.hermitian_defect <= 1e-12


def test_eval_derivative_zeroth(gaussian):
    d = eval_derivative(gaussian, 0.4, -0.3, 0, 0)
    assert d.value == gaussian.eval(0.4, -0.3)


def test_eval_derivative_gaussian_closed_form(gaussian):
    d = eval_derivative(gaussian, 0.0, 0.0, 1, 1)
    assert d.source == "closed_form"
    assert d.value.real == pytest.approx(2.0, abs=1e-14)
    # (2 - 4 t^2) e^{-t^2} away from the diagonal
    for x, y in [(0.5, -0.3), (1.2, 0.4)]:
        t = x - y
        oracle = (2 - 4 * t * t) * math.exp(-t * t)
        assert eval_derivative(gaussian, x, y, 1, 1).value.real == pytest.approx(
            oracle, abs=1e-12)


def test_eval_derivative_exp_product(exp_product):
    d = eval_derivative(exp_product, 0.0, 0.0, 1, 1)
    assert d.value.real == pytest.approx(1.0, abs=1e-14)
    x, y = 0.7, -0.2
    oracle = math.exp(x * y) * (1 + x * y)
    assert eval_derivative(exp_product, x, y, 1, 1).value.real == pytest.approx(
        oracle, abs=1e-12)


def test_eval_derivative_szego(szego):
    u, v = 0.3, 0.2
    oracle = (1 + u * v) / (1 - u * v) ** 3
    d = eval_derivative(szego, u, v, 1, 1)
    assert d.value == pytest.approx(oracle, abs=1e-14)


def test_eval_derivative_fd_fallback(brownian):
    # off the diagonal min(x, y) is locally linear: mixed partial 0
    d = eval_derivative(brownian, 1.0, 3.0, 1, 1)
    assert d.source == "finite_difference"
    assert abs(d.value) < 1e-6
    with pytest.raises(ValueError):
        eval_derivative(brownian, 1.0, 3.0, 1, 1, allow_fd=False)


def test_spec_json_roundtrip(tmp_path):
    spec = {"kind": "builtin", "name": "gaussian", "params": {"s": 2.0},
            "domain": {"type": "interval", "lo": -2.0, "hi": 2.0}}
    path = tmp_path / "k.json"
    path.write_text(json.dumps(spec))
    k = pdklab.load_kernel(path)
    assert k.eval(0, 1) == pytest.approx(math.exp(-2.0), abs=1e-15)
    assert k.domain.hi == 2.0
    again = make_kernel(k.spec.to_json())
    assert again.eval(0.3, -0.4) == k.eval(0.3, -0.4)


def test_default_domains():
    assert builtin("gaussian").domain.to_json() == {"type": "interval", "lo": -3.0, "hi": 3.0}
    assert builtin("brownian").domain.lo == 0.1
    assert builtin("szego").domain.radius == 0.9
