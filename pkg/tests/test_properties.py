"""Property-based invariants with hypothesis."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdklab import (
    NEGATION,
    builtin,
    check_psd,
    delta,
    four_point_witness,
    gram,
    lift,
    phi,
    three_point_defect,
)
from pdklab.kernels import apply_star

finite = dict(allow_nan=False, allow_infinity=False)
coords = st.floats(min_value=-2.5, max_value=2.5, **finite)
steps = st.floats(min_value=0.02, max_value=0.3, **finite)
signs = st.sampled_from([-1.0, 1.0])


@st.composite
def complex_points(draw, radius=0.8):
    r = draw(st.floats(min_value=0.0, max_value=radius, **finite))
    t = draw(st.floats(min_value=0.0, max_value=2 * math.pi, **finite))
    return complex(r * math.cos(t), r * math.sin(t))


@given(st.complex_numbers(max_magnitude=1e6, **finite))
def test_star_maps_are_involutions(z):
    for tag in ("negation", "identity", "negated_conjugate"):
        assert apply_star(tag, apply_star(tag, z)) == z


@given(x=coords, y=coords)
def test_lift_matches_direct_substitution(x, y):
    f = lambda t: math.exp(-t * t)
    lk = lift(f, NEGATION)
    assert lk.kernel.eval(x, y) == complex(f(x - y))


@given(u=coords, v=coords, h=steps, l=steps, sh=signs, sl=signs)
@settings(max_examples=150)
def test_delta_conjugate_antisymmetry_gaussian(u, v, h, l, sh, sl):
    k = builtin("gaussian")
    h, l = sh * h, sl * l
    a = delta(k, u, v, h, l)
    b = delta(k, v, u, l, h)
    assert abs(a - b.conjugate()) <= 1e-14 * max(1.0, abs(a))


@given(u=complex_points(radius=0.5), v=complex_points(radius=0.5),
       h=steps, l=steps)
@settings(max_examples=100)
def test_delta_conjugate_antisymmetry_szego(u, v, h, l):
    k = builtin("szego")
    a = delta(k, u, v, h, l)
    b = delta(k, v, u, l, h)
    assert abs(a - b.conjugate()) <= 1e-13 * max(1.0, abs(a))


@given(v=coords, h=steps)
def test_phi_equal_steps_exactly_zero(v, h):
    k = builtin("gaussian")
    assert phi(k, v, h, h) == 0.0


@given(x1=coords, x2=coords, x3=coords)
@settings(max_examples=200)
def test_three_point_nonnegative_gaussian(x1, x2, x3):
    w = three_point_defect(builtin("gaussian"), x1, x2, x3)
    assert w.defect >= -1e-10 * w.scale


@given(u=coords, v=st.floats(min_value=-2.0, max_value=2.0, **finite),
       h=steps, l=steps, sh=signs, sl=signs)
@settings(max_examples=200)
def test_four_point_witness_self_consistent(u, v, h, l, sh, sl):
    w = four_point_witness(builtin("gaussian"), u, v, sh * h, sl * l)
    assert w.recomputed_defect() == pytest.approx(w.defect, abs=1e-12 * w.scale)
    assert w.defect >= -1e-10 * w.scale


@given(seed=st.integers(min_value=0, max_value=2 ** 31))
@settings(max_examples=25)
def test_psd_verdict_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    k = builtin("cosine")
    pts = list(k.domain.sample(rng, 5))
    base = check_psd(gram(k, pts))
    perm = rng.permutation(5)
    cert = check_psd(gram(k, [pts[i] for i in perm]))
    assert cert.verdict == base.verdict
    assert cert.min_eigenvalue == pytest.approx(base.min_eigenvalue, abs=1e-11)


@given(c=st.floats(min_value=1e-6, max_value=1e6, **finite),
       seed=st.integers(min_value=0, max_value=2 ** 31))
@settings(max_examples=25)
def test_psd_scaling_invariance(c, seed):
    from pdklab import GramMatrix

    rng = np.random.default_rng(seed)
    k = builtin("gaussian")
    g = gram(k, list(k.domain.sample(rng, 4)))
    scaled = GramMatrix(points=g.points, entries=np.asarray(g.entries) * c,
                        hermitian_defect=g.hermitian_defect * c)
    a = check_psd(g)
    b = check_psd(scaled)
    assert a.verdict == b.verdict == "psd"
    assert b.min_eigenvalue == pytest.approx(c * a.min_eigenvalue, rel=1e-9)
