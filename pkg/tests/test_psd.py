import math

import numpy as np
import pytest

from pdklab import (
    GramMatrix,
    builtin,
    check_pointwise_properties,
    check_psd,
    gram,
    random_psd_suite,
)

PD_ZOO = ("gaussian", "brownian", "cosine", "exp_product", "szego", "re_product")


def _gram_from_matrix(m):
    m = np.asarray(m, dtype=complex)
    with np.errstate(invalid="ignore"):
        defect = float(np.abs(m - m.conj().T).max()) if m.size else 0.0
    return GramMatrix(points=tuple(range(m.shape[0])), entries=m,
                      hermitian_defect=defect)


def test_identity_psd():
    cert = check_psd(_gram_from_matrix(np.eye(3)))
    assert cert.verdict == "psd"
    assert cert.min_eigenvalue == pytest.approx(1.0, abs=1e-12)
    assert cert.dimension == 3


def test_gaussian_two_point_closed_form(gaussian):
    # 2x2 eigenvalues are a +- b
    cert = check_psd(gram(gaussian, [0.0, 1.0]))
    assert cert.verdict == "psd"
    assert cert.min_eigenvalue == pytest.approx(1 - math.exp(-1), abs=1e-12)


def test_poly_neg_two_point(poly_neg):
    cert = check_psd(gram(poly_neg, [0.0, 2.0]))
    assert cert.verdict == "not_psd"
    assert cert.min_eigenvalue == pytest.approx(-2.0, abs=1e-12)


def test_hermitian_violation_precedence(sine_asym):
    g = gram(sine_asym, [0.0, 1.0])
    cert = check_psd(g)
    assert cert.verdict == "hermitian_violation"


def test_zero_dimension_rejected():
    with pytest.raises(ValueError):
        check_psd(_gram_from_matrix(np.zeros((0, 0))))


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        check_psd(_gram_from_matrix([[np.inf]]))


def test_duplicate_points_still_psd(gaussian):
    # multisets are allowed; duplicates give singular but PSD Grams
    cert = check_psd(gram(gaussian, [0.5, 0.5, 1.0]))
    assert cert.verdict == "psd"
    assert cert.min_eigenvalue >= -cert.tolerance_used


def test_permutation_invariance(gaussian):
    rng = np.random.default_rng(11)
    pts = list(gaussian.domain.sample(rng, 6))
    base = check_psd(gram(gaussian, pts))
    for _ in range(5):
        perm = rng.permutation(len(pts))
        cert = check_psd(gram(gaussian, [pts[i] for i in perm]))
        assert cert.verdict == base.verdict
        assert cert.min_eigenvalue == pytest.approx(base.min_eigenvalue, abs=1e-12)


def test_scaling_property(gaussian, poly_neg):
    g = gram(gaussian, [0.0, 0.5, 1.0])
    c = 1e6
    scaled = _gram_from_matrix(np.asarray(g.entries) * c)
    base = check_psd(g)
    cert = check_psd(scaled)
    assert cert.verdict == "psd"
    assert cert.min_eigenvalue == pytest.approx(c * base.min_eigenvalue, rel=1e-10)
    bad = gram(poly_neg, [0.0, 2.0])
    bad_scaled = _gram_from_matrix(np.asarray(bad.entries) * c)
    assert check_psd(bad_scaled).verdict == "not_psd"


def test_pointwise_properties_gaussian(gaussian):
    rep = check_pointwise_properties(gaussian, [0.0, 0.5, 1.0])
    assert rep.p1_worst >= -1e-12
    assert rep.p1_max_imag <= 1e-12
    assert rep.p2_worst <= 1e-12
    assert rep.p3_worst >= -1e-12
    assert rep.violated() == []


def test_pointwise_properties_poly_neg(poly_neg):
    rep = check_pointwise_properties(poly_neg, [0.0, 2.0])
    assert rep.p3_worst == pytest.approx(-8.0, abs=1e-12)
    assert "p3" in rep.violated()


def test_p3_diagonal_equality(gaussian):
    rep = check_pointwise_properties(gaussian, [0.7, 0.7])
    assert rep.p3_worst == pytest.approx(0.0, abs=1e-15)


def test_pointwise_properties_sine_asym(sine_asym):
    rep = check_pointwise_properties(sine_asym, [0.0, 1.0])
    assert "p2" in rep.violated()
    assert rep.p2_worst == pytest.approx(2 * math.sin(1.0), abs=1e-12)


@pytest.mark.parametrize("name", PD_ZOO)
def test_random_suite_pd_kernels(name):
    k = builtin(name)
    rep = random_psd_suite(k, n_max=8, trials=120, seed=42)
    assert rep.all_passed, rep.first_failure
    assert rep.worst_relative >= -1e-8


def test_random_suite_negative_controls():
    for name in ("poly_neg", "sine_asym"):
        rep = random_psd_suite(builtin(name), n_max=4, trials=200, seed=42)
        assert rep.fail_count >= 1
        assert rep.first_failure is not None
        assert len(rep.first_failure["points"]) >= 1


def test_single_point_trial(gaussian):
    rep = random_psd_suite(gaussian, n_max=1, trials=1, seed=0)
    assert rep.pass_count == 1


def test_suite_deterministic(gaussian):
    a = random_psd_suite(gaussian, n_max=6, trials=50, seed=9)
    b = random_psd_suite(gaussian, n_max=6, trials=50, seed=9)
    assert a.worst_min_eigenvalue == b.worst_min_eigenvalue
    assert a.worst_points == b.worst_points


def test_suite_threads_match_serial(gaussian):
    a = random_psd_suite(gaussian, n_max=6, trials=40, seed=3, threads=1)
    b = random_psd_suite(gaussian, n_max=6, trials=40, seed=3, threads=4)
    assert a.to_json() == b.to_json()
