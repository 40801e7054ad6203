import numpy as np
import pytest

from pdklab import KernelSpec, builtin, make_kernel


@pytest.fixture(scope="session")
def gaussian():
    return builtin("gaussian")


@pytest.fixture(scope="session")
def brownian():
    return builtin("brownian")


@pytest.fixture(scope="session")
def cosine():
    return builtin("cosine")


@pytest.fixture(scope="session")
def exp_product():
    return builtin("exp_product")


@pytest.fixture(scope="session")
def szego():
    return builtin("szego")


@pytest.fixture(scope="session")
def re_product():
    return builtin("re_product")


@pytest.fixture(scope="session")
def poly_neg():
    return builtin("poly_neg")


@pytest.fixture(scope="session")
def sine_asym():
    return builtin("sine_asym")


def product_grid_kernel(points):
    """Tabulated bilinear kernel k(u, v) = u * v on an explicit point set."""
    pts = []
    for p in points:
        p = complex(p)
        if all(abs(p - q) > 1e-12 for q in pts):
            pts.append(p)
    values = tuple(tuple(x * y for y in pts) for x in pts)
    return make_kernel(KernelSpec(kind="grid", points=tuple(pts), values=values))


def quadratic_form(entries, xi):
    """Sum_ij entries[i, j] * xi_i * conj(xi_j): the raw positivity form.

    Independent of any witness closed form; used to cross-check them.
    """
    entries = np.asarray(entries, dtype=complex)
    xi = np.asarray(xi, dtype=complex)
    return complex(xi @ entries @ xi.conj())
