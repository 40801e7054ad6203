"""Complex-field operations: directional Wirtinger quotients, contour-integral
increment formulas, sesquiholomorphy residuals, and the propagation suite.

Contour integrals use equally spaced trapezoidal quadrature on circles, which
is spectrally accurate for analytic integrands.  Directional disagreement over
the two independent directions 1 and i operationalizes "the complex limit
exists"; this is a semi-decision (a finite check cannot quantify over all
approach paths) but falsifies non-holomorphy in practice.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .domains import Disc, DomainError
from .findiff import BETA0, DecayTrace, StepSequence, beta_decay_trace
from .kernels import COMPLEX, KernelHandle

logger = logging.getLogger(__name__)

WIRTINGER_DIRECTIONS = (1.0, -1.0, 1j, -1j)
HOLOMORPHIC = "holomorphic"
ANTIHOLOMORPHIC = "antiholomorphic"

CONTOUR_SHRINK = 0.8


@dataclass(frozen=True)
class HoloFunctionHandle:
    """One-complex-variable function on a disc, with optional exact
    derivatives for oracle comparisons."""

    name: str
    fn: Callable
    domain: Disc
    derivative: Optional[Callable] = None  # (z, order) -> complex

    def eval(self, z: complex) -> complex:
        z = complex(z)
        if not self.domain.contains(z):
            raise DomainError(f"{self.name}: point {z} outside domain")
        return complex(self.fn(z))

    __call__ = eval


def _square(z):
    return z * z


def _geometric(z):
    return 1.0 / (1.0 - z)


def _geometric_deriv(z, n):
    return math.factorial(n) / (1.0 - z) ** (n + 1)


def _square_deriv(z, n):
    if n == 0:
        return z * z
    if n == 1:
        return 2.0 * z
    if n == 2:
        return 2.0
    return 0.0


HOLO_BUILTINS = {
    "square": (_square, _square_deriv, Disc(0.0, 2.0)),
    "constant": (None, None, Disc(0.0, 2.0)),  # parametrized below
    "geometric": (_geometric, _geometric_deriv, Disc(0.0, 0.9)),
    "exponential": (cmath.exp, lambda z, n: cmath.exp(z), Disc(0.0, 2.0)),
}


def make_holo_function(name: str, c: float = 1.0) -> HoloFunctionHandle:
    if name not in HOLO_BUILTINS:
        raise ValueError(f"unknown holomorphic builtin {name!r}; "
                         f"known: {', '.join(sorted(HOLO_BUILTINS))}")
    if name == "constant":
        return HoloFunctionHandle(
            name="constant",
            fn=lambda z, _c=c: complex(_c),
            domain=Disc(0.0, 2.0),
            derivative=lambda z, n, _c=c: complex(_c) if n == 0 else 0.0,
        )
    fn, deriv, dom = HOLO_BUILTINS[name]
    return HoloFunctionHandle(name=name, fn=fn, domain=dom, derivative=deriv)


@dataclass(frozen=True)
class ContourSpec:
    """Circle center/radius plus trapezoidal node count (>= 8)."""

    center: complex
    radius: float
    nodes: int = 128

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError("contour radius must be positive")
        if self.nodes < 8:
            raise ValueError("need at least 8 quadrature nodes")


def fit_contour(c: ContourSpec, domain: Disc) -> tuple:
    """Shrink the contour radius when its closed disc would not sit strictly
    inside the domain, to CONTOUR_SHRINK x the distance to the boundary."""
    offset = abs(complex(c.center) - complex(domain.center))
    room = domain.radius - offset
    if room <= 0:
        raise DomainError(f"contour center {c.center} outside domain")
    if c.radius >= room:
        adjusted = ContourSpec(c.center, CONTOUR_SHRINK * room, c.nodes)
        logger.info("contour radius %.6g shrunk to %.6g to stay inside the domain",
                    c.radius, adjusted.radius)
        return adjusted, True
    return c, False


def _contour_nodes(c: ContourSpec):
    theta = 2.0 * np.pi * np.arange(c.nodes) / c.nodes
    ring = np.exp(1j * theta)
    return complex(c.center) + c.radius * ring, c.radius * ring


def contour_increment_ratio(f: HoloFunctionHandle, z, h, c: ContourSpec) -> complex:
    """(f(z+h) - f(z))/h evaluated as the circle integral of
    f(zeta) / ((zeta - z)(zeta - z - h)) / (2 pi i)."""
    if h == 0:
        raise ValueError("increment h must be nonzero")
    c, _ = fit_contour(c, f.domain)
    z = complex(z)
    h = complex(h)
    if abs(z - c.center) >= c.radius or abs(z + h - c.center) >= c.radius:
        raise DomainError("z and z+h must lie strictly inside the contour")
    zeta, dzeta = _contour_nodes(c)
    vals = np.array([f.eval(t) for t in zeta])
    integrand = vals / ((zeta - z) * (zeta - z - h))
    # (1/2 pi i) * sum integrand * i r e^{i theta} * (2 pi / N)
    return complex(np.sum(integrand * dzeta) / c.nodes)


def double_contour_mixed(kernel: KernelHandle, u, v, c1: ContourSpec,
                         c2: ContourSpec, outer: str = "c2") -> complex:
    """Mixed holomorphic/anti-holomorphic partial of a sesquiholomorphic
    kernel via nested circle quadrature of its conjugate partner
    g(z1, z2) = k(z1, conj(z2)) against second-order poles.

    The second contour is specified around v and conjugated internally; the
    summation order (outer = "c1" | "c2") only permutes floating-point
    accumulation and must agree to rounding.
    """
    if kernel.field != COMPLEX:
        raise ValueError("double contour quadrature needs a complex-field kernel")
    dom = kernel.domain
    if not isinstance(dom, Disc):
        raise ValueError("contour quadrature needs a disc domain")
    u = complex(u)
    v = complex(v)
    c1, _ = fit_contour(c1, dom)
    c2g = ContourSpec(complex(c2.center).conjugate(), c2.radius, c2.nodes)
    c2g, _ = fit_contour(c2g, dom.conjugate())
    vb = v.conjugate()
    if abs(u - c1.center) >= c1.radius:
        raise DomainError("u must lie strictly inside the first contour")
    if abs(vb - c2g.center) >= c2g.radius:
        raise DomainError("v must lie strictly inside the second contour")
    z1, dz1 = _contour_nodes(c1)
    z2, dz2 = _contour_nodes(c2g)
    grid = np.empty((c1.nodes, c2g.nodes), dtype=complex)
    for a in range(c1.nodes):
        za = z1[a]
        for b in range(c2g.nodes):
            grid[a, b] = kernel.eval(za, z2[b].conjugate())
    grid = grid / ((z1 - u) ** 2)[:, None]
    grid = grid / ((z2 - vb) ** 2)[None, :]
    weighted = grid * dz1[:, None] * dz2[None, :]
    if outer == "c2":
        total = np.sum(np.sum(weighted, axis=0))
    elif outer == "c1":
        total = np.sum(np.sum(weighted, axis=1))
    else:
        raise ValueError("outer must be 'c1' or 'c2'")
    return complex(total / (c1.nodes * c2g.nodes))


def wirtinger_fd(f: HoloFunctionHandle, a, seq: StepSequence,
                 which: str = HOLOMORPHIC) -> tuple:
    """Directional difference quotients along +-1 and +-i.

    Returns (estimate, trace): the estimate averages the four directional
    quotients at the finest step, and the trace records the maximum pairwise
    directional disagreement per step, which must vanish for the respective
    regularity to hold at a.
    """
    if which not in (HOLOMORPHIC, ANTIHOLOMORPHIC):
        raise ValueError("which must be holomorphic|antiholomorphic")
    a = complex(a)
    fa = f.eval(a)
    steps = seq.steps()
    disagreements = []
    last_quotients = None
    for h in steps:
        quotients = []
        for d in WIRTINGER_DIRECTIONS:
            dh = d * h
            den = dh.conjugate() if which == ANTIHOLOMORPHIC else dh
            quotients.append((f.eval(a + dh) - fa) / den)
        worst = max(abs(p - q) for i, p in enumerate(quotients)
                    for q in quotients[i + 1:])
        disagreements.append(worst)
        last_quotients = quotients
    estimate = sum(last_quotients) / len(last_quotients)
    return complex(estimate), DecayTrace.from_values(steps, disagreements)


@dataclass(frozen=True)
class SesquiReport:
    """Central-difference Cauchy-Riemann residuals at one pair (u, v)."""

    point: tuple
    cr_residual_u: float
    anticr_residual_v: float
    du_estimate: complex
    dvbar_estimate: complex
    step: float

    def passed(self, tol: float = 1e-6) -> bool:
        scale = max(1.0, abs(self.du_estimate), abs(self.dvbar_estimate))
        return (self.cr_residual_u <= tol * scale
                and self.anticr_residual_v <= tol * scale)

    def to_json(self) -> dict:
        return {
            "point": self.point,
            "cr_residual_u": self.cr_residual_u,
            "anticr_residual_v": self.anticr_residual_v,
            "step": self.step,
        }


def sesqui_check(kernel: KernelHandle, u, v, step: float = 1e-4) -> SesquiReport:
    """Directional disagreement of the first-slot holomorphic quotient and the
    second-slot anti-holomorphic quotient, by central differences over the
    directions 1 and i."""
    u = complex(u)
    v = complex(v)
    qu = []
    qv = []
    for d in (1.0, 1j):
        t = d * step
        qu.append((kernel.eval(u + t, v) - kernel.eval(u - t, v)) / (2.0 * t))
        qv.append((kernel.eval(u, v + t) - kernel.eval(u, v - t))
                  / (2.0 * t.conjugate()))
    return SesquiReport(
        point=(u, v),
        cr_residual_u=abs(qu[0] - qu[1]),
        anticr_residual_v=abs(qv[0] - qv[1]),
        du_estimate=(qu[0] + qu[1]) / 2.0,
        dvbar_estimate=(qv[0] + qv[1]) / 2.0,
        step=step,
    )


@dataclass(frozen=True)
class HoloSuiteReport:
    kernel: str
    band_halfwidth: float
    far_pairs: int
    seed: int
    hypothesis_met: bool
    conclusion_met: Optional[bool]
    near_reports: tuple
    far_reports: tuple
    far_decay_finals: tuple
    verdict_label: str

    def to_json(self) -> dict:
        return {
            "kernel": self.kernel,
            "band_halfwidth": self.band_halfwidth,
            "far_pairs": self.far_pairs,
            "seed": self.seed,
            "hypothesis_met": self.hypothesis_met,
            "conclusion_met": self.conclusion_met,
            "near": [r.to_json() for r in self.near_reports],
            "far": [r.to_json() for r in self.far_reports],
            "far_decay_finals": list(self.far_decay_finals),
            "verdict_label": self.verdict_label,
        }


def holo_propagation_suite(kernel: KernelHandle, band_halfwidth: float = 0.05,
                           far_pairs: int = 8, seed: int = 0,
                           step: float = 1e-4,
                           tol: float = 1e-6) -> HoloSuiteReport:
    """Check sesquiholomorphy residuals on a diagonal band (hypothesis), then
    at well-separated pairs together with difference-quotient decay
    (sampled evidence for the conclusion).

    Labels state sampled evidence only: finite checks cannot prove the
    universally quantified statement.
    """
    if kernel.field != COMPLEX:
        raise ValueError("the propagation suite needs a complex-field kernel")
    rng = np.random.default_rng((seed, 4441))
    dom = kernel.domain.shrink(band_halfwidth + 10 * step)
    near = []
    for x in dom.sample(rng, max(4, far_pairs // 2)):
        d = band_halfwidth * rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        near.append(sesqui_check(kernel, x, x + d, step=step))
    hypothesis = all(r.passed(tol) for r in near)

    seq = StepSequence(h0=0.05, ratio=0.5, count=12)
    decay_dom = kernel.domain.shrink(seq.h0 * 1.7 + 10 * step)
    far = []
    finals = []
    conclusion: Optional[bool] = None
    if hypothesis:
        got = 0
        trial = 0
        ok = True
        while got < far_pairs and trial < 200 * far_pairs:
            rng_t = np.random.default_rng((seed, 555, trial))
            trial += 1
            u, v = decay_dom.sample(rng_t, 2)
            if abs(u - v) < 0.3:
                continue
            got += 1
            rep = sesqui_check(kernel, u, v, step=step)
            far.append(rep)
            # cross-direction path: the imaginary slope straddles directions
            tr = beta_decay_trace(kernel, u, v, seq, variant=BETA0,
                                  path_slope=0.7j)
            scale = max(1.0, abs(kernel.eval(u, v)))
            finals.append(tr.final)
            ok = ok and rep.passed(tol) and tr.final <= 1e-4 * scale
        conclusion = ok

    if not hypothesis:
        label = "hypothesis not met"
    elif conclusion:
        label = "consistent with sesquiholomorphic propagation"
    else:
        label = "falsifies positive definiteness (conclusion failed under verified hypothesis)"
    return HoloSuiteReport(
        kernel=kernel.name,
        band_halfwidth=band_halfwidth,
        far_pairs=far_pairs,
        seed=seed,
        hypothesis_met=hypothesis,
        conclusion_met=conclusion,
        near_reports=tuple(near),
        far_reports=tuple(far),
        far_decay_finals=tuple(float(t) for t in finals),
        verdict_label=label,
    )
