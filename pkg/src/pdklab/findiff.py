"""Finite-difference calculus on kernels.

Implements the second-order increment operator, the increment-ratio
functionals psi/phi, the curvature-form identity check, decay traces for the
difference-quotient mismatch beta, mixed-partial estimation along shrinking
dyadic step sequences, derivative-kernel construction, and smoothness probing
on and off the diagonal.

Limits in two step variables are sampled along a single dyadic path
l_j = slope * h_j; suites vary the slope to guard against path-dependent
false positives.  Divergence is always a report outcome, never an exception,
so that non-smooth controls flow through the suites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .inequalities import (
    beta0_form,
    beta0_shifted_form,
    beta_lambda_form,
    gamma_form,
    gamma_shifted_form,
)
from .kernels import COMPLEX, REAL, KernelHandle, Smoothness

MODE_REAL = "real"
MODE_SESQUI = "sesqui"

# successive-increment growth that flags a trace as divergent
DIVERGENCE_GROWTH = 10.0
_EPS = float(np.finfo(float).eps)


def default_mode(kernel: KernelHandle) -> str:
    return MODE_SESQUI if kernel.field == COMPLEX else MODE_REAL


@dataclass(frozen=True)
class StepSequence:
    """Dyadic-style shrinking steps h_j = h0 * ratio^j, j = 0..count-1."""

    h0: float
    ratio: float = 0.5
    count: int = 8

    def __post_init__(self) -> None:
        if self.h0 <= 0:
            raise ValueError("h0 must be positive")
        if not 0.0 < self.ratio < 1.0:
            raise ValueError("ratio must lie in (0, 1)")
        if self.count < 3:
            raise ValueError("need at least 3 steps")

    def steps(self) -> list:
        return [self.h0 * self.ratio ** j for j in range(self.count)]


@dataclass(frozen=True)
class DecayTrace:
    """Magnitudes of a quantity along strictly decreasing steps."""

    steps: tuple
    values: tuple
    slope_estimate: Optional[float]
    final: float

    @classmethod
    def from_values(cls, steps, values) -> "DecayTrace":
        steps = tuple(float(s) for s in steps)
        values = tuple(float(v) for v in values)
        if len(steps) != len(values):
            raise ValueError("steps and values must have equal length")
        if any(b >= a for a, b in zip(steps, steps[1:])):
            raise ValueError("steps must be strictly decreasing")
        pairs = [(s, v) for s, v in zip(steps, values) if v > 0.0]
        slope = None
        if len(pairs) >= 2:
            ls = np.log([p[0] for p in pairs])
            lv = np.log([p[1] for p in pairs])
            slope = float(np.polyfit(ls, lv, 1)[0])
        return cls(steps=steps, values=values, slope_estimate=slope,
                   final=values[-1])

    def strictly_decreasing_after(self, skip: int = 0) -> bool:
        tail = self.values[skip:]
        return all(b < a for a, b in zip(tail, tail[1:]))

    def to_json(self) -> dict:
        return {
            "trace": [{"step": s, "value": v} for s, v in zip(self.steps, self.values)],
            "slope_estimate": self.slope_estimate,
            "final": self.final,
        }


# --------------------------------------------------------------------------
# increment operators
# --------------------------------------------------------------------------

def delta(kernel: KernelHandle, u, v, h, l) -> complex:
    """Second-order increment k(u+h,v+l) - k(u,v+l) - k(u+h,v) + k(u,v)."""
    return (kernel.eval(u + h, v + l) - kernel.eval(u, v + l)
            - kernel.eval(u + h, v) + kernel.eval(u, v))


def _ratio_denominator(h, l, mode: str):
    if mode == MODE_SESQUI:
        return complex(h) * complex(l).conjugate()
    return h * l


def psi(kernel: KernelHandle, v, h, l, mode: Optional[str] = None) -> complex:
    """Increment ratio D_{h,l} k(v,v) / (h l) (real) or / (h conj(l)) (sesqui)
    at the diagonal base point (v, v)."""
    if h == 0 or l == 0:
        raise ValueError("steps must be nonzero")
    mode = default_mode(kernel) if mode is None else mode
    if mode == MODE_REAL and kernel.field != REAL:
        raise ValueError("real mode requires a real-field kernel")
    return delta(kernel, v, v, h, l) / _ratio_denominator(h, l, mode)


def phi(kernel: KernelHandle, v, h, l, mode: Optional[str] = None) -> complex:
    """psi(h,h) + psi(l,l) - psi(h,l) - psi(l,h) at the diagonal base (v, v).

    Real-valued up to rounding for Hermitian kernels; identically zero when
    h == l by term cancellation.
    """
    return (psi(kernel, v, h, h, mode) + psi(kernel, v, l, l, mode)
            - psi(kernel, v, h, l, mode) - psi(kernel, v, l, h, mode))


def psi_shifted(kernel: KernelHandle, v, h: float, l: float) -> complex:
    """Chained-configuration increment ratio D_{h,l} k(v, v+h) / (h l)."""
    if h == 0 or l == 0:
        raise ValueError("steps must be nonzero")
    return delta(kernel, v, v + h, h, l) / (h * l)


def _phi_shifted(kernel: KernelHandle, v, h: float, l: float) -> complex:
    # Moving-base combination: every increment is anchored at the chained
    # configuration point it acts from (h from v, l from v+h), which makes
    # gamma_shifted_form an exact algebraic identity for Hermitian kernels.
    def piece(a, xa, b, xb):
        return (kernel.eval(xa + a, xb + b) - kernel.eval(xa, xb + b)
                - kernel.eval(xa + a, xb) + kernel.eval(xa, xb)) / (a * b)

    return (piece(h, v, h, v) + piece(l, v + h, l, v + h)
            - piece(h, v, l, v + h) - piece(l, v + h, h, v))


def gamma_phi_identity(kernel: KernelHandle, v, h, l,
                       mode: Optional[str] = None,
                       variant: str = "plain") -> float:
    """|gamma - phi| where both sides are evaluated from their own closed
    forms.  This is an algebraic identity for Hermitian kernels, so any
    residual beyond rounding indicates an implementation bug."""
    if variant == "plain":
        g = gamma_form(kernel, v, h, l)
        p = phi(kernel, v, h, l, mode)
    elif variant == "shifted":
        if kernel.field != REAL:
            raise ValueError("shifted variant is the real-field identity")
        g = gamma_shifted_form(kernel, v, float(h), float(l))
        p = _phi_shifted(kernel, v, float(h), float(l))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return abs(complex(g) - complex(p))


# --------------------------------------------------------------------------
# decay traces
# --------------------------------------------------------------------------

BETA0 = "beta0"
BETA0_SHIFTED = "beta0_shifted"
BETA_LAMBDA_DERIVATIVE = "beta_lambda_derivative"


def beta_decay_trace(kernel: KernelHandle, u, v, seq: StepSequence,
                     variant: str = BETA0, path_slope=0.7) -> DecayTrace:
    """|beta(h_j, l_j)| along l_j = path_slope * h_j.

    The default slope 0.7 keeps the two steps at distinct decay rates so
    cancellation cannot fake decay; a negative or complex slope straddles the
    base point and is the probe of choice for one-sided kinks.
    """
    hs = seq.steps()
    values = []
    for h in hs:
        l = path_slope * h
        if variant == BETA0:
            val = beta0_form(kernel, u, v, h, l)
        elif variant == BETA0_SHIFTED:
            val = beta0_shifted_form(kernel, u, v, h, l)
        elif variant == BETA_LAMBDA_DERIVATIVE:
            lam = h
            val = (beta_lambda_form(kernel, u, v, lam, h, l)
                   - beta_lambda_form(kernel, u, v, -lam, h, l)) / (2.0 * lam)
        else:
            raise ValueError(f"unknown variant {variant!r}")
        values.append(abs(val))
    return DecayTrace.from_values(hs, values)


@dataclass(frozen=True)
class FdEstimate:
    """Mixed-partial estimate from an increment-ratio sequence."""

    value: complex
    increments: DecayTrace
    diverged: bool
    mode: str
    richardson: bool

    def to_json(self) -> dict:
        return {
            "value": {"re": self.value.real, "im": self.value.imag},
            "increments": self.increments.to_json(),
            "diverged": self.diverged,
            "mode": self.mode,
            "richardson": self.richardson,
        }


def mixed_partial_fd(kernel: KernelHandle, u, v, seq: StepSequence,
                     mode: Optional[str] = None, path_slope=0.7,
                     richardson: bool = False) -> FdEstimate:
    """Estimate the mixed partial at (u, v) as the limit of increment ratios.

    The estimate is the ratio at the finest step; one optional adaptive
    Richardson step extrapolates using the empirical convergence order from
    the last increments.  A trace of successive increment magnitudes is
    returned for convergence diagnosis, with a divergence flag when the
    increments grow by DIVERGENCE_GROWTH over the trace.
    """
    mode = default_mode(kernel) if mode is None else mode
    hs = seq.steps()
    psis = []
    for h in hs:
        l = path_slope * h
        psis.append(delta(kernel, u, v, h, l) / _ratio_denominator(h, l, mode))
    incs = [abs(b - a) for a, b in zip(psis, psis[1:])]
    trace = DecayTrace.from_values(hs[1:], incs)
    min_inc = min(incs)
    # divergence = increments grew substantially over the trace AND remain
    # significant against the ratio scale (rounding-noise growth is not decay
    # failure)
    diverged = (incs[-1] > DIVERGENCE_GROWTH * max(min_inc, 1e-300)
                and incs[-1] > 1e-6 * max(1.0, abs(psis[-1])))
    value = psis[-1]
    used_richardson = False
    if richardson and not diverged and incs[-2] > 0 and incs[-1] > 0:
        p = math.log(incs[-2] / incs[-1]) / math.log(1.0 / seq.ratio)
        p = min(max(p, 0.5), 4.0)
        rp = seq.ratio ** p
        value = psis[-1] - (psis[-2] - psis[-1]) * rp / (1.0 - rp)
        used_richardson = True
    return FdEstimate(value=complex(value), increments=trace, diverged=diverged,
                      mode=mode, richardson=used_richardson)


# --------------------------------------------------------------------------
# stencil fallback and derivative kernels
# --------------------------------------------------------------------------

def fd_mixed_partial_stencil(kernel: KernelHandle, x, y, m1: int, m2: int,
                             step: Optional[float] = None) -> complex:
    """Centered tensor-product stencil for the order-(m1, m2) mixed partial.

    Accuracy is O(step^2) in exact arithmetic; the default step balances the
    truncation and rounding terms for the total order, so expect roughly
    eps^(2/(m1+m2+2)) relative accuracy.  Real steps are used in both slots;
    in the complex field the second slot is interpreted as the conjugated
    direction, which agrees with the anti-holomorphic partial for kernels
    regular enough to have one.
    """
    p = m1 + m2
    if p == 0:
        return kernel.eval(x, y)
    if step is None:
        step = kernel.domain.width * _EPS ** (1.0 / (p + 2))
    acc = 0.0 + 0.0j
    for i in range(m1 + 1):
        ci = (-1.0) ** i * math.comb(m1, i)
        dx = (m1 / 2.0 - i) * step
        for j in range(m2 + 1):
            cj = (-1.0) ** j * math.comb(m2, j)
            dy = (m2 / 2.0 - j) * step
            acc += ci * cj * kernel.eval(x + dx, y + dy)
    return acc / step ** p


DERIVATIVE_KERNEL_FD_STEP_FACTOR = 1e-4


def derivative_kernel(kernel: KernelHandle, m: int,
                      allow_fd: bool = False) -> KernelHandle:
    """The order-(m, m) mixed-partial kernel of a real-field kernel.

    With closed-form derivatives the new handle is exact; otherwise, when
    allow_fd is set, evaluation falls back to a centered stencil with step
    1e-4 * domain width (order 1) and its positivity checks should use a
    relaxed tolerance around 1e-6.
    """
    if m < 0:
        raise ValueError("derivative order must be nonnegative")
    if m == 0:
        return kernel
    if kernel.field != REAL:
        raise ValueError("derivative kernels are defined for real-field kernels")
    declared = kernel.smoothness.sn_order
    if declared is not None and m > declared:
        raise ValueError(f"{kernel.name}: order {m} exceeds declared smoothness "
                         f"{declared}")
    if kernel.closed_form is not None:
        parent = kernel.closed_form

        def fn(x, y, _p=parent, _m=m):
            return complex(_p(x, y, _m, _m)).real

        def deriv(x, y, m1, m2, _p=parent, _m=m):
            return _p(x, y, m1 + _m, m2 + _m)

    elif allow_fd:
        step = DERIVATIVE_KERNEL_FD_STEP_FACTOR * kernel.domain.width
        if m > 1:
            step = kernel.domain.width * _EPS ** (1.0 / (2 * m + 2))

        def fn(x, y, _k=kernel, _m=m, _s=step):
            return complex(fd_mixed_partial_stencil(_k, x, y, _m, _m, step=_s)).real

        deriv = None
    else:
        raise ValueError(f"{kernel.name}: no closed-form derivatives and "
                         f"finite-difference fallback disabled")

    new_sn = None if declared is None else max(declared - m, 0)
    return KernelHandle(
        name=f"{kernel.name}_deriv{m}",
        field=REAL,
        domain=kernel.domain,
        fn=fn,
        params=dict(kernel.params),
        smoothness=Smoothness(sn_order=new_sn, holomorphic_flag=False),
        closed_form=deriv,
        is_pd=kernel.is_pd if (declared is None or m <= declared) else None,
        spec=None,
    )


# --------------------------------------------------------------------------
# smoothness probing
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbeRegion:
    """Sampling plan for smoothness probes: exact-diagonal and banded pairs
    near the diagonal, plus well-separated off-diagonal pairs."""

    near_pairs: int = 6
    far_pairs: int = 6
    band_halfwidth: float = 0.05
    min_far_separation: float = 0.5
    seed: int = 0


@dataclass(frozen=True)
class SnProbeReport:
    kernel: str
    order: int
    records: tuple
    near_all_converged: bool
    far_all_converged: bool
    verdict_label: str

    def to_json(self) -> dict:
        return {
            "kernel": self.kernel,
            "order": self.order,
            "records": list(self.records),
            "near_all_converged": self.near_all_converged,
            "far_all_converged": self.far_all_converged,
            "verdict_label": self.verdict_label,
        }


PROBE_CONVERGENCE_TOL = 1e-3


def _converged(est: FdEstimate) -> bool:
    if est.diverged:
        return False
    scale = max(1.0, abs(est.value), max(est.increments.values, default=0.0))
    return est.increments.final <= PROBE_CONVERGENCE_TOL * scale


def sn_probe(kernel: KernelHandle, region: ProbeRegion, n: int,
             seq: Optional[StepSequence] = None) -> SnProbeReport:
    """Probe mixed-partial convergence of k and of its derivative kernels
    below order n, on the diagonal band and far off the diagonal.

    Divergence is report content: a diagonal divergence means the smoothness
    hypothesis fails there and no propagation claim is made.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if kernel.field != REAL:
        raise ValueError("smoothness probing applies to real-field kernels")
    seq = seq or StepSequence(h0=0.1, ratio=0.5, count=12)
    rng = np.random.default_rng((region.seed, 977))
    excursion = seq.h0 * (1.0 + 0.7) + region.band_halfwidth + 0.05
    dom = kernel.domain.shrink(excursion)

    pairs = []
    base = dom.sample(rng, region.near_pairs)
    for i, x in enumerate(base):
        x = float(np.real(x))
        if i % 2 == 0:
            pairs.append(("near", x, x))  # exact diagonal
        else:
            d = float(rng.uniform(-region.band_halfwidth, region.band_halfwidth))
            pairs.append(("near", x, x + d))
    tries = 0
    far = []
    while len(far) < region.far_pairs and tries < 200 * region.far_pairs:
        u, v = (float(np.real(t)) for t in dom.sample(rng, 2))
        tries += 1
        if abs(u - v) >= region.min_far_separation:
            far.append(("far", u, v))
    pairs.extend(far)

    handles = [derivative_kernel(kernel, m, allow_fd=True) for m in range(n)]
    records = []
    near_ok = True
    far_ok = True
    for zone, u, v in pairs:
        for m, handle in enumerate(handles):
            est = mixed_partial_fd(handle, u, v, seq)
            ok = _converged(est)
            records.append({
                "zone": zone,
                "point": (u, v),
                "order": m,
                "converged": ok,
                "diverged": est.diverged,
                "final_increment": est.increments.final,
                "estimate": est.value,
            })
            if zone == "near":
                near_ok = near_ok and ok
            else:
                far_ok = far_ok and ok

    if not near_ok:
        label = "diagonal hypothesis not met"
    elif far_ok:
        label = "consistent with mixed-derivative propagation"
    else:
        label = "propagation check failed"
    return SnProbeReport(
        kernel=kernel.name,
        order=n,
        records=tuple(records),
        near_all_converged=near_ok,
        far_all_converged=far_ok,
        verdict_label=label,
    )


# --------------------------------------------------------------------------
# seeded suites
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class IdentitySuiteReport:
    kernel: str
    variant: str
    trials: int
    seed: int
    tol: float
    max_relative_residual: float
    failures: int

    @property
    def all_passed(self) -> bool:
        return self.failures == 0

    def to_json(self) -> dict:
        return {
            "kernel": self.kernel,
            "variant": self.variant,
            "trials": self.trials,
            "seed": self.seed,
            "tol": self.tol,
            "max_relative_residual": self.max_relative_residual,
            "failures": self.failures,
        }


def gamma_phi_identity_suite(kernel: KernelHandle, variant: str, trials: int,
                             seed: int, tol: float = 1e-10,
                             step_lo: float = 0.02,
                             step_hi: float = 0.25) -> IdentitySuiteReport:
    """Seeded residuals of the curvature-form identity; the tolerance is
    relative to the largest kernel value entering the draw."""
    margin = (2.0 if variant == "shifted" else 1.0) * step_hi + 0.05
    dom = kernel.domain.shrink(margin)
    worst = 0.0
    failures = 0
    for trial in range(trials):
        rng = np.random.default_rng((seed, trial))
        v = dom.sample(rng, 1)[0]
        if kernel.field == COMPLEX and variant == "plain":
            mags = rng.uniform(step_lo, step_hi, size=2)
            args = rng.uniform(0, 2 * np.pi, size=2)
            h, l = mags * np.exp(1j * args)
        else:
            v = float(np.real(v))
            mags = rng.uniform(step_lo, step_hi, size=2)
            signs = rng.choice([-1.0, 1.0], size=2)
            h, l = (float(t) for t in mags * signs)
        res = gamma_phi_identity(kernel, v, h, l, variant=variant)
        probe = [kernel.eval(v, v), kernel.eval(v + h, v + h)]
        scale = max(1.0, max(abs(t) for t in probe))
        rel = res / scale
        worst = max(worst, rel)
        if rel > tol:
            failures += 1
    return IdentitySuiteReport(
        kernel=kernel.name,
        variant=variant,
        trials=trials,
        seed=seed,
        tol=tol,
        max_relative_residual=float(worst),
        failures=failures,
    )


@dataclass(frozen=True)
class DecaySuiteReport:
    kernel: str
    variant: str
    points: int
    seed: int
    tol: float
    max_final: float
    max_relative_final: float
    non_decaying: int
    traces: tuple

    @property
    def all_passed(self) -> bool:
        return self.non_decaying == 0

    def to_json(self) -> dict:
        return {
            "kernel": self.kernel,
            "variant": self.variant,
            "points": self.points,
            "seed": self.seed,
            "tol": self.tol,
            "max_final": self.max_final,
            "max_relative_final": self.max_relative_final,
            "non_decaying": self.non_decaying,
            "traces": [t.to_json() for t in self.traces],
        }


def beta_decay_suite(kernel: KernelHandle, points: int, seq: StepSequence,
                     seed: int, variant: str = BETA0, path_slope=0.7,
                     tol: float = 1e-4,
                     min_separation: float = 0.2) -> DecaySuiteReport:
    """Decay of the difference-quotient mismatch at seeded off-diagonal pairs."""
    margin = seq.h0 * (1.0 + abs(path_slope)) + 0.05
    if variant == BETA0_SHIFTED:
        margin = seq.h0 * (1.0 + abs(path_slope)) * 2.0 + 0.05
    dom = kernel.domain.shrink(margin)
    traces = []
    max_final = 0.0
    max_rel = 0.0
    non_decaying = 0
    got = 0
    trial = 0
    while got < points and trial < 200 * points:
        rng = np.random.default_rng((seed, trial))
        trial += 1
        u, v = dom.sample(rng, 2)
        if abs(u - v) < min_separation:
            continue
        got += 1
        tr = beta_decay_trace(kernel, u, v, seq, variant=variant,
                              path_slope=path_slope)
        scale = max(1.0, abs(kernel.eval(u, v)), abs(kernel.eval(u, u)),
                    abs(kernel.eval(v, v)))
        traces.append(tr)
        max_final = max(max_final, tr.final)
        max_rel = max(max_rel, tr.final / scale)
        if tr.final / scale > tol:
            non_decaying += 1
    return DecaySuiteReport(
        kernel=kernel.name,
        variant=variant,
        points=got,
        seed=seed,
        tol=tol,
        max_final=float(max_final),
        max_relative_final=float(max_rel),
        non_decaying=non_decaying,
        traces=tuple(traces),
    )
