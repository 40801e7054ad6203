"""Witnesses for the 3-, 4- and 5-point consequences of positive definiteness.

Each witness evaluates one instance of an inequality and records every
constituent term together with the signed defect RHS - LHS, so a defect below
zero (beyond rounding) falsifies positive definiteness with reproducible data.

The free coefficient in the underlying quadratic form is eliminated
analytically (its optimizer is substituted), so each witness tests the sharp,
post-substitution inequality:

    three_point          |k(x1,x2) - k(x1,x3)|^2 <= k(x1,x1) * 2 Re(mid)
    four_point           |beta0|^2 <= k(u,u) * gamma       (steps at v)
    four_point_shifted   |beta0_shifted|^2 <= k(u,u) * gamma0 (chained steps)
    five_point           |B_form|^2 <= A_form * C_form     (block route)
    block                |z^T B conj(w)|^2 <= (z^T A conj(z)) (w^T C conj(w))
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .kernels import COMPLEX, REAL, KernelHandle

DEGENERATE_DIAG_TOL = 1e-14

THREE_POINT = "three_point"
FOUR_POINT = "four_point"
FOUR_POINT_SHIFTED = "four_point_shifted"
FIVE_POINT = "five_point"
BLOCK = "block"


@dataclass(frozen=True)
class InequalityWitness:
    name: str
    inputs: dict
    terms: dict
    defect: float
    scale: float  # max(1, |k| values entering the witness)
    degenerate: bool = False
    im_residual: float = 0.0

    @property
    def relative_defect(self) -> float:
        return self.defect / self.scale

    def recomputed_defect(self) -> float:
        """Re-derive the defect from the stored terms (self-consistency)."""
        t = self.terms
        if self.name == THREE_POINT:
            return float((t["rhs"] - t["lhs"]).real)
        if self.name == FOUR_POINT:
            if self.degenerate:
                return -abs(t["β0"]) ** 2
            return complex(t["k_uu"]).real * complex(t["γ"]).real - abs(t["β0"]) ** 2
        if self.name == FOUR_POINT_SHIFTED:
            if self.degenerate:
                return -abs(t["β0_shifted"]) ** 2
            return (complex(t["k_uu"]).real * complex(t["γ0_shifted"]).real
                    - abs(t["β0_shifted"]) ** 2)
        if self.name in (FIVE_POINT, BLOCK):
            return (complex(t["A_form"]).real * complex(t["C_form"]).real
                    - abs(t["B_form"]) ** 2)
        raise ValueError(f"unknown witness {self.name!r}")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "inputs": self.inputs,
            "terms": self.terms,
            "defect": self.defect,
            "scale": self.scale,
            "degenerate": self.degenerate,
            "im_residual": self.im_residual,
        }


def _scale(*values) -> float:
    return max(1.0, max(abs(complex(v)) for v in values))


# --------------------------------------------------------------------------
# closed forms shared with the finite-difference lab
# --------------------------------------------------------------------------

def beta0_form(kernel: KernelHandle, u, v, h, l) -> complex:
    """k(u,v+h)/conj(h) + k(u,v)(1/conj(l) - 1/conj(h)) - k(u,v+l)/conj(l)."""
    ihc = (1.0 / complex(h)).conjugate()
    ilc = (1.0 / complex(l)).conjugate()
    return (kernel.eval(u, v + h) * ihc
            + kernel.eval(u, v) * (ilc - ihc)
            - kernel.eval(u, v + l) * ilc)


def beta_lambda_form(kernel: KernelHandle, u, v, lam, h, l) -> complex:
    """beta0 with the fixed slot shifted to u + lam."""
    return beta0_form(kernel, u + lam, v, h, l)


def gamma_form(kernel: KernelHandle, v, h, l) -> complex:
    """Diagonal curvature form at base v with steps h, l.

    Real for Hermitian kernels up to the imaginary parts of the diagonal
    entries, which are kept so that controls stay observable.
    """
    h = complex(h)
    l = complex(l)
    ih = 1.0 / h
    il = 1.0 / l
    ihc = ih.conjugate()
    ilc = il.conjugate()
    diag = (kernel.eval(v + h, v + h) * abs(ih) ** 2
            + kernel.eval(v, v) * abs(il - ih) ** 2
            + kernel.eval(v + l, v + l) * abs(il) ** 2)
    cross = (kernel.eval(v + h, v) * ih * (ilc - ihc)
             + kernel.eval(v + h, v + l) * ih * (-ilc)
             + kernel.eval(v, v + l) * (il - ih) * (-ilc))
    return diag + 2.0 * complex(cross).real


def beta0_shifted_form(kernel: KernelHandle, u, v, h, l) -> complex:
    """[k(u,v+h) - k(u,v)]/h - [k(u,v+h+l) - k(u,v+h)]/l (real steps)."""
    kvh = kernel.eval(u, v + h)
    return ((kvh - kernel.eval(u, v)) / h
            - (kernel.eval(u, v + h + l) - kvh) / l)


def gamma_shifted_form(kernel: KernelHandle, v, h, l) -> complex:
    """Curvature form for the chained configuration v, v+h, v+h+l (real steps)."""
    a, b, c = v, v + h, v + h + l
    ih = 1.0 / h
    il = 1.0 / l
    diag = (kernel.eval(a, a) * ih ** 2
            + kernel.eval(b, b) * (il + ih) ** 2
            + kernel.eval(c, c) * il ** 2)
    cross = (kernel.eval(a, b) * (-ih) * (il + ih)
             + kernel.eval(a, c) * (ih * il)
             + kernel.eval(b, c) * (-il) * (ih + il))
    return diag + 2.0 * complex(cross).real


# --------------------------------------------------------------------------
# witnesses
# --------------------------------------------------------------------------

def three_point_defect(kernel: KernelHandle, x1, x2, x3) -> InequalityWitness:
    """Increment-vs-diagonal-modulus inequality at three points."""
    k11 = kernel.eval(x1, x1)
    k12 = kernel.eval(x1, x2)
    k13 = kernel.eval(x1, x3)
    k22 = kernel.eval(x2, x2)
    k33 = kernel.eval(x3, x3)
    k23 = kernel.eval(x2, x3)
    mid = (k22 + k33) / 2.0 - k23
    rhs = k11.real * 2.0 * mid.real
    lhs = abs(k12 - k13) ** 2
    return InequalityWitness(
        name=THREE_POINT,
        inputs={"x1": x1, "x2": x2, "x3": x3},
        terms={"k11": k11, "k12": k12, "k13": k13, "k22": k22, "k33": k33,
               "k23": k23, "lhs": lhs, "rhs": rhs},
        defect=float(rhs - lhs),
        scale=_scale(k11, k12, k13, k22, k33, k23),
        im_residual=abs(k11.imag),
    )


def four_point_witness(kernel: KernelHandle, u, v, h, l) -> InequalityWitness:
    """|beta0|^2 <= k(u,u) * gamma at points u, v+h, v, v+l.

    Complex steps are allowed in the complex field (conjugated denominators);
    when k(u,u) vanishes the defect degenerates to -|beta0|^2 and is flagged.
    """
    if h == 0 or l == 0:
        raise ValueError("steps h, l must be nonzero")
    if kernel.field == REAL and (complex(h).imag != 0 or complex(l).imag != 0):
        raise ValueError("real-field kernel needs real steps")
    kuu = kernel.eval(u, u)
    b0 = beta0_form(kernel, u, v, h, l)
    g = gamma_form(kernel, v, h, l)
    degenerate = abs(kuu.real) <= DEGENERATE_DIAG_TOL * _scale(kuu)
    if degenerate:
        defect = -abs(b0) ** 2
    else:
        defect = kuu.real * g.real - abs(b0) ** 2
    sc = _scale(kuu, kernel.eval(u, v + h), kernel.eval(u, v), kernel.eval(u, v + l),
                kernel.eval(v + h, v + h), kernel.eval(v, v), kernel.eval(v + l, v + l),
                kernel.eval(v + h, v), kernel.eval(v + h, v + l), kernel.eval(v, v + l))
    return InequalityWitness(
        name=FOUR_POINT,
        inputs={"u": u, "v": v, "h": h, "l": l},
        terms={"β0": b0, "γ": g, "k_uu": kuu},
        defect=float(defect),
        scale=sc,
        degenerate=degenerate,
        im_residual=abs(complex(g).imag),
    )


def four_point_shifted_witness(kernel: KernelHandle, u, v, h: float,
                               l: float) -> InequalityWitness:
    """|beta0_shifted|^2 <= k(u,u) * gamma0 at points u, v, v+h, v+h+l."""
    if h == 0 or l == 0:
        raise ValueError("steps h, l must be nonzero")
    if kernel.field != REAL:
        raise ValueError("the shifted witness is the real-field variant")
    h = float(h)
    l = float(l)
    kuu = kernel.eval(u, u)
    b0 = beta0_shifted_form(kernel, u, v, h, l)
    g0 = gamma_shifted_form(kernel, v, h, l)
    degenerate = abs(kuu.real) <= DEGENERATE_DIAG_TOL * _scale(kuu)
    if degenerate:
        defect = -abs(b0) ** 2
    else:
        defect = kuu.real * g0.real - abs(b0) ** 2
    sc = _scale(kuu, kernel.eval(u, v), kernel.eval(u, v + h),
                kernel.eval(u, v + h + l), kernel.eval(v, v),
                kernel.eval(v + h, v + h), kernel.eval(v + h + l, v + h + l),
                kernel.eval(v, v + h), kernel.eval(v, v + h + l),
                kernel.eval(v + h, v + h + l))
    return InequalityWitness(
        name=FOUR_POINT_SHIFTED,
        inputs={"u": u, "v": v, "h": h, "l": l},
        terms={"β0_shifted": b0, "γ0_shifted": g0, "k_uu": kuu},
        defect=float(defect),
        scale=sc,
        degenerate=degenerate,
        im_residual=abs(complex(g0).imag),
    )


def five_point_witness(kernel: KernelHandle, u, v, lam: float, h: float,
                       l: float) -> InequalityWitness:
    """Second-mixed-derivative block inequality at u, u+lam, v+h, v, v+l:
    |(beta_lam - beta0)/lam|^2 <= (D_{lam,lam} k(u,u)/lam^2) * gamma."""
    if lam == 0 or h == 0 or l == 0:
        raise ValueError("steps lam, h, l must be nonzero")
    if kernel.field != REAL:
        raise ValueError("the five-point witness is the real-field variant")
    lam = float(lam)
    h = float(h)
    l = float(l)
    kuu = kernel.eval(u, u)
    k_ul = kernel.eval(u, u + lam)
    k_lu = kernel.eval(u + lam, u)
    k_ll = kernel.eval(u + lam, u + lam)
    a_form = (k_ll - k_lu - k_ul + kuu) / lam ** 2
    b_lam = beta_lambda_form(kernel, u, v, lam, h, l)
    b_0 = beta0_form(kernel, u, v, h, l)
    b_form = (b_lam - b_0) / lam
    c_form = gamma_form(kernel, v, h, l)
    defect = a_form.real * c_form.real - abs(b_form) ** 2
    sc = _scale(kuu, k_ll, k_ul, kernel.eval(v, v), kernel.eval(v + h, v + h),
                kernel.eval(v + l, v + l), kernel.eval(u, v + h),
                kernel.eval(u, v), kernel.eval(u, v + l),
                kernel.eval(u + lam, v + h), kernel.eval(u + lam, v),
                kernel.eval(u + lam, v + l))
    return InequalityWitness(
        name=FIVE_POINT,
        inputs={"u": u, "v": v, "λ": lam, "h": h, "l": l},
        terms={"A_form": a_form, "B_form": b_form, "C_form": c_form,
               "β_λ": b_lam, "β0": b_0, "k_uu": kuu},
        defect=float(defect),
        scale=sc,
        im_residual=abs(complex(c_form).imag),
    )


def block_psd_inequality(T, r1: int, z, w,
                         hermitian_tol: float = 1e-8) -> InequalityWitness:
    """Partitioned quadratic-form inequality for a PSD matrix T of order
    r1 + r2: |z^T B conj(w)|^2 <= (z^T A conj(z)) (w^T C conj(w))."""
    T = np.asarray(T, dtype=complex)
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    n = T.shape[0]
    if T.shape != (n, n):
        raise ValueError("T must be square")
    r2 = n - r1
    if r1 < 1 or r2 < 1:
        raise ValueError("both blocks must be nonempty")
    if z.shape != (r1,) or w.shape != (r2,):
        raise ValueError(f"need dim(z)={r1} and dim(w)={r2}, got {z.shape}, {w.shape}")
    herm_defect = float(np.abs(T - T.conj().T).max())
    if herm_defect > hermitian_tol * max(1.0, float(np.abs(T).max())):
        raise ValueError(f"T is not Hermitian within tolerance (defect {herm_defect})")
    A = T[:r1, :r1]
    B = T[:r1, r1:]
    C = T[r1:, r1:]
    a_form = complex(z @ A @ z.conj())
    b_form = complex(z @ B @ w.conj())
    c_form = complex(w @ C @ w.conj())
    defect = a_form.real * c_form.real - abs(b_form) ** 2
    return InequalityWitness(
        name=BLOCK,
        inputs={"r1": r1, "r2": r2, "z": tuple(z.tolist()), "w": tuple(w.tolist())},
        terms={"A_form": a_form, "B_form": b_form, "C_form": c_form},
        defect=float(defect),
        scale=max(1.0, float(np.abs(T).max()) * max(1.0, float(np.abs(z).max())) ** 2
                  * max(1.0, float(np.abs(w).max())) ** 2),
        im_residual=max(abs(a_form.imag), abs(c_form.imag)),
    )


# --------------------------------------------------------------------------
# seeded suites
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class WitnessSuiteReport:
    kernel: str
    witness: str
    trials: int
    seed: int
    tol: float
    min_defect: float
    min_relative_defect: float
    violations: int
    worst: Optional[InequalityWitness]

    @property
    def all_passed(self) -> bool:
        return self.violations == 0

    def to_json(self) -> dict:
        return {
            "kernel": self.kernel,
            "witness": self.witness,
            "trials": self.trials,
            "seed": self.seed,
            "tol": self.tol,
            "min_defect": self.min_defect,
            "min_relative_defect": self.min_relative_defect,
            "violations": self.violations,
            "worst": self.worst.to_json() if self.worst is not None else None,
        }


def _draw_steps(rng: np.random.Generator, kernel: KernelHandle, count: int,
                lo: float, hi: float):
    mags = rng.uniform(lo, hi, size=count)
    if kernel.field == COMPLEX:
        args = rng.uniform(0.0, 2.0 * np.pi, size=count)
        return mags * np.exp(1j * args)
    signs = rng.choice([-1.0, 1.0], size=count)
    return mags * signs


def random_witness_suite(kernel: KernelHandle, witness: str, trials: int,
                         seed: int, tol: float = 1e-8,
                         step_lo: float = 0.08,
                         step_hi: float = 0.3) -> WitnessSuiteReport:
    """Seeded random evaluation of one witness family over the kernel domain.

    Base points are drawn from the domain shrunk by the largest possible
    probe excursion, so every shifted point stays inside.
    """
    if witness == THREE_POINT:
        margin = 0.0
    elif witness in (FOUR_POINT, FIVE_POINT):
        margin = step_hi + 0.05
    elif witness == FOUR_POINT_SHIFTED:
        margin = 2.0 * step_hi + 0.05
    else:
        raise ValueError(f"unknown witness family {witness!r}")
    dom = kernel.domain if margin == 0.0 else kernel.domain.shrink(margin)

    min_defect = np.inf
    min_rel = np.inf
    worst = None
    violations = 0
    for trial in range(trials):
        rng = np.random.default_rng((seed, trial))
        if witness == THREE_POINT:
            x1, x2, x3 = dom.sample(rng, 3)
            wit = three_point_defect(kernel, x1, x2, x3)
        elif witness == FOUR_POINT:
            u, v = dom.sample(rng, 2)
            h, l = _draw_steps(rng, kernel, 2, step_lo, step_hi)
            wit = four_point_witness(kernel, u, v, h, l)
        elif witness == FOUR_POINT_SHIFTED:
            u, v = dom.sample(rng, 2)
            h, l = _draw_steps(rng, kernel, 2, step_lo, step_hi)
            wit = four_point_shifted_witness(kernel, u, v, float(h), float(l))
        else:
            u, v = dom.sample(rng, 2)
            lam, h, l = _draw_steps(rng, kernel, 3, step_lo, step_hi)
            wit = five_point_witness(kernel, u, v, float(lam), float(h), float(l))
        rel = wit.relative_defect
        if rel < min_rel:
            min_rel = rel
            worst = wit
        min_defect = min(min_defect, wit.defect)
        if rel < -tol:
            violations += 1

    return WitnessSuiteReport(
        kernel=kernel.name,
        witness=witness,
        trials=trials,
        seed=seed,
        tol=tol,
        min_defect=float(min_defect),
        min_relative_defect=float(min_rel),
        violations=violations,
        worst=worst,
    )


def random_block_suite(trials: int, seed: int, tol: float = 1e-10,
                       r1_choices: Sequence[int] = (1, 2, 3),
                       r2_choices: Sequence[int] = (1, 2, 3)) -> WitnessSuiteReport:
    """Seeded PSD matrices T = R R* with random block splits and vectors."""
    min_defect = np.inf
    min_rel = np.inf
    worst = None
    violations = 0
    for trial in range(trials):
        rng = np.random.default_rng((seed, trial))
        r1 = int(rng.choice(r1_choices))
        r2 = int(rng.choice(r2_choices))
        n = r1 + r2
        R = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        T = R @ R.conj().T
        z = rng.standard_normal(r1) + 1j * rng.standard_normal(r1)
        w = rng.standard_normal(r2) + 1j * rng.standard_normal(r2)
        wit = block_psd_inequality(T, r1, z, w)
        rel = wit.relative_defect
        if rel < min_rel:
            min_rel = rel
            worst = wit
        min_defect = min(min_defect, wit.defect)
        if rel < -tol:
            violations += 1
    return WitnessSuiteReport(
        kernel="(matrix)",
        witness=BLOCK,
        trials=trials,
        seed=seed,
        tol=tol,
        min_defect=float(min_defect),
        min_relative_defect=float(min_rel),
        violations=violations,
        worst=worst,
    )
