"""Positive-semidefiniteness certification and pointwise property checks.

The PSD test runs a full symmetric eigendecomposition on the Hermitian part of
the Gram matrix so that certificates quantify the margin (the minimum
eigenvalue), not just pass/fail.  A Hermitian-symmetry violation invalidates
the PSD question and takes precedence over any eigenvalue verdict.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .kernels import GramMatrix, KernelHandle, gram

PSD = "psd"
NOT_PSD = "not_psd"
HERMITIAN_VIOLATION = "hermitian_violation"

DEFAULT_TOL_E = 1e-9
DEFAULT_TOL_H = 1e-10


def _env_threads() -> int:
    raw = os.environ.get("PDKLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class PsdCertificate:
    verdict: str
    min_eigenvalue: float
    hermitian_defect: float
    tolerance_used: float  # eigenvalue threshold actually applied
    dimension: int
    spectral_scale: float
    hermitian_tolerance: float

    @property
    def passed(self) -> bool:
        return self.verdict == PSD

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "min_eigenvalue": self.min_eigenvalue,
            "hermitian_defect": self.hermitian_defect,
            "tolerance_used": self.tolerance_used,
            "dimension": self.dimension,
        }


def check_psd(g: GramMatrix, tol_e: float = DEFAULT_TOL_E,
              tol_h: float = DEFAULT_TOL_H) -> PsdCertificate:
    """Certify a Gram matrix.

    verdict is ``psd`` iff the Hermitian defect is within tol_h and the
    minimum eigenvalue of the Hermitian part is >= -tol_e * max(1, scale),
    where scale is the max absolute row sum of the entries.
    """
    if tol_e <= 0 or tol_h <= 0:
        raise ValueError("tolerances must be positive")
    n = g.dimension
    if n == 0:
        raise ValueError("empty Gram matrix")
    entries = np.asarray(g.entries, dtype=complex)
    if not np.isfinite(entries.view(float)).all():
        raise ValueError("non-finite Gram entry")
    scale = float(np.abs(entries).sum(axis=1).max())
    herm = (entries + entries.conj().T) / 2.0
    min_eig = float(np.linalg.eigvalsh(herm)[0])
    tol_eig = tol_e * max(1.0, scale)
    if g.hermitian_defect > tol_h:
        verdict = HERMITIAN_VIOLATION
    elif min_eig >= -tol_eig:
        verdict = PSD
    else:
        verdict = NOT_PSD
    return PsdCertificate(
        verdict=verdict,
        min_eigenvalue=min_eig,
        hermitian_defect=g.hermitian_defect,
        tolerance_used=tol_eig,
        dimension=n,
        spectral_scale=scale,
        hermitian_tolerance=tol_h,
    )


@dataclass(frozen=True)
class PropertyReport:
    """Worst cases of the pointwise consequences of positive definiteness
    over an exhaustive scan of ordered pairs from a point sample.

    Sign convention: p1_worst and p3_worst are slacks (negative = violation);
    p1_max_imag and p2_worst are defect magnitudes (large = violation).
    """

    p1_worst: float
    p1_max_imag: float
    p2_worst: float
    p3_worst: float
    witnesses: dict
    n_points: int
    scale: float

    def violated(self, tol: float = 1e-10) -> list:
        """Names of the properties violated beyond tol (scale-aware)."""
        t = tol * max(1.0, self.scale)
        out = []
        if self.p1_worst < -t or self.p1_max_imag > t:
            out.append("p1")
        if self.p2_worst > t:
            out.append("p2")
        if self.p3_worst < -t * max(1.0, self.scale):
            out.append("p3")
        return out

    def to_json(self) -> dict:
        return {
            "p1_worst": self.p1_worst,
            "p1_max_imag": self.p1_max_imag,
            "p2_worst": self.p2_worst,
            "p3_worst": self.p3_worst,
            "witnesses": self.witnesses,
            "n_points": self.n_points,
        }


def check_pointwise_properties(kernel: KernelHandle, points: Sequence) -> PropertyReport:
    """Scan all ordered pairs for the diagonal-positivity, Hermitian-symmetry
    and Cauchy-Schwarz consequences of positive definiteness."""
    pts = [complex(p) for p in points]
    if len(pts) < 2:
        raise ValueError("need at least 2 points")
    vals = {}
    for x in pts:
        for y in pts:
            vals[(x, y)] = kernel.eval(x, y)
    scale = max(abs(v) for v in vals.values())

    p1_worst = np.inf
    p1_imag = 0.0
    p1_wit = None
    for x in pts:
        kxx = vals[(x, x)]
        if kxx.real < p1_worst:
            p1_worst = kxx.real
            p1_wit = x
        p1_imag = max(p1_imag, abs(kxx.imag))

    p2_worst = -np.inf
    p2_wit = None
    p3_worst = np.inf
    p3_wit = None
    for x in pts:
        for y in pts:
            d = abs(vals[(x, y)] - vals[(y, x)].conjugate())
            if d > p2_worst:
                p2_worst = d
                p2_wit = (x, y)
            slack = vals[(x, x)].real * vals[(y, y)].real - abs(vals[(x, y)]) ** 2
            if slack < p3_worst:
                p3_worst = slack
                p3_wit = (x, y)

    return PropertyReport(
        p1_worst=float(p1_worst),
        p1_max_imag=float(p1_imag),
        p2_worst=float(p2_worst),
        p3_worst=float(p3_worst),
        witnesses={"p1": p1_wit, "p2": p2_wit, "p3": p3_wit},
        n_points=len(pts),
        scale=float(scale),
    )


@dataclass(frozen=True)
class PsdSuiteReport:
    kernel: str
    trials: int
    n_max: int
    seed: int
    pass_count: int
    fail_count: int
    worst_min_eigenvalue: float
    worst_relative: float  # min over trials of min_eig / max(1, scale)
    worst_points: tuple
    first_failure: Optional[dict]
    tol_e: float
    tol_h: float

    @property
    def all_passed(self) -> bool:
        return self.fail_count == 0

    def to_json(self) -> dict:
        return {
            "kernel": self.kernel,
            "trials": self.trials,
            "n_max": self.n_max,
            "seed": self.seed,
            "pass_count": self.pass_count,
            "fail_count": self.fail_count,
            "worst_min_eigenvalue": self.worst_min_eigenvalue,
            "worst_relative": self.worst_relative,
            "worst_points": self.worst_points,
            "first_failure": self.first_failure,
        }


def _psd_trial(kernel: KernelHandle, n_max: int, seed: int, trial: int,
               tol_e: float, tol_h: float):
    rng = np.random.default_rng((seed, trial))
    n = int(rng.integers(1, n_max + 1))
    pts = kernel.domain.sample(rng, n)
    g = gram(kernel, list(pts))
    return pts, check_psd(g, tol_e=tol_e, tol_h=tol_h)


def random_psd_suite(kernel: KernelHandle, n_max: int, trials: int, seed: int,
                     tol_e: float = DEFAULT_TOL_E, tol_h: float = DEFAULT_TOL_H,
                     threads: Optional[int] = None) -> PsdSuiteReport:
    """Draw seeded random point multisets, build Grams, certify each.

    Per-trial PRNG streams derive from (seed, trial index), so results do not
    depend on execution order; PDKLAB_THREADS (or threads=) enables a thread
    pool over trials.
    """
    if n_max < 1 or trials < 1:
        raise ValueError("n_max and trials must be >= 1")
    threads = _env_threads() if threads is None else max(1, threads)

    def run(trial: int):
        return _psd_trial(kernel, n_max, seed, trial, tol_e, tol_h)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(trials)))
    else:
        results = [run(t) for t in range(trials)]

    pass_count = 0
    worst_eig = np.inf
    worst_rel = np.inf
    worst_pts: tuple = ()
    first_failure = None
    for trial, (pts, cert) in enumerate(results):
        if cert.passed:
            pass_count += 1
        elif first_failure is None:
            first_failure = {
                "trial": trial,
                "verdict": cert.verdict,
                "min_eigenvalue": cert.min_eigenvalue,
                "hermitian_defect": cert.hermitian_defect,
                "points": tuple(complex(p) for p in pts),
            }
        if cert.min_eigenvalue < worst_eig:
            worst_eig = cert.min_eigenvalue
            worst_pts = tuple(complex(p) for p in pts)
        rel = cert.min_eigenvalue / max(1.0, cert.spectral_scale)
        worst_rel = min(worst_rel, rel)

    return PsdSuiteReport(
        kernel=kernel.name,
        trials=trials,
        n_max=n_max,
        seed=seed,
        pass_count=pass_count,
        fail_count=trials - pass_count,
        worst_min_eigenvalue=float(worst_eig),
        worst_relative=float(worst_rel),
        worst_points=worst_pts,
        first_failure=first_failure,
        tol_e=tol_e,
        tol_h=tol_h,
    )
