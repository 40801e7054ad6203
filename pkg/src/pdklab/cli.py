"""Command-line front end: run the lab suites over a kernel spec file and
write one machine-readable JSON report per invocation.

Exit codes: 0 = suites consistent, 1 = a falsification or property violation
was found (witnesses are in the report), 2 = usage or I/O error.  Identical
(config, seed) pairs produce byte-identical report files: reports carry no
timestamps and all randomness derives from the seed.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import findiff, grouplift, holo, inequalities, psd
from .domains import DomainError
from .kernels import (
    COMPLEX,
    REAL,
    KernelHandle,
    SpecError,
    load_kernel,
)
from .serialize import dump_report, to_jsonable

SCHEMA = "pdklab-report-v1"

PASS = "pass"
VIOLATION = "violation"
HYPOTHESIS_NOT_MET = "hypothesis_not_met"
SKIPPED = "skipped"

# functional description of what each section's pass verdict witnesses
CLAIMS = {
    "properties": "diagonal values are nonnegative reals, the kernel is "
                  "Hermitian, and the two-point Cauchy-Schwarz bound holds",
    "psd": "every sampled Gram matrix is positive semidefinite",
    "three_point": "squared increments are bounded by the diagonal modulus",
    "four_point": "the difference-quotient mismatch is bounded by the "
                  "diagonal curvature form",
    "four_point_shifted": "the chained difference-quotient mismatch is "
                          "bounded by its curvature form",
    "five_point": "the second-mixed-quotient is bounded by the block form",
    "block": "the partitioned quadratic-form bound holds on sampled PSD "
             "matrices",
    "gamma_phi_identity": "the curvature form equals its increment-ratio "
                          "combination",
    "beta_decay": "the difference-quotient mismatch vanishes with the step",
    "sn_probe": "mixed-derivative estimates converge on and off the diagonal",
    "holo": "complex-differentiability residuals vanish near the diagonal "
            "and at separated pairs",
    "lift": "the lifted function is positive definite and its regularity "
            "propagates through the sum set",
}


@dataclass
class RunConfig:
    command: str
    kernel_spec_path: str
    tol_e: float = psd.DEFAULT_TOL_E
    tol_h: float = psd.DEFAULT_TOL_H
    seed: int = 42
    trials: int = 500
    n_max: int = 12
    output_path: str = "report.json"
    step_h0: float = 0.1
    step_ratio: float = 0.5
    step_count: int = 8
    band: float = 0.05

    def __post_init__(self) -> None:
        if self.tol_e <= 0 or self.tol_h <= 0:
            raise ValueError("tolerances must be positive")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    def step_sequence(self, count: Optional[int] = None) -> findiff.StepSequence:
        return findiff.StepSequence(h0=self.step_h0, ratio=self.step_ratio,
                                    count=count or self.step_count)


def _section(status: str, **details) -> dict:
    return {"status": status, **details}


def _sample_points(kernel: KernelHandle, seed: int, n: int = 32):
    rng = np.random.default_rng((seed, 9001))
    return list(kernel.domain.sample(rng, n))


def section_properties(kernel: KernelHandle, cfg: RunConfig) -> dict:
    pts = _sample_points(kernel, cfg.seed)
    rep = psd.check_pointwise_properties(kernel, pts)
    violated = rep.violated(tol=cfg.tol_h)
    status = PASS if not violated else VIOLATION
    return _section(status, violated=violated, report=rep.to_json())


def section_psd(kernel: KernelHandle, cfg: RunConfig) -> dict:
    rep = psd.random_psd_suite(kernel, n_max=cfg.n_max, trials=cfg.trials,
                               seed=cfg.seed, tol_e=cfg.tol_e, tol_h=cfg.tol_h)
    status = PASS if rep.all_passed else VIOLATION
    return _section(status, report=rep.to_json())


def section_ineq(kernel: KernelHandle, cfg: RunConfig) -> dict:
    out = {}
    worst_status = PASS
    families = [inequalities.THREE_POINT, inequalities.FOUR_POINT]
    if kernel.field == REAL:
        families += [inequalities.FOUR_POINT_SHIFTED, inequalities.FIVE_POINT]
    for fam in families:
        rep = inequalities.random_witness_suite(kernel, fam, trials=cfg.trials,
                                                seed=cfg.seed)
        out[fam] = rep.to_json()
        if not rep.all_passed:
            worst_status = VIOLATION
    block = inequalities.random_block_suite(trials=min(cfg.trials, 2000),
                                            seed=cfg.seed)
    out["block"] = block.to_json()
    if not block.all_passed:
        worst_status = VIOLATION
    return _section(worst_status, suites=out)


def section_findiff(kernel: KernelHandle, cfg: RunConfig) -> dict:
    out = {}
    status = PASS
    idn = findiff.gamma_phi_identity_suite(
        kernel, "plain", trials=min(cfg.trials, 1000), seed=cfg.seed)
    out["identity_plain"] = idn.to_json()
    if not idn.all_passed:
        status = VIOLATION
    if kernel.field == REAL:
        ids = findiff.gamma_phi_identity_suite(
            kernel, "shifted", trials=min(cfg.trials, 1000), seed=cfg.seed)
        out["identity_shifted"] = ids.to_json()
        if not ids.all_passed:
            status = VIOLATION

    seq = cfg.step_sequence(count=max(cfg.step_count, 12))
    decay = findiff.beta_decay_suite(kernel, points=12, seq=seq, seed=cfg.seed)
    out["beta_decay"] = decay.to_json()
    if not decay.all_passed:
        status = VIOLATION

    if kernel.field == REAL:
        order = kernel.smoothness.sn_order
        if order is not None and order >= 1:
            region = findiff.ProbeRegion(near_pairs=6, far_pairs=6,
                                         band_halfwidth=cfg.band, seed=cfg.seed)
            probe = findiff.sn_probe(kernel, region, n=min(order, 2),
                                     seq=cfg.step_sequence(count=12))
            out["sn_probe"] = {
                "verdict_label": probe.verdict_label,
                "near_all_converged": probe.near_all_converged,
                "far_all_converged": probe.far_all_converged,
            }
            if not probe.near_all_converged:
                status = HYPOTHESIS_NOT_MET if status == PASS else status
            elif not probe.far_all_converged:
                status = VIOLATION
        else:
            out["sn_probe"] = {"skipped": "no declared smoothness to probe"}
    else:
        out["sn_probe"] = {"skipped": "real-variable probe; kernel is complex-field"}
    return _section(status, suites=out)


def section_holo(kernel: KernelHandle, cfg: RunConfig) -> dict:
    if kernel.field != COMPLEX:
        return _section(SKIPPED, reason="real-field kernel")
    suite = holo.holo_propagation_suite(kernel, band_halfwidth=cfg.band,
                                        far_pairs=8, seed=cfg.seed)
    if suite.hypothesis_met and suite.conclusion_met:
        status = PASS
    elif not suite.hypothesis_met:
        status = HYPOTHESIS_NOT_MET
    else:
        status = VIOLATION
    return _section(status, report=suite.to_json())


def section_lift(kernel: KernelHandle, cfg: RunConfig) -> dict:
    spec = kernel.spec
    if spec is None or spec.kind != "lift":
        raise SpecError("kind", "the lift command needs a lift-kind kernel spec")
    from .kernels import LIFT_FUNCTIONS

    f, fderiv = LIFT_FUNCTIONS[spec.function]
    star = grouplift.StarMap(spec.star)
    rng = np.random.default_rng((cfg.seed, 11))
    omega_sample = list(kernel.domain.sample(rng, 12))
    sets = grouplift.codiff_and_diagonal(omega_sample, star)
    pdrep = grouplift.pd_function_check(f, star, kernel.domain,
                                        n_max=cfg.n_max, trials=cfg.trials,
                                        seed=cfg.seed, tol_e=cfg.tol_e,
                                        tol_h=cfg.tol_h)
    cont = grouplift.continuity_propagation_report(
        kernel, probe_pairs=min(cfg.trials * 4, 4000), seed=cfg.seed)
    status = PASS
    if not pdrep.all_passed or cont.pd_falsified:
        status = VIOLATION
    out = {"codiff": sets.to_json(), "pd_check": pdrep.to_json(),
           "continuity": cont.to_json()}
    if star.tag != grouplift.STAR_NEGATED_CONJUGATE:
        reg = grouplift.regularity_propagation_suite(
            f, star, smoothness_order=1, seed=cfg.seed, f_derivative=fderiv,
            domain=kernel.domain)
        out["regularity"] = reg.to_json()
        if reg.probe_label == "propagation check failed":
            status = VIOLATION
    return _section(status, suites=out)


SECTION_BUILDERS = {
    "props": [("properties", section_properties)],
    "psd-check": [("psd", section_psd)],
    "ineq": [("ineq", section_ineq)],
    "findiff": [("findiff", section_findiff)],
    "holo": [("holo", section_holo)],
    "lift": [("lift", section_lift)],
}


def _p2_gate_failed(sections: dict, tol_h: float) -> bool:
    props = sections.get("properties")
    return bool(props and "p2" in props.get("violated", []))


def run(config: RunConfig) -> int:
    """Execute the configured command, write the report, return exit status."""
    kernel = load_kernel(config.kernel_spec_path)
    sections: dict = {}
    if config.command == "report-all":
        sections["properties"] = section_properties(kernel, config)
        downstream = [("psd", section_psd), ("ineq", section_ineq),
                      ("findiff", section_findiff), ("holo", section_holo)]
        if _p2_gate_failed(sections, config.tol_h):
            # Hermitian symmetry underlies every later derivation; skip rather
            # than report meaningless downstream numbers.
            for name, _ in downstream:
                sections[name] = _section(SKIPPED,
                                          reason="Hermitian-symmetry violation")
        else:
            for name, builder in downstream:
                sections[name] = builder(kernel, config)
    elif config.command in SECTION_BUILDERS:
        for name, builder in SECTION_BUILDERS[config.command]:
            sections[name] = builder(kernel, config)
    else:
        raise SpecError("command", f"unknown command {config.command!r}")

    has_violation = any(s.get("status") == VIOLATION for s in sections.values())
    report = {
        "schema": SCHEMA,
        "command": config.command,
        "kernel": kernel.spec.to_json() if kernel.spec is not None else kernel.name,
        "config": {
            "seed": config.seed,
            "trials": config.trials,
            "n_max": config.n_max,
            "tol_e": config.tol_e,
            "tol_h": config.tol_h,
            "step_h0": config.step_h0,
            "step_ratio": config.step_ratio,
            "step_count": config.step_count,
            "band": config.band,
        },
        "claims": {name: CLAIMS.get(name, "") for name in sections},
        "sections": to_jsonable(sections),
        "exit_code": 1 if has_violation else 0,
    }
    dump_report(report, config.output_path)
    for name, sec in sections.items():
        print(f"{name}: {sec.get('status')}")
    print(f"report written to {config.output_path}")
    return 1 if has_violation else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdklab",
        description="Desk-scale verification suites for positive definite kernels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("psd-check", "props", "ineq", "findiff", "holo", "lift",
                 "report-all"):
        p = sub.add_parser(name)
        p.add_argument("--kernel", required=True, help="kernel spec JSON path")
        p.add_argument("--out", default="report.json", help="report output path")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--trials", type=int, default=500)
        p.add_argument("--n-max", type=int, default=12)
        p.add_argument("--tol-e", type=float, default=psd.DEFAULT_TOL_E)
        p.add_argument("--tol-h", type=float, default=psd.DEFAULT_TOL_H)
        p.add_argument("--h0", type=float, default=0.1)
        p.add_argument("--ratio", type=float, default=0.5)
        p.add_argument("--steps", type=int, default=8)
        p.add_argument("--band", type=float, default=0.05)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        config = RunConfig(
            command=args.command,
            kernel_spec_path=args.kernel,
            tol_e=args.tol_e,
            tol_h=args.tol_h,
            seed=args.seed,
            trials=args.trials,
            n_max=args.n_max,
            output_path=args.out,
            step_h0=args.h0,
            step_ratio=args.ratio,
            step_count=args.steps,
            band=args.band,
        )
        return run(config)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
