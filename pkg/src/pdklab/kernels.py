"""Kernel zoo, involutive lifts, tabulated grids, Gram assembly, closed-form derivatives.

A kernel handle is an immutable evaluable k(x, y) -> complex together with its
domain, scalar field, advisory smoothness metadata, and (when available) an
exact closed-form evaluator for mixed partial derivatives.  Smoothness
metadata is never trusted by certification code; it only routes probes.
"""

from __future__ import annotations

import cmath
import dataclasses
import math
from dataclasses import dataclass
from math import comb, factorial, perm
from typing import Callable, Mapping, NamedTuple, Optional

import numpy as np

from .domains import (
    Disc,
    Domain,
    DomainError,
    Interval,
    PointSet,
    domain_from_json,
)

REAL = "real"
COMPLEX = "complex"

STAR_NEGATION = "negation"
STAR_IDENTITY = "identity"
STAR_NEGATED_CONJUGATE = "negated_conjugate"
STAR_TAGS = (STAR_NEGATION, STAR_IDENTITY, STAR_NEGATED_CONJUGATE)

GRAM_MAX_POINTS = 64


class SpecError(ValueError):
    """Malformed kernel specification; names the offending field."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"field {field!r}: {message}")
        self.field = field
        self.message = message


class FieldError(ValueError):
    """Nonzero imaginary part fed to a real-field kernel."""


def apply_star(tag: str, x: complex):
    if tag == STAR_NEGATION:
        return -x
    if tag == STAR_IDENTITY:
        return x
    if tag == STAR_NEGATED_CONJUGATE:
        return -complex(x).conjugate()
    raise ValueError(f"unknown star map {tag!r}")


def star_one(tag: str) -> float:
    """The image of the unit step under the star map; the chain-rule sign."""
    return 1.0 if tag == STAR_IDENTITY else -1.0


@dataclass(frozen=True)
class Smoothness:
    """Advisory regularity tags: mixed partials declared continuous up to
    sn_order in both slots, plus a sesquiholomorphy flag for complex kernels."""

    sn_order: Optional[int] = None
    holomorphic_flag: bool = False


@dataclass(frozen=True)
class KernelSpec:
    """Declarative description of a kernel (mirrors the JSON spec file)."""

    kind: str
    name: Optional[str] = None
    params: Mapping[str, float] = dataclasses.field(default_factory=dict)
    star: Optional[str] = None
    function: Optional[str] = None
    points: Optional[tuple] = None
    values: Optional[tuple] = None
    field: Optional[str] = None
    domain: Optional[Domain] = None

    @staticmethod
    def from_json(d: Mapping) -> "KernelSpec":
        if not isinstance(d, Mapping):
            raise SpecError("kind", "kernel spec must be a JSON object")
        kind = d.get("kind")
        if kind not in ("builtin", "lift", "grid"):
            raise SpecError("kind", f"expected builtin|lift|grid, got {kind!r}")
        params = d.get("params", {})
        if not isinstance(params, Mapping):
            raise SpecError("params", "must be an object mapping names to numbers")
        try:
            params = {str(k): float(v) for k, v in params.items()}
        except (TypeError, ValueError) as exc:
            raise SpecError("params", f"non-numeric parameter: {exc}") from None
        field = d.get("field")
        if field is not None and field not in (REAL, COMPLEX):
            raise SpecError("field", f"expected real|complex, got {field!r}")
        domain = None
        if d.get("domain") is not None:
            try:
                domain = domain_from_json(d["domain"])
            except (ValueError, KeyError, TypeError) as exc:
                raise SpecError("domain", str(exc)) from None
        points = values = None
        if d.get("points") is not None:
            try:
                points = tuple(
                    complex(float(p["re"]), float(p["im"])) for p in d["points"]
                )
            except (TypeError, KeyError, ValueError) as exc:
                raise SpecError("points", f"expected array of {{re, im}}: {exc}") from None
        if d.get("values") is not None:
            try:
                values = tuple(
                    tuple(complex(float(v["re"]), float(v["im"])) for v in row)
                    for row in d["values"]
                )
            except (TypeError, KeyError, ValueError) as exc:
                raise SpecError("values", f"expected matrix of {{re, im}}: {exc}") from None
        return KernelSpec(
            kind=kind,
            name=d.get("name"),
            params=params,
            star=d.get("star"),
            function=d.get("function"),
            points=points,
            values=values,
            field=field,
            domain=domain,
        )

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.name is not None:
            out["name"] = self.name
        if self.params:
            out["params"] = dict(self.params)
        if self.star is not None:
            out["star"] = self.star
        if self.function is not None:
            out["function"] = self.function
        if self.points is not None:
            out["points"] = [{"re": p.real, "im": p.imag} for p in self.points]
        if self.values is not None:
            out["values"] = [
                [{"re": v.real, "im": v.imag} for v in row] for row in self.values
            ]
        if self.field is not None:
            out["field"] = self.field
        if self.domain is not None:
            out["domain"] = self.domain.to_json()
        return out


@dataclass(frozen=True)
class KernelHandle:
    """Evaluable kernel with domain/field checking.

    Immutable after construction; safe for concurrent callers.
    """

    name: str
    field: str
    domain: Domain
    fn: Callable
    params: Mapping[str, float]
    smoothness: Smoothness
    closed_form: Optional[Callable] = None  # (x, y, m1, m2) -> complex
    is_pd: Optional[bool] = None  # advisory only
    spec: Optional[KernelSpec] = None

    def eval(self, x, y) -> complex:
        if self.field == REAL:
            xr = _as_real(x)
            yr = _as_real(y)
            if not self.domain.contains(xr):
                raise DomainError(f"{self.name}: point {xr} outside domain")
            if not self.domain.contains(yr):
                raise DomainError(f"{self.name}: point {yr} outside domain")
            return complex(self.fn(xr, yr))
        xc = complex(x)
        yc = complex(y)
        if not self.domain.contains(xc):
            raise DomainError(f"{self.name}: point {xc} outside domain")
        if not self.domain.contains(yc):
            raise DomainError(f"{self.name}: point {yc} outside domain")
        return complex(self.fn(xc, yc))

    __call__ = eval


def _as_real(x) -> float:
    if isinstance(x, complex):
        if x.imag != 0.0:
            raise FieldError(f"nonzero imaginary part {x.imag} fed to real-field kernel")
        return x.real
    if isinstance(x, np.complexfloating):
        if x.imag != 0.0:
            raise FieldError(f"nonzero imaginary part {x.imag} fed to real-field kernel")
        return float(x.real)
    return float(x)


@dataclass(frozen=True)
class GramMatrix:
    """Square matrix [k(x_i, x_j)] with its generating points.

    Entries are recorded exactly as evaluated; the Hermitian defect
    max |E_ij - conj(E_ji)| is measured, never repaired.
    """

    points: tuple
    entries: np.ndarray
    hermitian_defect: float

    @property
    def dimension(self) -> int:
        return len(self.points)


def gram(kernel: KernelHandle, points, max_points: int = GRAM_MAX_POINTS) -> GramMatrix:
    """Assemble the Gram matrix of a kernel on a finite point list."""
    pts = tuple(points)
    n = len(pts)
    if n < 1:
        raise ValueError("gram needs at least one point")
    if n > max_points:
        raise ValueError(f"gram limited to {max_points} points, got {n}")
    entries = np.empty((n, n), dtype=complex)
    for i, x in enumerate(pts):
        for j, y in enumerate(pts):
            entries[i, j] = kernel.eval(x, y)
    if not np.isfinite(entries.view(float)).all():
        raise ValueError("non-finite Gram entry")
    defect = float(np.abs(entries - entries.conj().T).max())
    entries.setflags(write=False)
    return GramMatrix(points=tuple(complex(p) for p in pts), entries=entries,
                      hermitian_defect=defect)


# --------------------------------------------------------------------------
# closed-form derivative machinery
# --------------------------------------------------------------------------

def _difference_kernel_deriv(fderiv: Callable) -> Callable:
    # k(x, y) = f(x - y)  =>  d^{m1}_x d^{m2}_y k = (-1)^{m2} f^{(m1+m2)}(x - y)
    def d(x, y, m1, m2):
        return (-1.0) ** m2 * fderiv(x - y, m1 + m2)

    return d


def _sum_kernel_deriv(fderiv: Callable, s1: float) -> Callable:
    # k(x, y) = f(x + s1*y)  =>  d^{m1}_x d^{m2}_y k = s1^{m2} f^{(m1+m2)}(x + s1*y)
    def d(x, y, m1, m2):
        return s1 ** m2 * fderiv(x + s1 * y, m1 + m2)

    return d


def _exp_any(t):
    return cmath.exp(t) if isinstance(t, complex) else math.exp(t)


def gaussian_profile_derivative(s: float) -> Callable:
    """Derivatives of t -> exp(-s t^2) via the polynomial recurrence
    p_0 = 1, p_{n+1} = p_n' - 2 s t p_n, f^(n) = p_n(t) exp(-s t^2)."""
    cache = {0: np.array([1.0])}

    def coeffs(n: int) -> np.ndarray:
        if n not in cache:
            p = coeffs(n - 1)
            dp = p[1:] * np.arange(1, len(p))
            tp = np.concatenate(([0.0], p))  # t * p
            m = max(len(dp), len(tp))
            out = np.zeros(m)
            out[: len(dp)] += dp
            out[: len(tp)] -= 2.0 * s * tp
            cache[n] = out
        return cache[n]

    def fderiv(t, n: int):
        c = coeffs(n)
        acc = 0.0
        for ck in c[::-1]:
            acc = acc * t + ck
        return acc * _exp_any(-s * t * t)

    return fderiv


def _cos_deriv(t: float, n: int) -> float:
    return math.cos(t + n * math.pi / 2.0)


def _sin_deriv(t: float, n: int) -> float:
    return math.sin(t + n * math.pi / 2.0)


def _one_minus_sq_deriv(t: float, n: int) -> float:
    if n == 0:
        return 1.0 - t * t
    if n == 1:
        return -2.0 * t
    if n == 2:
        return -2.0
    return 0.0


def _exp_product_deriv(x, y, m1, m2):
    # d^{m1}_x d^{m2}_y exp(x y) by the Leibniz rule
    acc = 0.0
    for j in range(min(m1, m2) + 1):
        acc += comb(m2, j) * perm(m1, j) * y ** (m1 - j) * x ** (m2 - j)
    return acc * math.exp(x * y)


def _szego_deriv(u, v, m1, m2):
    # mixed holomorphic / anti-holomorphic partials of 1 / (1 - u conj(v))
    vb = complex(v).conjugate()
    base = 1.0 - u * vb
    acc = 0.0 + 0.0j
    for j in range(min(m1, m2) + 1):
        acc += (
            comb(m2, j)
            * perm(m1, j)
            * factorial(m1 + m2 - j)
            * vb ** (m1 - j)
            * u ** (m2 - j)
            * base ** (-(m1 + 1 + m2 - j))
        )
    return acc


# --------------------------------------------------------------------------
# builtin zoo
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class _BuiltinDef:
    build: Callable  # params -> (fn, closed_form or None)
    field: str
    default_domain: Domain
    is_pd: Optional[bool]
    smoothness: Smoothness
    default_params: Mapping[str, float]


def _build_gaussian(params):
    s = params["s"]
    fd = gaussian_profile_derivative(s)

    def fn(x, y):
        d = x - y
        return math.exp(-s * d * d)

    return fn, _difference_kernel_deriv(fd)


def _build_brownian(params):
    def fn(x, y):
        return x if x <= y else y

    return fn, None


def _build_cosine(params):
    def fn(x, y):
        return math.cos(x - y)

    return fn, _difference_kernel_deriv(_cos_deriv)


def _build_exp_product(params):
    def fn(x, y):
        return math.exp(x * y)

    return fn, _exp_product_deriv


def _build_szego(params):
    def fn(u, v):
        return 1.0 / (1.0 - u * v.conjugate())

    return fn, _szego_deriv


def _build_re_product(params):
    def fn(u, v):
        return (u * v.conjugate()).real

    return fn, None


def _build_poly_neg(params):
    def fn(x, y):
        d = x - y
        return 1.0 - d * d

    return fn, _difference_kernel_deriv(_one_minus_sq_deriv)


def _build_sine_asym(params):
    def fn(x, y):
        return math.sin(x - y)

    return fn, _difference_kernel_deriv(_sin_deriv)


_SMOOTH = Smoothness(sn_order=8)

BUILTINS: dict = {
    "gaussian": _BuiltinDef(_build_gaussian, REAL, Interval(-3.0, 3.0), True,
                            _SMOOTH, {"s": 1.0}),
    "brownian": _BuiltinDef(_build_brownian, REAL, Interval(0.1, 10.0), True,
                            Smoothness(sn_order=0), {}),
    "cosine": _BuiltinDef(_build_cosine, REAL, Interval(-3.0, 3.0), True,
                          _SMOOTH, {}),
    "exp_product": _BuiltinDef(_build_exp_product, REAL, Interval(-3.0, 3.0), True,
                               _SMOOTH, {}),
    "szego": _BuiltinDef(_build_szego, COMPLEX, Disc(0.0, 0.9), True,
                         Smoothness(sn_order=None, holomorphic_flag=True), {}),
    "re_product": _BuiltinDef(_build_re_product, COMPLEX, Disc(0.0, 0.9), True,
                              Smoothness(sn_order=None, holomorphic_flag=False), {}),
    "poly_neg": _BuiltinDef(_build_poly_neg, REAL, Interval(-3.0, 3.0), False,
                            _SMOOTH, {}),
    "sine_asym": _BuiltinDef(_build_sine_asym, REAL, Interval(-3.0, 3.0), False,
                             _SMOOTH, {}),
}

BUILTIN_NAMES = tuple(sorted(BUILTINS))


# lift function registry: name -> (callable, derivative evaluator or None)
LIFT_FUNCTIONS: dict = {
    "exp_neg_sq": (lambda t: _exp_any(-t * t), gaussian_profile_derivative(1.0)),
    "exp": (_exp_any, lambda t, n: _exp_any(t)),
    "cos": (math.cos, _cos_deriv),
    "sin": (math.sin, _sin_deriv),
    "one_minus_sq": (lambda t: 1.0 - t * t, _one_minus_sq_deriv),
    "constant": (lambda t: 1.0, lambda t, n: 1.0 if n == 0 else 0.0),
}

# PD verdicts known in advance for (function, star) lift pairs; advisory only
_LIFT_PD: dict = {
    ("exp_neg_sq", STAR_NEGATION): True,
    ("exp", STAR_IDENTITY): True,
    ("cos", STAR_NEGATION): True,
    ("constant", STAR_NEGATION): True,
    ("constant", STAR_IDENTITY): True,
    ("one_minus_sq", STAR_NEGATION): False,
    ("sin", STAR_NEGATION): False,
}


def make_kernel(spec) -> KernelHandle:
    """Build an evaluable handle from a declarative spec (dict or KernelSpec)."""
    if not isinstance(spec, KernelSpec):
        spec = KernelSpec.from_json(spec)

    if spec.kind == "builtin":
        if spec.name not in BUILTINS:
            raise SpecError("name", f"unknown builtin {spec.name!r}; "
                                    f"known: {', '.join(BUILTIN_NAMES)}")
        bdef = BUILTINS[spec.name]
        params = dict(bdef.default_params)
        params.update(spec.params)
        fn, deriv = bdef.build(params)
        domain = spec.domain if spec.domain is not None else bdef.default_domain
        field = spec.field if spec.field is not None else bdef.field
        if field == REAL and not domain.is_real:
            raise SpecError("domain", "real-field kernel needs a real domain")
        norm = KernelSpec(kind="builtin", name=spec.name, params=params,
                          field=field, domain=domain)
        return KernelHandle(
            name=spec.name, field=field, domain=domain, fn=fn, params=params,
            smoothness=bdef.smoothness, closed_form=deriv, is_pd=bdef.is_pd,
            spec=norm,
        )

    if spec.kind == "lift":
        if spec.star not in STAR_TAGS:
            raise SpecError("star", f"expected one of {STAR_TAGS}, got {spec.star!r}")
        if spec.function not in LIFT_FUNCTIONS:
            raise SpecError("function", f"unresolved lift function {spec.function!r}; "
                                        f"known: {', '.join(sorted(LIFT_FUNCTIONS))}")
        f, fderiv = LIFT_FUNCTIONS[spec.function]
        return lift_kernel(
            f,
            spec.star,
            domain=spec.domain,
            name=f"lift_{spec.function}_{spec.star}",
            f_derivative=fderiv,
            is_pd=_LIFT_PD.get((spec.function, spec.star)),
            spec=KernelSpec(kind="lift", function=spec.function, star=spec.star,
                            field=spec.field, domain=spec.domain),
        )

    if spec.kind == "grid":
        if spec.points is None or len(spec.points) == 0:
            raise SpecError("points", "grid kernel needs a nonempty point list")
        if spec.values is None:
            raise SpecError("values", "grid kernel needs a value matrix")
        n = len(spec.points)
        if len(spec.values) != n or any(len(row) != n for row in spec.values):
            raise SpecError("values", f"value matrix must be {n}x{n} to match points")
        pts = PointSet(spec.points)
        table = np.array(spec.values, dtype=complex)
        if not np.isfinite(table.view(float)).all():
            raise SpecError("values", "non-finite grid value")
        all_real = pts.is_real and bool(np.all(table.imag == 0.0))
        field = spec.field if spec.field is not None else (REAL if all_real else COMPLEX)

        def fn(x, y, _pts=pts, _table=table):
            i = _pts.match(x)
            j = _pts.match(y)
            if i is None or j is None:
                raise DomainError(f"grid kernel has no stored point matching "
                                  f"({x}, {y})")
            return complex(_table[i, j])

        norm = KernelSpec(kind="grid", points=pts.points,
                          values=tuple(tuple(row) for row in table.tolist()),
                          field=field, domain=pts)
        return KernelHandle(
            name="grid", field=field, domain=pts, fn=fn, params={},
            smoothness=Smoothness(), closed_form=None, is_pd=None, spec=norm,
        )

    raise SpecError("kind", f"unknown kind {spec.kind!r}")


def lift_kernel(f: Callable, star: str, domain: Optional[Domain] = None,
                name: Optional[str] = None, f_derivative: Optional[Callable] = None,
                is_pd: Optional[bool] = None,
                spec: Optional[KernelSpec] = None) -> KernelHandle:
    """Wire k(x, y) = f(x + star(y)) into a kernel handle.

    f is evaluated on the sum set induced by the star map; a derivative
    evaluator f_derivative(t, order) enables closed-form mixed partials via
    d^{m1}_x d^{m2}_y k = star(1)^{m2} f^{(m1+m2)}(x + star(y)).
    """
    if star not in STAR_TAGS:
        raise ValueError(f"unknown star map {star!r}")
    if domain is None:
        domain = Disc(0.0, 0.9) if star == STAR_NEGATED_CONJUGATE else Interval(-3.0, 3.0)
    field = COMPLEX if (star == STAR_NEGATED_CONJUGATE or not domain.is_real) else REAL

    def fn(x, y):
        return f(x + apply_star(star, y))

    deriv = None
    if f_derivative is not None:
        s1 = star_one(star)

        def deriv(x, y, m1, m2, _fd=f_derivative, _s1=s1):
            return _s1 ** m2 * _fd(x + apply_star(star, y), m1 + m2)

    return KernelHandle(
        name=name or f"lift_{star}",
        field=field,
        domain=domain,
        fn=fn,
        params={},
        smoothness=Smoothness(sn_order=8 if f_derivative is not None else None,
                              holomorphic_flag=star == STAR_NEGATED_CONJUGATE),
        closed_form=deriv,
        is_pd=is_pd,
        spec=spec,
    )


def builtin(name: str, **params) -> KernelHandle:
    """Convenience constructor for a zoo kernel."""
    return make_kernel(KernelSpec(kind="builtin", name=name, params=params))


def load_kernel(path) -> KernelHandle:
    import json

    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError("(file)", f"invalid JSON: {exc}") from None
    return make_kernel(raw)


# --------------------------------------------------------------------------
# derivative evaluation
# --------------------------------------------------------------------------

class DerivativeValue(NamedTuple):
    value: complex
    source: str  # "closed_form" | "finite_difference"


def eval_derivative(kernel: KernelHandle, x, y, m1: int, m2: int,
                    allow_fd: bool = True) -> DerivativeValue:
    """Mixed partial d^{m1+m2} k / dy^{m2} dx^{m1} (conjugated second slot in
    the complex field), from the closed form when the handle carries one and
    from centered finite differences otherwise."""
    if m1 < 0 or m2 < 0:
        raise ValueError("derivative orders must be nonnegative")
    if m1 == 0 and m2 == 0:
        return DerivativeValue(kernel.eval(x, y), "closed_form")
    if kernel.closed_form is not None:
        return DerivativeValue(complex(kernel.closed_form(x, y, m1, m2)), "closed_form")
    if not allow_fd:
        raise ValueError(f"{kernel.name}: no closed-form derivative of order "
                         f"({m1}, {m2}) and finite-difference fallback disabled")
    from . import findiff

    return DerivativeValue(findiff.fd_mixed_partial_stencil(kernel, x, y, m1, m2),
                           "finite_difference")
