"""Evaluation domains: real intervals, complex discs, and finite point sets.

Every kernel in this package lives on one of three desk-scale domain shapes.
A domain knows how to test membership, sample points deterministically from a
seeded generator, and shrink itself by a margin so that shifted probe points
(x + h, contour nodes, ...) stay inside.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

CONTAINS_SLACK = 1e-12


class DomainError(ValueError):
    """A point fell outside the domain a kernel is defined on."""


@dataclass(frozen=True)
class Interval:
    """Closed real interval [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError("interval endpoints must be finite")
        if self.hi <= self.lo:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def is_real(self) -> bool:
        return True

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, z: complex) -> bool:
        z = complex(z)
        if abs(z.imag) > CONTAINS_SLACK:
            return False
        return self.lo - CONTAINS_SLACK <= z.real <= self.hi + CONTAINS_SLACK

    def shrink(self, margin: float) -> "Interval":
        if 2.0 * margin >= self.width:
            raise ValueError(f"margin {margin} empties interval [{self.lo}, {self.hi}]")
        return Interval(self.lo + margin, self.hi - margin)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=n)

    def to_json(self) -> dict:
        return {"type": "interval", "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class Disc:
    """Closed complex disc |z - center| <= radius."""

    center: complex
    radius: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.radius) or self.radius <= 0:
            raise ValueError(f"disc radius must be positive, got {self.radius}")

    @property
    def is_real(self) -> bool:
        return False

    @property
    def width(self) -> float:
        return 2.0 * self.radius

    def contains(self, z: complex) -> bool:
        return abs(complex(z) - self.center) <= self.radius + CONTAINS_SLACK

    def shrink(self, margin: float) -> "Disc":
        if margin >= self.radius:
            raise ValueError(f"margin {margin} empties disc of radius {self.radius}")
        return Disc(self.center, self.radius - margin)

    def conjugate(self) -> "Disc":
        return Disc(complex(self.center).conjugate(), self.radius)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        # area-uniform: radius via sqrt of a uniform draw
        r = self.radius * np.sqrt(rng.uniform(0.0, 1.0, size=n))
        theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
        return self.center + r * np.exp(1j * theta)

    def to_json(self) -> dict:
        return {
            "type": "disc",
            "center": {"re": complex(self.center).real, "im": complex(self.center).imag},
            "radius": self.radius,
        }


@dataclass(frozen=True)
class PointSet:
    """Explicit finite set of points (real or complex)."""

    points: tuple

    def __post_init__(self) -> None:
        if len(self.points) == 0:
            raise ValueError("point set domain must be nonempty")
        object.__setattr__(self, "points", tuple(complex(p) for p in self.points))

    @property
    def is_real(self) -> bool:
        return all(p.imag == 0.0 for p in self.points)

    @property
    def width(self) -> float:
        if len(self.points) < 2:
            return 1.0
        pts = np.asarray(self.points)
        return float(np.abs(pts[:, None] - pts[None, :]).max())

    def match(self, z: complex) -> int | None:
        """Index of the stored point equal to z within tolerance, else None."""
        z = complex(z)
        for i, p in enumerate(self.points):
            if abs(z - p) <= CONTAINS_SLACK:
                return i
        return None

    def contains(self, z: complex) -> bool:
        return self.match(z) is not None

    def shrink(self, margin: float) -> "PointSet":
        return self

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        idx = rng.integers(0, len(self.points), size=n)
        return np.asarray(self.points)[idx]

    def to_json(self) -> dict:
        return {
            "type": "points",
            "points": [{"re": p.real, "im": p.imag} for p in self.points],
        }


Domain = Union[Interval, Disc, PointSet]


def domain_from_json(d: dict) -> Domain:
    """Parse a domain descriptor {type: interval|disc|points, ...}."""
    if not isinstance(d, dict) or "type" not in d:
        raise ValueError("domain descriptor must be an object with a 'type' key")
    kind = d["type"]
    if kind == "interval":
        return Interval(float(d["lo"]), float(d["hi"]))
    if kind == "disc":
        c = d.get("center", {"re": 0.0, "im": 0.0})
        return Disc(complex(float(c["re"]), float(c["im"])), float(d["radius"]))
    if kind == "points":
        pts = [complex(float(p["re"]), float(p["im"])) for p in d["points"]]
        return PointSet(tuple(pts))
    raise ValueError(f"unknown domain type {kind!r}")
