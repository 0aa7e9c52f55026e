"""Piecewise-linear sampled functions and strictly monotone bijections.

Everything downstream (flux branches, admissibility transforms, envelopes,
Riemann constructions) is carried by dense piecewise-linear data.  That class
of functions is closed under composition, clipping, convex envelopes and
inversion, and each of those operations is exact on the breakpoint lattice,
so verification checks do not have to fight discretisation noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# absolute evaluation slack: values this far past the node span are clamped,
# anything further raises DomainError
CLAMP_SLACK = 1e-9

# breakpoints closer than this (relative to the span) are merged when lattices
# are unioned; the induced function perturbation is below every tolerance used
MERGE_REL = 1e-12


def _as_nodes(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("need a 1-d array with at least two entries")
    return arr


def merge_close(x: np.ndarray, rel: float = MERGE_REL) -> np.ndarray:
    """Drop entries of a sorted array closer than ``rel * span`` to a kept one."""
    x = np.asarray(x, dtype=float)
    if x.size <= 1:
        return x
    tol = rel * max(x[-1] - x[0], 1.0)
    keep = np.empty(x.size, dtype=bool)
    keep[0] = True
    keep[1:] = np.diff(x) > tol
    out = x[keep]
    if out.size and x[-1] - out[-1] > 0:
        out = np.append(out[:-1], x[-1]) if out.size > 1 else np.array([x[0], x[-1]])
    return out


@dataclass(frozen=True)
class SampledCurve:
    """Piecewise-linear function on a strictly increasing node lattice.

    ``outside`` controls evaluation beyond the node span: ``"clamp"``
    tolerates ``CLAMP_SLACK`` of overshoot (and raises DomainError past it),
    ``"zero"`` extends by zero, which keeps clipped fluxes continuous because
    their endpoint samples vanish.
    """

    x: np.ndarray
    y: np.ndarray
    outside: str = "clamp"

    def __post_init__(self):
        x = _as_nodes(self.x)
        y = np.asarray(self.y, dtype=float)
        if y.shape != x.shape:
            raise ValueError("node and value arrays must have matching shape")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("nodes and values must be finite")
        if not np.all(np.diff(x) > 0):
            raise ValueError("nodes must be strictly increasing")
        if self.outside not in ("clamp", "zero"):
            raise ValueError(f"unknown outside mode {self.outside!r}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def lo(self) -> float:
        return float(self.x[0])

    @property
    def hi(self) -> float:
        return float(self.x[-1])

    @property
    def domain(self) -> tuple[float, float]:
        return self.lo, self.hi

    def __call__(self, u):
        arr = np.asarray(u, dtype=float)
        if self.outside == "zero":
            return np.interp(arr, self.x, self.y, left=0.0, right=0.0)
        if np.any(arr < self.lo - CLAMP_SLACK) or np.any(arr > self.hi + CLAMP_SLACK):
            raise DomainError(
                f"evaluation point outside [{self.lo:.6g}, {self.hi:.6g}] "
                f"beyond the {CLAMP_SLACK:g} clamp slack"
            )
        return np.interp(np.clip(arr, self.lo, self.hi), self.x, self.y)

    def max_slope(self) -> float:
        return float(np.max(np.abs(np.diff(self.y) / np.diff(self.x))))

    def restricted(self, lo: float, hi: float) -> "SampledCurve":
        """Exact restriction to [lo, hi] (endpoints interpolated in)."""
        if not (self.lo - CLAMP_SLACK <= lo < hi <= self.hi + CLAMP_SLACK):
            raise DomainError("restriction window escapes the curve domain")
        lo = min(max(lo, self.lo), self.hi)
        hi = min(max(hi, self.lo), self.hi)
        inner = self.x[(self.x > lo) & (self.x < hi)]
        nodes = merge_close(np.concatenate(([lo], inner, [hi])))
        return SampledCurve(nodes, self(nodes), outside=self.outside)


@dataclass(frozen=True)
class MonotoneBijection:
    """Strictly increasing piecewise-linear bijection with an exact inverse.

    The inverse is evaluated by locating the bracketing breakpoints (binary
    search) and inverting the linear segment, so forward/inverse round trips
    are exact to rounding.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = _as_nodes(self.breakpoints)
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != bp.shape:
            raise ValueError("breakpoints and values must have matching shape")
        if not np.all(np.diff(bp) > 0):
            raise ValueError("breakpoints must be strictly increasing")
        if not np.all(np.diff(vals) > 0):
            raise ValueError("values must be strictly increasing")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @classmethod
    def identity(cls, lo: float, hi: float) -> "MonotoneBijection":
        return cls(np.array([lo, hi]), np.array([lo, hi]))

    @classmethod
    def translation(cls, shift: float, lo: float, hi: float) -> "MonotoneBijection":
        bp = np.array([lo, hi])
        return cls(bp, bp + shift)

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    @property
    def range(self) -> tuple[float, float]:
        return float(self.values[0]), float(self.values[-1])

    def _slack(self) -> float:
        lo, hi = self.domain
        return CLAMP_SLACK * max(hi - lo, 1.0)

    def forward(self, u):
        arr = np.asarray(u, dtype=float)
        lo, hi = self.domain
        slack = self._slack()
        if np.any(arr < lo - slack) or np.any(arr > hi + slack):
            raise DomainError(f"argument outside bijection domain [{lo:.6g}, {hi:.6g}]")
        return np.interp(np.clip(arr, lo, hi), self.breakpoints, self.values)

    def inverse(self, y):
        arr = np.asarray(y, dtype=float)
        lo, hi = self.range
        slack = CLAMP_SLACK * max(hi - lo, 1.0)
        if np.any(arr < lo - slack) or np.any(arr > hi + slack):
            raise DomainError(f"argument outside bijection range [{lo:.6g}, {hi:.6g}]")
        return np.interp(np.clip(arr, lo, hi), self.values, self.breakpoints)

    def min_slope(self) -> float:
        return float(np.min(np.diff(self.values) / np.diff(self.breakpoints)))

    def max_slope(self) -> float:
        return float(np.max(np.diff(self.values) / np.diff(self.breakpoints)))

    def restricted(self, lo: float, hi: float) -> "MonotoneBijection":
        bp = self.breakpoints
        inner = bp[(bp > lo) & (bp < hi)]
        nodes = merge_close(np.concatenate(([lo], inner, [hi])))
        return MonotoneBijection(nodes, self.forward(nodes))


def lower_convex_envelope(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vertices of the greatest convex minorant of piecewise-linear data.

    Monotone-chain scan over the sample points; the result touches the data
    at every returned vertex (in particular at both endpoints) and lies below
    it everywhere else.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two samples")
    hx: list[float] = []
    hy: list[float] = []
    for xi, yi in zip(x, y):
        while len(hx) >= 2:
            cross = (hx[-1] - hx[-2]) * (yi - hy[-1]) - (hy[-1] - hy[-2]) * (xi - hx[-1])
            if cross <= 0.0:  # middle vertex is above (or on) the new chord
                hx.pop()
                hy.pop()
            else:
                break
        hx.append(float(xi))
        hy.append(float(yi))
    return np.array(hx), np.array(hy)


def upper_concave_envelope(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vertices of the least concave majorant (mirror of the convex hull)."""
    hx, hy = lower_convex_envelope(np.asarray(x, float), -np.asarray(y, float))
    return hx, -hy
