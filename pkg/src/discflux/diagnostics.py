"""Entropy residuals and stability diagnostics for stored solver fields.

The residual machinery treats a stored field as piecewise constant on the
tensor grid of snapshot slabs times cells and pairs it with tent-shaped test
functions whose integrals are written in closed form.  All quadrature is then
exact for the piecewise-constant data, so steady or constant fields produce
residuals at rounding level and any reported violation is a property of the
field, not of the integration rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoverageError
from .fluxes import FluxPair
from .solver import SolutionField
from .transforms import Connection, TransformPair

SIGN_BAND = 1e-12


def sgn(x, band: float = SIGN_BAND):
    """Sign with a dead band: 0 within +-band of zero."""
    arr = np.asarray(x, dtype=float)
    out = np.where(arr > band, 1.0, np.where(arr < -band, -1.0, 0.0))
    return out if arr.shape else float(out)


def sgn_plus(x, band: float = SIGN_BAND):
    """One-sided sign: 1 above the band, 0 below, 1/2 inside it."""
    return 0.5 * (sgn(x, band) + 1.0)


@dataclass(frozen=True)
class HatFunction:
    """Tent function with peak 1 at ``center`` and support radius ``radius``."""

    center: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def support(self) -> tuple[float, float]:
        return (self.center - self.radius, self.center + self.radius)

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        out = np.maximum(0.0, 1.0 - np.abs(arr - self.center) / self.radius)
        return out if arr.shape else float(out)

    def antiderivative(self, x):
        """Integral of the hat from the left edge of its support to x, exact."""
        c, r = self.center, self.radius
        arr = np.asarray(x, dtype=float)
        xi = np.clip(arr - (c - r), 0.0, r)   # progress along the rising edge
        eta = np.clip(arr - c, 0.0, r)        # progress along the falling edge
        out = xi**2 / (2.0 * r) + eta - eta**2 / (2.0 * r)
        return out if arr.shape else float(out)

    def integral(self) -> float:
        return self.radius


@dataclass(frozen=True)
class SpaceTimeHat:
    """Separable test function T(t) * X(x) built from two hats."""

    t: HatFunction
    x: HatFunction

    def __call__(self, t, x):
        return self.t(t) * self.x(x)


def default_test_functions(
    field: SolutionField,
    count: int = 12,
    seed: int = 7,
    side: str | None = None,
) -> list[SpaceTimeHat]:
    """A standard family of hats inside the stored window.

    Half the family is pinned over the interface (x-hat centred on 0) at
    staggered times so interface behaviour is always probed; the rest is drawn
    from a seeded generator.  ``side`` restricts supports to x < 0 ("left") or
    x > 0 ("right"), dropping the interface-pinned members.
    """
    t0, t1 = float(field.times[0]), float(field.times[-1])
    if t1 - t0 <= 0:
        raise ValueError("field must span a positive time interval")
    x0, x1 = float(field.x[0] - field.dx / 2), float(field.x[-1] + field.dx / 2)
    rng = np.random.default_rng(seed)
    tspan = t1 - t0
    hats: list[SpaceTimeHat] = []

    def t_hat(center_frac: float, radius_frac: float = 0.2) -> HatFunction:
        r = radius_frac * tspan
        c = t0 + np.clip(center_frac, 0.0, 1.0) * tspan
        c = min(max(c, t0 + r * 1.01), t1 - r * 1.01)
        return HatFunction(c, r)

    if side is None:
        pinned = (count + 1) // 2
        for k in range(pinned):
            frac = (k + 1) / (pinned + 1)
            hats.append(SpaceTimeHat(t_hat(frac), HatFunction(0.0, min(0.25 * (x1 - x0), -x0 * 0.9, x1 * 0.9))))
        lo, hi = x0, x1
    elif side == "left":
        lo, hi = x0, 0.0
    elif side == "right":
        lo, hi = 0.0, x1
    else:
        raise ValueError(f"unknown side {side!r}")

    while len(hats) < count:
        r_x = (hi - lo) * rng.uniform(0.05, 0.2)
        c_x = rng.uniform(lo + 1.05 * r_x, hi - 1.05 * r_x)
        r_t = tspan * rng.uniform(0.1, 0.3)
        c_t = rng.uniform(t0 + 1.05 * r_t, t1 - 1.05 * r_t)
        hats.append(SpaceTimeHat(HatFunction(c_t, r_t), HatFunction(c_x, r_x)))
    return hats


def _check_support(field: SolutionField, hat: SpaceTimeHat):
    t_lo, t_hi = hat.t.support
    x_lo, x_hi = hat.x.support
    faces_lo = field.x[0] - field.dx / 2
    faces_hi = field.x[-1] + field.dx / 2
    if t_lo < field.times[0] - 1e-12 or t_hi > field.times[-1] + 1e-12:
        raise CoverageError("test function support leaves the stored time range")
    if x_lo < faces_lo - 1e-12 or x_hi > faces_hi + 1e-12:
        raise CoverageError("test function support leaves the stored window")


def _pair_residual(
    field: SolutionField,
    cstar: np.ndarray,
    f_vals,
    g_vals,
    delta_coeff: float,
    hat: SpaceTimeHat,
) -> float:
    """-(time term + space term + interface term) for one hat pair, exact.

    The field is read as constant on each slab [t_n, t_{n+1}) x cell; the
    entropy is |u - cstar_i| with the cell's own branch flux.  A negative or
    tiny value means the inequality holds for this test function.
    """
    _check_support(field, hat)
    times, x, dx = field.times, field.x, field.dx
    faces = np.concatenate((x - dx / 2.0, [x[-1] + dx / 2.0]))
    U = field.u[:-1]
    dT = hat.t(times[1:]) - hat.t(times[:-1])
    Tint = hat.t.antiderivative(times[1:]) - hat.t.antiderivative(times[:-1])
    Xint = hat.x.antiderivative(faces[1:]) - hat.x.antiderivative(faces[:-1])
    dX = hat.x(faces[1:]) - hat.x(faces[:-1])

    right = x > 0.0
    E = np.abs(U - cstar)
    FU = np.where(right, f_vals(U), g_vals(U))
    Fc = np.where(right, f_vals(cstar), g_vals(cstar))
    Q = sgn(U - cstar) * (FU - Fc)
    term_t = float(dT @ (E @ Xint))
    term_x = float(Tint @ (Q @ dX))
    term_d = abs(delta_coeff) * float(hat.x(0.0)) * float(np.sum(Tint))
    return -(term_t + term_x + term_d)


@dataclass(frozen=True)
class EntropyReport:
    kind: str
    residuals: tuple[float, ...]
    tolerance: float
    ok: bool
    worst: float

    def summary(self) -> str:
        state = "ok" if self.ok else "VIOLATED"
        return f"{self.kind}: worst residual {self.worst:.3e} vs tol {self.tolerance:.3e} [{state}]"


def _auto_tolerance(field: SolutionField) -> float:
    scale = max(float(np.abs(field.flux.f.y).max()), float(np.abs(field.flux.g.y).max()), 1e-6)
    slab = float(np.max(np.diff(field.times))) if len(field.times) > 1 else field.dt
    return 0.5 * scale * (field.dx + field.eps + slab) + 1e-9 * scale


def entropy_residual_pair(
    field: SolutionField,
    xi: float,
    tests: list[SpaceTimeHat] | None = None,
    tolerance: float | None = None,
) -> EntropyReport:
    """Relabelled Kruzhkov test at parameter xi in the transform domain.

    The comparison state is alpha(xi) on the right of the interface and
    beta(xi) on the left; the interface defect |f(alpha(xi)) - g(beta(xi))|
    enters as an allowance concentrated at x = 0.
    """
    t = field.transform
    lo, hi = t.domain
    xi = float(np.clip(xi, lo, hi))
    tests = tests or default_test_functions(field)
    tol = _auto_tolerance(field) if tolerance is None else float(tolerance)
    c_right = float(t.alpha.forward(xi))
    c_left = float(t.beta.forward(xi))
    cstar = np.where(field.x > 0.0, c_right, c_left)
    delta = float(field.flux.f(np.clip(c_right, field.flux.a, field.flux.b))
                  - field.flux.g(np.clip(c_left, field.flux.a, field.flux.b)))
    res = tuple(
        _pair_residual(field, cstar, field.flux.f, field.flux.g, delta, h) for h in tests
    )
    worst = max(res)
    return EntropyReport("pair-kruzhkov", res, tol, worst <= tol, worst)


def entropy_residual_side(
    field: SolutionField,
    c: float,
    side: str,
    tests: list[SpaceTimeHat] | None = None,
    tolerance: float | None = None,
) -> EntropyReport:
    """Classical one-sided Kruzhkov test away from the interface.

    ``side`` selects the half line ("left" uses g, "right" uses f); every test
    function must be supported strictly inside that half line.
    """
    if side not in ("left", "right"):
        raise ValueError(f"unknown side {side!r}")
    tests = tests or default_test_functions(field, side=side)
    for h in tests:
        x_lo, x_hi = h.x.support
        inside = x_hi <= 1e-12 if side == "left" else x_lo >= -1e-12
        if not inside:
            raise CoverageError(f"test function support must stay on the {side} side")
    tol = _auto_tolerance(field) if tolerance is None else float(tolerance)
    cstar = np.full(field.x.shape, float(c))
    res = tuple(
        _pair_residual(field, cstar, field.flux.f, field.flux.g, 0.0, h) for h in tests
    )
    worst = max(res)
    return EntropyReport(f"kruzhkov-{side}", res, tol, worst <= tol, worst)


def entropy_residual_connection(
    field: SolutionField,
    conn: Connection,
    tests: list[SpaceTimeHat] | None = None,
    tolerance: float | None = None,
) -> EntropyReport:
    """Adapted-entropy test against the steady two-trace profile (A | B).

    The comparison state is A on the left and B on the right; because
    f(B) = g(A) no interface allowance is needed, which is what singles out
    the solutions adapted to this connection.
    """
    tests = tests or default_test_functions(field)
    tol = _auto_tolerance(field) if tolerance is None else float(tolerance)
    cstar = np.where(field.x > 0.0, float(conn.B), float(conn.A))
    res = tuple(
        _pair_residual(field, cstar, field.flux.f, field.flux.g, 0.0, h) for h in tests
    )
    worst = max(res)
    return EntropyReport("adapted-connection", res, tol, worst <= tol, worst)


@dataclass(frozen=True)
class TraceReport:
    times: np.ndarray
    left: np.ndarray
    right: np.ndarray
    mismatch: np.ndarray   # |f(right) - g(left)| per snapshot

    @property
    def final_mismatch(self) -> float:
        return float(self.mismatch[-1])


def extract_traces(field: SolutionField, offset: float | None = None) -> TraceReport:
    """Sample u just outside the smoothing band on both sides of the interface.

    ``offset`` is the sampling distance from 0 (default 1.5 * eps, clipped to
    the grid); the mismatch column measures how far the run is from the
    flux-matching condition a steady interface requires.
    """
    off = 1.5 * field.eps if offset is None else float(offset)
    off = max(off, field.dx)
    i_left = int(np.searchsorted(field.x, -off, side="right") - 1)
    i_right = int(np.searchsorted(field.x, off, side="left"))
    if i_left < 0 or i_right >= len(field.x):
        raise ValueError("offset outside the stored window")
    left = field.u[:, i_left].astype(float)
    right = field.u[:, i_right].astype(float)
    mism = np.abs(np.asarray(field.flux.f(right)) - np.asarray(field.flux.g(left)))
    return TraceReport(field.times, left, right, mism)


def l1_distances(a: SolutionField, b: SolutionField, variable: str = "v") -> np.ndarray:
    """Per-snapshot L1 distance of two runs on the same grid.

    ``variable`` picks the metric: "v" compares the transformed unknowns
    directly; "conserved" compares the blended densities the scheme actually
    conserves, which is the quantity whose distance cannot grow (up to
    whatever enters through the boundary).
    """
    if a.v.shape != b.v.shape or not np.allclose(a.times, b.times):
        raise ValueError("runs must share grid and snapshot times")
    if variable == "v":
        return np.sum(np.abs(a.v - b.v), axis=1) * a.dx
    if variable != "conserved":
        raise ValueError(f"unknown variable {variable!r}")
    from .solver import smooth_heaviside

    out = []
    for fld in (a, b):
        w = smooth_heaviside(fld.x, fld.eps)
        m = w * fld.transform.alpha.forward(fld.v) + (1.0 - w) * fld.transform.beta.forward(fld.v)
        out.append(m)
    return np.sum(np.abs(out[0] - out[1]), axis=1) * a.dx


def ordering_preserved(a: SolutionField, b: SolutionField, slack: float = 1e-10) -> bool:
    """True when a <= b initially implies a <= b at every stored time."""
    if not np.all(a.v[0] <= b.v[0] + slack):
        raise ValueError("runs are not ordered at the initial time")
    return bool(np.all(a.v <= b.v + slack))


@dataclass(frozen=True)
class BoundsReport:
    v_min: float
    v_max: float
    v_ok: bool
    u_min: float
    u_max: float
    u_ok: bool


def bounds_report(field: SolutionField, slack: float = 1e-9) -> BoundsReport:
    """Range check: v inside the transform domain, u inside the flux interval."""
    lo, hi = field.transform.domain
    vmin, vmax = float(field.v.min()), float(field.v.max())
    umin, umax = float(field.u.min()), float(field.u.max())
    pad = slack * max(hi - lo, 1.0)
    return BoundsReport(
        vmin,
        vmax,
        lo - pad <= vmin and vmax <= hi + pad,
        umin,
        umax,
        field.flux.a - pad <= umin and umax <= field.flux.b + pad,
    )


@dataclass(frozen=True)
class LadderBounds:
    """Per-level a-priori statistics of a refinement ladder.

    ``c0`` is the range excess beyond the state interval, ``c1`` the worst
    L1 rate of change per unit time and ``c2`` the worst viscous energy
    integral.  ``ok`` means c0 stays below ``range_tol`` on every level and
    c1, c2 each vary by less than the allowed spread factor, i.e. the
    quantities the scheme is supposed to control stay O(1) under refinement.
    """

    c0: tuple
    c1: tuple
    c2: tuple
    ok: bool


def ladder_bounds(result, range_tol: float = 1e-10, spread: float = 2.0) -> LadderBounds:
    """Collect (c0, c1, c2) per ladder level and check they stay O(1)."""
    c0 = tuple(f.range_excess() for f in result.fields)
    c1 = tuple(f.stats["c1"] for f in result.fields)
    c2 = tuple(f.stats["c2"] for f in result.fields)
    ok = (
        max(c0) <= range_tol
        and max(c1) <= spread * min(c1) + range_tol
        and max(c2) <= spread * min(c2) + range_tol
    )
    return LadderBounds(c0, c1, c2, ok)
