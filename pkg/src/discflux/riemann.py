"""Exact Riemann solutions for a single piecewise-linear flux.

For sampled fluxes the entropy solution of u_t + (f(u))_x = 0 with two-state
initial data is piecewise constant in x/t: its states are the vertices of the
relevant flux envelope between the two data values (convex minorant when the
left state is below the right one, concave majorant otherwise) and each pair
of consecutive states is separated by a jump moving at the chord slope.  This
module builds that solution directly; it serves as the reference the viscous
solver is measured against away from any flux discontinuity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curves import SampledCurve, lower_convex_envelope, merge_close, upper_concave_envelope
from .fluxes import FluxPair
from .transforms import Connection

_FLAT_TOL = 1e-10


@dataclass(frozen=True)
class Wave:
    """One wave of a self-similar solution, ordered left state -> right state.

    Shocks carry a single speed (speed_lo == speed_hi); rarefactions span the
    fan [speed_lo, speed_hi].
    """

    kind: str
    left: float
    right: float
    speed_lo: float
    speed_hi: float

    def __post_init__(self):
        if self.kind not in ("shock", "rarefaction"):
            raise ValueError(f"unknown wave kind {self.kind!r}")
        if self.speed_hi < self.speed_lo:
            raise ValueError("wave speeds out of order")


@dataclass(frozen=True)
class RiemannSolution:
    u_left: float
    u_right: float
    waves: tuple[Wave, ...]
    states: np.ndarray = field(repr=False)
    speeds: np.ndarray = field(repr=False)

    def __call__(self, xi):
        """Evaluate at similarity coordinates xi = x/t (right-continuous)."""
        arr = np.asarray(xi, dtype=float)
        idx = np.searchsorted(self.speeds, arr, side="right")
        out = self.states[idx]
        return out if arr.shape else float(out)

    def profile(self, x, t: float):
        """Solution values at positions x and time t (data itself at t <= 0)."""
        arr = np.asarray(x, dtype=float)
        if t <= 0.0:
            out = np.where(arr < 0.0, self.u_left, self.u_right)
            return out if arr.shape else float(out)
        return self(arr / t)


def classical_riemann(flux: SampledCurve, u_left: float, u_right: float) -> RiemannSolution:
    """Entropy solution of the two-state problem for one sampled flux branch."""
    u_left = float(u_left)
    u_right = float(u_right)
    lo, hi = min(u_left, u_right), max(u_left, u_right)
    scale = max(abs(flux.y).max(), 1.0)
    if hi - lo <= 1e-14 * max(flux.hi - flux.lo, 1.0):
        return RiemannSolution(
            u_left, u_right, (), np.array([u_left]), np.array([], dtype=float)
        )
    if lo < flux.lo - 1e-12 or hi > flux.hi + 1e-12:
        raise ValueError("data outside the sampled flux domain")

    inner = flux.x[(flux.x > lo) & (flux.x < hi)]
    nodes = merge_close(np.concatenate(([lo], inner, [hi])))
    vals = np.asarray(flux(nodes))
    if u_left < u_right:
        vx, vy = lower_convex_envelope(nodes, vals)
    else:
        vx, vy = upper_concave_envelope(nodes, vals)
    slopes = np.diff(vy) / np.diff(vx)

    # classify each envelope segment: on the graph -> fan piece, below/above -> shock
    kinds = []
    for k in range(len(vx) - 1):
        mask = (nodes > vx[k]) & (nodes < vx[k + 1])
        if np.any(mask):
            chord = vy[k] + slopes[k] * (nodes[mask] - vx[k])
            dev = float(np.max(np.abs(vals[mask] - chord)))
        else:
            dev = 0.0
        kinds.append("rarefaction" if dev <= _FLAT_TOL * scale else "shock")

    # orient from the left state to the right one (speeds then non-decreasing)
    if u_left < u_right:
        states = vx
        order = range(len(slopes))
    else:
        states = vx[::-1]
        order = range(len(slopes) - 1, -1, -1)
    seq_states = np.asarray(states, dtype=float)
    seq_speeds = np.array([slopes[k] for k in order], dtype=float)
    seq_kinds = [kinds[k] for k in order]

    waves: list[Wave] = []
    i = 0
    while i < len(seq_speeds):
        if seq_kinds[i] == "rarefaction":
            j = i
            while j + 1 < len(seq_speeds) and seq_kinds[j + 1] == "rarefaction":
                j += 1
            waves.append(
                Wave(
                    "rarefaction",
                    float(seq_states[i]),
                    float(seq_states[j + 1]),
                    float(seq_speeds[i]),
                    float(seq_speeds[j]),
                )
            )
            i = j + 1
        else:
            waves.append(
                Wave(
                    "shock",
                    float(seq_states[i]),
                    float(seq_states[i + 1]),
                    float(seq_speeds[i]),
                    float(seq_speeds[i]),
                )
            )
            i += 1

    return RiemannSolution(u_left, u_right, tuple(waves), seq_states, seq_speeds)


def steady_connection_state(flux: FluxPair, conn: Connection, x) -> np.ndarray:
    """The stationary two-trace profile: A left of the interface, B right of it.

    Because f(B) = g(A), this profile is an exact steady state of the
    two-flux problem; it is the anchor the connection transforms are built
    around and a convenient regression target for the solver.
    """
    arr = np.asarray(x, dtype=float)
    out = np.where(arr <= 0.0, conn.A, conn.B)
    return out if arr.shape else float(out)
