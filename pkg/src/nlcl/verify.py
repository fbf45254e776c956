"""Checks of computed trajectories against the proven estimates.

Every ``check_*`` function returns a :class:`BoundReport`.  Lower bounds are
relaxed by a factor 0.9 (gap) or 0.999 (maximum principle) and upper bounds
by 1.01, absorbing time-stepping error; the factors scale with the bounds so
they are insensitive to ``N`` and ``t``.  The report's ``margin`` is positive
when the check passes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import model as mdl
from .dynamics import RhsMode, Trajectory, integrate, rhs, velocity_field
from .measure import Measure1D, QuantileGrid, quantile_of, wasserstein

GAP_SLACK = 0.9
MAX_PRINCIPLE_SLACK = 0.999
UPPER_SLACK = 1.01
SUPPORT_TOL = 1e-9
MIN_SNAPSHOTS_IN_BUMP = 8


class ResolutionError(ValueError):
    """Too few snapshots inside a test function's time support."""


@dataclass
class BoundReport:
    bound_name: str
    times: list
    bound_values: list
    observed_values: list
    margin: float
    passed: Optional[bool]
    kind: str = "lower"
    slack: float = 1.0
    tolerance: float = 0.0
    note: str = ""

    @property
    def applicable(self) -> bool:
        return self.passed is not None

    def to_dict(self) -> dict:
        return {
            "bound": self.bound_name,
            "pass": self.passed,
            "margin": self.margin,
            "kind": self.kind,
            "slack": self.slack,
            "tolerance": self.tolerance,
            "note": self.note,
            "series": [{"t": t, "bound": b, "observed": o}
                       for t, b, o in zip(self.times, self.bound_values, self.observed_values)],
        }

    def summary(self) -> str:
        status = {True: "PASS", False: "FAIL", None: "N/A "}[self.passed]
        return f"{status} {self.bound_name:<14} margin={self.margin:+.3e} {self.note}".rstrip()


def _report(name, times, bounds, observed, kind, slack=1.0, tol=0.0, note=""):
    b = np.asarray(bounds, dtype=float)
    o = np.asarray(observed, dtype=float)
    if kind == "lower":
        diffs = o - slack * b
    else:
        diffs = slack * b - o
    margin = float(np.min(diffs)) if diffs.size else math.inf
    return BoundReport(name, [float(t) for t in times], b.tolist(), o.tolist(), margin,
                       bool(margin >= -tol), kind, slack, tol, note)


def not_applicable(name: str, reason: str) -> BoundReport:
    return BoundReport(name, [], [], [], math.nan, None, note=reason)


def _min_gap(s: QuantileGrid) -> float:
    return float(np.min(s.gaps))


def check_gap(traj: Trajectory) -> BoundReport:
    """Smallest particle gap against ``gap_bound`` at every snapshot."""
    ts = traj.times
    bounds = [mdl.gap_bound(traj.model, traj.N, t) for t in ts]
    return _report("gap", ts, bounds, [_min_gap(s) for s in traj.snapshots], "lower", GAP_SLACK)


def check_smoothing(traj: Trajectory) -> BoundReport:
    """Largest cell density ``m / min gap`` against the particle-level L^inf bound."""
    snaps = [s for s in traj.snapshots if s.time > 0]
    obs = [s.mesh / g if (g := _min_gap(s)) > 0 else math.inf for s in snaps]
    bounds = [mdl.discrete_smoothing_bound(traj.model, s.time) for s in snaps]
    return _report("smoothing", [s.time for s in snaps], bounds, obs, "upper", UPPER_SLACK)


def check_max_principle(traj: Trajectory, R: float) -> BoundReport:
    """Gaps stay above ``m / R`` when ``V`` is positive and non-decreasing.

    Returns a not-applicable report (``passed is None``) for other kernels or
    when the initial density is unbounded.
    """
    if not traj.model.kernel.monotone_positive:
        return not_applicable("max_principle", "kernel is not positive and non-decreasing")
    if not (R > 0 and math.isfinite(R)):
        return not_applicable("max_principle", "initial datum has no bounded density")
    ts = traj.times
    m = traj.snapshots[0].mesh
    return _report("max_principle", ts, [m / R] * len(ts),
                   [_min_gap(s) for s in traj.snapshots], "lower", MAX_PRINCIPLE_SLACK)


def check_support(traj: Trajectory) -> BoundReport:
    """Support width against ``width(0) + lip_v lam t``."""
    w0 = traj.snapshots[0].width
    ts = traj.times
    bounds = [mdl.support_bound(traj.model, w0, t) for t in ts]
    return _report("support", ts, bounds, [s.width for s in traj.snapshots], "upper",
                   1.0, SUPPORT_TOL)


def check_stability(traj_a: Trajectory, traj_b: Trajectory, p: float = 2.0) -> BoundReport:
    """``W_p(t) <= e^{Ct} W_p(0)`` between two runs of the same model and mode."""
    if traj_a.model is not traj_b.model and traj_a.model != traj_b.model:
        raise ValueError("stability compares two runs of the same model")
    if traj_a.mode != traj_b.mode:
        raise ValueError("stability compares two runs of the same mode")
    if len(traj_a.snapshots) != len(traj_b.snapshots) or np.any(traj_a.times != traj_b.times):
        raise ValueError("trajectories have mismatched snapshot grids")
    C = mdl.stability_constant(p, traj_a.model)
    w0 = wasserstein(p, traj_a.snapshots[0], traj_b.snapshots[0])
    ts = traj_a.times
    bounds = [math.exp(C * t) * w0 for t in ts]
    obs = [wasserstein(p, a, b) for a, b in zip(traj_a.snapshots, traj_b.snapshots)]
    return _report(f"stability_p{p:g}", ts, bounds, obs, "upper", UPPER_SLACK,
                   note=f"C={C:.6g}")


# weak formulation ------------------------------------------------------

def _bump(u):
    return np.where(np.abs(u) < 1, (1 - u * u) ** 3, 0.0)


def _dbump(u):
    return np.where(np.abs(u) < 1, -6 * u * (1 - u * u) ** 2, 0.0)


@dataclass(frozen=True)
class TestBump:
    """``phi(x, t) = B((x - x0)/a) B((t - t0)/s)`` with ``B(u) = (1 - u^2)^3`` on ``|u| < 1``."""

    __test__ = False

    x0: float
    t0: float
    a: float
    s: float

    def __post_init__(self):
        if self.a <= 0 or self.s <= 0:
            raise ValueError("bump radii must be positive")

    def __call__(self, x, t):
        return _bump((x - self.x0) / self.a) * _bump((t - self.t0) / self.s)

    def dt(self, x, t):
        return _bump((x - self.x0) / self.a) * _dbump((t - self.t0) / self.s) / self.s

    def dx(self, x, t):
        return _dbump((x - self.x0) / self.a) * _bump((t - self.t0) / self.s) / self.a

    @property
    def x_support(self):
        return self.x0 - self.a, self.x0 + self.a

    @property
    def t_support(self):
        return self.t0 - self.s, self.t0 + self.s


PiecesAt = Callable[[int, float], tuple]
VelocityAt = Callable[[int, float, np.ndarray, np.ndarray], np.ndarray]


def space_time_residual(times: Sequence[float], pieces_at: PiecesAt, velocity_at: VelocityAt,
                        bumps: Sequence[TestBump], order: int = 16) -> np.ndarray:
    """``int int rho phi_t + rho G phi_x`` for each bump.

    ``pieces_at(j, t)`` returns ``(left, right, density)`` arrays of a
    piecewise-constant density at snapshot ``j``; ``velocity_at(j, t, x, cell)``
    returns ``G`` at points ``x`` lying in cells ``cell``.  Space integrals use
    Gauss-Legendre of the given order on every cell clipped to the bump, time
    integrals use the trapezoid rule over ``times``.
    """
    times = np.asarray(times, dtype=float)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    out = np.empty(len(bumps))
    for n, bump in enumerate(bumps):
        ta, tb = bump.t_support
        inside = (times > ta) & (times < tb)
        if inside.sum() < MIN_SNAPSHOTS_IN_BUMP:
            raise ResolutionError(f"{int(inside.sum())} snapshots inside t in ({ta:g}, {tb:g}); "
                                  f"need {MIN_SNAPSHOTS_IN_BUMP}")
        xa, xb = bump.x_support
        vals = np.zeros(times.size)
        for j in np.flatnonzero(inside):
            t = times[j]
            left, right, dens = (np.asarray(v, dtype=float) for v in pieces_at(j, t))
            lo, hi = np.maximum(left, xa), np.minimum(right, xb)
            cells = np.flatnonzero(hi > lo)
            if cells.size == 0:
                continue
            half = 0.5 * (hi[cells] - lo[cells])
            xs = (0.5 * (hi[cells] + lo[cells]))[:, None] + half[:, None] * nodes[None, :]
            cell_ix = np.broadcast_to(cells[:, None], xs.shape)
            G = velocity_at(j, t, xs.ravel(), cell_ix.ravel()).reshape(xs.shape)
            integrand = bump.dt(xs, t) + G * bump.dx(xs, t)
            vals[j] = np.sum(dens[cells] * half * (integrand @ weights))
        out[n] = 0.5 * np.sum((vals[1:] + vals[:-1]) * np.diff(times))
    return out


def weak_residuals(traj: Trajectory, bumps: Sequence[TestBump],
                   field: Union[str, Callable] = "particle", order: int = 16) -> np.ndarray:
    """Weak-form residual of the reconstructed density for each bump.

    ``field`` selects the transport velocity ``G``:

    ``"particle"``
        on cell ``[x_i, x_{i+1})`` the scheme's own velocity of particle ``i``;
        the residual then measures how far the particle law is from the
        continuum flux, and vanishes like ``1/N``;
    ``"field"``
        the Eulerian field ``v(V * rho^N)`` of the reconstructed density;
    a callable ``G(x, t)``
        any externally supplied field.
    """
    snaps = traj.snapshots

    def pieces_at(j, t):
        v = snaps[j].values
        return v[:-1], v[1:], snaps[j].mesh / np.diff(v)

    if callable(field):
        def velocity_at(j, t, x, cell):
            return np.asarray(field(x, t), dtype=float)
    elif field == "particle":
        cache = {}

        def velocity_at(j, t, x, cell):
            if j not in cache:
                cache[j] = rhs(snaps[j], traj.model, traj.mode)
            return cache[j][cell]
    elif field == "field":
        def velocity_at(j, t, x, cell):
            return velocity_field(snaps[j], traj.model, x).velocities
    else:
        raise ValueError(f"unknown velocity field {field!r}")

    return space_time_residual(traj.times, pieces_at, velocity_at, bumps, order)


def weak_residual(traj: Trajectory, bumps: Sequence[TestBump],
                  field: Union[str, Callable] = "particle", order: int = 16) -> float:
    """Largest absolute weak residual over ``bumps``; see :func:`weak_residuals`."""
    return float(np.max(np.abs(weak_residuals(traj, bumps, field, order))))


# convergence -----------------------------------------------------------

def thread_count() -> int:
    env = os.environ.get("NLCL_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class ConvergenceTable:
    Ns: list
    distances: list
    reference_N: int
    p: float
    T: float
    rates: list = field(default_factory=list)

    def rows(self):
        return [{"N": n, "distance": d, "rate": r}
                for n, d, r in zip(self.Ns, self.distances, self.rates)]


def convergence_study(model: mdl.ModelSpec, initial: Measure1D, Ns: Sequence[int], p: float = 1.0,
                      T: float = 1.0, mode: Union[RhsMode, str] = RhsMode.PARTICLE_U,
                      dt: Union[float, str] = "auto", workers: Optional[int] = None
                      ) -> ConvergenceTable:
    """``W_p`` between each run and a reference run at ``2 max(Ns)`` particles.

    Observed rates ``log2(d_k / d_{k+1}) / log2(N_{k+1} / N_k)`` are reported
    but never asserted.
    """
    Ns = [int(n) for n in Ns]
    if Ns != sorted(Ns) or not Ns:
        raise ValueError("Ns must be a non-empty ascending list")
    ref_N = 2 * Ns[-1]

    def final(n):
        return integrate(quantile_of(initial, n), model, mode, T, dt).final

    with ThreadPoolExecutor(max_workers=workers or thread_count()) as pool:
        finals = list(pool.map(final, Ns + [ref_N]))
    ref = finals[-1]
    dists = [wasserstein(p, f, ref) for f in finals[:-1]]
    rates = [math.nan]
    for k in range(1, len(Ns)):
        if dists[k] > 0 and dists[k - 1] > 0:
            rates.append(math.log(dists[k - 1] / dists[k]) / math.log(Ns[k] / Ns[k - 1]))
        else:
            rates.append(math.nan)
    return ConvergenceTable(Ns, dists, ref_N, float(p), float(T), rates)
