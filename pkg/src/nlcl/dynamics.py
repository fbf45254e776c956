"""Right-hand sides, time integration and the Eulerian velocity field.

Three discretisations share one state, a :class:`~nlcl.measure.QuantileGrid`
``X_0 <= ... <= X_M`` with ``m = 1/M``:

``PARTICLE_V``
    follow-the-leader form, ``x_i' = v(m sum_{k>i} V(x_i - x_k))`` with
    ``V(0) = lam`` so that coincident particles are ordered by index;
``PARTICLE_U``
    the same system written with the Lipschitz kernel ``U``,
    ``x_i' = v(m sum_{k=0..M} U(x_i - x_k) - m lam (i + 1))``;
``QUANTILE_U``
    collocation of the quantile equation
    ``X_t(z) = v(int_0^1 U(X(z) - X(zeta)) dzeta - lam z)`` with trapezoid
    weights in ``zeta``.

The two particle forms agree on ordered states.  ``PARTICLE_U`` sums over
``M + 1`` particles with weight ``1/M`` exactly as the scheme is stated, so
its total weight is ``(M + 1)/M``; this is intentional.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .measure import DegenerateGap, GAP_FLOOR, QuantileGrid
from .model import ModelSpec

MONOTONE_TOL = 1e-9


class RhsMode(str, enum.Enum):
    QUANTILE_U = "quantile_u"
    PARTICLE_U = "particle_u"
    PARTICLE_V = "particle_v"


class OrderViolation(ValueError):
    """The follow-the-leader form was asked to act on a decreasing state."""


class StepRejected(RuntimeError):
    """An RK4 step broke particle order; retry with a smaller step."""

    def __init__(self, t: float, dt: float, worst: float):
        self.t = t
        self.dt = dt
        self.suggested_dt = dt / 2
        super().__init__(f"step at t={t:.6g} with dt={dt:.6g} broke ordering (min gap {worst:.3e}); "
                         f"try dt={dt / 2:.6g}")


def _as_values(state) -> np.ndarray:
    if isinstance(state, QuantileGrid):
        return state.values
    return np.asarray(state, dtype=float)


def _order_tol(x: np.ndarray) -> float:
    return MONOTONE_TOL * (x[-1] - x[0] + 1.0)


def _particle_v_unchecked(x: np.ndarray, model: ModelSpec) -> np.ndarray:
    M = x.size - 1
    kern = model.kernel
    d = x[:, None] - x[None, :]
    Vd = np.where(d < 0, kern.V(d), np.where(d == 0, kern.lam, 0.0))
    ahead = np.triu(np.ones((M + 1, M + 1), dtype=bool), k=1)
    return model.velocity(np.where(ahead, Vd, 0.0).sum(axis=1) / M)


def rhs(state, model: ModelSpec, mode: Union[RhsMode, str] = RhsMode.PARTICLE_U) -> np.ndarray:
    """Velocities of all ``M + 1`` nodes for the chosen discretisation."""
    mode = RhsMode(mode)
    x = _as_values(state)
    M = x.size - 1
    lam = model.lam
    i = np.arange(M + 1)

    if mode is RhsMode.PARTICLE_V and np.any(np.diff(x) < -_order_tol(x)):
        raise OrderViolation("PARTICLE_V needs a non-decreasing state")

    if model.kernel.indicator:
        # sum_{k>i} V = lam (M - i) on ordered states, U is the constant lam
        return model.velocity(lam * (M - i) / M)

    d = x[:, None] - x[None, :]
    if mode is RhsMode.PARTICLE_V:
        Ud = model.kernel.U(np.minimum(d, 0.0))
        ahead = i[None, :] > i[:, None]
        return model.velocity(np.where(ahead, Ud, 0.0).sum(axis=1) / M)
    Ud = model.kernel.U(d)
    if mode is RhsMode.PARTICLE_U:
        return model.velocity(Ud.sum(axis=1) / M - lam * (i + 1) / M)
    w = np.ones(M + 1)
    w[0] = w[-1] = 0.5
    return model.velocity(Ud @ w / M - lam * i / M)


def equivalence_check(state, model: ModelSpec) -> float:
    """Largest ``|rhs_U - rhs_V|`` over the nodes.

    Zero up to round-off on ordered states.  On a decreasing state the
    follow-the-leader form is evaluated literally (no order check) so the
    mismatch is reported rather than raised.
    """
    x = _as_values(state)
    u = rhs(x, model, RhsMode.PARTICLE_U)
    if model.kernel.indicator and np.all(np.diff(x) >= 0):
        v = rhs(x, model, RhsMode.PARTICLE_V)
    else:
        v = _particle_v_unchecked(x, model)
    return float(np.max(np.abs(u - v)))


@dataclass
class Trajectory:
    """Snapshots of one integration run; ``snapshots[0]`` is the initial state."""

    model: ModelSpec
    mode: RhsMode
    snapshots: list
    dt: float
    meta: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    @property
    def N(self) -> int:
        return self.snapshots[0].M

    @property
    def final(self) -> QuantileGrid:
        return self.snapshots[-1]

    def at(self, t: float) -> QuantileGrid:
        for s in self.snapshots:
            if s.time == t:
                return s
        raise KeyError(f"no snapshot at t={t}")


def auto_dt(model: ModelSpec, T: float) -> float:
    rate = model.lip_v * (model.lip_V + model.lam) + model.b * model.lam
    return min(T / 64.0, 0.1 / rate)


def rk4_step(x: np.ndarray, h: float, model: ModelSpec, mode: RhsMode) -> np.ndarray:
    k1 = rhs(x, model, mode)
    k2 = rhs(x + 0.5 * h * k1, model, mode)
    k3 = rhs(x + 0.5 * h * k2, model, mode)
    k4 = rhs(x + h * k3, model, mode)
    return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(initial: QuantileGrid, model: ModelSpec,
              mode: Union[RhsMode, str] = RhsMode.PARTICLE_U, T: float = 1.0,
              dt: Union[float, str, None] = "auto",
              times: Optional[Sequence[float]] = None) -> Trajectory:
    """Classical fixed-step RK4 from ``initial`` up to ``T``.

    Snapshots are taken at ``times`` (default ``[T]``) plus ``t = 0``; the step
    is shrunk per interval so that every requested time is hit exactly.

    Raises
    ------
    StepRejected
        if a step leaves the state decreasing beyond ``1e-9 * (width + 1)``.
    """
    mode = RhsMode(mode)
    if not T > 0:
        raise ValueError("T must be positive")
    if dt is None or dt == "auto":
        dt = auto_dt(model, T)
    dt = float(dt)
    if not dt > 0:
        raise ValueError("dt must be positive")
    targets = sorted({float(t) for t in (times if times is not None else [T])} - {0.0})
    if any(t < 0 or t > T for t in targets):
        raise ValueError("snapshot times must lie in [0, T]")
    if not targets or targets[-1] != T:
        targets.append(float(T))

    x = np.array(initial.values, dtype=float)
    snaps = [QuantileGrid(x, 0.0)]
    t = 0.0
    for target in targets:
        n = max(1, math.ceil((target - t) / dt - 1e-9))
        h = (target - t) / n
        for step in range(n):
            x = rk4_step(x, h, model, mode)
            worst = float(np.min(np.diff(x)))
            if worst < -_order_tol(x):
                raise StepRejected(t + (step + 1) * h, h, worst)
        t = target
        try:
            snaps.append(QuantileGrid(x.copy(), t))
        except ValueError:
            raise StepRejected(t, h, float(np.min(np.diff(x)))) from None
    return Trajectory(model, mode, snaps, dt,
                      meta={"T": float(T), "N": initial.M, "mode": mode.value, "dt": dt})


@dataclass(frozen=True)
class VelocityFieldSample:
    positions: np.ndarray
    velocities: np.ndarray
    time: float = 0.0


def _convolve_U(x: np.ndarray, state: QuantileGrid, model: ModelSpec) -> np.ndarray:
    """``int U(x - y) rho(y) dy`` for the reconstructed piecewise-constant density."""
    X = state.values
    dens = state.mesh / np.diff(X)
    prim = model.kernel.primitive_U
    if prim is not None:
        P = prim(x[:, None] - X[None, :])
        return (P[:, :-1] - P[:, 1:]) @ dens
    # four midpoint nodes per cell, each carrying a quarter of the cell mass
    offs = (np.arange(4) + 0.5) / 4
    ys = (X[:-1, None] + offs[None, :] * np.diff(X)[:, None]).ravel()
    return model.kernel.U(x[:, None] - ys[None, :]).sum(axis=1) * state.mesh / 4


def velocity_field(state: QuantileGrid, model: ModelSpec, query) -> VelocityFieldSample:
    """``G(x) = v(int U(x - y) drho(y) - lam F(x))`` for the reconstructed density."""
    gaps = state.gaps
    bad = np.flatnonzero(gaps <= GAP_FLOOR)
    if bad.size:
        raise DegenerateGap(int(bad[0]), float(gaps[bad[0]]))
    x = np.atleast_1d(np.asarray(query, dtype=float))
    F = np.interp(x, state.values, state.z, left=0.0, right=1.0)
    G = model.velocity(_convolve_U(x, state, model) - model.lam * F)
    return VelocityFieldSample(x, G, state.time)
