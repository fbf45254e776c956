"""Velocity maps, look-ahead kernels and the closed-form bounds built on them.

The model is ``rho_t + (rho v(V * rho))_x = 0`` where ``V`` is supported on
``(-inf, 0]`` with ``V(0-) = lam > 0``.  Writing ``V = U - lam H`` with ``H`` the
Heaviside function (``H(0) = 0``) gives a kernel ``U`` that is Lipschitz on the
whole line, which is what every scheme in :mod:`nlcl.dynamics` uses.

All bound formulas depend on the constants ``lip_v``, ``b``, ``lip_V`` and
``lam`` only.  Whenever ``L = lip_v * lip_V`` vanishes (the indicator kernel)
the raw formulas are 0/0 and the analytic limit is returned instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

L_ZERO = 1e-14

Array = np.ndarray
Fn = Callable[[Array], Array]


@dataclass(frozen=True)
class VelocitySpec:
    """Velocity map ``v`` with Lipschitz constant and strict-decrease constant ``b``."""

    eval: Fn
    lip_v: float
    b: float
    name: str = "v"

    def __call__(self, rho):
        return self.eval(np.asarray(rho, dtype=float))


def linear_velocity(vmax: float = 1.0, slope: float = 1.0) -> VelocitySpec:
    """``v(rho) = vmax - slope * rho``."""
    if slope <= 0:
        raise ValueError("slope must be positive")
    return VelocitySpec(lambda r: vmax - slope * r, lip_v=slope, b=slope,
                        name=f"{vmax:g} - {slope:g} rho")


@dataclass(frozen=True)
class KernelSpec:
    """Look-ahead kernel ``V`` and its continuous extension ``U``.

    ``primitive_U``, when given, is an antiderivative of ``U``; it lets the
    Eulerian velocity field be integrated exactly against piecewise-constant
    densities.  ``indicator`` marks ``V = lam * 1_(-inf, 0]``, for which the
    particle right-hand sides reduce to index counts.
    """

    eval_V: Fn
    lam: float
    lip_V: float
    primitive_U: Optional[Fn] = None
    monotone_positive: bool = False
    indicator: bool = False
    name: str = "V"

    def V(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= 0, self.eval_V(np.minimum(x, 0.0)), 0.0)

    def U(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= 0, self.eval_V(np.minimum(x, 0.0)), self.lam)

    def H(self, x):
        return (np.asarray(x, dtype=float) > 0).astype(float)


@dataclass(frozen=True)
class ModelSpec:
    velocity: VelocitySpec
    kernel: KernelSpec
    name: str = "custom"

    @property
    def lip_v(self) -> float:
        return self.velocity.lip_v

    @property
    def b(self) -> float:
        return self.velocity.b

    @property
    def lip_V(self) -> float:
        return self.kernel.lip_V

    @property
    def lam(self) -> float:
        return self.kernel.lam

    @property
    def L(self) -> float:
        """``[v]_Lip [V]_Lip``, the rate in every smoothing and gap estimate."""
        return self.velocity.lip_v * self.kernel.lip_V

    def constants(self) -> dict:
        return {"lip_v": self.lip_v, "b": self.b, "lip_V": self.lip_V, "lambda": self.lam,
                "monotone_positive": self.kernel.monotone_positive}

    def probe_constants(self, n: int = 10_000, rho_max: float = 10.0,
                        x_min: float = -10.0, atol: float = 1e-12) -> list[str]:
        """Spot-check the declared constants on probe grids; returns the failures."""
        problems = []
        r = np.linspace(0.0, rho_max, n)
        dv = np.diff(self.velocity(r))
        dr = np.diff(r)
        if np.any(dv > -self.b * dr + atol):
            problems.append("v is not decreasing at rate b")
        if np.any(np.abs(dv) > self.lip_v * dr + atol):
            problems.append("v exceeds lip_v")
        x = np.linspace(x_min, 0.0, n)
        V = self.kernel.V(x)
        if np.any(np.abs(np.diff(V)) > self.lip_V * np.diff(x) + atol):
            problems.append("V exceeds lip_V on (-inf, 0]")
        if abs(V[-1] - self.lam) > atol:
            problems.append("V(0) differs from lambda")
        if np.any(self.kernel.V(np.array([1e-12, 0.5, 3.0])) != 0):
            problems.append("V is not supported in (-inf, 0]")
        if self.kernel.monotone_positive and (np.any(V <= 0) or np.any(np.diff(V) < -atol)):
            problems.append("kernel flagged monotone_positive but is not")
        return problems


# builtin models --------------------------------------------------------

def _exp_primitive(s):
    s = np.asarray(s, dtype=float)
    return np.where(s <= 0, np.exp(np.minimum(s, 0.0)), 1.0 + s)


def _ramp_primitive(s):
    s = np.asarray(s, dtype=float)
    c = np.clip(s, -1.0, 0.0)
    return 0.5 * (1.0 + c) ** 2 + np.maximum(s, 0.0)


def indicator_kernel(lam: float = 1.0) -> KernelSpec:
    return KernelSpec(lambda x: np.full_like(x, lam), lam=lam, lip_V=0.0,
                      primitive_U=lambda s: lam * np.asarray(s, dtype=float),
                      monotone_positive=True, indicator=True, name="indicator")


def exponential_kernel() -> KernelSpec:
    return KernelSpec(np.exp, lam=1.0, lip_V=1.0, primitive_U=_exp_primitive,
                      monotone_positive=True, name="exponential")


def ramp_kernel() -> KernelSpec:
    return KernelSpec(lambda x: np.maximum(0.0, 1.0 + x), lam=1.0, lip_V=1.0,
                      primitive_U=_ramp_primitive, monotone_positive=False, name="ramp")


def tabulated_kernel(xs: Sequence[float], values: Sequence[float],
                     lam: Optional[float] = None, lip_V: Optional[float] = None) -> KernelSpec:
    """Piecewise-linear kernel through ``(xs, values)`` on ``x <= 0``.

    ``xs`` must be increasing and end at 0; ``V`` is held constant left of
    ``xs[0]``.  ``lam`` and ``lip_V`` default to ``values[-1]`` and the largest
    slope; overriding them is allowed but they must still be true constants.
    """
    xs = np.asarray(xs, dtype=float)
    vs = np.asarray(values, dtype=float)
    if xs.ndim != 1 or xs.size < 2 or xs.shape != vs.shape:
        raise ValueError("kernel table needs at least two (x, value) pairs")
    if np.any(np.diff(xs) <= 0) or xs[-1] != 0.0:
        raise ValueError("kernel breakpoints must increase and end at x = 0")
    slopes = np.diff(vs) / np.diff(xs)
    lam = float(vs[-1]) if lam is None else float(lam)
    if lam <= 0:
        raise ValueError("lambda = V(0-) must be positive")
    lip = float(np.max(np.abs(slopes))) if lip_V is None else float(lip_V)

    # antiderivative of U: cumulative trapezoid on the table, constant tails
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (vs[1:] + vs[:-1]) * np.diff(xs))))

    def prim(s):
        s = np.asarray(s, dtype=float)
        left = vs[0] * (s - xs[0])
        sc = np.clip(s, xs[0], 0.0)
        k = np.clip(np.searchsorted(xs, sc, side="right") - 1, 0, xs.size - 2)
        dx = sc - xs[k]
        mid = cum[k] + vs[k] * dx + 0.5 * slopes[k] * dx * dx
        return np.where(s < xs[0], left, mid) + lam * np.maximum(s, 0.0)

    return KernelSpec(lambda x: np.interp(x, xs, vs), lam=lam, lip_V=lip, primitive_U=prim,
                      monotone_positive=bool(np.all(vs > 0) and np.all(np.diff(vs) >= 0)),
                      indicator=bool(np.all(vs == lam)), name="table")


BUILTINS = ("burgers_indicator", "exponential", "ramp")


def builtin_model(name: str) -> ModelSpec:
    """``burgers_indicator``, ``exponential`` or ``ramp``; all use ``v = 1 - rho``."""
    kernels = {"burgers_indicator": indicator_kernel, "exponential": exponential_kernel,
               "ramp": ramp_kernel}
    if name not in kernels:
        raise ValueError(f"unknown model {name!r}; choose from {', '.join(BUILTINS)}")
    return ModelSpec(linear_velocity(1.0, 1.0), kernels[name](), name=name)


# closed-form bounds ----------------------------------------------------

def stability_constant(p: float, m: ModelSpec) -> float:
    """Lipschitz constant of the quantile operator on L^p, the Wasserstein growth rate."""
    p = float(p)
    if not p >= 1:
        raise ValueError("p must be >= 1")
    if math.isinf(p):
        return 2.0 * m.L
    return 2.0 ** ((p + 1.0) / p) * m.L


def _decay_ratio(L: float, t: float) -> float:
    """``L / (1 - exp(-L t))`` with its ``1/t`` limit at ``L = 0``."""
    if L < L_ZERO:
        return 1.0 / t
    return L / -math.expm1(-L * t)


def smoothing_bound(m: ModelSpec, t: float) -> float:
    """Continuum L^inf bound ``L / (b lam (1 - e^{-L t}))`` for the density at time ``t``."""
    if t <= 0:
        raise ValueError("the smoothing bound needs t > 0")
    return _decay_ratio(m.L, t) / (m.b * m.lam)


def discrete_smoothing_bound(m: ModelSpec, t: float) -> float:
    """Particle-level bound ``2L / (b lam (1 - e^{-2L t}))`` on every cell density."""
    if t <= 0:
        raise ValueError("the smoothing bound needs t > 0")
    return _decay_ratio(2.0 * m.L, t) / (m.b * m.lam)


def gap_bound(m: ModelSpec, N: int, t: float) -> float:
    """Lower bound on consecutive particle gaps, ``b lam (1/N) (1 - e^{-2Lt}) / (2L)``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if t <= 0:
        return 0.0
    L2 = 2.0 * m.L
    if L2 < L_ZERO:
        return m.b * m.lam * t / N
    return m.b * m.lam / N * -math.expm1(-L2 * t) / L2


def support_bound(m: ModelSpec, initial_width: float, T: float) -> float:
    """Support width cap ``initial_width + lip_v lam T``."""
    if initial_width < 0 or T < 0:
        raise ValueError("initial_width and T must be non-negative")
    return initial_width + m.lip_v * m.lam * T


def threshold_density(m: ModelSpec) -> float:
    """Density level ``L / (b lam)`` below which initial data stay bounded by it.

    Zero for the indicator kernel, where the statement is vacuous.
    """
    return m.L / (m.b * m.lam)
