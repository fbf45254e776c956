"""Closed-form solutions for ``v = 1 - rho``, ``V = 1_(-inf, 0]`` from a point mass.

With these choices the CDF ``F`` solves Burgers' equation
``F_t + (F^2 / 2)_x = 0`` and ``rho_0 = delta_0`` is a Riemann datum.  It has
(at least) two weak solutions:

* the rarefaction fan ``F = x/t`` on ``[0, t)``, density ``1/t`` there, which is
  the entropy solution and the one the particle scheme selects;
* the stationary-shape shock ``F = 1_{x >= t/2}``, a point mass moving at
  speed 1/2, which is a weak solution but not an entropy one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .measure import Measure1D, QuantileGrid


def _check_t(t):
    if np.any(np.asarray(t) <= 0):
        raise ValueError("the rarefaction is defined for t > 0")


def rarefaction(x, t):
    """``(F, density)`` of the rarefaction fan at ``(x, t)``."""
    _check_t(t)
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    F = np.clip(x / t, 0.0, 1.0)
    F = np.where(x < 0, 0.0, np.where(x >= t, 1.0, F))
    dens = np.where((x >= 0) & (x < t), 1.0 / t, 0.0)
    return F, dens


def shock(x, t):
    """CDF of the (non-entropy) shock ``F = 1_{x >= t/2}``."""
    return np.where(np.asarray(x, dtype=float) >= 0.5 * np.asarray(t, dtype=float), 1.0, 0.0)


@dataclass(frozen=True)
class RiemannSolution:
    kind: str
    eval_F: Callable
    eval_density: Callable
    entropy: bool

    def measure(self, t: float) -> Measure1D:
        if self.kind == "rarefaction":
            _check_t(t)
            return Measure1D.uniform(0.0, t)
        return Measure1D.dirac(0.5 * t)


def _shock_density(x, t):
    # absolutely continuous part only; the mass sits in an atom at t/2
    return np.zeros_like(np.asarray(x, dtype=float))


RAREFACTION = RiemannSolution("rarefaction", lambda x, t: rarefaction(x, t)[0],
                              lambda x, t: rarefaction(x, t)[1], entropy=True)
SHOCK = RiemannSolution("shock_nonentropy", shock, _shock_density, entropy=False)


def exact_indicator_particles(initial: QuantileGrid, t: float) -> QuantileGrid:
    """Exact particle state ``x_i(t) = x_i(0) + (i/N) t`` for the indicator model.

    On ordered states each particle sees exactly ``N - i`` leaders, so the
    velocities ``i/N`` never change.
    """
    N = initial.M
    return QuantileGrid(initial.values + np.arange(N + 1) / N * t, initial.time + t)
