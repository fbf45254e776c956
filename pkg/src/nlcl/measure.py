"""One-dimensional probability measures and their quantile representation.

A :class:`Measure1D` is a finite sum of atoms plus a piecewise-constant
density.  Its cumulative distribution is piecewise linear with jumps, and its
quantile (pseudo-inverse) is piecewise linear with plateaus, which is what
makes exact Wasserstein distances possible here.

A :class:`QuantileGrid` holds samples ``X(i/M)``, ``i = 0..M`` of a
non-decreasing quantile function.  The same object is the particle state of
the follow-the-leader scheme: particle ``i`` sits at ``values[i]`` and
carries mass ``1/M`` on the cell to its right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

MASS_TOL = 1e-12
GAP_FLOOR = 1e-300
_SEARCH_TOL = 4 * np.finfo(float).eps
_MIDPOINT_NODES = 2**16
_Z_MERGE = 1e-12


class MeasureError(ValueError):
    """Raised when a measure fails its construction invariants."""


class DegenerateGap(ValueError):
    """Raised when a quantile grid has a zero or negative gap."""

    def __init__(self, index: int, gap: float):
        self.index = index
        self.gap = gap
        super().__init__(f"gap {index} (between values {index} and {index + 1}) is {gap!r}")


@dataclass(frozen=True)
class Measure1D:
    """Probability measure made of atoms and piecewise-constant density pieces.

    Parameters
    ----------
    atoms : sequence of (position, mass)
        Coincident atoms are merged.
    pieces : sequence of (left, right, density)
        Must be disjoint once sorted by ``left``.
    """

    atoms: tuple = ()
    pieces: tuple = ()

    def __post_init__(self):
        merged: dict[float, float] = {}
        for x, mass in self.atoms:
            x, mass = float(x), float(mass)
            if not (math.isfinite(x) and math.isfinite(mass)) or mass <= 0 or mass > 1 + MASS_TOL:
                raise MeasureError(f"invalid atom ({x}, {mass})")
            merged[x] = merged.get(x, 0.0) + mass
        atoms = tuple(sorted(merged.items()))

        pieces = []
        for left, right, density in self.pieces:
            left, right, density = float(left), float(right), float(density)
            if not all(map(math.isfinite, (left, right, density))):
                raise MeasureError(f"non-finite piece ({left}, {right}, {density})")
            if not left < right:
                raise MeasureError(f"piece needs left < right, got [{left}, {right})")
            if density < 0:
                raise MeasureError(f"negative density {density} on [{left}, {right})")
            pieces.append((left, right, density))
        pieces.sort()
        for (_, r0, _), (l1, _, _) in zip(pieces, pieces[1:]):
            if l1 < r0:
                raise MeasureError(f"overlapping pieces at {l1} < {r0}")
        pieces = tuple(pieces)

        total = math.fsum(m for _, m in atoms) + math.fsum(d * (r - l) for l, r, d in pieces)
        if abs(total - 1.0) > MASS_TOL:
            raise MeasureError(f"total mass is {total!r}, expected 1")

        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "pieces", pieces)

    # constructors ------------------------------------------------------

    @classmethod
    def dirac(cls, x: float = 0.0) -> "Measure1D":
        return cls(atoms=((x, 1.0),))

    @classmethod
    def uniform(cls, left: float = 0.0, right: float = 1.0) -> "Measure1D":
        return cls(pieces=((left, right, 1.0 / (right - left)),))

    @classmethod
    def from_dict(cls, data: dict) -> "Measure1D":
        """Build from ``{"atoms": [{"x", "mass"}], "pieces": [{"left", "right", "density"}]}``."""
        atoms = [(a["x"], a["mass"]) for a in data.get("atoms", [])]
        pieces = [(p["left"], p["right"], p["density"]) for p in data.get("pieces", [])]
        return cls(atoms=tuple(atoms), pieces=tuple(pieces))

    def to_dict(self) -> dict:
        return {
            "atoms": [{"x": x, "mass": m} for x, m in self.atoms],
            "pieces": [{"left": l, "right": r, "density": d} for l, r, d in self.pieces],
        }

    # queries -----------------------------------------------------------

    @property
    def support(self) -> tuple[float, float]:
        """Convex hull of the support, ignoring zero-density pieces."""
        pts = [x for x, _ in self.atoms]
        for l, r, d in self.pieces:
            if d > 0:
                pts.extend((l, r))
        return min(pts), max(pts)

    @property
    def width(self) -> float:
        lo, hi = self.support
        return hi - lo

    @property
    def sup_density(self) -> float:
        """Essential sup of the density; ``inf`` when there are atoms."""
        if self.atoms:
            return math.inf
        return max(d for _, _, d in self.pieces)

    def integrate(self, phi: Callable[[np.ndarray], np.ndarray], order: int = 16,
                  breaks: Sequence[float] = ()) -> float:
        """Integrate ``phi`` against the measure.

        Each piece is split at ``breaks`` (kinks of ``phi``) and integrated with
        Gauss-Legendre of the given order; atoms contribute ``mass * phi(x)``.
        """
        nodes, weights = np.polynomial.legendre.leggauss(order)
        total = 0.0
        for x, m in self.atoms:
            total += m * float(phi(np.array([x]))[0])
        for l, r, d in self.pieces:
            cuts = np.unique(np.concatenate(([l, r], [b for b in breaks if l < b < r])))
            for a, b in zip(cuts[:-1], cuts[1:]):
                xs = 0.5 * (b - a) * nodes + 0.5 * (a + b)
                total += d * 0.5 * (b - a) * float(np.dot(weights, phi(xs)))
        return total


@dataclass(frozen=True)
class CdfView:
    """Right-continuous CDF on the sorted breakpoints of a measure.

    ``values[k]`` is ``F(b_k)`` and ``left_values[k]`` is ``F(b_k-)``; the CDF
    is linear between ``values[k]`` and ``left_values[k + 1]``.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    left_values: np.ndarray

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        b = self.breakpoints
        k = np.searchsorted(b, x, side="right") - 1
        out = np.zeros_like(x)
        inside = k >= 0
        kk = k[inside]
        last = kk == len(b) - 1
        xin = x[inside]
        res = np.empty_like(xin)
        res[last] = 1.0
        nl = ~last
        k0 = kk[nl]
        frac = (xin[nl] - b[k0]) / (b[k0 + 1] - b[k0])
        res[nl] = self.values[k0] + frac * (self.left_values[k0 + 1] - self.values[k0])
        out[inside] = res
        return out


def cdf_of(mu: Measure1D) -> CdfView:
    """Cumulative distribution ``F(x) = mu((-inf, x])`` as a :class:`CdfView`."""
    pts = {x for x, _ in mu.atoms}
    for l, r, _ in mu.pieces:
        pts.update((l, r))
    b = np.array(sorted(pts))
    atom_mass = dict(mu.atoms)
    # mass carried by the open interval (b_k, b_{k+1})
    gap_mass = np.zeros(len(b))
    for l, r, d in mu.pieces:
        k0, k1 = np.searchsorted(b, l), np.searchsorted(b, r)
        gap_mass[k0:k1] += d * np.diff(b[k0:k1 + 1])
    values = np.empty(len(b))
    left_values = np.empty(len(b))
    acc = 0.0
    for k, x in enumerate(b):
        left_values[k] = acc
        acc += atom_mass.get(x, 0.0)
        values[k] = acc
        acc += gap_mass[k]
    left_values = np.minimum(left_values, 1.0)
    values = np.minimum(values, 1.0)
    values[-1] = 1.0
    return CdfView(b, values, left_values)


def _quantile_segments(mu: Measure1D):
    """Quantile of ``mu`` as linear pieces ``(z0, z1, x0, x1)`` covering [0, 1]."""
    F = cdf_of(mu)
    b, v, lv = F.breakpoints, F.values, F.left_values
    segs = []
    for k in range(len(b)):
        if v[k] > lv[k]:
            segs.append((lv[k], v[k], b[k], b[k]))
        if k + 1 < len(b) and lv[k + 1] > v[k]:
            segs.append((v[k], lv[k + 1], b[k], b[k + 1]))
    z0 = np.array([s[0] for s in segs])
    z1 = np.array([s[1] for s in segs])
    # close round-off holes so the pieces tile [0, 1]
    z0[0] = 0.0
    z1[-1] = 1.0
    z0[1:] = z1[:-1]
    return z0, z1, np.array([s[2] for s in segs]), np.array([s[3] for s in segs])


@dataclass(frozen=True)
class QuantileGrid:
    """Samples ``X(i/M)`` of a non-decreasing quantile function."""

    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("a QuantileGrid needs M + 1 >= 2 values")
        if not np.all(np.isfinite(vals)):
            raise ValueError("QuantileGrid values must be finite")
        tol = 1e-10 * max(1.0, abs(vals[-1] - vals[0]))
        if np.any(np.diff(vals) < -tol):
            raise ValueError("QuantileGrid values must be non-decreasing")
        if self.time < 0:
            raise ValueError("time must be non-negative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def M(self) -> int:
        return self.values.size - 1

    @property
    def mesh(self) -> float:
        return 1.0 / self.M

    @property
    def z(self) -> np.ndarray:
        return np.arange(self.M + 1) / self.M

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.values)

    @property
    def width(self) -> float:
        return float(self.values[-1] - self.values[0])

    def at(self, time: float) -> "QuantileGrid":
        return QuantileGrid(self.values, time)

    def shifted(self, c: float) -> "QuantileGrid":
        return QuantileGrid(self.values + c, self.time)


def quantile_of(mu: Measure1D, M: int) -> QuantileGrid:
    """Sample ``X(z) = inf{x : F(x) >= z}`` at ``z = i/M``, ``i = 0..M``.

    ``X(0)`` is taken as the left end of the support.  Atoms give repeated
    values.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    F = cdf_of(mu)
    b, v, lv = F.breakpoints, F.values, F.left_values
    z = np.arange(M + 1) / M
    k = np.searchsorted(v + _SEARCH_TOL, z, side="left")
    k = np.minimum(k, len(b) - 1)
    x = b[k].astype(float)
    ramp = (k > 0) & (z < lv[k] - _SEARCH_TOL)
    kr = k[ramp]
    x[ramp] = b[kr - 1] + (z[ramp] - v[kr - 1]) / (lv[kr] - v[kr - 1]) * (b[kr] - b[kr - 1])
    # z = 0 is the bottom of the support, not -inf
    x[0] = _quantile_segments(mu)[2][0]
    return QuantileGrid(np.maximum.accumulate(x))


def reconstruct_density(X: QuantileGrid) -> Measure1D:
    """Piecewise-constant density ``m / (X[i+1] - X[i])`` on ``[X[i], X[i+1])``."""
    gaps = X.gaps
    bad = np.flatnonzero(gaps <= GAP_FLOOR)
    if bad.size:
        raise DegenerateGap(int(bad[0]), float(gaps[bad[0]]))
    dens = X.mesh / gaps
    v = X.values
    return Measure1D(pieces=tuple(zip(v[:-1], v[1:], dens)))


def _grid_segments(X: QuantileGrid):
    v = X.values
    z = X.z
    return z[:-1], z[1:], v[:-1], v[1:]


MeasureLike = Union[Measure1D, QuantileGrid]


def _segments(a: MeasureLike):
    if isinstance(a, QuantileGrid):
        return _grid_segments(a)
    return _quantile_segments(a)


def _eval_on(segs, zl, zr):
    """Values of a piecewise-linear quantile at both ends of each ``[zl, zr]``.

    Every ``[zl, zr]`` must lie inside a single segment.
    """
    z0, z1, x0, x1 = segs
    zm = 0.5 * (zl + zr)
    j = np.clip(np.searchsorted(z1, zm, side="left"), 0, len(z0) - 1)
    span = z1[j] - z0[j]
    slope = np.where(span > 0, (x1[j] - x0[j]) / np.where(span > 0, span, 1.0), 0.0)
    return x0[j] + slope * (zl - z0[j]), x0[j] + slope * (zr - z0[j])


def quantile_function(a: MeasureLike) -> Callable[[np.ndarray], np.ndarray]:
    """Evaluator of ``inf{x : F(x) >= z}`` (left-continuous in ``z``) for ``a``."""
    z0, z1, x0, x1 = _segments(a)

    def X(z):
        z = np.asarray(z, dtype=float)
        j = np.clip(np.searchsorted(z1, z, side="left"), 0, len(z0) - 1)
        span = z1[j] - z0[j]
        slope = np.where(span > 0, (x1[j] - x0[j]) / np.where(span > 0, span, 1.0), 0.0)
        return x0[j] + slope * (z - z0[j])

    return X


def wasserstein(p: float, a: MeasureLike, b: MeasureLike) -> float:
    """p-Wasserstein distance as the L^p distance between quantile functions.

    Exact for ``p`` in ``{1, 2, inf}``: both quantiles are piecewise linear, so
    the difference is linear on every cell of the merged breakpoint grid.
    Other finite orders use midpoint quadrature with 2**16 nodes.
    A :class:`QuantileGrid` is read as its piecewise-linear interpolant, i.e.
    the reconstructed density (coincident values become atoms).
    """
    p = float(p)
    if not p >= 1:
        raise ValueError(f"Wasserstein order must be >= 1, got {p}")
    sa, sb = _segments(a), _segments(b)
    if p not in (1.0, 2.0, math.inf):
        zm = (np.arange(_MIDPOINT_NODES) + 0.5) / _MIDPOINT_NODES
        d = np.abs(quantile_function(a)(zm) - quantile_function(b)(zm))
        return float(np.mean(d**p) ** (1.0 / p))

    zs = np.unique(np.concatenate((sa[0], sa[1], sb[0], sb[1])))
    # merge breakpoints split only by mass round-off; a sliver cell would
    # otherwise pair one side's post-jump value with the other's pre-jump one
    zs = zs[np.concatenate(([True], np.diff(zs) > _Z_MERGE))]
    zs[-1] = 1.0
    zl, zr = zs[:-1], zs[1:]
    al, ar = _eval_on(sa, zl, zr)
    bl, br = _eval_on(sb, zl, zr)
    d0, d1, h = al - bl, ar - br, zr - zl

    if p == math.inf:
        return float(max(np.max(np.abs(d0)), np.max(np.abs(d1))))
    if p == 2.0:
        return float(math.sqrt(max(math.fsum(h * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0), 0.0)))
    a0, a1 = np.abs(d0), np.abs(d1)
    same = d0 * d1 >= 0
    denom = np.where(same, 1.0, a0 + a1)
    cell = np.where(same, 0.5 * h * (a0 + a1), 0.5 * h * (d0 * d0 + d1 * d1) / denom)
    return float(math.fsum(cell))
