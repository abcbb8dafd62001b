"""Probability mass arithmetic on the shared time grid.

Everything a solve consumes is a :class:`DiscretePmf`: nonnegative mass per
tick 0..T plus an explicit ``tail_mass`` for realizations beyond the horizon
(a tail realization can never help the traveler, so it contributes zero
utility downstream and is never renormalized away).

Waiting and riding distributions carry a one-tick floor (``mass[0] == 0``):
a vehicle can neither arrive nor travel in zero ticks, which is what keeps
the expanded routing graph free of zero-time cycles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .grid import TimeGrid

MASS_TOL = 1e-9  # conservation checks
ALGEBRA_TOL = 1e-12  # identities between algebraically equal quantities


class ExhaustedLineError(ValueError):
    """Conditioning on an elapsed wait the line cannot survive (s[r] == 0)."""


class GridMismatchError(ValueError):
    """Operands live on different time grids."""


def _as_mass_array(mass, n: int) -> np.ndarray:
    arr = np.asarray(mass, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise ValueError(f"mass must be a 1-D array of length {n}, got shape {arr.shape}")
    if np.any(arr < -MASS_TOL) or not np.all(np.isfinite(arr)):
        raise ValueError("mass must be nonnegative and finite")
    return np.clip(arr, 0.0, None)


@dataclass(frozen=True)
class DiscretePmf:
    """Probability mass over ticks 0..T with explicit beyond-horizon tail."""

    grid: TimeGrid
    mass: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "mass", _as_mass_array(self.mass, self.grid.budget_ticks + 1))
        if self.tail_mass < -MASS_TOL:
            raise ValueError("tail_mass must be nonnegative")
        object.__setattr__(self, "tail_mass", max(0.0, float(self.tail_mass)))
        total = float(self.mass.sum()) + self.tail_mass
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"mass + tail must equal 1 (got {total})")
        self.mass.setflags(write=False)

    @classmethod
    def from_dict(cls, grid: TimeGrid, points: dict[int, float], tail: float = 0.0) -> "DiscretePmf":
        mass = np.zeros(grid.budget_ticks + 1)
        for tick, p in points.items():
            if not 0 <= tick <= grid.budget_ticks:
                raise ValueError(f"tick {tick} outside grid 0..{grid.budget_ticks}")
            mass[tick] += p
        return cls(grid, mass, tail)

    @classmethod
    def point(cls, grid: TimeGrid, tick: int) -> "DiscretePmf":
        return cls.from_dict(grid, {tick: 1.0})

    @cached_property
    def survival(self) -> np.ndarray:
        """s[k] = P(value > k) = sum(mass[k+1:]) + tail.

        Accumulated back-to-front so a support that has truly ended yields an
        exact 0.0 rather than cancellation residue; the solver relies on
        exact zeros to detect exhausted lines.
        """
        ext = np.concatenate((self.mass[1:], [self.tail_mass]))
        s = np.cumsum(ext[::-1])[::-1]
        s.setflags(write=False)
        return s

    @cached_property
    def cumulative(self) -> np.ndarray:
        c = np.cumsum(self.mass)
        c.setflags(write=False)
        return c

    @property
    def min_tick(self) -> int:
        """Smallest tick with positive mass; T+1 when everything is tail."""
        nz = np.nonzero(self.mass)[0]
        return int(nz[0]) if nz.size else self.grid.budget_ticks + 1

    @property
    def has_floor(self) -> bool:
        return self.mass[0] == 0.0

    def mean_ticks(self) -> float:
        """Conditional in-grid mean (realizations beyond the horizon excluded)."""
        in_grid = float(self.mass.sum())
        if in_grid <= 0.0:
            raise ValueError("pmf has no in-grid mass")
        return float(np.dot(np.arange(self.mass.size), self.mass)) / in_grid

    def to_dict(self) -> dict:
        return {"mass": [float(x) for x in self.mass], "tail": float(self.tail_mass)}


@dataclass(frozen=True)
class DiscreteCdf:
    """Nondecreasing cumulative distribution sampled at ticks 0..T."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] != self.grid.budget_ticks + 1:
            raise ValueError("cdf must cover ticks 0..budget_ticks")
        if np.any(np.diff(arr) < -ALGEBRA_TOL):
            raise ValueError("cdf must be nondecreasing")
        if np.any(arr < -ALGEBRA_TOL) or np.any(arr > 1.0 + MASS_TOL):
            raise ValueError("cdf values must lie in [0, 1]")
        object.__setattr__(self, "values", np.clip(arr, 0.0, 1.0))
        self.values.setflags(write=False)

    def implied_mean(self) -> float:
        """E[X] = sum over t of P(X > t); exact when X >= 0 and H(T) == 1."""
        return float(np.sum(1.0 - self.values))


@dataclass(frozen=True)
class LognormalSpec:
    """Shifted lognormal in tick units: ``shift + LogNormal(mu, sigma)``."""

    mu: float
    sigma: float
    shift: int

    def __post_init__(self) -> None:
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.shift < 1:
            raise ValueError("shift must be at least one tick")

    @property
    def mode_ticks(self) -> float:
        return math.exp(self.mu - self.sigma**2)


@dataclass(frozen=True)
class HeadwayModel:
    """Headway of one line at one station: deterministic at the line origin,
    a propagated cdf downstream."""

    origin_headway: int
    cdf: DiscreteCdf
    mean_headway: float

    def __post_init__(self) -> None:
        if self.mean_headway <= 0:
            raise ValueError("mean_headway must be positive")
        if self.origin_headway < 1:
            raise ValueError("origin_headway must be at least one tick")


class SurvivalTable:
    """Cached survival prefix arrays per (station, line).

    Holding 1 − Σ_{α≤θ} w(α, 0) per tick is what turns the waiting-time
    renormalization into O(1) ratio lookups during a solve.
    """

    def __init__(self) -> None:
        self._arrays: dict[tuple[str, str], np.ndarray] = {}

    @classmethod
    def from_pmfs(cls, pmfs: dict[tuple[str, str], DiscretePmf]) -> "SurvivalTable":
        table = cls()
        for key, pmf in pmfs.items():
            table.add(key, pmf)
        return table

    def add(self, key: tuple[str, str], pmf: DiscretePmf) -> None:
        self._arrays[key] = pmf.survival

    def get(self, key: tuple[str, str]) -> np.ndarray:
        return self._arrays[key]

    def __contains__(self, key: tuple[str, str]) -> bool:
        return key in self._arrays


def _norm_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def discretize_lognormal(spec: LognormalSpec, grid: TimeGrid) -> DiscretePmf:
    """Midpoint-cell discretization of a shifted lognormal onto the grid.

    mass[theta] integrates the density over (theta - shift - 0.5,
    theta - shift + 0.5] in tick units; everything above the horizon becomes
    tail mass, so mass is conserved exactly.
    """
    T = grid.budget_ticks
    mass = np.zeros(T + 1)

    def ln_cdf(x: float) -> float:
        if x <= 0.0:
            return 0.0
        return _norm_cdf((math.log(x) - spec.mu) / spec.sigma)

    prev = 0.0
    for theta in range(spec.shift, T + 1):
        hi = ln_cdf(theta - spec.shift + 0.5)
        mass[theta] = max(0.0, hi - prev)
        prev = hi
    tail = 1.0 - prev if spec.shift <= T else 1.0
    return DiscretePmf(grid, mass, max(0.0, tail))


def convolve(a: DiscretePmf, b: DiscretePmf) -> DiscretePmf:
    """Distribution of the sum of two independent grid variables.

    Cross terms landing beyond the horizon, and any tail operand, accumulate
    into the result's tail mass.
    """
    if not a.grid.compatible(b.grid):
        raise GridMismatchError("cannot convolve pmfs from different grids")
    T = a.grid.budget_ticks
    full = np.convolve(a.mass, b.mass)
    kept = full[: T + 1]
    tail = 1.0 - float(kept.sum())
    return DiscretePmf(a.grid, kept, max(0.0, tail))


def renormalize_waiting(w0: DiscretePmf, r: int, survival: np.ndarray | None = None) -> DiscretePmf:
    """Waiting distribution after ``r`` ticks already spent waiting.

    w(theta, r) = w0(r + theta) / s[r] for theta >= 1; the deficit
    (no arrival within the horizon) stays as tail mass. Raises
    :class:`ExhaustedLineError` when the conditioning event has zero
    probability, in which case the caller must drop the line.
    """
    T = w0.grid.budget_ticks
    if not 0 <= r <= T:
        raise ValueError(f"r must lie in 0..{T}")
    if r == 0:
        return w0
    s = w0.survival if survival is None else survival
    denom = float(s[r])
    if denom <= 0.0:
        raise ExhaustedLineError(f"line cannot arrive after waiting {r} ticks")
    mass = np.zeros(T + 1)
    mass[1 : T - r + 1] = w0.mass[r + 1 : T + 1] / denom
    tail = w0.tail_mass / denom
    return DiscretePmf(w0.grid, mass, tail)


def propagate_headway(h: int, travel_od: DiscretePmf) -> DiscreteCdf:
    """Headway cdf at a downstream station.

    With consecutive vehicles riding the same origin-to-station segment
    independently and the second departing ``h`` ticks later,
    P(X2 - X1 <= t) = sum_x P(X2 <= x + t) * P(X1 = x).
    """
    if h < 1:
        raise ValueError("origin headway must be at least one tick")
    T = travel_od.grid.budget_ticks
    cdf_travel = travel_od.cumulative
    # lookup[i] = P(X2 <= i - h + x-part), i.e. cdf_travel evaluated at i - h,
    # flat beyond T and zero below 0; indices i = x + t range over 0..2T
    lookup = np.empty(2 * T + 1)
    for i in range(2 * T + 1):
        k = i - h
        lookup[i] = 0.0 if k < 0 else float(cdf_travel[min(k, T)])
    # H(t) = sum_x mass[x] * lookup[x + t]: a cross-correlation
    values = np.correlate(lookup, travel_od.mass, mode="valid")
    values = np.maximum.accumulate(np.clip(values, 0.0, 1.0))
    return DiscreteCdf(travel_od.grid, values)


def waiting_from_headway(model: HeadwayModel) -> DiscretePmf:
    """Stationary residual-life waiting pmf from a headway cdf.

    Discrete renewal form of w(t, 0) = (1 - H(t)) / E[h]: waiting exactly
    theta ticks means the gap exceeded theta - 1, so
    mass[theta] = (1 - H(theta - 1)) / E[h] for theta >= 1. This keeps the
    one-tick floor and sums to exactly 1 when E[h] matches the cdf.
    """
    if model.mean_headway <= 0:
        raise ValueError("mean headway must be positive")
    grid = model.cdf.grid
    T = grid.budget_ticks
    mass = np.zeros(T + 1)
    mass[1:] = (1.0 - model.cdf.values[:-1]) / model.mean_headway
    total = float(mass.sum())
    if total > 1.0:
        mass /= total
        tail = 0.0
    else:
        tail = 1.0 - total
    return DiscretePmf(grid, mass, tail)


def interleave_station_pmfs(pmfs: list[DiscretePmf]) -> list[DiscretePmf]:
    """Rebin each line's waiting pmf onto its own tick phase.

    Line k of n receives all mass on ticks congruent to k+1 (mod n), so no
    two lines at the station can arrive within the same tick. This enforces
    the no-simultaneous-arrivals modeling assumption by construction at the
    cost of coarsening each waiting distribution to n-tick resolution.
    """
    n = len(pmfs)
    if n <= 1:
        return list(pmfs)
    T = pmfs[0].grid.budget_ticks
    out = []
    for k, pmf in enumerate(pmfs):
        if not pmf.grid.compatible(pmfs[0].grid):
            raise GridMismatchError("station pmfs must share one grid")
        mass = np.zeros(T + 1)
        tail = pmf.tail_mass
        for j in range(0, T // n + 1):
            lo, hi = j * n + 1, min(j * n + n, T)
            if lo > T:
                break
            chunk = float(pmf.mass[lo : hi + 1].sum())
            target = j * n + k + 1
            if target <= T:
                mass[target] = chunk
            else:
                tail += chunk
        out.append(DiscretePmf(pmf.grid, mass, tail))
    return out


def station_tie_mass(pmfs: list[DiscretePmf]) -> float:
    """Upper bound on first-arrival probability excluded by the no-tie model.

    Sums, over ticks, the probability that at least two of the lines arrive
    in the same tick. Zero for phase-interleaved supports.
    """
    if len(pmfs) <= 1:
        return 0.0
    stack = np.stack([p.mass for p in pmfs])
    total = 0.0
    for a in range(len(pmfs)):
        for b in range(a + 1, len(pmfs)):
            total += float(np.dot(stack[a], stack[b]))
    return total
