"""Gibbs-rescaled Lorenz curves, thermomajorization, and yield bounds.

A level system with inverse temperature beta assigns every population
vector a concave piecewise-linear curve: sort levels by the rescaled
value r_j * exp(beta E_j), then accumulate Boltzmann weights on x and
probability on y. One curve thermomajorizes another iff it lies on or
above it everywhere; for energy-diagonal states this is exactly the
reachability preorder under thermal operations.

The photoisomerization yield bound solves, by bisection, for the largest
target-level population whose "easiest" completion (remaining mass spread
as the conditional Gibbs distribution over the other levels) is still
thermomajorized by the initial state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quantum_core import _freeze

BISECTION_TOL = 1e-10
CURVE_COMPARE_TOL = 1e-12
PARTITION_MATCH_TOL = 1e-9
POPULATION_SUM_TOL = 1e-9
POPULATION_DUST = 1e-12


class InvalidPopulationError(ValueError):
    """Population vector fails normalization or range checks."""


class MismatchedPartitionFunctionError(ValueError):
    """Lorenz curves live on different partition-function intervals."""


class UnknownLabelError(KeyError):
    """Level label not present in the system."""


class IndexOutOfRangeError(IndexError):
    """Level index outside the system."""


@dataclass(frozen=True)
class LevelSystem:
    """Ordered energy levels (label, energy in units 1/beta) at inverse temperature beta."""

    levels: tuple[tuple[str, float], ...]
    beta: float

    def __post_init__(self):
        levels = tuple((str(lbl), float(e)) for lbl, e in self.levels)
        labels = [lbl for lbl, _ in levels]
        if len(set(labels)) != len(labels):
            raise ValueError("level labels must be unique")
        if not self.beta > 0.0:
            raise ValueError("beta must be positive")
        object.__setattr__(self, "levels", levels)
        energies = _freeze(np.array([e for _, e in levels], dtype=float))
        boltzmann = _freeze(np.exp(-self.beta * energies))
        object.__setattr__(self, "_energies", energies)
        object.__setattr__(self, "_boltzmann", boltzmann)

    @property
    def dim(self) -> int:
        return len(self.levels)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lbl for lbl, _ in self.levels)

    @property
    def energies(self) -> np.ndarray:
        return self._energies

    @property
    def boltzmann_weights(self) -> np.ndarray:
        """exp(-beta E_j) per level."""
        return self._boltzmann

    @property
    def partition_function(self) -> float:
        return float(self._boltzmann.sum())

    def label_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabelError(label) from None

    def gibbs_populations(self) -> "PopulationVector":
        return PopulationVector(self._boltzmann / self._boltzmann.sum())


@dataclass(frozen=True)
class PopulationVector:
    """Probabilities aligned with a LevelSystem's levels."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise InvalidPopulationError("populations must be a 1-D vector")
        if np.any(p < -POPULATION_DUST) or np.any(p > 1.0 + POPULATION_DUST):
            raise InvalidPopulationError("populations outside [0, 1] beyond dust tolerance")
        p = np.clip(p, 0.0, 1.0)
        if abs(p.sum() - 1.0) > POPULATION_SUM_TOL:
            raise InvalidPopulationError(f"populations sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", _freeze(p))

    @property
    def dim(self) -> int:
        return self.probs.size


@dataclass(frozen=True)
class LorenzCurve:
    """Gibbs-rescaled Lorenz curve: concave piecewise-linear elbows on [0, Z]."""

    elbows: np.ndarray

    def __post_init__(self):
        e = np.array(self.elbows, dtype=float)
        if e.ndim != 2 or e.shape[1] != 2 or e.shape[0] < 2:
            raise ValueError("elbows must be an (n, 2) array with n >= 2")
        if abs(e[0, 0]) > 0.0 or abs(e[0, 1]) > 0.0:
            raise ValueError("curve must start at the origin")
        if np.any(np.diff(e[:, 0]) <= 0.0):
            raise ValueError("elbow x-coordinates must be strictly increasing")
        if np.any(np.diff(e[:, 1]) < -POPULATION_DUST):
            raise ValueError("elbow y-coordinates must be nondecreasing")
        slopes = np.diff(e[:, 1]) / np.diff(e[:, 0])
        if np.any(np.diff(slopes) > 1e-9):
            raise ValueError("curve is not concave")
        if abs(e[-1, 1] - 1.0) > POPULATION_SUM_TOL:
            raise ValueError("curve must end at height 1")
        object.__setattr__(self, "elbows", _freeze(e))

    @property
    def z(self) -> float:
        return float(self.elbows[-1, 0])

    def value(self, x) -> np.ndarray | float:
        """Piecewise-linear interpolation; clamps outside [0, Z]."""
        return np.interp(x, self.elbows[:, 0], self.elbows[:, 1])


def lorenz_curve(p: PopulationVector, sys: LevelSystem) -> LorenzCurve:
    """Build the Gibbs-rescaled Lorenz curve of populations ``p`` on ``sys``.

    Levels are sorted by r_j / exp(-beta E_j) descending; zero-population
    levels rescale to exactly 0 and sort last. Ties break by ascending level
    index so the curve is deterministic.
    """
    if p.dim != sys.dim:
        raise InvalidPopulationError("population vector does not match the level system")
    r = p.probs
    w = sys.boltzmann_weights
    rescaled = np.where(r > 0.0, r / w, 0.0)
    order = np.lexsort((np.arange(sys.dim), -rescaled))
    xs = np.concatenate(([0.0], np.cumsum(w[order])))
    ys = np.concatenate(([0.0], np.cumsum(r[order])))
    xs[-1] = sys.partition_function
    ys[-1] = 1.0
    ys = np.minimum.accumulate(ys[::-1])[::-1]  # shave fp dust that breaks monotonicity
    return LorenzCurve(np.column_stack((xs, ys)))


def thermomajorizes(a: LorenzCurve, b: LorenzCurve) -> bool:
    """True iff curve ``a`` lies on or above curve ``b`` on all of [0, Z].

    Piecewise-linear curves compare everywhere iff they compare at the union
    of their elbow abscissae.
    """
    if abs(a.z - b.z) > PARTITION_MATCH_TOL * max(1.0, abs(a.z)):
        raise MismatchedPartitionFunctionError(f"partition functions differ: {a.z} vs {b.z}")
    xs = np.union1d(a.elbows[:, 0], b.elbows[:, 0])
    return bool(np.all(a.value(xs) >= b.value(xs) - CURVE_COMPARE_TOL))


def equilibrium_yield(sys: LevelSystem, target_label: str) -> float:
    """Gibbs population of the target level, exp(-beta E)/Z."""
    k = sys.label_index(target_label)
    return float(sys.boltzmann_weights[k] / sys.partition_function)


def gibbs_filled_populations(y: float, sys: LevelSystem, target_index: int) -> PopulationVector:
    """Target level holds ``y``; the rest is the conditional Gibbs fill.

    Among all completions of a fixed target population, this one has the
    lowest Lorenz curve, so it is the easiest final state to reach.
    """
    w = sys.boltzmann_weights
    fill = np.delete(np.arange(sys.dim), target_index)
    probs = np.empty(sys.dim)
    probs[target_index] = y
    probs[fill] = (1.0 - y) * w[fill] / w[fill].sum()
    return PopulationVector(np.clip(probs, 0.0, 1.0))


@dataclass(frozen=True)
class YieldBoundResult:
    """Largest thermomajorization-allowed target population, with the Gibbs yield."""

    bound: float
    equilibrium_yield: float
    target_label: str

    def __post_init__(self):
        if not (-1e-12 <= self.bound <= 1.0 + 1e-12):
            raise ValueError("bound outside [0, 1]")
        if self.bound < self.equilibrium_yield - 1e-9:
            raise ValueError("bound fell below the equilibrium yield")


def max_yield_bound(initial: PopulationVector, sys: LevelSystem, target_label: str) -> YieldBoundResult:
    """Largest final population of ``target_label`` reachable from ``initial``.

    Feasibility of a candidate yield y is tested against the conditional-Gibbs
    completion (the minimal final curve); the answer is found by bisection to
    absolute tolerance ``BISECTION_TOL``. Exactly-touching curves count as
    feasible.
    """
    target = sys.label_index(target_label)
    eq = equilibrium_yield(sys, target_label)
    initial_curve = lorenz_curve(initial, sys)

    def feasible(y: float) -> bool:
        final = lorenz_curve(gibbs_filled_populations(y, sys, target), sys)
        return thermomajorizes(initial_curve, final)

    if feasible(1.0):
        return YieldBoundResult(1.0, eq, target_label)
    lo, hi = eq, 1.0
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return YieldBoundResult(lo, eq, target_label)


def beta_swap_channel(
    p: PopulationVector, sys: LevelSystem, i: int, j: int, strength: float
) -> PopulationVector:
    """Partial thermalization of levels (i, j).

    Mixes (p_i, p_j) toward the two-level Gibbs conditional of their joint
    mass with weight ``strength``; the global Gibbs vector is an exact fixed
    point for every strength. Used as an elementary reachability oracle.
    """
    d = sys.dim
    if not (0 <= i < d and 0 <= j < d):
        raise IndexOutOfRangeError(f"indices ({i}, {j}) outside 0..{d - 1}")
    if i == j:
        raise IndexOutOfRangeError("indices must differ")
    if not 0.0 <= strength <= 1.0:
        raise ValueError("strength must lie in [0, 1]")
    w = sys.boltzmann_weights
    probs = p.probs.copy()
    mass = probs[i] + probs[j]
    share = w[i] / (w[i] + w[j])
    probs[i] = (1.0 - strength) * probs[i] + strength * mass * share
    probs[j] = (1.0 - strength) * probs[j] + strength * mass * (1.0 - share)
    return PopulationVector(np.clip(probs, 0.0, 1.0))
