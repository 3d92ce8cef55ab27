"""Resource monotones: quantum Fisher information, coherence modes, one-shot work.

All of these decrease (or stay put) under thermal processing, so they
quantify how much of a state's thermodynamic value survives relaxation.
Logarithms are natural throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .open_system import LzParams
from .quantum_core import (
    DensityOperator,
    DegenerateSpectrumError,
    DimensionMismatchError,
    HamiltonianOperator,
    eig_hermitian,
    _jacobi_eigh,
)
from .thermomaj import InvalidPopulationError, LevelSystem, PopulationVector

FISHER_POPULATION_FLOOR = 1e-14
DEFAULT_GAP_TOL = 1e-9
SUPPORT_WEIGHT_TOL = 1e-10


class UnknownModeError(KeyError):
    """Requested gap is not a mode of the decomposition."""


class SupportViolationError(ValueError):
    """First state has weight outside the second state's support."""


def fisher_information(rho: DensityOperator, h: HamiltonianOperator) -> float:
    """Quantum Fisher information of ``rho`` relative to ``h``.

    2 sum_{j,k} (r_j - r_k)^2 / (r_j + r_k) |<j|H|k>|^2 over the state's
    eigenpairs; pairs with joint population below ``FISHER_POPULATION_FLOOR``
    contribute zero (the formula's limit). Reduces to 4 Var(H) on pure states
    and vanishes iff the state commutes with H.
    """
    if rho.dim != h.dim:
        raise DimensionMismatchError("state and Hamiltonian dimensions differ")
    vals, vecs = _jacobi_eigh(rho.matrix)
    r = np.clip(vals, 0.0, None)
    hm = vecs.conj().T @ h.matrix @ vecs
    num = (r[:, None] - r[None, :]) ** 2
    den = r[:, None] + r[None, :]
    mask = den > FISHER_POPULATION_FLOOR
    terms = np.zeros_like(num)
    terms[mask] = num[mask] / den[mask]
    return float(max(2.0 * np.sum(terms * np.abs(hm) ** 2), 0.0))


def fisher_lz_formula(rho_elec: DensityOperator, p: LzParams) -> float:
    """Closed-form Fisher information for the sweep Hamiltonian at t_final.

    Exact two-level reduction in the diabatic basis:

        lam^2 (1 - 2 rho00 + 4 (v t_f / lam) Re rho01)^2
        + 4 (lam^2 + 4 v^2 t_f^2) (Im rho01)^2

    For states with real rho01 this is the usual |1 - 2 rho00 - 4 (v t_f /
    lam) Re rho01|^2 form up to the sign carried by the diagonal ramp
    convention used here (psi1 is the lower level at +t_final).
    """
    if rho_elec.dim != 2:
        raise DimensionMismatchError("formula applies to a two-level electronic state")
    rho00 = float(rho_elec.matrix[0, 0].real)
    rho01 = complex(rho_elec.matrix[0, 1])
    vt = p.v * p.t_final
    bracket = (1.0 - 2.0 * rho00) + 4.0 * (vt / p.lam) * rho01.real
    return float(p.lam**2 * bracket**2 + 4.0 * (p.lam**2 + 4.0 * vt**2) * rho01.imag**2)


def fisher_bound(p: LzParams) -> float:
    """Asymptotic ceiling 16 v^2 t_f^2 x (1 - x), x the diabatic survival probability."""
    x = math.exp(-math.pi * p.lam**2 / (2.0 * p.hbar * p.v))
    return 16.0 * (p.v * p.t_final) ** 2 * x * (1.0 - x)


def fisher_bound_scaled(p: LzParams) -> float:
    """The ceiling divided by 4 v^2 t_f^2; peaks at exactly 1 when x = 1/2."""
    x = math.exp(-math.pi * p.lam**2 / (2.0 * p.hbar * p.v))
    return 4.0 * x * (1.0 - x)


@dataclass(frozen=True)
class ModeDecomposition:
    """State components grouped by energy gap omega in the Hamiltonian eigenbasis."""

    modes: dict[float, np.ndarray]
    gap_tolerance: float

    @property
    def omegas(self) -> tuple[float, ...]:
        return tuple(sorted(self.modes))

    def reconstruct(self) -> np.ndarray:
        return sum(self.modes.values())

    def component(self, omega: float) -> np.ndarray:
        for key in self.modes:
            if abs(key - omega) <= self.gap_tolerance * max(1.0, abs(key)) + self.gap_tolerance:
                return self.modes[key]
        raise UnknownModeError(f"no mode within tolerance of omega={omega}")


def mode_decompose(
    rho: DensityOperator, h: HamiltonianOperator, gap_tol: float = DEFAULT_GAP_TOL
) -> ModeDecomposition:
    """Split ``rho`` into components rho^(omega) by gap omega_n - omega_m of ``h``.

    Gaps are clustered within ``gap_tol`` (this only absorbs floating-point
    noise; the spectrum itself must be nondegenerate beyond the tolerance).
    Components are returned in the original basis and sum to ``rho``.
    """
    if rho.dim != h.dim:
        raise DimensionMismatchError("state and Hamiltonian dimensions differ")
    es = eig_hermitian(h)
    e = es.eigenvalues
    if np.any(np.diff(e) <= gap_tol):
        raise DegenerateSpectrumError("Hamiltonian spectrum degenerate beyond gap tolerance")
    v = es.eigenvectors
    tilde = v.conj().T @ rho.matrix @ v
    gaps = e[:, None] - e[None, :]

    pos = np.unique(gaps[gaps > gap_tol])
    clusters: list[list[float]] = []
    for g in np.sort(pos):
        if clusters and g - clusters[-1][-1] <= gap_tol:
            clusters[-1].append(g)
        else:
            clusters.append([g])
    reps = [float(np.mean(c)) for c in clusters]

    modes: dict[float, np.ndarray] = {}

    def _component(mask: np.ndarray) -> np.ndarray:
        comp = np.where(mask, tilde, 0.0)
        return v @ comp @ v.conj().T

    modes[0.0] = _component(np.abs(gaps) <= gap_tol)
    for rep in reps:
        width = gap_tol * max(1.0, rep)
        modes[rep] = _component(np.abs(gaps - rep) <= width)
        modes[-rep] = _component(np.abs(gaps + rep) <= width)
    return ModeDecomposition(modes, gap_tol)


def mode_one_norm(md: ModeDecomposition, omega: float) -> float:
    """Trace norm of the mode-omega component (sum of singular values)."""
    comp = md.component(omega)
    return float(np.linalg.svd(comp, compute_uv=False).sum())


def d_max(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Max relative entropy log min{c : rho <= c sigma}, natural log.

    Computed as log of the top eigenvalue of sigma^{-1/2} rho sigma^{-1/2} on
    sigma's support. The support cutoff is relative (dim * eps * lambda_max),
    so genuinely tiny Boltzmann weights still count as support.
    """
    if rho.dim != sigma.dim:
        raise DimensionMismatchError("state dimensions differ")
    vals, vecs = _jacobi_eigh(sigma.matrix)
    cutoff = sigma.dim * np.finfo(float).eps * max(float(vals[-1]), 0.0)
    support = vals > cutoff
    if not np.any(support):
        raise SupportViolationError("sigma has empty numerical support")
    vs = vecs[:, support]
    inside = float(np.trace(vs.conj().T @ rho.matrix @ vs).real)
    if 1.0 - inside > SUPPORT_WEIGHT_TOL:
        raise SupportViolationError(f"state carries weight {1.0 - inside:.3e} outside sigma's support")
    inv_sqrt = 1.0 / np.sqrt(vals[support])
    a = (inv_sqrt[:, None] * (vs.conj().T @ rho.matrix @ vs)) * inv_sqrt[None, :]
    top = _jacobi_eigh((a + a.conj().T) / 2.0)[0][-1]
    return float(np.log(max(top, np.finfo(float).tiny)))


@dataclass(frozen=True)
class WorkResult:
    """One-shot work of formation (energy units) and its dimensionless d_max."""

    w_min: float
    d_max: float


def w_min(p: PopulationVector, sys: LevelSystem) -> WorkResult:
    """Minimal single-shot work to form the diagonal state ``p`` from Gibbs.

    (1/beta) max_j log(r_j e^{beta E_j} Z) over occupied levels, evaluated as
    the log of the largest population-to-Gibbs ratio so a Gibbs input gives
    exactly zero.
    """
    if p.dim != sys.dim:
        raise InvalidPopulationError("population vector does not match the level system")
    g = sys.gibbs_populations().probs
    occupied = p.probs > 0.0
    if not np.any(occupied):
        raise InvalidPopulationError("population vector is numerically empty")
    ratio = np.max(p.probs[occupied] / g[occupied])
    d = float(np.log(ratio))
    return WorkResult(w_min=d / sys.beta, d_max=d)
