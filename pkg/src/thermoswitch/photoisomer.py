"""Two-level photoswitch model and the angular-clock relaxation channel.

The electronic Hamiltonian depends on a rotation angle phi through two
cosine potential branches coupled by a constant off-diagonal lambda/2;
its eigenlevels at phi = 0, pi define the four-level system used by the
yield bounds and kinetics. The clock simulation discretizes the half
rotation into f ticks: each tick dephases the electronic state in the
local adiabatic basis with probability p_dissipate (the reduced channel
of an energy-bookkeeping isometry on molecule plus bath), then the next
site's Hamiltonian evolves the state unitarily for delta_t.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .quantum_core import (
    DensityOperator,
    EigenSystem,
    HamiltonianOperator,
    eig_hermitian,
    _freeze,
)
from .thermomaj import IndexOutOfRangeError, LevelSystem

FOUR_LEVEL_LABELS = ("E-(0)", "E-(pi)", "E+(0)", "E+(pi)")


@dataclass(frozen=True)
class MoleculeParams:
    """Potential branch depths w0, w1, vertical gap e1, coupling lam, inverse temperature."""

    w0: float
    w1: float
    e1: float
    lam: float
    beta: float = 1.0

    def __post_init__(self):
        if min(self.w0, self.w1, self.e1) < 0.0 or self.lam <= 0.0:
            raise ValueError("w0, w1, e1 must be nonnegative and lam positive")
        if self.lam > 0.1 * min(self.e1, self.w0):
            warnings.warn("coupling lam is not small against e1 and w0", stacklevel=2)

    @property
    def delta_e(self) -> float:
        """Energy stored by the cis->trans ground transition, e1 - w1."""
        return self.e1 - self.w1


def h_elec(phi: float, mp: MoleculeParams) -> HamiltonianOperator:
    """Diabatic-basis electronic Hamiltonian at angle phi."""
    d0 = 0.5 * mp.w0 * (1.0 - math.cos(phi))
    d1 = mp.e1 - 0.5 * mp.w1 * (1.0 - math.cos(phi))
    return HamiltonianOperator(
        np.array([[d0, mp.lam / 2.0], [mp.lam / 2.0, d1]], dtype=np.complex128)
    )


def adiabatic_levels(phi: float, mp: MoleculeParams) -> tuple[float, float, EigenSystem]:
    """(E_minus, E_plus, eigensystem) of the electronic Hamiltonian at phi."""
    es = eig_hermitian(h_elec(phi, mp))
    return float(es.eigenvalues[0]), float(es.eigenvalues[1]), es


def four_level_system(mp: MoleculeParams) -> LevelSystem:
    """Levels E-(0), E-(pi), E+(0), E+(pi) at energies 0, dE, E1, E1+dE."""
    de = mp.delta_e
    energies = (0.0, de, mp.e1, mp.e1 + de)
    return LevelSystem(tuple(zip(FOUR_LEVEL_LABELS, energies)), mp.beta)


@dataclass(frozen=True)
class ClockSimSpec:
    """Half-rotation in f sites of width pi/f; delta_t of unitary evolution per site."""

    f: int
    delta_t: float
    p_dissipate: float
    molecule: MoleculeParams
    initial_elec: DensityOperator

    def __post_init__(self):
        if self.f < 2:
            raise ValueError("f must be at least 2")
        if not self.delta_t > 0.0:
            raise ValueError("delta_t must be positive")
        if not 0.0 <= self.p_dissipate <= 1.0:
            raise ValueError("p_dissipate must lie in [0, 1]")
        if self.initial_elec.dim != 2:
            raise ValueError("electronic state must be two-level")

    def phi(self, j: int) -> float:
        return j * math.pi / self.f


@dataclass(frozen=True)
class ClockTrajectory:
    """Per-site electronic states with dissipation bookkeeping.

    ``post_tick_coherences[j]`` is the off-diagonal one-norm in the site-j
    adiabatic basis immediately after tick j (zero for the initial site).
    """

    sites: tuple[int, ...]
    states: tuple[DensityOperator, ...]
    dissipated: np.ndarray
    post_tick_coherences: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dissipated", _freeze(np.asarray(self.dissipated, dtype=float)))
        object.__setattr__(self, "post_tick_coherences", _freeze(np.asarray(self.post_tick_coherences, dtype=float)))


def clock_tick_channel(
    elec: DensityOperator, j: int, spec: ClockSimSpec
) -> tuple[DensityOperator, float]:
    """Advance the clock one site, dephasing with probability p_dissipate.

    With weight p_dissipate the state is fully dephased in the adiabatic basis
    of the site-j Hamiltonian (orthogonal bath records destroy cross-branch
    coherence); otherwise it is left untouched. The returned energy is what
    the bath gains: each branch's energy change under the Hamiltonian switch,
    weighted by its population and by p_dissipate.
    """
    if not 0 <= j < 2 * spec.f:
        raise IndexOutOfRangeError(f"site {j} outside 0..{2 * spec.f - 1}")
    mp = spec.molecule
    es = eig_hermitian(h_elec(spec.phi(j), mp))
    v = es.eigenvectors
    tilde = v.conj().T @ elec.matrix @ v
    branch_pops = np.diag(tilde).real
    dephased = v @ np.diag(np.diag(tilde)) @ v.conj().T
    p = spec.p_dissipate
    out = (1.0 - p) * elec.matrix + p * dephased
    out = (out + out.conj().T) / 2.0

    h_next = h_elec(spec.phi(j + 1), mp).matrix
    next_branch_energies = np.diag(v.conj().T @ h_next @ v).real
    dissipated = p * float(np.sum(branch_pops * (es.eigenvalues - next_branch_energies)))
    return DensityOperator(out), dissipated


def _unitary(h: HamiltonianOperator, dt: float) -> np.ndarray:
    es = eig_hermitian(h)
    v = es.eigenvectors
    return (v * np.exp(-1j * es.eigenvalues * dt)) @ v.conj().T


def clock_simulate(spec: ClockSimSpec) -> ClockTrajectory:
    """Alternate tick and unitary evolution from site 0 (phi=0) to site f (phi=pi)."""
    mp = spec.molecule
    rho = spec.initial_elec
    states = [rho]
    sites = [0]
    dissipated = [0.0]
    post_tick = [0.0]
    total = 0.0
    for j in range(spec.f):
        ticked, dq = clock_tick_channel(rho, j, spec)
        total += dq
        basis = eig_hermitian(h_elec(spec.phi(j), mp)).eigenvectors
        tilde = basis.conj().T @ ticked.matrix @ basis
        post_tick.append(float(np.sum(np.abs(tilde - np.diag(np.diag(tilde))))))
        u = _unitary(h_elec(spec.phi(j + 1), mp), spec.delta_t)
        evolved = u @ ticked.matrix @ u.conj().T
        rho = DensityOperator((evolved + evolved.conj().T) / 2.0)
        states.append(rho)
        sites.append(j + 1)
        dissipated.append(total)
    return ClockTrajectory(tuple(sites), tuple(states), np.array(dissipated), np.array(post_tick))


def matched_sweep_rate(spec: ClockSimSpec) -> float:
    """Local Landau-Zener speed of the discretized sweep at the diabatic crossing.

    v = |diagonal-gap change per site| / (2 delta_t), evaluated where the
    diabatic gap changes sign.
    """
    mp = spec.molecule

    def diag_gap(phi: float) -> float:
        m = h_elec(phi, mp).matrix
        return float((m[1, 1] - m[0, 0]).real)

    gaps = np.array([diag_gap(spec.phi(j)) for j in range(spec.f + 1)])
    sign_change = np.where(np.diff(np.sign(gaps)) != 0)[0]
    j = int(sign_change[0]) if sign_change.size else int(np.argmin(np.abs(gaps)))
    return abs(gaps[j + 1] - gaps[j]) / (2.0 * spec.delta_t) if j + 1 <= spec.f else abs(
        gaps[j] - gaps[j - 1]
    ) / (2.0 * spec.delta_t)
