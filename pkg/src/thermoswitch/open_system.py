"""Lindblad master-equation integration and dissipative Landau-Zener sweeps.

The integrator is fixed-step classical RK4 on the vectorized density
matrix. Because the master equation is linear, one RK4 step is a fixed
linear map on vec(rho); the implementation builds that step matrix and
composes it across each sampling interval (by binary powering for
time-independent generators, by batched pairwise products for linearly
ramped ones). The composed map is arithmetically the RK4 map, evaluated
in a deterministic order, so results are bit-stable.

States are re-Hermitized and trace-renormalized only at sample points,
with the applied correction magnitudes recorded; a large trace correction
means the step size was too coarse and raises ``StepTooLargeError``.

For time-independent generators with detailed-balance jump structure an
exact spectral propagator is also provided: the kinetic trap times of a
deep double well (~ exp(beta barrier)) are far beyond what any fixed-step
scheme can resolve in double precision, while the population sector is
exactly solvable after a similarity symmetrization.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .quantum_core import (
    DensityOperator,
    DimensionMismatchError,
    HamiltonianOperator,
    _freeze,
    as_complex_matrix,
)
from .thermomaj import LevelSystem, UnknownLabelError

TRACE_CORRECTION_LIMIT = 1e-4
DEFAULT_DT = 1e-3
# Cap on (largest instantaneous frequency) * dt for ramped Hamiltonians. RK4's
# |R(i theta)| < 1, so underresolved far-detuned coherences are silently damped
# rather than blowing up; 0.02 keeps that damping below 1e-6 over a full sweep.
RAMP_PHASE_CAP = 0.02
_CHUNK = 4096


class StepTooLargeError(RuntimeError):
    """Sampled trace correction exceeded the limit; reduce dt."""


class NegativeRateError(ValueError):
    """Jump rates must be nonnegative."""


@dataclass(frozen=True)
class JumpOperator:
    """Jump matrix with its rate (units 1/(beta*hbar) in the kinetic runs)."""

    matrix: np.ndarray
    rate: float

    def __post_init__(self):
        if self.rate < 0.0:
            raise NegativeRateError(f"rate {self.rate} is negative")
        object.__setattr__(self, "matrix", _freeze(as_complex_matrix(self.matrix)))


@dataclass(frozen=True)
class LinearRampHamiltonian:
    """H(t) = h0 + t * h1, both Hermitian; the Landau-Zener drive shape."""

    h0: np.ndarray
    h1: np.ndarray

    def __post_init__(self):
        h0 = HamiltonianOperator(self.h0).matrix
        h1 = HamiltonianOperator(self.h1).matrix
        if h0.shape != h1.shape:
            raise DimensionMismatchError("h0 and h1 differ in shape")
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "h1", h1)

    def __call__(self, t: float) -> HamiltonianOperator:
        return HamiltonianOperator(self.h0 + t * self.h1)


HamiltonianLike = Union[HamiltonianOperator, LinearRampHamiltonian, Callable[[float], HamiltonianOperator]]


@dataclass(frozen=True)
class LindbladSpec:
    """Hamiltonian (fixed or time-parameterized) plus jump operators."""

    hamiltonian: HamiltonianLike
    jumps: tuple[JumpOperator, ...] = ()
    hbar: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "jumps", tuple(self.jumps))
        if not self.hbar > 0.0:
            raise ValueError("hbar must be positive")
        d = self.dim
        for j in self.jumps:
            if j.matrix.shape[0] != d:
                raise DimensionMismatchError("jump operator dimension differs from Hamiltonian")

    @property
    def dim(self) -> int:
        if isinstance(self.hamiltonian, HamiltonianOperator):
            return self.hamiltonian.dim
        if isinstance(self.hamiltonian, LinearRampHamiltonian):
            return self.hamiltonian.h0.shape[0]
        return self.hamiltonian(0.0).dim

    @property
    def time_dependent(self) -> bool:
        return not isinstance(self.hamiltonian, HamiltonianOperator)

    def hamiltonian_matrix(self, t: float = 0.0) -> np.ndarray:
        h = self.hamiltonian
        if isinstance(h, HamiltonianOperator):
            return h.matrix
        if isinstance(h, LinearRampHamiltonian):
            return h.h0 + t * h.h1
        return h(t).matrix


@dataclass(frozen=True)
class Trajectory:
    """Sampled times, states, their storage-basis populations, and corrections."""

    times: np.ndarray
    states: tuple[DensityOperator, ...]
    populations: np.ndarray
    trace_corrections: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "times", _freeze(np.asarray(self.times, dtype=float)))
        object.__setattr__(self, "populations", _freeze(np.asarray(self.populations, dtype=float)))
        object.__setattr__(self, "trace_corrections", _freeze(np.asarray(self.trace_corrections, dtype=float)))

    def final_state(self) -> DensityOperator:
        return self.states[-1]


def _hamiltonian_superop(h: np.ndarray, hbar: float) -> np.ndarray:
    n = h.shape[0]
    eye = np.eye(n)
    return (-1j / hbar) * (np.kron(h, eye) - np.kron(eye, h.T))


def _dissipator_superop(jumps: tuple[JumpOperator, ...], dim: int) -> np.ndarray:
    n2 = dim * dim
    out = np.zeros((n2, n2), dtype=np.complex128)
    eye = np.eye(dim)
    for j in jumps:
        b = j.matrix
        bdb = b.conj().T @ b
        out += j.rate * (np.kron(b, b.conj()) - 0.5 * (np.kron(bdb, eye) + np.kron(eye, bdb.T)))
    return out


def superoperator(spec: LindbladSpec, t: float = 0.0) -> np.ndarray:
    """Full generator L(t) acting on row-major vec(rho)."""
    return _hamiltonian_superop(spec.hamiltonian_matrix(t), spec.hbar) + _dissipator_superop(spec.jumps, spec.dim)


def lindblad_rhs(rho: DensityOperator, spec: LindbladSpec, t: float = 0.0) -> np.ndarray:
    """d(rho)/dt: commutator term plus jump dissipator; traceless Hermitian."""
    if rho.dim != spec.dim:
        raise DimensionMismatchError("state dimension differs from the Lindblad spec")
    h = spec.hamiltonian_matrix(t)
    r = rho.matrix
    out = (-1j / spec.hbar) * (h @ r - r @ h)
    for j in spec.jumps:
        b = j.matrix
        bdb = b.conj().T @ b
        out += j.rate * (b @ r @ b.conj().T - 0.5 * (bdb @ r + r @ bdb))
    return out


def _rk4_step_matrix(l_const: np.ndarray, dt: float) -> np.ndarray:
    """RK4 over one step of the autonomous system y' = L y (degree-4 Taylor)."""
    n = l_const.shape[0]
    m = np.eye(n, dtype=np.complex128)
    for k in (4, 3, 2, 1):
        m = np.eye(n) + (dt / k) * (l_const @ m)
    return m


def _rk4_step_matrices_ramped(l0: np.ndarray, l1: np.ndarray, ts: np.ndarray, dt: float) -> np.ndarray:
    """Batched RK4 step matrices for L(t) = l0 + t*l1 starting at each t in ts."""
    n = l0.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    la = l0 + ts[:, None, None] * l1
    lm = la + (0.5 * dt) * l1
    le = la + dt * l1
    k1 = la
    k2 = lm @ (eye + (0.5 * dt) * k1)
    k3 = lm @ (eye + (0.5 * dt) * k2)
    k4 = le @ (eye + dt * k3)
    return eye + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _compose_chain(mats: np.ndarray) -> np.ndarray:
    """Ordered product mats[-1] @ ... @ mats[0] by pairwise reduction."""
    while mats.shape[0] > 1:
        n = mats.shape[0]
        half = n // 2
        paired = mats[1 : 2 * half : 2] @ mats[0 : 2 * half : 2]
        if n % 2:
            paired = np.concatenate([paired, mats[-1:]], axis=0)
        mats = paired
    return mats[0]


def _sample_and_correct(y: np.ndarray, dim: int) -> tuple[np.ndarray, DensityOperator, float]:
    rho = y.reshape(dim, dim)
    herm = (rho + rho.conj().T) / 2.0
    herm_corr = float(np.max(np.abs(rho - herm)))
    tr = float(np.trace(herm).real)
    trace_corr = abs(tr - 1.0)
    if trace_corr > TRACE_CORRECTION_LIMIT:
        raise StepTooLargeError(f"trace correction {trace_corr:.3e} exceeds {TRACE_CORRECTION_LIMIT}; reduce dt")
    herm = herm / tr
    state = DensityOperator(herm)
    return herm.reshape(-1).copy(), state, max(herm_corr, trace_corr)


def evolve(
    rho0: DensityOperator,
    spec: LindbladSpec,
    t0: float,
    t1: float,
    dt: float = DEFAULT_DT,
    sample_every: int = 1,
) -> Trajectory:
    """Fixed-step RK4 of the vectorized master equation from t0 to t1.

    Samples (including the initial state) are stored every ``sample_every``
    steps plus the final step; each sampled state is re-Hermitized and
    trace-renormalized with the correction magnitude recorded.
    """
    if rho0.dim != spec.dim:
        raise DimensionMismatchError("initial state dimension differs from the Lindblad spec")
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    sample_every = int(sample_every)
    if sample_every < 1:
        raise ValueError("sample_every must be a positive integer")

    n_steps = max(1, int(round((t1 - t0) / dt)))
    chunks = [sample_every] * (n_steps // sample_every)
    if n_steps % sample_every:
        chunks.append(n_steps % sample_every)

    dim = spec.dim
    y = rho0.matrix.astype(np.complex128).reshape(-1).copy()
    times = [t0]
    states = [rho0]
    pops = [rho0.populations()]
    corrections = [0.0]

    h = spec.hamiltonian
    if isinstance(h, HamiltonianOperator):
        l_const = superoperator(spec)
        m_step = _rk4_step_matrix(l_const, dt)
        power_cache: dict[int, np.ndarray] = {}
        step_count = 0
        for c in chunks:
            if c not in power_cache:
                power_cache[c] = np.linalg.matrix_power(m_step, c)
            y = power_cache[c] @ y
            step_count += c
            y, state, corr = _sample_and_correct(y, dim)
            times.append(t0 + step_count * dt)
            states.append(state)
            pops.append(state.populations())
            corrections.append(corr)
    elif isinstance(h, LinearRampHamiltonian):
        l0 = _hamiltonian_superop(h.h0, spec.hbar) + _dissipator_superop(spec.jumps, dim)
        l1 = _hamiltonian_superop(h.h1, spec.hbar)
        step_count = 0
        for c in chunks:
            prop = np.eye(dim * dim, dtype=np.complex128)
            done = 0
            while done < c:
                take = min(_CHUNK, c - done)
                ts = t0 + (step_count + done + np.arange(take)) * dt
                mats = _rk4_step_matrices_ramped(l0, l1, ts, dt)
                prop = _compose_chain(mats) @ prop
                done += take
            y = prop @ y
            step_count += c
            y, state, corr = _sample_and_correct(y, dim)
            times.append(t0 + step_count * dt)
            states.append(state)
            pops.append(state.populations())
            corrections.append(corr)
    else:
        l_diss = _dissipator_superop(spec.jumps, dim)

        def l_at(t: float) -> np.ndarray:
            return _hamiltonian_superop(spec.hamiltonian_matrix(t), spec.hbar) + l_diss

        step_count = 0
        for c in chunks:
            for k in range(c):
                t = t0 + (step_count + k) * dt
                k1 = l_at(t) @ y
                lm = l_at(t + 0.5 * dt)
                k2 = lm @ (y + 0.5 * dt * k1)
                k3 = lm @ (y + 0.5 * dt * k2)
                k4 = l_at(t + dt) @ (y + dt * k3)
                y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            step_count += c
            y, state, corr = _sample_and_correct(y, dim)
            times.append(t0 + step_count * dt)
            states.append(state)
            pops.append(state.populations())
            corrections.append(corr)

    return Trajectory(np.array(times), tuple(states), np.array(pops), np.array(corrections))


def detailed_balance_jumps(
    sys: LevelSystem, base_rates: list[tuple[str, str, float]]
) -> list[JumpOperator]:
    """Jump-operator pairs |to><from| at Gamma and the detailed-balance reverse.

    Each listed transition (from, to, Gamma) contributes the forward operator
    and the reverse |from><to| at Gamma * exp(-beta (E_from - E_to)), so the
    rate ratio obeys local detailed balance and the Gibbs state is stationary.
    Unlisted pairs contribute nothing.
    """
    ops: list[JumpOperator] = []
    d = sys.dim
    for frm, to, gamma in base_rates:
        if gamma < 0.0:
            raise NegativeRateError(f"rate for {frm}->{to} is negative")
        i = sys.label_index(frm)
        k = sys.label_index(to)
        if gamma == 0.0:
            continue
        fwd = np.zeros((d, d), dtype=np.complex128)
        fwd[k, i] = 1.0
        rev = np.zeros((d, d), dtype=np.complex128)
        rev[i, k] = 1.0
        ratio = math.exp(-sys.beta * (sys.energies[i] - sys.energies[k]))
        ops.append(JumpOperator(fwd, gamma))
        ops.append(JumpOperator(rev, gamma * ratio))
    return ops


def detailed_balance_spec(
    sys: LevelSystem, base_rates: list[tuple[str, str, float]], hbar: float = 1.0
) -> LindbladSpec:
    """LindbladSpec with the diagonal level Hamiltonian and DB jump pairs."""
    h = HamiltonianOperator.diagonal(sys.energies)
    return LindbladSpec(h, tuple(detailed_balance_jumps(sys, base_rates)), hbar)


def early_time_yield(
    t: float,
    sys: LevelSystem,
    base_rates: list[tuple[str, str, float]],
    excited_label: str = "E+(0)",
    target_label: str = "E-(pi)",
) -> float:
    """Closed-form early-time target population for the dominant-channel regime.

    Valid while the excited level drains mainly into the target: the target
    fills as [1 + exp(beta (E_t - E_e))]^{-1} (1 - exp(-k t)) with k the sum of
    the forward rate and its detailed-balance reverse. Warns when a competing
    drain channel is within a factor 10 of the dominant one.
    """
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    ie = sys.label_index(excited_label)
    it = sys.label_index(target_label)
    gamma_main = 0.0
    gamma_other = 0.0
    for frm, to, gamma in base_rates:
        if frm == excited_label and to == target_label:
            gamma_main += gamma
        elif frm == excited_label:
            gamma_other = max(gamma_other, gamma)
    if gamma_main <= 0.0:
        raise UnknownLabelError(f"no rate listed for {excited_label}->{target_label}")
    if gamma_other > 0.0 and gamma_main / gamma_other < 10.0:
        warnings.warn("dominant-channel regime is marginal: competing rate within 10x", stacklevel=2)
    k = gamma_main * (1.0 + math.exp(-sys.beta * (sys.energies[ie] - sys.energies[it])))
    saturation = 1.0 / (1.0 + math.exp(sys.beta * (sys.energies[it] - sys.energies[ie])))
    return saturation * (1.0 - math.exp(-t * k))


@dataclass(frozen=True)
class LzParams:
    """Landau-Zener sweep: speed v, gap lam, hbar, half-span t_final, dephasing gamma."""

    v: float
    lam: float
    t_final: float
    hbar: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.v <= 0.0 or self.lam <= 0.0 or self.hbar <= 0.0 or self.t_final <= 0.0:
            raise ValueError("v, lam, hbar, t_final must be positive")
        if self.gamma < 0.0:
            raise NegativeRateError("gamma must be nonnegative")
        if self.t_final < 10.0 * self.lam / self.v:
            warnings.warn("t_final is not large compared to the crossing time lam/v", stacklevel=2)


def lz_hamiltonian(p: LzParams, t: float) -> HamiltonianOperator:
    """[[v t, lam/2], [lam/2, -v t]] in the diabatic basis (psi0, psi1)."""
    return HamiltonianOperator(
        np.array([[p.v * t, p.lam / 2.0], [p.lam / 2.0, -p.v * t]], dtype=np.complex128)
    )


def lz_closed_probability(p: LzParams) -> float:
    """Canonical diabatic survival probability exp(-pi lam^2 / (2 hbar v))."""
    return math.exp(-math.pi * p.lam**2 / (2.0 * p.hbar * p.v))


def lz_spec(p: LzParams) -> LindbladSpec:
    """Linear-ramp Hamiltonian with the population-difference dephasing jump."""
    h0 = np.array([[0.0, p.lam / 2.0], [p.lam / 2.0, 0.0]], dtype=np.complex128)
    h1 = np.array([[p.v, 0.0], [0.0, -p.v]], dtype=np.complex128)
    jumps: tuple[JumpOperator, ...] = ()
    if p.gamma > 0.0:
        b = np.diag([-1.0, 1.0]).astype(np.complex128)  # |psi1><psi1| - |psi0><psi0|
        jumps = (JumpOperator(b, p.gamma),)
    return LindbladSpec(LinearRampHamiltonian(h0, h1), jumps, p.hbar)


def lz_default_dt(p: LzParams) -> float:
    """Step resolving both the gap and the largest sweep detuning.

    A flat dt would let RK4's contraction damp the far-detuned coherence long
    before t_final at fast sweeps, corrupting coherence observables; capping
    the per-step phase keep that damping below 1e-6.
    """
    dt = DEFAULT_DT * p.hbar / p.lam
    dt = min(dt, RAMP_PHASE_CAP * p.hbar / (2.0 * p.v * p.t_final))
    if p.gamma > 0.0:
        dt = min(dt, 0.05 / p.gamma)
    return dt


@dataclass(frozen=True)
class LzRunResult:
    """Final state of a sweep with its lower-level yield and Fisher information."""

    final_state: DensityOperator
    yield_: float
    fisher: float
    trajectory: Trajectory = field(repr=False, default=None)


def lz_dissipative_run(p: LzParams, dt: float | None = None, sample_every: int | None = None) -> LzRunResult:
    """Sweep |psi1><psi1| from -t_final to +t_final under the ramped Hamiltonian.

    The yield is the population of the instantaneous ground level at t_final
    (the lower trans level, which the surviving diabatic state becomes); the
    Fisher information is evaluated against H(t_final).
    """
    from . import monotones  # deferred: monotones imports LzParams from here

    if dt is None:
        dt = lz_default_dt(p)
    n_steps = max(1, int(round(2.0 * p.t_final / dt)))
    if sample_every is None:
        sample_every = max(1, n_steps // 400)
    rho0 = DensityOperator(np.diag([0.0, 1.0]).astype(np.complex128))
    traj = evolve(rho0, lz_spec(p), -p.t_final, p.t_final, dt, sample_every)
    final = traj.final_state()
    h_final = lz_hamiltonian(p, p.t_final)
    from .quantum_core import eig_hermitian

    ground = eig_hermitian(h_final).eigenvectors[:, 0]
    yield_ = float((ground.conj() @ final.matrix @ ground).real)
    fisher = monotones.fisher_information(final, h_final)
    return LzRunResult(final, yield_, fisher, traj)


def _basis_jump_rate_matrix(spec: LindbladSpec) -> np.ndarray | None:
    """Classical rate matrix W[a, b] = flux b->a, if all jumps are |a><b| scaled."""
    d = spec.dim
    h = spec.hamiltonian_matrix(0.0)
    if np.max(np.abs(h - np.diag(np.diag(h)))) > 1e-12 * max(1.0, float(np.max(np.abs(h)))):
        return None
    w = np.zeros((d, d))
    for j in spec.jumps:
        nz = np.argwhere(np.abs(j.matrix) > 0.0)
        if nz.shape[0] != 1:
            return None
        a, b = int(nz[0, 0]), int(nz[0, 1])
        if a == b:
            return None
        w[a, b] += j.rate * abs(j.matrix[a, b]) ** 2
    return w


def evolve_spectral(
    rho0: DensityOperator,
    spec: LindbladSpec,
    times,
    level_system: LevelSystem | None = None,
) -> Trajectory:
    """Exact modal solution of a time-independent master equation.

    When ``level_system`` is supplied and the spec is a detailed-balance
    basis-jump generator, the population sector is solved by symmetrizing the
    rate matrix with sqrt-Gibbs factors and deflating the exact stationary
    direction, which resolves relaxation rates far below the reach of stepwise
    integration; coherences decay in closed form. Otherwise a general (dense)
    eigendecomposition of the superoperator is used, with spuriously positive
    real parts clamped to zero.
    """
    if spec.time_dependent:
        raise ValueError("spectral propagation needs a time-independent Hamiltonian")
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0.0) or times[0] < 0.0:
        raise ValueError("times must be nonnegative and ascending")
    d = spec.dim
    rho_init = rho0.matrix

    w = _basis_jump_rate_matrix(spec) if level_system is not None else None
    if w is not None and level_system.dim == d:
        pi = level_system.gibbs_populations().probs
        flux = w * pi[None, :]  # detailed balance: flux[a,b] == flux[b,a]
        detailed = bool(np.all(np.abs(flux - flux.T) <= 1e-9 * np.maximum(flux, flux.T) + 1e-300))
        if detailed:
            return _db_spectral(rho_init, spec, w, pi, times)

    l_full = superoperator(spec)
    vals, vecs = np.linalg.eig(l_full)
    vals = np.where(vals.real > 0.0, 1j * vals.imag, vals)
    coeff = np.linalg.solve(vecs, rho_init.reshape(-1))
    states = []
    pops = []
    for t in times:
        y = vecs @ (coeff * np.exp(vals * t))
        rho = y.reshape(d, d)
        rho = (rho + rho.conj().T) / 2.0
        rho = rho / np.trace(rho).real
        st = DensityOperator(rho)
        states.append(st)
        pops.append(st.populations())
    return Trajectory(times, tuple(states), np.array(pops), np.zeros_like(times))


def _db_spectral(rho_init: np.ndarray, spec: LindbladSpec, w: np.ndarray, pi: np.ndarray, times: np.ndarray) -> Trajectory:
    d = w.shape[0]
    out_rate = w.sum(axis=0)
    energies = np.diag(spec.hamiltonian_matrix(0.0)).real

    sqrt_pi = np.sqrt(pi)
    w_gen = w - np.diag(out_rate)
    w_sym = w_gen * (sqrt_pi[None, :] / sqrt_pi[:, None])
    w_sym = (w_sym + w_sym.T) / 2.0
    u0 = sqrt_pi / np.linalg.norm(sqrt_pi)
    proj = np.eye(d) - np.outer(u0, u0)
    deflated = proj @ w_sym @ proj
    lam, vec = np.linalg.eigh(deflated)
    # Drop the deflated stationary direction itself; clamp float-positive rates.
    keep = np.abs(vec.T @ u0) < 0.5
    lam = np.minimum(lam[keep], 0.0)
    modes = vec[:, keep]

    p0 = np.diag(rho_init).real
    dev = p0 / sqrt_pi
    dev = dev - (dev @ u0) * u0  # exact-Gibbs deflation of the initial condition
    amps = modes.T @ dev

    coh_decay = -0.5 * (out_rate[:, None] + out_rate[None, :]) - (1j / spec.hbar) * (
        energies[:, None] - energies[None, :]
    )
    coh0 = rho_init - np.diag(np.diag(rho_init))

    states = []
    pops = []
    for t in times:
        p_t = pi + sqrt_pi * (modes @ (amps * np.exp(lam * t)))
        rho = np.diag(p_t).astype(np.complex128) + coh0 * np.exp(coh_decay * t)
        rho = (rho + rho.conj().T) / 2.0
        rho = rho / np.trace(rho).real
        st = DensityOperator(rho)
        states.append(st)
        pops.append(st.populations())
    return Trajectory(times, tuple(states), np.array(pops), np.zeros_like(times))
