"""Dense complex Hermitian linear algebra and quantum-state primitives.

Everything downstream (Lorenz curves, Lindblad integration, monotones)
builds on the small set of operations here: a cyclic Jacobi eigensolver
for Hermitian matrices, Gibbs-state construction, and energy-basis
dephasing. All operations are pure functions on immutable inputs.

Dimensions in this package are small (<= ~16), so the Jacobi solver is
used everywhere an eigenbasis is needed; its sweep order is fixed, which
keeps outputs bit-stable across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Validation tolerances. Exposed read-only so tests and callers agree on
# what "Hermitian" or "unit trace" means numerically.
TOL_HERMITIAN = 1e-10
TOL_TRACE = 1e-9
TOL_EIGMIN = -1e-9
TOL_ORTHONORMAL = 1e-10
TOL_RECONSTRUCTION = 1e-9
DEGENERATE_GAP = 1e-12
DEGENERACY_GROUP_TOL = 1e-9

_MAX_JACOBI_SWEEPS = 60


class NotHermitianError(ValueError):
    """Matrix deviates from its conjugate transpose beyond tolerance."""


class NoConvergenceError(RuntimeError):
    """Jacobi sweeps exceeded the iteration limit."""


class DimensionMismatchError(ValueError):
    """Operands act on spaces of different dimension."""


class DegenerateSpectrumError(ValueError):
    """Spectrum has (near-)degenerate levels and no grouping policy was given."""


def as_complex_matrix(matrix) -> np.ndarray:
    """Coerce input to a dense square complex128 array (copy)."""
    m = np.array(matrix, dtype=np.complex128, order="C")
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
    return m


def hermiticity_defect(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix - matrix.conj().T)))


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class HamiltonianOperator:
    """Hermitian operator; energies in units of 1/beta unless stated."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_complex_matrix(self.matrix)
        defect = hermiticity_defect(m)
        scale = max(1.0, float(np.max(np.abs(m))))
        if defect > TOL_HERMITIAN * scale:
            raise NotHermitianError(f"Hermiticity defect {defect:.3e} exceeds tolerance")
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def diagonal(cls, energies) -> "HamiltonianOperator":
        return cls(np.diag(np.asarray(energies, dtype=float)))


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, unit-trace, positive-semidefinite state matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_complex_matrix(self.matrix)
        if hermiticity_defect(m) > TOL_HERMITIAN:
            raise NotHermitianError("density matrix is not Hermitian within tolerance")
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > TOL_TRACE:
            raise ValueError(f"trace {tr!r} deviates from 1 beyond tolerance")
        vals, _ = _jacobi_eigh((m + m.conj().T) / 2.0)
        if vals[0] < TOL_EIGMIN:
            raise ValueError(f"minimum eigenvalue {vals[0]:.3e} below tolerance")
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def populations(self) -> np.ndarray:
        """Diagonal of the state in the storage basis (real, clipped at 0)."""
        return np.clip(np.diag(self.matrix).real, 0.0, None)

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    @classmethod
    def pure(cls, amplitudes) -> "DensityOperator":
        v = np.asarray(amplitudes, dtype=np.complex128)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def from_populations(cls, probs) -> "DensityOperator":
        return cls(np.diag(np.asarray(probs, dtype=float)).astype(np.complex128))


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", _freeze(np.asarray(self.eigenvalues, dtype=float)))
        object.__setattr__(self, "eigenvectors", _freeze(np.asarray(self.eigenvectors, dtype=np.complex128)))

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _jacobi_eigh(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of a Hermitian matrix.

    Sweeps the strict upper triangle in a fixed (row-major) order until the
    off-diagonal Frobenius norm is negligible relative to the matrix scale.
    Returns ascending eigenvalues and the corresponding unitary columns with
    a deterministic phase convention.
    """
    a = np.array(a, dtype=np.complex128)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    if n == 1:
        return a.real.reshape(1).copy(), v

    scale = float(np.linalg.norm(a))
    if scale == 0.0:
        return np.zeros(n), v
    eps = float(np.finfo(float).eps)
    stop = 4.0 * n * eps * scale

    for _ in range(_MAX_JACOBI_SWEEPS):
        strict = a - np.diag(np.diag(a))
        off = float(np.linalg.norm(strict))
        if off <= stop:
            break
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= 0.1 * eps * (abs(a[p, p].real) + abs(a[q, q].real)) or r == 0.0:
                    # below the roundoff floor of this pair; zeroing is exact enough
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                rotated = True
                phase = apq / r
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # a <- G† a G with G the (p,q) plane rotation carrying the phase
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * phase * row_q
                a[q, :] = s * np.conj(phase) * row_p + c * row_q
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * np.conj(phase) * col_q
                a[:, q] = s * phase * col_p + c * col_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                vcol_p = v[:, p].copy()
                vcol_q = v[:, q].copy()
                v[:, p] = c * vcol_p - s * np.conj(phase) * vcol_q
                v[:, q] = s * phase * vcol_p + c * vcol_q
        if not rotated:
            break
    else:
        raise NoConvergenceError(f"Jacobi did not converge in {_MAX_JACOBI_SWEEPS} sweeps")

    vals = np.diag(a).real.copy()
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    v = v[:, order]
    # Deterministic phases: largest-magnitude component of each column real positive.
    for k in range(n):
        idx = int(np.argmax(np.abs(v[:, k])))
        piv = v[idx, k]
        if abs(piv) > 0.0:
            v[:, k] *= np.conj(piv) / abs(piv)
    return vals, v


def eig_hermitian(h: HamiltonianOperator | np.ndarray) -> EigenSystem:
    """Eigendecompose a Hermitian operator (ascending eigenvalues)."""
    m = h.matrix if isinstance(h, HamiltonianOperator) else as_complex_matrix(h)
    scale = max(1.0, float(np.max(np.abs(m))))
    if hermiticity_defect(m) > TOL_HERMITIAN * scale:
        raise NotHermitianError("input is not Hermitian within tolerance")
    vals, vecs = _jacobi_eigh((m + m.conj().T) / 2.0)
    return EigenSystem(vals, vecs)


def gibbs_state(h: HamiltonianOperator, beta: float) -> DensityOperator:
    """Thermal state exp(-beta H)/Z, computed in the eigenbasis of H."""
    if beta < 0.0:
        raise ValueError("beta must be nonnegative")
    es = eig_hermitian(h)
    w = np.exp(-beta * (es.eigenvalues - es.eigenvalues[0]))
    p = w / w.sum()
    v = es.eigenvectors
    rho = (v * p) @ v.conj().T
    return DensityOperator((rho + rho.conj().T) / 2.0)


def decohere(rho: DensityOperator, h: HamiltonianOperator, degenerate: str = "error") -> DensityOperator:
    """Project a state onto the energy-eigenbasis diagonal of ``h``.

    ``degenerate`` selects the policy for (near-)degenerate spectra:
    ``"error"`` raises, ``"group"`` dephases blockwise, grouping levels whose
    energies agree within ``DEGENERACY_GROUP_TOL``. Populations are preserved
    either way.
    """
    if rho.dim != h.dim:
        raise DimensionMismatchError("state and Hamiltonian dimensions differ")
    if degenerate not in ("error", "group"):
        raise ValueError(f"unknown degeneracy policy {degenerate!r}")
    es = eig_hermitian(h)
    gaps = np.diff(es.eigenvalues)
    if degenerate == "error":
        if np.any(gaps <= DEGENERATE_GAP):
            raise DegenerateSpectrumError("spectrum is degenerate; pass degenerate='group'")
        groups = [[k] for k in range(h.dim)]
    else:
        groups = [[0]]
        for k, g in enumerate(gaps):
            if g <= DEGENERACY_GROUP_TOL:
                groups[-1].append(k + 1)
            else:
                groups.append([k + 1])
    v = es.eigenvectors
    tilde = v.conj().T @ rho.matrix @ v
    out = np.zeros_like(tilde)
    for grp in groups:
        ix = np.ix_(grp, grp)
        out[ix] = tilde[ix]
    back = v @ out @ v.conj().T
    return DensityOperator((back + back.conj().T) / 2.0)
