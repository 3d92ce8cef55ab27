"""Thermodynamic-resource-theory bounds and kinetics for photoswitching molecules.

Numerics for Gibbs-rescaled Lorenz curves and thermomajorization yield
bounds, four-level Lindblad kinetics, dissipative Landau-Zener sweeps,
coherence monotones (quantum Fisher information, mode one-norms), and
one-shot work of formation. Internally beta = hbar = 1; inputs are the
dimensionless combinations beta*E, beta*hbar*Gamma, v*hbar/lam^2.
"""

__version__ = "0.1.0"

from .quantum_core import (
    DensityOperator,
    EigenSystem,
    HamiltonianOperator,
    decohere,
    eig_hermitian,
    gibbs_state,
)
from .thermomaj import (
    LevelSystem,
    LorenzCurve,
    PopulationVector,
    YieldBoundResult,
    beta_swap_channel,
    equilibrium_yield,
    lorenz_curve,
    max_yield_bound,
    thermomajorizes,
)
from .open_system import (
    JumpOperator,
    LindbladSpec,
    LinearRampHamiltonian,
    LzParams,
    LzRunResult,
    Trajectory,
    detailed_balance_jumps,
    detailed_balance_spec,
    early_time_yield,
    evolve,
    evolve_spectral,
    lindblad_rhs,
    lz_closed_probability,
    lz_dissipative_run,
    lz_hamiltonian,
    superoperator,
)
from .monotones import (
    ModeDecomposition,
    WorkResult,
    d_max,
    fisher_bound,
    fisher_bound_scaled,
    fisher_information,
    fisher_lz_formula,
    mode_decompose,
    mode_one_norm,
    w_min,
)
from .photoisomer import (
    FOUR_LEVEL_LABELS,
    ClockSimSpec,
    ClockTrajectory,
    MoleculeParams,
    adiabatic_levels,
    clock_simulate,
    clock_tick_channel,
    four_level_system,
    h_elec,
    matched_sweep_rate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
