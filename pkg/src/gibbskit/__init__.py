"""gibbskit: partition functions and free energies of k-local qubit Hamiltonians.

Estimators: exact diagonalization (n <= 12), Hutchinson / Hutch++ /
Clifford-compressed Hutch++ stochastic traces over a truncated-Taylor PSD
surrogate of e^{-beta H}, a convex free-energy relaxation with pseudo-entropy
and rounding for dense 2-local instances, and executable reductions among
quantum counting problems.
"""

__version__ = "0.1.0"

from .errors import NumericalError, ValidationError
from .hamiltonian import (
    PauliString,
    PauliSumHamiltonian,
    TwoLocalView,
    complete_graph_zz,
    random_local_hamiltonian,
    tile_copies,
    two_local_view,
)
from .exact import (
    Spectrum,
    count_eigenvalues,
    dense_matrix,
    exact_free_energy,
    exact_gibbs_mean,
    exact_partition,
)
from .clifford import (
    CliffordTableau,
    CompressedOracle,
    apply_clifford,
    apply_clifford_block,
    compression_width,
    sample_clifford,
)
from .trace_est import (
    DenseOperator,
    EstimatorConfig,
    TraceEstimate,
    compressed_hutchpp,
    hutchinson,
    hutchpp,
    median_boost,
    probes_for,
)
from .pipeline import (
    TaylorOperator,
    TaylorPlan,
    estimate_free_energy,
    estimate_partition,
    taylor_matvec,
    taylor_order,
)
from .pseudodensity import (
    PauliIndex,
    PseudoDensityMatrix,
    measurement_channel,
    partial_trace,
    pseudo_entropy,
    pseudodistribution_1norm_check,
    random_density_matrix,
    von_neumann_entropy,
)
from .relaxation import (
    DenseFreeEnergyResult,
    energy_gap_report,
    minimize_relaxation,
    relaxed_objective,
    round_state,
    solve_dense_free_energy,
)
from .reductions import (
    QdosOracle,
    QmvOracle,
    QpfOracle,
    amplify_precision,
    normalize_to_unit_interval,
    qmv_from_qpf,
    qpf_from_qdos,
    qpf_from_qmv,
)

__all__ = [name for name in dir() if not name.startswith("_")]
