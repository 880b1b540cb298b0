"""Quantum orthogonal arrays and k-uniform states: construction and brute-force certification."""

from .ffield import Field, FieldElement, field_new, field_of_order
from .oarray import (
    OrthogonalArray,
    full_factorial,
    irredundancy_check,
    oa_to_qoa,
    strength_check,
    vandermonde_oa,
    zero_sum_oa,
)
from .qoa import (
    NotCoveredError,
    QudParams,
    QuantumOA,
    assemble_state,
    build_qubit_3_3m,
    build_qubit_4_3m,
    build_qubit_11_3m,
    build_qud35,
    build_qud_2_n_3m,
    build_qud_4_3m,
    build_strength2_qubit,
    build_strength2_qud,
    dispatch,
    select_params,
)
from .qstate import (
    SparseState,
    bell_state,
    cross_reduced,
    ghz_state,
    phi2_state,
    phi3_state,
    psi_state,
    reduced_density,
)
from .verify import UniformityReport, appendix_suite, is_k_uniform, m2_counterexample, qoa_check

__version__ = "0.1.0"
