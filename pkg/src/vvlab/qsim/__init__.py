"""Small-register quantum verifiers: circuits, acceptance operators, Haar experiments."""

from .circuit import Circuit, Gate, basis_state, gate, point_acceptor, rejector, simulate
from .haar import (exact_second_moment, haar_isometry, haar_unitary, mc_second_moment,
                   second_moment_formula)
from .projection import ProjectionExperimentResult, projection_gap_experiment, random_basis_tvd
from .qoperator import (
    QLabel,
    QOperator,
    add_third_eigenvalue,
    basis_witness_table,
    build_q_operator,
    classify_q,
    pgqma_threshold_sweep,
    uqma_state_condition,
    uqma_to_pgqma,
)

__all__ = [
    "Circuit", "Gate", "basis_state", "gate", "point_acceptor", "rejector", "simulate",
    "exact_second_moment", "haar_isometry", "haar_unitary", "mc_second_moment",
    "second_moment_formula",
    "ProjectionExperimentResult", "projection_gap_experiment", "random_basis_tvd",
    "QLabel", "QOperator", "add_third_eigenvalue", "basis_witness_table", "build_q_operator",
    "classify_q", "pgqma_threshold_sweep", "uqma_state_condition", "uqma_to_pgqma",
]
