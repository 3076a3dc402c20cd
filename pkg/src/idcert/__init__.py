"""Certification of multiqubit stabilizer states from identity products."""

from ._backend import BACKEND
from .certify import (
    bell_parameter,
    compare_id_gosg,
    fidelity_bound_gosg,
    fidelity_bound_id,
    fidelity_sg,
    lhvt_bound,
    lhvt_max_bruteforce,
    min_nonlocal_fidelity,
    noise_tolerance,
    witness_fidelity_relation,
    witness_gamma_analytic,
    witness_value,
)
from .gamma import class_from_label, default_catalog, gamma_numeric, gamma_table
from .ids import IdTable, check_id, find_ids_in_group, min_settings
from .measurement import (
    ExactDataset,
    ExperimentDataset,
    expectation_from_counts,
    linear_inversion_tomography,
    load_dataset,
    plan_settings,
    poisson_mc,
    simulate_experiment,
)
from .pauli import PauliOperator, parse_pauli
from .report import certification_report
from .stabilizer import group_from_generators, state_stabilizer
from .states import QuantumState, make_named_state

__version__ = "0.1.0"
