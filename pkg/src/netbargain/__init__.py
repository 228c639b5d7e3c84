"""Bargaining dynamics on weighted exchange networks.

Players on a weighted graph trade with at most one neighbor and split an
edge's weight by agreement. The package simulates the damped
message-passing process that natural bargaining induces, certifies its
fixed points as stable and balanced outcomes, decomposes them into slack
structures with an explicit gap, and stress-tests the comparison
processes (bipartite order, simplified path dynamics, bounding and mass
processes) that control the convergence rate.
"""

from .bipartite import Bipartition, NotBipartiteError, check_bipartite, extremal_init, order_leq, run_extremal
from .dynamics import (
    DynamicsConfig,
    EdgeIndex,
    MessageState,
    Trace,
    compute_offer,
    derive,
    extract_pairing,
    run,
    step,
    sup_distance,
)
from .experiment import ExperimentSpec, family_spec, iterations_to_eps, reference_solution, run_experiment
from .instance import GeneratorSpec, Instance, InstanceError, generate, load, loads, max_weight, save
from .slack import SlackDecomposition, Structure, check_fp_identities, compute_gap, decompose
from .matching import (
    DualReport,
    HalfIntegralSolution,
    LPClassification,
    SizeCapError,
    classify,
    dual_check,
    enumerate_corners,
    solid_labels,
)
from .nb import (
    NBSolution,
    FixedPointReport,
    OracleResult,
    certify,
    check_balance,
    check_stability,
    fp_from_nb,
    fp_property_suite,
    nb_from_fp,
    nb_oracle,
    solve_balance,
)
from .pathlab import (
    BoundingConfig,
    PathSpec,
    SimplifiedPathState,
    bounding_process,
    domination_test,
    mass_step,
    run_simplified,
    sandwich_test,
    simplified_fixed_point,
    simplified_step,
)

__version__ = "0.1.0"
