"""Joint selection of billboard slots and social seed nodes under a shared budget."""

from .billboard import SlotUserMatrix, build_matrix, influence, marginal_influence
from .combined import Exact, Item, MonteCarlo, Objective, ObjectiveValue, interaction_effect, marginal_phi, phi
from .data import (
    Billboard,
    BillboardSlot,
    ConfigError,
    DataError,
    ProblemInstance,
    SlotSet,
    SocialGraph,
    TrajectoryDB,
    TrajectoryRecord,
    generate_synthetic,
    instance_digest,
    load_instance,
    save_instance,
)
from .diagnostics import (
    OracleSolution,
    PhiTable,
    StructureReport,
    ViolationSearch,
    Witness,
    approximation_bound,
    brute_force_optimum,
    find_bisubmodularity_violation,
    measure_alpha,
    measure_gamma,
    phi_table,
    structure_report,
    verify_bound,
)
from .diffusion import (
    Explicit,
    ExactSpread,
    MonteCarloSpread,
    Trivalency,
    Uniform,
    WeightedCascade,
    activation_probability,
    estimate_spread,
    exact_spread,
)
from .harness import ExperimentConfig, ResultRow, SyntheticSpec, emit_plot_data, load_config, run_experiment
from .kernels import BACKEND
from .optimizers import (
    ALGORITHMS,
    GreedyTrace,
    Solution,
    baseline_hdh,
    baseline_pagerank,
    baseline_random,
    baseline_top_k,
    eager_greedy,
    randomized_greedy,
    run_algorithm,
    tpg,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
