"""Cooperative online convex optimization on communication graphs.

Simulate networks of online mirror descent agents that share feedback with
their neighbors, measure network regret, and compare it with graph-dependent
regret bounds.
"""

from .agents import AgentState, CliqueCoverPolicy, Oblivious, agent_predict, agent_update, feedback_recipients
from .analysis import (
    ActivationProfile,
    c_coefficient,
    c_coefficient_bruteforce,
    expected_activation_share,
    q_graph_bound,
    q_constant,
    q_uniform_closed_form,
    q_uniform_limit_zero,
    update_probability,
    verify_constants,
)
from .environments import (
    BernoulliLosses,
    ComposedEnvironment,
    FixedLosses,
    IndependentSetLB,
    MultiStochastic,
    Schedule,
    SingleStochastic,
    StarAdversary,
    schedule_from_file,
    write_schedule,
)
from .errors import (
    ExactSolverLimitError,
    NumericError,
    SimulationError,
    UnsupportedConfigurationError,
    ValidationError,
)
from .geometry import Geometry, LossSpec, loss_gradient, loss_value, mirror_map, theory_bound, tuned_eta
from .graph import (
    CliqueCover,
    Graph,
    build_graph,
    closed_neighborhood,
    generate,
    greedy_clique_cover,
    independence_number_exact,
    maximal_independent_set,
    verify_ratio_bound,
)
from .simulator import (
    Experiment,
    comparator_loss,
    monte_carlo,
    network_regret,
    replicate_seed,
    run_simulation,
)

__version__ = "0.1.0"
