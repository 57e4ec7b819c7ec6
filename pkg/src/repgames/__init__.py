"""Best responses to mixed strategies in infinitely repeated games.

Core surface:

* ``games`` — payoff parameters, one-memory strategies, outcome indexing.
* ``chains`` — outcome-chain payoffs via determinant ratio and stationary
  distribution.
* ``response`` — pure best responses and opponent classification.
* ``mdp`` — k-memory best response as an average-reward MDP.
* ``tournament`` — population tournaments and the mixed-strategy search.
* ``verify`` — randomized counterexample search for the structural claims.
* ``montecarlo`` — simulation oracle for average payoffs.
* ``service`` / ``cli`` — HTTP wrapper and its command-line client.
"""

__version__ = "0.1.0"

from .games import (
    GameSpec,
    MemoryOneStrategy,
    Outcome,
    StageGame,
    perspective_swap,
    prisoners_dilemma,
    validate_game,
    validate_strategy,
)
from .chains import (
    ChainModel,
    PayoffPair,
    StationaryDistribution,
    average_payoffs,
    build_transition_matrix,
    determinant_D,
    payoff_via_stationary,
    stationary_distribution,
)
from .response import (
    MischiefBars,
    ResponseTable,
    best_response_pure,
    classify_q,
    classify_ungrateful,
    mischief_bars,
    payoff_region_scatter,
    pure_payoff_table,
)
from .mdp import (
    KMemoryStrategy,
    MdpModel,
    SolveResult,
    best_response_kmem,
    build_mdp,
    check_communicating,
    policy_gain,
    solve_average_reward,
)
from .tournament import (
    Population,
    SearchConfig,
    TournamentResult,
    best_pure_tournament,
    optimize_mixed_tournament,
    tournament_payoff,
)
from .verify import FalsificationReport, TheoremId, check, monotonicity_check
from .montecarlo import SimResult, simulate

__all__ = [
    "__version__",
    "GameSpec",
    "MemoryOneStrategy",
    "Outcome",
    "StageGame",
    "perspective_swap",
    "prisoners_dilemma",
    "validate_game",
    "validate_strategy",
    "ChainModel",
    "PayoffPair",
    "StationaryDistribution",
    "average_payoffs",
    "build_transition_matrix",
    "determinant_D",
    "payoff_via_stationary",
    "stationary_distribution",
    "MischiefBars",
    "ResponseTable",
    "best_response_pure",
    "classify_q",
    "classify_ungrateful",
    "mischief_bars",
    "payoff_region_scatter",
    "pure_payoff_table",
    "KMemoryStrategy",
    "MdpModel",
    "SolveResult",
    "best_response_kmem",
    "build_mdp",
    "check_communicating",
    "policy_gain",
    "solve_average_reward",
    "Population",
    "SearchConfig",
    "TournamentResult",
    "best_pure_tournament",
    "optimize_mixed_tournament",
    "tournament_payoff",
    "FalsificationReport",
    "TheoremId",
    "check",
    "monotonicity_check",
    "SimResult",
    "simulate",
]
