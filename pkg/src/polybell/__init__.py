"""Permutationally invariant multiqubit Bell expressions.

Construction and exact local-realistic bounds of two-setting PI Bell
inequalities, quantum values on symmetric (Dicke-basis) states, CHSH monogamy
checks, and LP-based discovery of monogamy-violating inequalities.
"""

from .bellexpr import (
    PIBellExpression,
    StrategyClass,
    brute_force_bound,
    chsh_expression,
    classical_value,
    enumerate_strategy_classes,
    five_party_expression,
    four_party_expression,
    local_bound,
    monomial_count,
    two_body_expression,
)
from .discovery import (
    DiscoveryProblem,
    DiscoveryResult,
    build_problem,
    optimize_scenario,
    quantum_point,
    solve_discovery,
    strategy_matrix,
)
from .errors import CapacityError
from .lpsolver import LinearProgram, LPSolution, check_feasible, solve
from .qoperators import (
    BlochObservable,
    XZObservable,
    bell_operator,
    bloch_observable,
    eigen_max,
    xz_observable,
)
from .quantumeval import (
    AnglePair,
    ChshSettings,
    chsh_pair_values,
    expectation,
    max_quantum_value,
    mermin_expectation,
    mermin_operator,
    mermin_optimal_state,
    monogamy_sample_check,
    visibility,
)
from .symstate import (
    DenseState,
    ReducedSymmetricState,
    SymmetricState,
    dicke_split,
    make_dicke,
    reduce_dense,
    reduce_symmetric,
    superpose,
    to_dense,
)

__version__ = "0.1.0"
