"""LP-based discovery of permutationally invariant Bell inequalities.

Given a symmetric state, a party count m, and xz-plane angles, the pipeline
builds the symmetrized quantum correlation point and the matrix of strategy-
class correlation rows, then solves for coefficients maximizing the quantum
value subject to every deterministic strategy staying below the local bound
(normalized so the constant coefficient is -1, i.e. inequality <= 0).  A
positive optimum q certifies a violation with quantum/local ratio q + 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .bellexpr import (
    PIBellExpression,
    all_multisets,
    class_poly_table,
    enumerate_strategy_classes,
    local_bound,
    monomial_count,
    normalize_multiset,
)
from .lpsolver import LinearProgram, solve
from .quantumeval import AnglePair, expectation, multiset_correlators
from .symstate import SymmetricState

COEFF_BOX = 1e6
RECHECK_TOL = 1e-8


def _checked_support(m: int, support) -> list[tuple[int, ...]]:
    if support is None:
        return all_multisets(m)
    seen = []
    for s in support:
        s = normalize_multiset(s)
        if len(s) > m:
            raise ValueError(f"multiset {s} longer than party count {m}")
        if s not in seen:
            seen.append(s)
    if () in seen:
        seen.remove(())
    return [()] + sorted(seen, key=lambda s: (len(s), s))


def quantum_point(state: SymmetricState, m: int, angles: AnglePair, support=None) -> np.ndarray:
    """Symmetrized quantum expectations per support multiset; constant component 1."""
    support = _checked_support(m, support)
    corr = multiset_correlators(state, m, angles, support)
    return np.array([monomial_count(m, s) * corr[s] if s else 1.0 for s in support])


def strategy_matrix(m: int, support=None) -> np.ndarray:
    """One row per strategy class: values of each support multiset, exact integers."""
    support = _checked_support(m, support)
    p_max = max((sum(1 for x in s if x == 1) for s in support), default=0)
    q_max = max((len(s) - sum(1 for x in s if x == 1) for s in support), default=0)
    rows = []
    for cls in enumerate_strategy_classes(m):
        table = class_poly_table(cls, p_max, q_max)
        rows.append([table[sum(1 for x in s if x == 1)][len(s) - sum(1 for x in s if x == 1)] for s in support])
    return np.array(rows, dtype=float)


@dataclass
class DiscoveryProblem:
    """Quantum point and local strategy rows over a common multiset support."""

    n_parties: int
    support: list[tuple[int, ...]]
    quantum_point: np.ndarray
    strategy_matrix: np.ndarray
    state: SymmetricState | None = None
    angles: AnglePair | None = None

    def __post_init__(self):
        if not self.support or self.support[0] != ():
            raise ValueError("support must start with the constant (empty) multiset")
        k = len(self.support)
        self.quantum_point = np.asarray(self.quantum_point, dtype=float).ravel()
        self.strategy_matrix = np.asarray(self.strategy_matrix, dtype=float)
        if self.quantum_point.size != k:
            raise ValueError("quantum point length does not match the support")
        expected_rows = comb(self.n_parties + 3, 3)
        if self.strategy_matrix.shape != (expected_rows, k):
            raise ValueError(
                f"strategy matrix must be ({expected_rows}, {k}), got {self.strategy_matrix.shape}"
            )
        if abs(self.quantum_point[0] - 1.0) > 1e-12 or np.any(self.strategy_matrix[:, 0] != 1.0):
            raise ValueError("constant components must equal 1")


def build_problem(state: SymmetricState, m: int, angles: AnglePair, support=None) -> DiscoveryProblem:
    if m > state.n_parties:
        raise ValueError(f"expression on {m} parties exceeds state size {state.n_parties}")
    support = _checked_support(m, support)
    return DiscoveryProblem(
        n_parties=m,
        support=support,
        quantum_point=quantum_point(state, m, angles, support),
        strategy_matrix=strategy_matrix(m, support),
        state=state,
        angles=angles,
    )


@dataclass
class DiscoveryResult:
    """Discovered inequality with its LP optimum q and quantum/local ratio q + 1."""

    expression: PIBellExpression
    q: float
    ratio: float

    def to_json_dict(self) -> dict:
        data = self.expression.to_json_dict()
        data["meta"] = {"q": self.q, "ratio": self.ratio}
        return data


def solve_discovery(problem: DiscoveryProblem, verify: bool = True) -> DiscoveryResult:
    """Maximize the quantum value over coefficients with the constant pinned to -1.

    Every strategy row yields the constraint sum_S alpha_S E_lambda(S) <= 1
    after moving the fixed constant across; coefficients live in a large safety
    box (the zero vector is always feasible, and the uniform strategy mixture
    keeps the LP bounded, so the box should never be active).
    """
    k = len(problem.support) - 1
    lp = LinearProgram(
        c=problem.quantum_point[1:],
        a_ub=problem.strategy_matrix[:, 1:],
        b_ub=np.ones(problem.strategy_matrix.shape[0]),
        lo=np.full(k, -COEFF_BOX),
        hi=np.full(k, COEFF_BOX),
    )
    sol = solve(lp)
    if sol.status != "optimal":
        raise RuntimeError(f"discovery LP unexpectedly {sol.status}")
    if np.max(np.abs(sol.x)) > COEFF_BOX * (1 - 1e-9):
        raise RuntimeError(f"solution hit the |alpha| <= {COEFF_BOX:g} safety box")

    coeffs: dict[tuple[int, ...], Fraction] = {(): Fraction(-1)}
    for s, val in zip(problem.support[1:], sol.x):
        if val != 0.0:
            coeffs[s] = Fraction(val)
    expr = PIBellExpression(problem.n_parties, coeffs, bound_direction="max")

    ratio = float(sol.objective_value)
    q = ratio - 1.0

    if verify:
        bound = local_bound(expr)
        if float(bound) > 1e-9:
            raise RuntimeError(f"enumeration recheck failed: local bound {float(bound)} > 0")
        expr.local_bound = bound
        if problem.state is not None and problem.angles is not None:
            value = expectation(expr, problem.state, problem.angles)
            if abs(value - q) > RECHECK_TOL:
                raise RuntimeError(f"expectation recheck failed: {value} vs LP optimum {q}")
    return DiscoveryResult(expression=expr, q=q, ratio=q + 1.0)


def rescaled_expression(result: DiscoveryResult) -> PIBellExpression:
    """The discovered inequality with the constant replaced by the negated exact bound.

    The non-constant part P satisfies max P <= 1 by construction; re-deriving
    its exact bound b by enumeration presents the inequality as <P> <= b.
    """
    expr = result.expression
    part = PIBellExpression(
        expr.n_parties,
        {s: c for s, c in expr.coefficients.items() if s},
        bound_direction="max",
    )
    bound = local_bound(part)
    coeffs = dict(part.coefficients)
    coeffs[()] = -bound
    return PIBellExpression(expr.n_parties, coeffs, bound_direction="max", local_bound=Fraction(0))


def optimize_scenario(
    state_family,
    m: int,
    support=None,
    theta_range: tuple[float, float] | None = None,
    theta_step: float = 0.02,
    angle_step: float = 0.4,
    param_tol: float = 1e-4,
) -> tuple[DiscoveryResult, dict]:
    """Best quantum/local ratio over a state family and xz angles, LP re-solved per point.

    ``state_family`` is either a fixed SymmetricState or a callable theta ->
    SymmetricState together with ``theta_range``.  A coarse deterministic grid
    is followed by coordinate descent with step halving; returns the verified
    best result and the parameters that achieved it.
    """
    support = _checked_support(m, support)
    strat = strategy_matrix(m, support)
    n_rows = strat.shape[0]
    fixed_state = isinstance(state_family, SymmetricState)
    if not fixed_state and theta_range is None:
        raise ValueError("theta_range is required for a parametrized family")

    state_cache: dict[float, SymmetricState] = {}

    def state_at(theta: float | None) -> SymmetricState:
        if fixed_state:
            return state_family
        if theta not in state_cache:
            state_cache[theta] = state_family(theta)
        return state_cache[theta]

    def ratio_at(theta: float | None, phi1: float, phi2: float) -> float:
        point = quantum_point(state_at(theta), m, AnglePair(phi1, phi2), support)
        lp = LinearProgram(
            c=point[1:],
            a_ub=strat[:, 1:],
            b_ub=np.ones(n_rows),
            lo=np.full(point.size - 1, -COEFF_BOX),
            hi=np.full(point.size - 1, COEFF_BOX),
        )
        sol = solve(lp)
        return float(sol.objective_value) if sol.status == "optimal" else -np.inf

    if fixed_state:
        thetas: list[float | None] = [None]
    else:
        lo, hi = theta_range
        thetas = list(np.arange(lo, hi + 1e-12, theta_step))

    angles_axis = np.arange(0.0, 2 * np.pi, angle_step)
    best = (-np.inf, thetas[0], 0.0, 0.0)
    for theta in thetas:
        for phi1 in angles_axis:
            for phi2 in angles_axis:
                r = ratio_at(theta, float(phi1), float(phi2))
                if r > best[0]:
                    best = (r, theta, float(phi1), float(phi2))

    value, theta, phi1, phi2 = best
    step = max(theta_step, angle_step)
    while step > param_tol:
        moved = False
        candidates = [(theta, phi1 + step, phi2), (theta, phi1 - step, phi2),
                      (theta, phi1, phi2 + step), (theta, phi1, phi2 - step)]
        if not fixed_state:
            lo, hi = theta_range
            candidates += [
                (min(max(theta + step, lo), hi), phi1, phi2),
                (min(max(theta - step, lo), hi), phi1, phi2),
            ]
        for cand in candidates:
            r = ratio_at(*cand)
            if r > value:
                value, (theta, phi1, phi2), moved = r, cand, True
        if not moved:
            step /= 2

    angles = AnglePair(phi1, phi2)
    result = solve_discovery(build_problem(state_at(theta), m, angles, support), verify=True)
    params = {"theta": theta, "angles": angles}
    return result, params
