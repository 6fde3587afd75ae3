"""Dense two-phase primal simplex for the small LPs of the discovery pipeline.

Maximizes c.x subject to A x <= b and box bounds lo <= x <= hi (entries may be
infinite).  Bland's smallest-index rule is used for both the entering and
leaving choices, so the solver cannot cycle and is deterministic for a fixed
input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-9
MAX_CONSTRAINTS = 10_000
MAX_VARIABLES = 1_000


@dataclass
class LinearProgram:
    """maximize c.x  s.t.  A x <= b,  lo <= x <= hi."""

    c: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.a_ub = np.asarray(self.a_ub, dtype=float).reshape(-1, n) if np.size(self.a_ub) else np.zeros((0, n))
        self.b_ub = np.asarray(self.b_ub, dtype=float).ravel()
        if self.a_ub.shape[0] != self.b_ub.size:
            raise ValueError("A and b row counts differ")
        if not np.all(np.isfinite(self.b_ub)):
            raise ValueError("b must be finite")
        if not np.all(np.isfinite(self.a_ub)):
            raise ValueError("A must be finite")
        self.lo = np.full(n, -np.inf) if self.lo is None else np.asarray(self.lo, dtype=float).ravel()
        self.hi = np.full(n, np.inf) if self.hi is None else np.asarray(self.hi, dtype=float).ravel()
        if self.lo.size != n or self.hi.size != n:
            raise ValueError("bound vectors must match the variable count")
        if np.any(self.lo > self.hi):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def n_vars(self) -> int:
        return self.c.size


@dataclass
class LPSolution:
    status: str  # optimal | infeasible | unbounded
    x: np.ndarray | None = None
    objective_value: float = field(default=float("nan"))


def _bland_simplex(tab: np.ndarray, basis: np.ndarray, obj: np.ndarray) -> str:
    """Run primal simplex to optimality on a tableau in canonical form."""
    n_rows = tab.shape[0]
    while True:
        reduced = obj[:-1] - obj[basis] @ tab[:, :-1]
        enter = -1
        for j in range(reduced.size):
            if reduced[j] > PIVOT_TOL:
                enter = j
                break
        if enter < 0:
            return "optimal"
        col = tab[:, enter]
        positive = col > PIVOT_TOL
        if not positive.any():
            return "unbounded"
        ratios = np.full(n_rows, np.inf)
        ratios[positive] = tab[positive, -1] / col[positive]
        best = ratios.min()
        ties = np.where(ratios <= best + FEAS_TOL * max(1.0, abs(best)))[0]
        leave = min(ties, key=lambda r: basis[r])
        tab[leave] /= tab[leave, enter]
        for r in range(n_rows):
            if r != leave:
                f = tab[r, enter]
                if f != 0.0:
                    tab[r] -= f * tab[leave]
        basis[leave] = enter


def solve(lp: LinearProgram) -> LPSolution:
    """Optimal basic solution via two-phase primal simplex with Bland's rule."""
    n = lp.n_vars
    if n > MAX_VARIABLES:
        raise CapacityError(f"solver limited to {MAX_VARIABLES} variables")

    # substitute every variable by nonnegative ones: x = shift + sign * y (or y+ - y-)
    cols: list[tuple[int, float, float]] = []  # (original var, sign, shift)
    extra_rows: list[tuple[int, float]] = []  # (y column, upper bound on y)
    for j in range(n):
        lo_j, hi_j = lp.lo[j], lp.hi[j]
        if np.isfinite(lo_j):
            cols.append((j, 1.0, lo_j))
            if np.isfinite(hi_j):
                extra_rows.append((len(cols) - 1, hi_j - lo_j))
        elif np.isfinite(hi_j):
            cols.append((j, -1.0, hi_j))
        else:
            cols.append((j, 1.0, 0.0))
            cols.append((j, -1.0, 0.0))
    p = len(cols)

    shift = np.zeros(n)
    trans = np.zeros((n, p))
    for k, (j, sign, off) in enumerate(cols):
        trans[j, k] = sign
        shift[j] += off

    rows = [lp.a_ub @ trans]
    rhs = [lp.b_ub - lp.a_ub @ shift]
    for k, ub in extra_rows:
        row = np.zeros(p)
        row[k] = 1.0
        rows.append(row.reshape(1, -1))
        rhs.append(np.array([ub]))
    a = np.vstack(rows)
    b = np.concatenate(rhs)
    r = a.shape[0]
    if r > MAX_CONSTRAINTS:
        raise CapacityError(f"solver limited to {MAX_CONSTRAINTS} constraints")
    obj_y = lp.c @ trans

    # flip rows with negative rhs; such rows need artificial basis columns
    flip = b < 0
    a[flip] *= -1.0
    b[flip] *= -1.0
    slack_sign = np.where(flip, -1.0, 1.0)
    art_rows = np.where(flip)[0]

    n_slack = r  # one slack column per original row, kept even if rows drop
    n_art = art_rows.size
    ncols = p + n_slack + n_art
    tab = np.zeros((r, ncols + 1))
    tab[:, :p] = a
    tab[np.arange(r), p + np.arange(r)] = slack_sign
    tab[art_rows, p + n_slack + np.arange(n_art)] = 1.0
    tab[:, -1] = b
    basis = (p + np.arange(r)).astype(int)
    basis[art_rows] = p + n_slack + np.arange(n_art)
    a_std = tab[:, : p + n_slack].copy()  # exact standard-form data for refactorization
    b_std = b.copy()
    row_ids = np.arange(r)

    if n_art:
        phase1 = np.zeros(ncols + 1)
        phase1[p + n_slack : -1] = -1.0
        status = _bland_simplex(tab, basis, phase1)
        assert status == "optimal"  # phase-1 objective is bounded above by zero
        if -(phase1[basis] @ tab[:, -1]) > FEAS_TOL:
            return LPSolution(status="infeasible")
        # drive leftover zero-level artificials out of the basis
        keep = np.ones(r, dtype=bool)
        for row in range(r):
            if basis[row] >= p + n_slack:
                pivot_col = -1
                for j in range(p + n_slack):
                    if abs(tab[row, j]) > PIVOT_TOL:
                        pivot_col = j
                        break
                if pivot_col < 0:
                    keep[row] = False  # redundant row
                    continue
                tab[row] /= tab[row, pivot_col]
                for other in range(r):
                    if other != row and tab[other, pivot_col] != 0.0:
                        tab[other] -= tab[other, pivot_col] * tab[row]
                basis[row] = pivot_col
        tab = tab[keep]
        basis = basis[keep]
        row_ids = row_ids[keep]
        r = tab.shape[0]
    tab = np.hstack([tab[:, : p + n_slack], tab[:, -1:]])  # drop artificial columns

    phase2 = np.zeros(p + n_slack + 1)
    phase2[:p] = obj_y
    status = _bland_simplex(tab, basis, phase2)
    if status == "unbounded":
        return LPSolution(status="unbounded")

    # refactorize: recompute the basic solution from the original data to shed
    # the roundoff accumulated across pivots
    y = np.zeros(p + n_slack)
    try:
        y[basis] = np.linalg.solve(a_std[row_ids][:, basis], b_std[row_ids])
    except np.linalg.LinAlgError:
        y[basis] = tab[:, -1]
    x = trans @ y[:p] + shift
    return LPSolution(status="optimal", x=x, objective_value=float(lp.c @ x))


def check_feasible(lp: LinearProgram, x, tol: float = FEAS_TOL) -> tuple[bool, float]:
    """Whether x satisfies all constraints and bounds; also the worst violation."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size != lp.n_vars:
        raise ValueError("x has the wrong dimension")
    worst = 0.0
    if lp.a_ub.shape[0]:
        worst = max(worst, float(np.max(lp.a_ub @ x - lp.b_ub)))
    finite_lo = np.isfinite(lp.lo)
    finite_hi = np.isfinite(lp.hi)
    if finite_lo.any():
        worst = max(worst, float(np.max(lp.lo[finite_lo] - x[finite_lo])))
    if finite_hi.any():
        worst = max(worst, float(np.max(x[finite_hi] - lp.hi[finite_hi])))
    return worst <= tol, worst
