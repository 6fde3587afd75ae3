"""Permutationally invariant two-setting Bell expressions and exact local bounds.

A PI expression over n parties is a coefficient map on setting-multisets: the
multiset (1,1,2) stands for the sum of products A1^i A1^j A2^k over all
assignments to distinct parties (unordered among equal settings), and the empty
multiset is the constant term.  Deterministic strategies then only matter
through the four counts of parties answering (+,+), (+,-), (-,+), (-,-), so
local bounds reduce to an enumeration over C(n+3,3) strategy classes with exact
integer/rational arithmetic throughout.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, lcm
from typing import NamedTuple

import numpy as np

from .errors import CapacityError

# per-party deterministic sign pairs (A1, A2), in strategy-class slot order
SIGN_PAIRS = ((1, 1), (1, -1), (-1, 1), (-1, -1))

LOCAL_BOUND_MAX_PARTIES = 2000
BRUTE_FORCE_MAX_PARTIES = 10
_INT64_SAFE = 2**62


class StrategyClass(NamedTuple):
    """Counts of parties using each deterministic sign pair (A1, A2)."""

    pp: int  # (+1, +1)
    pm: int  # (+1, -1)
    mp: int  # (-1, +1)
    mm: int  # (-1, -1)

    @property
    def total(self) -> int:
        return self.pp + self.pm + self.mp + self.mm


def normalize_multiset(s) -> tuple[int, ...]:
    t = tuple(sorted(int(x) for x in s))
    if any(x not in (1, 2) for x in t):
        raise ValueError(f"settings must be 1 or 2, got {t}")
    return t


def _split_counts(s: tuple[int, ...]) -> tuple[int, int]:
    p = sum(1 for x in s if x == 1)
    return p, len(s) - p


@dataclass
class PIBellExpression:
    """Coefficients on setting-multisets, with party count and bound metadata."""

    n_parties: int
    coefficients: dict[tuple[int, ...], Fraction]
    bound_direction: str = "max"
    local_bound: Fraction | None = None

    def __post_init__(self):
        if self.n_parties < 1:
            raise ValueError("n_parties must be positive")
        if self.bound_direction not in ("max", "min"):
            raise ValueError("bound_direction must be 'max' or 'min'")
        clean: dict[tuple[int, ...], Fraction] = {}
        for s, c in self.coefficients.items():
            key = normalize_multiset(s)
            if len(key) > self.n_parties:
                raise ValueError(f"multiset {key} longer than party count {self.n_parties}")
            c = Fraction(c)
            if c != 0:
                clean[key] = clean.get(key, Fraction(0)) + c
        self.coefficients = {k: v for k, v in clean.items() if v != 0}
        if self.local_bound is not None:
            self.local_bound = Fraction(self.local_bound)

    @property
    def constant_term(self) -> Fraction:
        return self.coefficients.get((), Fraction(0))

    def max_orders(self) -> tuple[int, int]:
        """Largest multiplicity of setting 1 and of setting 2 over all multisets."""
        p_max = max((_split_counts(s)[0] for s in self.coefficients), default=0)
        q_max = max((_split_counts(s)[1] for s in self.coefficients), default=0)
        return p_max, q_max

    def to_json_dict(self) -> dict:
        """Shared inequality schema used by the CLI and discovery output."""
        return {
            "parties": self.n_parties,
            "coefficients": [
                {"multiset": list(s), "value": float(c)}
                for s, c in sorted(self.coefficients.items(), key=lambda kv: (len(kv[0]), kv[0]))
            ],
            "bound": None
            if self.local_bound is None
            else {"direction": self.bound_direction, "value": float(self.local_bound)},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def expression_from_json_dict(data: dict) -> PIBellExpression:
    coeffs = {tuple(row["multiset"]): Fraction(row["value"]) for row in data["coefficients"]}
    bound = data.get("bound")
    return PIBellExpression(
        n_parties=int(data["parties"]),
        coefficients=coeffs,
        bound_direction=bound["direction"] if bound else "max",
        local_bound=Fraction(bound["value"]) if bound else None,
    )


def all_multisets(max_size: int, *, include_constant: bool = True) -> list[tuple[int, ...]]:
    """All setting-multisets up to the given size, sorted by (size, contents)."""
    out: list[tuple[int, ...]] = [()] if include_constant else []
    for k in range(1, max_size + 1):
        for p in range(k, -1, -1):
            out.append((1,) * p + (2,) * (k - p))
    return out


def monomial_count(n: int, s) -> int:
    """Number of distinct monomials in the symmetrization of multiset ``s`` over n parties."""
    s = normalize_multiset(s)
    k = len(s)
    if k > n:
        raise ValueError(f"multiset of size {k} does not fit {n} parties")
    p, _ = _split_counts(s)
    return comb(n, k) * comb(k, p)


# ---------------------------------------------------------------------------
# built-in expressions
# ---------------------------------------------------------------------------


def chsh_expression() -> PIBellExpression:
    """Two-party CHSH in the canonical PI basis; local bound 2."""
    return PIBellExpression(
        2,
        {(1, 1): 1, (1, 2): 1, (2, 2): -1},
        bound_direction="max",
        local_bound=Fraction(2),
    )


def four_party_expression() -> PIBellExpression:
    """Three-party inequality violated by all four 3-subsets of a 4-qubit state; bound 6."""
    return PIBellExpression(
        3,
        {
            (1,): 2,
            (1, 1): -1,
            (1, 2): -1,
            (2, 2): 1,
            (1, 1, 1): 2,
            (1, 1, 2): 1,
            (1, 2, 2): -2,
            (2, 2, 2): -1,
        },
        bound_direction="max",
        local_bound=Fraction(6),
    )


def two_body_expression(n: int) -> PIBellExpression:
    """N-party inequality with only one- and two-body correlators; lower bound 0."""
    if n < 4:
        raise ValueError("two-body expression needs at least 4 parties")
    big_l = 3 * ((n - 3) ** 2 + n - 1)
    alpha = -3 * (n - 3)
    return PIBellExpression(
        n,
        {(): big_l, (1,): alpha, (2,): alpha, (1, 1): 1, (1, 2): 2, (2, 2): 1},
        bound_direction="min",
        local_bound=Fraction(0),
    )


def five_party_expression() -> PIBellExpression:
    """Five-party inequality without five-body correlators; local bound 6."""
    return PIBellExpression(
        5,
        {
            (1, 1): -1,
            (2, 2): -1,
            (1, 1, 1, 1): 1,
            (1, 1, 1, 2): 1,
            (1, 2, 2, 2): -1,
            (2, 2, 2, 2): 1,
        },
        bound_direction="max",
        local_bound=Fraction(6),
    )


# ---------------------------------------------------------------------------
# exact classical values
# ---------------------------------------------------------------------------


def enumerate_strategy_classes(n: int) -> list[StrategyClass]:
    """All C(n+3,3) occupation four-tuples summing to n, lexicographically."""
    if n < 1:
        raise ValueError("need at least one party")
    out = []
    for a in range(n + 1):
        for b in range(n - a + 1):
            for c in range(n - a - b + 1):
                out.append(StrategyClass(a, b, c, n - a - b - c))
    return out


def class_poly_table(cls: StrategyClass, p_max: int, q_max: int) -> list[list[int]]:
    """Coefficients of u^p v^q in prod_t (1 + u*x_t + v*y_t)^{n_t}, exact integers.

    Entry [p][q] is the value of the canonical symmetrized basis element with p
    ones and q twos under any deterministic strategy in the class.
    """
    table = [[0] * (q_max + 1) for _ in range(p_max + 1)]
    table[0][0] = 1
    for (x, y), cnt in zip(SIGN_PAIRS, cls):
        if cnt == 0:
            continue
        factor = [
            [
                comb(cnt, i) * comb(cnt - i, j) * (x**i) * (y**j) if i + j <= cnt else 0
                for j in range(q_max + 1)
            ]
            for i in range(p_max + 1)
        ]
        nxt = [[0] * (q_max + 1) for _ in range(p_max + 1)]
        for p1 in range(p_max + 1):
            for q1 in range(q_max + 1):
                t = table[p1][q1]
                if t == 0:
                    continue
                for p2 in range(p_max + 1 - p1):
                    for q2 in range(q_max + 1 - q1):
                        f = factor[p2][q2]
                        if f:
                            nxt[p1 + p2][q1 + q2] += t * f
        table = nxt
    return table


def classical_value(expr: PIBellExpression, cls: StrategyClass) -> Fraction:
    """Exact expression value under any deterministic strategy in the class."""
    if cls.total != expr.n_parties:
        raise ValueError(f"class total {cls.total} != party count {expr.n_parties}")
    p_max, q_max = expr.max_orders()
    table = class_poly_table(cls, p_max, q_max)
    acc = Fraction(0)
    for s, c in expr.coefficients.items():
        p, q = _split_counts(s)
        acc += c * table[p][q]
    return acc


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------


def _integer_scaled(expr: PIBellExpression) -> tuple[dict[tuple[int, ...], int], int] | None:
    """Coefficients as integers times a common denominator, if int64-safe."""
    denom = lcm(*(c.denominator for c in expr.coefficients.values())) if expr.coefficients else 1
    scaled = {s: int(c * denom) for s, c in expr.coefficients.items()}
    # worst-case |value| if every monomial contributed with full magnitude
    bound = sum(
        abs(c) * monomial_count(expr.n_parties, s) if s else abs(c) for s, c in scaled.items()
    )
    if bound >= _INT64_SAFE:
        return None
    return scaled, denom


def _class_chunks(n: int, chunk_rows: int = 1 << 19):
    """Yield strategy classes as four int64 arrays, grouped to bound memory."""
    buf: list[np.ndarray] = []
    rows = 0
    for a in range(n + 1):
        rem = n - a
        ii, jj = np.tril_indices(rem + 1)
        block = np.empty((4, ii.size), dtype=np.int64)
        block[0] = a
        block[1] = jj
        block[2] = ii - jj
        block[3] = rem - ii
        buf.append(block)
        rows += ii.size
        if rows >= chunk_rows:
            yield np.concatenate(buf, axis=1)
            buf, rows = [], 0
    if buf:
        yield np.concatenate(buf, axis=1)


def _chunk_values(
    counts: np.ndarray, scaled: dict[tuple[int, ...], int], p_max: int, q_max: int, binom: np.ndarray
) -> np.ndarray:
    """Vectorized generating-function evaluation of a class chunk (exact int64)."""
    m = counts.shape[1]
    table = np.zeros((p_max + 1, q_max + 1, m), dtype=np.int64)
    table[0, 0] = 1
    for slot, (x, y) in enumerate(SIGN_PAIRS):
        cnt = counts[slot]
        factor = np.empty((p_max + 1, q_max + 1, m), dtype=np.int64)
        for i in range(p_max + 1):
            first = binom[cnt, i] * (x**i)
            left = np.maximum(cnt - i, 0)
            for j in range(q_max + 1):
                factor[i, j] = first * binom[left, j] * (y**j)
        nxt = np.zeros_like(table)
        for p1 in range(p_max + 1):
            for q1 in range(q_max + 1):
                for p2 in range(p_max + 1 - p1):
                    for q2 in range(q_max + 1 - q1):
                        nxt[p1 + p2, q1 + q2] += table[p1, q1] * factor[p2, q2]
        table = nxt
    vals = np.zeros(m, dtype=np.int64)
    for s, c in scaled.items():
        p, q = _split_counts(s)
        vals += c * table[p, q]
    return vals


def _binom_table(n: int, r_max: int) -> np.ndarray:
    t = np.zeros((n + 1, r_max + 1), dtype=np.int64)
    for k in range(n + 1):
        for r in range(min(k, r_max) + 1):
            t[k, r] = comb(k, r)
    return t


def local_bound(expr: PIBellExpression, jobs: int | None = None) -> Fraction:
    """Exact extremal value over all deterministic strategies, via class enumeration."""
    n = expr.n_parties
    if n > LOCAL_BOUND_MAX_PARTIES:
        raise CapacityError(f"class enumeration limited to {LOCAL_BOUND_MAX_PARTIES} parties")
    want_max = expr.bound_direction == "max"
    p_max, q_max = expr.max_orders()
    packed = _integer_scaled(expr)

    if packed is None:
        # rare path: coefficients too wild for int64; exact Fractions per class
        values = (classical_value(expr, cls) for cls in enumerate_strategy_classes(n))
        return max(values) if want_max else min(values)

    scaled, denom = packed
    binom = _binom_table(n, max(p_max, q_max))

    def reduce_chunk(counts: np.ndarray) -> int:
        vals = _chunk_values(counts, scaled, p_max, q_max, binom)
        return int(vals.max() if want_max else vals.min())

    chunks = _class_chunks(n)
    if jobs is not None and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            extrema = list(pool.map(reduce_chunk, chunks))
    else:
        extrema = [reduce_chunk(c) for c in chunks]
    best = max(extrema) if want_max else min(extrema)
    return Fraction(best, denom)


@lru_cache(maxsize=8)
def _assignment_tables(n: int, p_max: int, q_max: int) -> np.ndarray:
    """Basis-element values for every one of the 4**n deterministic strategies."""
    total = 4**n
    codes = np.arange(total, dtype=np.int64)
    table = np.zeros((p_max + 1, q_max + 1, total), dtype=np.int64)
    table[0, 0] = 1
    for party in range(n):
        pair = (codes >> (2 * party)) & 3
        x = np.where(pair < 2, 1, -1).astype(np.int64)
        y = np.where(pair % 2 == 0, 1, -1).astype(np.int64)
        nxt = table.copy()
        if p_max:
            nxt[1:, :] += x * table[:-1, :]
        if q_max:
            nxt[:, 1:] += y * table[:, :-1]
        table = nxt
    return table


def brute_force_bound(expr: PIBellExpression) -> Fraction:
    """Oracle bound from iterating every per-party assignment of (A1, A2) signs."""
    n = expr.n_parties
    if n > BRUTE_FORCE_MAX_PARTIES:
        raise CapacityError(f"brute force limited to {BRUTE_FORCE_MAX_PARTIES} parties")
    packed = _integer_scaled(expr)
    p_max, q_max = expr.max_orders()
    if packed is None:
        raise CapacityError("coefficients too large for exact int64 brute force")
    scaled, denom = packed
    table = _assignment_tables(n, p_max, q_max)
    vals = np.zeros(table.shape[2], dtype=np.int64)
    for s, c in scaled.items():
        p, q = _split_counts(s)
        vals += c * table[p, q]
    best = vals.max() if expr.bound_direction == "max" else vals.min()
    return Fraction(int(best), denom)
