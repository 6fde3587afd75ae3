"""Quantum-side evaluation of PI Bell expressions on symmetric states.

Expectations exploit permutation invariance: every monomial of a
setting-multiset has the same expectation on a symmetric state, so the value is
a sum of per-multiset correlators on small reduced states.  The grid optimizer
works from a Pauli-string decomposition of the Bell operator so that whole
angle grids can be evaluated with batched eigensolves.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct
from math import asin, cos, isfinite, pi, sin, sqrt

import numpy as np

from .bellexpr import PIBellExpression, local_bound, monomial_count
from .errors import CapacityError
from .qoperators import (
    IDENTITY_2,
    PAULI_X,
    PAULI_Z,
    bell_operator,
    bloch_observable,
    eigen_max,
    xz_observable,
)
from .symstate import DenseState, SymmetricState, dicke_embedding, make_dicke, reduce_symmetric

MAX_VALUE_MAX_PARTIES = 10


@dataclass(frozen=True)
class AnglePair:
    """Measurement angles (phi1, phi2) in the xz plane, stored in [0, 2pi)."""

    phi1: float
    phi2: float

    def __post_init__(self):
        if not (isfinite(self.phi1) and isfinite(self.phi2)):
            raise ValueError("angles must be finite")
        object.__setattr__(self, "phi1", float(self.phi1) % (2 * pi))
        object.__setattr__(self, "phi2", float(self.phi2) % (2 * pi))

    def observables(self) -> tuple[np.ndarray, np.ndarray]:
        return xz_observable(self.phi1), xz_observable(self.phi2)


@dataclass(frozen=True)
class ChshSettings:
    """Bloch-vector settings for a three-party CHSH pair scenario."""

    a1: np.ndarray
    a2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    c1: np.ndarray
    c2: np.ndarray

    def __post_init__(self):
        for name in ("a1", "a2", "b1", "b2", "c1", "c2"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,) or abs(np.linalg.norm(v) - 1.0) > 1e-9:
                raise ValueError(f"setting {name} must be a unit 3-vector")
            v.setflags(write=False)
            object.__setattr__(self, name, v)


def circle_settings() -> ChshSettings:
    """The shared-axis settings that trace out the monogamy circle."""
    x = np.array([1.0, 0.0, 0.0])
    y = np.array([0.0, 1.0, 0.0])
    s2 = sqrt(2.0)
    return ChshSettings(a1=x, a2=y, b1=(x + y) / s2, b2=(x - y) / s2, c1=(x + y) / s2, c2=(x - y) / s2)


def saturating_three_qubit_state(theta: float) -> DenseState:
    """W-class state (cos(t)|110> + sin(t)|101> + |011>)/sqrt(2) saturating the circle."""
    amps = np.zeros(8, dtype=complex)
    amps[0b110] = cos(theta)
    amps[0b101] = sin(theta)
    amps[0b011] = 1.0
    return DenseState(3, amps / sqrt(2.0))


def two_body_angles() -> AnglePair:
    """The closed-form angles (pi - arcsin(21/22), arcsin(21/22))."""
    return AnglePair(pi - asin(21 / 22), asin(21 / 22))


# ---------------------------------------------------------------------------
# expectations
# ---------------------------------------------------------------------------


def multiset_correlators(state: SymmetricState, m: int, angles: AnglePair, multisets) -> dict:
    """Per-monomial expectations Tr(rho_k  A_s1 x ... x A_sk) for each multiset.

    ``m`` is the party count of the expression the multisets belong to; the
    state only needs at least that many qubits.  The empty multiset maps to 1.
    """
    if m > state.n_parties:
        raise ValueError(f"expression on {m} parties exceeds state size {state.n_parties}")
    obs = {1: angles.observables()[0], 2: angles.observables()[1]}
    reduced: dict[int, np.ndarray] = {}
    out: dict[tuple[int, ...], float] = {}
    for s in multisets:
        s = tuple(s)
        if not s:
            out[s] = 1.0
            continue
        k = len(s)
        if k > m:
            raise ValueError(f"multiset {s} longer than expression party count {m}")
        if k not in reduced:
            reduced[k] = reduce_symmetric(state, k).to_dense_matrix()
        op = np.ones((1, 1), dtype=complex)
        for setting in s:
            op = np.kron(op, obs[setting])
        out[s] = float(np.trace(reduced[k] @ op).real)
    return out


def expectation(expr: PIBellExpression, state: SymmetricState, angles: AnglePair) -> float:
    """Value of a PI expression on (the reduced state of) a symmetric state."""
    corr = multiset_correlators(state, expr.n_parties, angles, expr.coefficients.keys())
    total = 0.0
    for s in sorted(expr.coefficients):  # fixed summation order for determinism
        c = float(expr.coefficients[s])
        if not s:
            total += c
        else:
            total += c * monomial_count(expr.n_parties, s) * corr[s]
    return total


def chsh_pair_values(state: DenseState, settings: ChshSettings) -> tuple[float, float]:
    """CHSH parameters of the AB and AC pairs with party A's settings shared."""
    if state.n_parties != 3:
        raise ValueError("chsh_pair_values needs a three-qubit state")
    psi = state.amplitudes.reshape(2, 2, 2)

    def corr(op_a, op_b, op_c):
        out = np.einsum("abc,ax,by,cz,xyz->", psi.conj(), op_a, op_b, op_c, psi)
        return float(out.real)

    a = (bloch_observable(settings.a1), bloch_observable(settings.a2))
    b = (bloch_observable(settings.b1), bloch_observable(settings.b2))
    c = (bloch_observable(settings.c1), bloch_observable(settings.c2))
    b_ab = (
        corr(a[0], b[0], IDENTITY_2)
        + corr(a[0], b[1], IDENTITY_2)
        + corr(a[1], b[0], IDENTITY_2)
        - corr(a[1], b[1], IDENTITY_2)
    )
    b_ac = (
        corr(a[0], IDENTITY_2, c[0])
        + corr(a[0], IDENTITY_2, c[1])
        + corr(a[1], IDENTITY_2, c[0])
        - corr(a[1], IDENTITY_2, c[1])
    )
    return b_ab, b_ac


def monogamy_sample_check(trials: int, seed: int) -> float:
    """Max of B_AB^2 + B_AC^2 over random 3-qubit pure states and settings.

    States are drawn from normalized complex normals (Haar on pure states),
    settings from normalized Gaussian 3-vectors; reproducible per seed.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        raw = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        state = DenseState(3, raw / np.linalg.norm(raw))
        vecs = rng.standard_normal((6, 3))
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        settings = ChshSettings(*vecs)
        b_ab, b_ac = chsh_pair_values(state, settings)
        worst = max(worst, b_ab * b_ab + b_ac * b_ac)
    return worst


# ---------------------------------------------------------------------------
# Mermin
# ---------------------------------------------------------------------------


def mermin_expectation(state: SymmetricState) -> float:
    """Closed-form value of the (N-1)-party Mermin operator on the reduced state.

    Equals 2**((N-2)/2 + 1)/sqrt(N) * Re(conj(d0) d_{N-1} + conj(d1) d_N); the
    real part matches the Hermitian pairing when amplitudes are complex.
    """
    n = state.n_parties
    if n < 3:
        raise ValueError("mermin_expectation needs at least three qubits")
    d = state.amplitudes
    pairing = (np.conj(d[0]) * d[n - 1] + np.conj(d[1]) * d[n]).real
    return 2.0 ** ((n - 2) / 2 + 1) / sqrt(n) * float(pairing)


def mermin_operator(n_minus_1: int, form: str = "ghz") -> np.ndarray:
    """Mermin operator on n_minus_1 qubits, as GHZ projectors or Dicke flips."""
    if n_minus_1 < 2:
        raise ValueError("mermin_operator needs at least two qubits")
    if n_minus_1 > 10:
        raise CapacityError("mermin_operator limited to 10 qubits")
    k = n_minus_1
    dim = 2**k
    scale = 2.0 ** ((k - 1) / 2)  # 2**((N-2)/2) for N = k+1 parties overall
    if form == "ghz":
        ghz_p = np.zeros(dim, dtype=complex)
        ghz_m = np.zeros(dim, dtype=complex)
        ghz_p[0] = ghz_p[-1] = 1 / sqrt(2.0)
        ghz_m[0] = 1 / sqrt(2.0)
        ghz_m[-1] = -1 / sqrt(2.0)
        return scale * (np.outer(ghz_p, ghz_p.conj()) - np.outer(ghz_m, ghz_m.conj()))
    if form == "dicke":
        out = np.zeros((dim, dim), dtype=complex)
        out[0, -1] = scale  # |D_k^0><D_k^k| and its adjoint
        out[-1, 0] = scale
        return out
    raise ValueError(f"unknown form {form!r}; use 'ghz' or 'dicke'")


def mermin_optimal_state(n: int) -> SymmetricState:
    """The equal superposition of |D_n^1> and |1...1> maximizing the Mermin value."""
    if n < 3:
        raise ValueError("needs at least three qubits")
    amps = np.zeros(n + 1, dtype=complex)
    amps[1] = amps[n] = 1 / sqrt(2.0)
    return SymmetricState(amps)


# ---------------------------------------------------------------------------
# visibility and angle optimization
# ---------------------------------------------------------------------------


def visibility(expr: PIBellExpression, q_value: float) -> float:
    """Critical white-noise visibility (L - I_mix)/(Q - I_mix) of a violation.

    I_mix is the expression value on the maximally mixed state: just the
    constant term, since every correlator vanishes there.
    """
    bound = expr.local_bound if expr.local_bound is not None else local_bound(expr)
    bound = float(bound)
    noise = float(expr.constant_term)
    violating = q_value > bound if expr.bound_direction == "max" else q_value < bound
    if not violating:
        raise ValueError(f"q_value {q_value} does not violate the local bound {bound}")
    return (bound - noise) / (q_value - noise)


class _AngleObjective:
    """Batched largest-eigenvalue objective over xz measurement angles.

    The Bell operator is expanded once into Pauli strings over {X, Z} with
    per-string trigonometric monomial weights; for a state space larger than
    the expression's party count the strings are compressed onto the symmetric
    subspace of that many qubits.  Evaluating a batch of angle pairs is then a
    weighted sum of fixed matrices plus one batched eigensolve.
    """

    def __init__(self, expr: PIBellExpression, n_state_qubits: int):
        m = expr.n_parties
        self.constant = float(expr.constant_term)
        coeffs = {s: float(c) for s, c in expr.coefficients.items() if s}

        # aggregate (pauli pattern, trig exponents) -> weight
        terms: dict[tuple[tuple[int, ...], tuple[int, int, int, int]], float] = {}
        for sigma in iproduct((0, 1, 2), repeat=m):
            key = tuple(sorted(x for x in sigma if x))
            if key not in coeffs:
                continue
            support = [i for i, x in enumerate(sigma) if x]
            for choice in iproduct((0, 1), repeat=len(support)):  # 0 -> X, 1 -> Z
                tau = [0] * m
                expo = [0, 0, 0, 0]  # (cos1, sin1, cos2, sin2) exponents
                for pos, z in zip(support, choice):
                    tau[pos] = 2 if z else 1
                    expo[2 * (sigma[pos] - 1) + z] += 1
                tkey = (tuple(tau), tuple(expo))
                terms[tkey] = terms.get(tkey, 0.0) + coeffs[key]

        patterns = sorted({t for t, _ in terms})
        if len(patterns) * 4**m > (1 << 26):
            raise CapacityError("expression support too wide for the angle optimizer")
        pattern_index = {t: i for i, t in enumerate(patterns)}
        self.terms = [
            (pattern_index[t], expo, w) for (t, expo), w in sorted(terms.items()) if w != 0.0
        ]
        self.max_expo = max((max(e) for _, e, _ in self.terms), default=0)

        single = {0: IDENTITY_2, 1: PAULI_X, 2: PAULI_Z}
        if n_state_qubits == m:
            stack = []
            for tau in patterns:
                op = np.ones((1, 1), dtype=complex)
                for t in tau:
                    op = np.kron(op, single[t])
                stack.append(op)
            self.dim = 2**m
        else:
            w_iso = dicke_embedding(n_state_qubits)  # (2^n, n+1)
            w3 = w_iso.reshape(2**m, 2 ** (n_state_qubits - m), n_state_qubits + 1)
            stack = []
            for tau in patterns:
                op = np.ones((1, 1), dtype=complex)
                for t in tau:
                    op = np.kron(op, single[t])
                stack.append(np.einsum("ike,ij,jkf->ef", w3.conj(), op, w3))
            self.dim = n_state_qubits + 1
        self.qstack = np.asarray(stack) if stack else np.zeros((0, 1, 1), dtype=complex)

    def eigmax(self, phi1: np.ndarray, phi2: np.ndarray) -> np.ndarray:
        phi1 = np.atleast_1d(np.asarray(phi1, dtype=float))
        phi2 = np.atleast_1d(np.asarray(phi2, dtype=float))
        npts = phi1.size
        if not len(self.terms):
            return np.full(npts, self.constant)
        pow_table = np.empty((4, self.max_expo + 1, npts))
        for row, vals in enumerate((np.cos(phi1), np.sin(phi1), np.cos(phi2), np.sin(phi2))):
            pow_table[row, 0] = 1.0
            for k in range(1, self.max_expo + 1):
                pow_table[row, k] = pow_table[row, k - 1] * vals
        weights = np.zeros((npts, self.qstack.shape[0]))
        for idx, (e0, e1, e2, e3), w in self.terms:
            weights[:, idx] += w * (
                pow_table[0, e0] * pow_table[1, e1] * pow_table[2, e2] * pow_table[3, e3]
            )
        out = np.empty(npts)
        chunk = max(1, (1 << 22) // (self.dim * self.dim))
        for lo in range(0, npts, chunk):
            hs = np.einsum("pt,tij->pij", weights[lo : lo + chunk], self.qstack)
            out[lo : lo + chunk] = np.linalg.eigvalsh(hs)[:, -1]
        return out + self.constant


def max_quantum_value(
    expr: PIBellExpression,
    grid_step: float = 0.02,
    n_state_qubits: int | None = None,
) -> tuple[float, AnglePair]:
    """Maximal expression value under the identical-observable xz-plane ansatz.

    With the default state space (``n_state_qubits`` equal to the party count)
    this maximizes the largest Bell-operator eigenvalue over a (phi1, phi2)
    grid with local refinement down to 1e-8 steps.  A larger ``n_state_qubits``
    restricts the optimization to reduced states of permutation-symmetric
    states of that many qubits, which is the natural state space when every
    subset of a larger symmetric system must violate simultaneously.
    """
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    m = expr.n_parties
    if m > MAX_VALUE_MAX_PARTIES:
        raise CapacityError(f"angle optimization limited to {MAX_VALUE_MAX_PARTIES} parties")
    n = m if n_state_qubits is None else int(n_state_qubits)
    if n < m:
        raise ValueError("n_state_qubits must be at least the expression party count")

    objective = _AngleObjective(expr, n)
    if not objective.terms:
        return objective.constant, AnglePair(0.0, 0.0)

    axis = np.arange(0.0, 2 * pi, grid_step)
    p1g, p2g = np.meshgrid(axis, axis, indexing="ij")
    values = objective.eigmax(p1g.ravel(), p2g.ravel())
    top = np.argsort(-values, kind="stable")[:5]

    def refine(phi1: float, phi2: float) -> tuple[float, float, float]:
        best = float(objective.eigmax(phi1, phi2)[0])
        step = grid_step
        while step > 1e-8:
            moved = False
            for dphi1, dphi2 in ((step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)):
                cand = float(objective.eigmax(phi1 + dphi1, phi2 + dphi2)[0])
                if cand > best:
                    best, phi1, phi2, moved = cand, phi1 + dphi1, phi2 + dphi2, True
            if not moved:
                step /= 2
        return best, phi1, phi2

    best_val, best_angles = -np.inf, (0.0, 0.0)
    for idx in top:
        val, phi1, phi2 = refine(float(p1g.ravel()[idx]), float(p2g.ravel()[idx]))
        if val > best_val:
            best_val, best_angles = val, (phi1, phi2)
    return best_val, AnglePair(*best_angles)


def bell_operator_value(expr: PIBellExpression, angles: AnglePair) -> float:
    """Largest eigenvalue of the dense Bell operator at fixed angles (slow oracle)."""
    return eigen_max(bell_operator(expr, angles.observables()))
