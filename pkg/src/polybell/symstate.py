"""Permutation-symmetric qubit states in the Dicke basis.

An N-qubit symmetric pure state is stored as the N+1 amplitudes d_0..d_N over
the Dicke states |D_N^e> (e excitations).  Reduced states of symmetric states
live on the m-qubit symmetric subspace and are stored as (m+1)x(m+1) matrices
in the Dicke basis.  Dense computational-basis forms are provided only as
oracles for small systems.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb, isqrt, sqrt

import numpy as np

from .errors import CapacityError

NORM_TOL = 1e-12
DENSE_MAX_QUBITS = 14
TRACE_MAX_QUBITS = 12


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SymmetricState:
    """Unit-norm amplitudes d_0..d_N of an N-qubit permutation-symmetric state."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size < 2:
            raise ValueError("amplitudes must be a 1-D array of length >= 2 (one qubit or more)")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized: |norm - 1| = {abs(norm - 1.0):.3e}")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @property
    def n_parties(self) -> int:
        return self.amplitudes.size - 1


@dataclass(frozen=True)
class DenseState:
    """Computational-basis amplitudes of an n-qubit pure state (party 0 = leftmost bit)."""

    n_parties: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if self.n_parties < 1 or amps.shape != (2**self.n_parties,):
            raise ValueError("amplitude vector length must be 2**n_parties")
        if abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
            raise ValueError("dense state is not normalized")
        object.__setattr__(self, "amplitudes", _frozen(amps))


@dataclass(frozen=True)
class ReducedSymmetricState:
    """Mixed m-qubit state supported on the symmetric subspace, in the Dicke basis."""

    n_parties: int
    dicke_matrix: np.ndarray

    def __post_init__(self):
        m = self.n_parties
        rho = np.asarray(self.dicke_matrix, dtype=complex)
        if m < 1 or rho.shape != (m + 1, m + 1):
            raise ValueError("dicke_matrix must be (m+1)x(m+1)")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
            raise ValueError("dicke_matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > 1e-12:
            raise ValueError("dicke_matrix does not have unit trace")
        if np.linalg.eigvalsh(rho)[0] < -1e-10:
            raise ValueError("dicke_matrix is not positive semidefinite")
        object.__setattr__(self, "dicke_matrix", _frozen(rho))

    def to_dense_matrix(self) -> np.ndarray:
        """Embed into the 2^m-dimensional computational basis."""
        v = dicke_embedding(self.n_parties)
        return v @ self.dicke_matrix @ v.conj().T


def make_dicke(n: int, e: int) -> SymmetricState:
    """The Dicke state of n qubits with e excitations."""
    if n < 1:
        raise ValueError("need at least one qubit")
    if not 0 <= e <= n:
        raise ValueError(f"excitation number {e} out of range 0..{n}")
    amps = np.zeros(n + 1, dtype=complex)
    amps[e] = 1.0
    return SymmetricState(amps)


def superpose(terms) -> SymmetricState:
    """Normalized linear combination of symmetric states on a common party count.

    ``terms`` is an iterable of (coefficient, SymmetricState) pairs.
    """
    terms = list(terms)
    if not terms:
        raise ValueError("no terms to superpose")
    n = terms[0][1].n_parties
    acc = np.zeros(n + 1, dtype=complex)
    for coeff, state in terms:
        if state.n_parties != n:
            raise ValueError("all terms must share the same party count")
        acc += complex(coeff) * state.amplitudes
    norm = np.linalg.norm(acc)
    if norm < 1e-14:
        raise ValueError("superposition has zero norm")
    return SymmetricState(acc / norm)


def dicke_split(n: int, e: int) -> tuple[float, float]:
    """One-party peel-off coefficients (c0, c1).

    |D_n^e> = c0 |D_{n-1}^e>|0> + c1 |D_{n-1}^{e-1}>|1> with
    c0 = sqrt((n-e)/n) and c1 = sqrt(e/n); c0**2 + c1**2 == 1 exactly as
    rationals.
    """
    if n < 2:
        raise ValueError("need at least two qubits to split one off")
    if not 0 <= e <= n:
        raise ValueError(f"excitation number {e} out of range 0..{n}")
    return sqrt(Fraction(n - e, n)), sqrt(Fraction(e, n))


def dicke_embedding(m: int) -> np.ndarray:
    """Isometry (2^m x (m+1)) sending Dicke-basis vectors to dense vectors."""
    if m > DENSE_MAX_QUBITS:
        raise CapacityError(f"dense embedding limited to {DENSE_MAX_QUBITS} qubits")
    v = np.zeros((2**m, m + 1), dtype=complex)
    for e in range(m + 1):
        w = 1.0 / sqrt(comb(m, e))
        for bits in combinations(range(m), e):
            idx = sum(1 << (m - 1 - b) for b in bits)
            v[idx, e] = w
    return v


def to_dense(s: SymmetricState) -> DenseState:
    """Spread each d_e uniformly over the C(n,e) weight-e basis strings."""
    n = s.n_parties
    if n > DENSE_MAX_QUBITS:
        raise CapacityError(f"dense form limited to {DENSE_MAX_QUBITS} qubits")
    amps = dicke_embedding(n) @ s.amplitudes
    return DenseState(n, amps)


def _sqrt_ratio(num: int, den: int) -> float:
    # sqrt(num/den); exact when both are perfect squares (single float rounding)
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn == num and rd * rd == den:
        return float(Fraction(rn, rd))
    return sqrt(num / den)


def reduce_symmetric(s: SymmetricState, m: int) -> ReducedSymmetricState:
    """Exact partial trace of |s><s| down to m parties, in the Dicke basis.

    Tracing a single party maps the scaled matrix S[e,f] =
    rho[e,f]/sqrt(C(n,e) C(n,f)) to S[e,f] + S[e+1,f+1]; iterating gives
    binomial weights over the diagonal shifts.  Combinatorial factors are kept
    as exact integers until one final division per term.
    """
    n = s.n_parties
    if not 1 <= m <= n:
        raise ValueError(f"kept party count {m} out of range 1..{n}")
    k = n - m
    # weight vector after tracing one party at a time (Pascal's rule, exact)
    w = [1]
    for _ in range(k):
        w = [x + y for x, y in zip([0] + w, w + [0])]
    d = s.amplitudes
    rho = np.zeros((m + 1, m + 1), dtype=complex)
    for e in range(m + 1):
        for f in range(e, m + 1):
            acc = 0.0 + 0.0j
            for j in range(k + 1):
                pair = d[e + j] * np.conj(d[f + j])
                if pair == 0:
                    continue
                num = w[j] * w[j] * comb(m, e) * comb(m, f)
                den = comb(n, e + j) * comb(n, f + j)
                acc += pair * _sqrt_ratio(num, den)
            rho[e, f] = acc
            rho[f, e] = np.conj(acc)
    return ReducedSymmetricState(m, rho)


def reduce_dense(s: DenseState, keep) -> np.ndarray:
    """Brute-force partial trace of a dense pure state; keeps the given parties.

    Returns the reduced density matrix over the kept parties, in their
    original order.  Oracle counterpart of :func:`reduce_symmetric`.
    """
    n = s.n_parties
    if n > TRACE_MAX_QUBITS:
        raise CapacityError(f"dense partial trace limited to {TRACE_MAX_QUBITS} qubits")
    keep = list(keep)
    if len(set(keep)) != len(keep) or not keep:
        raise ValueError("keep must be a non-empty set of distinct parties")
    if any(not 0 <= p < n for p in keep):
        raise ValueError("keep contains an out-of-range party index")
    traced = [p for p in range(n) if p not in keep]
    t = s.amplitudes.reshape((2,) * n).transpose(keep + traced)
    mat = t.reshape(2 ** len(keep), 2 ** len(traced))
    return mat @ mat.conj().T
