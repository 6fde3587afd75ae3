"""Qubit observables and Bell operators for permutationally invariant expressions."""

from __future__ import annotations

from dataclasses import dataclass
from math import cos, isfinite, pi, sin

import numpy as np

from .errors import CapacityError

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

HERMITIAN_TOL = 1e-12
BELL_OPERATOR_MAX_PARTIES = 12


@dataclass(frozen=True)
class XZObservable:
    """Dichotomic qubit observable cos(phi) X + sin(phi) Z, angle stored in [0, 2pi)."""

    angle: float

    def __post_init__(self):
        if not isfinite(self.angle):
            raise ValueError("angle must be finite")
        object.__setattr__(self, "angle", float(self.angle) % (2 * pi))

    def matrix(self) -> np.ndarray:
        return xz_observable(self.angle)


@dataclass(frozen=True)
class BlochObservable:
    """Dichotomic qubit observable v . (X, Y, Z) for a unit Bloch vector v."""

    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=float)
        if v.shape != (3,):
            raise ValueError("Bloch vector must have three components")
        if abs(np.linalg.norm(v) - 1.0) > 1e-9:
            raise ValueError("Bloch vector must be unit length")
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    def matrix(self) -> np.ndarray:
        return bloch_observable(self.vector)


def is_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    h = np.asarray(h)
    return h.ndim == 2 and h.shape[0] == h.shape[1] and np.max(np.abs(h - h.conj().T)) <= tol


def xz_observable(phi: float) -> np.ndarray:
    """2x2 matrix cos(phi) X + sin(phi) Z; involutory with eigenvalues +-1."""
    if not isfinite(phi):
        raise ValueError("angle must be finite")
    return cos(phi) * PAULI_X + sin(phi) * PAULI_Z


def bloch_observable(v) -> np.ndarray:
    """2x2 matrix v . (X, Y, Z) for a unit 3-vector v."""
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError("Bloch vector must have three components")
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise ValueError("Bloch vector must be unit length")
    return v[0] * PAULI_X + v[1] * PAULI_Y + v[2] * PAULI_Z


def bell_operator(expr, observables) -> np.ndarray:
    """Full 2^m Bell operator of a PI expression for fixed per-setting observables.

    ``observables`` is a pair (A1, A2) of 2x2 Hermitian matrices used by every
    party.  Each setting-multiset contributes its coefficient times the sum of
    tensor products over all distinct assignments of the multiset to parties,
    padded with identities; the constant term adds a multiple of the identity.

    The expectation of the returned matrix on any m-party state equals the
    expression value for those observables.
    """
    m = expr.n_parties
    if m > BELL_OPERATOR_MAX_PARTIES:
        raise CapacityError(f"bell_operator limited to {BELL_OPERATOR_MAX_PARTIES} parties")
    a1, a2 = (np.asarray(o, dtype=complex) for o in observables)
    if a1.shape != (2, 2) or a2.shape != (2, 2):
        raise ValueError("observables must be 2x2 matrices")

    coeffs = expr.coefficients
    p_max = max((sum(1 for x in s if x == 1) for s in coeffs), default=0)
    q_max = max((sum(1 for x in s if x == 2) for s in coeffs), default=0)

    # DP over parties on (count of setting-1, count of setting-2) slots:
    # each party extends every partial tensor with identity, A1 or A2.
    partial = {(0, 0): np.ones((1, 1), dtype=complex)}
    for _ in range(m):
        nxt: dict[tuple[int, int], np.ndarray] = {}
        for (c1, c2), mat in partial.items():
            for d1, d2, op in ((0, 0, IDENTITY_2), (1, 0, a1), (0, 1, a2)):
                key = (c1 + d1, c2 + d2)
                if key[0] > p_max or key[1] > q_max:
                    continue
                term = np.kron(mat, op)
                if key in nxt:
                    nxt[key] += term
                else:
                    nxt[key] = term
        partial = nxt

    dim = 2**m
    out = np.zeros((dim, dim), dtype=complex)
    for s in sorted(coeffs):
        c = float(coeffs[s])
        if not s:
            out += c * np.eye(dim)
            continue
        p = sum(1 for x in s if x == 1)
        out += c * partial[(p, len(s) - p)]
    return out


def eigen_max(h: np.ndarray) -> float:
    """Largest eigenvalue of a Hermitian matrix."""
    h = np.asarray(h, dtype=complex)
    scale = float(np.max(np.abs(h))) if h.size else 1.0
    if not is_hermitian(h, HERMITIAN_TOL * max(1.0, scale)):
        raise ValueError("matrix is not Hermitian")
    return float(np.linalg.eigvalsh(h)[-1])
