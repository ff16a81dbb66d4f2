"""Exact unitary-moment oracle built on symmetric-group machinery.

Permutations on t letters are plain tuples ``p`` with ``p[i]`` the image of
letter i (0-indexed).  Weingarten coefficients are obtained by inverting the
Gram matrix of permutation operators, which is exact at desk scale (t <= 6)
and avoids character theory.  The permutation-operator convention is

    P(pi) |i_1 ... i_t>  =  |i_{pi^-1(1)} ... i_{pi^-1(t)}>

so that P(pi) P(sigma) = P(pi o sigma).
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from . import qcore

MAX_T = 6
MAX_MOMENT_DIM = 4096

Perm = tuple[int, ...]


# ---------------------------------------------------------------------------
# symmetric group


def permutations(t: int) -> list[Perm]:
    """All elements of S_t as image tuples."""
    if t < 1 or t > MAX_T:
        raise ValueError(f"t must be between 1 and {MAX_T}")
    return list(itertools.permutations(range(t)))


def identity_perm(t: int) -> Perm:
    return tuple(range(t))


def compose(p: Perm, q: Perm) -> Perm:
    """(p o q)(i) = p(q(i))."""
    return tuple(p[q[i]] for i in range(len(p)))


def invert(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, img in enumerate(p):
        out[img] = i
    return tuple(out)


def cycles(p: Perm) -> int:
    """Number of cycles including fixed points."""
    seen = [False] * len(p)
    count = 0
    for start in range(len(p)):
        if seen[start]:
            continue
        count += 1
        j = start
        while not seen[j]:
            seen[j] = True
            j = p[j]
    return count


def cycle_lengths(p: Perm) -> list[int]:
    seen = [False] * len(p)
    out = []
    for start in range(len(p)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        out.append(length)
    return out


def _perm_rows(p: Perm, d: int) -> np.ndarray:
    """Row index hit by each column of P(p): P(p)[rows[c], c] = 1."""
    t = len(p)
    dim = d**t
    pinv = invert(p)
    cols = np.arange(dim)
    digits = [(cols // d ** (t - 1 - k)) % d for k in range(t)]
    rows = np.zeros(dim, dtype=np.int64)
    for k in range(t):
        rows += digits[pinv[k]] * d ** (t - 1 - k)
    return rows


def permutation_operator(p: Perm, d: int) -> np.ndarray:
    """Dense operator on (C^d)^(x t) permuting the tensor copies."""
    t = len(p)
    dim = d**t
    if dim > MAX_MOMENT_DIM:
        raise ValueError(f"d^t = {dim} exceeds the size cap {MAX_MOMENT_DIM}")
    op = np.zeros((dim, dim), dtype=complex)
    op[_perm_rows(p, d), np.arange(dim)] = 1.0
    return op


def _perm_trace(op: np.ndarray, p: Perm, d: int) -> complex:
    """tr(op @ P(p)^dagger) without materializing P(p)."""
    dim = d ** len(p)
    rows = _perm_rows(p, d)
    # P has its 1-entries at (rows[c], c), so tr(op P^dag) = sum_c op[rows[c], c]
    return complex(np.sum(op[rows, np.arange(dim)]))


# ---------------------------------------------------------------------------
# Weingarten coefficients


@lru_cache(maxsize=None)
def _weingarten_table(t: int, d: int) -> dict[Perm, float]:
    if d < t:
        raise ValueError(f"Weingarten Gram matrix is singular for d = {d} < t = {t}")
    perms = permutations(t)
    gram = np.empty((len(perms), len(perms)), dtype=float)
    for i, p in enumerate(perms):
        for j, q in enumerate(perms):
            gram[i, j] = float(d ** cycles(compose(p, invert(q))))
    rhs = np.zeros(len(perms))
    rhs[perms.index(identity_perm(t))] = 1.0
    wg = np.linalg.solve(gram, rhs)
    return {p: float(w) for p, w in zip(perms, wg)}


def weingarten(p: Perm, d: int) -> float:
    """Weingarten coefficient Wg(p, d) from Gram-matrix inversion over S_t."""
    return _weingarten_table(len(p), d)[p]


def sum_abs_weingarten(t: int, d: int) -> float:
    return float(sum(abs(w) for w in _weingarten_table(t, d).values()))


def sum_abs_weingarten_exact(t: int, d: int) -> float:
    """Closed form (d - t)! / d! for the absolute Weingarten sum."""
    return 1.0 / math.prod(range(d - t + 1, d + 1))


def cycle_sum_excluding_identity(t: int, d: int) -> float:
    """sum over non-identity permutations of d^#cycles = (d+t-1)!/(d-1)! - d^t."""
    return float(math.prod(range(d, d + t)) - d**t)


# ---------------------------------------------------------------------------
# exact twirls


def haar_moment(op: np.ndarray, t: int, d: int) -> np.ndarray:
    """Exact t-fold Haar twirl E_U[U^(x t) op U^dagger(x t)].

    Direct Weingarten sum: sum_{pi,eta} Wg(eta^-1 pi, d) tr(op P(pi)^dag) P(eta).
    """
    dim = d**t
    if op.shape != (dim, dim):
        raise ValueError(f"operator must have dimension d^t = {dim}")
    if dim > MAX_MOMENT_DIM:
        raise ValueError(f"d^t = {dim} exceeds the size cap {MAX_MOMENT_DIM}")
    perms = permutations(t)
    wg = _weingarten_table(t, d)
    ptraces = {p: _perm_trace(op, p, d) for p in perms}
    out = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    for eta in perms:
        coeff = sum(wg[compose(invert(eta), p)] * ptraces[p] for p in perms)
        out[_perm_rows(eta, d), cols] += coeff
    return out


def encrypted_moment_exact(partition: qcore.QubitPartition, rho: np.ndarray, t: int) -> np.ndarray:
    """Exact Haar average of the t-copy encrypted state.

    Uses the structure of the padded input: the permutation weight splits into
    a message+tag part, evaluated from cycle traces of rho (x) tag, and a mixed
    part d_B^(#cycles - t).  Output lives on t copies of all z qubits.
    """
    z = partition.z
    d = 2**z
    dim = d**t
    if dim > MAX_MOMENT_DIM:
        raise ValueError(f"2^(z t) = {dim} exceeds the size cap {MAX_MOMENT_DIM}")
    if rho.shape[0] != 2**partition.n:
        raise ValueError("input state does not match the message register")
    d_b = 2**partition.m
    # tr((rho (x) tag)^k) = tr(rho^k); precompute power traces up to t
    ptr = [1.0]
    acc = np.eye(rho.shape[0], dtype=complex)
    for _ in range(t):
        acc = acc @ rho
        ptr.append(float(np.trace(acc).real))
    perms = permutations(t)
    wg = _weingarten_table(t, d)
    coeff_a = {p: float(np.prod([ptr[c] for c in cycle_lengths(p)])) for p in perms}
    coeff_b = {p: float(d_b ** (cycles(p) - t)) for p in perms}
    out = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    for eta in perms:
        coeff = sum(
            wg[compose(invert(eta), p)] * coeff_a[p] * coeff_b[p] for p in perms
        )
        out[_perm_rows(eta, d), cols] += coeff
    return out


def closeness_exact(partition: qcore.QubitPartition, rho: np.ndarray, t: int) -> float:
    """Exact trace norm || E[encrypted^(x t)] - sigma_z^(x t) ||_1."""
    z = partition.z
    d = 2**z
    moment = encrypted_moment_exact(partition, rho, t)
    drift = np.max(np.abs(moment - moment.conj().T))
    if drift > 1e-10:
        raise ArithmeticError(f"moment lost Hermiticity ({drift:.2e})")
    moment = 0.5 * (moment + moment.conj().T)
    target = np.eye(d**t, dtype=complex) / d**t
    return qcore.trace_norm(moment - target)


def ghse_moment(n: int, m: int, t: int) -> np.ndarray:
    """Exact t-copy average over states obtained by tracing m qubits from
    an (n+m)-qubit Haar-random pure state.

    Closed form: (d-1)!/(d+t-1)! * sum_pi d_B^#cycles(pi) P(pi) with d = 2^(n+m),
    d_B = 2^m, and P(pi) acting on t copies of n qubits.
    """
    d_a = 2**n
    d_b = 2**m
    d = d_a * d_b
    if d_a**t > MAX_MOMENT_DIM:
        raise ValueError(f"2^(n t) = {d_a ** t} exceeds the size cap {MAX_MOMENT_DIM}")
    norm = 1.0 / math.prod(range(d, d + t))  # (d-1)!/(d+t-1)!
    out = np.zeros((d_a**t, d_a**t), dtype=complex)
    for p in permutations(t):
        out += (d_b ** cycles(p)) * permutation_operator(p, d_a)
    return norm * out
