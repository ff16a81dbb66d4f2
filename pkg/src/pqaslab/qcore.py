"""Dense multi-qubit linear algebra.

States are density matrices (complex128 ndarrays), unitaries are square
ndarrays, and channels are the small class hierarchy at the bottom of this
module.  Register order is fixed everywhere as (message, tag, mixed):
``tensor(a, b)`` puts ``a`` on the most significant qubits, and all
projectors, partial traces and register layouts follow that convention.

Values are treated as immutable after construction; every operation
returns a fresh array.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
UNITARITY_TOL = 1e-9
EIG_CLIP = 1e-12
PROJECT_FLOOR = 1e-12

DEFAULT_QUBIT_CAP = 10


def qubit_cap() -> int:
    """Current qubit cap; the PQASLAB_CAP env var overrides the default."""
    raw = os.environ.get("PQASLAB_CAP")
    return int(raw) if raw else DEFAULT_QUBIT_CAP


def check_qubits(z: int) -> None:
    cap = qubit_cap()
    if z > cap:
        raise ValueError(f"{z} qubits exceeds the cap of {cap} (set PQASLAB_CAP to raise)")


@dataclass(frozen=True)
class QubitPartition:
    """Register layout (n message, l tag, m mixed qubits); z = n + l + m."""

    n: int
    l: int
    m: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one message qubit (n >= 1)")
        if self.l < 0 or self.m < 0:
            raise ValueError("tag and mixed register sizes must be nonnegative")
        check_qubits(self.z)

    @property
    def z(self) -> int:
        return self.n + self.l + self.m

    @property
    def dims(self) -> tuple[int, int, int]:
        return (2**self.n, 2**self.l, 2**self.m)


# ---------------------------------------------------------------------------
# validation


def check_density_matrix(rho: np.ndarray) -> None:
    """Raise unless rho is Hermitian, unit trace and PSD within tolerance."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITICITY_TOL:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > TRACE_TOL or abs(np.trace(rho).imag) > TRACE_TOL:
        raise ValueError("density matrix trace differs from 1")
    if np.min(np.linalg.eigvalsh(rho)) < -PSD_TOL:
        raise ValueError("density matrix has a negative eigenvalue")


def check_pure_state(psi: np.ndarray) -> None:
    if psi.ndim != 1:
        raise ValueError("pure state must be a vector")
    if abs(np.vdot(psi, psi).real - 1.0) > HERMITICITY_TOL:
        raise ValueError("pure state is not normalized")


def check_unitary(u: np.ndarray) -> None:
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("unitary must be square")
    d = u.shape[0]
    if np.max(np.abs(u.conj().T @ u - np.eye(d))) > UNITARITY_TOL:
        raise ValueError("matrix is not unitary")


# ---------------------------------------------------------------------------
# construction


def basis_ket(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def pure_dm(psi: np.ndarray) -> np.ndarray:
    """|psi><psi| for a state vector."""
    return np.outer(psi, psi.conj())


def zero_tag_state(l: int) -> np.ndarray:
    """Tag register |0...0><0...0| on l qubits (scalar 1 for l = 0)."""
    return pure_dm(basis_ket(2**l, 0))


def maximally_mixed(m: int) -> np.ndarray:
    """m-qubit maximally mixed state I / 2^m; m = 0 gives the scalar 1."""
    if m < 0:
        raise ValueError("register size must be nonnegative")
    check_qubits(m)
    d = 2**m
    return np.eye(d, dtype=complex) / d


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product; the first factor ends up on the most significant qubits."""
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, op)
    if out.shape[0] > 2 ** qubit_cap():
        raise ValueError("tensor product exceeds the qubit cap")
    return out


# ---------------------------------------------------------------------------
# register surgery


def _as_tensor(rho: np.ndarray, dims) -> np.ndarray:
    dims = list(dims)
    if int(np.prod(dims)) != rho.shape[0]:
        raise ValueError(f"layout {dims} does not match dimension {rho.shape[0]}")
    return rho.reshape(dims + dims)


def partial_trace(rho: np.ndarray, dims, discard) -> np.ndarray:
    """Trace out the registers in ``discard`` (indices into ``dims``).

    ``dims`` lists register dimensions most-significant first, matching the
    ``tensor`` convention; ordering of the kept registers is preserved.
    """
    dims = list(dims)
    discard = sorted(set(discard))
    if any(i < 0 or i >= len(dims) for i in discard):
        raise ValueError("discard index out of range")
    t = _as_tensor(rho, dims)
    k = len(dims)
    for offset, i in enumerate(discard):
        j = i - offset  # axes shift as earlier registers are traced
        t = np.trace(t, axis1=j, axis2=j + (k - offset))
    kept = [d for i, d in enumerate(dims) if i not in discard]
    dk = int(np.prod(kept)) if kept else 1
    return t.reshape(dk, dk)


def permute_registers(rho: np.ndarray, dims, order) -> np.ndarray:
    """Reorder registers so that new register i is old register order[i]."""
    dims = list(dims)
    k = len(dims)
    if sorted(order) != list(range(k)):
        raise ValueError("order must be a permutation of the registers")
    t = _as_tensor(rho, dims)
    axes = list(order) + [k + o for o in order]
    t = np.transpose(t, axes)
    d = int(np.prod(dims))
    return t.reshape(d, d)


# ---------------------------------------------------------------------------
# dynamics and measurement


def apply_unitary(rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    if u.shape[0] != rho.shape[0]:
        raise ValueError("dimension mismatch between state and unitary")
    return u @ rho @ u.conj().T


def project(rho: np.ndarray, proj: np.ndarray):
    """Born-rule projection.

    Returns ``(prob, post)``;  ``post`` is None (a reject) when the outcome
    probability falls below the 1e-12 floor.
    """
    if proj.shape != rho.shape:
        raise ValueError("dimension mismatch between state and projector")
    if np.max(np.abs(proj @ proj - proj)) > PSD_TOL:
        raise ValueError("projector is not idempotent")
    prob = float(np.trace(proj @ rho @ proj).real)
    if prob <= PROJECT_FLOOR:
        return 0.0, None
    return prob, (proj @ rho @ proj) / prob


# ---------------------------------------------------------------------------
# metrics


def trace_norm(a: np.ndarray) -> float:
    """Trace norm of a Hermitian matrix via eigendecomposition."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(a))))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise ValueError("dimension mismatch")
    return 0.5 * trace_norm(a - b)


def fidelity_with_pure(rho: np.ndarray, psi: np.ndarray) -> float:
    """<psi| rho |psi> for a pure reference state."""
    if psi.shape[0] != rho.shape[0]:
        raise ValueError("dimension mismatch")
    return float(np.vdot(psi, rho @ psi).real)


def purity(rho: np.ndarray) -> float:
    return float(np.trace(rho @ rho).real)


def overlap(a: np.ndarray, b: np.ndarray) -> float:
    """tr(a b) for Hermitian operators."""
    if a.shape != b.shape:
        raise ValueError("dimension mismatch")
    return float(np.trace(a @ b).real)


def vn_entropy_bits(rho: np.ndarray) -> float:
    """Von Neumann entropy in bits; eigenvalues below 1e-12 are clipped to 0."""
    evals = np.linalg.eigvalsh(rho)
    evals = evals[evals > EIG_CLIP]
    return float(-np.sum(evals * np.log2(evals)))


def swap_test_accept(a: np.ndarray, b: np.ndarray) -> float:
    """Acceptance probability (1 + tr(a b)) / 2 of a SWAP test between a and b."""
    return 0.5 * (1.0 + overlap(a, b))


# ---------------------------------------------------------------------------
# channels


class Channel:
    """CPTP map with enough structure for the closed-form fidelity functionals.

    Subclasses provide ``apply`` (act on a state), ``apply_left`` (act on the
    left factor of a bipartite operator, needed by the exact moment oracle)
    and ``kraus_trace_square_sum`` = sum_i |tr K_i|^2.
    """

    dim: int

    def apply(self, rho: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply_left(self, mat: np.ndarray, right_dim: int) -> np.ndarray:
        raise NotImplementedError

    def kraus_trace_square_sum(self) -> float:
        raise NotImplementedError

    def mixed_unitary_probabilities(self) -> np.ndarray | None:
        """Probability vector if the channel is mixed-unitary, else None."""
        return None


class KrausChannel(Channel):
    """Channel given by an explicit Kraus operator list."""

    def __init__(self, kraus_ops, check: bool = True):
        ops = [np.asarray(k, dtype=complex) for k in kraus_ops]
        if not ops:
            raise ValueError("need at least one Kraus operator")
        self.kraus_ops = ops
        self.dim = ops[0].shape[0]
        if check:
            acc = sum(k.conj().T @ k for k in ops)
            if np.max(np.abs(acc - np.eye(self.dim))) > UNITARITY_TOL:
                raise ValueError("Kraus operators are not trace preserving")

    def apply(self, rho):
        out = np.zeros_like(rho)
        for k in self.kraus_ops:
            out += k @ rho @ k.conj().T
        return out

    def apply_left(self, mat, right_dim):
        out = np.zeros_like(mat)
        eye = np.eye(right_dim)
        for k in self.kraus_ops:
            big = np.kron(k, eye)
            out += big @ mat @ big.conj().T
        return out

    def kraus_trace_square_sum(self):
        return float(sum(abs(np.trace(k)) ** 2 for k in self.kraus_ops))

    def mixed_unitary_probabilities(self):
        probs = []
        for k in self.kraus_ops:
            kk = k.conj().T @ k
            p = np.trace(kk).real / self.dim
            if p < 1e-14 or np.max(np.abs(kk - p * np.eye(self.dim))) > 1e-9:
                return None
            probs.append(p)
        return np.array(probs)


class IdentityChannel(Channel):
    def __init__(self, dim: int):
        self.dim = dim

    def apply(self, rho):
        return rho.copy()

    def apply_left(self, mat, right_dim):
        return mat.copy()

    def kraus_trace_square_sum(self):
        return float(self.dim**2)

    def mixed_unitary_probabilities(self):
        return np.array([1.0])


class UnitaryChannel(Channel):
    """Coherent tamper rho -> V rho V^dagger."""

    def __init__(self, v: np.ndarray):
        check_unitary(v)
        self.v = np.asarray(v, dtype=complex)
        self.dim = v.shape[0]

    def apply(self, rho):
        return self.v @ rho @ self.v.conj().T

    def apply_left(self, mat, right_dim):
        big = np.kron(self.v, np.eye(right_dim))
        return big @ mat @ big.conj().T

    def kraus_trace_square_sum(self):
        return float(abs(np.trace(self.v)) ** 2)

    def mixed_unitary_probabilities(self):
        return np.array([1.0])


class DepolarizingChannel(Channel):
    """Global depolarizing map rho -> (1-p) rho + p I/d.

    Kept structural rather than as an explicit Kraus list: the Pauli Kraus
    decomposition has d^2 operators, which is impractical above a few qubits.
    """

    def __init__(self, dim: int, p: float):
        if not 0.0 <= p <= 1.0:
            raise ValueError("depolarizing strength must lie in [0, 1]")
        self.dim = dim
        self.p = p

    def apply(self, rho):
        d = self.dim
        return (1.0 - self.p) * rho + self.p * np.trace(rho) * np.eye(d) / d

    def apply_left(self, mat, right_dim):
        d = self.dim
        reduced = partial_trace(mat, [d, right_dim], {0})
        return (1.0 - self.p) * mat + self.p * np.kron(np.eye(d) / d, reduced)

    def kraus_trace_square_sum(self):
        # only the identity Kraus operator sqrt(1 - p + p/d^2) I has a trace
        return float((1.0 - self.p + self.p / self.dim**2) * self.dim**2)

    def mixed_unitary_probabilities(self):
        d2 = self.dim**2
        probs = np.full(d2, self.p / d2)
        probs[0] = 1.0 - self.p + self.p / d2
        return probs


class LocalDepolarizingChannel(Channel):
    """Single-qubit depolarizing noise applied independently to every qubit."""

    def __init__(self, qubits: int, p: float):
        if not 0.0 <= p <= 1.0:
            raise ValueError("depolarizing strength must lie in [0, 1]")
        self.qubits = qubits
        self.dim = 2**qubits
        self.p = p

    def _apply_on_qubit(self, rho, q, total):
        left = 2**q
        right = 2 ** (total - q - 1)
        t = rho.reshape(left, 2, right, left, 2, right)
        # single-qubit depolarizing: rho_q -> (1-p) rho_q + p tr_q(rho) I/2
        traced = t[:, 0, :, :, 0, :] + t[:, 1, :, :, 1, :]
        out = (1.0 - self.p) * t
        out[:, 0, :, :, 0, :] += 0.5 * self.p * traced
        out[:, 1, :, :, 1, :] += 0.5 * self.p * traced
        return out.reshape(rho.shape)

    def apply(self, rho):
        out = rho
        for q in range(self.qubits):
            out = self._apply_on_qubit(out, q, self.qubits)
        return out

    def apply_left(self, mat, right_dim):
        extra = int(round(np.log2(right_dim)))
        total = self.qubits + extra
        t = mat
        for q in range(self.qubits):
            left = 2**q
            right = 2 ** (total - q - 1)
            tt = t.reshape(left, 2, right, left, 2, right)
            traced = tt[:, 0, :, :, 0, :] + tt[:, 1, :, :, 1, :]
            out = (1.0 - self.p) * tt
            out[:, 0, :, :, 0, :] += 0.5 * self.p * traced
            out[:, 1, :, :, 1, :] += 0.5 * self.p * traced
            t = out.reshape(mat.shape)
        return t

    def kraus_trace_square_sum(self):
        # per qubit only the identity Kraus has nonzero trace
        return float((1.0 - 0.75 * self.p) ** self.qubits * self.dim**2)

    def mixed_unitary_probabilities(self):
        single = np.array([1.0 - 0.75 * self.p, 0.25 * self.p, 0.25 * self.p, 0.25 * self.p])
        probs = single
        for _ in range(self.qubits - 1):
            probs = np.outer(probs, single).ravel()
        return probs


class MixtureChannel(Channel):
    """Convex mixture of channels, used for linearity checks."""

    def __init__(self, weights, channels):
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ValueError("mixture weights must sum to 1")
        self.weights = list(weights)
        self.channels = list(channels)
        self.dim = channels[0].dim

    def apply(self, rho):
        return sum(w * c.apply(rho) for w, c in zip(self.weights, self.channels))

    def apply_left(self, mat, right_dim):
        return sum(w * c.apply_left(mat, right_dim) for w, c in zip(self.weights, self.channels))

    def kraus_trace_square_sum(self):
        return float(sum(w * c.kraus_trace_square_sum() for w, c in zip(self.weights, self.channels)))


def apply_channel(rho: np.ndarray, channel: Channel) -> np.ndarray:
    if channel.dim != rho.shape[0]:
        raise ValueError("dimension mismatch between state and channel")
    return channel.apply(rho)
