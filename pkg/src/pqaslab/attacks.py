"""Adversary games separating padded (randomized) encryption from the
deterministic pure-state variant.

The left-or-right game simulates the strongest pairwise-SWAP adversary
exactly: conditioned on the sampled key and mixed-register realizations the
t received states are a pure product state, so the probability that a whole
sequence of pairwise symmetric-subspace projections accepts reduces to a
permutation-group sum over Gram-matrix cycle products.  No t-copy joint
state is ever materialized.

Bell-measurement attacks sample transversal Bell outcomes copy-pair by
copy-pair, which is exact because both the states and the measurement
factorize over copy pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import moments, qcore
from ._streams import spawn_rng
from .ensembles import ScramblerSpec, SecretKey, build_scrambler, sample_haar
from .pqas import Ciphertext
from .qcore import QubitPartition


@dataclass
class AttackReport:
    advantage: float
    success_rate: float
    standard_error: float
    abstained: float = 0.0
    trials: int = 0


# ---------------------------------------------------------------------------
# left-or-right CPA game


@dataclass
class LRGameConfig:
    """Left-or-right oracle experiment.

    ``left`` and ``right`` are equal-length lists of message-state vectors
    (one per oracle query).  The scheme mode follows the partition: m = 0 is
    the deterministic pure-state variant, m > 0 the padded scheme.
    """

    left: list = field(repr=False)
    right: list = field(repr=False)
    partition: QubitPartition
    trials: int = 500
    mode: str = "haar_exact"

    def __post_init__(self):
        if len(self.left) != len(self.right):
            raise ValueError("left and right lists must have equal length")
        dn = 2**self.partition.n
        for v in list(self.left) + list(self.right):
            if np.shape(v) != (dn,):
                raise ValueError("plaintext dimension does not match the partition")

    @property
    def t(self) -> int:
        return len(self.left)


def standard_cpa_lists(t: int, n: int):
    """The canonical adversary choice: left all |0>, right mutually orthogonal."""
    if t > 2**n:
        raise ValueError("need 2^n >= t for mutually orthogonal right states")
    dim = 2**n
    left = [qcore.basis_ket(dim, 0) for _ in range(t)]
    right = [qcore.basis_ket(dim, i) for i in range(t)]
    return left, right


def _swap_chain_accept_prob(states: list[np.ndarray], pairs: list[tuple[int, int]]) -> float:
    """Probability that sequential SWAP tests on the given pairs all accept.

    ``states`` are pure and mutually independent, so the ordered product of
    pair-symmetrizers expands over the symmetric group and every term
    evaluates to a product of Gram-matrix entries along permutation cycles.
    """
    t = len(states)
    gram = np.empty((t, t), dtype=complex)
    for i in range(t):
        for j in range(t):
            gram[i, j] = np.vdot(states[i], states[j])
    poly: dict[tuple, float] = {moments.identity_perm(t): 1.0}
    for (i, j) in pairs:
        swap = list(range(t))
        swap[i], swap[j] = j, i
        swap = tuple(swap)
        new: dict[tuple, float] = {}
        for perm, c in poly.items():
            half = 0.5 * c
            new[perm] = new.get(perm, 0.0) + half
            left = moments.compose(swap, perm)
            new[left] = new.get(left, 0.0) + half
        poly = new

    def bracket(perm):
        pinv = moments.invert(perm)
        val = 1.0 + 0.0j
        for k in range(t):
            val *= gram[k, pinv[k]]
        return val

    total = 0.0
    items = list(poly.items())
    for pa, ca in items:
        for pb, cb in items:
            total += ca * cb * bracket(moments.compose(moments.invert(pa), pb)).real
    return float(min(max(total, 0.0), 1.0))


def _encrypt_pure(psi, partition: QubitPartition, u: np.ndarray, pad_index: int) -> np.ndarray:
    """One pure-state ciphertext realization for a sampled mixed-register value."""
    vec = psi
    if partition.l:
        vec = np.kron(vec, qcore.basis_ket(2**partition.l, 0))
    if partition.m:
        vec = np.kron(vec, qcore.basis_ket(2**partition.m, pad_index))
    return u @ vec


def lr_cpa_game(cfg: LRGameConfig, seed: int = 0) -> AttackReport:
    """Run the left-or-right experiment with the pairwise-SWAP adversary.

    The adversary guesses "left" exactly when every SWAP test accepts.  Per
    game the accept-all probability is evaluated for both oracle branches
    with common random draws, giving the empirical success rate of the
    Bernoulli game together with a variance-reduced estimate of the
    distinguishing advantage 2 Pr[success] - 1.
    """
    t = cfg.t
    if t > 8:
        raise ValueError("at most 8 oracle queries are supported")
    if t <= 6:
        pairs = [(i, j) for i in range(t) for j in range(i + 1, t)]
    else:
        pairs = [(i, i + 1) for i in range(0, t - 1, 2)]
    spec = ScramblerSpec(mode=cfg.mode)
    z = cfg.partition.z
    wins = 0
    gaps = np.empty(cfg.trials)
    for g in range(cfg.trials):
        rng = spawn_rng(seed, "lr-cpa", g)
        if cfg.mode == "haar_exact":
            u = sample_haar(z, rng)
        else:
            u = build_scrambler(SecretKey.generate(rng), z, spec)
        pads = [int(rng.integers(2**cfg.partition.m)) if cfg.partition.m else 0 for _ in range(t)]
        p_branch = []
        for side in (cfg.left, cfg.right):
            states = [
                _encrypt_pure(np.asarray(v, dtype=complex), cfg.partition, u, pads[i])
                for i, v in enumerate(side)
            ]
            p_branch.append(_swap_chain_accept_prob(states, pairs))
        gaps[g] = p_branch[0] - p_branch[1]
        b = int(rng.integers(2))
        accepted_all = rng.random() < p_branch[b]
        guess = 0 if accepted_all else 1
        wins += int(guess == b)
    success = wins / cfg.trials
    mean_gap = float(np.mean(gaps))
    stderr = float(np.std(gaps, ddof=1) / np.sqrt(cfg.trials))
    return AttackReport(
        advantage=abs(mean_gap),
        success_rate=success,
        standard_error=stderr,
        trials=cfg.trials,
    )


# ---------------------------------------------------------------------------
# purity probe and multi-state attack


def purity_probe(ciphertexts: list[Ciphertext], rng: np.random.Generator) -> float:
    """Estimate tr(rho^2) from SWAP tests on disjoint ciphertext pairs.

    Returns 2 * (accept fraction) - 1; with K pairs the standard error is
    2 sqrt(a(1-a)/K) for accept fraction a.
    """
    if len(ciphertexts) < 2 or len(ciphertexts) % 2:
        raise ValueError("need an even number of ciphertext copies")
    accept = 0
    pairs = len(ciphertexts) // 2
    for k in range(pairs):
        a = ciphertexts[2 * k].state
        b = ciphertexts[2 * k + 1].state
        if rng.random() < qcore.swap_test_accept(a, b):
            accept += 1
    return 2.0 * accept / pairs - 1.0


def multi_state_attack(ciphertexts: list[Ciphertext], rng: np.random.Generator) -> int:
    """Decide whether the ciphertexts encrypt one state (1) or several (2).

    SWAP tests run on disjoint consecutive pairs; any failure reveals that
    at least two distinct states were sent.
    """
    if len(ciphertexts) < 2:
        raise ValueError("need at least two ciphertexts")
    for k in range(len(ciphertexts) // 2):
        a = ciphertexts[2 * k].state
        b = ciphertexts[2 * k + 1].state
        if rng.random() >= qcore.swap_test_accept(a, b):
            return 2
    return 1


# ---------------------------------------------------------------------------
# Bell-measurement machinery


def _apply_cnot_vec(v: np.ndarray, control: int, target: int, qubits: int) -> np.ndarray:
    """CNOT on a state vector (or on the rows of a matrix); qubit 0 is msb."""
    pc = qubits - 1 - control
    pt = qubits - 1 - target
    idx = np.arange(v.shape[0])
    flipped = idx ^ (((idx >> pc) & 1) << pt)
    return v[flipped]


def _apply_h_vec(v: np.ndarray, qubit: int) -> np.ndarray:
    left = 2**qubit
    right = v.shape[0] // (2 * left)
    shape = (left, 2, right) + v.shape[1:]
    t = v.reshape(shape)
    out = np.empty_like(t)
    inv = 1.0 / np.sqrt(2.0)
    out[:, 0] = inv * (t[:, 0] + t[:, 1])
    out[:, 1] = inv * (t[:, 0] - t[:, 1])
    return out.reshape(v.shape)


def _bell_circuit(v: np.ndarray, half: int) -> np.ndarray:
    """CNOT(j -> j+half) for each pair, then H on the first half."""
    qubits = 2 * half
    for j in range(half):
        v = _apply_cnot_vec(v, j, j + half, qubits)
    for j in range(half):
        v = _apply_h_vec(v, j)
    return v


def _bell_probs_dm(rho: np.ndarray, half: int) -> np.ndarray:
    # C rho C^dag computed as C (C rho)^dag, using hermiticity of rho
    a = _bell_circuit(rho, half)
    b = _bell_circuit(a.conj().T, half)
    probs = np.clip(np.real(np.diag(b)), 0.0, None)
    return probs / probs.sum()


def _bell_probs_vec(psi: np.ndarray, half: int) -> np.ndarray:
    w = _bell_circuit(psi, half)
    probs = np.abs(w) ** 2
    return probs / probs.sum()


def _and_bits(outcomes: np.ndarray, half: int) -> np.ndarray:
    """Per-outcome AND bitstring (as ints) between the two measured halves."""
    a = outcomes >> half
    b = outcomes & ((1 << half) - 1)
    return a & b


def _prefix_parity(nu: np.ndarray, half: int, prefix: int) -> np.ndarray:
    """Parity of the first ``prefix`` bits (msb side) of each AND bitstring."""
    mask = ((1 << prefix) - 1) << (half - prefix)
    vals = nu & mask
    par = np.zeros_like(vals)
    while np.any(vals):
        par ^= vals & 1
        vals >>= 1
    return par & 1


def bell_parity_purity(state: np.ndarray, b: int, shots: int, rng: np.random.Generator) -> float:
    """Transversal-Bell-measurement purity estimator Z_b = 1 - 2 P_odd(b).

    ``state`` is a density matrix on 2h qubits holding two h-qubit halves;
    pairs (j, j+h) are measured in the Bell basis and the odd-parity
    frequency of the first b AND bits is converted to Z_b.  For halves in a
    product state rho (x) rho' the estimator is unbiased for
    tr(tr_rest(rho) tr_rest(rho')) restricted to the first b qubits.
    """
    qubits = int(round(np.log2(state.shape[0])))
    if qubits % 2:
        raise ValueError("state must hold two equal halves")
    half = qubits // 2
    if not 1 <= b <= half:
        raise ValueError("prefix length out of range")
    probs = _bell_probs_dm(state, half)
    outcomes = rng.choice(len(probs), size=shots, p=probs)
    nu = _and_bits(outcomes, half)
    return 1.0 - 2.0 * float(np.mean(_prefix_parity(nu, half, b)))


# ---------------------------------------------------------------------------
# qubit-number attack


@dataclass
class QubitCountReport:
    decision: int | None            # smallest prefix count with Z ~ 1, or abstain
    largest_rule_decision: int | None
    z_values: list[float]


def qubit_count_attack(
    draw_copies: Callable[[np.random.Generator], list[np.ndarray]],
    n: int,
    s_max: int,
    delta: float = 0.1,
    shots: int = 800,
    rng: np.random.Generator | None = None,
    fixed_stream: bool = False,
) -> QubitCountReport:
    """Recover the per-message qubit multiple s from an intercepted stream.

    ``draw_copies`` yields one interception: a list of 2 * s_max!/s pure
    per-copy state vectors (the two stream halves are the first and second
    half of the list).  ``fixed_stream`` short-cuts the resampling when every
    interception is identical (deterministic encryption).

    Bell outcomes are sampled copy-pair by copy-pair and the purity proxy
    Z_{n s'} is estimated for every s' = 1..s_max.  The decision is the
    smallest s' with Z >= 1 - delta (prefix purity is 1 exactly when the
    prefix holds whole copies); the value under the largest-qualifying rule
    is reported alongside for comparison.  Abstains (None) when no prefix
    qualifies.
    """
    if rng is None:
        rng = np.random.default_rng()
    if s_max > 3 or n > 2:
        raise ValueError("desk scale supports s_max <= 3 and n <= 2")
    odd_counts = np.zeros(s_max, dtype=np.int64)

    def collect(probs_list, width, reps):
        nus = np.zeros(reps, dtype=np.int64)
        pairs = len(probs_list)
        for c, probs in enumerate(probs_list):
            outs = rng.choice(len(probs), size=reps, p=probs)
            seg = _and_bits(outs, width)
            nus |= seg << ((pairs - 1 - c) * width)
        total_bits = pairs * width
        for si in range(s_max):
            prefix = n * (si + 1)
            par = _prefix_parity(nus, total_bits, prefix)
            odd_counts[si] += int(np.sum(par))

    if fixed_stream:
        copies = draw_copies(rng)
        k = len(copies) // 2
        width = int(round(np.log2(copies[0].shape[0])))
        probs_list = [_bell_probs_vec(np.kron(copies[c], copies[k + c]), width) for c in range(k)]
        collect(probs_list, width, shots)
    else:
        for _ in range(shots):
            copies = draw_copies(rng)
            k = len(copies) // 2
            width = int(round(np.log2(copies[0].shape[0])))
            probs_list = [_bell_probs_vec(np.kron(copies[c], copies[k + c]), width) for c in range(k)]
            collect(probs_list, width, 1)

    z_values = list(1.0 - 2.0 * odd_counts / shots)
    qualifying = [s + 1 for s in range(s_max) if z_values[s] >= 1.0 - delta]
    return QubitCountReport(
        decision=min(qualifying) if qualifying else None,
        largest_rule_decision=max(qualifying) if qualifying else None,
        z_values=z_values,
    )


# ---------------------------------------------------------------------------
# decoy scenario


def decoy_indistinguishability(partition: QubitPartition, t: int, rho: np.ndarray | None = None) -> float:
    """Exact t-copy trace distance between averaged ciphertexts and the
    maximally mixed decoys an eavesdropper would have to tell apart.

    Decoy preparation is free for this scheme (the decoy is the maximally
    mixed state); the returned distance is the oracle closeness value halved
    into trace-distance form.
    """
    if rho is None:
        rho = qcore.pure_dm(qcore.basis_ket(2**partition.n, 0))
    return 0.5 * moments.closeness_exact(partition, rho, t)
