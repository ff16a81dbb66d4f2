"""The protocol: keyed encryption, decryption, tag authentication, the
channel-fidelity functionals governing acceptance, and the Monte Carlo /
exact-oracle experiments behind the authentication and security statements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import moments, qcore
from ._streams import spawn_rng
from .ensembles import ScramblerSpec, SecretKey, build_scrambler, sample_haar
from .qcore import Channel, QubitPartition


@dataclass(frozen=True)
class Ciphertext:
    """Encrypted state on z = n + l + m qubits with its register layout."""

    state: np.ndarray
    partition: QubitPartition


@dataclass
class AuthOutcome:
    """Result of tag verification.

    ``post_message`` is the normalized message-register state after the tag
    projection succeeded (tag and mixed registers traced out); it is None on
    reject.
    """

    accept_prob: float
    accepted: bool
    post_message: np.ndarray | None = field(repr=False, default=None)

    def fidelity_with(self, psi: np.ndarray) -> float:
        if self.post_message is None:
            raise ValueError("rejected outcome has no post-measurement state")
        return qcore.fidelity_with_pure(self.post_message, psi)


def tag_projector(partition: QubitPartition) -> np.ndarray:
    """Pi_0 = I_message (x) |0...0><0...0|_tag (x) I_mixed."""
    dn, dl, dm = partition.dims
    return qcore.tensor(np.eye(dn), qcore.zero_tag_state(partition.l), np.eye(dm))


def pad_state(rho: np.ndarray, partition: QubitPartition) -> np.ndarray:
    """Append the tag state and the maximally mixed register to the message."""
    return qcore.tensor(rho, qcore.zero_tag_state(partition.l), qcore.maximally_mixed(partition.m))


def _as_dm(state: np.ndarray) -> np.ndarray:
    return qcore.pure_dm(state) if state.ndim == 1 else state


def encrypt(rho: np.ndarray, key: SecretKey, partition: QubitPartition, spec: ScramblerSpec) -> Ciphertext:
    """Scramble (message (x) tag (x) mixed) with the keyed unitary.

    ``rho`` may be a density matrix or a pure-state vector on the message
    register.  Deterministic in (rho, key, spec).
    """
    rho = _as_dm(np.asarray(rho, dtype=complex))
    if rho.shape[0] != 2**partition.n:
        raise ValueError("message state does not match the partition")
    u = build_scrambler(key, partition.z, spec)
    return Ciphertext(qcore.apply_unitary(pad_state(rho, partition), u), partition)


def decrypt(c: Ciphertext, key: SecretKey, spec: ScramblerSpec) -> np.ndarray:
    """Unscramble and trace the mixed register; returns the (message, tag) state.

    On untampered input this is exactly message (x) |0...0><0...0|_tag.
    """
    part = c.partition
    u = build_scrambler(key, part.z, spec)
    raw = qcore.apply_unitary(c.state, u.conj().T)
    return qcore.partial_trace(raw, part.dims, {2})


def tamper(c: Ciphertext, channel: Channel) -> Ciphertext:
    """Adversarial channel acting on the ciphertext."""
    return Ciphertext(qcore.apply_channel(c.state, channel), c.partition)


def authenticate(c: Ciphertext, key: SecretKey, spec: ScramblerSpec) -> AuthOutcome:
    """Unscramble, project the tag register onto |0...0>, and on success
    return the normalized message state."""
    part = c.partition
    u = build_scrambler(key, part.z, spec)
    decoded = qcore.apply_unitary(c.state, u.conj().T)
    prob, post = qcore.project(decoded, tag_projector(part))
    if post is None:
        return AuthOutcome(accept_prob=prob, accepted=False)
    message = qcore.partial_trace(post, part.dims, {1, 2})
    return AuthOutcome(accept_prob=prob, accepted=True, post_message=message)


# ---------------------------------------------------------------------------
# channel-fidelity functionals


def entanglement_fidelity(channel: Channel) -> float:
    """F_e = d^-2 sum_i |tr K_i|^2."""
    return channel.kraus_trace_square_sum() / channel.dim**2


def channel_fidelity(channel: Channel) -> float:
    """F_c = (d^-1 sum_i |tr K_i|^2 + 1) / (d + 1)."""
    d = channel.dim
    return (channel.kraus_trace_square_sum() / d + 1.0) / (d + 1.0)


def predicted_p0(partition: QubitPartition, channel: Channel) -> float:
    """Leading-order Haar mean of the tag-acceptance probability."""
    fc = channel_fidelity(channel)
    w = 2.0**-partition.l
    return (1.0 - w) * fc + w


def predicted_fprime(partition: QubitPartition, channel: Channel) -> float:
    """Leading-order Haar mean of the unnormalized fidelity."""
    fc = channel_fidelity(channel)
    w = 2.0 ** -(partition.n + partition.l)
    return (1.0 - w) * fc + w


def prediction_slack(partition: QubitPartition, channel: Channel) -> float:
    """Documented error allowance of the leading-order formulas at finite d.

    The closed forms above are written in terms of the channel fidelity F_c,
    which differs from the entanglement fidelity F_e by (1 - F_e)/(d + 1);
    the exact Haar averages track the F_e form up to O(d^-2).  The allowance
    below bounds both contributions with margin.
    """
    d = 2.0**partition.z
    return (1.0 - entanglement_fidelity(channel)) / (d + 1.0) + 10.0 / d**2


# ---------------------------------------------------------------------------
# per-key functionals and their exact Haar averages


def p0_fprime_for_unitary(psi: np.ndarray, u: np.ndarray, partition: QubitPartition, channel: Channel):
    """(P0, F') for one scrambler realization and a pure message state."""
    rho_ext = pad_state(qcore.pure_dm(psi), partition)
    decoded = u.conj().T @ channel.apply(u @ rho_ext @ u.conj().T) @ u
    p0 = float(np.trace(tag_projector(partition) @ decoded).real)
    dn, dl, dm = partition.dims
    weight = qcore.tensor(qcore.pure_dm(psi), qcore.zero_tag_state(partition.l), np.eye(dm))
    fprime = float(np.trace(weight @ decoded).real)
    return p0, fprime


def _exact_haar_functional(weight: np.ndarray, partition: QubitPartition, channel: Channel, psi: np.ndarray) -> float:
    """Exact Haar mean of tr(weight . U^dag Gamma(U rho_ext U^dag) U).

    Computed from the exact 2-fold twirl: the mean equals
    tr[(Gamma (x) id)(T2(rho_ext (x) weight)) . SWAP].
    """
    d = 2**partition.z
    rho_ext = pad_state(qcore.pure_dm(psi), partition)
    twirled = moments.haar_moment(np.kron(rho_ext, weight), 2, d)
    pushed = channel.apply_left(twirled, d)
    return float(moments._perm_trace(pushed, (1, 0), d).real)


def exact_haar_p0(partition: QubitPartition, channel: Channel, psi: np.ndarray) -> float:
    """Exact (Weingarten-oracle) Haar mean of P0; feasible for z <= 6."""
    return _exact_haar_functional(tag_projector(partition), partition, channel, psi)


def exact_haar_fprime(partition: QubitPartition, channel: Channel, psi: np.ndarray) -> float:
    """Exact Haar mean of F'."""
    dn, dl, dm = partition.dims
    weight = qcore.tensor(qcore.pure_dm(psi), qcore.zero_tag_state(partition.l), np.eye(dm))
    return _exact_haar_functional(weight, partition, channel, psi)


# ---------------------------------------------------------------------------
# Monte Carlo experiments


@dataclass
class AuthSweepStats:
    trials: int
    mean_p0: float
    stderr_p0: float
    mean_fprime: float
    stderr_fprime: float
    mean_fidelity: float
    stderr_fidelity: float
    mean_one_minus_f: float
    stderr_one_minus_f: float
    var_p0: float
    var_fprime: float
    min_p0_minus_fprime: float
    predicted_p0: float
    predicted_fprime: float
    low_fidelity_regime: bool


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    n = len(values)
    mean = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return mean, stderr


def auth_sweep(
    psi: np.ndarray,
    partition: QubitPartition,
    channel: Channel,
    trials: int,
    mode: str = "haar_exact",
    seed: int = 0,
) -> AuthSweepStats:
    """Monte Carlo over keys of the authentication functionals under a fixed
    tamper channel.

    Each trial draws an independent scrambler from the requested ensemble and
    records P0, F' and the accepted-state fidelity F = F'/P0.
    """
    if trials < 100:
        raise ValueError("need at least 100 trials for stable statistics")
    spec = ScramblerSpec(mode=mode)
    z = partition.z
    p0s = np.empty(trials)
    fps = np.empty(trials)
    for i in range(trials):
        rng = spawn_rng(seed, "auth-sweep", i)
        if mode == "haar_exact":
            u = sample_haar(z, rng)
        else:
            u = build_scrambler(SecretKey.generate(rng), z, spec)
        p0s[i], fps[i] = p0_fprime_for_unitary(psi, u, partition, channel)
    fids = fps / p0s
    mean_p0, se_p0 = _mean_stderr(p0s)
    mean_fp, se_fp = _mean_stderr(fps)
    mean_f, se_f = _mean_stderr(fids)
    mean_1mf, se_1mf = _mean_stderr(1.0 - fids)
    return AuthSweepStats(
        trials=trials,
        mean_p0=mean_p0,
        stderr_p0=se_p0,
        mean_fprime=mean_fp,
        stderr_fprime=se_fp,
        mean_fidelity=mean_f,
        stderr_fidelity=se_f,
        mean_one_minus_f=mean_1mf,
        stderr_one_minus_f=se_1mf,
        var_p0=float(np.var(p0s, ddof=1)),
        var_fprime=float(np.var(fps, ddof=1)),
        min_p0_minus_fprime=float(np.min(p0s - fps)),
        predicted_p0=predicted_p0(partition, channel),
        predicted_fprime=predicted_fprime(partition, channel),
        low_fidelity_regime=channel_fidelity(channel) < 1e-6,
    )


@dataclass
class ScanReport:
    estimate: float            # bias-corrected trace distance
    raw_estimate: float
    stderr: float
    exact: float | None
    trials: int


def _pad_joint_state(rho_g: np.ndarray, partition: QubitPartition, t: int, q: int) -> np.ndarray:
    """Interleave per-copy tag and mixed registers into a t-copy joint state.

    ``rho_g`` lives on (message_1 ... message_t, purification); the output
    register order is (msg_1, tag_1, mix_1, ..., msg_t, tag_t, mix_t, purif).
    """
    dn, dl, dm = partition.dims
    pads = [qcore.zero_tag_state(partition.l) for _ in range(t)]
    pads += [qcore.maximally_mixed(partition.m) for _ in range(t)]
    full = rho_g
    for p in pads:
        full = np.kron(full, p)
    dims = [dn] * t + [2**q] + [dl] * t + [dm] * t
    # old positions: messages 0..t-1, purification t, tags t+1..2t, mixes 2t+1..3t
    order = []
    for i in range(t):
        order += [i, t + 1 + i, 2 * t + 1 + i]
    order.append(t)
    return qcore.permute_registers(full, dims, order)


def security_scan(
    partition: QubitPartition,
    t: int,
    q: int,
    trials: int,
    seed: int = 0,
    rho: np.ndarray | None = None,
    rho_g: np.ndarray | None = None,
    mode: str = "haar_exact",
    batches: int = 20,
    bootstrap: int = 200,
) -> ScanReport:
    """Monte Carlo distance between the averaged t-copy encrypted state and
    the maximally mixed target, with the purification register untouched.

    Pass ``rho`` (a single-copy message state, replicated as a product) or a
    general joint state ``rho_g`` on t message registers plus q purification
    qubits.  For product inputs with q = 0 the exact Weingarten value is
    attached for cross-checking.  The estimate is bootstrap bias-corrected,
    with the standard error taken over resampled batch means.
    """
    if (rho is None) == (rho_g is None):
        raise ValueError("pass exactly one of rho or rho_g")
    z = partition.z
    exact = None
    if rho is not None:
        rho = _as_dm(np.asarray(rho, dtype=complex))
        if q != 0:
            raise ValueError("product form has no purification register")
        rho_g = rho
        for _ in range(t - 1):
            rho_g = np.kron(rho_g, rho)
        if 2 ** (z * t) <= moments.MAX_MOMENT_DIM:
            exact = 0.5 * moments.closeness_exact(partition, rho, t)
    qcore.check_qubits(t * z + q)
    dq = 2**q
    padded = _pad_joint_state(rho_g, partition, t, q)
    rho_q = qcore.partial_trace(rho_g, [2 ** (partition.n * t), dq], {0})
    dzt = 2 ** (z * t)
    target = np.kron(np.eye(dzt, dtype=complex) / dzt, rho_q)

    if trials % batches:
        raise ValueError("trials must be divisible by the batch count")
    per_batch = trials // batches
    dim = dzt * dq
    product_input = rho is not None
    batch_means = np.zeros((batches, dim, dim), dtype=complex)
    spec = ScramblerSpec(mode=mode)
    rho_pad = pad_state(rho, partition) if product_input else None
    for b in range(batches):
        acc = np.zeros((dim, dim), dtype=complex)
        for i in range(per_batch):
            rng = spawn_rng(seed, "security-scan", b * per_batch + i)
            if mode == "haar_exact":
                u = sample_haar(z, rng)
            else:
                u = build_scrambler(SecretKey.generate(rng), z, spec)
            if product_input:
                # per-copy states are independent given the key: kron the copies
                phi = u @ rho_pad @ u.conj().T
                out = phi
                for _ in range(t - 1):
                    out = np.kron(out, phi)
            else:
                half = _apply_rows_per_copy(padded, u, t, dq)
                flipped = np.ascontiguousarray(half.conj().T)
                out = _apply_rows_per_copy(flipped, u, t, dq).conj().T
            acc += out
        batch_means[b] = acc / per_batch

    full_mean = np.mean(batch_means, axis=0)
    raw = qcore.trace_distance(full_mean, target)
    boot_rng = spawn_rng(seed, "security-scan", "bootstrap")
    flat = batch_means.reshape(batches, -1)
    replicates = np.empty(bootstrap)
    for r in range(bootstrap):
        counts = np.bincount(boot_rng.integers(0, batches, size=batches), minlength=batches)
        resampled = (counts.astype(float) @ flat / batches).reshape(dim, dim)
        replicates[r] = qcore.trace_distance(resampled, target)
    stderr = float(np.std(replicates, ddof=1))
    bias = float(np.mean(replicates)) - raw
    return ScanReport(
        estimate=raw - bias,
        raw_estimate=raw,
        stderr=stderr,
        exact=exact,
        trials=trials,
    )


def _apply_rows_per_copy(mat: np.ndarray, u: np.ndarray, t: int, dq: int) -> np.ndarray:
    """Left-multiply (u^(x t) (x) I_q) onto a t-copy (+ purification) operator.

    Row-side only; conjugation is completed by the caller via one transpose.
    All reshapes stay contiguous so the loop is BLAS-bound.
    """
    d = u.shape[0]
    rows_dim, cols_dim = mat.shape
    x = mat
    for copy in range(t):
        left = d**copy
        right = (d ** (t - copy - 1)) * dq
        x = np.matmul(u, x.reshape(left, d, right * cols_dim)).reshape(rows_dim, cols_dim)
    return x
