"""Derived keyed primitives.

Verifiable pseudorandom density matrices: keyed rank-2^m states whose
correct preparation is certified by undoing the scrambler and projecting
the leading registers onto |0...0>.  On top of them sit a one-way
state-generator interface and noise-robust EFI pairs whose statistical
farness is certified through entropy bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import moments, qcore
from ._streams import derive_bytes
from .ensembles import KEY_BYTES, ScramblerSpec, SecretKey, build_scrambler
from .qcore import Channel


@dataclass(frozen=True)
class VprdmParams:
    """n-qubit keyed mixed state with mixedness m < n."""

    n: int
    m: int
    key: SecretKey

    def __post_init__(self):
        if not 0 <= self.m < self.n:
            raise ValueError("need 0 <= m < n")
        qcore.check_qubits(self.n)

    @property
    def security_bits(self) -> int:
        return self.key.bits


def vprdm_generate(params: VprdmParams, spec: ScramblerSpec) -> np.ndarray:
    """U_k (|0><0|^(n-m) (x) sigma_m) U_k^dag; rank 2^m, purity 2^-m."""
    base = qcore.tensor(qcore.zero_tag_state(params.n - params.m), qcore.maximally_mixed(params.m))
    u = build_scrambler(params.key, params.n, spec)
    return qcore.apply_unitary(base, u)


def vprdm_verify(rho: np.ndarray, key: SecretKey, n: int, m: int, spec: ScramblerSpec) -> float:
    """Verification value tr(|0><0|^(n-m) tr_mixed(U_k^dag rho U_k)) in [0, 1]."""
    if rho.shape[0] != 2**n:
        raise ValueError("state dimension does not match n")
    u = build_scrambler(key, n, spec)
    undone = qcore.apply_unitary(rho, u.conj().T)
    reduced = qcore.partial_trace(undone, [2 ** (n - m), 2**m], {1})
    return float(reduced[0, 0].real)


def ghse_closeness(n: int, m: int, t: int) -> float:
    """Exact t-copy trace distance between the random-mixed-state ensemble
    average (tracing m qubits from an (n+m)-qubit Haar state) and the
    Haar-scrambled fixed-spectrum ensemble average."""
    ghse = moments.ghse_moment(n, m, t)
    base = qcore.tensor(qcore.zero_tag_state(n - m), qcore.maximally_mixed(m))
    op = base
    for _ in range(t - 1):
        op = np.kron(op, base)
    scrambled = moments.haar_moment(op, t, 2**n)
    return 0.5 * qcore.trace_norm(ghse - scrambled)


# ---------------------------------------------------------------------------
# one-way state generator interface


@dataclass
class OneWayStateGenerator:
    """Keyed states that verify under the generating key and reject others."""

    n: int
    m: int
    spec: ScramblerSpec
    threshold: float = 0.5

    def keygen(self, rng: np.random.Generator) -> SecretKey:
        return SecretKey.generate(rng)

    def stategen(self, key: SecretKey) -> np.ndarray:
        return vprdm_generate(VprdmParams(self.n, self.m, key), self.spec)

    def verify(self, key: SecretKey, rho: np.ndarray) -> bool:
        # 1e-12 grace keeps threshold = 1.0 usable despite float round-off
        return vprdm_verify(rho, key, self.n, self.m, self.spec) >= self.threshold - 1e-12


# ---------------------------------------------------------------------------
# EFI pairs


@dataclass(frozen=True)
class EfiParams:
    """Two keyed ensembles with mixedness m0 (low) and m1 = floor(gamma n)."""

    n: int
    m0: int
    gamma: float
    c: float
    lambda_eff: int
    noise: Channel | None = None

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if not 0.0 < self.c < self.gamma:
            raise ValueError("need 0 < c < gamma")
        if not self.m0 < self.m1 < self.n:
            raise ValueError("need m0 < m1 < n")
        if not 1 <= self.lambda_eff <= 12:
            raise ValueError("lambda_eff must lie in 1..12")
        qcore.check_qubits(self.n)

    @property
    def m1(self) -> int:
        return int(self.gamma * self.n)


def _truncated_keys(count: int) -> list[SecretKey]:
    """Deterministic truncated key set shared by both ensemble arms."""
    keys = []
    for j in range(count):
        parts = [derive_bytes(None, "efi-key", j, part, n=KEY_BYTES) for part in range(3)]
        keys.append(SecretKey(*parts))
    return keys


def efi_ensembles(params: EfiParams, spec: ScramblerSpec) -> tuple[np.ndarray, np.ndarray]:
    """Exact averages (nu0, nu1) over the truncated 2^lambda_eff key set."""
    keys = _truncated_keys(2**params.lambda_eff)
    nu = []
    for m in (params.m0, params.m1):
        acc = np.zeros((2**params.n, 2**params.n), dtype=complex)
        for key in keys:
            acc += vprdm_generate(VprdmParams(params.n, m, key), spec)
        nu.append(acc / len(keys))
    return nu[0], nu[1]


def efi_verify_draw(params: EfiParams, spec: ScramblerSpec, key: SecretKey, arm: int) -> float:
    """Pass-through verification of a drawn ensemble member given (key, arm)."""
    m = params.m1 if arm else params.m0
    rho = vprdm_generate(VprdmParams(params.n, m, key), spec)
    return vprdm_verify(rho, key, params.n, m, spec)


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


@dataclass
class EfiReport:
    s0_bits: float
    s1_bits: float
    t_exact: float
    t_lower_bound: float
    fannes_slack: float  # how far |S1-S0| sits below the Fannes bound
    lambda_eff: int

    def fannes_holds(self, tol: float = 1e-9) -> bool:
        return self.fannes_slack >= -tol


def _report_for(nu0: np.ndarray, nu1: np.ndarray, n: int, lambda_eff: int) -> EfiReport:
    s0 = qcore.vn_entropy_bits(nu0)
    s1 = qcore.vn_entropy_bits(nu1)
    t = qcore.trace_distance(nu0, nu1)
    bound = 1.0 - (s0 + 1.0) / s1 if s1 > 0 else -np.inf
    cap = t * math.log2(2**n - 1) + binary_entropy(t) if n > 1 else binary_entropy(t)
    return EfiReport(
        s0_bits=s0,
        s1_bits=s1,
        t_exact=t,
        t_lower_bound=bound,
        fannes_slack=cap - abs(s1 - s0),
        lambda_eff=lambda_eff,
    )


def efi_report(params: EfiParams, spec: ScramblerSpec) -> EfiReport:
    """Exact entropies, trace distance and entropy-based farness bound.

    The report asserts the internal consistency T_exact >= T_lower_bound
    (the farness certificate) before returning.
    """
    nu0, nu1 = efi_ensembles(params, spec)
    if params.noise is not None:
        nu0 = qcore.apply_channel(nu0, params.noise)
        nu1 = qcore.apply_channel(nu1, params.noise)
    rep = _report_for(nu0, nu1, params.n, params.lambda_eff)
    if rep.t_exact < rep.t_lower_bound - 1e-9:
        raise ArithmeticError("trace distance fell below its entropy lower bound")
    return rep


@dataclass
class EfiNoiseReport:
    noiseless: EfiReport
    noisy: EfiReport
    shannon_bits: float | None          # H({p_i}) of the mixed-unitary weights
    per_qubit_shannon: float | None     # for local depolarizing noise
    per_qubit_budget: float
    within_budget: bool | None          # None when the channel is not mixed-unitary


def efi_noise_check(params: EfiParams, spec: ScramblerSpec) -> EfiNoiseReport:
    """Apply the configured noise to both arms and evaluate the entropy budget.

    The Shannon entropy of the mixed-unitary weights is compared against the
    per-qubit budget gamma - c - m0/n; channels that are not mixed-unitary
    get the distance recomputed but no budget verdict.
    """
    if params.noise is None:
        raise ValueError("params carry no noise channel")
    noiseless = efi_report(EfiParams(params.n, params.m0, params.gamma, params.c, params.lambda_eff), spec)
    noisy = efi_report(params, spec)
    probs = params.noise.mixed_unitary_probabilities()
    budget = params.gamma - params.c - params.m0 / params.n
    if probs is None:
        return EfiNoiseReport(noiseless, noisy, None, None, budget, None)
    probs = probs[probs > 0]
    shannon = float(-np.sum(probs * np.log2(probs)))
    per_qubit = shannon / params.n
    return EfiNoiseReport(noiseless, noisy, shannon, per_qubit, budget, per_qubit <= budget)
