"""Acceptance suite: every release-gating property as a callable check.

Each criterion function returns a CriterionResult and is invoked both by
``pqaslab selftest`` and by tests/test_acceptance.py, so the CLI and pytest
always agree.  Statistical checks use fixed seeds; tolerances are pinned
here, not tuned at call sites.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import attacks, harness, moments, pqas, primitives, qcore
from ._streams import spawn_rng
from .ensembles import ScramblerSpec, SecretKey, random_pure_state, sample_ghse, sample_haar
from .qcore import QubitPartition


@dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    details: list[str] = field(default_factory=list)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.index}: {self.name} ({self.seconds:.1f}s)"


def _check(details: list[str], ok: bool, text: str) -> bool:
    details.append(("ok   " if ok else "FAIL ") + text)
    return ok


# ---------------------------------------------------------------------------


def criterion_1_completeness(seed: int = 101) -> CriterionResult:
    """Round trip and unit acceptance for both scrambler modes."""
    start = time.perf_counter()
    details: list[str] = []
    ok = True
    count = 0
    worst_td = 0.0
    worst_p0 = 0.0
    for mode in ("haar_exact", "composed"):
        spec = ScramblerSpec(mode=mode)
        for n in (1, 2, 3):
            for l in (1, 2):
                for m in (0, 1, 2):
                    for rep in range(2 if mode == "composed" else 4):
                        rng = spawn_rng(seed, mode, n, l, m, rep)
                        part = QubitPartition(n, l, m)
                        key = SecretKey.generate(rng)
                        rho = sample_ghse(n, n, rng)
                        ct = pqas.encrypt(rho, key, part, spec)
                        plain = pqas.decrypt(ct, key, spec)
                        target = qcore.tensor(rho, qcore.zero_tag_state(l))
                        worst_td = max(worst_td, qcore.trace_distance(plain, target))
                        out = pqas.authenticate(ct, key, spec)
                        worst_p0 = max(worst_p0, abs(out.accept_prob - 1.0))
                        count += 1
    ok &= _check(details, count >= 100, f"{count} (key, rho) pairs exercised")
    ok &= _check(details, worst_td <= 1e-9, f"worst round-trip trace distance {worst_td:.2e} <= 1e-9")
    ok &= _check(details, worst_p0 <= 1e-9, f"worst |P0 - 1| {worst_p0:.2e} <= 1e-9")
    return CriterionResult(1, "completeness round trip", ok, details, time.perf_counter() - start)


def criterion_2_closeness_scaling(seed: int = 102) -> CriterionResult:
    """Exact t=2 closeness halves per extra mixed qubit; Monte Carlo agrees."""
    start = time.perf_counter()
    details: list[str] = []
    ok = True
    rho = qcore.pure_dm(qcore.basis_ket(2, 0))
    deltas = {}
    for m in (1, 2, 3):
        part = QubitPartition(1, 1, m)
        deltas[m] = moments.closeness_exact(part, rho, 2)
    for m in (1, 2):
        ratio = deltas[m + 1] / deltas[m]
        ok &= _check(details, 0.35 <= ratio <= 0.65, f"exact ratio m={m}->{m + 1}: {ratio:.4f} in [0.35, 0.65]")
    part = QubitPartition(1, 1, 1)
    scan = pqas.security_scan(part, 2, 0, 2000, seed=seed, rho=rho)
    dev = abs(scan.estimate - scan.exact)
    tol = 3 * scan.stderr + 1e-9  # absolute floor for the exactly-converged regime
    ok &= _check(
        details,
        dev <= tol,
        f"q=0 Monte Carlo {scan.estimate:.5f} vs oracle {scan.exact:.5f} (|dev| {dev:.2e} <= {tol:.2e})",
    )
    # purified/entangled input: same decay per extra mixed qubit within factor 2
    mc = {}
    for m in (1, 2):
        part = QubitPartition(1, 1, m)
        qubits = 2 * 1 + 1
        ghz = (qcore.basis_ket(2**qubits, 0) + qcore.basis_ket(2**qubits, 2**qubits - 1)) / np.sqrt(2)
        rep = pqas.security_scan(part, 2, 1, 2000, seed=seed + m, rho_g=qcore.pure_dm(ghz), bootstrap=100)
        mc[m] = rep.estimate
    ratio_q1 = mc[2] / mc[1]
    ratio_q0 = (0.5 * deltas[2]) / (0.5 * deltas[1])
    rel = ratio_q1 / ratio_q0
    ok &= _check(
        details,
        0.5 <= rel <= 2.0,
        f"entangled-input ratio {ratio_q1:.3f} within factor 2 of product ratio {ratio_q0:.3f}",
    )
    return CriterionResult(2, "security closeness scaling", ok, details, time.perf_counter() - start)


def criterion_3_weingarten(seed: int = 103) -> CriterionResult:
    """Weingarten sum identity and twirl vs Monte Carlo averaging."""
    start = time.perf_counter()
    details: list[str] = []
    ok = True
    worst = 0.0
    for t in (1, 2, 3, 4):
        for d in (4, 8, 16):
            worst = max(worst, abs(moments.sum_abs_weingarten(t, d) - moments.sum_abs_weingarten_exact(t, d)))
    ok &= _check(details, worst <= 1e-12, f"sum |Wg| identity worst deviation {worst:.2e} <= 1e-12")
    t, d, samples = 2, 4, 5000
    rng = spawn_rng(seed, "wg-mc")
    for case in range(5):
        raw = rng.standard_normal((d**t, d**t)) + 1j * rng.standard_normal((d**t, d**t))
        obs = 0.5 * (raw + raw.conj().T)
        exact = moments.haar_moment(obs, t, d)
        acc = np.zeros_like(obs)
        sq = np.zeros(obs.shape, dtype=float)
        for _ in range(samples):
            u = sample_haar(2, rng)
            uu = np.kron(u, u)
            val = uu @ obs @ uu.conj().T
            acc += val
            sq += np.abs(val) ** 2
        mean = acc / samples
        var = sq / samples - np.abs(mean) ** 2
        sigma_f = np.sqrt(np.sum(var) / samples)
        dev = np.linalg.norm(mean - exact)
        ok &= _check(details, dev <= 3 * sigma_f, f"observable {case}: Frobenius dev {dev:.4f} <= 3 sigma {3 * sigma_f:.4f}")
    return CriterionResult(3, "Weingarten identities", ok, details, time.perf_counter() - start)


def criterion_4_auth_averages(seed: int = 104) -> CriterionResult:
    """Tag-acceptance and fidelity functionals match their Haar formulas."""
    start = time.perf_counter()
    details: list[str] = []
    ok = True
    part = QubitPartition(2, 2, 1)
    dim = 2**part.z
    psi = qcore.basis_ket(4, 0)
    channels = [("identity", qcore.IdentityChannel(dim))]
    for p in (0.1, 0.3, 0.5):
        channels.append((f"depolarizing(p={p})", qcore.DepolarizingChannel(dim, p)))
    channels.append(("random-unitary", qcore.UnitaryChannel(sample_haar(part.z, spawn_rng(seed, "tamper")))))
    for label, chan in channels:
        stats = pqas.auth_sweep(psi, part, chan, trials=1000, seed=seed)
        slack = pqas.prediction_slack(part, chan)
        exact_p0 = pqas.exact_haar_p0(part, chan, psi)
        exact_fp = pqas.exact_haar_fprime(part, chan, psi)
        dev_oracle = abs(stats.mean_p0 - exact_p0)
        tol_oracle = 3 * stats.stderr_p0 + 1e-9
        ok &= _check(
            details,
            dev_oracle <= tol_oracle,
            f"{label}: mean P0 {stats.mean_p0:.5f} vs exact oracle {exact_p0:.5f} within {tol_oracle:.2e}",
        )
        dev_formula = abs(stats.mean_p0 - stats.predicted_p0)
        tol = 3 * stats.stderr_p0 + slack
        ok &= _check(
            details,
            dev_formula <= tol,
            f"{label}: P0 formula residual {dev_formula:.5f} <= 3 sigma + slack {tol:.5f}",
        )
        dev_fp_oracle = abs(stats.mean_fprime - exact_fp)
        tol_fp_oracle = 3 * stats.stderr_fprime + 1e-9
        ok &= _check(
            details,
            dev_fp_oracle <= tol_fp_oracle,
            f"{label}: mean F' {stats.mean_fprime:.5f} vs exact oracle {exact_fp:.5f} within {tol_fp_oracle:.2e}",
        )
        dev_fp = abs(stats.mean_fprime - stats.predicted_fprime)
        tol_fp = 3 * stats.stderr_fprime + slack
        ok &= _check(details, dev_fp <= tol_fp, f"{label}: F' formula residual {dev_fp:.5f} <= {tol_fp:.5f}")
        ok &= _check(
            details,
            stats.min_p0_minus_fprime >= -1e-12,
            f"{label}: F' <= P0 in every trial (min gap {stats.min_p0_minus_fprime:.2e})",
        )
    return CriterionResult(4, "authentication Haar averages", ok, details, time.perf_counter() - start)


def criterion_5_fidelity_recovery(seed: int = 105) -> CriterionResult:
    """Accepted-state infidelity scales like 2^-l: l = 2 vs 4 ratio near 4."""
    start = time.perf_counter()
    details: list[str] = []
    means = {}
    for l in (2, 4):
        part = QubitPartition(1, l, 1)
        chan = qcore.DepolarizingChannel(2**part.z, 0.3)
        stats = pqas.auth_sweep(qcore.basis_ket(2, 0), part, chan, trials=600, seed=seed + l)
        means[l] = stats.mean_one_minus_f
    ratio = means[2] / means[4]
    ok = _check(details, 2.5 <= ratio <= 6.5, f"mean(1-F) ratio l=2/l=4: {ratio:.3f} in [2.5, 6.5]")
    return CriterionResult(5, "fidelity recovery scaling", ok, details, time.perf_counter() - start)


def criterion_6_cpa_separation(seed: int = 106) -> CriterionResult:
    """Left-or-right game: breaks deterministic encryption, not the padded scheme."""
    start = time.perf_counter()
    details: list[str] = []
    ok = True
    left, right = attacks.standard_cpa_lists(4, 2)
    det_cfg = attacks.LRGameConfig(left=left, right=right, partition=QubitPartition(2, 0, 0), trials=500)
    det = attacks.lr_cpa_game(det_cfg, seed=seed)
    ok &= _check(details, det.success_rate >= 0.9, f"deterministic mode success {det.success_rate:.3f} >= 0.9")
    pq_cfg = attacks.LRGameConfig(left=left, right=right, partition=QubitPartition(2, 0, 4), trials=500)
    pq = attacks.lr_cpa_game(pq_cfg, seed=seed + 1)
    ok &= _check(details, pq.advantage <= 0.1, f"padded mode advantage {pq.advantage:.4f} <= 0.1")
    return CriterionResult(6, "chosen-plaintext separation", ok, details, time.perf_counter() - start)


def criterion_7_qubit_count(seed: int = 107) -> CriterionResult:
    """Bell-parity qubit-number attack works on pure-state encryption and
    abstains on the padded scheme."""
    start = time.perf_counter()
    details: list[str] = []
    ok = True
    trials = 200
    for mode_m, want in ((0, "correct"), (2, "abstain")):
        hits = 0
        for trial in range(trials):
            rng = spawn_rng(seed, "qc", mode_m, trial)
            true_s = int(rng.integers(1, 3))
            width = 2 * true_s
            psi = random_pure_state(width, rng)
            part = QubitPartition(width, 0, mode_m)
            u = sample_haar(part.z, rng)
            copies = 2 * (2 // true_s)

            def draw(r, psi=psi, part=part, u=u, copies=copies):
                return [
                    attacks._encrypt_pure(psi, part, u, int(r.integers(2**part.m)) if part.m else 0)
                    for _ in range(copies)
                ]

            rep = attacks.qubit_count_attack(draw, 2, 2, delta=0.1, shots=600, rng=rng, fixed_stream=mode_m == 0)
            if want == "correct":
                hits += int(rep.decision == true_s)
            else:
                hits += int(rep.decision is None)
        rate = hits / trials
        ok &= _check(details, rate >= 0.95, f"m={mode_m}: {want} rate {rate:.3f} >= 0.95")
    return CriterionResult(7, "qubit-number attack", ok, details, time.perf_counter() - start)


def criterion_8_vprdm(seed: int = 108) -> CriterionResult:
    """Keyed mixed states verify under their key, reject others, and match
    the random-mixed-state ensemble moment scaling."""
    start = time.perf_counter()
    details: list[str] = []
    ok = True
    spec = ScramblerSpec(mode="haar_exact")
    worst = 0.0
    count = 0
    rng = spawn_rng(seed, "vprdm-complete")
    for trial in range(100):
        n = 2 + trial % 4
        m = trial % n
        key = SecretKey.generate(rng)
        rho = primitives.vprdm_generate(primitives.VprdmParams(n, m, key), spec)
        worst = max(worst, abs(primitives.vprdm_verify(rho, key, n, m, spec) - 1.0))
        count += 1
    ok &= _check(details, worst <= 1e-9, f"completeness over {count} keys: worst |V - 1| {worst:.2e} <= 1e-9")
    n, m, wrong_trials = 4, 1, 500
    key = SecretKey.generate(rng)
    rho = primitives.vprdm_generate(primitives.VprdmParams(n, m, key), spec)
    vals = np.empty(wrong_trials)
    for i in range(wrong_trials):
        vals[i] = primitives.vprdm_verify(rho, SecretKey.generate(rng), n, m, spec)
    mean = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / np.sqrt(wrong_trials))
    target = 2.0 ** -(n - m)
    ok &= _check(
        details,
        abs(mean - target) <= 3 * stderr,
        f"wrong-key mean {mean:.4f} vs 2^-(n-m) = {target:.4f} within 3 sigma {3 * stderr:.4f}",
    )
    closeness = {n_: primitives.ghse_closeness(n_, 1, 2) for n_ in (2, 3, 4)}
    for n_ in (2, 3):
        ratio = closeness[n_ + 1] / closeness[n_]
        ok &= _check(details, 0.35 <= ratio <= 0.65, f"ensemble-moment ratio n={n_}->{n_ + 1}: {ratio:.4f}")
    return CriterionResult(8, "verifiable keyed mixed states", ok, details, time.perf_counter() - start)


def criterion_9_efi(seed: int = 109) -> CriterionResult:
    """Entropy bounds, farness certificate and noise monotonicity."""
    start = time.perf_counter()
    details: list[str] = []
    ok = True
    spec = ScramblerSpec(mode="haar_exact")
    n, m0, gamma, c, lam = 6, 1, 2 / 3, 1 / 3, 8
    base = primitives.EfiParams(n, m0, gamma, c, lam)
    reports = {0.0: primitives.efi_report(base, spec)}
    for p in (0.1, 0.25):
        noisy = primitives.EfiParams(n, m0, gamma, c, lam, noise=qcore.LocalDepolarizingChannel(n, p))
        reports[p] = primitives.efi_report(noisy, spec)
    m1 = base.m1
    for p, rep in sorted(reports.items()):
        ok &= _check(details, rep.fannes_holds(), f"p={p}: entropy-vs-distance inequality slack {rep.fannes_slack:.4f} >= 0")
        ok &= _check(
            details,
            rep.t_exact >= rep.t_lower_bound - 1e-9,
            f"p={p}: T {rep.t_exact:.4f} >= entropy lower bound {rep.t_lower_bound:.4f}",
        )
    rep0 = reports[0.0]
    ok &= _check(details, rep0.s1_bits >= m1 - 1e-9, f"S1 {rep0.s1_bits:.4f} >= m1 = {m1}")
    ok &= _check(details, rep0.s0_bits <= lam + m0 + 1e-9, f"S0 {rep0.s0_bits:.4f} <= lambda_eff + m0 = {lam + m0}")
    for p in (0.1, 0.25):
        ok &= _check(
            details,
            reports[p].t_exact <= rep0.t_exact + 1e-9,
            f"p={p}: noisy T {reports[p].t_exact:.4f} <= noiseless {rep0.t_exact:.4f}",
        )
    return CriterionResult(9, "EFI entropy and noise bounds", ok, details, time.perf_counter() - start)


def criterion_10_determinism(seed: int = 110) -> CriterionResult:
    """Same config and seed reproduce the emitted CSV byte for byte."""
    start = time.perf_counter()
    details: list[str] = []
    config = {
        "experiment": "auth-sweep",
        "n": 1,
        "l": 1,
        "m": 1,
        "trials": 120,
        "channel": {"kind": "depolarizing", "p": [0.1, 0.3]},
        "seed": seed,
    }
    first = harness.emit(harness.run(config, record_timing=False))
    second = harness.emit(harness.run(config, record_timing=False))
    ok = _check(details, first == second, "repeated run emits bitwise-identical CSV (timing column disabled)")
    wg = {"experiment": "wg-selftest", "n": [2, 3], "t": 2, "seed": seed}
    third = harness.emit(harness.run(wg, record_timing=False), fmt="json")
    fourth = harness.emit(harness.run(wg, record_timing=False), fmt="json")
    ok &= _check(details, third == fourth, "JSON emission equally deterministic")
    return CriterionResult(10, "end-to-end determinism", ok, details, time.perf_counter() - start)


ALL_CRITERIA = (
    criterion_1_completeness,
    criterion_2_closeness_scaling,
    criterion_3_weingarten,
    criterion_4_auth_averages,
    criterion_5_fidelity_recovery,
    criterion_6_cpa_separation,
    criterion_7_qubit_count,
    criterion_8_vprdm,
    criterion_9_efi,
    criterion_10_determinism,
)


def run_selftest(indices: list[int] | None = None, verbose: bool = True) -> list[CriterionResult]:
    results = []
    for i, fn in enumerate(ALL_CRITERIA, start=1):
        if indices and i not in indices:
            continue
        res = fn()
        results.append(res)
        if verbose:
            print(res.line())
            for d in res.details:
                print("    " + d)
    return results
