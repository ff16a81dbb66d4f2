"""Experiment configuration, dispatch, and results persistence.

A run is described by one flat JSON document.  Any numeric field may be a
list, in which case the run expands to the Cartesian product of all swept
fields.  Every expanded point gets its own derived seed
(keyed hash of master seed, experiment name, parameter tuple), so records
are reproducible independently of sweep order or thread count.
"""

from __future__ import annotations

import itertools
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import attacks, moments, pqas, primitives, qcore
from ._streams import derive_bytes, spawn_rng
from .ensembles import ScramblerSpec, SecretKey, random_pure_state, sample_haar
from .qcore import QubitPartition


class ConfigError(ValueError):
    """Invalid experiment configuration; carries the offending field name."""

    def __init__(self, field: str, message: str):
        super().__init__(f"config field '{field}': {message}")
        self.field = field


EXPERIMENTS = (
    "wg-selftest",
    "security-scan",
    "auth-sweep",
    "cpa",
    "qubit-count",
    "multistate",
    "decoy",
    "vprdm",
    "efi",
)

_DEFAULTS = {
    "n": 1,
    "l": 0,
    "m": 0,
    "t": 1,
    "q": 0,
    "trials": 100,
    "shots": 800,
    "mode": "haar_exact",
    "channel": {"kind": "identity"},
    "seed": 0,
    "s_max": 2,
    "delta": 0.1,
    "copies": 12,
    "m0": 1,
    "gamma": 0.67,
    "c": 0.33,
    "lambda_eff": 6,
}

_SWEEPABLE = ("n", "l", "m", "t", "q", "trials", "shots", "s_max", "m0", "lambda_eff", "copies")


@dataclass(frozen=True)
class ExperimentPoint:
    """One fully expanded parameter point."""

    experiment: str
    n: int
    l: int
    m: int
    t: int
    q: int
    trials: int
    shots: int
    mode: str
    channel_kind: str
    channel_p: float
    seed: int
    s_max: int
    delta: float
    copies: int
    m0: int
    gamma: float
    c: float
    lambda_eff: int


@dataclass
class ResultRecord:
    experiment: str
    n: int
    l: int
    m: int
    t: int
    trials: int
    mode: str
    channel: str
    estimate: float | None
    stderr: float | None
    exact: float | None
    prediction: float | None
    seed: int
    wall_ms: int | None


CSV_HEADER = "experiment,n,l,m,t,trials,mode,channel,estimate,stderr,exact,prediction,seed,wall_ms"


def _round12(x: float | None) -> float | None:
    if x is None:
        return None
    return float(f"{float(x):.12g}")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


# ---------------------------------------------------------------------------
# config handling


def load_config(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def validate_config(config: dict) -> dict:
    known = set(_DEFAULTS) | {"experiment"}
    for key in config:
        if key not in known:
            raise ConfigError(key, "unknown configuration field")
    cfg = dict(_DEFAULTS)
    cfg.update(config)
    name = cfg.get("experiment")
    if name not in EXPERIMENTS:
        raise ConfigError("experiment", f"unknown experiment {name!r}; choose from {EXPERIMENTS}")
    for field in ("trials", "shots"):
        vals = cfg[field] if isinstance(cfg[field], list) else [cfg[field]]
        if any(v < 1 for v in vals):
            raise ConfigError(field, "must be at least 1")
    for field in ("n", "t"):
        vals = cfg[field] if isinstance(cfg[field], list) else [cfg[field]]
        if any(v < 1 for v in vals):
            raise ConfigError(field, "must be at least 1")
    for field in ("l", "m", "q"):
        vals = cfg[field] if isinstance(cfg[field], list) else [cfg[field]]
        if any(v < 0 for v in vals):
            raise ConfigError(field, "must be nonnegative")
    chan = cfg["channel"]
    if not isinstance(chan, dict) or "kind" not in chan:
        raise ConfigError("channel", "must be an object with a 'kind'")
    return cfg


def expand_points(cfg: dict, seed_override: int | None = None) -> list[ExperimentPoint]:
    sweeps = {}
    for field in _SWEEPABLE:
        val = cfg[field]
        sweeps[field] = list(val) if isinstance(val, list) else [val]
    chan = cfg["channel"]
    pvals = chan.get("p", 0.0)
    pvals = list(pvals) if isinstance(pvals, list) else [pvals]
    seed = seed_override if seed_override is not None else int(cfg["seed"])
    points = []
    keys = list(sweeps)
    for combo in itertools.product(*(sweeps[k] for k in keys)):
        base = dict(zip(keys, combo))
        for p in pvals:
            points.append(
                ExperimentPoint(
                    experiment=cfg["experiment"],
                    mode=cfg["mode"],
                    channel_kind=chan["kind"],
                    channel_p=float(p),
                    seed=seed,
                    delta=float(cfg["delta"]),
                    gamma=float(cfg["gamma"]),
                    c=float(cfg["c"]),
                    **base,
                )
            )
    return points


def point_seed(pt: ExperimentPoint) -> int:
    """Derived per-point stream seed; independent of sweep order."""
    digest = derive_bytes(
        None,
        pt.seed,
        pt.experiment,
        (pt.n, pt.l, pt.m, pt.t, pt.q, pt.trials, pt.shots, pt.mode, pt.channel_kind,
         str(pt.channel_p), pt.s_max, str(pt.delta), pt.copies, pt.m0,
         str(pt.gamma), str(pt.c), pt.lambda_eff),
        n=8,
    )
    return int.from_bytes(digest, "big") >> 1


def build_channel(kind: str, p: float, dim: int) -> qcore.Channel:
    if kind == "identity":
        return qcore.IdentityChannel(dim)
    if kind == "depolarizing":
        return qcore.DepolarizingChannel(dim, p)
    if kind == "local_depolarizing":
        return qcore.LocalDepolarizingChannel(int(round(np.log2(dim))), p)
    if kind == "random_unitary":
        rng = spawn_rng(0, "tamper-unitary", dim)
        from .ensembles import sample_haar

        return qcore.UnitaryChannel(sample_haar(int(round(np.log2(dim))), rng))
    raise ConfigError("channel", f"unknown channel kind {kind!r}")


def channel_label(kind: str, p: float) -> str:
    if kind in ("identity", "random_unitary"):
        return kind
    return f"{kind}(p={p:g})"


# ---------------------------------------------------------------------------
# experiment implementations


def _metric(pt, suffix, estimate, stderr=None, exact=None, prediction=None, channel=""):
    return ResultRecord(
        experiment=f"{pt.experiment}:{suffix}" if suffix else pt.experiment,
        n=pt.n,
        l=pt.l,
        m=pt.m,
        t=pt.t,
        trials=pt.trials,
        mode=pt.mode,
        channel=channel,
        estimate=_round12(estimate),
        stderr=_round12(stderr),
        exact=_round12(exact),
        prediction=_round12(prediction),
        seed=point_seed(pt),
        wall_ms=None,
    )


def _run_wg_selftest(pt: ExperimentPoint) -> list[ResultRecord]:
    d = 2**pt.n
    est = moments.sum_abs_weingarten(pt.t, d)
    exact = moments.sum_abs_weingarten_exact(pt.t, d)
    return [_metric(pt, "", est, stderr=0.0, exact=exact, prediction=exact)]


def _run_security_scan(pt: ExperimentPoint) -> list[ResultRecord]:
    part = QubitPartition(pt.n, pt.l, pt.m)
    seed = point_seed(pt)
    if pt.q == 0:
        rho = qcore.pure_dm(qcore.basis_ket(2**pt.n, 0))
        rep = pqas.security_scan(part, pt.t, 0, pt.trials, seed=seed, rho=rho, mode=pt.mode)
    else:
        qubits = pt.t * pt.n + pt.q
        ghz = (qcore.basis_ket(2**qubits, 0) + qcore.basis_ket(2**qubits, 2**qubits - 1)) / np.sqrt(2)
        rep = pqas.security_scan(part, pt.t, pt.q, pt.trials, seed=seed, rho_g=qcore.pure_dm(ghz), mode=pt.mode)
    return [_metric(pt, "", rep.estimate, stderr=rep.stderr, exact=rep.exact)]


def _run_auth_sweep(pt: ExperimentPoint) -> list[ResultRecord]:
    part = QubitPartition(pt.n, pt.l, pt.m)
    chan = build_channel(pt.channel_kind, pt.channel_p, 2**part.z)
    label = channel_label(pt.channel_kind, pt.channel_p)
    seed = point_seed(pt)
    psi = qcore.basis_ket(2**pt.n, 0)
    stats = pqas.auth_sweep(psi, part, chan, pt.trials, mode=pt.mode, seed=seed)
    oracle_ok = 2 ** (2 * part.z) <= moments.MAX_MOMENT_DIM
    exact_p0 = pqas.exact_haar_p0(part, chan, psi) if oracle_ok else None
    exact_fp = pqas.exact_haar_fprime(part, chan, psi) if oracle_ok else None
    return [
        _metric(pt, "p0", stats.mean_p0, stats.stderr_p0, exact_p0, stats.predicted_p0, label),
        _metric(pt, "fprime", stats.mean_fprime, stats.stderr_fprime, exact_fp, stats.predicted_fprime, label),
        _metric(pt, "fidelity", stats.mean_fidelity, stats.stderr_fidelity, None, None, label),
    ]


def _run_cpa(pt: ExperimentPoint) -> list[ResultRecord]:
    part = QubitPartition(pt.n, pt.l, pt.m)
    left, right = attacks.standard_cpa_lists(pt.t, pt.n)
    cfg = attacks.LRGameConfig(left=left, right=right, partition=part, trials=pt.trials, mode=pt.mode)
    rep = attacks.lr_cpa_game(cfg, seed=point_seed(pt))
    return [
        _metric(pt, "success", rep.success_rate, stderr=None),
        _metric(pt, "advantage", rep.advantage, stderr=rep.standard_error),
    ]


def _run_qubit_count(pt: ExperimentPoint) -> list[ResultRecord]:
    seed = point_seed(pt)
    correct = 0
    abstain = 0
    for trial in range(pt.trials):
        rng = spawn_rng(seed, "qubit-count", trial)
        true_s = int(rng.integers(1, pt.s_max + 1))
        stream = _qubit_count_stream(pt, true_s, rng)
        rep = attacks.qubit_count_attack(
            stream, pt.n, pt.s_max, delta=pt.delta, shots=pt.shots, rng=rng, fixed_stream=pt.m == 0
        )
        if rep.decision is None:
            abstain += 1
        elif rep.decision == true_s:
            correct += 1
    return [
        _metric(pt, "correct", correct / pt.trials),
        _metric(pt, "abstain", abstain / pt.trials),
    ]


def _qubit_count_stream(pt: ExperimentPoint, true_s: int, rng: np.random.Generator):
    """Interception sampler: 2 s_max!/s copies of the scrambled message."""
    from .ensembles import random_pure_state, sample_haar

    width = pt.n * true_s
    psi = random_pure_state(width, rng)
    part = QubitPartition(width, pt.l, pt.m)
    u = sample_haar(part.z, rng)
    n_copies = 2 * (_factorial(pt.s_max) // true_s)

    def draw(r: np.random.Generator):
        return [attacks._encrypt_pure(psi, part, u, int(r.integers(2**pt.m)) if pt.m else 0) for _ in range(n_copies)]

    return draw


def _factorial(k: int) -> int:
    out = 1
    for j in range(2, k + 1):
        out *= j
    return out


def _run_multistate(pt: ExperimentPoint) -> list[ResultRecord]:
    part = QubitPartition(pt.n, pt.l, pt.m)
    seed = point_seed(pt)
    spec = ScramblerSpec(mode=pt.mode)
    correct = 0
    for trial in range(pt.trials):
        rng = spawn_rng(seed, "multistate", trial)
        b = int(rng.integers(1, 3))
        key = SecretKey.generate(rng)
        states = []
        for i in range(pt.copies):
            idx = 0 if b == 1 else i % 2
            states.append(pqas.encrypt(qcore.basis_ket(2**pt.n, idx), key, part, spec))
        guess = attacks.multi_state_attack(states, rng)
        correct += int(guess == b)
    accuracy = correct / pt.trials
    return [
        _metric(pt, "accuracy", accuracy),
        _metric(pt, "advantage", abs(2 * accuracy - 1)),
    ]


def _run_decoy(pt: ExperimentPoint) -> list[ResultRecord]:
    part = QubitPartition(pt.n, pt.l, pt.m)
    dist = attacks.decoy_indistinguishability(part, pt.t)
    exact = 0.5 * moments.closeness_exact(part, qcore.pure_dm(qcore.basis_ket(2**pt.n, 0)), pt.t)
    # meta-information probe: entanglement entropy across the ciphertext midpoint
    rng = spawn_rng(point_seed(pt), "decoy-probe")
    key = SecretKey.generate(rng)
    ct = pqas.encrypt(qcore.basis_ket(2**pt.n, 0), key, part, ScramblerSpec(mode=pt.mode))
    cut = part.z // 2
    reduced = qcore.partial_trace(ct.state, [2**cut, 2 ** (part.z - cut)], {1})
    entropy = qcore.vn_entropy_bits(reduced)
    return [
        _metric(pt, "distance", dist, exact=exact),
        _metric(pt, "cut-entropy", entropy),
    ]


def _run_vprdm(pt: ExperimentPoint) -> list[ResultRecord]:
    seed = point_seed(pt)
    spec = ScramblerSpec(mode=pt.mode)
    completeness = []
    wrong = []
    for trial in range(pt.trials):
        rng = spawn_rng(seed, "vprdm", trial)
        key = SecretKey.generate(rng)
        rho = primitives.vprdm_generate(primitives.VprdmParams(pt.n, pt.m, key), spec)
        completeness.append(primitives.vprdm_verify(rho, key, pt.n, pt.m, spec))
        wrong.append(primitives.vprdm_verify(rho, SecretKey.generate(rng), pt.n, pt.m, spec))
    wrong = np.array(wrong)
    ghse = primitives.ghse_closeness(pt.n, pt.m, pt.t) if 2 ** (pt.n * pt.t) <= moments.MAX_MOMENT_DIM else None
    return [
        _metric(pt, "completeness", float(np.mean(completeness)), exact=1.0),
        _metric(
            pt,
            "wrong-key",
            float(np.mean(wrong)),
            stderr=float(np.std(wrong, ddof=1) / np.sqrt(len(wrong))),
            prediction=2.0 ** -(pt.n - pt.m),
        ),
        _metric(pt, "ghse-closeness", ghse, exact=ghse),
    ]


def _run_efi(pt: ExperimentPoint) -> list[ResultRecord]:
    spec = ScramblerSpec(mode=pt.mode)
    noise = None
    if pt.channel_kind != "identity":
        noise = build_channel(pt.channel_kind, pt.channel_p, 2**pt.n)
    params = primitives.EfiParams(pt.n, pt.m0, pt.gamma, pt.c, pt.lambda_eff, noise=noise)
    label = channel_label(pt.channel_kind, pt.channel_p)
    rep = primitives.efi_report(params, spec)
    return [
        _metric(pt, "s0-bits", rep.s0_bits, channel=label),
        _metric(pt, "s1-bits", rep.s1_bits, channel=label),
        _metric(pt, "trace-distance", rep.t_exact, channel=label),
        _metric(pt, "farness-bound", rep.t_lower_bound, channel=label),
    ]


_RUNNERS = {
    "wg-selftest": _run_wg_selftest,
    "security-scan": _run_security_scan,
    "auth-sweep": _run_auth_sweep,
    "cpa": _run_cpa,
    "qubit-count": _run_qubit_count,
    "multistate": _run_multistate,
    "decoy": _run_decoy,
    "vprdm": _run_vprdm,
    "efi": _run_efi,
}


# ---------------------------------------------------------------------------
# run / emit


def run(config: dict, seed_override: int | None = None, threads: int = 1, record_timing: bool = True) -> list[ResultRecord]:
    """Execute a validated config; deterministic given (config, seed).

    Record wall times are telemetry and are only attached when
    ``record_timing`` is set; determinism comparisons must disable it.
    """
    cfg = validate_config(config)
    points = expand_points(cfg, seed_override)

    def work(pt: ExperimentPoint) -> list[ResultRecord]:
        start = time.perf_counter()
        records = _RUNNERS[pt.experiment](pt)
        elapsed = int(1000 * (time.perf_counter() - start))
        if record_timing:
            for r in records:
                r.wall_ms = elapsed
        return records

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(work, points))
    else:
        chunks = [work(pt) for pt in points]
    records = [r for chunk in chunks for r in chunk]
    records.sort(key=lambda r: (r.experiment, r.n, r.l, r.m, r.t, r.channel, r.trials))
    return records


def emit(records: list[ResultRecord], fmt: str = "csv", path: str | None = None) -> str:
    """Serialize records; returns the text and optionally writes it."""
    if not records:
        raise ValueError("no records to emit")
    if fmt == "csv":
        lines = [CSV_HEADER]
        for r in records:
            lines.append(
                ",".join(
                    _fmt(v)
                    for v in (
                        r.experiment, r.n, r.l, r.m, r.t, r.trials, r.mode, r.channel,
                        r.estimate, r.stderr, r.exact, r.prediction, r.seed, r.wall_ms,
                    )
                )
            )
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        payload = []
        for r in records:
            payload.append(
                {
                    "experiment": r.experiment,
                    "n": r.n,
                    "l": r.l,
                    "m": r.m,
                    "t": r.t,
                    "trials": r.trials,
                    "mode": r.mode,
                    "channel": r.channel,
                    "estimate": _round12(r.estimate),
                    "stderr": _round12(r.stderr),
                    "exact": _round12(r.exact),
                    "prediction": _round12(r.prediction),
                    "seed": r.seed,
                    "wall_ms": r.wall_ms,
                }
            )
        text = json.dumps(payload, indent=2) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def parse_csv(text: str) -> list[ResultRecord]:
    lines = [ln for ln in text.strip().split("\n") if ln]
    if lines[0] != CSV_HEADER:
        raise ValueError("unexpected CSV header")
    out = []
    for ln in lines[1:]:
        cells = ln.split(",")
        out.append(
            ResultRecord(
                experiment=cells[0],
                n=int(cells[1]),
                l=int(cells[2]),
                m=int(cells[3]),
                t=int(cells[4]),
                trials=int(cells[5]),
                mode=cells[6],
                channel=cells[7],
                estimate=float(cells[8]) if cells[8] else None,
                stderr=float(cells[9]) if cells[9] else None,
                exact=float(cells[10]) if cells[10] else None,
                prediction=float(cells[11]) if cells[11] else None,
                seed=int(cells[12]),
                wall_ms=int(cells[13]) if cells[13] else None,
            )
        )
    return out
