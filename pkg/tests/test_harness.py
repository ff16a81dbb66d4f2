"""Config validation, experiment dispatch, serialization and determinism."""

import json

import pytest

from pqaslab import harness
from pqaslab.harness import ConfigError, ResultRecord


class TestConfig:
    def test_unknown_experiment(self):
        with pytest.raises(ConfigError) as err:
            harness.validate_config({"experiment": "nope"})
        assert err.value.field == "experiment"

    def test_invalid_n(self):
        with pytest.raises(ConfigError) as err:
            harness.validate_config({"experiment": "cpa", "n": 0})
        assert err.value.field == "n"

    def test_unknown_field(self):
        with pytest.raises(ConfigError) as err:
            harness.validate_config({"experiment": "cpa", "bogus": 1})
        assert err.value.field == "bogus"

    def test_channel_must_have_kind(self):
        with pytest.raises(ConfigError) as err:
            harness.validate_config({"experiment": "auth-sweep", "channel": {}})
        assert err.value.field == "channel"

    def test_sweep_expansion(self):
        cfg = harness.validate_config(
            {
                "experiment": "wg-selftest",
                "n": [2, 3],
                "t": [1, 2],
                "channel": {"kind": "depolarizing", "p": [0.1, 0.2]},
            }
        )
        points = harness.expand_points(cfg)
        assert len(points) == 2 * 2 * 2
        assert len({(p.n, p.t, p.channel_p) for p in points}) == 8

    def test_point_seed_distinct_and_stable(self):
        cfg = harness.validate_config({"experiment": "wg-selftest", "n": [2, 3], "seed": 5})
        points = harness.expand_points(cfg)
        seeds = [harness.point_seed(p) for p in points]
        assert len(set(seeds)) == len(seeds)
        assert seeds == [harness.point_seed(p) for p in harness.expand_points(cfg)]


class TestEmit:
    def _record(self):
        return ResultRecord(
            experiment="wg-selftest",
            n=2,
            l=0,
            m=0,
            t=2,
            trials=1,
            mode="haar_exact",
            channel="",
            estimate=harness._round12(0.0833333333333),
            stderr=0.0,
            exact=harness._round12(1 / 12),
            prediction=None,
            seed=12345,
            wall_ms=None,
        )

    def test_csv_header_and_roundtrip(self):
        rec = self._record()
        text = harness.emit([rec])
        lines = text.strip().split("\n")
        assert lines[0] == harness.CSV_HEADER
        assert len(lines) == 2
        parsed = harness.parse_csv(text)
        assert parsed == [rec]

    def test_prediction_column_empty(self):
        text = harness.emit([self._record()])
        row = text.strip().split("\n")[1].split(",")
        assert row[11] == ""

    def test_json_mirrors_fields(self):
        rec = self._record()
        payload = json.loads(harness.emit([rec], fmt="json"))
        assert payload[0]["experiment"] == "wg-selftest"
        assert payload[0]["exact"] == pytest.approx(1 / 12, rel=1e-11)

    def test_twelve_significant_digits(self):
        val = 0.123456789012345
        assert harness._fmt(harness._round12(val)) == "0.123456789012"

    def test_empty_emit_rejected(self):
        with pytest.raises(ValueError):
            harness.emit([])


class TestRun:
    def test_wg_selftest_exact(self):
        records = harness.run({"experiment": "wg-selftest", "n": [2, 3, 4], "t": [1, 2, 3, 4]})
        assert len(records) == 12
        for r in records:
            assert r.estimate == pytest.approx(r.exact, abs=1e-12)

    def test_determinism_without_timing(self):
        cfg = {"experiment": "vprdm", "n": 3, "m": 1, "t": 2, "trials": 50, "seed": 9}
        a = harness.emit(harness.run(cfg, record_timing=False))
        b = harness.emit(harness.run(cfg, record_timing=False))
        assert a == b

    def test_seed_changes_results(self):
        cfg = {"experiment": "vprdm", "n": 3, "m": 1, "t": 2, "trials": 50}
        a = harness.emit(harness.run(cfg, seed_override=1, record_timing=False))
        b = harness.emit(harness.run(cfg, seed_override=2, record_timing=False))
        assert a != b

    def test_threads_equivalent(self):
        cfg = {"experiment": "wg-selftest", "n": [2, 3], "t": [1, 2]}
        a = harness.emit(harness.run(cfg, threads=1, record_timing=False))
        b = harness.emit(harness.run(cfg, threads=3, record_timing=False))
        assert a == b

    def test_security_scan_smoke(self):
        records = harness.run(
            {"experiment": "security-scan", "n": 1, "l": 1, "m": 1, "t": 2, "trials": 100},
            record_timing=False,
        )
        (rec,) = records
        assert rec.exact is not None
        assert rec.estimate is not None

    def test_auth_sweep_smoke(self):
        records = harness.run(
            {
                "experiment": "auth-sweep",
                "n": 1,
                "l": 1,
                "m": 1,
                "trials": 100,
                "channel": {"kind": "depolarizing", "p": 0.3},
            },
            record_timing=False,
        )
        names = {r.experiment for r in records}
        assert names == {"auth-sweep:p0", "auth-sweep:fprime", "auth-sweep:fidelity"}
        p0 = next(r for r in records if r.experiment == "auth-sweep:p0")
        assert p0.exact is not None and p0.prediction is not None
        assert abs(p0.estimate - p0.exact) <= 3 * p0.stderr + 1e-9

    def test_cpa_smoke(self):
        records = harness.run(
            {"experiment": "cpa", "n": 2, "m": 0, "t": 4, "trials": 120}, record_timing=False
        )
        success = next(r for r in records if r.experiment == "cpa:success")
        assert success.estimate >= 0.85

    def test_decoy_smoke(self):
        records = harness.run(
            {"experiment": "decoy", "n": 1, "l": 1, "m": 2, "t": 2}, record_timing=False
        )
        dist = next(r for r in records if r.experiment == "decoy:distance")
        assert dist.estimate == pytest.approx(dist.exact, abs=1e-12)

    def test_multistate_smoke(self):
        records = harness.run(
            {"experiment": "multistate", "n": 1, "m": 0, "copies": 8, "trials": 60},
            record_timing=False,
        )
        acc = next(r for r in records if r.experiment == "multistate:accuracy")
        assert acc.estimate >= 0.9

    def test_qubit_count_smoke(self):
        records = harness.run(
            {"experiment": "qubit-count", "n": 2, "s_max": 2, "m": 0, "trials": 10, "shots": 300},
            record_timing=False,
        )
        correct = next(r for r in records if r.experiment == "qubit-count:correct")
        assert correct.estimate == pytest.approx(1.0)

    def test_efi_smoke(self):
        records = harness.run(
            {
                "experiment": "efi",
                "n": 5,
                "m0": 1,
                "gamma": 0.7,
                "c": 0.3,
                "lambda_eff": 4,
                "channel": {"kind": "local_depolarizing", "p": [0.0, 0.1]},
            },
            record_timing=False,
        )
        dists = [r for r in records if r.experiment == "efi:trace-distance"]
        assert len(dists) == 2
        noiseless = next(r for r in dists if "p=0)" in r.channel)
        noisy = next(r for r in dists if "p=0.1" in r.channel)
        assert noisy.estimate <= noiseless.estimate + 1e-9

    def test_bad_config_raises(self):
        with pytest.raises(ConfigError):
            harness.run({"experiment": "auth-sweep", "trials": 0})
