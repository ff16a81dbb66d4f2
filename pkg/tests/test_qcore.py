"""Core linear-algebra operations against closed-form values."""

import numpy as np
import pytest

from pqaslab import qcore
from pqaslab._streams import spawn_rng
from pqaslab.ensembles import sample_ghse, sample_haar
from pqaslab.qcore import QubitPartition


def bell_pair():
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1 / np.sqrt(2)
    return qcore.pure_dm(v)


class TestConstruction:
    def test_maximally_mixed(self):
        assert np.allclose(qcore.maximally_mixed(1), np.diag([0.5, 0.5]))
        assert qcore.maximally_mixed(0).shape == (1, 1)
        assert qcore.maximally_mixed(0)[0, 0] == 1.0
        assert qcore.purity(qcore.maximally_mixed(2)) == pytest.approx(0.25, abs=1e-14)

    def test_maximally_mixed_cap(self):
        with pytest.raises(ValueError):
            qcore.maximally_mixed(qcore.qubit_cap() + 1)

    def test_cap_env_override(self, monkeypatch):
        monkeypatch.setenv("PQASLAB_CAP", "3")
        assert qcore.qubit_cap() == 3
        with pytest.raises(ValueError):
            qcore.check_qubits(4)

    def test_tensor(self):
        zero = qcore.pure_dm(qcore.basis_ket(2, 0))
        prod = qcore.tensor(zero, qcore.maximally_mixed(1))
        assert np.allclose(prod, np.diag([0.5, 0.5, 0, 0]))
        rho = sample_ghse(2, 1, spawn_rng(0, "tensor"))
        assert np.allclose(qcore.tensor(rho, qcore.maximally_mixed(0)), rho)
        other = sample_ghse(1, 1, spawn_rng(1, "tensor"))
        assert np.trace(qcore.tensor(rho, other)).real == pytest.approx(1.0, abs=1e-12)

    def test_partition_validation(self):
        with pytest.raises(ValueError):
            QubitPartition(0, 1, 1)
        with pytest.raises(ValueError):
            QubitPartition(1, -1, 0)
        with pytest.raises(ValueError):
            QubitPartition(8, 2, 2)  # exceeds default cap of 10
        assert QubitPartition(2, 3, 1).z == 6

    def test_density_checks(self):
        qcore.check_density_matrix(qcore.maximally_mixed(2))
        with pytest.raises(ValueError):
            qcore.check_density_matrix(np.eye(2, dtype=complex))  # trace 2
        bad = np.array([[0.5, 0.3], [0.2, 0.5]], dtype=complex)
        with pytest.raises(ValueError):
            qcore.check_density_matrix(bad)  # not Hermitian

    def test_unitary_check(self):
        qcore.check_unitary(sample_haar(2, spawn_rng(0, "unitary")))
        with pytest.raises(ValueError):
            qcore.check_unitary(np.ones((2, 2), dtype=complex))


class TestRegisterSurgery:
    def test_partial_trace_bell(self):
        reduced = qcore.partial_trace(bell_pair(), [2, 2], {1})
        assert np.allclose(reduced, qcore.maximally_mixed(1), atol=1e-12)

    def test_partial_trace_product(self):
        rng = spawn_rng(2, "ptrace")
        a = sample_ghse(2, 1, rng)
        b = sample_ghse(1, 1, rng)
        joint = qcore.tensor(a, b)
        assert np.allclose(qcore.partial_trace(joint, [4, 2], {1}), a, atol=1e-12)
        assert np.allclose(qcore.partial_trace(joint, [4, 2], {0}), b, atol=1e-12)

    def test_partial_trace_identity(self):
        rho = sample_ghse(2, 2, spawn_rng(3, "ptrace"))
        assert np.allclose(qcore.partial_trace(rho, [4], set()), rho)

    def test_partial_trace_preserves_trace(self):
        rho = sample_ghse(3, 2, spawn_rng(4, "ptrace"))
        reduced = qcore.partial_trace(rho, [2, 2, 2], {0, 2})
        assert np.trace(reduced).real == pytest.approx(1.0, abs=1e-12)

    def test_partial_trace_bad_layout(self):
        with pytest.raises(ValueError):
            qcore.partial_trace(qcore.maximally_mixed(2), [2, 4], {0})

    def test_permute_registers(self):
        rng = spawn_rng(5, "permute")
        a = sample_ghse(1, 1, rng)
        b = sample_ghse(2, 1, rng)
        joint = qcore.tensor(a, b)
        swapped = qcore.permute_registers(joint, [2, 4], [1, 0])
        assert np.allclose(swapped, qcore.tensor(b, a), atol=1e-12)
        back = qcore.permute_registers(swapped, [4, 2], [1, 0])
        assert np.allclose(back, joint, atol=1e-12)


class TestDynamics:
    def test_apply_unitary_identity(self):
        rho = sample_ghse(2, 1, spawn_rng(6, "apply"))
        assert np.allclose(qcore.apply_unitary(rho, np.eye(4)), rho)

    def test_unitary_preserves_spectrum(self):
        rng = spawn_rng(7, "apply")
        rho = sample_ghse(2, 2, rng)
        u = sample_haar(2, rng)
        out = qcore.apply_unitary(rho, u)
        assert qcore.purity(out) == pytest.approx(qcore.purity(rho), abs=1e-10)
        assert np.allclose(
            np.sort(np.linalg.eigvalsh(out)), np.sort(np.linalg.eigvalsh(rho)), atol=1e-9
        )

    def test_full_depolarizing(self):
        rho = sample_ghse(2, 1, spawn_rng(8, "chan"))
        out = qcore.apply_channel(rho, qcore.DepolarizingChannel(4, 1.0))
        assert np.allclose(out, np.eye(4) / 4, atol=1e-12)

    def test_channel_trace_preserving(self):
        rng = spawn_rng(9, "chan")
        rho = sample_ghse(2, 2, rng)
        channels = [
            qcore.IdentityChannel(4),
            qcore.DepolarizingChannel(4, 0.3),
            qcore.LocalDepolarizingChannel(2, 0.2),
            qcore.UnitaryChannel(sample_haar(2, rng)),
        ]
        for chan in channels:
            out = qcore.apply_channel(rho, chan)
            assert np.trace(out).real == pytest.approx(1.0, abs=1e-10)
            qcore.check_density_matrix(out)

    def test_kraus_cptp_check(self):
        with pytest.raises(ValueError):
            qcore.KrausChannel([np.eye(2) * 0.5])

    def test_project(self):
        rho = qcore.maximally_mixed(1)
        prob, post = qcore.project(rho, np.eye(2))
        assert prob == pytest.approx(1.0)
        assert np.allclose(post, rho)
        proj0 = qcore.pure_dm(qcore.basis_ket(2, 0))
        prob, post = qcore.project(rho, proj0)
        assert prob == pytest.approx(0.5)
        assert np.allclose(post, proj0)
        prob, post = qcore.project(proj0, qcore.pure_dm(qcore.basis_ket(2, 1)))
        assert post is None and prob == 0.0

    def test_project_rejects_non_idempotent(self):
        with pytest.raises(ValueError):
            qcore.project(qcore.maximally_mixed(1), 0.5 * np.eye(2))


class TestMetrics:
    def test_closed_forms(self):
        zero = qcore.pure_dm(qcore.basis_ket(2, 0))
        assert qcore.trace_distance(zero, qcore.maximally_mixed(1)) == pytest.approx(0.5, abs=1e-12)
        for m in (1, 2, 3):
            assert qcore.vn_entropy_bits(qcore.maximally_mixed(m)) == pytest.approx(m, abs=1e-10)
            assert qcore.purity(qcore.maximally_mixed(m)) == pytest.approx(2.0**-m, abs=1e-12)

    def test_fidelity_with_pure(self):
        psi = qcore.basis_ket(2, 0)
        assert qcore.fidelity_with_pure(qcore.pure_dm(psi), psi) == pytest.approx(1.0)
        assert qcore.fidelity_with_pure(qcore.maximally_mixed(1), psi) == pytest.approx(0.5)

    def test_swap_test_values(self):
        psi = qcore.pure_dm(qcore.basis_ket(2, 0))
        phi = qcore.pure_dm(qcore.basis_ket(2, 1))
        assert qcore.swap_test_accept(psi, psi) == pytest.approx(1.0)
        assert qcore.swap_test_accept(psi, phi) == pytest.approx(0.5)
        mm = qcore.maximally_mixed(1)
        assert qcore.swap_test_accept(mm, mm) == pytest.approx(0.75)

    def test_swap_test_purity_identity(self):
        rng = spawn_rng(10, "swap")
        for _ in range(20):
            rho = sample_ghse(2, 1, rng)
            assert qcore.swap_test_accept(rho, rho) == pytest.approx(
                0.5 * (1 + qcore.purity(rho)), abs=1e-12
            )

    def test_trace_distance_triangle(self):
        rng = spawn_rng(11, "triangle")
        for _ in range(25):
            a, b, c = (sample_ghse(2, 2, rng) for _ in range(3))
            assert qcore.trace_distance(a, c) <= (
                qcore.trace_distance(a, b) + qcore.trace_distance(b, c) + 1e-9
            )

    def test_trace_distance_contracts_under_channels(self):
        rng = spawn_rng(12, "monotone")
        for p in (0.2, 0.5, 0.9):
            chan = qcore.DepolarizingChannel(4, p)
            local = qcore.LocalDepolarizingChannel(2, p)
            for _ in range(10):
                a = sample_ghse(2, 2, rng)
                b = sample_ghse(2, 1, rng)
                before = qcore.trace_distance(a, b)
                for c in (chan, local):
                    after = qcore.trace_distance(qcore.apply_channel(a, c), qcore.apply_channel(b, c))
                    assert after <= before + 1e-9


class TestStructuredChannels:
    """Structured channels agree with their explicit Kraus materializations."""

    def _pauli_ops(self):
        eye = np.eye(2)
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        y = np.array([[0, -1j], [1j, 0]])
        z = np.diag([1.0, -1.0]).astype(complex)
        return [eye, x, y, z]

    def test_global_depolarizing_kraus(self):
        p = 0.37
        d = 4
        paulis = self._pauli_ops()
        ops = []
        for a in paulis:
            for b in paulis:
                pw = np.kron(a, b)
                weight = 1 - p + p / d**2 if np.allclose(pw, np.eye(d)) else p / d**2
                ops.append(np.sqrt(weight) * pw)
        explicit = qcore.KrausChannel(ops)
        structured = qcore.DepolarizingChannel(d, p)
        rho = sample_ghse(2, 1, spawn_rng(13, "kraus"))
        assert np.allclose(explicit.apply(rho), structured.apply(rho), atol=1e-12)
        assert explicit.kraus_trace_square_sum() == pytest.approx(
            structured.kraus_trace_square_sum(), rel=1e-12
        )

    def test_local_depolarizing_kraus(self):
        p = 0.41
        paulis = self._pauli_ops()
        weights = [1 - 0.75 * p, 0.25 * p, 0.25 * p, 0.25 * p]
        ops = []
        for i, a in enumerate(paulis):
            for j, b in enumerate(paulis):
                ops.append(np.sqrt(weights[i] * weights[j]) * np.kron(a, b))
        explicit = qcore.KrausChannel(ops)
        structured = qcore.LocalDepolarizingChannel(2, p)
        rho = sample_ghse(2, 2, spawn_rng(14, "kraus"))
        assert np.allclose(explicit.apply(rho), structured.apply(rho), atol=1e-12)
        assert explicit.kraus_trace_square_sum() == pytest.approx(
            structured.kraus_trace_square_sum(), rel=1e-12
        )

    def test_apply_left_matches_big_kron(self):
        rng = spawn_rng(15, "left")
        mat = sample_ghse(3, 1, rng)  # 8-dim operator, left factor 4-dim
        for chan in (
            qcore.DepolarizingChannel(4, 0.3),
            qcore.LocalDepolarizingChannel(2, 0.3),
            qcore.UnitaryChannel(sample_haar(2, rng)),
            qcore.IdentityChannel(4),
        ):
            got = chan.apply_left(mat, 2)
            if isinstance(chan, qcore.DepolarizingChannel):
                expect = (1 - 0.3) * mat + 0.3 * np.kron(np.eye(4) / 4, qcore.partial_trace(mat, [4, 2], {0}))
                assert np.allclose(got, expect, atol=1e-12)
            assert np.trace(got).real == pytest.approx(np.trace(mat).real, abs=1e-10)

    def test_mixed_unitary_probabilities(self):
        probs = qcore.DepolarizingChannel(4, 0.5).mixed_unitary_probabilities()
        assert probs is not None and probs.sum() == pytest.approx(1.0)
        local = qcore.LocalDepolarizingChannel(2, 0.5).mixed_unitary_probabilities()
        assert local is not None and local.sum() == pytest.approx(1.0) and len(local) == 16
        # amplitude damping is not mixed-unitary
        k0 = np.array([[1, 0], [0, np.sqrt(0.5)]], dtype=complex)
        k1 = np.array([[0, np.sqrt(0.5)], [0, 0]], dtype=complex)
        assert qcore.KrausChannel([k0, k1]).mixed_unitary_probabilities() is None

    def test_mixture_channel(self):
        rng = spawn_rng(16, "mix")
        rho = sample_ghse(2, 1, rng)
        a = qcore.DepolarizingChannel(4, 0.2)
        b = qcore.UnitaryChannel(sample_haar(2, rng))
        mix = qcore.MixtureChannel([0.3, 0.7], [a, b])
        expect = 0.3 * a.apply(rho) + 0.7 * b.apply(rho)
        assert np.allclose(mix.apply(rho), expect, atol=1e-12)
