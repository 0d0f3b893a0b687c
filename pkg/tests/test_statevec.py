import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ghzauth import statevec as sv
from ghzauth.errors import InvalidArgument
from ghzauth.statevec import BellOutcome, MeasBasis, PauliChoice, StateVector

import oracles

S = 1 / math.sqrt(2)


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return StateVector(n, v / np.linalg.norm(v))


class TestPrepareGhz:
    def test_three_qubits(self):
        s = sv.prepare_ghz(3)
        expected = np.zeros(8)
        expected[0] = expected[7] = S
        np.testing.assert_allclose(s.amps, expected, atol=1e-15)

    def test_two_qubits_is_phi_plus(self):
        np.testing.assert_allclose(sv.prepare_ghz(2).amps, [S, 0, 0, S], atol=1e-15)

    @pytest.mark.parametrize("n", [1, 0, 17, -3])
    def test_out_of_range(self, n):
        with pytest.raises(InvalidArgument):
            sv.prepare_ghz(n)

    def test_sixteen_is_accepted(self):
        assert sv.prepare_ghz(16).n_qubits == 16


class TestStateVectorType:
    def test_rejects_unnormalized(self):
        with pytest.raises(InvalidArgument):
            StateVector(1, [1, 1])

    def test_rejects_wrong_length(self):
        with pytest.raises(InvalidArgument):
            StateVector(2, [1, 0])

    def test_rejects_nan(self):
        with pytest.raises(InvalidArgument):
            StateVector(1, [float("nan"), 0])

    def test_amplitudes_read_only(self):
        s = sv.prepare_ghz(2)
        with pytest.raises(ValueError):
            s.amps[0] = 1


class TestTensor:
    def test_bell_pairs(self):
        s = sv.tensor(sv.prepare_ghz(2), sv.prepare_ghz(2))
        nz = {i: a for i, a in enumerate(s.amps) if abs(a) > 1e-12}
        assert set(nz) == {0, 3, 12, 15}
        assert all(abs(a - 0.5) < 1e-12 for a in nz.values())

    def test_basis_product(self):
        s = sv.tensor(StateVector.basis("00"), StateVector.basis("11"))
        assert s.equals_up_to_phase(StateVector.basis("0011"))
        assert abs(s.amps[0b0011] - 1) < 1e-15

    def test_ghz_pairs(self):
        s = sv.tensor(sv.prepare_ghz(3), sv.prepare_ghz(3))
        nz = {i for i, a in enumerate(s.amps) if abs(a) > 1e-12}
        assert nz == {0, 7, 56, 63}
        np.testing.assert_allclose(s.amps[[0, 7, 56, 63]], 0.5)

    def test_overflow(self):
        with pytest.raises(InvalidArgument):
            sv.tensor(sv.prepare_ghz(9), sv.prepare_ghz(8))


class TestPauli:
    def test_isy_on_zero(self):
        out = sv.apply_pauli(StateVector.basis("0"), 0, PauliChoice.ISY)
        np.testing.assert_allclose(out.amps, [0, -1])

    def test_isy_on_one(self):
        out = sv.apply_pauli(StateVector.basis("1"), 0, PauliChoice.ISY)
        np.testing.assert_allclose(out.amps, [1, 0])

    def test_identity(self):
        s = random_state(3, 1)
        assert np.array_equal(sv.apply_pauli(s, 1, PauliChoice.I).amps, s.amps)

    def test_isy_twice_is_minus_identity(self):
        s = random_state(3, 2)
        twice = sv.apply_pauli(sv.apply_pauli(s, 2, PauliChoice.ISY), 2, PauliChoice.ISY)
        np.testing.assert_allclose(twice.amps, -s.amps, atol=1e-12)
        np.testing.assert_allclose(oracles.ISY @ oracles.ISY, -np.eye(2))

    def test_matches_kron(self):
        s = random_state(3, 3)
        for bits in itertools.product((0, 1), repeat=3):
            got = sv.apply_paulis(s, [PauliChoice(b) for b in bits])
            np.testing.assert_allclose(got.amps, oracles.op_product(bits) @ s.amps, atol=1e-12)

    def test_bad_qubit(self):
        with pytest.raises(InvalidArgument):
            sv.apply_pauli(sv.prepare_ghz(2), 2, PauliChoice.ISY)

    def test_classical_bits(self):
        assert PauliChoice.I.classical_bit == 0
        assert PauliChoice.ISY.classical_bit == 1

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2 ** 32), st.lists(st.tuples(st.integers(0, 5), st.booleans()), max_size=10))
    def test_norm_preserved(self, n, seed, ops):
        s = random_state(n, seed)
        for q, bit in ops:
            s = sv.apply_pauli(s, q % n, PauliChoice(int(bit)))
            assert abs(s.norm_squared() - 1) < 1e-9


class TestMeasureQubit:
    def test_eigenstate(self):
        s = sv.tensor(StateVector.basis("0"), random_state(2, 5))
        for seed in range(20):
            out, _ = sv.measure_qubit(s, 0, MeasBasis.Z, sv.make_rng(seed))
            assert out == 0

    def test_ghz_z(self):
        branches = sv.qubit_branches(sv.prepare_ghz(3), 0, MeasBasis.Z)
        assert [b[1] for b in branches] == [0, 1]
        for p, bit, collapsed in branches:
            assert abs(p - 0.5) < 1e-12
            assert collapsed.equals_up_to_phase(StateVector.basis(str(bit) * 3))

    def test_x_outcomes_are_plus_minus(self):
        plus = StateVector(1, [S, S])
        minus = StateVector(1, [S, -S])
        assert sv.measure_qubit(plus, 0, MeasBasis.X, sv.make_rng(0))[0] == 0
        assert sv.measure_qubit(minus, 0, MeasBasis.X, sv.make_rng(0))[0] == 1
        _, collapsed = sv.measure_qubit(StateVector.basis("0"), 0, MeasBasis.X, sv.make_rng(1))
        assert collapsed.equals_up_to_phase(plus) or collapsed.equals_up_to_phase(minus)

    def test_ghz3_x_parity_sequential(self):
        for seed in range(50):
            rng = sv.make_rng(seed)
            s = sv.prepare_ghz(3)
            outs = []
            for q in range(3):
                o, s = sv.measure_qubit(s, q, MeasBasis.X, rng)
                outs.append(o)
            assert sum(outs) % 2 == 0

    def test_born_frequencies(self):
        s = StateVector(1, [math.sqrt(0.2), math.sqrt(0.8)])
        rng = sv.make_rng(7)
        ones = sum(sv.measure_qubit(s, 0, MeasBasis.Z, rng)[0] for _ in range(4000))
        sigma = math.sqrt(4000 * 0.8 * 0.2)
        assert abs(ones - 3200) < 4 * sigma

    def test_qubit_stays_in_register(self):
        _, c = sv.measure_qubit(sv.prepare_ghz(4), 2, MeasBasis.X, sv.make_rng(0))
        assert c.n_qubits == 4


class TestBell:
    def test_eigenstate(self):
        s = sv.prepare_ghz(2)
        assert sv.bell_pair_distribution(s, 0, 1) == pytest.approx((1, 0, 0, 0), abs=1e-12)
        out, _ = sv.measure_bell(s, 0, 1, sv.make_rng(0))
        assert out is BellOutcome.PHI_PLUS

    def test_psi_minus(self):
        s = StateVector(2, [0, S, -S, 0])
        assert sv.bell_pair_distribution(s, 0, 1) == pytest.approx((0, 0, 0, 1), abs=1e-12)

    def test_two_pair_swap_marginal(self):
        s = sv.tensor(sv.prepare_ghz(2), sv.prepare_ghz(2))
        assert sv.bell_pair_distribution(s, 0, 3) == pytest.approx((0.25,) * 4, abs=1e-12)

    def test_ghz_pair_marginal(self):
        s = sv.tensor(sv.prepare_ghz(3), sv.prepare_ghz(3))
        got = sv.bell_pair_distribution(s, 0, 3)
        assert got == pytest.approx(oracles.bell_pair_probs(s.amps, 6, 0, 3), abs=1e-12)
        assert got == pytest.approx((0.25,) * 4, abs=1e-12)

    def test_psi7_psi1_pair_marginal(self):
        p = oracles.ghz_vector("110", 1)
        q = oracles.ghz_vector("000", 1)
        s = StateVector(6, np.kron(p, q))
        got = sv.bell_pair_distribution(s, 0, 3)
        ref = oracles.bell_pair_probs(s.amps, 6, 0, 3)
        assert got == pytest.approx(ref, abs=1e-12)
        # Trent's pair is psi-kind with probability 1/2, split evenly
        assert got == pytest.approx((0.25, 0.25, 0.25, 0.25), abs=1e-12)

    def test_same_qubit(self):
        with pytest.raises(InvalidArgument):
            sv.bell_pair_distribution(sv.prepare_ghz(2), 1, 1)
        with pytest.raises(InvalidArgument):
            sv.measure_bell(sv.prepare_ghz(2), 0, 0, sv.make_rng(0))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 6), st.integers(0, 2 ** 32), st.data())
    def test_distribution_matches_oracle(self, n, seed, data):
        q1 = data.draw(st.integers(0, n - 1))
        q2 = data.draw(st.integers(0, n - 1).filter(lambda q: q != q1))
        s = random_state(n, seed)
        got = sv.bell_pair_distribution(s, q1, q2)
        assert all(p >= 0 for p in got)
        assert abs(sum(got) - 1) < 1e-9
        assert got == pytest.approx(oracles.bell_pair_probs(s.amps, n, q1, q2), abs=1e-10)

    def test_distribution_does_not_mutate(self):
        s = random_state(4, 9)
        before = s.amps.copy()
        sv.bell_pair_distribution(s, 0, 2)
        assert np.array_equal(before, s.amps)

    @pytest.mark.parametrize("seed", range(10))
    def test_collapse_idempotent(self, seed):
        rng = sv.make_rng(seed)
        s = random_state(5, seed)
        out, c = sv.measure_bell(s, 1, 4, rng)
        dist = sv.bell_pair_distribution(c, 1, 4)
        assert dist[int(out)] == pytest.approx(1.0, abs=1e-9)
        again, _ = sv.measure_bell(c, 1, 4, rng)
        assert again is out

    def test_outcome_bits(self):
        assert BellOutcome.PSI_MINUS.kind == 1 and BellOutcome.PSI_MINUS.sign == 1
        assert BellOutcome.PHI_MINUS.kind == 0 and BellOutcome.PHI_MINUS.sign == 1
        for b in BellOutcome:
            assert BellOutcome.from_label(b.label) is b
            assert BellOutcome.from_bits(b.kind, b.sign) is b


class TestDeterminism:
    def test_same_seed_same_sequence(self):
        def run(seed):
            rng = sv.make_rng(seed)
            s = sv.tensor(sv.prepare_ghz(4), sv.prepare_ghz(4))
            outs = []
            for i in range(4):
                o, s = sv.measure_bell(s, i, i + 4, rng)
                outs.append(int(o))
            return outs, s.amps.tobytes()

        assert run(123) == run(123)
        assert len({tuple(run(s)[0]) for s in range(30)}) > 1


class TestGhzXParity:
    @pytest.mark.parametrize("n", range(2, 9))
    def test_even_minus_count_exhaustive(self, n):
        # enumerate every measurement branch qubit by qubit
        branches = [(1.0, sv.prepare_ghz(n), 0)]
        for q in range(n):
            branches = [(p * p2, c, ones + bit)
                        for p, s, ones in branches
                        for p2, bit, c in sv.qubit_branches(s, q, MeasBasis.X)]
        assert abs(sum(p for p, _, _ in branches) - 1) < 1e-9
        assert all(ones % 2 == 0 for _, _, ones in branches)
        # and against the full Hadamard-matrix oracle
        ref = oracles.x_basis_probs(sv.prepare_ghz(n).amps, n)
        for i, p in enumerate(ref):
            if bin(i).count("1") % 2:
                assert p < 1e-12


class TestOutcomeDistribution:
    def test_marginal_matches_oracle(self):
        s = random_state(4, 11)
        full = oracles.x_basis_probs(s.amps, 4)
        got = sv.outcome_distribution(s, [0, 1, 2, 3], MeasBasis.X)
        np.testing.assert_allclose(got, full, atol=1e-12)
        marg = full.reshape(2, 2, 2, 2).sum(axis=(1, 3)).reshape(-1)
        np.testing.assert_allclose(sv.outcome_distribution(s, [0, 2], MeasBasis.X), marg, atol=1e-12)

    def test_order_of_qubits(self):
        s = StateVector.basis("01")
        np.testing.assert_allclose(sv.outcome_distribution(s, [1, 0], MeasBasis.Z), [0, 0, 1, 0])


class TestDiscard:
    def test_drops_definite_qubit(self):
        s = sv.tensor(StateVector.basis("1"), sv.prepare_ghz(2))
        out = sv.discard_qubit(s, 0)
        assert out.equals_up_to_phase(sv.prepare_ghz(2))

    def test_refuses_entangled_qubit(self):
        with pytest.raises(InvalidArgument):
            sv.discard_qubit(sv.prepare_ghz(3), 1)
