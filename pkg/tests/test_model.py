import numpy as np
import pytest
from scipy.special import exp1

from secalloc import (
    ChannelInstance,
    InputError,
    gaussian_rate_destination,
    jensen_gap_montecarlo,
    surrogate_secrecy_objective,
    validate_covariance,
    worst_eavesdropper,
)
from conftest import DEMO_H, random_complex


class TestWorstEavesdropper:
    def test_single_entry(self, demo_instance):
        eq = worst_eavesdropper(demo_instance)
        assert eq.j0 == 0
        assert eq.gain2 == pytest.approx(0.75, abs=0)
        assert np.allclose(eq.Z, 0.8660254037844386 * np.eye(3))

    def test_identity_case(self):
        inst = ChannelInstance(H=np.eye(2), eavesdroppers=[(1, 1.0)], n0=1.0, p0=1.0)
        eq = worst_eavesdropper(inst)
        assert eq.gain2 == 1.0
        assert np.allclose(eq.Z, np.eye(2))

    def test_argmax_and_tiebreak(self):
        inst = ChannelInstance(
            H=np.eye(2), eavesdroppers=[(3, 0.25), (2, 0.36)], n0=1.0, p0=1.0
        )
        assert worst_eavesdropper(inst).j0 == 0  # 0.75 > 0.72
        tie = ChannelInstance(
            H=np.eye(2), eavesdroppers=[(2, 0.5), (1, 1.0)], n0=1.0, p0=1.0
        )
        assert worst_eavesdropper(tie).j0 == 0  # equal products, lowest index

    def test_permutation_invariance(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            eavs = [(int(rng.integers(1, 5)), float(rng.uniform(0.1, 2.0))) for _ in range(4)]
            inst = ChannelInstance(H=np.eye(2), eavesdroppers=eavs, n0=1.0, p0=1.0)
            base = worst_eavesdropper(inst).gain2
            perm = list(rng.permutation(4))
            shuffled = ChannelInstance(
                H=np.eye(2), eavesdroppers=[eavs[i] for i in perm], n0=1.0, p0=1.0
            )
            assert worst_eavesdropper(shuffled).gain2 == base

    def test_empty_list_rejected(self):
        with pytest.raises(InputError):
            ChannelInstance(H=np.eye(2), eavesdroppers=[], n0=1.0, p0=1.0)


class TestGaussianRate:
    def test_zero_power(self, demo_instance):
        assert gaussian_rate_destination(demo_instance, np.zeros((3, 3))) == 0.0

    def test_scalar_case(self):
        inst = ChannelInstance(H=np.eye(1), eavesdroppers=[(1, 1.0)], n0=1.0, p0=3.0)
        assert gaussian_rate_destination(inst, np.array([[3.0]])) == pytest.approx(2.0, abs=1e-12)

    def test_demo_equal_power_matches_eigen_oracle(self, demo_instance):
        # Q = (P0/3) I with P0 = 3: rate is sum of log2(1 + eigenvalues of H H*).
        Q = np.eye(3)
        lam = np.linalg.eigvalsh(DEMO_H @ DEMO_H.conj().T)
        oracle = float(np.sum(np.log2(1.0 + lam)))
        got = gaussian_rate_destination(demo_instance, Q)
        assert got == pytest.approx(oracle, abs=1e-10)
        assert got == pytest.approx(4.581114380150, abs=1e-9)

    def test_monotone_in_loading(self, demo_instance):
        rng = np.random.default_rng(11)
        for _ in range(25):
            A = random_complex(rng, (3, 3))
            Q1 = A @ A.conj().T
            v = random_complex(rng, (3, 1))
            Q2 = Q1 + v @ v.conj().T
            assert gaussian_rate_destination(demo_instance, Q2) >= (
                gaussian_rate_destination(demo_instance, Q1) - 1e-9
            )

    def test_dimension_mismatch(self, demo_instance):
        with pytest.raises(InputError):
            gaussian_rate_destination(demo_instance, np.eye(2))


class TestSurrogateObjective:
    def test_zero_power(self, demo_instance):
        eq = worst_eavesdropper(demo_instance)
        assert surrogate_secrecy_objective(demo_instance, eq, np.zeros((3, 3))) == 0.0

    def test_scalar_determinants(self):
        inst = ChannelInstance(H=np.array([[2.0]]), eavesdroppers=[(1, 1.0)], n0=1.0, p0=1.0)
        eq = worst_eavesdropper(inst)
        got = surrogate_secrecy_objective(inst, eq, np.array([[1.0]]))
        assert got == pytest.approx(np.log2(5.0) - np.log2(2.0), abs=1e-12)

    def test_demo_against_direct_determinants(self, demo_instance):
        eq = worst_eavesdropper(demo_instance)
        Q = np.eye(3) / 3.0
        dest = np.log2(np.abs(np.linalg.det(np.eye(3) + DEMO_H @ Q @ DEMO_H.conj().T)))
        eav = np.log2(np.abs(np.linalg.det(np.eye(3) + 0.75 * Q)))
        got = surrogate_secrecy_objective(demo_instance, eq, Q)
        assert got == pytest.approx(float(dest - eav), abs=1e-10)


class TestJensenGap:
    def test_zero_power_exact(self, demo_instance):
        eq = worst_eavesdropper(demo_instance)
        assert jensen_gap_montecarlo(demo_instance, eq, np.zeros((3, 3)), 1000, 1) == (0.0, 0.0, 0.0)

    def test_bound_holds_on_random_covariances(self, demo_instance):
        eq = worst_eavesdropper(demo_instance)
        rng = np.random.default_rng(3)
        for trial in range(5):
            A = random_complex(rng, (3, 3))
            Q = A @ A.conj().T
            Q *= demo_instance.p0 / np.real(np.trace(Q))
            mc_mean, mc_stderr, bound = jensen_gap_montecarlo(
                demo_instance, eq, Q, 20000, seed=100 + trial
            )
            assert mc_mean <= bound + 3.0 * mc_stderr

    def test_scalar_closed_form(self):
        # 1x1 with sigma2 = 1, Q = [1]: the ergodic rate is
        # E[log2(1 + t)] with t ~ Exp(1), i.e. e * E1(1) * log2 e.
        inst = ChannelInstance(H=np.array([[1.0]]), eavesdroppers=[(1, 1.0)], n0=1.0, p0=1.0)
        eq = worst_eavesdropper(inst)
        mc_mean, mc_stderr, bound = jensen_gap_montecarlo(
            inst, eq, np.array([[1.0]]), 200000, seed=42
        )
        closed = float(np.e * exp1(1.0) * np.log2(np.e))
        assert mc_mean == pytest.approx(closed, abs=4.0 * mc_stderr + 1e-6)
        assert bound == pytest.approx(1.0, abs=1e-12)  # log2(1 + 1)
        assert mc_mean <= bound + 3.0 * mc_stderr

    def test_sample_floor(self, demo_instance):
        eq = worst_eavesdropper(demo_instance)
        with pytest.raises(InputError):
            jensen_gap_montecarlo(demo_instance, eq, np.eye(3), 999, 1)

    def test_seed_reproducibility(self, demo_instance):
        eq = worst_eavesdropper(demo_instance)
        Q = np.eye(3)
        first = jensen_gap_montecarlo(demo_instance, eq, Q, 5000, seed=9)
        second = jensen_gap_montecarlo(demo_instance, eq, Q, 5000, seed=9)
        assert first == second


class TestValidateCovariance:
    def test_accepts_valid(self):
        rng = np.random.default_rng(0)
        A = random_complex(rng, (4, 4))
        Q = A @ A.conj().T
        validate_covariance(Q, p0=np.real(np.trace(Q)) * 1.000000001)

    def test_rejects_non_hermitian(self):
        with pytest.raises(InputError):
            validate_covariance(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_rejects_indefinite(self):
        with pytest.raises(InputError):
            validate_covariance(np.diag([1.0, -0.5]))

    def test_rejects_budget_violation(self):
        with pytest.raises(InputError):
            validate_covariance(np.eye(2), p0=1.0)
