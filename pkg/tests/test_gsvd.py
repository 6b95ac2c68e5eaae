import numpy as np
import pytest

from secalloc import (
    DegenerateInputError,
    InputError,
    extract_subchannels,
    gsvd_decompose,
    reassemble_covariance,
    reconstruction_report,
    subchannel_objective,
    surrogate_secrecy_objective,
    worst_eavesdropper,
)
from conftest import DEMO_H, random_complex

RECON_TOL = 1e-10


def assert_valid_factors(f, H, Z):
    rep = reconstruction_report(f, H, Z)
    assert rep["res_h"] <= RECON_TOL
    assert rep["res_z"] <= RECON_TOL
    assert rep["norm_defect"] <= RECON_TOL
    assert rep["unitary_defect"] <= RECON_TOL
    lh, lz = f.diag_pairs()
    assert np.all(np.diff(lh) <= 1e-14)  # descending
    assert np.all(lh >= 0) and np.all(lz >= 0)


class TestDecompose:
    def test_equal_pair_splits_evenly(self):
        for n in (1, 2, 4):
            f = gsvd_decompose(np.eye(n), np.eye(n))
            assert f.k == n
            lh, lz = f.diag_pairs()
            assert np.allclose(lh, 1 / np.sqrt(2), atol=1e-12)
            assert np.allclose(lz, 1 / np.sqrt(2), atol=1e-12)
            assert_valid_factors(f, np.eye(n), np.eye(n))

    def test_demo_channel(self, demo_instance):
        Z = worst_eavesdropper(demo_instance).Z
        f = gsvd_decompose(DEMO_H, Z)
        assert f.k == 3 and f.r == 3
        assert_valid_factors(f, DEMO_H, Z)

    def test_rank_deficient_h(self):
        # One direction is invisible to the destination: lambda_h = (2/sqrt5, 0).
        H = np.diag([2.0, 0.0])
        Z = np.eye(2)
        f = gsvd_decompose(H, Z)
        assert f.k == 2
        assert f.r == 1
        lh, lz = f.diag_pairs()
        assert lh[0] == pytest.approx(2 / np.sqrt(5), abs=1e-12)
        assert lh[1] == pytest.approx(0.0, abs=1e-12)
        assert lz[0] == pytest.approx(1 / np.sqrt(5), abs=1e-12)
        assert lz[1] == pytest.approx(1.0, abs=1e-12)
        assert_valid_factors(f, H, Z)

    def test_random_pairs_scaled_identity(self):
        rng = np.random.default_rng(2024)
        for _ in range(100):
            n_d = int(rng.integers(1, 7))
            n_s = int(rng.integers(1, 7))
            c = float(rng.uniform(0.2, 3.0))
            H = random_complex(rng, (n_d, n_s), scale=rng.uniform(0.5, 4.0))
            Z = c * np.eye(n_s)
            f = gsvd_decompose(H, Z)
            assert_valid_factors(f, H, Z)

    def test_random_general_pairs(self):
        rng = np.random.default_rng(77)
        for _ in range(30):
            n_d = int(rng.integers(1, 6))
            n_e = int(rng.integers(1, 6))
            n_s = int(rng.integers(1, 6))
            H = random_complex(rng, (n_d, n_s))
            Z = random_complex(rng, (n_e, n_s))
            f = gsvd_decompose(H, Z)
            assert_valid_factors(f, H, Z)

    def test_full_rank_stack_equal_to_rows(self):
        # k equals N_D + N_E: single-antenna receivers, wide transmitter.
        rng = np.random.default_rng(5)
        H = random_complex(rng, (1, 3))
        Z = random_complex(rng, (1, 3))
        f = gsvd_decompose(H, Z)
        assert f.k == 2
        assert_valid_factors(f, H, Z)

    def test_zero_pair_degenerate(self):
        with pytest.raises(DegenerateInputError):
            gsvd_decompose(np.zeros((2, 2)), np.zeros((2, 2)))

    def test_column_mismatch(self):
        with pytest.raises(InputError):
            gsvd_decompose(np.eye(2), np.eye(3))

    def test_bad_rank_tol(self):
        with pytest.raises(InputError):
            gsvd_decompose(np.eye(2), np.eye(2), rank_tol=-1.0)


class TestExtract:
    def test_equal_pair_gives_no_subchannels(self):
        f = gsvd_decompose(np.eye(3), np.eye(3))
        assert extract_subchannels(f, 1.0).l == 0

    def test_scalar_chain_by_hand(self):
        # H = [2], Z = [1]: stack norm sqrt(5); lambda_h = 2/sqrt5,
        # lambda_z = 1/sqrt5, |Phi* T| = sqrt5, c = 1/5, a = 0.8, b = 0.2.
        f = gsvd_decompose(np.array([[2.0]]), np.array([[1.0]]))
        s = extract_subchannels(f, 1.0)
        assert s.l == 1
        assert s.a[0] == pytest.approx(0.8, abs=1e-12)
        assert s.b[0] == pytest.approx(0.2, abs=1e-12)
        assert s.c[0] == pytest.approx(0.2, abs=1e-12)

    def test_demo_channel_keeps_one(self, demo_instance):
        Z = worst_eavesdropper(demo_instance).Z
        s = extract_subchannels(gsvd_decompose(DEMO_H, Z), 1.0)
        # sigma(H) = (3.676, 0.777, 0.169) against 0.866: only one survives.
        assert s.l == 1
        assert np.all(s.a > s.b) and np.all(s.b >= 0) and np.all(s.c > 0)

    def test_ratio_ordering_and_invariants(self):
        rng = np.random.default_rng(31)
        for _ in range(40):
            n_s = int(rng.integers(1, 7))
            n_d = int(rng.integers(1, 7))
            H = random_complex(rng, (n_d, n_s), scale=2.0)
            Z = float(rng.uniform(0.3, 1.5)) * np.eye(n_s)
            s = extract_subchannels(gsvd_decompose(H, Z), n0=float(rng.uniform(0.5, 2.0)))
            assert s.l <= s.r <= s.k <= n_s
            assert np.all(s.a > s.b) and np.all(s.c > 0)
            ratios = s.a / np.maximum(s.b, 1e-300)
            assert np.all(np.diff(ratios) <= 1e-6 * np.abs(ratios[:-1]))

    def test_bad_n0(self):
        f = gsvd_decompose(np.eye(2), np.eye(2))
        with pytest.raises(InputError):
            extract_subchannels(f, 0.0)


@pytest.fixture(scope="module")
def demo_sub(demo_instance):
    Z = worst_eavesdropper(demo_instance).Z
    return extract_subchannels(gsvd_decompose(DEMO_H, Z), 1.0)


class TestReassemble:
    def test_zero_powers(self, demo_sub):
        Q = reassemble_covariance(demo_sub, np.zeros(demo_sub.l), 3)
        assert np.allclose(Q, 0.0)

    def test_scalar_chain(self):
        f = gsvd_decompose(np.array([[2.0]]), np.array([[1.0]]))
        s = extract_subchannels(f, 1.0)
        Q = reassemble_covariance(s, np.array([5.0]), 1)
        assert Q[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_trace_identity_random_q(self, demo_sub):
        rng = np.random.default_rng(8)
        for _ in range(25):
            q = rng.uniform(0.0, 30.0, size=demo_sub.l)
            Q = reassemble_covariance(demo_sub, q, 3)
            tr = float(np.real(np.trace(Q)))
            lin = float(np.sum(demo_sub.c * q))
            assert tr == pytest.approx(lin, rel=1e-9, abs=1e-12)
            wmin = np.linalg.eigvalsh(Q).min()
            assert wmin >= -1e-10 * max(tr, 1e-300)

    def test_objective_equivalence(self, demo_instance, demo_sub):
        # The matrix surrogate objective evaluated on the reassembled Q must
        # equal the scalar subchannel sum.
        eq = worst_eavesdropper(demo_instance)
        rng = np.random.default_rng(12)
        for _ in range(10):
            q = rng.uniform(0.0, 50.0, size=demo_sub.l)
            Q = reassemble_covariance(demo_sub, q, 3)
            matrix_val = surrogate_secrecy_objective(demo_instance, eq, Q)
            scalar_val = subchannel_objective(demo_sub.a, demo_sub.b, q)
            assert matrix_val == pytest.approx(scalar_val, abs=1e-8)

    def test_negative_power_rejected(self, demo_sub):
        with pytest.raises(InputError):
            reassemble_covariance(demo_sub, np.array([-1.0]), 3)

    def test_length_mismatch(self, demo_sub):
        with pytest.raises(InputError):
            reassemble_covariance(demo_sub, np.zeros(demo_sub.l + 1), 3)

    def test_ns_mismatch(self, demo_sub):
        with pytest.raises(InputError):
            reassemble_covariance(demo_sub, np.zeros(demo_sub.l), 5)
