import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.special import comb

from conftest import sigma_by_subsets
from hyprigid.symm import (
    DomainError,
    PreconditionError,
    elementary_symmetric,
    garding_membership,
    is_umbilic,
    matrix_sigma,
    newton_maclaurin_check,
    newton_tensor,
    normalized_hk,
    sigma_k,
    umbilic_spread,
)

tuples = st.lists(st.floats(-3, 3, allow_nan=False), min_size=1, max_size=8)


def random_symmetric(rng, m):
    A = rng.normal(size=(m, m))
    return 0.5 * (A + A.T)


def random_self_adjoint(rng, m):
    """``g^{-1} h`` with ``g`` SPD and ``h`` symmetric: real spectrum, not symmetric."""
    G = rng.normal(size=(m, m))
    g = G @ G.T + m * np.eye(m)
    return np.linalg.solve(g, random_symmetric(rng, m))


class TestSigma:
    def test_examples(self):
        assert sigma_k([1, 2, 3], 2) == pytest.approx(11.0)
        assert sigma_k([1, 2, 3], 0) == 1.0
        assert_allclose(normalized_hk([1, 2, 3], 2), 11 / 3, rtol=1e-15)
        c = 1 / np.tanh(1.0)
        assert_allclose(normalized_hk([c, c], 2), 1.724062, atol=1e-6)

    @pytest.mark.parametrize("m", [1, 3, 6, 10])
    def test_all_ones_binomial(self, m):
        assert_allclose(elementary_symmetric(np.ones(m)), [comb(m, k) for k in range(m + 1)])

    def test_constant_tuple(self):
        for k in range(5):
            assert_allclose(normalized_hk([1.7] * 4, k), 1.7**k, rtol=1e-14)

    @given(tuples)
    def test_against_subset_enumeration(self, lam):
        lam = np.array(lam)
        for k in range(lam.size + 1):
            assert_allclose(sigma_k(lam, k), sigma_by_subsets(lam, k), rtol=1e-10, atol=1e-10)

    @given(tuples, st.randoms(use_true_random=False))
    def test_permutation_invariance(self, lam, rnd):
        perm = list(lam)
        rnd.shuffle(perm)
        assert_allclose(elementary_symmetric(perm), elementary_symmetric(lam), rtol=1e-12, atol=1e-12)

    def test_large_m_stable(self):
        lam = np.linspace(0.5, 1.5, 20)
        coeffs = np.poly(-lam)  # prod (t + lam_i), highest power first
        assert_allclose(elementary_symmetric(lam), coeffs, rtol=1e-12)

    def test_batched(self, rng):
        lam = rng.normal(size=(4, 5, 3))
        out = elementary_symmetric(lam)
        assert out.shape == (4, 5, 4)
        assert_allclose(out[2, 3], elementary_symmetric(lam[2, 3]))

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            sigma_k([1, 2, 3], 4)
        with pytest.raises(DomainError):
            sigma_k([1, 2, 3], -1)
        with pytest.raises(DomainError):
            normalized_hk([1.0], 2)


class TestMatrix:
    @pytest.mark.parametrize("m", [2, 3, 5])
    def test_matrix_sigma_matches_eigenvalues(self, rng, m):
        for _ in range(5):
            B = random_self_adjoint(rng, m)
            lam = np.linalg.eigvals(B).real
            assert_allclose(matrix_sigma(B), elementary_symmetric(lam), atol=1e-10)

    def test_newton_examples(self):
        assert_allclose(newton_tensor(np.diag([1.0, 2.0, 3.0]), 1), np.diag([5.0, 4.0, 3.0]))
        assert_allclose(newton_tensor(np.diag([1.0, 1.0]), 1), np.eye(2))
        assert_allclose(newton_tensor(np.arange(9.0).reshape(3, 3), 0), np.eye(3))

    def test_diagonal_removal(self, rng):
        lam = rng.normal(size=4)
        for k in range(4):
            T = newton_tensor(np.diag(lam), k)
            expected = [sigma_k(np.delete(lam, i), k) for i in range(4)]
            assert_allclose(np.diag(T), expected, atol=1e-12)

    @pytest.mark.parametrize("m", [2, 3, 4, 5])
    def test_trace_identity(self, rng, m):
        B = random_self_adjoint(rng, m)
        sig = matrix_sigma(B)
        for k in range(m):
            assert_allclose(np.trace(newton_tensor(B, k)), (m - k) * sig[k], atol=1e-10)

    @pytest.mark.parametrize("m", [2, 3, 4, 5])
    def test_recursion_matches_derivative(self, rng, m):
        # T_k[i, j] is the derivative of sigma_{k+1} with respect to B[j, i]
        B = random_self_adjoint(rng, m)
        for k in range(m):
            T = newton_tensor(B, k)
            errs = []
            for h in (1e-3, 5e-4):
                D = np.empty((m, m))
                for a in range(m):
                    for b in range(m):
                        E = np.zeros((m, m))
                        E[a, b] = h
                        D[a, b] = (matrix_sigma(B + E, k + 1)[k + 1] - matrix_sigma(B - E, k + 1)[k + 1]) / (2 * h)
                errs.append(np.max(np.abs(D.T - T)))
            assert errs[0] < 1e-4 * max(1.0, np.max(np.abs(T)))
            if errs[0] > 1e-11:
                assert errs[0] / max(errs[1], 1e-300) > 3.0

    def test_positive_definite_in_cone(self, rng):
        count = 0
        while count < 200:
            m = rng.integers(2, 7)
            k = rng.integers(1, m + 1)
            lam = rng.normal(size=m) + rng.uniform(0, 2)
            if not garding_membership(lam, k):
                continue
            count += 1
            assert np.all(np.linalg.eigvalsh(newton_tensor(np.diag(lam), k - 1)) > 0)

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            newton_tensor(np.eye(3), 3)


class TestCone:
    def test_examples(self):
        assert garding_membership([1, 1, -0.1], 2)
        assert not garding_membership([1, 1, -0.1], 3)
        assert all(garding_membership([1, 1, 1], k) for k in (1, 2, 3))

    def test_zero_is_outside(self):
        assert not garding_membership([0.0, 0.0], 1)

    @given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=2, max_size=6))
    def test_nesting(self, lam):
        m = len(lam)
        for k in range(1, m + 1):
            if garding_membership(lam, k):
                assert all(garding_membership(lam, j) for j in range(1, k))

    def test_batched(self):
        lam = np.array([[1, 1, -0.1], [1, -2, -2]])
        assert_allclose(garding_membership(lam, 2), [True, False])


class TestNewtonMaclaurin:
    def test_examples(self):
        assert_allclose(newton_maclaurin_check([1, 2, 3], 1, 2), 2 - np.sqrt(11 / 3), rtol=1e-14)
        assert_allclose(newton_maclaurin_check([1, 2, 3], 1, 2), 0.085146, atol=1e-6)
        # 11/3 - 6^(2/3) = 0.364740 (direct arithmetic)
        assert_allclose(newton_maclaurin_check([1, 2, 3], 2, 3), 11 / 3 - 6 ** (2 / 3), rtol=1e-14)
        assert_allclose(newton_maclaurin_check([1, 2, 3], 2, 3), 0.364740, atol=1e-6)
        assert newton_maclaurin_check([1.3, 1.3, 1.3], 1, 3) == pytest.approx(0.0, abs=1e-15)

    def test_precondition(self):
        with pytest.raises(PreconditionError):
            newton_maclaurin_check([1, 1, -0.1], 1, 3)
        with pytest.raises(DomainError):
            newton_maclaurin_check([1, 2, 3], 2, 2)

    def test_umbilic_spread(self):
        assert umbilic_spread([2.0, 2.0, 2.0]) == 0.0
        assert_allclose(umbilic_spread([1.0, 3.0]), 2.0 / 3.0)
        assert is_umbilic([1.0, 1.0 + 1e-10])
        assert not is_umbilic([1.0, 1.1])
