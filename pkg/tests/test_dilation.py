import numpy as np
import pytest
from hypothesis import given, strategies as st

from qproj.dilation import DilationMatrix, is_isotropic, operator_norm, power
from qproj.errors import ConfigError

QUINCUNX = [[1, 1], [-1, 1]]
BUILTIN = [DilationMatrix(2.0), DilationMatrix([[2, 0], [0, 4]]), DilationMatrix(QUINCUNX),
           DilationMatrix(3 * np.eye(3)), DilationMatrix([[2, 1], [0, 2]])]


def test_power_examples():
    np.testing.assert_array_equal(power(DilationMatrix(2.0), 3), [[8.0]])
    np.testing.assert_allclose(power(DilationMatrix([[2, 0], [0, 4]]), -1), np.diag([0.5, 0.25]))
    q = np.array(QUINCUNX)
    np.testing.assert_array_equal(power(DilationMatrix(QUINCUNX), 2), q @ q)
    np.testing.assert_array_equal(power(DilationMatrix(QUINCUNX), 2), [[0, 2], [-2, 0]])


def test_power_zero_is_identity():
    np.testing.assert_array_equal(power(DilationMatrix(QUINCUNX), 0), np.eye(2))


def test_integer_powers_exact():
    m = DilationMatrix([[2, 1], [1, 3]])
    big = power(m, 12)
    assert np.all(big == np.round(big))
    np.testing.assert_allclose(power(m, -12) @ big, np.eye(2), atol=1e-12)


def test_real_matrix_powers():
    m = DilationMatrix([[1.5, 0.2], [0.0, 1.7]])
    np.testing.assert_allclose(power(m, -3), np.linalg.matrix_power(np.linalg.inv(m.entries), 3))


@given(st.sampled_from(BUILTIN), st.integers(-8, 8), st.integers(-8, 8))
def test_power_additive(m, a, b):
    lhs = power(m, a + b)
    rhs = power(m, a) @ power(m, b)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-9 * np.abs(lhs).max())


@pytest.mark.parametrize("m", BUILTIN)
def test_det_is_product_of_moduli(m):
    assert m.det_abs == pytest.approx(np.prod(m.eig_moduli), rel=1e-10)


@pytest.mark.parametrize("bad", [[[1, 0], [0, 2]], [[0.5]], [[1, 1], [0, 1]], [[1, 2]], [[np.nan]]])
def test_rejects_non_expansive_or_malformed(bad):
    with pytest.raises(ConfigError):
        DilationMatrix(bad)


def test_four_dimensional_eigenvalues():
    m = DilationMatrix(np.diag([2.0, 3.0, 4.0, 5.0]))
    assert m.eig_moduli == pytest.approx((2, 3, 4, 5))


@pytest.mark.parametrize("a,want", [(np.diag([2.0, 4.0]), 4.0), ([[0, 2], [-2, 0]], 2.0), (3 * np.eye(3), 3.0)])
def test_operator_norm_examples(a, want):
    assert operator_norm(a) == pytest.approx(want, rel=1e-12)


@given(st.lists(st.floats(-5, 5), min_size=9, max_size=9))
def test_operator_norm_matches_svd(vals):
    a = np.array(vals).reshape(3, 3)
    ref = np.linalg.svd(a, compute_uv=False)[0]
    got = operator_norm(a, rtol=1e-14, max_iter=200000) if ref > 0 else operator_norm(a)
    assert got == pytest.approx(ref, rel=1e-6, abs=1e-12)


def test_isotropy_examples():
    assert is_isotropic(DilationMatrix(2 * np.eye(2)))
    assert not is_isotropic(DilationMatrix([[2, 0], [0, 4]]))
    assert is_isotropic(DilationMatrix(QUINCUNX))
    assert not is_isotropic(DilationMatrix([[2, 1], [0, 2]]))  # Jordan block
    with pytest.raises(ValueError):
        is_isotropic(DilationMatrix(2.0), tol=0)


@pytest.mark.parametrize("m", BUILTIN)
def test_inverse_powers_strictly_decrease(m):
    norms = [operator_norm(power(m, -j)) for j in range(4, 13)]
    assert all(b < a for a, b in zip(norms, norms[1:]))


@pytest.mark.parametrize("m", [b for b in BUILTIN if is_isotropic(b)])
def test_isotropic_growth_bracket(m):
    lam = m.eig_moduli[-1]
    ratios = [operator_norm(power(m, j)) / lam**j for j in range(11)]
    assert 0.5 <= min(ratios) and max(ratios) <= 2.0


def test_config_round_trip():
    m = DilationMatrix.from_config([[2, 0], [0, 4]])
    assert m.to_config() == [[2, 0], [0, 4]]
    assert DilationMatrix.from_config(2).dim == 1
    assert m.lambda_geom == pytest.approx(np.sqrt(8))
