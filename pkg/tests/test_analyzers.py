import numpy as np
import pytest
from scipy.integrate import quad

from qproj import field as F
from qproj.analyzers import Delta, Differential, FunctionKernel, check_sn_bound, coefficient, eval_symbol
from qproj.dilation import DilationMatrix
from qproj.errors import ConfigError, MissingDerivativeError
from qproj.field import TestFunction
from qproj.kernels import BSplineTensor, CustomKernel

M2 = DilationMatrix(2.0)
QUINCUNX = DilationMatrix([[1, 1], [-1, 1]])
BOX = BSplineTensor.single(1)
HAT = BSplineTensor.single(2)


def exp_quadratic():
    # e^{-x^2} with derivatives
    return TestFunction("e^-x2", 1, lambda x: np.exp(-x[:, 0] ** 2), ((-7, 7),),
                        lambda b, x: {1: -2 * x[:, 0], 2: 4 * x[:, 0] ** 2 - 2}[b[0]] * np.exp(-x[:, 0] ** 2), 2)


def const_one(d=1):
    return TestFunction("one", d, lambda x: np.ones(x.shape[0]), ((-1, 1),) * d)


def test_symbol_examples():
    assert eval_symbol(Delta(2), [3.7, -1.2])[0] == 1
    assert eval_symbol(Differential((((1,), 1.0),)), 0.5)[0] == pytest.approx(np.pi * 1j)
    assert eval_symbol(FunctionKernel(BOX), 0.5)[0].real == pytest.approx(2 / np.pi, abs=1e-15)


def test_order_n():
    assert Delta(1).order_N == 0
    assert FunctionKernel(HAT).order_N == 0
    assert Differential((((2, 1), 1.0), ((0, 0), 3.0))).order_N == 3


def test_differential_symbol_at_zero_is_c0():
    a = Differential((((0, 0), 2 - 1j), ((1, 0), 5.0), ((0, 2), 1.0)))
    assert eval_symbol(a, [0.0, 0.0])[0] == pytest.approx(2 - 1j)


def test_differential_validation():
    with pytest.raises(ConfigError):
        Differential(())
    with pytest.raises(ConfigError):
        Differential((((1,), 1.0), ((1, 0), 1.0)))


def test_sn_bound_examples():
    ok, c = check_sn_bound(Delta(1), 10.0, samples=1024)
    assert ok and c == pytest.approx(1.0)
    ok, c = check_sn_bound(Differential((((1,), 1.0),)), 10.0, samples=1024)
    assert ok and c == pytest.approx(2 * np.pi, rel=1e-9)
    ok, _ = check_sn_bound(Differential((((2,), 1.0),)), 10.0, samples=1024, n_claim=1)
    assert not ok
    with pytest.raises(ValueError):
        check_sn_bound(Delta(1), 10.0, samples=10)


def test_delta_coefficient_example():
    assert coefficient(Delta(1), exp_quadratic(), M2, 1, 2) == pytest.approx(np.exp(-1))


def test_delta_sinc_at_origin():
    f = F.bl_sinc2(1)
    assert coefficient(Delta(1), f, M2, 0, 0) == pytest.approx(f(np.zeros((1, 1)))[0])


@pytest.mark.parametrize("j,k", [(0, 0), (2, 3), (5, -17)])
def test_box_average_of_constant(j, k):
    assert coefficient(FunctionKernel(BOX), const_one(), M2, j, k) == pytest.approx(1.0, abs=1e-12)


def test_box_average_quincunx():
    box2 = BSplineTensor.single(1, 2)
    assert coefficient(FunctionKernel(box2), const_one(2), QUINCUNX, 3, [1, -2]) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("kernel", [BOX, HAT, BSplineTensor.single(3)])
@pytest.mark.parametrize("k", [0, 1, -3])
def test_kernel_coefficient_parseval(kernel, k):
    # <f, phi(. + k)> = int hat f(xi) conj(hat phi(xi)) e^{-2 pi i k xi} d xi, with hat f the unit tent
    f = F.bl_sinc2(1)

    def integrand(xi):
        return (1 - abs(xi)) * np.real(np.conj(kernel.eval_fourier(xi)[0]) * np.exp(-2j * np.pi * k * xi))

    want = quad(integrand, -1, 1, points=[0], epsabs=1e-13)[0]
    assert coefficient(FunctionKernel(kernel), f, M2, 0, k) == pytest.approx(want, abs=1e-9)


def test_kernel_coefficient_matches_direct_integral():
    f = exp_quadratic()
    j, k = 3, 5
    want = 8 * quad(lambda x: np.exp(-x * x) * HAT.eval(8 * x + k)[0], (-k - 1) / 8, (-k + 1) / 8,
                    points=[-k / 8], epsabs=1e-14)[0]
    assert coefficient(FunctionKernel(HAT), f, M2, j, k) == pytest.approx(want, abs=1e-11)


def test_differential_first_derivative():
    f = exp_quadratic()
    # c_(1) = 1: conj(1) * (-1) * d/dx[f(x/2^j)](-k) = -(2^-j) f'(-k/2^j)
    j, k = 2, 3
    x = -k / 4
    want = -(0.25) * (-2 * x) * np.exp(-x * x)
    assert coefficient(Differential((((1,), 1.0),)), f, M2, j, k) == pytest.approx(want)


def test_differential_complex_coefficient_is_conjugated():
    f = exp_quadratic()
    a = Differential((((0,), 1.0), ((1,), 1j)))
    j, k = 1, 1
    x = -0.5
    want = np.exp(-x * x) + np.conj(1j) * (-1) * 0.5 * (-2 * x) * np.exp(-x * x)
    assert coefficient(a, f, M2, j, k) == pytest.approx(want)


def test_differential_chain_rule_quincunx():
    f = F.gaussian(2)
    a = Differential((((1, 0), 1.0),))
    j, k = 1, np.array([1.0, -2.0])
    lin = np.linalg.inv(QUINCUNX.entries)
    h = 1e-5

    def g(y):
        return f((lin @ y)[None, :])[0]

    e0 = np.array([1.0, 0.0])
    fd = (g(-k + h * e0) - g(-k - h * e0)) / (2 * h)
    assert coefficient(a, f, QUINCUNX, j, k) == pytest.approx(-fd, rel=1e-7)


def test_differential_missing_derivative():
    f = F.aniso(2)
    with pytest.raises(MissingDerivativeError):
        coefficient(Differential((((1, 0), 1.0),)), f, DilationMatrix(2 * np.eye(2)), 1, [0, 0])


def test_narrow_kernel_approaches_point_value():
    w = 1e-3
    bump = CustomKernel(1, lambda x: np.exp(-np.pi * (x[:, 0] / w) ** 2) / w, support_radius=8 * w)
    f = F.gaussian(1)
    ks = [0, 3, -7]
    a = [coefficient(Differential((((0,), 1.0),)), f, M2, 2, k) for k in ks]
    b = [coefficient(FunctionKernel(bump), f, M2, 2, k) for k in ks]
    np.testing.assert_allclose(a, b, atol=2e-3)


def test_snp_class_flags():
    assert Delta(2).in_snp_class(DilationMatrix([[2, 0], [0, 4]]))
    d1 = Differential((((1, 0), 1.0),))
    assert d1.in_snp_class(QUINCUNX)
    assert not d1.in_snp_class(DilationMatrix([[2, 0], [0, 4]]))


def test_vectorised_coefficients_match_scalar():
    f = F.gaussian(1)
    ks = np.arange(-6, 7).reshape(-1, 1)
    fk = FunctionKernel(HAT)
    vec = fk.coefficients(f, M2, 2, ks)
    one = [coefficient(fk, f, M2, 2, k) for k in ks[:, 0]]
    np.testing.assert_allclose(vec, one, rtol=1e-12)
