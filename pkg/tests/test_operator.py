import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qproj import field as F
from qproj import operator as O
from qproj.analyzers import Delta, Differential, FunctionKernel
from qproj.dilation import DilationMatrix
from qproj.errors import ConfigError, MemoryGuardError
from qproj.field import TestFunction
from qproj.kernels import BSplineTensor, CustomKernel, WindowedSinc

M2 = DilationMatrix(2.0)
QUINCUNX = DilationMatrix([[1, 1], [-1, 1]])
HAT, BOX = BSplineTensor.single(2), BSplineTensor.single(1)


def spec(kernel=HAT, analyzer=None, m=M2, j=3, trunc=None):
    return O.OperatorSpec(kernel, analyzer or Delta(kernel.dim), m, j, trunc)


def test_zero_function():
    q = O.apply(spec(), F.zero(1), ((-2, 2),), (65,))
    assert not np.any(q.values)


def test_sinc_reconstruction():
    s = spec(WindowedSinc((0.5,), 0.1, 200), j=2)
    f = F.bl_sinc2(1)
    err = O.error(s, f, math.inf, ((-5, 5),), (2001,))
    assert err < 1e-3
    assert s.uncertainty() == pytest.approx(1.0105e-3, rel=1e-3)


def test_box_box_reproduces_constants():
    one = TestFunction("1", 1, lambda x: np.ones(x.shape[0]), ((-4, 4),))
    q = O.apply(spec(BOX, FunctionKernel(BOX), j=2), one, ((-3, 3),), (301,))
    np.testing.assert_allclose(q.values, 1.0, atol=1e-12)


def test_hat_delta_interpolates_at_nodes():
    f = F.gaussian(1)
    x = np.arange(-16, 17).reshape(-1, 1) / 8.0
    np.testing.assert_allclose(O.apply_points(spec(j=3), f, x), f(x), atol=1e-15)


def test_hat_delta_brute_force():
    f = F.tensor_sine(1)
    x = np.linspace(-2, 2, 57).reshape(-1, 1)
    j = 2
    want = np.zeros(x.shape[0])
    for k in range(-40, 41):
        want += f(np.array([[-k / 4]]))[0] * HAT.eval(4 * x[:, 0] + k)
    np.testing.assert_allclose(O.apply_points(spec(j=j), f, x), want, atol=1e-14)


def test_custom_kernel_generic_path():
    custom = CustomKernel(1, HAT.eval, HAT.eval_fourier, support_radius=1.0)
    f = F.gaussian(1)
    x = np.linspace(-3, 3, 101).reshape(-1, 1)
    np.testing.assert_allclose(O.apply_points(spec(custom), f, x), O.apply_points(spec(), f, x), atol=1e-14)


def test_complex_coefficients():
    f = F.gaussian(1)
    a = Differential((((0,), 1.0), ((1,), 0.5j)))
    x = np.linspace(-1, 1, 11).reshape(-1, 1)
    vals = O.apply_points(spec(analyzer=a), f, x)
    re = O.apply_points(spec(), f, x)
    assert np.iscomplexobj(vals)
    np.testing.assert_allclose(vals.real, re, atol=1e-14)


def test_error_examples():
    f = F.gaussian(1)
    assert O.error(spec(), F.zero(1), 2) == 0.0
    e5 = O.error(spec(j=5), f, 2)
    e6 = O.error(spec(j=6), f, 2)
    assert 0 < e6 < e5


def test_error_matches_grid_route():
    f = F.bump(1)
    s = spec(j=4)
    box, shape = ((-2.0, 2.0),), (513,)
    for p in (1, 2, math.inf):
        assert O.error(s, f, p, box, shape) == pytest.approx(O.lp_error_grid(s, f, p, box, shape), rel=1e-12)


def test_error_streaming_in_two_dimensions(monkeypatch):
    f = F.gaussian(2)
    s = spec(BSplineTensor.single(2, 2), m=QUINCUNX, j=4)
    box, shape = ((-3, 3), (-3, 3)), (129, 97)
    full = O.lp_error_grid(s, f, 2, box, shape)
    monkeypatch.setattr(O, "_POINT_CHUNK", 500)
    assert O.error(s, f, 2, box, shape) == pytest.approx(full, rel=1e-12)


@given(st.floats(-3, 3), st.floats(-3, 3), st.sampled_from(["delta", "box", "diff"]))
def test_linearity(a, b, kind):
    f, g = F.gaussian(1), F.tensor_sine(1)
    analyzer = {"delta": Delta(1), "box": FunctionKernel(BOX), "diff": Differential((((0,), 1.0), ((1,), 0.3)))}[kind]
    s = spec(analyzer=analyzer, j=2)
    combo = TestFunction("af+bg", 1, lambda x: a * f(x) + b * g(x), f.box,
                         lambda beta, x: a * f.deriv(beta, x) + b * g.deriv(beta, x), 2)
    x = np.linspace(-4, 4, 97).reshape(-1, 1)
    lhs = O.apply_points(s, combo, x)
    rhs = a * O.apply_points(s, f, x) + b * O.apply_points(s, g, x)
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_locality():
    f = F.gaussian(1)
    box, shape = ((-2, 2),), (257,)
    base = O.apply(spec(j=3), f, box, shape).values
    for t in (40, 80, 10_000):
        wider = O.apply(spec(j=3, trunc=t), f, box, shape).values
        assert np.max(np.abs(wider - base)) < 1e-10


def test_lattice_truncation_drops_terms():
    f = F.gaussian(1)
    x = np.array([[0.0], [1.5]])
    cut = O.apply_points(spec(j=3, trunc=4), f, x)
    assert cut[0] == pytest.approx(1.0) and cut[1] == 0.0


@pytest.mark.parametrize("analyzer", [Delta(1), FunctionKernel(BOX)])
def test_error_monotone_trend(analyzer):
    f = F.gaussian(1)
    errs = [O.error(spec(analyzer=analyzer, j=j), f, 2) for j in range(2, 9)]
    bumps = sum(b >= a for a, b in zip(errs, errs[1:]))
    assert bumps <= 1


SPECS = [
    spec(j=1),
    spec(BSplineTensor.single(2, 2), FunctionKernel(BSplineTensor.single(1, 2)), QUINCUNX, 1),
    spec(BSplineTensor.single(3, 2), Delta(2), DilationMatrix([[2, 0], [0, 4]]), 1),
]


@pytest.mark.parametrize("s", SPECS)
@pytest.mark.parametrize("j", [0, 1, 3])
def test_rescale_identity(s, j):
    f = F.gaussian(s.kernel.dim)
    s = s.with_level(j)
    for p in (2, math.inf):
        r = O.rescale_check(s, f, p)
        if j == 0:
            assert r == 1.0
        assert r == pytest.approx(1.0, abs=1e-6)


def test_spec_validation():
    with pytest.raises(ConfigError):
        O.OperatorSpec(HAT, Delta(1), M2, -1)
    with pytest.raises(ConfigError):
        O.OperatorSpec(HAT, Delta(2), M2, 1)
    with pytest.raises(ConfigError):
        O.OperatorSpec(CustomKernel(1, HAT.eval), Delta(1), M2, 1)


def test_active_set_guard():
    with pytest.raises(MemoryGuardError):
        O.apply(spec(j=40), F.gaussian(1), ((-6, 6),), (9,))


def test_level_shape_resolves_cells():
    s = spec(BSplineTensor.single(2, 2), Delta(2), DilationMatrix([[2, 0], [0, 4]]), 3)
    shape = O.level_shape(s, ((-1, 1), (-1, 1)))
    assert shape[0] >= 8 * 16 and shape[1] >= 8 * 64


def test_backends_agree_end_to_end():
    code = ("import numpy as np; from qproj import field as F, operator as O; "
            "from qproj.kernels import BSplineTensor; from qproj.analyzers import FunctionKernel; "
            "from qproj.dilation import DilationMatrix; "
            "s = O.OperatorSpec(BSplineTensor.single(3, 2), FunctionKernel(BSplineTensor.single(1, 2)), "
            "DilationMatrix([[1, 1], [-1, 1]]), 3); "
            "print(repr(O.error(s, F.gaussian(2), 2, shape=(97, 97))))")
    out = {}
    for flag in ("0", "1"):
        env = dict(os.environ, QP_DISABLE_NUMBA=flag)
        out[flag] = float(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                                         check=True).stdout)
    assert out["0"] == pytest.approx(out["1"], rel=1e-12)
