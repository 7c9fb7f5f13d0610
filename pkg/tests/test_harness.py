import math

import numpy as np
import pytest

from qproj.analyzers import Delta, FunctionKernel
from qproj.dilation import DilationMatrix
from qproj.errors import ConfigError
from qproj.harness import Experiment, aniso_run, fit_slope, run
from qproj.kernels import BSplineTensor, WindowedSinc

M2 = DilationMatrix(2.0)
HAT, BOX = BSplineTensor.single(2), BSplineTensor.single(1)


def test_fit_slope_exact_power_law():
    levels = list(range(0, 9))
    vals = [3.0 * 2.0 ** (-1.7 * j) for j in levels]
    assert fit_slope(levels, vals, 2.0) == pytest.approx(1.7, abs=1e-12)
    assert math.isnan(fit_slope([0, 1, 2, 3], [1, 2, 3, 4], 2.0))


def test_experiment_validation():
    with pytest.raises(ConfigError):
        Experiment(HAT, Delta(1), M2, "gaussian", levels=())
    with pytest.raises(ConfigError):
        Experiment(HAT, Delta(1), M2, "gaussian", levels=(3, 2))
    with pytest.raises(ConfigError):
        Experiment(HAT, Delta(1), M2, "gaussian", p=0.5)


def test_insufficient_levels():
    with pytest.raises(ConfigError):
        run(Experiment(HAT, Delta(1), M2, "gaussian", levels=(2, 3, 4)))


def test_zero_effective_order_rejected():
    with pytest.raises(ConfigError):
        run(Experiment(HAT.scaled(2.0), Delta(1), M2, "gaussian"))


def test_hat_delta_rate():
    r = run(Experiment(HAT, Delta(1), M2, "gaussian", 2.0))
    assert r.verdict == "PASS"
    assert r.slope == pytest.approx(2.0, abs=0.1)
    assert r.predicted_order == 2 and not r.kantorovich
    assert all(np.isfinite(r.ratios))


def test_box_delta_rate():
    r = run(Experiment(BOX, Delta(1), M2, "gaussian", 2.0))
    assert r.verdict == "PASS" and r.slope == pytest.approx(1.0, abs=0.1)


def test_sinc_exact():
    r = run(Experiment(WindowedSinc((0.5,)), Delta(1), M2, "bl_sinc2", math.inf, box=((-5, 5),), shape=(2001,),
                       max_s=2))
    assert r.verdict == "EXACT" and math.isnan(r.slope)


def test_zero_trivial():
    r = run(Experiment(HAT, Delta(1), M2, "zero"))
    assert r.verdict == "TRIVIAL" and r.errors == [0.0] * 7


def test_aniso_zero_trivial():
    r = aniso_run(Experiment(BSplineTensor((2, 2)), Delta(2), DilationMatrix([[2, 0], [0, 4]]), "zero",
                             levels=(1, 2)))
    assert r.verdict == "TRIVIAL"


def test_aniso_rejects_non_diagonal():
    with pytest.raises(ConfigError):
        aniso_run(Experiment(BSplineTensor((2, 2)), Delta(2), DilationMatrix([[1, 1], [-1, 1]]), "aniso"))


def test_aniso_small_levels():
    r = aniso_run(Experiment(BSplineTensor((2, 2)), Delta(2), DilationMatrix([[2, 0], [0, 4]]), "aniso",
                             levels=(1, 2, 3)))
    assert r.verdict == "PASS"
    assert all(0.25 <= t <= 4 for t in r.ratios)


@pytest.mark.parametrize("kernel,analyzer,f,p", [
    (HAT, Delta(1), "gaussian", 2.0),
    (HAT, FunctionKernel(BOX), "gaussian", 2.0),
    (BSplineTensor.single(3), Delta(1), "tensor_sine", math.inf),
    (HAT, Delta(1), "bump", 1.0),
])
def test_bound_sanity(kernel, analyzer, f, p):
    r = run(Experiment(kernel, analyzer, M2, f, p))
    assert r.verdict == "PASS"
    for e, w, t in zip(r.errors, r.moduli, r.tail_terms):
        assert e <= 50 * (w + t)


def test_kantorovich_ratio_without_tail():
    r = run(Experiment(HAT, FunctionKernel(BOX), M2, "gaussian", 2.0))
    assert r.kantorovich and r.tail_terms == [0.0] * 7
    assert max(r.ratios) / min(r.ratios) < 20


def test_report_determinism():
    exp = Experiment(HAT, Delta(1), M2, "tensor_sine", 2.0, seed=5)
    assert run(exp).to_dict() == run(exp).to_dict()


def test_one_sided_marking():
    r = run(Experiment(BSplineTensor.single(4), Delta(1), M2, "gaussian", 2.0, s=4, levels=(2, 3, 4, 5)))
    assert not r.one_sided
    r2 = run(Experiment(BSplineTensor.single(2, 2), Delta(2), DilationMatrix(2 * np.eye(2)), "aniso", 2.0,
                        levels=(2, 3, 4, 5)))
    assert r2.one_sided and r2.predicted_order == pytest.approx(1.5)


def test_csv_rows():
    r = run(Experiment(HAT, Delta(1), M2, "gaussian", 2.0, levels=(2, 3, 4, 5)))
    rows = list(r.csv_rows())
    assert rows[0] == ("j", "error", "modulus", "tail_term", "ratio") and len(rows) == 5
