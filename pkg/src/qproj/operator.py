"""Evaluation of ``Q_j f(x) = sum_k c_k phi(M^j x + k)`` and its L_p error."""
import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from .analyzers import SYNTHESIS_SCALE, Analyzer
from .dilation import DilationMatrix, power
from .errors import ConfigError, MemoryGuardError
from .field import GridFunction, _check_shape, grid_points, lp_norm, trapezoid_weights
from .kernels import Kernel, WindowedSinc

MAX_ACTIVE_TERMS = 10**8
_POINT_CHUNK = 1 << 20
_KERNEL_CHUNK = 1 << 22


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    """Kernel, analyzer, dilation and level of one operator ``Q_j``.

    ``lattice_truncation`` (``None`` = no truncation) drops coefficients with
    ``|k|_inf`` above it.
    """

    kernel: Kernel
    analyzer: Analyzer
    dilation: DilationMatrix
    level: int
    lattice_truncation: float = None

    def __post_init__(self):
        if int(self.level) != self.level or self.level < 0:
            raise ConfigError(f"level must be a non-negative integer, got {self.level}")
        if self.kernel.dim != self.analyzer.dim or self.kernel.dim != self.dilation.dim:
            raise ConfigError("kernel, analyzer and dilation dimensions differ")
        if not math.isfinite(self.kernel.support_radius):
            raise ConfigError("synthesis kernel needs a finite support radius")
        if self.lattice_truncation is not None and self.lattice_truncation < 0:
            raise ConfigError("lattice_truncation must be non-negative")
        object.__setattr__(self, "level", int(self.level))

    @property
    def forward(self):
        """``M^j``."""
        return power(self.dilation, self.level)

    def with_level(self, j):
        return OperatorSpec(self.kernel, self.analyzer, self.dilation, j, self.lattice_truncation)

    def uncertainty(self):
        """Additive error band from kernel truncation (sinc kernels only)."""
        if isinstance(self.kernel, WindowedSinc):
            return self.kernel.truncation_tail() * self.kernel.dim
        return 0.0


@dataclass(frozen=True)
class CoefficientTable:
    kmin: np.ndarray
    values: np.ndarray


def _reach(kernel):
    params = kernel.synth_params()
    if params is None:
        return np.full(kernel.dim, kernel.support_radius)
    _, _, radius, _, shifts, _ = params
    return np.asarray(radius) + np.abs(shifts).max(axis=0)


def active_range(spec, y_lo, y_hi):
    """Integer box of k with ``phi(y + k) != 0`` for some y in ``[y_lo, y_hi]``."""
    reach = _reach(spec.kernel)
    kmin = np.ceil(-np.asarray(y_hi) - reach).astype(np.int64)
    kmax = np.floor(-np.asarray(y_lo) + reach).astype(np.int64)
    if spec.lattice_truncation is not None:
        t = int(math.floor(spec.lattice_truncation))
        kmin = np.maximum(kmin, -t)
        kmax = np.minimum(kmax, t)
    kmax = np.maximum(kmax, kmin - 1)
    count = int(np.prod(kmax - kmin + 1))
    if count > MAX_ACTIVE_TERMS:
        raise MemoryGuardError(f"active lattice has {count} points (limit {MAX_ACTIVE_TERMS})")
    return kmin, kmax


def coefficient_table(spec, f, y_lo, y_hi):
    """Coefficients for every lattice point touching the mapped region."""
    kmin, kmax = active_range(spec, y_lo, y_hi)
    shape = tuple(int(n) for n in kmax - kmin + 1)
    if min(shape) <= 0:
        return CoefficientTable(kmin, np.zeros(shape))
    axes = [np.arange(a, b + 1) for a, b in zip(kmin, kmax)]
    ks = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    vals = np.asarray(spec.analyzer.coefficients(f, spec.dilation, spec.level, ks))
    return CoefficientTable(kmin, SYNTHESIS_SCALE * vals.reshape(shape))


def _synth_generic(kernel, y, table):
    out = np.zeros(y.shape[0], dtype=table.values.dtype)
    if table.values.size == 0:
        return out
    axes = [np.arange(n) + k0 for n, k0 in zip(table.values.shape, table.kmin)]
    ks = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    c = table.values.ravel()
    step = max(1, _KERNEL_CHUNK // max(1, y.shape[0]))
    for s in range(0, ks.shape[0], step):
        kc = ks[s:s + step]
        vals = kernel.eval((y[:, None, :] + kc[None, :, :]).reshape(-1, y.shape[1]))
        out += vals.reshape(y.shape[0], kc.shape[0]) @ c[s:s + step]
    return out


def synthesize(spec, table, y):
    """``sum_k table[k] phi(y + k)`` at already-mapped points ``y``."""
    y = np.asarray(y, dtype=float).reshape(-1, spec.kernel.dim)
    params = spec.kernel.synth_params()
    if params is None:
        return _synth_generic(spec.kernel, y, table)
    if table.values.size == 0:
        return np.zeros(y.shape[0])
    kind, param, radius, rolloff, shifts, tcoef = params

    def run(t):
        return _accel.synthesize(y, kind, param, radius, rolloff, shifts, tcoef, t, table.kmin)

    if np.iscomplexobj(table.values):
        return run(table.values.real) + 1j * run(table.values.imag)
    return run(table.values)


def apply_points(spec, f, x, table=None):
    """``Q_j f`` at the rows of ``x``."""
    x = np.asarray(x, dtype=float).reshape(-1, spec.kernel.dim)
    y = x @ spec.forward.T
    if table is None:
        table = coefficient_table(spec, f, y.min(axis=0), y.max(axis=0))
    return synthesize(spec, table, y)


def _mapped_bounds(spec, box):
    corners = np.array(np.meshgrid(*[list(b) for b in box], indexing="ij")).reshape(len(box), -1).T
    y = corners @ spec.forward.T
    return y.min(axis=0), y.max(axis=0)


def apply(spec, f, box, shape):
    """``Q_j f`` sampled on the uniform grid over ``box``."""
    shape = _check_shape(shape)
    table = coefficient_table(spec, f, *_mapped_bounds(spec, box))
    pts = grid_points(box, shape)
    vals = np.concatenate(
        [apply_points(spec, f, pts[s:s + _POINT_CHUNK], table) for s in range(0, pts.shape[0], _POINT_CHUNK)]
    )
    return GridFunction(box, vals.reshape(shape))


def _chunked_lp(box, shape, p, residual):
    """Trapezoid ``||r||_p`` over the grid, streaming slabs along axis 0."""
    shape = tuple(shape)
    step = np.array([(hi - lo) / (n - 1) for (lo, hi), n in zip(box, shape)])
    axes = [np.linspace(lo, hi, n) for (lo, hi), n in zip(box, shape)]
    inner = math.prod(shape[1:])
    rows = max(1, _POINT_CHUNK // max(1, inner))
    w_inner = trapezoid_weights(shape[1:], step[1:]).ravel() if len(shape) > 1 else np.ones(1)
    total = 0.0
    for s in range(0, shape[0], rows):
        a0 = axes[0][s:s + rows]
        mesh = np.meshgrid(a0, *axes[1:], indexing="ij")
        pts = np.stack([g.ravel() for g in mesh], axis=1)
        r = np.abs(residual(pts))
        if math.isinf(p):
            total = max(total, float(r.max()) if r.size else 0.0)
            continue
        w0 = np.full(a0.size, step[0])
        w0[np.arange(s, s + a0.size) == 0] *= 0.5
        w0[np.arange(s, s + a0.size) == shape[0] - 1] *= 0.5
        w = np.multiply.outer(w0, w_inner).ravel()
        total += float(np.sum(w * r**p))
    return total if math.isinf(p) else total ** (1.0 / p)


def error(spec, f, p, box=None, shape=None):
    """``||f - Q_j f||_p`` by the trapezoid rule on the grid over ``box``.

    The grid is streamed in slabs so large levels stay within memory.
    """
    box = f.box if box is None else tuple(box)
    if shape is None:
        shape = level_shape(spec, box)
    shape = tuple(int(n) for n in shape)
    if min(shape) < 2:
        raise ValueError("grid shape entries must be >= 2")
    table = coefficient_table(spec, f, *_mapped_bounds(spec, box))

    def residual(pts):
        return f(pts) - apply_points(spec, f, pts, table)

    return _chunked_lp(box, shape, p, residual)


def level_shape(spec, box, per_cell=8, base=None, budget=None):
    """Grid resolving each level-j cell with about ``per_cell`` points per axis."""
    d = spec.kernel.dim
    if base is None:
        base = 2049 if d == 1 else 129
    if budget is None:
        budget = 2**24 if d == 1 else 2**25
    fwd = np.abs(spec.forward)
    widths = np.array([hi - lo for lo, hi in box])
    # cells crossed along axis i: row sums of |M^j| times the box width
    cells = fwd.sum(axis=0) * widths
    shape = [max(base, int(math.ceil(per_cell * c)) + 1) for c in cells]
    while math.prod(shape) > budget:
        i = int(np.argmax(shape))
        shape[i] = shape[i] // 2 + 1
    return tuple(shape)


def rescale_check(spec, f, p, box=None, shape=None):
    """Ratio ``||f - Q_j f||_p / ||g - Q_0 g||_p`` with ``g = m^{-j/p} f(M^{-j} .)``.

    Both sides use matched grids: the g-side is evaluated at ``M^j x`` with
    trapezoid weights scaled by ``m^j``.
    """
    if spec.level < 0:
        raise ConfigError("level must be non-negative")
    box = f.box if box is None else tuple(box)
    if shape is None:
        shape = level_shape(spec, box, per_cell=4)
    shape = _check_shape(shape)
    pts = grid_points(box, shape)
    step = np.array([(hi - lo) / (n - 1) for (lo, hi), n in zip(box, shape)])
    w = trapezoid_weights(shape, step).ravel()
    lhs = np.abs(f(pts) - apply_points(spec, f, pts))

    j = spec.level
    g = f.rescaled(spec.dilation, j, p)
    spec0 = spec.with_level(0)
    y = pts @ spec.forward.T
    rhs = np.abs(g(y) - apply_points(spec0, g, y))
    if math.isinf(p):
        a, b = float(lhs.max()), float(rhs.max())
    else:
        a = float(np.sum(w * lhs**p)) ** (1.0 / p)
        b = float(np.sum(spec.dilation.det_abs**j * w * rhs**p)) ** (1.0 / p)
    if a == 0.0 and b == 0.0:
        return 1.0
    return a / b


def lp_error_grid(spec, f, p, box, shape):
    """Error via an explicit GridFunction (small grids; used for cross-checks)."""
    q = apply(spec, f, box, shape)
    vals = f(q.points()).reshape(q.shape) - q.values
    return lp_norm(q.with_values(vals), p)
