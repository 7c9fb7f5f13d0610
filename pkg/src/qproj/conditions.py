"""Numerical certification of Strang-Fix and compatibility orders."""
import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .calculus import cauchy_taylor_1d, factorial_multi, taylor_product
from .errors import AmbiguousCertificateError, ConfigError, SingularSystemError
from .kernels import BSplineTensor

DEFAULT_TOL = 1e-8
SEPARATION = 10.0
DEFAULT_LATTICE_RADIUS = 50
DEFAULT_DELTA = 0.25


@dataclass
class OrderCertificate:
    strang_fix_order: int
    compatibility_order: int
    effective_order: int
    tolerance_used: float
    max_order_tested: int
    residuals: dict = field(default_factory=dict)
    ambiguous: bool = False

    def to_dict(self):
        return asdict(self)


def _deriv_levels(coeffs, order):
    """Max over multi-indices of each total degree of ``|D^beta|``, plus the argmax."""
    d = coeffs.ndim
    levels = []
    for r in range(order + 1):
        best, arg = 0.0, None
        for beta in itertools.product(range(r + 1), repeat=d):
            if sum(beta) != r:
                continue
            v = abs(coeffs[beta]) * factorial_multi(beta)
            if v >= best:
                best, arg = v, beta
        levels.append((best, arg))
    return levels


def _vanishing_order(level_max, max_s, tol, what):
    s = 0
    while s < max_s and level_max[s] < tol:
        s += 1
    if s < max_s and level_max[s] < SEPARATION * tol:
        raise AmbiguousCertificateError(
            f"{what}: order-{s} residual {level_max[s]:.3e} is within {SEPARATION:g}x of tol {tol:g}"
        )
    return s


def _lattice(d, radius):
    pts = [k for k in itertools.product(range(-radius, radius + 1), repeat=d) if any(k)]
    return np.array(pts, dtype=float)


def _taylor_at(kernel, centers, order):
    if hasattr(kernel, "fourier_taylor_many"):
        return kernel.fourier_taylor_many(centers, order)
    return np.stack([kernel.fourier_taylor(c, order) for c in centers])


def strang_fix_residuals(kernel, max_s, lattice_radius=DEFAULT_LATTICE_RADIUS):
    """Per-order max of ``|D^beta hat phi(k)|`` over nonzero lattice points."""
    d = kernel.dim
    ks = _lattice(d, lattice_radius)
    coeffs = _taylor_at(kernel, ks, max_s)
    levels = []
    for r in range(max_s + 1):
        best, where = 0.0, None
        for beta in itertools.product(range(r + 1), repeat=d):
            if sum(beta) != r:
                continue
            v = np.abs(coeffs[(slice(None),) + beta]) * factorial_multi(beta)
            i = int(np.argmax(v))
            if v[i] >= best:
                best, where = float(v[i]), (beta, tuple(int(c) for c in ks[i]))
        levels.append((best, where))
    return levels


def strang_fix_order(kernel, max_s=6, lattice_radius=DEFAULT_LATTICE_RADIUS, tol=DEFAULT_TOL, residuals=None):
    """Largest ``s <= max_s`` with ``|D^beta hat phi(k)| < tol`` for ``[beta] < s``, k != 0."""
    if lattice_radius < 1:
        raise ValueError("lattice_radius must be >= 1")
    if max_s > kernel.fourier_smoothness_order - kernel.dim - 1:
        raise ConfigError(f"max_s={max_s} exceeds the kernel's certified Fourier smoothness")
    levels = strang_fix_residuals(kernel, max_s, lattice_radius)
    if residuals is not None:
        for r, (v, where) in enumerate(levels):
            residuals[f"sf[{r}] beta={where[0]} k={where[1]}"] = v
    return _vanishing_order([v for v, _ in levels], max_s, tol, "Strang-Fix")


def compatibility_taylor(kernel, analyzer, order):
    """Taylor coefficients at 0 of ``1 - hat phi(xi) conj(hat phi~(xi))``."""
    zero = np.zeros(kernel.dim)
    a = kernel.fourier_taylor(zero, order)
    b = np.conj(analyzer.symbol_taylor(zero, order))
    prod = -taylor_product(a, b)
    prod[(0,) * kernel.dim] += 1.0
    return prod


def compatibility_order(kernel, analyzer, max_s=6, tol=DEFAULT_TOL, residuals=None):
    """Largest ``s`` with ``D^beta (1 - hat phi conj(hat phi~))(0)`` vanishing for ``[beta] < s``."""
    if kernel.dim != analyzer.dim:
        raise ConfigError("kernel and analyzer dimensions differ")
    coeffs = compatibility_taylor(kernel, analyzer, max_s)
    levels = _deriv_levels(coeffs, max_s)
    if residuals is not None:
        for r, (v, beta) in enumerate(levels):
            residuals[f"compat[{r}] beta={beta}"] = v
    return _vanishing_order([v for v, _ in levels], max_s, tol, "compatibility")


def certify(kernel, analyzer, max_s=6, lattice_radius=DEFAULT_LATTICE_RADIUS, tol=DEFAULT_TOL):
    """Both orders plus their minimum, with the residual table."""
    residuals = {}
    sf = strang_fix_order(kernel, max_s, lattice_radius, tol, residuals)
    co = compatibility_order(kernel, analyzer, max_s, tol, residuals)
    return OrderCertificate(sf, co, min(sf, co), tol, max_s, residuals)


@dataclass(frozen=True)
class TailBound:
    value: float
    per_beta: dict
    last_shell_ratio: float
    decay_exponent: float
    status: str


def tail_derivative_bound(kernel, s, lattice_radius=DEFAULT_LATTICE_RADIUS, delta=DEFAULT_DELTA, grid=9):
    """Truncated ``max_beta sum_{l != 0} sup_{xi in 2 delta T^d} |D^beta hat phi(xi + l)|``.

    Covers ``s <= [beta] <= s + d + 1`` and ``0 < |l|_inf <= lattice_radius``.
    Status is ``divergent`` when the outermost shell carries more than 10% of
    the total or the shell contributions decay no faster than ``R^-1``,
    ``borderline`` when they decay like ``R^-q`` with ``q < 2.5``, and
    ``converged`` otherwise.
    """
    if not 0.0 < delta < 0.5:
        raise ValueError("delta must lie in (0, 1/2)")
    d = kernel.dim
    top = s + d + 1
    ticks = np.linspace(-delta, delta, grid)
    local = np.stack([g.ravel() for g in np.meshgrid(*([ticks] * d), indexing="ij")], axis=1)
    ls = _lattice(d, lattice_radius)
    shell = np.max(np.abs(ls), axis=1).astype(int)
    centers = (ls[:, None, :] + local[None, :, :]).reshape(-1, d)
    coeffs = _taylor_at(kernel, centers, top)
    coeffs = coeffs.reshape((ls.shape[0], local.shape[0]) + coeffs.shape[1:])
    per_beta = {}
    worst = None
    for beta in itertools.product(range(top + 1), repeat=d):
        if not s <= sum(beta) <= top:
            continue
        sup = np.abs(coeffs[(slice(None), slice(None)) + beta]).max(axis=1) * factorial_multi(beta)
        shells = np.bincount(shell, weights=sup, minlength=lattice_radius + 1)[1:]
        total = float(shells.sum())
        ratio = float(shells[-1] / total) if total > 0 else 0.0
        r = np.arange(1, lattice_radius + 1)
        tailpart = slice(lattice_radius // 2, None)
        ok = shells[tailpart] > 0
        if ok.sum() >= 2:
            slope = np.polyfit(np.log(r[tailpart][ok]), np.log(shells[tailpart][ok]), 1)[0]
            q = float(-slope)
        else:
            q = math.inf
        per_beta[str(beta)] = {"sum": total, "last_shell_ratio": ratio, "decay_exponent": q}
        if worst is None or total > worst[0]:
            worst = (total, ratio, q)
    exps = [v["decay_exponent"] for v in per_beta.values()]
    ratios = [v["last_shell_ratio"] for v in per_beta.values()]
    qmin, rmax = min(exps), max(ratios)
    if rmax > 0.1 or qmin <= 1.1:
        status = "divergent"
    elif qmin < 2.5:
        status = "borderline"
    else:
        status = "converged"
    return TailBound(worst[0], per_beta, rmax, qmin, status)


def quasi_interpolation_coeffs(base, target_order):
    """Symmetric shift combination of ``base`` compatible with the delta to ``target_order``.

    Per axis, solves for weights ``b_0, ..., b_r`` (``r = ceil(target/2) - 1``)
    on shifts ``0, +-1, ..., +-r`` so that the even Taylor coefficients of
    ``1 - hat B(xi) (b_0 + 2 sum_l b_l cos(2 pi l xi))`` below ``target_order``
    vanish; odd ones vanish by symmetry.  Multivariate bases take the tensor
    product of the per-axis solutions.
    """
    if not isinstance(base, BSplineTensor) or len(base.shifts_coeffs) != 1 or any(base.shifts_coeffs[0][0]):
        raise ConfigError("base must be a single unshifted B-spline tensor")
    if target_order > min(base.orders):
        raise ConfigError(f"target order {target_order} exceeds the Strang-Fix order {min(base.orders)}")
    per_axis = []
    for n in base.orders:
        r = max(0, math.ceil(target_order / 2) - 1)
        order = 2 * r
        bhat = cauchy_taylor_1d(lambda z, n=n: base._axis_symbol(z, n, 0), 0.0, order).real
        mat = np.zeros((r + 1, r + 1))
        for lidx in range(r + 1):
            # Taylor coefficients of the l-th basis symbol: 1 or 2 cos(2 pi l xi)
            basis = np.zeros(order + 1)
            for e in range(0, order + 1, 2):
                basis[e] = (1.0 if lidx == 0 else 2.0) * (-1) ** (e // 2) * (2 * np.pi * lidx) ** e / math.factorial(e)
            prod = np.convolve(bhat, basis)[: order + 1]
            mat[:, lidx] = prod[0::2]
        rhs = np.zeros(r + 1)
        rhs[0] = 1.0
        cond = np.linalg.cond(mat)
        if not np.isfinite(cond) or cond > 1e8:
            raise SingularSystemError(f"quasi-interpolation system is singular (cond={cond:.3e})", cond)
        w = np.linalg.solve(mat, rhs)
        axis = {0: w[0]}
        for lidx in range(1, r + 1):
            axis[lidx] = axis[-lidx] = w[lidx]
        per_axis.append(axis)
    out = []
    for combo in itertools.product(*[sorted(a.items()) for a in per_axis]):
        shift = tuple(int(s) for s, _ in combo)
        coef = float(np.prod([c for _, c in combo]))
        out.append((shift, coef))
    return out
