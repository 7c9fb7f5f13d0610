"""Target functions, uniform grids, norms, band-limited truncation and moduli."""
import functools
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial import hermite

from .errors import ConfigError, MemoryGuardError, MissingDerivativeError, NumericError

log = logging.getLogger(__name__)

MAX_GRID_POINTS = 2**26
MODULUS_RADII = (0.25, 0.5, 0.75, 0.999)


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TestFunction:
    """A closed-form target ``f`` on R^d.

    ``evaluator`` and ``deriv_evaluator(beta, x)`` act on ``(n, d)`` arrays.
    ``box`` is the axis-aligned region outside which ``|f| < 1e-12``
    (``tail_certified=False`` when no such box exists, e.g. slowly decaying
    band-limited functions).  ``lp_order(p)`` is the largest rate the
    function's own smoothness allows for an order-s approximation in L_p.
    """

    __test__ = False  # not a pytest class

    name: str
    dim: int
    evaluator: object
    box: tuple
    deriv_evaluator: object = None
    max_deriv_order: int = 0
    fourier_evaluator: object = None
    smoothness_tag: str = "smooth"
    tail_certified: bool = True
    lp_order: object = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float).reshape(-1, self.dim)
        return self.evaluator(x)

    def deriv(self, beta, x):
        beta = tuple(int(b) for b in beta)
        x = np.asarray(x, dtype=float).reshape(-1, self.dim)
        if sum(beta) == 0:
            return self.evaluator(x)
        if self.deriv_evaluator is None or sum(beta) > self.max_deriv_order:
            raise MissingDerivativeError(f"{self.name} provides no derivative of order {beta}")
        return self.deriv_evaluator(beta, x)

    def fourier(self, xi):
        if self.fourier_evaluator is None:
            raise MissingDerivativeError(f"{self.name} has no closed-form Fourier transform")
        return self.fourier_evaluator(np.asarray(xi, dtype=float).reshape(-1, self.dim))

    def smoothness_limit(self, p):
        return math.inf if self.lp_order is None else float(self.lp_order(p))

    @property
    def box_lo(self):
        return np.array([b[0] for b in self.box], dtype=float)

    @property
    def box_hi(self):
        return np.array([b[1] for b in self.box], dtype=float)

    def compose_linear(self, lin, scale=1.0, name=None):
        """``x -> scale * f(lin @ x)`` with chain-rule derivatives."""
        lin = np.asarray(lin, dtype=float)
        inv = np.linalg.inv(lin)
        # image of the box under lin^{-1}: bounding box of the mapped corners
        corners = np.array(np.meshgrid(*[list(b) for b in self.box], indexing="ij")).reshape(self.dim, -1).T
        mapped = corners @ inv.T
        box = tuple((float(lo), float(hi)) for lo, hi in zip(mapped.min(axis=0), mapped.max(axis=0)))
        base = self

        def ev(x):
            return scale * base.evaluator(x @ lin.T)

        deriv = None
        if self.deriv_evaluator is not None:
            def deriv(beta, x):
                out = np.zeros(x.shape[0], dtype=complex)
                y = x @ lin.T
                for alpha, c in chain_rule_terms(lin, beta).items():
                    out = out + c * base.deriv(alpha, y)
                return scale * (out.real if np.isrealobj(base.evaluator(y[:1])) else out)

        four = None
        if self.fourier_evaluator is not None:
            det = abs(np.linalg.det(lin))

            def four(xi):
                return scale / det * base.fourier_evaluator(xi @ inv)

        return replace(
            self,
            name=name or f"{self.name}@linear",
            evaluator=ev,
            box=box,
            deriv_evaluator=deriv,
            fourier_evaluator=four,
        )

    def rescaled(self, m, j, p):
        """``g = m**(-j/p) f(M**-j .)``, the level-0 equivalent of level ``j``."""
        from .dilation import power

        scale = m.det_abs ** (-j / p) if math.isfinite(p) else 1.0
        return self.compose_linear(power(m, -j), scale=scale, name=f"{self.name}@rescaled{j}")

    def self_check(self, rtol=1e-5, samples=10, seed=0):
        """Compare the closed-form transform with a trapezoid integral."""
        if self.deriv_evaluator is not None:
            x = np.random.default_rng(seed).uniform(self.box_lo, self.box_hi, (samples, self.dim))
            if not np.allclose(self.deriv((0,) * self.dim, x), self(x)):
                raise NumericError(f"{self.name}: derivative at beta=0 disagrees with the function")
        if self.fourier_evaluator is None or not self.tail_certified:
            return True
        n = 4096 if self.dim == 1 else 256
        g = sample(self, self.box, (n,) * self.dim)
        pts = g.points()
        w = trapezoid_weights(g.shape, g.step).ravel()
        xi = np.random.default_rng(seed).uniform(-2, 2, (samples, self.dim))
        num = np.exp(-2j * np.pi * xi @ pts.T) @ (w * g.values.ravel())
        ref = self.fourier(xi)
        if np.max(np.abs(num - ref)) > rtol:
            raise NumericError(f"{self.name}: Fourier transform self-check failed ({np.max(np.abs(num - ref)):.2e})")
        return True


def chain_rule_terms(lin, beta):
    """Expand ``D^beta [f(lin .)]`` as ``sum_alpha c_alpha (D^alpha f)(lin .)``.

    Each ``d/dx_i`` of ``f(lin x)`` is ``sum_l lin[l, i] (d_l f)(lin x)``.
    """
    d = lin.shape[0]
    terms = {(0,) * d: 1.0}
    for i, bi in enumerate(beta):
        for _ in range(int(bi)):
            new = {}
            for alpha, c in terms.items():
                for l in range(d):
                    if lin[l, i] == 0:
                        continue
                    a2 = list(alpha)
                    a2[l] += 1
                    a2 = tuple(a2)
                    new[a2] = new.get(a2, 0.0) + c * lin[l, i]
            terms = new
    return terms


def _box(half, d):
    return tuple((-half, half) for _ in range(d))


def _gauss_1d_deriv(r, x, a):
    # d^r/dx^r exp(-(a x)^2) = (-a)^r H_r(a x) exp(-(a x)^2), physicists' Hermite
    coef = np.zeros(r + 1)
    coef[r] = 1.0
    return (-a) ** r * hermite.hermval(a * x, coef) * np.exp(-((a * x) ** 2))


def _product_deriv(axis_deriv):
    def deriv(beta, x):
        out = np.ones(x.shape[0])
        for i, r in enumerate(beta):
            out = out * axis_deriv(r, x[:, i])
        return out

    return deriv


def gaussian(dim=1, width=1.0):
    """``prod_i exp(-pi x_i^2 / w^2)`` with transform ``prod_i w exp(-pi w^2 xi_i^2)``."""
    a = math.sqrt(math.pi) / width

    def ev(x):
        return np.exp(-np.pi * np.sum(x * x, axis=1) / width**2)

    def four(xi):
        return (width**dim * np.exp(-np.pi * width**2 * np.sum(xi * xi, axis=1))).astype(complex)

    name = "gaussian" if width == 1.0 else f"gaussian(w={width:g})"
    return TestFunction(name, dim, ev, _box(6.0 * width, dim), _product_deriv(lambda r, t: _gauss_1d_deriv(r, t, a)),
                        12, four, "analytic")


def _bump_1d(t):
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ti * ti))
    return out


def bump(dim=1):
    """Tensor product of the C-infinity bump ``exp(1 - 1/(1 - t^2))`` on (-1, 1)."""

    def ev(x):
        out = np.ones(x.shape[0])
        for i in range(dim):
            out *= _bump_1d(x[:, i])
        return out

    return TestFunction("bump", dim, ev, _box(2.0, dim), smoothness_tag="C-infinity, compact support")


def tensor_sine(dim=1):
    """``prod_i sin(2 pi x_i) exp(-pi x_i^2 / 4)``: a modulated Gaussian."""
    a = math.sqrt(math.pi) / 2.0

    def ev(x):
        return np.prod(np.sin(2 * np.pi * x) * np.exp(-np.pi * x * x / 4.0), axis=1)

    def axis_deriv(r, t):
        out = np.zeros_like(t)
        for q in range(r + 1):
            ds = (2 * np.pi) ** q * np.sin(2 * np.pi * t + q * np.pi / 2)
            out += math.comb(r, q) * ds * _gauss_1d_deriv(r - q, t, a)
        return out

    def four(xi):
        out = np.ones(xi.shape[0], dtype=complex)
        for i in range(dim):
            g = lambda z: 2.0 * np.exp(-4.0 * np.pi * z * z)  # noqa: E731
            out *= (g(xi[:, i] - 1.0) - g(xi[:, i] + 1.0)) / 2j
        return out

    return TestFunction("tensor_sine", dim, ev, _box(8.0, dim), _product_deriv(axis_deriv), 12, four, "analytic")


def bl_sinc2(dim=1):
    """``prod_i sinc(x_i)^2``; transform is the tent ``prod_i max(0, 1 - |xi_i|)``.

    Band-limited to ``[-1, 1]^d`` but decays only like ``|x|^-2``.
    """

    def ev(x):
        return np.prod(np.sinc(x) ** 2, axis=1)

    def four(xi):
        return np.prod(np.maximum(0.0, 1.0 - np.abs(xi)), axis=1).astype(complex)

    return TestFunction("bl_sinc2", dim, ev, _box(5.0, dim), fourier_evaluator=four,
                        smoothness_tag="band-limited to [-1,1]^d", tail_certified=False)


KINK_AT = 1.0 / 3.0


def aniso(dim=2, rough=None, kink=1.0):
    """``prod_i rho_i(x_i)`` with ``rho = (1 + |t - 1/3|^kink) exp(-pi t^2)`` on rough axes.

    Smooth axes use ``exp(-pi t^2)``.  A rough axis limits the L_p rate of an
    order-s scheme to ``min(s, kink + 1/p)`` along that axis.  The kink sits
    at 1/3, which is not a node of any dyadic or 4-adic lattice, so spline
    interpolation does not reproduce it by accident.
    """
    if rough is None:
        rough = (True,) * dim
    rough = tuple(bool(r) for r in rough)
    if len(rough) != dim:
        raise ConfigError("aniso: one roughness flag per axis")

    def ev(x):
        out = np.ones(x.shape[0])
        for i in range(dim):
            g = np.exp(-np.pi * x[:, i] ** 2)
            out *= g * (1.0 + np.abs(x[:, i] - KINK_AT) ** kink) if rough[i] else g
        return out

    def order(p):
        return (kink + (0.0 if math.isinf(p) else 1.0 / p)) if any(rough) else math.inf

    tag = "".join("r" if r else "s" for r in rough)
    return TestFunction(f"aniso[{tag}]", dim, ev, _box(3.5, dim), smoothness_tag=f"kink |t|^{kink:g} on axes {tag}",
                        lp_order=order)


def zero(dim=1):
    return TestFunction("zero", dim, lambda x: np.zeros(x.shape[0]), _box(1.0, dim),
                        lambda beta, x: np.zeros(x.shape[0]), 64, lambda xi: np.zeros(xi.shape[0], dtype=complex),
                        "zero")


BUILTIN_FUNCTIONS = ("gaussian", "bump", "tensor_sine", "bl_sinc2", "aniso", "zero")


@functools.lru_cache(maxsize=None)
def builtin(name, dim):
    """Built-in test function by config name.

    ``aniso`` accepts a suffix selecting the rough axes, e.g. ``aniso:rs``
    (rough along x, smooth along y).
    """
    base, _, arg = name.partition(":")
    if base == "gaussian":
        f = gaussian(dim, float(arg) if arg else 1.0)
    elif base == "bump":
        f = bump(dim)
    elif base == "tensor_sine":
        f = tensor_sine(dim)
    elif base == "bl_sinc2":
        f = bl_sinc2(dim)
    elif base == "aniso":
        rough = tuple(c == "r" for c in arg) if arg else None
        f = aniso(dim, rough)
    elif base == "zero":
        f = zero(dim)
    else:
        raise ConfigError(f"unknown test function {name!r}; choose from {BUILTIN_FUNCTIONS}")
    return f


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples on a uniform tensor grid including both box endpoints."""

    box: tuple
    values: np.ndarray
    shape: tuple = field(init=False)
    step: np.ndarray = field(init=False)

    def __post_init__(self):
        values = np.asarray(self.values)
        box = tuple((float(lo), float(hi)) for lo, hi in self.box)
        if values.ndim != len(box):
            raise ValueError("values must have one axis per box dimension")
        if min(values.shape) < 2:
            raise ValueError("every axis needs at least 2 points")
        if values.size > MAX_GRID_POINTS:
            raise MemoryGuardError(f"grid of {values.size} points exceeds the guard {MAX_GRID_POINTS}")
        step = np.array([(hi - lo) / (n - 1) for (lo, hi), n in zip(box, values.shape)])
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "shape", values.shape)
        object.__setattr__(self, "step", step)

    @property
    def dim(self):
        return len(self.box)

    def axes(self):
        return [np.linspace(lo, hi, n) for (lo, hi), n in zip(self.box, self.shape)]

    def points(self):
        return grid_points(self.box, self.shape)

    def with_values(self, values):
        return GridFunction(self.box, np.asarray(values).reshape(self.shape))


def grid_points(box, shape):
    axes = [np.linspace(lo, hi, n) for (lo, hi), n in zip(box, shape)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _check_shape(shape):
    shape = tuple(int(n) for n in shape)
    if min(shape) < 2:
        raise ValueError("grid shape entries must be >= 2")
    if math.prod(shape) > MAX_GRID_POINTS:
        raise MemoryGuardError(f"grid of {math.prod(shape)} points exceeds the guard {MAX_GRID_POINTS}")
    return shape


def sample(f, box, shape):
    """Evaluate ``f`` on the uniform grid over ``box`` with ``shape`` points."""
    shape = _check_shape(shape)
    pts = grid_points(box, shape)
    return GridFunction(box, np.asarray(f(pts)).reshape(shape))


def trapezoid_weights(shape, step):
    w = np.ones(())
    for n, h in zip(shape, step):
        wa = np.full(n, h)
        wa[0] = wa[-1] = 0.5 * h
        w = np.multiply.outer(w, wa)
    return w


def lp_norm(g, p):
    """Composite trapezoid approximation of ``||g||_p``; grid max for p = inf."""
    v = np.abs(g.values)
    if math.isinf(p):
        return float(v.max())
    w = trapezoid_weights(g.shape, g.step)
    return float(np.sum(w * v**p) ** (1.0 / p))


def frequency_grid(g):
    """Per-axis DFT frequencies ``n / (N * step)`` of a grid function."""
    return [np.fft.fftfreq(n, d=h) for n, h in zip(g.shape, g.step)]


def _band_coordinates(g, a):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if abs(np.linalg.det(a)) < 1e-300:
        raise NumericError("band matrix is singular")
    inv = np.linalg.inv(a)
    freqs = np.meshgrid(*frequency_grid(g), indexing="ij")
    xi = np.stack([f.ravel() for f in freqs], axis=1)
    return xi @ inv.T


def _raised_cosine(u):
    # 1 on [0, 1/2], cosine roll-off to 0 at 1
    return np.where(u <= 0.5, 1.0, np.where(u >= 1.0, 0.0, 0.5 * (1.0 + np.cos(2.0 * np.pi * (u - 0.5)))))


def fourier_truncate(g, a, smooth=False):
    """Keep the DFT bins with ``A^{-1} xi`` in ``[-1/2, 1/2]^d``.

    With ``smooth=True`` the cutoff is a tensor raised cosine falling from 1
    on ``A T^d`` to 0 on the boundary of ``2 A T^d``.
    """
    for n in g.shape:
        if n & (n - 1):
            raise ValueError("fourier_truncate needs power-of-two grid sizes")
    eta = np.abs(_band_coordinates(g, a))
    if smooth:
        mask = np.prod(_raised_cosine(eta), axis=1)
    else:
        mask = np.all(eta <= 0.5, axis=1).astype(float)
    spec = np.fft.fftn(g.values) * mask.reshape(g.shape)
    out = np.fft.ifftn(spec)
    if np.isrealobj(g.values):
        out = out.real
    return g.with_values(out)


def _next_pow2(n):
    return 1 << max(1, int(math.ceil(math.log2(max(2, n)))))


def auto_shape(box, band_halfwidths, base=None, oversample=4.0):
    """Power-of-two grid resolving frequencies up to ``band_halfwidths``."""
    d = len(box)
    if base is None:
        base = 4096 if d == 1 else (256 if d == 2 else 64)
    shape = []
    for (lo, hi), b in zip(box, band_halfwidths):
        shape.append(_next_pow2(max(base, oversample * b * (hi - lo))))
    budget = MAX_GRID_POINTS if d == 1 else 2**22
    while math.prod(shape) > budget:
        i = int(np.argmax(shape))
        shape[i] //= 2
        log.warning("grid capped at %s points; the highest bands are unresolved", shape)
    return tuple(shape)


def band_halfwidths(a, smooth=False):
    """Per-axis extent of ``A T^d`` (doubled for the smooth cutoff)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    ext = 0.5 * np.abs(a).sum(axis=1)
    return ext * (2.0 if smooth else 1.0)


def _midbin_box(box, shape, a):
    """Stretch ``box`` so a diagonal sharp cutoff falls midway between DFT bins.

    The discrete tail is then a midpoint sum of the continuous one instead of
    losing half of the boundary bin.  Non-diagonal bands are left alone.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if np.any(a - np.diag(np.diag(a))):
        return box
    out = []
    for (lo, hi), n, b in zip(box, shape, 0.5 * np.abs(np.diag(a))):
        period = n * (hi - lo) / (n - 1)
        period = (math.ceil(period * b - 0.5) + 0.5) / b
        half = 0.5 * period * (n - 1) / n
        mid = 0.5 * (lo + hi)
        out.append((mid - half, mid + half))
    return tuple(out)


def best_approx(f, a, p, box=None, shape=None, rtol=2e-3):
    """Surrogate for ``E_A(f)_p = inf ||f - g||_p`` over g band-limited to ``A T^d``.

    Returns ``||f - S f||_p``: a sharp Fourier cutoff for ``1 < p < inf``, a
    raised-cosine cutoff between ``A T^d`` and ``2 A T^d`` for p in {1, inf},
    where the sharp projector is unbounded.  ``f`` is a TestFunction (sampled
    on its decay box) or a GridFunction (used as given).

    With the sharp cutoff the DFT bins sample the spectrum at spacing
    ``1/period``, so for TestFunctions the period is doubled until the result
    moves by less than ``rtol``.
    """
    smooth = p == 1 or math.isinf(p)
    if isinstance(f, GridFunction):
        if not np.any(f.values):
            return 0.0
        return _truncation_error(f, a, p, smooth)
    box = f.box if box is None else box
    if shape is None:
        shape = auto_shape(box, band_halfwidths(a, smooth))
    shape = _check_shape(shape)
    g = sample(f, box, shape)
    if not np.any(g.values):
        return 0.0
    if smooth:
        return _truncation_error(g, a, p, smooth)
    prev = None
    budget = 2**22
    floor = 1e-13 * lp_norm(g, p)
    while True:
        g = sample(f, _midbin_box(box, shape, a), shape)
        val = _truncation_error(g, a, p, smooth)
        if val <= floor or (prev is not None and abs(val - prev) <= rtol * val):
            return val
        if 2 * math.prod(shape) > budget:
            if prev is not None:
                log.warning("best_approx: spectral sampling unconverged (last change %.2e)", abs(val - prev) / max(val, 1e-300))
            return val
        prev = val
        # double every axis that fits the budget, widest first
        for i in sorted(range(len(box)), key=lambda q: box[q][0] - box[q][1]):
            if 2 * math.prod(shape) > budget:
                break
            lo, hi = box[i]
            c, w = 0.5 * (lo + hi), (hi - lo) * (2 * shape[i] - 1) / (shape[i] - 1)
            box = box[:i] + ((c - 0.5 * w, c + 0.5 * w),) + box[i + 1:]
            shape = shape[:i] + (2 * shape[i],) + shape[i + 1:]


def _truncation_error(g, a, p, smooth):
    s = fourier_truncate(g, a, smooth=smooth)
    return lp_norm(g.with_values(g.values - s.values), p)


# ---------------------------------------------------------------------------
# differences and moduli of smoothness
# ---------------------------------------------------------------------------

def difference(f, t, s, x):
    """s-th forward difference ``sum_nu (-1)^nu C(s, nu) f(x + nu t)``."""
    if s < 1:
        raise ValueError("difference order must be >= 1")
    x = np.asarray(x, dtype=float)
    dim = getattr(f, "dim", None) or (x.shape[-1] if x.ndim > 1 else 1)
    x = x.reshape(-1, dim)
    t = np.asarray(t, dtype=float).reshape(1, dim)
    out = np.zeros(x.shape[0])
    for nu in range(s + 1):
        out = out + (-1) ** nu * math.comb(s, nu) * f(x + nu * t)
    return out


def modulus_steps(a, directions=32, seed=0):
    """Sample steps ``t = A^{-1}(r u)`` with ``|A t| < 1``.

    Radii cycle through 0.25, 0.5, 0.75, 0.999; the unit vectors come from a
    seeded generator.  Duplicate steps (always the case in d = 1) are merged.
    """
    if directions < 32:
        raise ValueError("at least 32 directions are required")
    a = np.atleast_2d(np.asarray(a, dtype=float))
    d = a.shape[0]
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((directions, d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    r = np.array([MODULUS_RADII[q % len(MODULUS_RADII)] for q in range(directions)])
    t = (r[:, None] * u) @ np.linalg.inv(a).T
    if d == 1:
        t = np.abs(t)
    return np.unique(np.round(t, 15), axis=0)


def modulus(f, a, s, p, directions=32, box=None, shape=None, seed=0):
    """Anisotropic modulus ``Omega_s(f, A^{-1})_p = sup_{|A t| < 1} ||Delta_t^s f||_p``.

    The supremum is taken over ``modulus_steps``; the norm integrates over the
    function's box widened by ``s |t|`` so the differences are not clipped.
    """
    steps = modulus_steps(a, directions, seed)
    box = f.box if box is None else box
    reach = s * np.abs(steps).max(axis=0)
    wide = tuple((lo - r, hi + r) for (lo, hi), r in zip(box, reach))
    if shape is None:
        shape = tuple(4096 if len(box) == 1 else 256 for _ in box)
    shape = _check_shape(shape)
    pts = grid_points(wide, shape)
    best = 0.0
    for t in steps:
        vals = difference(f, t, s, pts)
        best = max(best, lp_norm(GridFunction(wide, vals.reshape(shape)), p))
    return best


@dataclass(frozen=True)
class BesovTail:
    value: float
    norm: float
    terms: tuple
    last_term_ratio: float


def besov_tail(f, m, s_exp, p, q, nu_max, box=None, shape=None):
    """Partial Besov norm ``||f||_p + (sum_{nu<=nu_max} m^{s q nu/d} E_{M^nu}(f)_p^q)^{1/q}``.

    ``last_term_ratio`` (last summand over the sum) is the convergence
    diagnostic; the finite sum is evidence of membership, not a proof.
    """
    from .dilation import power

    if nu_max > 16:
        raise ValueError("nu_max must be <= 16")
    d = m.dim
    if isinstance(f, GridFunction):
        g = f
    else:
        box = f.box if box is None else box
        if shape is None:
            smooth = p == 1 or math.isinf(p)
            shape = auto_shape(box, band_halfwidths(power(m, nu_max), smooth))
        g = sample(f, box, shape)
    norm = lp_norm(g, p)
    terms = []
    for nu in range(1, nu_max + 1):
        e = best_approx(g, power(m, nu), p)
        terms.append(m.det_abs ** (s_exp / d * q * nu) * e**q)
    total = float(sum(terms))
    ratio = terms[-1] / total if total > 0 else 0.0
    return BesovTail(norm + total ** (1.0 / q), norm, tuple(terms), ratio)
