"""Synthesis kernels: tensor B-spline combinations, windowed sinc, custom.

Fourier transforms use the convention ``hat f(xi) = int f(x) exp(-2 pi i x.xi) dx``.
"""
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import polygamma

from . import _accel
from .calculus import (
    cauchy_taylor_1d,
    cauchy_taylor_nd,
    factorial_multi,
    richardson_derivative,
)
from .errors import ConfigError, MissingDerivativeError, UnsupportedOperationError

SINC_SERIES_CUTOFF = 1e-4


def sinc(z):
    """``sin(pi z) / (pi z)`` for real or complex ``z``, series near zero."""
    z = np.asarray(z)
    w = np.pi * z
    small = np.abs(w) < SINC_SERIES_CUTOFF
    safe = np.where(small, 1.0, w)
    w2 = w * w
    series = 1.0 - w2 / 6.0 + w2 * w2 / 120.0
    return np.where(small, series, np.sin(safe) / safe)


def _as_points(x, dim):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1, 1)
    elif x.ndim == 1:
        x = x.reshape(1, -1) if x.size == dim else x.reshape(-1, 1)
    if x.shape[1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got {x.shape[1]}")
    return x


def _as_freqs(xi, dim):
    xi = np.asarray(xi)
    if xi.ndim == 0:
        xi = xi.reshape(1, 1)
    elif xi.ndim == 1:
        xi = xi.reshape(1, -1) if xi.size == dim else xi.reshape(-1, 1)
    return xi


class Kernel:
    """Common interface of synthesis kernels."""

    dim: int
    support_radius: float
    fourier_smoothness_order: int
    fourier_analytic = False

    def eval(self, x):
        raise NotImplementedError

    def eval_fourier(self, xi):
        raise UnsupportedOperationError(f"{type(self).__name__} has no Fourier evaluator")

    def breakpoints(self, axis):
        r = self.support_radius
        return np.linspace(-r, r, 9)

    def synth_params(self):
        """Parameters for the accelerated separable synthesis, or None."""
        return None

    def _check_order(self, total):
        if total > self.fourier_smoothness_order:
            raise MissingDerivativeError(
                f"derivative order {total} exceeds available Fourier smoothness {self.fourier_smoothness_order}"
            )

    def fourier_taylor(self, xi0, order):
        """Taylor coefficients of the Fourier transform at ``xi0``.

        Returns an array of shape ``(order + 1,) * dim``; ``D^beta hat phi(xi0)``
        equals ``beta! * a[beta]``.
        """
        self._check_order(order)
        xi0 = np.atleast_1d(np.asarray(xi0, dtype=float))
        if self.fourier_analytic:
            return cauchy_taylor_nd(lambda z: self.eval_fourier(z), xi0, order)
        out = np.zeros((order + 1,) * self.dim, dtype=complex)
        for beta in itertools.product(range(order + 1), repeat=self.dim):
            if sum(beta) <= order:
                out[beta] = self.eval_fourier_deriv(beta, xi0, method="fd") / factorial_multi(beta)
        return out

    def eval_fourier_deriv(self, beta, xi, method="auto"):
        """``D^beta hat phi(xi)``.

        ``method="fd"`` is central differencing with two Richardson levels
        (base step 1e-3); ``"auto"`` prefers the exact analytic route where
        the kernel has one.
        """
        beta = tuple(int(b) for b in np.atleast_1d(beta))
        if len(beta) != self.dim:
            raise ValueError(f"multi-index {beta} does not match dimension {self.dim}")
        self._check_order(sum(beta))
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        if method == "auto" and self.fourier_analytic:
            coeffs = self.fourier_taylor(xi, sum(beta))
            return complex(coeffs[beta] * factorial_multi(beta))
        return richardson_derivative(lambda z: self.eval_fourier(z), xi, beta)


@dataclass(frozen=True, eq=False)
class BSplineTensor(Kernel):
    """Linear combination of shifted tensor-product centered B-splines.

    ``phi(x) = sum_t c_t prod_i B_{n_i}(x_i - s_{t,i})`` with ``B_n``
    supported on ``[-n/2, n/2]``.
    """

    orders: tuple
    shifts_coeffs: tuple = None
    dim: int = field(init=False)
    support_radius: float = field(init=False)
    fourier_smoothness_order: int = field(init=False, default=16)
    fourier_analytic = True

    def __post_init__(self):
        orders = tuple(int(n) for n in np.atleast_1d(self.orders))
        if not orders or min(orders) < 1:
            raise ConfigError(f"B-spline orders must be positive, got {orders}")
        d = len(orders)
        sc = self.shifts_coeffs
        if sc is None:
            sc = (((0,) * d, 1.0),)
        sc = tuple((tuple(int(v) for v in np.atleast_1d(s)), float(c)) for s, c in sc)
        if not sc or any(len(s) != d for s, _ in sc):
            raise ConfigError("every shift must have one entry per axis")
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "shifts_coeffs", sc)
        object.__setattr__(self, "dim", d)
        radius = max(orders[i] / 2.0 + max(abs(s[i]) for s, _ in sc) for i in range(d))
        object.__setattr__(self, "support_radius", radius)

    @classmethod
    def single(cls, order, dim=1):
        return cls((order,) * dim)

    @property
    def shifts(self):
        return np.array([s for s, _ in self.shifts_coeffs], dtype=float)

    @property
    def coeffs(self):
        return np.array([c for _, c in self.shifts_coeffs])

    def scaled(self, factor):
        return BSplineTensor(self.orders, tuple((s, factor * c) for s, c in self.shifts_coeffs))

    def eval(self, x):
        x = _as_points(x, self.dim)
        out = np.zeros(x.shape[0])
        for s, c in self.shifts_coeffs:
            prod = np.full(x.shape[0], c)
            for i, n in enumerate(self.orders):
                prod *= _accel.bspline(x[:, i] - s[i], n)
            out += prod
        return out

    def _axis_symbol(self, z, n, s):
        return sinc(z) ** n * np.exp(-2j * np.pi * s * z)

    def eval_fourier(self, xi):
        xi = _as_freqs(xi, self.dim)
        out = np.zeros(xi.shape[0], dtype=complex)
        for s, c in self.shifts_coeffs:
            prod = np.full(xi.shape[0], c, dtype=complex)
            for i, n in enumerate(self.orders):
                prod *= self._axis_symbol(xi[:, i], n, s[i])
            out += prod
        return out

    def fourier_taylor(self, xi0, order):
        self._check_order(order)
        xi0 = np.atleast_1d(np.asarray(xi0, dtype=float))
        out = np.zeros((order + 1,) * self.dim, dtype=complex)
        for s, c in self.shifts_coeffs:
            term = np.array(c, dtype=complex)
            for i, n in enumerate(self.orders):
                axis = cauchy_taylor_1d(lambda z, n=n, si=s[i]: self._axis_symbol(z, n, si), xi0[i], order)
                term = np.multiply.outer(term, axis)
            out += term
        return out

    def fourier_taylor_many(self, xi0, order):
        """Vectorised ``fourier_taylor`` for an ``(n, d)`` array of centers."""
        xi0 = np.asarray(xi0, dtype=float).reshape(-1, self.dim)
        self._check_order(order)
        npts = xi0.shape[0]
        out = np.zeros((npts,) + (order + 1,) * self.dim, dtype=complex)
        for s, c in self.shifts_coeffs:
            term = np.full((npts,), c, dtype=complex)
            for i, n in enumerate(self.orders):
                axis = cauchy_taylor_1d(lambda z, n=n, si=s[i]: self._axis_symbol(z, n, si), xi0[:, i], order)
                term = term[..., None] * axis.reshape((npts,) + (1,) * i + (order + 1,))
            out += term
        return out

    def breakpoints(self, axis):
        pts = set()
        for s, _ in self.shifts_coeffs:
            n = self.orders[axis]
            pts.update(-n / 2.0 + s[axis] + q for q in range(n + 1))
        return np.array(sorted(pts))

    def synth_params(self):
        return (
            _accel.KIND_BSPLINE,
            np.array(self.orders, dtype=float),
            np.array(self.orders, dtype=float) / 2.0,
            0.0,
            self.shifts,
            self.coeffs,
        )

    def to_config(self):
        return {
            "type": "bspline",
            "orders": list(self.orders),
            "shifts": [list(s) for s, _ in self.shifts_coeffs],
            "coeffs": [c for _, c in self.shifts_coeffs],
        }


@dataclass(frozen=True, eq=False)
class WindowedSinc(Kernel):
    """Tensor sinc ``prod_i 2 b_i sinc(2 b_i x_i)`` with a raised-cosine taper.

    The taper occupies the outer ``rolloff`` fraction of ``truncation_radius``
    on each axis; the kernel is exactly zero beyond it.  ``eval_fourier``
    returns the symbol of the untruncated sinc (the indicator of the band box);
    the truncation is accounted for separately by ``truncation_tail``.
    """

    band: tuple
    rolloff: float = 0.1
    truncation_radius: float = 200.0
    dim: int = field(init=False)
    support_radius: float = field(init=False)
    fourier_smoothness_order: int = field(init=False, default=16)

    def __post_init__(self):
        band = tuple(float(b) for b in np.atleast_1d(self.band))
        if not band or min(band) <= 0:
            raise ConfigError("sinc band half-widths must be positive")
        if not 0.0 < self.rolloff <= 1.0:
            raise ConfigError("rolloff must lie in (0, 1]")
        if self.truncation_radius <= 0:
            raise ConfigError("truncation radius must be positive")
        object.__setattr__(self, "band", band)
        object.__setattr__(self, "dim", len(band))
        object.__setattr__(self, "support_radius", float(self.truncation_radius))

    def eval(self, x):
        x = _as_points(x, self.dim)
        out = np.ones(x.shape[0])
        for i, b in enumerate(self.band):
            out *= _accel._factor_numpy(_accel.KIND_SINC, x[:, i], b, self.truncation_radius, self.rolloff)
        return out

    def eval_fourier(self, xi):
        xi = np.real(_as_freqs(xi, self.dim))
        inside = np.all(np.abs(xi) <= np.asarray(self.band), axis=1)
        return inside.astype(complex)

    def truncation_tail(self):
        """``sum_{|k| > R} (pi k)**-2`` over one axis: bound on dropped sample weight."""
        r = math.floor(self.truncation_radius)
        return float(2.0 / math.pi**2 * polygamma(1, r + 1))

    def breakpoints(self, axis):
        r = self.truncation_radius
        return np.linspace(-r, r, int(2 * math.ceil(r)) + 1)

    def synth_params(self):
        return (
            _accel.KIND_SINC,
            np.array(self.band),
            np.full(self.dim, self.truncation_radius),
            self.rolloff,
            np.zeros((1, self.dim)),
            np.ones(1),
        )

    def to_config(self):
        return {"type": "sinc", "band": list(self.band), "rolloff": self.rolloff, "radius": self.truncation_radius}


@dataclass(frozen=True, eq=False)
class CustomKernel(Kernel):
    """Kernel given by user callables on ``(n, d)`` arrays.

    ``fourier_analytic=True`` declares that ``fourier`` accepts complex
    arguments and is entire, enabling exact contour derivatives.
    ``decay`` is an optional certificate ``(C, eps)`` with
    ``|phi(x)| <= C (1 + |x|)**(-d - eps)``.
    """

    dim: int
    spatial: object
    fourier: object = None
    support_radius: float = math.inf
    fourier_smoothness_order: int = 0
    fourier_analytic: bool = False
    decay: tuple = None
    name: str = "custom"

    def eval(self, x):
        x = _as_points(x, self.dim)
        return np.asarray(self.spatial(x), dtype=float)

    def eval_fourier(self, xi):
        if self.fourier is None:
            raise UnsupportedOperationError("custom kernel has no Fourier evaluator")
        return np.asarray(self.fourier(_as_freqs(xi, self.dim)), dtype=complex)

    def to_config(self):
        return {"type": "custom", "name": self.name}


def lp_class_norm(kernel, p, box_resolution=64):
    """Estimate ``|| sum_k |phi(. + k)| ||_{L_p(T^d)}``.

    The periodisation is summed over every lattice shift that can reach the
    unit cell; kernels with unbounded support need a decay certificate, and
    are summed out to where the certified tail drops below 1e-12.
    """
    d = kernel.dim
    radius = kernel.support_radius
    if not math.isfinite(radius):
        cert = getattr(kernel, "decay", None)
        if cert is None:
            raise UnsupportedOperationError("infinite support without a decay certificate")
        c, eps = cert
        # tail of sum_{|k|>R} C(1+|k|)^{-d-eps} ~ C' R^{-eps}; stop once below 1e-12
        radius = (c / 1e-12) ** (1.0 / eps)
        if radius**d > 1e7:
            raise UnsupportedOperationError("decay certificate too weak for a finite lattice sum")
    reach = int(math.ceil(radius)) + 1
    ticks = (np.arange(box_resolution) + 0.5) / box_resolution
    grids = np.meshgrid(*([ticks] * d), indexing="ij")
    x = np.stack([g.ravel() for g in grids], axis=1)
    acc = np.zeros(x.shape[0])
    for k in itertools.product(range(-reach, reach + 1), repeat=d):
        acc += np.abs(kernel.eval(x + np.asarray(k, dtype=float)))
    if math.isinf(p):
        return float(acc.max())
    return float(np.mean(acc**p) ** (1.0 / p))
