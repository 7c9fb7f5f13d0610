"""Derivatives and quadrature used by the kernel, analyzer and condition code."""
import itertools
import math

import numpy as np

from .errors import QuadratureError

GL_POINTS = 7
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_POINTS)


def multi_indices(d, order):
    """All multi-indices of length ``d`` with total degree ``order``, sorted."""
    return [b for b in itertools.product(range(order + 1), repeat=d) if sum(b) == order]


def factorial_multi(beta):
    return math.prod(math.factorial(b) for b in beta)


def cauchy_taylor_1d(fun, xi0, order, radius=0.5, nodes=64):
    """Taylor coefficients ``a_0..a_order`` of an entire function at ``xi0``.

    Uses the trapezoidal rule for Cauchy's integral on a circle of the given
    radius, which converges geometrically for analytic integrands.  ``fun``
    must accept complex arrays.  ``xi0`` may be an array; the result then has
    shape ``xi0.shape + (order + 1,)``.
    """
    xi0 = np.asarray(xi0, dtype=float)
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    z = xi0[..., None] + radius * np.exp(1j * theta)
    vals = np.asarray(fun(z), dtype=complex)
    coeffs = np.fft.fft(vals, axis=-1) / nodes
    return coeffs[..., : order + 1] / radius ** np.arange(order + 1)


def cauchy_taylor_nd(fun, xi0, order, radius=0.5, nodes=32):
    """Multivariate Taylor coefficients on a torus of circles.

    Returns an array of shape ``(order + 1,) * d`` with ``a[beta]`` the
    coefficient of ``h**beta``.  ``fun`` maps complex ``(n, d)`` to ``(n,)``.
    """
    xi0 = np.atleast_1d(np.asarray(xi0, dtype=float))
    d = xi0.size
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    circ = radius * np.exp(1j * theta)
    grids = np.meshgrid(*([circ] * d), indexing="ij")
    z = np.stack([g.ravel() for g in grids], axis=1) + xi0
    vals = np.asarray(fun(z), dtype=complex).reshape((nodes,) * d)
    coeffs = np.fft.fftn(vals) / nodes**d
    sl = tuple(slice(0, order + 1) for _ in range(d))
    powers = np.arange(order + 1)
    scale = np.ones((order + 1,) * d)
    for i in range(d):
        shape = [1] * d
        shape[i] = order + 1
        scale = scale * (radius ** powers).reshape(shape)
    return coeffs[sl] / scale


def taylor_to_derivative(coeffs, beta):
    """``D^beta`` at the expansion point from a Taylor coefficient array."""
    return coeffs[tuple(beta)] * factorial_multi(beta)


def taylor_product(a, b):
    """Truncated product of two Taylor coefficient arrays of equal shape."""
    d = a.ndim
    order = a.shape[0] - 1
    out = np.zeros_like(a, dtype=complex)
    for alpha in itertools.product(range(order + 1), repeat=d):
        if a[alpha] == 0:
            continue
        sl_out = tuple(slice(al, order + 1) for al in alpha)
        sl_b = tuple(slice(0, order + 1 - al) for al in alpha)
        out[sl_out] += a[alpha] * b[sl_b]
    return out


def _central_difference(fun, x0, beta, h):
    # tensor product of 1-D central differences delta_h^r / h^r
    d = len(beta)
    stencils = []
    for r in beta:
        pts = [(r / 2.0 - i) * h for i in range(r + 1)]
        wts = [(-1) ** i * math.comb(r, i) / h**r for i in range(r + 1)]
        stencils.append(list(zip(pts, wts)))
    offsets = []
    weights = []
    for combo in itertools.product(*stencils):
        offsets.append([c[0] for c in combo])
        weights.append(math.prod(c[1] for c in combo))
    pts = np.asarray(x0, dtype=float)[None, :] + np.asarray(offsets).reshape(-1, d)
    vals = np.asarray(fun(pts))
    return np.dot(np.asarray(weights), vals)


def richardson_derivative(fun, x0, beta, h=1e-3, levels=2):
    """Mixed partial ``D^beta fun(x0)`` by central differences + Richardson.

    The central stencil error expands in even powers of ``h``, so each level
    eliminates the next ``h**(2l)`` term.  ``fun`` maps ``(n, d)`` to ``(n,)``.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    beta = tuple(int(b) for b in beta)
    if sum(beta) == 0:
        return complex(np.asarray(fun(x0[None, :]))[0])
    table = [_central_difference(fun, x0, beta, h / 2**i) for i in range(levels + 1)]
    for lev in range(1, levels + 1):
        fac = 4.0**lev
        table = [(fac * table[i + 1] - table[i]) / (fac - 1.0) for i in range(len(table) - 1)]
    return complex(table[0])


def gauss_legendre_nodes(breaks, subdivide):
    """Composite 7-point Gauss-Legendre nodes/weights over ``breaks``.

    Each interval between consecutive breakpoints is split into ``subdivide``
    equal panels.
    """
    breaks = np.asarray(breaks, dtype=float)
    edges = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        edges.append(np.linspace(a, b, subdivide + 1)[:-1])
    left = np.concatenate(edges)
    width = np.concatenate([np.full(subdivide, (b - a) / subdivide) for a, b in zip(breaks[:-1], breaks[1:])])
    nodes = (left[:, None] + 0.5 * width[:, None] * (_GL_X[None, :] + 1.0)).ravel()
    weights = (0.5 * width[:, None] * _GL_W[None, :]).ravel()
    return nodes, weights


def adaptive_tensor_quadrature(integrand, breaks_per_axis, rtol=1e-9, max_levels=20, atol=1e-300):
    """Integrate a batch of integrands over a box by panel doubling.

    ``integrand(nodes)`` receives an ``(n, d)`` node array and returns an
    ``(m, n)`` array (m integrands sharing the nodes).  Panels between the
    supplied breakpoints are halved until every integral changes by less than
    ``rtol`` relative to the largest one.
    """
    prev = None
    for level in range(max_levels + 1):
        rules = [gauss_legendre_nodes(b, 2**level) for b in breaks_per_axis]
        grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
        nodes = np.stack([g.ravel() for g in grids], axis=1)
        w = rules[0][1]
        for r in rules[1:]:
            w = np.multiply.outer(w, r[1])
        cur = np.asarray(integrand(nodes)) @ w.ravel()
        if prev is not None:
            scale = max(np.max(np.abs(cur)), atol)
            if np.max(np.abs(cur - prev)) <= rtol * scale:
                return cur
        prev = cur
    raise QuadratureError(f"Gauss-Legendre refinement did not converge after {max_levels} levels")
