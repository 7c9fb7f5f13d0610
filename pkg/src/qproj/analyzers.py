"""Analysis distributions: Dirac delta, differential symbols, integrable kernels.

Coefficients are stored without the ``m^{j/2}`` factors of the normalised
shifts, so that ``Q_j f(x) = sum_k coefficient(k) * phi(M^j x + k)``.  The
pairing is conjugate-linear in its second slot, ``<f, g> = int f conj(g)``,
which puts ``conj(c_beta)`` on the derivative terms of a differential symbol.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .calculus import adaptive_tensor_quadrature
from .dilation import is_isotropic, power
from .errors import ConfigError
from .field import chain_rule_terms
from .kernels import Kernel

# coefficient normalisation shared with the synthesis side: both omit m^{j/2}
SYNTHESIS_SCALE = 1.0
QUAD_RTOL = 1e-9
QUAD_MAX_LEVELS = 20
_QUAD_CHUNK = 4_000_000


class Analyzer:
    dim: int

    @property
    def order_N(self):
        return 0

    def eval_symbol(self, xi):
        raise NotImplementedError

    def symbol_taylor(self, xi0, order):
        raise NotImplementedError

    def coefficients(self, f, m, j, ks):
        raise NotImplementedError

    def in_snp_class(self, m):
        """Whether the documented S'_{N,p} property holds for dilation ``m``."""
        return True

    @property
    def in_lq(self):
        return False


@dataclass(frozen=True, eq=False)
class Delta(Analyzer):
    """Point evaluation; symbol identically 1."""

    dim: int = 1

    def eval_symbol(self, xi):
        xi = np.asarray(xi)
        n = 1 if xi.ndim <= 1 and xi.size == self.dim else xi.reshape(-1, self.dim).shape[0]
        return np.ones(n, dtype=complex)

    def symbol_taylor(self, xi0, order):
        out = np.zeros((order + 1,) * self.dim, dtype=complex)
        out[(0,) * self.dim] = 1.0
        return out

    def coefficients(self, f, m, j, ks):
        lin = power(m, -j)
        return f(-(np.asarray(ks, dtype=float) @ lin.T))

    def to_config(self):
        return {"type": "delta"}


@dataclass(frozen=True, eq=False)
class Differential(Analyzer):
    """Distribution with symbol ``sum_beta c_beta (2 pi i xi)^beta``."""

    terms: tuple
    dim: int = None

    def __post_init__(self):
        terms = tuple((tuple(int(b) for b in beta), complex(c)) for beta, c in self.terms)
        if not terms:
            raise ConfigError("differential analyzer needs at least one term")
        d = len(terms[0][0])
        if any(len(beta) != d for beta, _ in terms):
            raise ConfigError("all multi-indices must have the same length")
        if self.dim is not None and self.dim != d:
            raise ConfigError("multi-index length does not match dim")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "dim", d)

    @property
    def order_N(self):
        return max(sum(beta) for beta, _ in self.terms)

    def eval_symbol(self, xi):
        xi = np.asarray(xi).reshape(-1, self.dim)
        out = np.zeros(xi.shape[0], dtype=complex)
        for beta, c in self.terms:
            out += c * np.prod((2j * np.pi * xi) ** np.asarray(beta), axis=1)
        return out

    def symbol_taylor(self, xi0, order):
        xi0 = np.atleast_1d(np.asarray(xi0, dtype=float))
        out = np.zeros((order + 1,) * self.dim, dtype=complex)
        for beta, c in self.terms:
            # (2 pi i)^|beta| prod_i (xi0_i + h_i)^beta_i expanded binomially
            axis = []
            for i, b in enumerate(beta):
                row = np.zeros(order + 1, dtype=complex)
                for a in range(min(b, order) + 1):
                    row[a] = math.comb(b, a) * xi0[i] ** (b - a)
                axis.append(row)
            term = np.array(c * (2j * np.pi) ** sum(beta))
            for row in axis:
                term = np.multiply.outer(term, row)
            out += term
        return out

    def coefficients(self, f, m, j, ks):
        lin = power(m, -j)
        x = -(np.asarray(ks, dtype=float) @ lin.T)
        out = np.zeros(x.shape[0], dtype=complex)
        for beta, c in self.terms:
            # <f(L(. - k)), D^beta delta> through the Fourier pairing gives
            # conj(c) (-1)^|beta| D^beta[f(L .)] evaluated at -k
            acc = np.zeros(x.shape[0], dtype=complex)
            for alpha, w in chain_rule_terms(lin, beta).items():
                acc += w * f.deriv(alpha, x)
            out += np.conj(c) * (-1) ** sum(beta) * acc
        if np.all(np.isreal([c for _, c in self.terms])) and np.isrealobj(f(x[:1])):
            return out.real
        return out

    def in_snp_class(self, m):
        return self.order_N == 0 or is_isotropic(m)

    def to_config(self):
        return {
            "type": "diff",
            "terms": [{"beta": list(b), "c": [c.real, c.imag]} for b, c in self.terms],
        }


@dataclass(frozen=True, eq=False)
class FunctionKernel(Analyzer):
    """Integrable analysis kernel: local averages ``m^j int f(x) conj(k(M^j x + k)) dx``."""

    kernel: Kernel

    @property
    def dim(self):
        return self.kernel.dim

    @property
    def in_lq(self):
        return True

    def eval_symbol(self, xi):
        return self.kernel.eval_fourier(xi)

    def symbol_taylor(self, xi0, order):
        return self.kernel.fourier_taylor(xi0, order)

    def coefficients(self, f, m, j, ks):
        ks = np.asarray(ks, dtype=float).reshape(-1, self.dim)
        lin = power(m, -j)
        jac = m.det_abs**j * abs(np.linalg.det(lin))
        breaks = [self.kernel.breakpoints(i) for i in range(self.dim)]
        real = np.isrealobj(f(np.zeros((1, self.dim))))
        out = np.empty(ks.shape[0], dtype=float if real else complex)
        nodes_per_level = math.prod(7 * (len(b) - 1) for b in breaks)
        step = max(1, _QUAD_CHUNK // max(1, nodes_per_level * 8))
        for start in range(0, ks.shape[0], step):
            kc = ks[start:start + step]

            def integrand(y, kc=kc):
                # substitute x = M^{-j}(y - k): dx = |det M^{-j}| dy
                xq = (y[None, :, :] - kc[:, None, :]) @ lin.T
                fv = f(xq.reshape(-1, self.dim)).reshape(kc.shape[0], y.shape[0])
                return jac * fv * np.conj(self.kernel.eval(y))[None, :]

            out[start:start + step] = adaptive_tensor_quadrature(integrand, breaks, QUAD_RTOL, QUAD_MAX_LEVELS)
        return out

    def to_config(self):
        return {"type": "kernel", "kernel": self.kernel.to_config()}


def eval_symbol(analyzer, xi):
    return analyzer.eval_symbol(xi)


def coefficient(analyzer, f, m, j, k):
    """Single coefficient ``<f, tilde phi_{jk}>`` in the m^{j/2}-free normalisation."""
    k = np.atleast_1d(np.asarray(k, dtype=float)).reshape(1, -1)
    return analyzer.coefficients(f, m, j, k)[0]


def check_sn_bound(analyzer, grid_radius, samples=1024, n_claim=None, seed=0, growth_tol=1.1):
    """Empirical check of ``|hat phi~(xi)| <= C max(1, |xi|)^N``.

    Samples a scrambled Sobol set in the ball of radius ``grid_radius`` and
    returns ``(bounded, C)`` where C is the sampled supremum of the ratio.
    The ratio is declared unbounded when its supremum over the full ball
    exceeds that over the half-radius ball by more than ``growth_tol``.
    """
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    if grid_radius < 2:
        raise ValueError("grid_radius must be at least 2 to observe growth")
    n = analyzer.order_N if n_claim is None else n_claim
    d = analyzer.dim
    pts = np.empty((0, d))
    sob = qmc.Sobol(d, scramble=True, seed=seed)
    while pts.shape[0] < samples:
        cand = (2.0 * sob.random(2 ** int(math.ceil(math.log2(samples)))) - 1.0) * grid_radius
        pts = np.vstack([pts, cand[np.linalg.norm(cand, axis=1) <= grid_radius]])
    pts = pts[:samples]
    r = np.linalg.norm(pts, axis=1)
    ratio = np.abs(analyzer.eval_symbol(pts)) / np.maximum(1.0, r) ** n
    sup = float(np.max(ratio))
    half = float(np.max(ratio[r <= 0.5 * grid_radius]))
    bounded = bool(np.isfinite(sup) and sup <= growth_tol * max(half, 1e-300))
    return bounded, sup
