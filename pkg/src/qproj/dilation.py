"""Expansive dilation matrices and their powers."""
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ConvergenceError, NumericError

EXPANSIVE_MARGIN = 1e-9


def _char_poly_roots(a):
    d = a.shape[0]
    if d == 1:
        return np.array([a[0, 0]], dtype=complex)
    if d == 2:
        tr = a[0, 0] + a[1, 1]
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        return np.roots([1.0, -tr, det])
    # d == 3: lambda^3 - tr lambda^2 + (sum of principal 2x2 minors) lambda - det
    tr = np.trace(a)
    minors = sum(a[i, i] * a[j, j] - a[i, j] * a[j, i] for i in range(3) for j in range(i + 1, 3))
    return np.roots([1.0, -tr, minors, -np.linalg.det(a)])


def _int_matmul(a, b):
    n, k = len(a), len(b[0])
    return [[sum(a[i][r] * b[r][j] for r in range(len(b))) for j in range(k)] for i in range(n)]


def _int_identity(d):
    return [[int(i == j) for j in range(d)] for i in range(d)]


def _int_power(a, j):
    out = _int_identity(len(a))
    base = a
    while j:
        if j & 1:
            out = _int_matmul(out, base)
        base = _int_matmul(base, base)
        j >>= 1
    return out


def _int_adjugate(a):
    d = len(a)
    if d == 1:
        return [[1]]
    adj = [[0] * d for _ in range(d)]
    for i in range(d):
        for j in range(d):
            minor = [row[:j] + row[j + 1:] for r, row in enumerate(a) if r != i]
            adj[j][i] = (-1) ** (i + j) * _int_det(minor)
    return adj


def _int_det(a):
    d = len(a)
    if d == 1:
        return a[0][0]
    return sum((-1) ** j * a[0][j] * _int_det([row[:j] + row[j + 1:] for row in a[1:]]) for j in range(d))


@dataclass(frozen=True)
class DilationMatrix:
    """An expansive d x d matrix ``M`` (all eigenvalues of modulus > 1).

    Integer matrices keep an exact integer copy so that powers do not drift.
    """

    entries: np.ndarray
    dim: int = field(init=False)
    det_abs: float = field(init=False)
    eig_moduli: tuple = field(init=False)
    _int_entries: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        raw = np.asarray(self.entries)
        if raw.ndim == 0:
            raw = raw.reshape(1, 1)
        if raw.ndim != 2 or raw.shape[0] != raw.shape[1] or raw.shape[0] < 1:
            raise ConfigError(f"dilation matrix must be square and non-empty, got shape {raw.shape}")
        a = raw.astype(float)
        if not np.all(np.isfinite(a)):
            raise ConfigError("dilation matrix has non-finite entries")
        is_int = np.all(a == np.round(a))
        ints = tuple(tuple(int(v) for v in row) for row in np.round(a)) if is_int else None
        d = a.shape[0]
        eig = _char_poly_roots(a) if d <= 3 else np.linalg.eigvals(a)
        moduli = tuple(sorted(float(abs(e)) for e in eig))
        if min(moduli) <= 1.0 + EXPANSIVE_MARGIN:
            raise ConfigError(f"matrix is not expansive: eigenvalue moduli {moduli}")
        det = abs(_int_det([list(r) for r in ints])) if ints is not None else abs(np.linalg.det(a))
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "dim", d)
        object.__setattr__(self, "det_abs", float(det))
        object.__setattr__(self, "eig_moduli", moduli)
        object.__setattr__(self, "_int_entries", ints)

    @classmethod
    def from_config(cls, value):
        """Row-major nested list (``[[2,0],[0,4]]``) or a scalar for d = 1."""
        try:
            arr = np.asarray(value, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"cannot parse dilation matrix {value!r}") from exc
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        return cls(arr)

    @classmethod
    def isotropic(cls, scale, dim):
        return cls(scale * np.eye(dim))

    @property
    def is_integer(self):
        return self._int_entries is not None

    @property
    def lambda_geom(self):
        """Geometric mean eigenvalue modulus ``m ** (1/d)``."""
        return self.det_abs ** (1.0 / self.dim)

    def to_config(self):
        if self.is_integer:
            return [list(r) for r in self._int_entries]
        return self.entries.tolist()

    def power(self, j):
        return power(self, j)


def power(m, j):
    """``M**j`` as a float array; negative ``j`` powers the inverse.

    Integer matrices are powered exactly: ``M**-j = adj(M)**j / det(M)**j``.
    """
    j = int(j)
    d = m.dim
    if j == 0:
        return np.eye(d)
    if m.is_integer:
        a = [list(r) for r in m._int_entries]
        if j > 0:
            return np.array(_int_power(a, j), dtype=float)
        det = _int_det(a)
        if det == 0:
            raise NumericError("singular dilation matrix")
        num = _int_power(_int_adjugate(a), -j)
        den = det ** (-j)
        return np.array([[v / den for v in row] for row in num], dtype=float)
    base = m.entries if j > 0 else np.linalg.inv(m.entries)
    out = np.eye(d)
    for _ in range(abs(j)):
        out = out @ base
    return out


def operator_norm(a, rtol=1e-12, max_iter=10_000):
    """Spectral norm of ``a`` by power iteration on ``a.T @ a``."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    g = a.T @ a
    d = g.shape[0]
    if not np.any(g):
        return 0.0
    # deterministic start with all components non-zero
    v = np.ones(d) + 0.1 * np.arange(d)
    v /= np.linalg.norm(v)
    est = float(v @ g @ v)
    for it in range(1, max_iter + 1):
        w = g @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        new = float(v @ g @ v)
        if abs(new - est) <= rtol * abs(new):
            return float(np.sqrt(new))
        est = new
    raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations", iterations=max_iter)


def is_isotropic(m, tol=1e-9):
    """True iff eigenvalue moduli agree within ``tol`` and M is diagonalizable."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    mod = m.eig_moduli
    if max(mod) - min(mod) > tol:
        return False
    _, vecs = np.linalg.eig(m.entries)
    return bool(np.linalg.cond(vecs) < 1e8)
