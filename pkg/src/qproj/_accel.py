"""Hot loops: cardinal B-spline evaluation and shift-sum synthesis.

Every kernel has a numba ``@njit`` version and a pure-numpy version with
identical semantics.  The numba path is used unless ``QP_DISABLE_NUMBA=1``
is set in the environment (or numba cannot be imported).  ``QP_THREADS``
caps the numba worker pool.
"""
import math
import os

import numpy as np

_DISABLED = os.environ.get("QP_DISABLE_NUMBA", "0").strip().lower() in ("1", "true", "yes")

# the bundled TBB is too old for numba; skip probing it
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

try:
    if _DISABLED:
        raise ImportError("numba disabled by QP_DISABLE_NUMBA")
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda func: func

    prange = range

USE_NUMBA = HAVE_NUMBA

if HAVE_NUMBA and os.environ.get("QP_THREADS"):
    numba.set_num_threads(max(1, min(int(os.environ["QP_THREADS"]), numba.config.NUMBA_NUM_THREADS)))

_CHUNK = 2048


def backend():
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# cardinal B-splines
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _bspline_scalar(x, n, work):
    # centered cardinal B-spline of order n (degree n-1), support [-n/2, n/2)
    t = x + 0.5 * n
    if t < 0.0 or t >= n:
        return 0.0
    span = int(math.floor(t))
    u = t - span
    # Cox-de Boor on integer knots: work[q] = M_r(u + q), M_r supported on [0, r)
    for q in range(n):
        work[q] = 0.0
    work[0] = 1.0
    for r in range(2, n + 1):
        for q in range(r - 1, -1, -1):
            z = u + q
            a = work[q] if q <= r - 2 else 0.0
            b = work[q - 1] if q >= 1 else 0.0
            work[q] = (z * a + (r - z) * b) / (r - 1)
    return work[span]


@njit(cache=True, parallel=True)
def _bspline_numba(x, n):
    out = np.empty(x.size)
    nchunk = (x.size + _CHUNK - 1) // _CHUNK
    for c in prange(nchunk):
        work = np.empty(n + 1)
        for i in range(c * _CHUNK, min(x.size, (c + 1) * _CHUNK)):
            out[i] = _bspline_scalar(x[i], n, work)
    return out


def _bspline_numpy(x, n):
    x = np.asarray(x, dtype=float)
    t = x + 0.5 * n
    inside = (t >= 0.0) & (t < n)
    span = np.clip(np.floor(t), 0, n - 1).astype(np.int64)
    u = t - span
    work = np.zeros((n,) + x.shape)
    work[0] = 1.0
    for r in range(2, n + 1):
        for q in range(r - 1, -1, -1):
            z = u + q
            a = work[q] if q <= r - 2 else 0.0
            b = work[q - 1] if q >= 1 else 0.0
            work[q] = (z * a + (r - z) * b) / (r - 1)
    val = np.take_along_axis(work, span[None, ...], axis=0)[0]
    return np.where(inside, val, 0.0)


def bspline(x, n):
    """Centered cardinal B-spline of order ``n`` evaluated elementwise."""
    x = np.asarray(x, dtype=float)
    if USE_NUMBA:
        return _bspline_numba(np.ascontiguousarray(x.ravel()), int(n)).reshape(x.shape)
    return _bspline_numpy(x, int(n))


# ---------------------------------------------------------------------------
# separable shift-sum synthesis
#
#   out(y) = sum_k table[k - kmin] * sum_t tcoef[t] * prod_i g_i(y_i + k_i - shift[t, i])
#
# g_i is the per-axis factor of the kernel: a centered B-spline (KIND_BSPLINE,
# param = order) or a raised-cosine windowed sinc (KIND_SINC, param = band).
# radius[i] bounds the support of g_i; k outside the table contributes 0.
# ---------------------------------------------------------------------------

KIND_BSPLINE = 0
KIND_SINC = 1


@njit(cache=True, nogil=True)
def _factor(kind, z, param, radius, rolloff, work):
    if kind == KIND_BSPLINE:
        return _bspline_scalar(z, int(param), work)
    az = abs(z)
    if az >= radius:
        return 0.0
    arg = 2.0 * param * z
    if abs(arg) < 1e-8:
        s = 2.0 * param
    else:
        s = 2.0 * param * math.sin(math.pi * arg) / (math.pi * arg)
    flat = (1.0 - rolloff) * radius
    if az > flat:
        s *= 0.5 * (1.0 + math.cos(math.pi * (az - flat) / (rolloff * radius)))
    return s


@njit(cache=True, parallel=True)
def _synth_numba(y, kind, param, radius, rolloff, shifts, tcoef, table, kmin, kshape):
    npts, d = y.shape
    nterm = shifts.shape[0]
    reach = np.empty(d)
    for i in range(d):
        reach[i] = radius[i] + np.max(np.abs(shifts[:, i]))
    maxcnt = 0
    for i in range(d):
        maxcnt = max(maxcnt, int(math.floor(2.0 * reach[i])) + 2)
    maxorder = int(np.max(param)) + 1 if kind == KIND_BSPLINE else 1
    strides = np.empty(d, dtype=np.int64)
    acc = 1
    for i in range(d - 1, -1, -1):
        strides[i] = acc
        acc *= kshape[i]
    out = np.zeros(npts, dtype=table.dtype)
    nchunk = (npts + _CHUNK - 1) // _CHUNK
    for c in prange(nchunk):
        work = np.empty(maxorder + 1)
        pre = np.zeros((nterm, d, maxcnt))
        lo = np.empty(d, dtype=np.int64)
        cnt = np.empty(d, dtype=np.int64)
        off = np.empty(d, dtype=np.int64)
        for p in range(c * _CHUNK, min(npts, (c + 1) * _CHUNK)):
            total = 1
            for i in range(d):
                lo[i] = int(math.ceil(-y[p, i] - reach[i]))
                hi = int(math.floor(-y[p, i] + reach[i]))
                cnt[i] = max(0, min(hi - lo[i] + 1, maxcnt))
                total *= cnt[i]
                for t in range(nterm):
                    for o in range(cnt[i]):
                        pre[t, i, o] = _factor(kind, y[p, i] + lo[i] + o - shifts[t, i],
                                               param[i], radius[i], rolloff, work)
            s = out[p] * 0
            for flat in range(total):
                rem = flat
                inside = True
                idx = 0
                for i in range(d - 1, -1, -1):
                    off[i] = rem % cnt[i]
                    rem //= cnt[i]
                    kk = lo[i] + off[i] - kmin[i]
                    if kk < 0 or kk >= kshape[i]:
                        inside = False
                    idx += kk * strides[i]
                if not inside:
                    continue
                phi = 0.0
                for t in range(nterm):
                    prod = tcoef[t]
                    for i in range(d):
                        prod *= pre[t, i, off[i]]
                    phi += prod
                s += table[idx] * phi
            out[p] = s
    return out


def _factor_numpy(kind, z, param, radius, rolloff):
    if kind == KIND_BSPLINE:
        return _bspline_numpy(z, int(param))
    az = np.abs(z)
    arg = 2.0 * param * z
    s = 2.0 * param * np.sinc(arg)
    flat = (1.0 - rolloff) * radius
    with np.errstate(invalid="ignore", divide="ignore"):
        taper = 0.5 * (1.0 + np.cos(np.pi * (az - flat) / (rolloff * radius)))
    s = np.where(az > flat, s * taper, s)
    return np.where(az >= radius, 0.0, s)


def _synth_numpy(y, kind, param, radius, rolloff, shifts, tcoef, table, kmin, kshape):
    npts, d = y.shape
    reach = radius + np.abs(shifts).max(axis=0)
    maxcnt = np.floor(2.0 * reach).astype(np.int64) + 2
    lo = np.ceil(-y - reach).astype(np.int64)
    hi = np.floor(-y + reach).astype(np.int64)
    out = np.zeros(npts, dtype=table.dtype)
    tab = table.reshape(tuple(kshape))
    for off in np.ndindex(*(int(m) for m in maxcnt)):
        k = lo + np.asarray(off)
        valid = np.all((k <= hi) & (k >= kmin) & (k < kmin + kshape), axis=1)
        if not valid.any():
            continue
        phi = np.zeros(npts)
        for t in range(shifts.shape[0]):
            prod = np.full(npts, tcoef[t])
            for i in range(d):
                prod *= _factor_numpy(kind, y[:, i] + k[:, i] - shifts[t, i], param[i], radius[i], rolloff)
            phi += prod
        kk = np.where(valid[:, None], k - kmin, 0)
        out += np.where(valid, tab[tuple(kk.T)] * phi, 0.0)
    return out


def synthesize(y, kind, param, radius, rolloff, shifts, tcoef, table, kmin, use_numba=None):
    """Evaluate the shift sum at the rows of ``y`` (already mapped by M^j).

    ``table`` is a d-dimensional coefficient array whose entry ``[0, ..., 0]``
    belongs to lattice point ``kmin``.
    """
    y = np.ascontiguousarray(y, dtype=float)
    table = np.asarray(table)
    kshape = np.asarray(table.shape, dtype=np.int64)
    args = (
        y, int(kind),
        np.ascontiguousarray(param, dtype=float),
        np.ascontiguousarray(radius, dtype=float),
        float(rolloff),
        np.ascontiguousarray(shifts, dtype=float),
        np.ascontiguousarray(tcoef, dtype=float),
        np.ascontiguousarray(table.ravel()),
        np.ascontiguousarray(kmin, dtype=np.int64),
        kshape,
    )
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable")
        return _synth_numba(*args)
    return _synth_numpy(*args)
