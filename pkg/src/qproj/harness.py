"""Level sweeps, convergence-order fits and rate reports."""
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import field as fld
from .conditions import DEFAULT_DELTA, certify
from .dilation import power
from .errors import ConfigError
from .operator import OperatorSpec, error, level_shape

RATIO_SPREAD = 20.0
SLOPE_TOL = 0.25
NU_EXTRA = 4
MIN_FIT_LEVELS = 4
FIT_FROM = 2
# errors below this (plus the kernel's truncation band) count as exact
EXACT_FLOOR = 1e-9


@dataclass
class Experiment:
    kernel: object
    analyzer: object
    dilation: object
    f: str
    p: float = 2.0
    levels: tuple = (2, 3, 4, 5, 6, 7, 8)
    box: tuple = None
    shape: tuple = None
    seed: int = 0
    s: int = None
    max_s: int = 6
    ratio_spread: float = RATIO_SPREAD
    slope_tol: float = SLOPE_TOL
    directions: int = 32

    def __post_init__(self):
        self.levels = tuple(int(j) for j in self.levels)
        if not self.levels:
            raise ConfigError("levels must be non-empty")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ConfigError("levels must be strictly increasing")
        if self.levels[0] < 0:
            raise ConfigError("levels must be non-negative")
        if not (self.p >= 1):
            raise ConfigError("p must lie in [1, inf]")

    @property
    def function(self):
        return fld.builtin(self.f, self.dilation.dim)


@dataclass
class RateReport:
    levels: list
    errors: list
    moduli: list
    tail_terms: list
    ratios: list
    slope: float
    modulus_slope: float
    predicted_order: float
    target_order: float
    ratio_spread: float
    verdict: str
    certificate: dict
    kantorovich: bool
    one_sided: bool
    tail_exponent: float
    uncertainty: float
    thresholds: dict
    notes: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return _jsonable(asdict(self))

    def csv_rows(self):
        yield ("j", "error", "modulus", "tail_term", "ratio")
        for row in zip(self.levels, self.errors, self.moduli, self.tail_terms, self.ratios):
            yield row


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def fit_slope(levels, values, lam):
    """Decay order: minus the least-squares slope of ``log v`` against ``j log lam``."""
    pts = [(j, v) for j, v in zip(levels, values) if j >= FIT_FROM and v > 0]
    if len(pts) < MIN_FIT_LEVELS:
        return math.nan
    x = np.array([j for j, _ in pts]) * math.log(lam)
    y = np.log([v for _, v in pts])
    return float(-np.polyfit(x, y, 1)[0])


def tail_term(f, m, j, nu_max, exponent, p, delta=DEFAULT_DELTA):
    """``m^{-j e} sum_{nu=j}^{nu_max} m^{e nu} E_{delta M^nu}(f)_p`` with ``e = 1/p + N/d``."""
    total = 0.0
    for nu in range(j, nu_max + 1):
        e = fld.best_approx(f, delta * power(m, nu), p)
        total += m.det_abs ** (exponent * (nu - j)) * e
    return total


def run(exp):
    """Error, modulus and tail term per level plus the fitted rates and verdict."""
    f = exp.function
    m = exp.dilation
    d = m.dim
    cert = certify(exp.kernel, exp.analyzer, exp.max_s)
    s = exp.s if exp.s is not None else cert.effective_order
    if s < 1:
        raise ConfigError(f"effective order {s} gives no convergence rate")
    n_order = exp.analyzer.order_N
    p = exp.p
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    tail_exp = inv_p + n_order / d
    kantorovich = exp.analyzer.in_lq
    predicted = min(float(s), f.smoothness_limit(p))
    nu_max = exp.levels[-1] + NU_EXTRA
    lam = m.lambda_geom

    errors, moduli, tails, uncert = [], [], [], 0.0
    for j in exp.levels:
        spec = OperatorSpec(exp.kernel, exp.analyzer, m, j)
        box = exp.box or f.box
        shape = exp.shape or level_shape(spec, box)
        errors.append(error(spec, f, p, box, shape))
        uncert = max(uncert, spec.uncertainty())
        moduli.append(fld.modulus(f, power(m, j), s, p, exp.directions, seed=exp.seed))
        tails.append(0.0 if kantorovich else tail_term(f, m, j, nu_max, tail_exp, p))

    thresholds = {"ratio_spread": exp.ratio_spread, "slope_tol": exp.slope_tol, "exact_floor": EXACT_FLOOR}
    notes = []
    if not any(errors):
        verdict = "TRIVIAL"
        ratios = [0.0] * len(errors)
        slope = mslope = spread = math.nan
        target = predicted
    elif max(errors) <= EXACT_FLOOR + uncert:
        verdict = "EXACT"
        ratios = [e / (w + t) if w + t > 0 else math.inf for e, w, t in zip(errors, moduli, tails)]
        slope = mslope = spread = math.nan
        target = predicted
        notes.append("errors at the truncation floor; slope fit skipped")
    else:
        ratios = [e / (w + t) if w + t > 0 else math.inf for e, w, t in zip(errors, moduli, tails)]
        slope = fit_slope(exp.levels, errors, lam)
        mslope = fit_slope(exp.levels, moduli, lam)
        if math.isnan(slope):
            raise ConfigError(f"slope fit needs at least {MIN_FIT_LEVELS} levels j >= {FIT_FROM}")
        target = min(predicted, mslope) if math.isfinite(mslope) else predicted
        finite = [r for r in ratios if math.isfinite(r) and r > 0]
        spread = max(finite) / min(finite) if finite else math.inf
        ok = spread < exp.ratio_spread and abs(slope - target) <= exp.slope_tol
        verdict = "PASS" if ok else "FAIL"
    one_sided = f.smoothness_limit(p) < s
    if one_sided:
        notes.append("rate limited by the smoothness of f; comparison with the kernel order is one-sided")
    notes.append(f"Besov tail truncated at nu_max={nu_max}" if not kantorovich else "Kantorovich branch: no tail term")
    return RateReport(
        list(exp.levels), errors, moduli, tails, ratios, slope, mslope, predicted, target, spread, verdict,
        cert.to_dict(), kantorovich, one_sided, tail_exp, uncert, thresholds, notes,
    )


def aniso_run(exp, factor=4.0):
    """Anisotropic sweep on a diagonal 2-d dilation.

    Runs the combined rough-by-rough function and the two single-axis rough
    variants; passes when the combined error stays within ``factor`` of the
    larger single-axis error at every level.
    """
    m = exp.dilation
    if m.dim != 2 or np.any(m.entries - np.diag(np.diag(m.entries))):
        raise ConfigError("aniso_run needs a diagonal 2x2 dilation")
    cert = certify(exp.kernel, exp.analyzer, exp.max_s)
    base = exp.f.partition(":")[0]
    if base == "zero":
        zeros = [0.0] * len(exp.levels)
        return RateReport(list(exp.levels), zeros, zeros, zeros, zeros, math.nan, math.nan, math.nan, math.nan,
                          math.nan, "TRIVIAL", cert.to_dict(), exp.analyzer.in_lq, False, math.nan, 0.0,
                          {"factor": factor}, ["f is identically zero"])
    if base != "aniso":
        raise ConfigError("aniso_run expects an aniso test function")
    names = {"combined": "aniso:rr", "x_rough": "aniso:rs", "y_rough": "aniso:sr"}
    errs = {k: [] for k in names}
    for j in exp.levels:
        spec = OperatorSpec(exp.kernel, exp.analyzer, m, j)
        for key, name in names.items():
            g = fld.builtin(name, 2)
            box = exp.box or g.box
            shape = exp.shape or level_shape(spec, box, per_cell=4)
            errs[key].append(error(spec, g, exp.p, box, shape))
    track = [c / max(a, b) for c, a, b in zip(errs["combined"], errs["x_rough"], errs["y_rough"])]
    ok = all(1.0 / factor <= t <= factor for t in track)
    lam = m.lambda_geom
    slope = fit_slope(exp.levels, errs["combined"], lam) if len(exp.levels) >= MIN_FIT_LEVELS else math.nan
    per_axis = {}
    for key, axis in (("x_rough", 0), ("y_rough", 1)):
        per_axis[key] = fit_slope(exp.levels, errs[key], m.entries[axis, axis]) \
            if len(exp.levels) >= MIN_FIT_LEVELS else math.nan
    return RateReport(
        list(exp.levels), errs["combined"], [max(a, b) for a, b in zip(errs["x_rough"], errs["y_rough"])],
        [0.0] * len(exp.levels), track, slope, math.nan, math.nan, math.nan,
        max(track) / min(track), "PASS" if ok else "FAIL", cert.to_dict(), exp.analyzer.in_lq, True, math.nan, 0.0,
        {"factor": factor},
        ["moduli column holds max(single-axis errors); ratios are combined / max"],
        {"single_axis_errors": errs, "per_axis_slopes": per_axis},
    )
