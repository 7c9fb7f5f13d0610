"""Config parsing: kernel/analyzer shorthands and the experiment schema."""
import json
import math

import jsonschema

from .analyzers import Delta, Differential, FunctionKernel
from .conditions import quasi_interpolation_coeffs
from .dilation import DilationMatrix
from .errors import ConfigError
from .kernels import BSplineTensor, WindowedSinc

_NUM = {"type": "number"}
_P = {"anyOf": [{"type": "number", "minimum": 1}, {"enum": ["inf", "Infinity"]}]}
_KERNEL = {"anyOf": [{"type": "string"}, {"type": "object"}]}

EXPERIMENT_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kernel", "analyzer", "matrix", "f"],
    "properties": {
        "mode": {"enum": ["rate", "aniso"]},
        "kernel": _KERNEL,
        "analyzer": _KERNEL,
        "matrix": {"anyOf": [_NUM, {"type": "array", "items": {"type": "array", "items": _NUM}}]},
        "f": {"type": "string"},
        "p": _P,
        "levels": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "box": {"type": "array", "items": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}},
                "shape": {"type": "array", "items": {"type": "integer", "minimum": 2}},
            },
        },
        "seed": {"type": "integer"},
        "s": {"type": "integer", "minimum": 1},
        "max_s": {"type": "integer", "minimum": 1},
        "directions": {"type": "integer", "minimum": 32},
        "thresholds": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "ratio_spread": {"type": "number", "exclusiveMinimum": 1},
                "slope_tol": {"type": "number", "exclusiveMinimum": 0},
                "factor": {"type": "number", "exclusiveMinimum": 1},
            },
        },
    },
}

KERNEL_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["type", "orders"],
            "properties": {
                "type": {"const": "bspline"},
                "orders": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
                "shifts": {"type": "array", "items": {"type": "array", "items": _NUM}},
                "coeffs": {"type": "array", "items": _NUM},
            },
        },
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["type", "band"],
            "properties": {
                "type": {"const": "sinc"},
                "band": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
                "radius": {"type": "number", "exclusiveMinimum": 0},
                "rolloff": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            },
        },
    ]
}


def parse_p(value):
    if isinstance(value, str):
        if value.lower() in ("inf", "infinity"):
            return math.inf
        value = float(value)
    if not value >= 1:
        raise ConfigError(f"p must lie in [1, inf], got {value}")
    return float(value)


def _validate(obj, schema, what):
    try:
        jsonschema.validate(obj, schema)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid {what}: {exc.message}") from None


def parse_kernel(spec, dim):
    """``bspline:n``, ``qi:n:order``, ``sinc:band:radius[:rolloff]`` or a dict."""
    if isinstance(spec, dict):
        _validate(spec, KERNEL_SCHEMA, "kernel")
        if spec["type"] == "bspline":
            orders = tuple(spec["orders"])
            if "shifts" in spec or "coeffs" in spec:
                shifts = spec.get("shifts", [[0.0] * len(orders)])
                coeffs = spec.get("coeffs", [1.0] * len(shifts))
                if len(shifts) != len(coeffs):
                    raise ConfigError("kernel shifts and coeffs differ in length")
                return BSplineTensor(orders, tuple((tuple(s), c) for s, c in zip(shifts, coeffs)))
            return BSplineTensor(orders)
        return WindowedSinc(tuple(spec["band"]), spec.get("rolloff", 0.1), spec.get("radius", 200.0))
    if not isinstance(spec, str):
        raise ConfigError(f"cannot parse kernel {spec!r}")
    kind, *args = spec.split(":")
    try:
        if kind == "bspline" and len(args) == 1:
            return BSplineTensor((int(args[0]),) * dim)
        if kind == "qi" and len(args) == 2:
            base = BSplineTensor((int(args[0]),) * dim)
            return BSplineTensor(base.orders, tuple(quasi_interpolation_coeffs(base, int(args[1]))))
        if kind == "sinc" and 1 <= len(args) <= 3:
            band = float(args[0])
            radius = float(args[1]) if len(args) > 1 else 200.0
            rolloff = float(args[2]) if len(args) > 2 else 0.1
            return WindowedSinc((band,) * dim, rolloff, radius)
    except ValueError as exc:
        raise ConfigError(f"cannot parse kernel {spec!r}: {exc}") from None
    raise ConfigError(f"unknown kernel shorthand {spec!r}")


def parse_analyzer(spec, dim):
    """``delta``, ``kernel:<kernel shorthand>``, ``diff:c,b1,..;c,b1,..`` or a dict."""
    if isinstance(spec, dict):
        kind = spec.get("type")
        extra = set(spec) - {"type", "kernel", "terms"}
        if extra:
            raise ConfigError(f"unknown analyzer keys {sorted(extra)}")
        if kind == "delta":
            return Delta(dim)
        if kind == "kernel" and "kernel" in spec:
            return FunctionKernel(parse_kernel(spec["kernel"], dim))
        if kind == "diff" and "terms" in spec:
            terms = []
            for t in spec["terms"]:
                c = t["c"]
                terms.append((tuple(t["beta"]), complex(*c) if isinstance(c, list) else complex(c)))
            return Differential(tuple(terms))
        raise ConfigError(f"cannot parse analyzer {spec!r}")
    if not isinstance(spec, str):
        raise ConfigError(f"cannot parse analyzer {spec!r}")
    if spec == "delta":
        return Delta(dim)
    if spec.startswith("kernel:"):
        return FunctionKernel(parse_kernel(spec[len("kernel:"):], dim))
    if spec.startswith("diff:"):
        terms = []
        try:
            for part in spec[len("diff:"):].split(";"):
                c, *beta = part.split(",")
                terms.append((tuple(int(b) for b in beta), complex(c)))
        except ValueError as exc:
            raise ConfigError(f"cannot parse analyzer {spec!r}: {exc}") from None
        return Differential(tuple(terms))
    raise ConfigError(f"unknown analyzer shorthand {spec!r}")


def parse_matrix(value):
    if isinstance(value, str):
        try:
            value = json.loads(value)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"cannot parse matrix {value!r}") from exc
    return DilationMatrix.from_config(value)


def load_experiment(path_or_obj, seed=None):
    """Validated config -> ``(mode, Experiment, thresholds)``."""
    from .harness import Experiment

    if isinstance(path_or_obj, dict):
        cfg = path_or_obj
    else:
        try:
            with open(path_or_obj) as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path_or_obj}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path_or_obj} is not valid JSON: {exc}") from None
    _validate(cfg, EXPERIMENT_SCHEMA, "config")
    m = parse_matrix(cfg["matrix"])
    grid = cfg.get("grid", {})
    box = tuple(tuple(b) for b in grid["box"]) if "box" in grid else None
    shape = tuple(grid["shape"]) if "shape" in grid else None
    if box is not None and len(box) != m.dim or shape is not None and len(shape) != m.dim:
        raise ConfigError("grid box/shape must have one entry per dimension")
    th = cfg.get("thresholds", {})
    kwargs = {
        "kernel": parse_kernel(cfg["kernel"], m.dim),
        "analyzer": parse_analyzer(cfg["analyzer"], m.dim),
        "dilation": m,
        "f": cfg["f"],
        "p": parse_p(cfg.get("p", 2)),
        "box": box,
        "shape": shape,
        "seed": cfg.get("seed", 0) if seed is None else seed,
    }
    if "levels" in cfg:
        kwargs["levels"] = tuple(cfg["levels"])
    for key in ("s", "max_s", "directions"):
        if key in cfg:
            kwargs[key] = cfg[key]
    for key in ("ratio_spread", "slope_tol"):
        if key in th:
            kwargs[key] = th[key]
    exp = Experiment(**kwargs)
    from .field import builtin

    builtin(exp.f, m.dim)
    return cfg.get("mode", "rate"), exp, th
