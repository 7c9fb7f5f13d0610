"""``qp`` command-line front end.

Exit codes: 0 success, 1 verdict FAIL, 2 config error, 3 numeric failure.
"""
import argparse
import csv
import io
import json
import logging
import os
import platform
import sys
import tempfile
import time

import numpy as np

from . import __version__, _accel
from . import field as fld
from . import operator as op
from .conditions import certify, tail_derivative_bound
from .config import load_experiment, parse_analyzer, parse_kernel, parse_matrix, parse_p
from .dilation import power
from .errors import ConfigError, QPError
from .harness import aniso_run, run

log = logging.getLogger("qproj")


def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temp file in the same directory and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".qp-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_meta(path, argv):
    meta = {
        "written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "argv": list(argv),
        "version": __version__,
        "backend": _accel.backend(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    atomic_write(path + ".meta.json", json.dumps(meta, indent=2) + "\n")


def _dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _environment():
    return {"version": __version__, "backend": _accel.backend(), "numpy": np.__version__}


def _emit(text, out, argv):
    if out:
        atomic_write(out, text)
        _write_meta(out, argv)
    else:
        sys.stdout.write(text)


def _fmt(v):
    return repr(float(v))


def cmd_check_kernel(args, argv):
    m = parse_matrix(args.matrix) if args.matrix else None
    dim = m.dim if m else args.dim
    kernel = parse_kernel(args.kernel, dim)
    analyzer = parse_analyzer(args.analyzer, dim)
    cert = certify(kernel, analyzer, args.max_s, args.lattice_radius, args.tol)
    payload = {"kernel": args.kernel, "analyzer": args.analyzer, "certificate": cert.to_dict()}
    if args.tail:
        tb = tail_derivative_bound(kernel, cert.strang_fix_order, args.lattice_radius)
        payload["tail_bound"] = {"value": tb.value, "status": tb.status,
                                 "last_shell_ratio": tb.last_shell_ratio, "decay_exponent": tb.decay_exponent}
    if m is not None:
        payload["analyzer_in_snp_class"] = analyzer.in_snp_class(m)
    _emit(_dumps(payload), args.out, argv)
    return 0


def cmd_approx(args, argv):
    m = parse_matrix(args.matrix)
    kernel = parse_kernel(args.kernel, m.dim)
    analyzer = parse_analyzer(args.analyzer, m.dim)
    f = fld.builtin(args.f, m.dim)
    spec = op.OperatorSpec(kernel, analyzer, m, args.level, args.lattice_truncation)
    box = tuple(tuple(b) for b in json.loads(args.box)) if args.box else f.box
    if len(box) != m.dim:
        raise ConfigError("box must have one interval per dimension")
    shape = tuple(args.shape) if args.shape else op.level_shape(spec, box, per_cell=4, base=257 if m.dim == 1 else 65,
                                                                budget=2**20)
    q = op.apply(spec, f, box, shape)
    pts = q.points()
    fv = f(pts)
    qv = q.values.ravel()
    p = parse_p(args.p)
    err = fld.lp_norm(q.with_values(fv.reshape(q.shape) - q.values), p)
    if args.out:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i}" for i in range(m.dim)] + ["f", "Qf"])
        for row, a, b in zip(pts, fv, qv):
            w.writerow([_fmt(v) for v in row] + [_fmt(a), _fmt(np.real(b))])
        atomic_write(args.out, buf.getvalue())
        _write_meta(args.out, argv)
    summary = {"level": args.level, "p": args.p, "error": err, "uncertainty": spec.uncertainty(),
               "shape": list(shape), "box": [list(b) for b in box]}
    sys.stdout.write(_dumps(summary))
    return 0


def cmd_rate(args, argv):
    mode, exp, th = load_experiment(args.config, seed=args.seed)
    if mode == "aniso":
        report = aniso_run(exp, th.get("factor", 4.0))
    else:
        report = run(exp)
    payload = report.to_dict()
    payload["environment"] = _environment()
    payload["seed"] = exp.seed
    payload["config"] = os.path.basename(args.config)
    text = _dumps(payload)
    if args.out:
        _emit(text, args.out, argv)
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for row in report.csv_rows():
            w.writerow([row[0]] + [_fmt(v) if not isinstance(v, str) else v for v in row[1:]])
        atomic_write(args.csv, buf.getvalue())
        _write_meta(args.csv, argv)
    if not args.out:
        sys.stdout.write(text)
    print(f"verdict: {report.verdict}", file=sys.stderr)
    return 1 if report.verdict == "FAIL" else 0


def cmd_moduli(args, argv):
    m = parse_matrix(args.matrix)
    f = fld.builtin(args.f, m.dim)
    p = parse_p(args.p)
    rows = []
    for j in args.levels:
        a = power(m, j)
        rows.append({
            "j": j,
            "modulus": fld.modulus(f, a, args.s, p, args.directions, seed=args.seed),
            "best_approx": fld.best_approx(f, a, p),
        })
    payload = {"f": args.f, "s": args.s, "p": args.p, "matrix": m.to_config(), "seed": args.seed, "rows": rows}
    _emit(_dumps(payload), args.out, argv)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="qp", description="Quasi-projection operator experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    ck = sub.add_parser("check-kernel", help="certify Strang-Fix and compatibility orders")
    ck.add_argument("--kernel", required=True)
    ck.add_argument("--analyzer", default="delta")
    ck.add_argument("--dim", type=int, default=1)
    ck.add_argument("--matrix")
    ck.add_argument("--max-s", type=int, default=6)
    ck.add_argument("--lattice-radius", type=int, default=50)
    ck.add_argument("--tol", type=float, default=1e-8)
    ck.add_argument("--tail", action="store_true", help="also report the tail derivative bound")
    ck.add_argument("--out")

    ap = sub.add_parser("approx", help="evaluate Q_j f on a grid")
    ap.add_argument("--kernel", required=True)
    ap.add_argument("--analyzer", default="delta")
    ap.add_argument("--matrix", default="2")
    ap.add_argument("--level", type=int, required=True)
    ap.add_argument("--f", default="gaussian")
    ap.add_argument("--p", default="2")
    ap.add_argument("--box", help='JSON list of [lo, hi] per axis, e.g. "[[-5, 5]]"')
    ap.add_argument("--shape", type=int, nargs="+")
    ap.add_argument("--lattice-truncation", type=float)
    ap.add_argument("--out")

    rt = sub.add_parser("rate", help="run a level sweep from a JSON config")
    rt.add_argument("--config", required=True)
    rt.add_argument("--out")
    rt.add_argument("--csv")
    rt.add_argument("--seed", type=int)

    mo = sub.add_parser("moduli", help="tabulate moduli of smoothness and best approximations")
    mo.add_argument("--f", default="gaussian")
    mo.add_argument("--matrix", default="2")
    mo.add_argument("--s", type=int, default=2)
    mo.add_argument("--p", default="2")
    mo.add_argument("--levels", type=int, nargs="+", default=[1, 2, 3, 4])
    mo.add_argument("--directions", type=int, default=32)
    mo.add_argument("--seed", type=int, default=0)
    mo.add_argument("--out")

    sub.add_parser("version", help="print the version")
    return parser


COMMANDS = {"check-kernel": cmd_check_kernel, "approx": cmd_approx, "rate": cmd_rate, "moduli": cmd_moduli}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "version":
        print(f"qp {__version__}")
        return 0
    try:
        return COMMANDS[args.command](args, argv)
    except (ConfigError, ValueError, KeyError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (QPError, ArithmeticError, MemoryError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
