"""Command-line front end: sweeps and figure data as CSV or JSON.

Every command writes one table. CSV files start with a ``#`` comment line
holding the resolved configuration as JSON, followed by a header row.
Exit codes: 0 success, 2 bad usage, 3 numeric failure at one or more points.

Environment: ``JCQED_WORKERS`` sets the default worker count and
``JCQED_OUTPUT_DIR`` the directory for default output files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import asymptotics, dynamics, infogain, initialization
from .core import CoherentField, EvolutionParams, PureQubit
from .errors import JCError

COMMANDS = ("evolve", "aig-map", "fig2-map", "ball-image", "init-search", "validate")
# checked after the config file is merged, so either source may supply them
REQUIRED = {"evolve": ("alpha",), "ball-image": ("alpha",), "init-search": ("target_theta",)}


class UsageError(Exception):
    pass


def _floats(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def _range(text):
    parts = str(text).replace(",", " ").split()
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"range needs 'start stop count', got {text!r}")
    start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise argparse.ArgumentTypeError("range count must be >= 1")
    if count > 1 and not stop > start:
        raise argparse.ArgumentTypeError("range needs stop > start")
    return (start, stop, count)


def _axis(rng):
    start, stop, count = rng
    return np.linspace(start, stop, count) if count > 1 else np.array([start])


def _add_common(p):
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--output", "-o", help="output file, '-' for stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int, default=None)


def _add_tau(p, default=None):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--tau", type=float, default=default)
    g.add_argument("--tau-k", type=int, help="set tau = (k - 1/2) pi")


def _add_grid(p):
    p.add_argument("--theta-nodes", type=int, default=64)
    p.add_argument("--phi-nodes", type=int, default=64)
    p.add_argument("--no-guard", action="store_true", help="skip the grid-doubling convergence check")


def build_parser():
    parser = argparse.ArgumentParser(prog="jcqed", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="Bloch vector after one interaction")
    _add_common(p)
    p.add_argument("--alpha", type=float, help="required")
    p.add_argument("--phase", type=float, default=0.0)
    _add_tau(p)
    p.add_argument("--cg", type=complex, default=1)
    p.add_argument("--ce", type=complex, default=0)

    for name, helptext in (("aig-map", "average information gain surface"),
                           ("fig2-map", "I_avg - 0.2787 <r>^2 surface")):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        p.add_argument("--tau-range", type=_range, default=(0.0, 20.0, 60))
        p.add_argument("--alpha-range", type=_range, default=(0.05, 3.0, 60))
        _add_grid(p)

    p = sub.add_parser("ball-image", help="Bloch-ball images under the iterated channel")
    _add_common(p)
    _add_tau(p)
    p.add_argument("--alpha", type=_floats, help="comma-separated amplitudes (required)")
    p.add_argument("--phase", type=float, default=0.0)
    p.add_argument("--iters", type=int, default=1)
    p.add_argument("--points", type=int, default=500)

    p = sub.add_parser("init-search", help="find (alpha, phase) for a target state")
    _add_common(p)
    p.add_argument("--target-theta", type=float, help="required")
    p.add_argument("--target-phi", type=float, default=0.0)
    p.add_argument("--tau-k", type=int, default=3)
    p.add_argument("--iters", type=int, default=3)
    p.add_argument("--alpha-min", type=float, default=1e-3)
    p.add_argument("--alpha-max", type=float, default=1.0)
    p.add_argument("--points", type=int, default=200)

    p = sub.add_parser("validate", help="closed form vs oracle cross-check")
    _add_common(p)
    p.add_argument("--states", type=int, default=20)
    return parser


def read_config(path):
    """Parse a flat ``key = value`` file; '#' starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            sep = "=" if "=" in line else ":" if ":" in line else None
            if sep is None:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split(sep, 1))
            values[key.replace("-", "_")] = value
    return values


def _apply_config(subparser, values):
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, text in values.items():
        action = actions.get(key)
        if action is None:
            raise UsageError(f"unknown config key {key!r}")
        if action.nargs == 0:
            defaults[key] = text.lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = action.type(text) if action.type else text
    subparser.set_defaults(**defaults)


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        _apply_config(sub, read_config(args.config))
        args = parser.parse_args(argv)
        if "--tau" in argv and hasattr(args, "tau_k"):
            args.tau_k = None
    missing = [k for k in REQUIRED.get(args.command, ()) if getattr(args, k) is None]
    if missing:
        raise UsageError("missing required value: " + ", ".join("--" + k.replace("_", "-") for k in missing))
    if args.workers is None:
        args.workers = int(os.environ.get("JCQED_WORKERS", os.cpu_count() or 1))
    return args


def _tau(args):
    if getattr(args, "tau_k", None) is not None:
        return (args.tau_k - 0.5) * math.pi
    if args.tau is None:
        raise UsageError("one of --tau or --tau-k is required")
    return args.tau


def _resolved(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("output",)}


def _jsonable(value):
    if isinstance(value, complex):
        return repr(value)
    if isinstance(value, tuple):
        return list(value)
    return value


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _run_points(fn, items, workers):
    """Map ``fn`` over ``items``; results come back in input order."""
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _evolve(args):
    tau = _tau(args)
    q = PureQubit.normalized(args.cg, args.ce)
    field = CoherentField(args.alpha, args.phase)
    params = EvolutionParams(tau)
    if field.phase == 0.0 and field.modulus > 0.0:
        v = dynamics.bloch_evolve(q, field, params).as_array()
    else:
        v = dynamics.oracle_evolve(q, field, params)[1].bloch().as_array()
    cols = ["tau", "alpha", "phase", "x", "y", "z", "r"]
    return cols, [[tau, args.alpha, args.phase, *v, float(np.linalg.norm(v))]], False


def _aig_task(item):
    tau, alpha, nt, npi, guard = item
    try:
        return [infogain.aig_point(tau, alpha, nt, npi, guard)], "ok"
    except JCError as exc:
        return [math.nan], exc.code


def _difference_task(item):
    tau, alpha, nt, npi, guard = item
    try:
        return list(infogain.difference_point(tau, alpha, nt, npi, guard)), "ok"
    except JCError as exc:
        return [math.nan] * 3, exc.code


def _surface(args, task, value_cols):
    items = [(float(t), float(a), args.theta_nodes, args.phi_nodes, not args.no_guard)
             for t in _axis(args.tau_range) for a in _axis(args.alpha_range)]
    results = _run_points(task, items, args.workers)
    rows, failed = [], False
    for (t, a, *_), (vals, status) in zip(items, results):
        rows.append([t, a, *vals, status])
        failed |= status != "ok"
    return ["tau", "alpha", *value_cols, "status"], rows, failed


def _ball_task(item):
    tau, alpha, phase, iters, n_points = item
    plan = initialization.IterationPlan(tau, alpha, phase, iters)
    return alpha, initialization.ball_image(plan, initialization.fibonacci_sphere(n_points))


def _ball_image(args):
    tau = _tau(args)
    items = [(tau, a, args.phase, args.iters, args.points) for a in args.alpha]
    rows = []
    for alpha, image in _run_points(_ball_task, items, args.workers):
        for it in range(1, image.history.shape[0]):
            for idx, (pt, v) in enumerate(zip(image.initial_points, image.history[it])):
                rows.append([alpha, idx, pt.theta, pt.phi, *v, it])
    cols = ["alpha", "idx", "theta0", "phi0", "x", "y", "z", "iteration"]
    return cols, rows, False


def _init_search(args):
    target = infogain.SpherePoint(args.target_theta, args.target_phi)
    res = initialization.find_initialization_params(
        target, args.tau_k, args.iters, (args.alpha_min, args.alpha_max), n_points=args.points)
    cols = ["target_theta", "target_phi", "k", "iters", "alpha", "phase", "x", "y", "z", "residual"]
    return cols, [[target.theta, target.phi, args.tau_k, args.iters, res.alpha, res.phase,
                   *res.achieved, res.residual]], False


def validate_rows(n_states=20):
    """Closed form and Kraus channel against the oracle on the standard grid."""
    states = [p.qubit() for p in initialization.fibonacci_sphere(n_states)]
    rows = []
    for alpha in (0.3, 1.0, 2.0, 4.0):
        field = CoherentField(alpha)
        for tau in (0.5, 2.0, 5.0, 11.0):
            params = EvolutionParams(tau)
            ks = dynamics.kraus_set(field, params)
            dev = chan = 0.0
            for q in states:
                exact = dynamics.bloch_evolve(q, field, params).as_array()
                oracle = dynamics.oracle_evolve(q, field, params)[1].bloch().as_array()
                kraus = dynamics.apply_channel(q.density(), ks).bloch().as_array()
                dev = max(dev, float(np.max(np.abs(exact - oracle))))
                chan = max(chan, float(np.max(np.abs(kraus - exact))))
            rows.append([alpha, tau, dev, chan, ks.completeness_error()])
    return rows


def _validate(args):
    rows = validate_rows(args.states)
    failed = any(r[2] >= 1e-8 or r[3] >= 1e-9 or r[4] >= 1e-10 for r in rows)
    worst = [max(r[i] for r in rows) for i in (2, 3, 4)]
    print(f"max |closed form - oracle| = {worst[0]:.3e}; "
          f"max |channel - closed form| = {worst[1]:.3e}; "
          f"max completeness error = {worst[2]:.3e}", file=sys.stderr)
    # the gaussian approximation is reported too but never fails validation
    q = PureQubit(1, 0)
    gdev = max(float(np.max(np.abs(
        asymptotics.gaussian_bloch(q, 10.0, t).as_array()
        - dynamics.bloch_evolve(q, CoherentField(10.0), EvolutionParams(t)).as_array())))
        for t in np.linspace(0, 20, 41))
    print(f"max |gaussian - exact| at alpha=10 = {gdev:.3e}", file=sys.stderr)
    cols = ["alpha", "tau", "oracle_dev", "channel_dev", "completeness"]
    return cols, rows, failed


HANDLERS = {
    "evolve": _evolve,
    "aig-map": lambda a: _surface(a, _aig_task, ["i_avg"]),
    "fig2-map": lambda a: _surface(a, _difference_task, ["i_avg", "r_avg_sq", "diff"]),
    "ball-image": _ball_image,
    "init-search": _init_search,
    "validate": _validate,
}


def render(cols, rows, config, fmt):
    if fmt == "json":
        doc = {"config": config, "columns": cols,
               "rows": [[_jsonable(c) if not isinstance(c, float) or math.isfinite(c) else None
                         for c in row] for row in rows]}
        return json.dumps(doc, indent=1, default=_jsonable) + "\n"
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, default=_jsonable, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_cell(c) for c in row])
    return buf.getvalue()


def _output_path(args):
    if args.output:
        return args.output
    outdir = os.environ.get("JCQED_OUTPUT_DIR", ".")
    return os.path.join(outdir, f"{args.command}.{args.format}")


def _error_line(code, message):
    print("error: " + json.dumps({"code": code, "message": str(message)}), file=sys.stderr)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
    except SystemExit as exc:       # argparse has already printed usage
        return exc.code
    except (UsageError, OSError) as exc:
        _error_line("usage", exc)
        return 2
    try:
        cols, rows, failed = HANDLERS[args.command](args)
    except UsageError as exc:
        _error_line("usage", exc)
        return 2
    except JCError as exc:
        _error_line(exc.code, exc)
        return 3
    except ValueError as exc:
        _error_line("invalid-value", exc)
        return 2

    config = {k: _jsonable(v) for k, v in _resolved(args).items()}
    config.pop("workers", None)     # output must not depend on the pool size
    text = render(cols, rows, config, args.format)
    path = _output_path(args)
    try:
        if path == "-":
            sys.stdout.write(text)
        else:
            with open(path, "w", newline="") as fh:
                fh.write(text)
    except OSError as exc:
        _error_line("io", exc)
        return 2
    if failed:
        _error_line("point-failure", "one or more grid points failed; see status column")
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
