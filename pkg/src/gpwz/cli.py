"""Command-line interface: ``gpwz <command> [options]``.

Commands
--------
modulation   sweep the Whitham zone and write the modulation table (CSV)
asymptotic   sample the leading-order solution on a z or x grid (CSV)
bvp          solve the fixed-t boundary value problem (CSV + metadata JSON)
fit          fit the phase constant of a BVP solution (JSON, optional scan CSV)
scaling      fit the error-scaling exponent over several t (JSON)
check        run the invariant gates of one or all modules (JSON)

Exit codes: 0 success, 1 usage or validation error, 2 solver
non-convergence, 3 invariant-gate violation.  Every run writes a JSON
manifest next to its main output (or to ``--manifest``) after all other
files are in place.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import checks, gp_bvp, modulation as mod, phase_fit
from .asymptotics import AsymptoticSolution, composite_eval, physical_eval

log = logging.getLogger("gpwz")

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_GATE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --- file helpers ---------------------------------------------------------

def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v) -> str:
    return "%.17g" % v


def write_csv(path, header, columns) -> None:
    cols = [np.asarray(c, dtype=float) for c in columns]
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in zip(*cols))
    _atomic_write(Path(path), "\n".join(lines) + "\n")


def read_csv(path):
    path = Path(path)
    with open(path, encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, i] for i, name in enumerate(header)}


def write_json(path, obj) -> None:
    _atomic_write(Path(path), json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _jsonable(v):
    if isinstance(v, Path):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def write_manifest(args, outputs, started, status="ok", extra=None) -> Path:
    main_out = getattr(args, "out", None)
    path = args.manifest or (Path(f"{main_out}.manifest.json") if main_out else None)
    if path is None:
        return None
    params = {k: _jsonable(v) for k, v in sorted(vars(args).items())
              if k not in ("func", "manifest") and not callable(v)}
    record = {
        "command": args.command,
        "parameters": params,
        "outputs": [str(p) for p in outputs],
        "versions": {"gpwz": __version__, "numpy": np.__version__},
        "timing": round(time.perf_counter() - started, 3),
        "status": status,
    }
    if extra:
        record.update(extra)
    write_json(path, record)
    return path


# --- argument parsing helpers --------------------------------------------

def _window(text):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must be 'zmin,zmax', got {text!r}")
    return (lo, hi)


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _threads():
    raw = os.environ.get("GPWZ_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise UsageError(f"GPWZ_THREADS must be a positive integer, got {raw!r}")
    return n


def _load_asym(args) -> AsymptoticSolution:
    s0 = getattr(args, "s0", math.pi)
    if getattr(args, "table", None):
        cols = read_csv(args.table)
        table = mod.ModulationTable.from_triples(cols["z"], cols["l1"], cols["l2"], cols["l3"])
    else:
        table = mod.sweep_zone(args.n_table)
    return AsymptoticSolution(table, s0=s0)


def _load_solution(path, t=None) -> gp_bvp.GridSolution:
    cols = read_csv(path)
    meta_path = Path(f"{path}.meta.json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    if t is None:
        if "t" not in meta:
            raise UsageError(f"no t given and no metadata file {meta_path}")
        t = meta["t"]
    x = cols["x"]
    return gp_bvp.GridSolution(t=float(t), x_grid=x, u=cols["u"],
                               converged=float(meta.get("residual", math.nan)),
                               h=float(x[1] - x[0]), order=int(meta.get("order", 4)))


# --- commands -------------------------------------------------------------

def cmd_modulation(args, started):
    if args.n < 16:
        raise UsageError("--n must be at least 16")
    table = mod.sweep_zone(args.n)
    write_csv(args.out, mod.COLUMNS, [table.column(c) for c in mod.COLUMNS])
    write_manifest(args, [args.out], started)
    return EXIT_OK


def cmd_asymptotic(args, started):
    asym = _load_asym(args)
    if args.physical:
        x = np.linspace(args.xmin, args.xmax, args.points)
        u = physical_eval(args.t, x, asym)
        write_csv(args.out, ("x", "u"), (x, u))
    else:
        if args.t <= 0:
            raise UsageError("the scaled oscillating solution needs --t > 0; use --physical for t < 0")
        z = np.linspace(args.zmin, args.zmax, args.points)
        write_csv(args.out, ("z", "U"), (z, composite_eval(args.t, z, asym)))
    write_manifest(args, [args.out], started)
    return EXIT_OK


def _solver_config(args) -> gp_bvp.SolverConfig:
    try:
        return gp_bvp.SolverConfig(h=args.h, x_min=args.xmin, x_max=args.xmax, order=args.order,
                                   t_path=tuple(args.t_path) if args.t_path else None)
    except ValueError as exc:
        raise UsageError(str(exc))


def cmd_bvp(args, started):
    config = _solver_config(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", gp_bvp.UndersamplingWarning)
        try:
            sol = gp_bvp.solve_fixed_t(args.t, config)
        finally:
            notes = [str(w.message) for w in caught
                     if issubclass(w.category, gp_bvp.UndersamplingWarning)]
            for n in notes:
                print(f"warning: {n}", file=sys.stderr)
    write_csv(args.out, ("x", "u"), (sol.x, sol.u))
    meta_path = Path(f"{args.out}.meta.json")
    write_json(meta_path, {
        "t": sol.t, "h": sol.h, "domain": [float(sol.x[0]), float(sol.x[-1])],
        "residual": sol.converged, "order": sol.order, "warnings": notes,
    })
    write_manifest(args, [args.out, meta_path], started)
    return EXIT_OK


def cmd_fit(args, started):
    sol = _load_solution(args.solution, args.t)
    asym = _load_asym(args)
    result = phase_fit.fit_phase(sol, asym, args.window)
    outputs = []
    if args.scan_out:
        write_csv(args.scan_out, ("s", "misfit"), result.curve.T)
        outputs.append(args.scan_out)
    if args.out:
        write_json(args.out, result.to_json())
        outputs.append(args.out)
    else:
        print(json.dumps(result.to_json(), indent=2, sort_keys=True))
    write_manifest(args, outputs, started)
    return EXIT_OK


def cmd_scaling(args, started):
    t_values = sorted(args.t_values)
    if len(t_values) < 3 or any(t <= 0 for t in t_values):
        raise UsageError("--t-values needs at least three positive times")
    asym = _load_asym(args)
    phase_fit._check_window(args.window)
    config = gp_bvp.SolverConfig(h=args.h, order=args.order)

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        sols = list(pool.map(lambda t: gp_bvp.solve_fixed_t(t, config), t_values))
    scaling = phase_fit.fit_exponent(sols, asym, args.window)
    report = {
        "t_values": list(scaling.t_values),
        "max_residuals": list(scaling.max_residuals),
        "s0_hat": list(scaling.s0_hats),
        "exponent": scaling.exponent,
        "prefactor": scaling.prefactor,
        "window": list(args.window),
    }
    if args.out:
        write_json(args.out, report)
    else:
        print(json.dumps(report, indent=2, sort_keys=True))
    write_manifest(args, [args.out] if args.out else [], started)
    return EXIT_OK


def cmd_check(args, started):
    names = list(checks.SUITES) if args.suite == "all" else [args.suite]
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(lambda n: checks.SUITES[n](), names))
    report = {
        name: [g.as_dict() for g in gates] for name, gates in zip(names, results)
    }
    ok = all(g.passed for gates in results for g in gates)
    report_doc = {"suite": args.suite, "passed": ok, "gates": report}
    if args.out:
        write_json(args.out, report_doc)
    else:
        print(json.dumps(report_doc, indent=2, sort_keys=True))
    for name, gates in zip(names, results):
        for g in gates:
            status = "PASS" if g.passed else "FAIL"
            print(f"{status} {name}.{g.name}: {g.value:.3e} <= {g.threshold:.1e}", file=sys.stderr)
    write_manifest(args, [args.out] if args.out else [], started,
                   status="ok" if ok else "gate_violation")
    return EXIT_OK if ok else EXIT_GATE


# --- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key=value file presetting options (flags win)")
    common.add_argument("--manifest", type=Path, help="manifest path (default: <out>.manifest.json)")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    table_opts = argparse.ArgumentParser(add_help=False)
    table_opts.add_argument("--table", type=Path, help="modulation table CSV (default: compute)")
    table_opts.add_argument("--n-table", type=int, default=512, help="nodes when computing the table")

    parser = _Parser(prog="gpwz", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"gpwz {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("modulation", parents=[common], help="modulation table across the zone")
    p.add_argument("--n", type=int, default=512, help="number of z nodes (>= 16)")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_modulation)

    p = sub.add_parser("asymptotic", parents=[common, table_opts], help="sample the asymptotic solution")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--s0", type=float, default=math.pi, help="phase constant (default pi)")
    p.add_argument("--physical", action="store_true", help="write x,u instead of z,U")
    p.add_argument("--zmin", type=float, default=-2.0)
    p.add_argument("--zmax", type=float, default=0.5)
    p.add_argument("--xmin", type=float, default=-60.0)
    p.add_argument("--xmax", type=float, default=60.0)
    p.add_argument("--points", type=int, default=4001)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_asymptotic)

    p = sub.add_parser("bvp", parents=[common], help="solve the fixed-t boundary value problem")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--h", type=float, default=0.05)
    p.add_argument("--xmin", type=float, default=None)
    p.add_argument("--xmax", type=float, default=None)
    p.add_argument("--order", type=int, choices=(2, 4), default=4)
    p.add_argument("--t-path", type=_float_list, default=None,
                   help="comma-separated continuation schedule ending before --t")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_bvp)

    p = sub.add_parser("fit", parents=[common, table_opts], help="fit the phase constant")
    p.add_argument("--solution", type=Path, required=True, help="BVP solution CSV (x,u)")
    p.add_argument("--t", type=float, default=None, help="time (default: from the metadata file)")
    p.add_argument("--window", type=_window, default=phase_fit.DEFAULT_WINDOW)
    p.add_argument("--scan-out", type=Path, default=None)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("scaling", parents=[common, table_opts], help="fit the error exponent")
    p.add_argument("--t-values", type=_float_list, default=[10.0, 15.0, 20.0, 30.0])
    p.add_argument("--h", type=float, default=0.05)
    p.add_argument("--order", type=int, choices=(2, 4), default=4)
    p.add_argument("--window", type=_window, default=phase_fit.DEFAULT_WINDOW)
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("check", parents=[common], help="run invariant gates")
    p.add_argument("--suite", choices=sorted(checks.SUITES) + ["all"], default="all")
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_check)
    return parser


def _read_config(path: Path) -> dict:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def parse_args(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path)
    known, _ = pre.parse_known_args(argv)
    choices = parser._subparsers._group_actions[0].choices
    command = next((a for a in argv if a in choices), None)
    if known.config is not None and command is not None:
        try:
            preset = _read_config(known.config)
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}")
        subparser = choices[command]
        actions = {a.dest: a for a in subparser._actions}
        unknown = sorted(set(preset) - set(actions) - {"config", "help"})
        if unknown:
            raise UsageError(f"unknown keys in {known.config}: {', '.join(unknown)}")
        for key, value in preset.items():
            action = actions[key]
            if action.nargs == 0:  # on/off switches
                preset[key] = value.lower() in ("1", "true", "yes", "on")
            elif action.type is not None:
                try:
                    preset[key] = action.type(value)
                except (ValueError, argparse.ArgumentTypeError) as exc:
                    raise UsageError(f"{known.config}: bad value for {key}: {exc}")
            action.required = False
        subparser.set_defaults(**preset)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    started = time.perf_counter()
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"gpwz: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, started)
    except (UsageError, phase_fit.WindowError, phase_fit.UndersamplingError, ValueError) as exc:
        print(f"gpwz {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except gp_bvp.NonConvergence as exc:
        print(f"gpwz {args.command}: solver did not converge: {exc}", file=sys.stderr)
        write_manifest(args, [], started, status="nonconvergence", extra={"failing_t": exc.t})
        return EXIT_SOLVER
    except mod.ModulationConvergenceError as exc:
        print(f"gpwz {args.command}: continuation failed: {exc}", file=sys.stderr)
        write_manifest(args, [], started, status="nonconvergence", extra={"failing_z": exc.z})
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
