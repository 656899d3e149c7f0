"""hetlab command line: solve, minimize, verify, sweep.

Exit codes: 0 success, 1 configuration error, 2 solver error,
3 verification failure.
"""

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import profiles
from .cauchy import SolverConfig, solve_cauchy
from .errors import (ConfigError, ConstructionError, HetlabError,
                     HypothesisViolation)
from .kernels import certify_kernel, kernel_from_spec, parse_spec
from .mc_truncation import sweep_cell
from .minimizer import solve_variational
from .potentials import potential_from_spec
from .verify import run_all

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3

DEFAULTS = {
    "kernel": "p-power:p=2",
    "potential": "p-dw:p=2,alpha=1",
    "anchor": None,
    "t_max": None,
    "tol": None,
    "T": None,
    "N": 4001,
    "out": None,
    "route": "cauchy",
    "grid": None,
}

_CONFIG_ERRORS = (ConfigError, ConstructionError, HypothesisViolation)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option values")
    common.add_argument("--kernel", help='e.g. "p-power:p=2" or a JSON spec')
    common.add_argument("--potential", help='e.g. "p-dw:p=2,alpha=1" or a JSON spec')
    common.add_argument("--anchor", type=float, help="value of u(0)")
    common.add_argument("--t-max", dest="t_max", type=float)
    common.add_argument("--tol", type=float, help="integrator relative tolerance")
    common.add_argument("--T", type=float, help="half-width of the variational domain")
    common.add_argument("--N", type=int, help="interior nodes of the variational grid")
    common.add_argument("--out", help="output path (.csv or .json); stdout if absent")
    common.add_argument("--route", choices=("cauchy", "variational"))

    ap = argparse.ArgumentParser(prog="hetlab", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="cmd", required=True)
    sub.add_parser("solve", parents=[common], help="compute a profile")
    sub.add_parser("minimize", parents=[common],
                   help="same as solve --route variational")
    p = sub.add_parser("verify", parents=[common], help="check a saved profile")
    p.add_argument("profile", help="profile .json or .csv")
    p = sub.add_parser("sweep", parents=[common], help="run a parameter grid")
    p.add_argument("--grid", help='e.g. "alpha=0.05:0.4:0.05;L=1" or "p=1.5,2,3"')
    return ap


def resolve(args):
    """Flags override the --config file, which overrides DEFAULTS."""
    opts = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        opts.update(loaded)
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            opts[key] = v
    if args.cmd == "minimize":
        opts["route"] = "variational"
    return opts


def _solver_config(opts):
    kw = {}
    if opts["t_max"] is not None:
        kw["t_max"] = float(opts["t_max"])
    if opts["tol"] is not None:
        kw["rel_tol"] = float(opts["tol"])
        kw["abs_tol"] = 1e-2 * float(opts["tol"])
    return SolverConfig(**kw)


def _spec(x):
    # config files may carry specs as objects rather than strings
    return x if isinstance(x, (dict, str)) else json.dumps(x)


def build_problem(opts):
    k = kernel_from_spec(_spec(opts["kernel"]))
    cert = certify_kernel(k)
    if not cert["certified"]:
        raise ConfigError(f"kernel {k.kind} fails certification: sampled "
                          f"exponents [{cert['l_est']:.6g}, {cert['m_est']:.6g}] "
                          f"vs declared [{k.l}, {k.m}]")
    P = potential_from_spec(_spec(opts["potential"]), kernel=k)
    return k, P


def compute(opts):
    k, P = build_problem(opts)
    if opts["route"] == "variational":
        prof = solve_variational(k, P, T=opts["T"], N=int(opts["N"]),
                                 anchor=opts["anchor"])
    else:
        prof = solve_cauchy(k, P, opts["anchor"], _solver_config(opts))
    return k, P, prof


def write_profile(prof, out):
    if out is None:
        profiles.write_csv(prof, sys.stdout)
    elif out.endswith(".json"):
        profiles.write_json(prof, out)
    else:
        profiles.write_csv(prof, out)


def cmd_solve(opts):
    _, _, prof = compute(opts)
    if prof.route == "variational" and not prof.meta["converged"]:
        print(f"hetlab: warning: iteration cap reached with gradient "
              f"{prof.meta['grad_norm']:.3g}", file=sys.stderr)
    write_profile(prof, opts["out"])
    return EXIT_OK


def cmd_verify(opts, path):
    if not os.path.exists(path):
        raise ConfigError(f"no such profile: {path}")
    if path.endswith(".json"):
        prof = profiles.read_json(path)
        meta = prof.meta
        if "kernel" in meta and opts["kernel"] == DEFAULTS["kernel"]:
            opts = dict(opts, kernel=meta["kernel"])
        if "potential" in meta and opts["potential"] == DEFAULTS["potential"]:
            opts = dict(opts, potential=meta["potential"])
        k, P = build_problem(opts)
    else:
        k, P = build_problem(opts)
        prof = profiles.read_csv(path, (P.well_low, P.well_high),
                                 opts["route"])
    rep = run_all(prof, k, P)
    text = rep.to_json()
    if opts["out"]:
        with open(opts["out"], "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    print(rep.table(), file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_VERIFY


def parse_grid(spec):
    """``"a=0.1:0.3:0.1;L=1,2"`` or a JSON object of lists -> ordered dict."""
    if spec is None:
        raise ConfigError("sweep needs --grid")
    if isinstance(spec, dict):
        grid = {k: list(np.atleast_1d(v).astype(float)) for k, v in spec.items()}
    elif spec.strip().startswith("{"):
        try:
            return parse_grid(json.loads(spec))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad grid JSON: {exc}") from None
    else:
        grid = {}
        for part in filter(None, (p.strip() for p in spec.split(";"))):
            name, eq, vals = part.partition("=")
            if not eq:
                raise ConfigError(f"expected name=values in {part!r}")
            try:
                if ":" in vals:
                    a, b, s = (float(x) for x in vals.split(":"))
                    if not s > 0:
                        raise ConfigError("grid step must be positive")
                    n = int(np.floor((b - a) / s + 1e-9)) + 1
                    v = list(a + s * np.arange(n))
                else:
                    v = [float(x) for x in vals.split(",") if x.strip()]
            except ValueError:
                raise ConfigError(f"non-numeric grid entry in {part!r}") from None
            grid[name.strip()] = [round(x, 12) for x in v]
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ConfigError("empty grid")
    return grid


def _with_params(spec, cell):
    s = parse_spec(_spec(spec)) if not isinstance(spec, dict) else dict(spec)
    params = dict(s.get("params", {}))
    for name, v in cell.items():
        if name in params:
            params[name] = v
    return {"kind": s["kind"], "params": params}


def _generic_cell(opts, cell):
    row = dict(cell)
    try:
        o = dict(opts, kernel=_with_params(opts["kernel"], cell),
                 potential=_with_params(opts["potential"], cell))
        k, P, prof = compute(o)
        rep = run_all(prof, k, P)
    except HetlabError as exc:
        row.update(passed=False, error=f"{type(exc).__name__}: {exc}")
        return row
    row["passed"] = rep.passed
    row["checks"] = {c.name: {"status": c.status, "margin": c.margin}
                     for c in rep.checks}
    return row


def cmd_sweep(opts):
    grid = parse_grid(opts["grid"])
    names = list(grid)
    cells = [dict(zip(names, vals)) for vals in itertools.product(*grid.values())]
    if "L" in grid:
        base = parse_spec(_spec(opts["potential"]))
        alpha0 = base["params"].get("alpha", 0.1)
        cfg = _solver_config(opts)
        work = lambda c: sweep_cell(c.get("alpha", alpha0), c["L"], cfg)
    else:
        work = lambda c: _generic_cell(opts, c)
    threads = int(os.environ.get("HETLAB_THREADS", "0")) or (os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = list(pool.map(work, cells))  # map keeps grid order
    lines = "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)
    if opts["out"]:
        with open(opts["out"], "w") as fh:
            fh.write(lines)
    else:
        sys.stdout.write(lines)
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        opts = resolve(args)
        if args.cmd in ("solve", "minimize"):
            return cmd_solve(opts)
        if args.cmd == "verify":
            return cmd_verify(opts, args.profile)
        return cmd_sweep(opts)
    except _CONFIG_ERRORS as exc:
        print(f"hetlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HetlabError as exc:
        print(f"hetlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
