"""Command-line front end.

Subcommands: ``converge``, ``simulate``, ``diagnose``, ``localerror``,
``filtergap``.  Exit codes: 0 success, 1 numerical abort, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    check_admissible,
    measure_dispersive_decay,
    measure_strichartz_growth,
)
from .experiments import (
    DEFAULT_GRIDS,
    DEFAULT_LADDERS,
    DEFAULT_LENGTH,
    ReferenceCheckError,
    RoughDataSpec,
    fit_order,
    generate_rough_data,
    run_convergence,
    run_filter_gap,
    run_local_order,
    scheme_config,
)
from .filters import CutoffProfile, phi1_hs_constant
from .integrators import SCHEMES, BlowUpError, evolve
from .spectral import Field, Grid

SCHEMA_VERSION = 1
CONVERGE_HEADER = ["d", "n", "L", "scheme", "alpha", "K", "tau", "T", "s_init", "seed", "error_L2", "error_L2_max_n"]
EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _environment() -> dict:
    return {
        "package_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "platform": platform.platform(),
    }


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema_version: {SCHEMA_VERSION}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row[h]) for h in header])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return None if not math.isfinite(float(obj)) else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"schema_version": SCHEMA_VERSION, **payload, "environment": _environment()}
    with open(path, "w") as fh:
        json.dump(_jsonable(body), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _pair(text: str) -> tuple[float, float]:
    try:
        p, q = (float(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'p,q', got {text!r}") from exc
    return p, q


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from exc


def _shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dim", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--n", type=int, default=None, help="points per axis (default depends on --dim)")
    p.add_argument("--length", type=float, default=DEFAULT_LENGTH)
    p.add_argument("--scheme", choices=SCHEMES, default="lri-filtered")
    p.add_argument("--alpha", type=float, default=None, help="K = tau^(-alpha/2); overrides the default coupling")
    p.add_argument("--tau-max", type=float, default=2.0**-4)
    p.add_argument("--tau-levels", type=int, default=None)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--config", type=Path, default=None)
    p.add_argument("--chi", choices=("smooth", "sharp"), default="smooth")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lowreg-nls", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("converge", help="global L2 error against a semi-discrete reference")
    _shared(p)
    p.add_argument("--n-seeds", type=int, default=1, help="average errors over seeds seed..seed+n-1")
    p.add_argument("--ref-factor", type=int, default=64)
    p.add_argument("--selftest-order", type=float, default=None,
                   help="skip the solver and fit synthetic errors tau^p")

    p = sub.add_parser("simulate", help="evolve initial data and write snapshots")
    _shared(p)
    p.add_argument("--tau", type=float, default=None, help="step size (default --tau-max)")
    p.add_argument("--times", type=_float_list, default=None, help="snapshot times, multiples of tau")
    p.add_argument("--init", choices=("rough", "plane-wave", "zero"), default="rough")
    p.add_argument("--mode", type=_float_list, default=None, help="integer lattice mode of the plane wave")
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--format", choices=("npz", "csv"), default="npz")

    p = sub.add_parser("diagnose", help="Strichartz, dispersive and filter-bound tables")
    p.add_argument("kind", choices=("strichartz", "dispersive", "filter"))
    _shared(p)
    p.add_argument("--pair", type=_pair, default=(math.inf, 2.0))
    p.add_argument("--K", type=float, default=64.0)
    p.add_argument("--ensemble", type=int, default=32)
    p.add_argument("--horizon", type=float, default=0.25)

    p = sub.add_parser("localerror", help="one-step error slope")
    _shared(p)
    p.add_argument("--init", choices=("rough", "plane-wave", "smooth"), default="smooth")
    p.add_argument("--mode", type=_float_list, default=None, help="integer lattice mode of the plane wave")
    p.add_argument("--amplitude", type=float, default=1.0)

    p = sub.add_parser("filtergap", help="distance between filtered and unfiltered solutions")
    _shared(p)
    p.add_argument("--K-list", type=_float_list, default=[16, 32, 64, 128, 256])
    p.add_argument("--tau-ref", type=float, default=2.0**-10)
    return parser


def _load_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    known = set(vars(args))
    cleaned = {}
    for key, value in cfg.items():
        dest = key.lstrip("-").replace("-", "_")
        if dest not in known or dest in ("command", "config"):
            raise UsageError(f"unknown config key {key!r}")
        cleaned[dest] = value
    # flags given on the command line win over the file
    defaults = parser.parse_args([args.command] + ([args.kind] if args.command == "diagnose" else []))
    explicit = {k for k, v in vars(args).items() if getattr(defaults, k) != v}
    for dest, value in cleaned.items():
        if dest not in explicit:
            if dest in ("out", "config"):
                value = Path(value)
            setattr(args, dest, value)
    return args


def _grid(args) -> Grid:
    n = args.n if args.n is not None else DEFAULT_GRIDS[args.dim]
    return Grid(args.dim, n, args.length)


def _ladder(args) -> list[float]:
    levels = args.tau_levels if args.tau_levels is not None else len(DEFAULT_LADDERS[args.dim])
    if levels < 2:
        raise UsageError("--tau-levels must be at least 2")
    return [args.tau_max / 2**k for k in range(levels)]


def cmd_converge(args) -> int:
    taus = _ladder(args)
    out = Path(args.out)
    if args.selftest_order is not None:
        errors = [t**args.selftest_order for t in taus]
        order, resid = fit_order(taus, errors)
        rows = [
            {"d": args.dim, "n": "", "L": args.length, "scheme": "selftest", "alpha": "", "K": "", "tau": t,
             "T": args.T, "s_init": args.s, "seed": args.seed, "error_L2": e, "error_L2_max_n": e}
            for t, e in zip(taus, errors)
        ]
        write_csv(out / "converge.csv", CONVERGE_HEADER, rows)
        write_json(out / "converge.json", {"config": _echo(args), "taus": taus, "errors": errors,
                                           "slope": order, "residual": resid})
        return EXIT_OK
    grid = _grid(args)
    seeds = list(range(args.seed, args.seed + args.n_seeds))
    report = run_convergence(args.scheme, grid, RoughDataSpec(s=args.s, seed=args.seed), taus, args.T,
                             alpha=args.alpha, seeds=seeds, profile=CutoffProfile(args.chi),
                             ref_factor=args.ref_factor)
    write_csv(out / "converge.csv", CONVERGE_HEADER, report.rows())
    payload = report.to_dict()
    timing = payload.pop("runtimes")
    write_json(out / "converge.json", {"config": _echo(args), "report": payload, "slope": report.order,
                                       "residual": report.residual})
    # wall-clock data lives apart so the report stays byte-identical across reruns
    write_json(out / "timing.json", {"taus": report.taus, "runtime_per_tau": timing})
    print(f"fitted order {report.order:.4f} (residual {report.residual:.2e})")
    return EXIT_NUMERICAL if report.failures else EXIT_OK


def _echo(args) -> dict:
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())}


def _initial_data(args, grid: Grid) -> Field:
    if args.init == "zero":
        return Field.zeros(grid)
    if args.init == "plane-wave":
        mode = args.mode if args.mode is not None else [1.0] * grid.d
        return Field.plane_wave(grid, mode, args.amplitude)
    if args.init == "smooth":
        c = [grid.length / 2] * grid.d
        w = grid.length / 16
        return Field.from_function(grid, lambda *x: np.exp(-sum((xa - ca) ** 2 for xa, ca in zip(x, c)) / w**2) + 0j)
    return generate_rough_data(grid, RoughDataSpec(s=args.s, seed=args.seed)).as_representation("physical")


def cmd_simulate(args) -> int:
    grid = _grid(args)
    tau = args.tau if args.tau is not None else args.tau_max
    steps = int(round(args.T / tau))
    cfg = scheme_config(args.scheme, tau, steps, grid.d, args.alpha, CutoffProfile(args.chi))
    times = args.times if args.times is not None else [0.0, steps * tau]
    u0 = _initial_data(args, grid)
    traj = evolve(u0, cfg, times)
    wanted = sorted(set(round(t / tau) for t in times))
    keep = [i for i, t in enumerate(traj.times) if round(t / tau) in wanted]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    snaps = np.stack([traj.snapshots[i].physical for i in keep])
    stimes = np.asarray([traj.times[i] for i in keep])
    if args.format == "npz":
        np.savez(out / "snapshots.npz", times=stimes, snapshots=snaps, schema_version=SCHEMA_VERSION)
    else:
        rows = []
        for t, s in zip(stimes, snaps):
            for idx, val in enumerate(s.ravel()):
                rows.append({"t": float(t), "index": idx, "re": float(val.real), "im": float(val.imag)})
        write_csv(out / "snapshots.csv", ["t", "index", "re", "im"], rows)
    write_json(out / "simulate.json", {"config": _echo(args), "times": stimes, "l2_norms": traj.l2_norms,
                                       "K": cfg.filter.K if cfg.filter else None})
    return EXIT_OK


def cmd_diagnose(args) -> int:
    out = Path(args.out)
    profile = CutoffProfile(args.chi)
    if args.kind == "strichartz":
        grid = _grid(args)
        p, q = args.pair
        pair = check_admissible(p, q, args.dim)
        alpha = args.alpha if args.alpha is not None else 1.0
        table = measure_strichartz_growth(grid, profile, pair, _ladder(args), alpha, ensemble_size=args.ensemble,
                                          seed=args.seed, horizon=args.horizon)
        write_csv(out / "strichartz.csv", ["tau", "K", "K_sqrt_tau", "ratio"], table.rows())
        write_json(out / "strichartz.json", {"config": _echo(args), "pair": str(pair), "alpha": alpha,
                                             "ratios": table.ratios, "growth_exponent": table.growth_exponent,
                                             "tau_exponent": table.tau_exponent})
        print(f"max ratio {table.ratios.max():.6f}; growth exponent {table.growth_exponent:.4f}")
    elif args.kind == "dispersive":
        grid = _grid(args)
        table = measure_dispersive_decay(grid, args.K, profile=profile)
        write_csv(out / "dispersive.csv", ["t", "linf", "l2"], table.rows())
        write_json(out / "dispersive.json", {"config": _echo(args), "decay_exponent": table.decay_exponent,
                                             "window": table.window, "guard": table.guard,
                                             "fit_residual": table.fit_residual})
        print(f"decay exponent {table.decay_exponent:.4f} on t in [{table.window[0]:.3g}, {table.window[1]:.3g}]")
    else:
        grid = _grid(args)
        rows = [{"tau": t, "s": args.s, "sup_constant": phi1_hs_constant(grid, t, args.s)} for t in _ladder(args)]
        write_csv(out / "filter.csv", ["tau", "s", "sup_constant"], rows)
        sup = max(r["sup_constant"] for r in rows)
        write_json(out / "filter.json", {"config": _echo(args), "sup_constant": sup})
        print(f"sup constant {sup:.6f}")
    return EXIT_OK


def cmd_localerror(args) -> int:
    grid = _grid(args)
    u0 = _initial_data(args, grid)
    res = run_local_order(args.scheme, u0, _ladder(args), alpha=args.alpha, profile=CutoffProfile(args.chi))
    rows = [{"tau": t, "error_L2": e} for t, e in zip(res.taus, res.errors)]
    write_csv(Path(args.out) / "localerror.csv", ["tau", "error_L2"], rows)
    write_json(Path(args.out) / "localerror.json", {"config": _echo(args), "slope": res.order,
                                                    "residual": res.residual})
    print(f"local order {res.order:.4f}")
    return EXIT_OK


def cmd_filtergap(args) -> int:
    grid = _grid(args)
    res = run_filter_gap(grid, RoughDataSpec(s=args.s, seed=args.seed), args.K_list, args.T, tau_ref=args.tau_ref,
                         profile=CutoffProfile(args.chi))
    rows = [{"K": k, "gap_L2": g} for k, g in zip(res.Ks, res.gaps)]
    write_csv(Path(args.out) / "filtergap.csv", ["K", "gap_L2"], rows)
    write_json(Path(args.out) / "filtergap.json", {"config": _echo(args), "slope": res.slope,
                                                   "residual": res.residual})
    print(f"gap slope {res.slope:.4f}")
    return EXIT_OK


COMMANDS = {
    "converge": cmd_converge,
    "simulate": cmd_simulate,
    "diagnose": cmd_diagnose,
    "localerror": cmd_localerror,
    "filtergap": cmd_filtergap,
}


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _load_config(parser, argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (BlowUpError, ReferenceCheckError, FloatingPointError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
