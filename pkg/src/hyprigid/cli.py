"""Command-line front end.

Exit codes: 0 success, 1 usage / configuration / IO error, 2 a check failed
(``verify``), 3 probe inconclusive (``probe``).
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .reports import dumps
from .rigidity import ProbeConfig, ProbeError, run_probe
from .scenario import ConfigError, ProbeFile, Scenario, build_shape, load_config
from .suite import convergence_rows, run_checks
from .surface import off_center_sphere_shape, perturb_sphere, save_shape, sphere_shape

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2, 3

log = logging.getLogger("hyprigid")


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args, model):
    cfg = load_config(args.config, model)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.resolution is not None:
        cfg.resolution = args.resolution
    shape = build_shape(cfg, Path(args.config).parent)
    return cfg, shape


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


def cmd_verify(args) -> int:
    cfg, shape = _load(args, Scenario)
    report = run_checks(shape, cfg.resolution, cfg.checks, cfg.ks, cfg.j, cfg.name)
    out = _out_dir(args)
    report.write(
        out / (cfg.outputs.json_name or f"{cfg.name}.report.json"),
        out / (cfg.outputs.csv_name or f"{cfg.name}.report.csv"),
    )
    for e in report.entries:
        _say(args, f"{e.verdict:>20}  {e.name}")
    failed = report.failed
    _say(args, f"{len(report.entries)} checks, {len(failed)} failed")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_convergence(args) -> int:
    cfg, shape = _load(args, Scenario)
    resolutions = [int(x) for x in args.resolutions.split(",")]
    rows = convergence_rows(shape, resolutions, cfg.ks)
    out = _out_dir(args)
    lines = ["resolution,check,residual"] + [f"{N},{name},{res!r}" for N, name, res in rows]
    path = out / (cfg.outputs.csv_name or f"{cfg.name}.convergence.csv")
    path.write_text("\n".join(lines) + "\n")
    for N, name, res in rows:
        _say(args, f"{N:>5}  {name:<32} {res:.3e}")
    return EXIT_OK


def cmd_probe(args) -> int:
    cfg, shape = _load(args, ProbeFile)
    pc = ProbeConfig(
        shape,
        cfg.k,
        cfg.j,
        resolution=cfg.resolution,
        target_area=cfg.target_area,
        method=cfg.method,
        max_evaluations=cfg.max_evaluations,
        objective_tol=cfg.objective_tol,
        spread_tol=cfg.spread_tol,
    )
    result = run_probe(pc)
    out = _out_dir(args)
    (out / (cfg.outputs.json_name or f"{cfg.name}.probe.json")).write_text(dumps(result.to_dict()))
    (out / (cfg.outputs.history_csv or f"{cfg.name}.history.csv")).write_text(result.history_csv())
    _say(
        args,
        f"{result.verdict}: J={result.objective:.3e} spread={result.radius_spread:.3e} "
        f"evaluations={result.evaluations} time={result.wall_clock:.2f}s",
    )
    return EXIT_OK if result.sphere_reached else EXIT_INCONCLUSIVE


def cmd_make_shape(args) -> int:
    if args.kind == "sphere":
        shape = sphere_shape(args.dimension, args.rho, args.band_limit)
    elif args.kind == "off-center":
        shape = off_center_sphere_shape(args.dimension, args.rho, args.center_distance, args.band_limit)
    else:
        shape = perturb_sphere(args.rho, args.amplitude, args.seed or 0, args.band_limit, args.dimension)
    if args.out is None:
        sys.stdout.write(dumps(shape.to_dict()))
    else:
        save_shape(shape, args.out)
        _say(args, f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the random seed")
    common.add_argument("--quiet", action="store_true")

    cfg = argparse.ArgumentParser(add_help=False, parents=[common])
    cfg.add_argument("--config", required=True, metavar="PATH")
    cfg.add_argument("--out", metavar="DIR", default=None)
    cfg.add_argument("--resolution", type=int, default=None, metavar="N")

    p = argparse.ArgumentParser(prog="hyprigid", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[cfg], help="run the residual checks of a scenario").set_defaults(
        func=cmd_verify
    )
    c = sub.add_parser("convergence", parents=[cfg], help="identity residuals across resolutions")
    c.add_argument("--resolutions", default="10,20,40", help="comma separated list")
    c.set_defaults(func=cmd_convergence)
    sub.add_parser("probe", parents=[cfg], help="run a rigidity probe").set_defaults(func=cmd_probe)

    m = sub.add_parser("make-shape", parents=[common], help="write a shape file")
    m.add_argument("--kind", choices=["sphere", "perturbed", "off-center"], default="sphere")
    m.add_argument("--dimension", type=int, choices=[2, 3], default=3)
    m.add_argument("--rho", type=float, default=1.0)
    m.add_argument("--amplitude", type=float, default=0.1)
    m.add_argument("--center-distance", type=float, default=0.3)
    m.add_argument("--band-limit", type=int, default=4)
    m.add_argument("--out", metavar="PATH", default=None)
    m.set_defaults(func=cmd_make_shape)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (ProbeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
