"""``dimpol`` command-line interface.

Exit codes: 0 ok, 2 usage or parse error, 3 solver error, 4 contexts not
similar, 5 assertion failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .analytic import check_suite
from .compare import DEFAULT_MARGIN, DEFAULT_STEPS, compare_policies
from .dims import transforms_for
from .errors import DimpolError, NotSimilar, SignatureMismatch
from .io import (ConfigError, PolicyFileError, atomic_write_text, config_from_mapping,
                 field_to_text, read_config, read_policy, residuals_to_text, rows_to_csv,
                 write_policy)
from .policy import transfer
from .regime import DEFAULT_Q_STARS, DEFAULT_TAU_MAX_STARS, run_sweep, sweep_contexts
from .solver import solve
from .systems import CAR_CONTEXTS, PENDULUM_CONTEXTS, SIGNATURES

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER = 3
EXIT_NOT_SIMILAR = 4
EXIT_ASSERT = 5

log = logging.getLogger("dimpol")

_TABLES = {"pendulum": PENDULUM_CONTEXTS, "car": CAR_CONTEXTS}


class UsageError(Exception):
    pass


def _err(msg: str):
    print(f"dimpol: {msg}", file=sys.stderr)


def _load_run_config(args):
    """RunConfig from --config or --context SYSTEM:KEY, with CLI overrides."""
    if args.config and args.context:
        raise UsageError("give either --config or --context, not both")
    if args.config:
        cfg = read_config(args.config)
    elif args.context:
        system, _, key = args.context.partition(":")
        try:
            ctx = _TABLES[system][key]
        except KeyError:
            raise UsageError(f"unknown built-in context {args.context!r} "
                             "(use pendulum:a .. pendulum:i or car:a .. car:i)") from None
        kv = {"system": system}
        kv.update({k: repr(float(v)) for k, v in vars(ctx).items()})
        cfg = config_from_mapping(kv)
    else:
        raise UsageError("a context is required (--config PATH or --context SYSTEM:KEY)")
    if getattr(args, "grid", None) is not None:
        if args.grid < 2:
            raise ConfigError("grid count must be ≥ 2")
        cfg.grid = (args.grid, args.grid)
    if getattr(args, "controls", None) is not None:
        if args.controls < 2:
            raise ConfigError("controls must be ≥ 2")
        cfg.controls = args.controls
    return cfg


def _sibling(path: Path, suffix: str) -> Path:
    stem = path.name[:-4] if path.name.endswith(".csv") else path.name
    return path.with_name(f"{stem}.{suffix}.csv")


def cmd_solve(args) -> int:
    cfg = _load_run_config(args)
    try:
        model = cfg.model()
        dp = cfg.dp_config()
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    out = Path(args.out or cfg.out or f"{cfg.system}_policy.csv")
    log.info("solving %s on %s grid, %d controls, %d steps",
             cfg.system, "x".join(map(str, cfg.grid)), cfg.controls, dp.steps)
    try:
        res = solve(dp, model, interp=cfg.interp)
    except (DimpolError, FloatingPointError, MemoryError) as exc:
        _err(f"solver failed: {exc}")
        return EXIT_SOLVER
    policy = res.policy.with_meta(dt=dp.dt, steps=dp.steps)
    write_policy(out, policy)
    atomic_write_text(_sibling(out, "cost"), field_to_text(res.cost_to_go.shape,
                                                           res.cost_to_go, "J"))
    atomic_write_text(_sibling(out, "residuals"), residuals_to_text(res.residual_history))
    c_star = ", ".join(f"{n}*={v:.6g}" for n, v in zip(policy.meta["c_star_names"],
                                                       policy.meta["c_star"]))
    used = len(res.residual_history)
    print(f"wrote {out} ({c_star}; {used}/{dp.steps} backups in {res.elapsed:.1f}s)")
    return EXIT_OK


def cmd_transfer(args) -> int:
    src = read_policy(args.source)
    if src.dimensionless:
        raise UsageError("transfer expects a dimensional source table")
    cfg = _load_run_config(args)
    system = src.meta.get("system")
    if system != cfg.system:
        raise UsageError(f"source is a {system} policy but the target context is {cfg.system}")
    sig = SIGNATURES[system]()
    st_a = transforms_for(sig, src.meta["context"])
    try:
        st_b = cfg.model().transforms
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    try:
        f_b = transfer(src, st_a, st_b)
    except NotSimilar as exc:
        names = src.meta.get("c_star_names", ())
        _err(f"contexts are not similar:\n  source c* = {_fmt_c_star(names, exc.c_star_a)}"
             f"\n  target c* = {_fmt_c_star(names, exc.c_star_b)}")
        return EXIT_NOT_SIMILAR
    out = Path(args.out or cfg.out or "transferred_policy.csv")
    write_policy(out, f_b)
    print(f"wrote {out}")
    return EXIT_OK


def _fmt_c_star(names, values) -> str:
    if values is None:
        return "?"
    if len(names) != len(values):
        return "(" + ", ".join(f"{v:.12g}" for v in values) + ")"
    return ", ".join(f"{n}*={v:.12g}" for n, v in zip(names, values))


def cmd_compare(args) -> int:
    a, b = read_policy(args.file_a), read_policy(args.file_b)
    try:
        rep = compare_policies(a, b, dimensionless=args.dimensionless,
                               margin=args.boundary_margin, steps=args.steps)
    except (SignatureMismatch, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    if args.out:
        atomic_write_text(args.out, rows_to_csv(("metric", "value"), rep.rows()))
    print(rep.summary())
    if args.assert_ and not rep.passes():
        return EXIT_ASSERT
    return EXIT_OK


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def cmd_sweep(args) -> int:
    pairs = sweep_contexts(q_stars=args.q_stars, tau_max_stars=args.tau_max_stars,
                           q_fixed=args.q_fixed, tau_fixed=args.tau_fixed)
    grid = args.grid if args.grid is not None else 251
    controls = args.controls if args.controls is not None else 51
    if grid < 2 or controls < 2:
        raise ConfigError("grid count must be ≥ 2")
    header = ("q_star", "tau_max_star", "r_star", "saturation_fraction",
              "classification", "observed")

    def show(rep):
        print(",".join(str(v) if isinstance(v, str) else f"{v:.6g}"
                       for v in (rep.q_star, rep.tau_max_star, rep.r_star,
                                 rep.saturation_fraction, rep.classification, rep.observed)))

    print(",".join(header))
    try:
        reports = run_sweep(pairs, grid=grid, controls=controls, progress=show)
    except DimpolError as exc:
        _err(f"solver failed: {exc}")
        return EXIT_SOLVER
    rows = [(r.q_star, r.tau_max_star, r.r_star, r.saturation_fraction, r.classification,
             r.observed) for r in reports]
    if args.out:
        atomic_write_text(args.out, rows_to_csv(header, rows))
    return EXIT_OK


def cmd_analytic_check(args) -> int:
    checks = check_suite(per_axis=args.per_axis, count=args.probe)
    for c in checks:
        print(c.line())
    if args.out:
        atomic_write_text(args.out, rows_to_csv(("check", "value", "threshold"),
                                                [(c.label, c.value, c.threshold)
                                                 for c in checks]))
    return EXIT_ASSERT if any(c.value > 1e-9 for c in checks) else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dimpol", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"dimpol {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def context_args(sp):
        sp.add_argument("--config", metavar="PATH", help="run configuration (key = value)")
        sp.add_argument("--context", metavar="SYSTEM:KEY",
                        help="built-in table context, e.g. pendulum:b")

    sp = sub.add_parser("solve", help="solve a benchmark by value iteration")
    context_args(sp)
    sp.add_argument("--out", metavar="PATH")
    sp.add_argument("--grid", type=int, metavar="N", help="nodes per state axis")
    sp.add_argument("--controls", type=int, metavar="N", help="number of discrete controls")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("transfer", help="scale a policy file to a similar context")
    sp.add_argument("source", metavar="POLICY")
    context_args(sp)
    sp.add_argument("--out", metavar="PATH")
    sp.set_defaults(func=cmd_transfer)

    sp = sub.add_parser("compare", help="compare two policy files node by node")
    sp.add_argument("file_a", metavar="A")
    sp.add_argument("file_b", metavar="B")
    sp.add_argument("--dimensionless", action="store_true",
                    help="compare in Pi-group coordinates")
    sp.add_argument("--boundary-margin", type=float, default=DEFAULT_MARGIN, metavar="F",
                    help="excluded fraction of each axis span at both ends")
    sp.add_argument("--steps", type=float, default=DEFAULT_STEPS, metavar="K",
                    help="agreement tolerance in control-resolution steps")
    sp.add_argument("--assert", dest="assert_", action="store_true",
                    help="exit 5 unless the agreement thresholds hold")
    sp.add_argument("--out", metavar="PATH", help="report CSV")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("sweep", help="pendulum regime sweep over (q*, tau_max*)")
    sp.add_argument("--tau-max-stars", type=_floats, default=DEFAULT_TAU_MAX_STARS)
    sp.add_argument("--q-stars", type=_floats, default=DEFAULT_Q_STARS)
    sp.add_argument("--q-fixed", type=float, default=0.5)
    sp.add_argument("--tau-fixed", type=float, default=0.5)
    sp.add_argument("--grid", type=int, metavar="N")
    sp.add_argument("--controls", type=int, metavar="N")
    sp.add_argument("--out", metavar="PATH")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("analytic-check", help="closed-form transfer and Riccati checks")
    sp.add_argument("--per-axis", type=int, default=10,
                    help="Riccati samples per (G, H, q) axis")
    sp.add_argument("--probe", type=int, default=50, help="probe grid points per axis")
    sp.add_argument("--out", metavar="PATH")
    sp.set_defaults(func=cmd_analytic_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, PolicyFileError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except OSError as exc:
        _err(str(exc))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
