"""Command line interface.

Subcommands: ``sweep`` (one figure's data), ``figure`` (presets 1-4),
``verify`` (inequality/asymptotics report), and the one-shot estimators
``price``, ``volswap``, ``zviv``. Numeric flags mirror the SweepConfig
field names; a flat ``key = value`` config file can supply any of them,
with explicit flags taking precedence. ``VOLBOUND_THREADS`` caps worker
threads.

Exit codes: 0 success / all-PASS, 1 verification or solver failure,
2 configuration error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields
from pathlib import Path

from .errors import InvalidConfigError, VolboundError
from .estimators import mixing_call_price, volswap_strike
from .experiments import (
    ALL_SECTIONS,
    FIGURE_YLIM,
    SweepConfig,
    figure_config,
    run_sweep,
    verify_report,
    write_tsv,
)
from .sabr import SabrParams, simulate_paths
from .smile import zero_vanna

_CONFIG_TYPES = {f.name: f.type for f in fields(SweepConfig)}


def _parse_config_file(path: str) -> dict:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_TYPES:
            raise InvalidConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key == "out":
            values[key] = value
        elif key in ("paths", "steps", "seed"):
            values[key] = int(value)
        else:
            values[key] = float(value)
    return values


def _add_sweep_flags(p: argparse.ArgumentParser, rho_grid: bool) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--sigma0", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--T", type=float, dest="T")
    p.add_argument("--x0", type=float)
    p.add_argument("--paths", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--seed", type=int)
    if rho_grid:
        p.add_argument("--rho-start", type=float, dest="rho_start")
        p.add_argument("--rho-end", type=float, dest="rho_end")
        p.add_argument("--rho-step", type=float, dest="rho_step")


def _merge_config(args: argparse.Namespace, defaults: SweepConfig) -> SweepConfig:
    """File values override dataclass defaults; explicit flags override both."""
    values = {f.name: getattr(defaults, f.name) for f in fields(SweepConfig)}
    if getattr(args, "config", None):
        values.update(_parse_config_file(args.config))
    for name in values:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    cfg = SweepConfig(**values)
    cfg.validate()
    return cfg


def _print_estimate(label: str, value: float, std_error: float) -> None:
    print(f"{label}\t{value:.10g}\t{std_error:.10g}")


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _merge_config(args, SweepConfig(sigma0=0.3, alpha=0.5, T=0.5, out=args.out))
    if args.out:
        cfg.out = args.out
    if not cfg.out:
        raise InvalidConfigError("sweep needs --out (or out= in the config file)")
    rows = run_sweep(cfg)
    path = write_tsv(rows, cfg.out)
    print(f"wrote {path} and {path.with_suffix('.se.txt')}")
    if not args.no_plot:
        from .plotting import render_sweep_figure

        png = render_sweep_figure(
            rows,
            path.with_suffix(".png"),
            title=f"sigma0={cfg.sigma0:g}, alpha={cfg.alpha:g}, T={cfg.T:g}",
        )
        print(f"wrote {png}")
    return 0


def _cmd_figure(args: argparse.Namespace) -> int:
    preset = figure_config(args.id)
    cfg = _merge_config(args, preset)
    if args.out:
        cfg.out = args.out
    rows = run_sweep(cfg)
    path = write_tsv(rows, cfg.out)
    print(f"wrote {path} and {path.with_suffix('.se.txt')}")
    if not args.no_plot:
        from .plotting import render_sweep_figure

        png = render_sweep_figure(
            rows,
            path.with_suffix(".png"),
            title=f"sigma0={cfg.sigma0:g}, alpha={cfg.alpha:g}, T={cfg.T:g}",
            ylim=FIGURE_YLIM[args.id],
        )
        print(f"wrote {png}")
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    sections = tuple(args.sections.split(",")) if args.sections else ALL_SECTIONS
    report = verify_report(
        sections=sections,
        sweep_paths=args.paths,
        slope_paths=args.slope_paths,
        malliavin_paths=args.malliavin_paths,
        eq9_paths=args.eq9_paths,
        steps=args.steps,
        seed=args.seed,
    )
    for line in report.lines():
        print(line)
    if args.json:
        Path(args.json).write_text(report.to_json(), encoding="utf-8")
        print(f"wrote {args.json}")
    n_fail = sum(1 for c in report.checks if not c.passed)
    print(f"{len(report.checks) - n_fail}/{len(report.checks)} checks passed")
    return 0 if report.passed else 1


def _one_shot_batch(args: argparse.Namespace, rho: float = 0.0):
    cfg = _merge_config(args, SweepConfig(sigma0=0.3, alpha=0.5, T=0.5))
    p = SabrParams(sigma0=cfg.sigma0, alpha=cfg.alpha, rho=rho, x0=cfg.x0)
    return cfg, simulate_paths(p, cfg.T, cfg.steps, cfg.paths, cfg.seed)


def _cmd_price(args: argparse.Namespace) -> int:
    cfg, batch = _one_shot_batch(args, rho=args.rho)
    k = cfg.x0 if args.k is None else args.k
    est = mixing_call_price(batch, args.rho, k)
    _print_estimate("price", est.value, est.std_error)
    return 0


def _cmd_volswap(args: argparse.Namespace) -> int:
    _, batch = _one_shot_batch(args)
    est = volswap_strike(batch)
    _print_estimate("volswap", est.value, est.std_error)
    return 0


def _cmd_zviv(args: argparse.Namespace) -> int:
    _, batch = _one_shot_batch(args, rho=args.rho)
    sol = zero_vanna(batch, args.rho)
    print(f"k_hat\t{sol.k_hat:.10g}")
    _print_estimate("zviv", sol.zviv.value, sol.zviv.std_error)
    _print_estimate("atmi", sol.atmi.value, sol.atmi.std_error)
    print(f"residual\t{sol.residual:.3g}\titerations\t{sol.iterations}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="volbound",
        description="SABR volatility-swap bounds: sweeps, figures and verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run one correlation sweep and write TSV data")
    _add_sweep_flags(p, rho_grid=True)
    p.add_argument("--out", help="output TSV path")
    p.add_argument("--no-plot", action="store_true", help="skip the PNG rendering")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("figure", help="run one of the preset figure sweeps (1-4)")
    p.add_argument("--id", type=int, required=True, choices=sorted(FIGURE_YLIM))
    _add_sweep_flags(p, rho_grid=True)
    p.add_argument("--out", help="output TSV path (default fig<id>.txt)")
    p.add_argument("--no-plot", action="store_true", help="skip the PNG rendering")
    p.set_defaults(fn=_cmd_figure)

    p = sub.add_parser("verify", help="run the inequality/asymptotics report")
    p.add_argument("--paths", type=int, default=1_000_000, help="paths per figure sweep")
    p.add_argument("--slope-paths", type=int, default=10_000_000, dest="slope_paths")
    p.add_argument("--malliavin-paths", type=int, default=100_000, dest="malliavin_paths")
    p.add_argument("--eq9-paths", type=int, default=10_000, dest="eq9_paths")
    p.add_argument("--steps", type=int, default=512)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--sections", help=f"comma list from {','.join(ALL_SECTIONS)}")
    p.add_argument("--json", help="also write the report as JSON")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("price", help="one-shot mixing call price")
    _add_sweep_flags(p, rho_grid=False)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--k", type=float, help="log strike (default: ATM)")
    p.set_defaults(fn=_cmd_price)

    p = sub.add_parser("volswap", help="one-shot volatility swap strike")
    _add_sweep_flags(p, rho_grid=False)
    p.set_defaults(fn=_cmd_volswap)

    p = sub.add_parser("zviv", help="one-shot zero-vanna solve")
    _add_sweep_flags(p, rho_grid=False)
    p.add_argument("--rho", type=float, default=0.0)
    p.set_defaults(fn=_cmd_zviv)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except InvalidConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    except VolboundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
