"""Command line interface.

``dynbc run`` executes a convergence study and writes CSV tables plus a
gnuplot script; ``dynbc snapshot`` dumps nodal values of the reference
solution at a chosen time.  Options can come from a flat key=value config
file, with command line flags taking precedence.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .assembly import ACOUSTIC, KINETIC
from .harness import (
    ACOUSTIC_SCHEMES,
    KINETIC_SCHEMES,
    StudyConfig,
    run_study,
    snapshot,
    write_snapshot,
)

# Paper-scale preset: fine mesh and reference step of the published
# experiments.  The tau list stops at 2^-10, the smallest step compatible
# with the tau_ref <= min(tau)/4 configuration rule.
PAPER_SCALE = {
    "h": "0.02",
    "tau-ref": "2^-12",
    "tau-list": "2^-4..2^-10",
}


def parse_step(token: str) -> float:
    """Parse a step size given as a float or as '2^-k'."""
    token = token.strip()
    if "^" in token:
        base, exp = token.split("^", 1)
        return float(base) ** float(exp)
    return float(token)


def parse_tau_list(text: str) -> tuple[float, ...]:
    """Parse a comma list of step sizes or a dyadic range '2^-a..2^-b'."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        a, b = _dyadic_exp(lo), _dyadic_exp(hi)
        if a > b:
            a, b = b, a
        return tuple(2.0**-k for k in range(a, b + 1))
    return tuple(parse_step(tok) for tok in text.split(",") if tok.strip())


def _dyadic_exp(token: str) -> int:
    val = parse_step(token)
    exp = round(-math.log2(val))
    if abs(2.0**-exp - val) > 1e-12:
        raise ValueError(f"range endpoints must be powers of two, got {token}")
    return exp


def read_config_file(path: str) -> dict[str, str]:
    """Read a flat key=value config file; '#' starts a comment."""
    values: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"malformed config line: {raw!r}")
        key, val = line.split("=", 1)
        values[key.strip()] = val.strip()
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynbc",
        description="Bulk-surface splitting studies for wave equations "
        "with dynamic boundary conditions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--problem", choices=[KINETIC, ACOUSTIC])
        p.add_argument(
            "--scheme",
            help="comma list of schemes (lie-euler, lie-cn, strang-euler, "
            "strang-cn, reference-cn)",
        )
        p.add_argument("--h", help="target mesh width in (0, 1)")
        p.add_argument("--tau-list", help="comma list or dyadic range 2^-a..2^-b")
        p.add_argument("--tau-ref", help="reference step size (float or 2^-k)")
        p.add_argument("--T", help="final time")
        p.add_argument("--beta", help="surface diffusion coefficient")
        p.add_argument("--kappa", help="surface reaction coefficient")
        p.add_argument(
            "--nonlinearity",
            choices=["none", "allen-cahn-bulk", "allen-cahn-surface"],
        )
        p.add_argument("--out", help="output directory")
        p.add_argument(
            "--paper-scale",
            action="store_true",
            help="fine mesh h=0.02, tau 2^-4..2^-10, tau_ref 2^-12",
        )

    run_p = sub.add_parser("run", help="run a convergence study")
    add_common(run_p)

    snap_p = sub.add_parser("snapshot", help="dump reference solution values")
    add_common(snap_p)
    snap_p.add_argument("--t", required=True, help="snapshot time")
    return parser


def build_config(args: argparse.Namespace) -> StudyConfig:
    """Merge config file, paper-scale preset, and CLI flags."""
    values: dict[str, str] = {}
    if args.config:
        values.update(read_config_file(args.config))
    # paper-scale requested in the file: preset fills gaps, file keys win
    if values.pop("paper-scale", "").lower() in ("1", "true", "yes"):
        for key, val in PAPER_SCALE.items():
            values.setdefault(key, val)
    # paper-scale flag: preset beats the file; explicit flags still win below
    if args.paper_scale:
        values.update(PAPER_SCALE)
    overrides = {
        "problem": args.problem,
        "scheme": args.scheme,
        "h": args.h,
        "tau-list": args.tau_list,
        "tau-ref": args.tau_ref,
        "T": args.T,
        "beta": args.beta,
        "kappa": args.kappa,
        "nonlinearity": args.nonlinearity,
        "out": args.out,
    }
    for key, val in overrides.items():
        if val is not None:
            values[key] = val

    problem = values.get("problem", KINETIC)
    default_schemes = (
        KINETIC_SCHEMES if problem == KINETIC else ACOUSTIC_SCHEMES
    )
    schemes = (
        tuple(tok.strip() for tok in values["scheme"].split(",") if tok.strip())
        if "scheme" in values
        else default_schemes
    )
    kwargs = dict(
        problem=problem,
        schemes=schemes,
        h_target=float(values.get("h", 0.09)),
        tau_ref=parse_step(values.get("tau-ref", "2^-11")),
        T=float(values.get("T", 1.0)),
        beta=float(values.get("beta", 1.0)),
        kappa=float(values.get("kappa", 1.0)),
        nonlinearity=values.get("nonlinearity", "none"),
        output_dir=values.get("out"),
    )
    if "tau-list" in values:
        kwargs["tau_list"] = parse_tau_list(values["tau-list"])
    return StudyConfig(**kwargs)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    cfg = build_config(args)

    if args.command == "run":
        result = run_study(cfg)
        for (scheme, var, norm), (avg, slope) in sorted(result.orders.items()):
            print(f"{scheme:14s} {var:5s} {norm:6s} avg={avg:6.3f} lsq={slope:6.3f}")
        for (scheme, tau), msg in sorted(result.failures.items()):
            print(f"FAILED {scheme} tau={tau:g}: {msg}", file=sys.stderr)
        if cfg.output_dir:
            print(f"results written to {cfg.output_dir}")
        return 1 if result.failures else 0

    if args.command == "snapshot":
        t_snap = float(args.t)
        mesh, values_u, t_used = snapshot(cfg, t_snap)
        outdir = Path(cfg.output_dir or ".")
        outdir.mkdir(parents=True, exist_ok=True)
        path = outdir / f"snapshot_t{t_used:g}.txt"
        write_snapshot(path, mesh, values_u)
        print(f"snapshot at t={t_used:g} written to {path}")
        return 0

    return 2


if __name__ == "__main__":
    raise SystemExit(main())
