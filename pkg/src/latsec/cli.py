"""latsec command line: figure data as CSV and single queries over lattice JSON."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import catalog, experiments
from .bounds import (
    AWGN,
    PSI_POLICY,
    CosetCode,
    RayleighBlock,
    RayleighFast,
    avg_flatness_mc,
    ecdp_fading,
    info_bound_gaussian_coset,
    info_bound_h,
    info_bound_mod_lambda,
)
from .errors import BudgetExceededError, DomainError, LatsecError, MalformedInputError
from .experiments import Table, sigma_from_snr
from .lattice import lattice_to_json, load_lattice
from .theta import DEFAULT_POLICY, TruncationPolicy, flatness, flatness_dual, flatness_primal, theta_profile

EXIT_DOMAIN = 2
EXIT_BUDGET = 3
EXIT_MALFORMED = 4


def parse_grid(text: str) -> np.ndarray:
    """'a:b:n' -> n evenly spaced points; 'x,y,z' -> explicit list."""
    try:
        if ":" in text:
            a, b, n = text.split(":")
            grid = np.linspace(float(a), float(b), int(n))
        else:
            grid = np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise DomainError(f"cannot parse grid {text!r}; expected a:b:n or a comma list") from None
    if grid.size == 0 or not np.all(np.isfinite(grid)):
        raise DomainError(f"grid {text!r} is empty or not finite")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise DomainError(f"grid {text!r} must be strictly increasing")
    return grid


def _policy(args, default: TruncationPolicy) -> TruncationPolicy:
    if args.radius is not None:
        return TruncationPolicy.fixed(args.radius)
    if args.rel_tol is not None:
        return TruncationPolicy.adaptive(args.rel_tol)
    return default


def _lattice(args):
    if args.lattice:
        return load_lattice(args.lattice)
    if args.name:
        return catalog.make(args.name, unit=args.unit)
    raise DomainError("give --lattice FILE or --name CATALOG")


def _model(args):
    if args.model == "awgn":
        return AWGN()
    if args.model == "ff":
        return RayleighFast(args.sigma_h)
    return RayleighBlock(args.sigma_h, args.block)


def _sigmas(args):
    """(label column, values, sigmas) from --sigma or --snr-grid."""
    if args.sigma is not None:
        return "sigma", [args.sigma], [args.sigma]
    grid = parse_grid(args.snr_grid)
    return "snr_db", list(grid), [sigma_from_snr(s) for s in grid]


def _emit(args, text: str):
    if args.out:
        try:
            Path(args.out).write_bytes(text.encode("utf-8"))
        except OSError as exc:
            raise DomainError(f"cannot write {args.out}: {exc}") from None
    else:
        sys.stdout.write(text)


def _single(x: float) -> str:
    if not math.isfinite(x):
        raise LatsecError(f"refusing to print non-finite value {x}")
    return repr(float(x)) + "\n"


# ---------------------------------------------------------------- figure commands


def cmd_fig1(args):
    grid = parse_grid(args.snr_grid) if args.snr_grid else None
    return experiments.fig1(grid, _policy(args, DEFAULT_POLICY), args.workers).to_csv()


def cmd_fig2(args):
    grid = parse_grid(args.snr_grid) if args.snr_grid else None
    return experiments.fig2(grid, _policy(args, DEFAULT_POLICY), args.workers).to_csv()


def cmd_disc_scatter(args):
    g = tuple(parse_grid(args.gamma_sq)) if args.gamma_sq else (1.0, 2.0)
    return experiments.disc_scatter(args.count, args.seed, g, _policy(args, PSI_POLICY), args.workers).to_csv()


def cmd_ins_scatter(args):
    g = float(args.gamma_sq) if args.gamma_sq else 3.5
    return experiments.ins_scatter(args.count, args.seed, g, _policy(args, PSI_POLICY), args.workers).to_csv()


def cmd_diversity_z4(args):
    grid = parse_grid(args.gamma_sq) if args.gamma_sq else None
    return experiments.diversity_z4(grid, args.count, args.seed, _policy(args, PSI_POLICY), args.workers).to_csv()


# ---------------------------------------------------------------- single queries


def cmd_flatness(args):
    L = _lattice(args)
    fn = {"auto": flatness, "primal": flatness_primal, "dual": flatness_dual}[args.path]
    policy = _policy(args, DEFAULT_POLICY)
    col, labels, sigmas = _sigmas(args)
    res = [fn(L, s, policy) for s in sigmas]
    if args.sigma is not None:
        return _single(res[0].value)
    rows = [[x, r.value, r.tail_estimate, r.path] for x, r in zip(labels, res)]
    return Table([col, "flatness", "tail_estimate", "path"], rows).to_csv()


def _code(args):
    L = _lattice(args)
    if args.bob:
        return CosetCode.from_pair(load_lattice(args.bob), L)
    return CosetCode.from_eve(L, args.factor)


def cmd_ecdp(args):
    code = _code(args)
    model = _model(args)
    policy = _policy(args, DEFAULT_POLICY if args.model == "awgn" else PSI_POLICY)
    col, labels, sigmas = _sigmas(args)
    res = [ecdp_fading(code, model, s, policy) for s in sigmas]
    if args.sigma is not None:
        return _single(res[0].value)
    return Table([col, "ecdp", "tail_estimate"], [[x, r.value, r.tail_estimate] for x, r in zip(labels, res)]).to_csv()


def cmd_mc(args):
    if args.sigma is None:
        raise DomainError("mc needs --sigma")
    if args.model == "awgn":
        raise DomainError("mc needs a fading model (--model ff or bf)")
    eve = _lattice(args)
    est = avg_flatness_mc(eve, _model(args), args.sigma, args.samples, args.seed, _policy(args, DEFAULT_POLICY), args.workers)
    return Table(["mean", "std_error", "samples", "seed"], [[est.mean, est.std_error, est.samples, est.seed]]).to_csv()


def cmd_info(args):
    fn = {"h": info_bound_h, "mod": info_bound_mod_lambda, "gaussian": info_bound_gaussian_coset}[args.bound]
    return _single(fn(args.E, args.M, args.log_base))


def cmd_theta(args):
    L = _lattice(args)
    return theta_profile(L, args.radius_sq).to_csv()


def cmd_export(args):
    L = catalog.make(args.name, unit=args.unit)
    return json.dumps(lattice_to_json(L), indent=2) + "\n"


# ---------------------------------------------------------------- parser


def _add_policy(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--radius", type=float, help="fixed truncation radius")
    g.add_argument("--rel-tol", type=float, help="adaptive truncation with this relative tolerance")


def _add_lattice(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--lattice", help="lattice JSON file")
    g.add_argument("--name", help="catalog name, e.g. E8, Z4, A8*, Leech")
    p.add_argument("--unit", action="store_true", help="rescale a catalog lattice to volume 1")


def _add_model(p, default="awgn"):
    p.add_argument("--model", choices=("awgn", "ff", "bf"), default=default)
    p.add_argument("--sigma-h", type=float, default=1.0)
    p.add_argument("--block", type=int, default=2, help="coherence time T for --model bf")


def _add_sigma(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--sigma", type=float)
    g.add_argument("--snr-grid", help="a:b:n in dB")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="latsec", description="Secrecy figures of merit for lattice coset codes.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--workers", type=int, default=1)

    for name, fn, help_ in (
        ("fig1", cmd_fig1, "8-dim AWGN ECDP curves"),
        ("fig2", cmd_fig2, "24-dim AWGN ECDP curves"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--snr-grid", help="a:b:n in dB (default -20:20:41)")
        _add_policy(p)
        common(p)
        p.set_defaults(func=fn)

    for name, fn, help_, gdefault in (
        ("disc-scatter", cmd_disc_scatter, "ECDP vs discriminant over random quartic fields", "1,2"),
        ("ins-scatter", cmd_ins_scatter, "inverse norm sum vs ECDP over random quartic fields", "3.5"),
        ("diversity-z4", cmd_diversity_z4, "Z^4 vs full-diversity lattices over sigma_h^2/sigma^2", "0.25:4:16"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--count", type=int, default=50)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--gamma-sq", help=f"sigma_h^2/sigma^2 values (default {gdefault})")
        _add_policy(p)
        common(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("flatness", help="flatness factor of a lattice")
    _add_lattice(p)
    _add_sigma(p)
    p.add_argument("--path", choices=("auto", "primal", "dual"), default="auto")
    _add_policy(p)
    common(p)
    p.set_defaults(func=cmd_flatness)

    p = sub.add_parser("ecdp", help="eavesdropper correct-decoding bound; the lattice is eve")
    _add_lattice(p)
    _add_sigma(p)
    p.add_argument("--bob", help="bob lattice JSON (default: eve / factor)")
    p.add_argument("--factor", type=float, default=2.0)
    _add_model(p)
    _add_policy(p)
    common(p)
    p.set_defaults(func=cmd_ecdp)

    p = sub.add_parser("mc", help="Monte Carlo average flatness of the faded lattice")
    _add_lattice(p)
    p.add_argument("--sigma", type=float)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    _add_model(p, default="ff")
    _add_policy(p)
    common(p)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("info", help="information leakage bound")
    p.add_argument("--bound", choices=("h", "mod", "gaussian"), default="mod")
    p.add_argument("--E", type=float, required=True, help="flatness-type quantity (epsilon for --bound h)")
    p.add_argument("--M", type=int, required=True, help="message set size")
    p.add_argument("--log-base", type=float, default=2.0)
    common(p)
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("theta", help="theta shell counts up to a squared radius")
    _add_lattice(p)
    p.add_argument("--radius-sq", type=float, required=True)
    common(p)
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("export", help="write a catalog lattice as JSON")
    p.add_argument("--name", required=True)
    p.add_argument("--unit", action="store_true")
    common(p)
    p.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        print("latsec: --workers must be at least 1", file=sys.stderr)
        return EXIT_DOMAIN
    try:
        _emit(args, args.func(args))
    except MalformedInputError as exc:
        print(f"latsec: malformed input: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except BudgetExceededError as exc:
        print(f"latsec: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (LatsecError, ValueError) as exc:
        print(f"latsec: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return 0


if __name__ == "__main__":
    sys.exit(main())
