"""Batch command-line front end.

Every computation is a subcommand emitting CSV or JSON.  Exit codes: 0 on
success, 2 for usage errors, 1 for computation errors (single-line
diagnostic on stderr, no partial output files).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from . import competition as comp
from . import evtfit, guarantees, policy
from .distributions import parse_distribution
from .errors import EvPricingError, SpecStringError

#: Default RNG seed for simulate; fixed so repeat invocations are identical.
DEFAULT_SEED = policy.DEFAULT_SEED


class UsageError(Exception):
    """Raised by handlers for argument problems argparse cannot see."""


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _json_dumps(payload: dict) -> str:
    clean = {k: (float(_fmt(v)) if isinstance(v, float) else v)
             for k, v in payload.items()}
    return json.dumps(clean, indent=2) + "\n"


def _write_output(text: str, path: str | None) -> None:
    """Write to stdout, or atomically to path via a temp-file rename."""
    if path is None:
        sys.stdout.write(text)
        return
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."),
                               prefix=target.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_grid(text: str) -> list[int]:
    try:
        grid = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer grid {text!r}") from None
    if not grid:
        raise argparse.ArgumentTypeError("empty grid")
    return grid


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}") from None


def _cmd_guarantees(args) -> str:
    if args.k_max < 1:
        raise UsageError("--k-max must be >= 1")
    alphas = args.alpha_grid or []
    header = "k,phi_k_alpha2,sqrt_bound"
    header += "".join(f",phi_k_alpha_{_fmt(a)}" for a in alphas)
    lines = [header]
    for k in range(1, args.k_max + 1):
        row = [str(k), _fmt(guarantees.phi_k_alpha2_closed(k)),
               _fmt(guarantees.sqrt_bound(k))]
        row += [_fmt(guarantees.phi_k(a, k).value) for a in alphas]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _cmd_phi1_min(args) -> str:
    alpha, value = guarantees.minimize_phi_1()
    return _json_dumps({"alpha": alpha, "value": value})


def _cmd_adaptivity_gap(args) -> str:
    alpha, gap = guarantees.adaptivity_gap()
    return _json_dumps({"alpha": alpha, "gap": gap})


def _cmd_evaluate(args) -> str:
    d = parse_distribution(args.dist)
    fp = policy.fixed_price_value_exact(d, args.n, args.k, args.t)
    prophet = policy.prophet_value(d, args.n, args.k)
    return _json_dumps({
        "n": args.n, "k": args.k, "threshold": float(args.t),
        "fp_value": fp, "prophet_value": prophet, "ratio": fp / prophet,
    })


def _cmd_converge(args) -> str:
    d = parse_distribution(args.dist)
    rows = policy.convergence_table(d, args.k, args.n_grid,
                                    mode=args.mode, u=args.u)
    return policy.evaluations_to_csv(rows)


def _cmd_competition(args) -> str:
    d = parse_distribution(args.dist)
    rec = comp.empirical_competition_complexity(d, args.n)
    return _json_dumps({
        "n": rec.n, "m_star": rec.m_star,
        "empirical_ratio": rec.empirical_ratio,
        "theoretical": rec.theoretical, "gamma": rec.gamma,
    })


def _cmd_simulate(args) -> str:
    d = parse_distribution(args.dist)
    cfg = policy.SimulationConfig(replications=args.reps, seed=args.seed,
                                  parallel_chunks=args.chunks)
    mean, stderr = policy.monte_carlo_evaluate(d, args.n, args.k, args.t, cfg)
    return _json_dumps({
        "n": args.n, "k": args.k, "threshold": float(args.t),
        "replications": args.reps, "seed": args.seed,
        "mean": mean, "stderr": stderr,
    })


def _cmd_fit(args) -> str:
    records = evtfit.ingest_bids(args.input, id_col=args.id_col,
                                 bid_col=args.bid_col)
    values = evtfit.per_bidder_max(records)
    fit = evtfit.fit_pipeline(values, k_hill=args.k_hill, m_hat=args.m_hat)
    n = args.n if args.n is not None else len(values)
    report = evtfit.guarantee_report(fit, n, realized_max=args.realized_max)
    if args.histogram_output is not None:
        rows = evtfit.histogram_export(values, args.bin_width)
        _write_output(evtfit.histogram_to_csv(rows), args.histogram_output)
    if args.scan_output is not None:
        hi = min(max(args.k_hill or 11, 11) * 3, len(values) - 1)
        scan = evtfit.hill_stability_scan(values, (2, hi))
        lines = ["k,alpha_hat"] + [f"{k},{_fmt(a)}" for k, a in scan]
        _write_output("\n".join(lines) + "\n", args.scan_output)
    return report.to_json() + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evpricing",
        description="Fixed-price guarantees, policy evaluation, competition "
                    "complexity, and Frechet fitting for large markets.")
    parser.add_argument("--output", default=None, help="write the primary "
                        "result here (atomic); default is stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_output_flag(p: argparse.ArgumentParser) -> None:
        # accepted before or after the subcommand
        p.add_argument("--output", default=argparse.SUPPRESS,
                       help="write the primary result here (atomic)")

    p = sub.add_parser("guarantees", help="k-unit guarantee table at alpha=2")
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--alpha-grid", type=_parse_float_list, default=None,
                   help="optional extra shape columns, e.g. 1.5,3")
    add_output_flag(p)
    p.set_defaults(func=_cmd_guarantees)

    p = sub.add_parser("phi1-min", help="worst shape for the single-unit guarantee")
    add_output_flag(p)
    p.set_defaults(func=_cmd_phi1_min)

    p = sub.add_parser("adaptivity-gap",
                       help="max dynamic-over-fixed guarantee ratio")
    add_output_flag(p)
    p.set_defaults(func=_cmd_adaptivity_gap)

    p = sub.add_parser("evaluate", help="exact policy value at one threshold")
    p.add_argument("--dist", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    add_output_flag(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("converge", help="ratio trace over a market-size grid")
    p.add_argument("--dist", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n-grid", type=_parse_grid, required=True)
    p.add_argument("--mode", choices=("best", "theory"), default="best")
    p.add_argument("--u", type=float, default=None,
                   help="limit ratio for --mode theory")
    add_output_flag(p)
    p.set_defaults(func=_cmd_converge)

    p = sub.add_parser("competition", help="empirical competition complexity")
    p.add_argument("--dist", required=True)
    p.add_argument("--n", type=int, required=True)
    add_output_flag(p)
    p.set_defaults(func=_cmd_competition)

    p = sub.add_parser("simulate", help="Monte Carlo policy evaluation")
    p.add_argument("--dist", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--chunks", type=int, default=1)
    add_output_flag(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("fit", help="fit a Frechet model to auction bids")
    p.add_argument("--input", required=True)
    p.add_argument("--id-col", default="bidder_id")
    p.add_argument("--bid-col", default="bid")
    p.add_argument("--k-hill", type=int, default=None,
                   help="top-k for the Hill estimate; default: stability suggestion")
    p.add_argument("--m-hat", type=float, default=None,
                   help="location override; default 0 for nonnegative bids")
    p.add_argument("--n", type=int, default=None,
                   help="market size for the threshold; default: bidder count")
    p.add_argument("--realized-max", type=float, default=None)
    p.add_argument("--bin-width", type=float, default=200.0)
    p.add_argument("--histogram-output", default=None)
    p.add_argument("--scan-output", default=None)
    add_output_flag(p)
    p.set_defaults(func=_cmd_fit)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.func(args)
    except (UsageError, SpecStringError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (EvPricingError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        _write_output(text, args.output)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
