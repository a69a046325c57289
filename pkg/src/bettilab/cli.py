"""Command-line front end.

Subcommands: constants-report, verify-pair, count-components, kostlan-roots,
kostlan-curves, sup-norm, local-presence, betti-bound.

Exit codes: 0 success, 2 a bound comparison failed (or verification failed),
3 too many ambiguous samples were excluded.  Experiment subcommands print a
compact report (per-sample rows elided past 20) to stdout; --out writes the
full JSON, --csv the per-sample table, and figures are rendered next to
whichever of those is given (or into an explicit --figures directory).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import figures, lab
from .domains import Ball, Box
from .pairs import product_pair, sphere_pair, verify_transversality
from .polycore import MultiPoly
from .constants import c_sigma_lower, m_tau, rho_R, tau_pair
from .zeroset import grid_components, sphere_components

_LOG_TAU_SLOPE = {"sphere": 43.0, "product": 70.0}


def _make_pair(name: str, n: int, i: int):
    if name == "sphere":
        return sphere_pair(n)
    return product_pair(n, i)


def _figure_dir(args) -> str:
    if getattr(args, "figures", None):
        return args.figures
    for attr in ("out", "csv"):
        path = getattr(args, attr, None)
        if path:
            return os.path.dirname(os.path.abspath(path))
    return ""


def _emit(report, args) -> int:
    d = report.to_json_dict()
    if args.out:
        report.write_json(args.out)
    if args.csv:
        report.write_csv(args.csv)
    figdir = _figure_dir(args)
    if figdir:
        figures.render_report(d, figdir)
    compact = dict(d)
    if len(report.per_sample) > 20:
        compact.pop("per_sample")
        compact["per_sample_rows"] = len(report.per_sample)
    print(json.dumps(compact, indent=2))
    if report.excessive_exclusions():
        return 3
    if not report.all_bounds_satisfied():
        return 2
    return 0


# ---------------------------------------------------------------------------
# handlers
# ---------------------------------------------------------------------------
def _cmd_constants(args) -> int:
    pair = _make_pair(args.pair, args.n, args.i)
    tau = tau_pair(pair)
    log_tau = tau.ln()
    rho = rho_R(pair.R, args.n)
    c = c_sigma_lower(pair)
    m = m_tau(tau.to_float())
    out = {"pair": args.pair, "n": args.n}
    if args.pair == "product":
        out["i"] = args.i
    out.update(
        {
            "R": pair.R,
            "log_rho": rho.value.ln(),
            "log_tau": log_tau,
            "m_tau_arg": m.argument,
            "log_m_tau": m.value.ln(),
            "loglog_neg_c": c.loglog_neg(),
            "paper_bound_ok": log_tau <= _LOG_TAU_SLOPE[args.pair] * args.n,
        }
    )
    print(json.dumps(out, indent=2))
    return 0 if out["paper_bound_ok"] else 2


def _cmd_verify(args) -> int:
    pair = _make_pair(args.pair, args.n, args.i)
    witness = verify_transversality(pair, args.delta, args.epsilon, args.resolution)
    print(json.dumps(witness.to_json_dict(), indent=2))
    return 0 if witness.verified else 2


def _cmd_count(args) -> int:
    with open(args.poly) as fh:
        p = MultiPoly.from_json_dict(json.load(fh))
    if args.sphere:
        rep = sphere_components(
            p,
            args.resolution or 64,
            identify_antipodal=args.antipodal,
            max_depth=args.max_depth,
        )
        domain = None
    else:
        if args.ball:
            cx, cy, r = args.ball
            domain = Ball((cx, cy), r)
        else:
            x0, x1, y0, y1 = args.box
            domain = Box((x0, y0), (x1, y1))
        rep = grid_components(
            p, domain, args.resolution or 256, max_depth=args.max_depth
        )
    print(json.dumps(rep.to_json_dict(), indent=2))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(rep.to_json_dict(), fh, indent=2)
            fh.write("\n")
    figdir = _figure_dir(args)
    if figdir and domain is not None:
        xs, ys = domain.bounding_box().axes(args.resolution or 256)
        figures.sign_grid_figure(
            p.on_grid(xs, ys),
            xs,
            ys,
            os.path.join(figdir, "components_signs.png"),
            title="%d component(s)" % rep.count,
        )
    return 0 if rep.confident else 3


def _cmd_roots(args) -> int:
    report = lab.run_kostlan_roots(
        args.d,
        samples=args.samples or 10_000,
        seed=args.seed,
        threads=args.threads,
    )
    return _emit(report, args)


def _cmd_curves(args) -> int:
    report = lab.run_kostlan_curves(
        args.d_list,
        samples=args.samples or 500,
        seed=args.seed,
        threads=args.threads,
        resolution=args.resolution or 0,
    )
    return _emit(report, args)


def _cmd_sup(args) -> int:
    report = lab.run_sup_norm(
        R=args.R,
        n=args.n,
        truncation=args.truncation,
        samples=args.samples or 1000,
        seed=args.seed,
        threads=args.threads,
        resolution=args.resolution or 512,
    )
    return _emit(report, args)


def _cmd_presence(args) -> int:
    report = lab.run_local_presence(
        radius=args.radius,
        truncation=args.truncation,
        samples=args.samples or 10_000,
        seed=args.seed,
        threads=args.threads,
        resolution=args.resolution or 128,
        max_depth=args.max_depth,
    )
    return _emit(report, args)


def _cmd_betti(args) -> int:
    report = lab.betti_lower_bound_report(args.n, args.i)
    return _emit(report, args)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------
def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=0, help="0 = experiment default")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", help="write the full report JSON here")
    common.add_argument("--csv", help="write the per-sample table here")
    common.add_argument("--figures", help="directory for rendered figures")
    common.add_argument("--resolution", type=int, default=0, help="0 = default")

    top = argparse.ArgumentParser(
        prog="bettilab",
        description="lower-bound constants and zero-set experiments for random fields",
    )
    sub = top.add_subparsers(dest="command")

    p = sub.add_parser("constants-report", help="assembled constants for one pair")
    p.add_argument("--pair", choices=("sphere", "product"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--i", type=int, default=0)
    p.set_defaults(handler=_cmd_constants)

    p = sub.add_parser("verify-pair", help="grid transversality check for one pair")
    p.add_argument("--pair", choices=("sphere", "product"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--i", type=int, default=0)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--resolution", type=int, default=256)
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser("count-components", help="count zero-set components", parents=[common])
    p.add_argument("--poly", required=True, help="polynomial JSON file")
    where = p.add_mutually_exclusive_group(required=True)
    where.add_argument("--box", nargs=4, type=float, metavar=("X0", "X1", "Y0", "Y1"))
    where.add_argument("--ball", nargs=3, type=float, metavar=("CX", "CY", "R"))
    where.add_argument("--sphere", action="store_true")
    p.add_argument("--antipodal", action="store_true")
    p.add_argument("--max-depth", type=int, default=4)
    p.set_defaults(handler=_cmd_count)

    p = sub.add_parser("kostlan-roots", help="real roots of random binary forms", parents=[common])
    p.add_argument("--d", type=int, required=True)
    p.set_defaults(handler=_cmd_roots)

    p = sub.add_parser("kostlan-curves", help="components of random plane curves", parents=[common])
    p.add_argument("--d-list", nargs="+", type=int, default=[8, 12, 16])
    p.set_defaults(handler=_cmd_curves)

    p = sub.add_parser("sup-norm", help="sup norms of the analytic field", parents=[common])
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--truncation", type=int, default=0, help="0 = tail rule")
    p.set_defaults(handler=_cmd_sup)

    p = sub.add_parser("local-presence", help="compact loop probability in a ball", parents=[common])
    p.add_argument("--radius", type=float, default=0.0, help="0 = pair default")
    p.add_argument("--truncation", type=int, default=0, help="0 = tail rule")
    p.add_argument("--max-depth", type=int, default=4)
    p.set_defaults(handler=_cmd_presence)

    p = sub.add_parser("betti-bound", help="aggregate lower-bound constant", parents=[common])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--i", type=int, required=True)
    p.set_defaults(handler=_cmd_betti)

    return top


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "handler"):
        parser.print_help()
        return 0
    try:
        return args.handler(args)
    except OverflowError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
