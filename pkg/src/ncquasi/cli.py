"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, io
from .charfunc import estimate_cf, default_grid
from .filters import build_autocorrelation_filter, build_rectangular_filter, verify_filter_axioms
from .quasiprob import NegativeVarianceError, profile
from .spats import SpatsParams, sample_quadratures, wigner_origin

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4


def _nonneg(s):
    v = float(s)
    if not (math.isfinite(v) and v >= 0):
        raise argparse.ArgumentTypeError(f"must be >= 0, got {s}")
    return v


def _positive(s):
    v = float(s)
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be > 0, got {s}")
    return v


def _efficiency(s):
    v = float(s)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1], got {s}")
    return v


def _count(s):
    v = int(float(s))
    if v < 1 or v != float(s):
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {s}")
    return v


def _list(conv):
    def parse(s):
        try:
            return [conv(x) for x in s.split(",") if x.strip()]
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def _alpha_grid(args):
    return np.linspace(0.0, args.alpha_max, args.alpha_steps)


def _width_list(args):
    if args.widths:
        return np.asarray(args.widths)
    n = int(round((args.wmax - args.wmin) / args.step)) + 1
    return np.round(args.wmin + args.step * np.arange(n), 10)


def _manifest(args, argv, params):
    out = Path(args.out)
    m = io.manifest(args.command, argv, params)
    io.write_json(out.with_suffix(".manifest.json"), m)


def _comments(args):
    return {"manifest": Path(args.out).with_suffix(".manifest.json").name}


def _emit_table(args, header, rows, comments=None):
    rows = [list(r) for r in rows]
    if args.format == "json":
        io.write_json(args.out, {"columns": header, "rows": rows, **(comments or {})})
    else:
        io.write_table(args.out, header, rows, comments)


def cmd_simulate(args, argv):
    params = SpatsParams(args.nbar, args.eta)
    data = sample_quadratures(params, args.samples, args.seed, threads=args.threads)
    io.write_dataset(args.out, data, _comments(args))
    _manifest(args, argv, {"nbar": args.nbar, "eta": args.eta, "samples": args.samples, "seed": args.seed,
                           "chunk_seeding": "PCG64(seed + chunk_index)"})
    x = data.samples
    expected = 1 + 2 * args.eta * (2 * args.nbar + 1)
    print(f"wrote {data.count} samples to {args.out}")
    print(f"mean {x.mean():.6f} (expected 0), second moment {np.mean(x * x):.6f} (expected {expected:.6f})")


def cmd_charfunc(args, argv):
    data = io.read_dataset(args.input)
    b_max = args.bmax if args.bmax else build_autocorrelation_filter(args.width).truncation_radius
    est = estimate_cf(data, default_grid(b_max, args.grid_step))
    if args.format == "json":
        io.write_json(args.out, {"N": est.source_count, "b": est.radii, "re": est.values.real,
                                 "im": est.values.imag, "sigma2": est.variances})
    else:
        io.write_cf_estimate(args.out, est, _comments(args))
    _manifest(args, argv, {"input": args.input, "b_max": b_max, "step": args.grid_step})
    print(f"estimated CF on {est.radii.size} radii up to b={est.max_radius:.4g}; "
          f"max |Im|/sigma = {est.imag_diagnostic():.3f}")


def _make_filter(args, parser):
    if args.filter == "autocorr":
        if args.width is None:
            parser.error("--filter autocorr requires --width")
        return build_autocorrelation_filter(args.width)
    if args.cutoff is None:
        parser.error("--filter rect requires --cutoff")
    return build_rectangular_filter(args.cutoff)


def cmd_reconstruct(args, argv, parser):
    filt = _make_filter(args, parser)
    data = io.read_dataset(args.input)
    prof = analysis.reconstruct(data, filt, _alpha_grid(args))
    s_min, where = analysis.significance(prof)
    meta = {"filter": filt.describe(), "N": data.count, "seed": data.seed, "params": data.params,
            "integration": prof.settings, "cf_grid_step": 0.02, "S_min": s_min, "alpha_at_min": where,
            "manifest": Path(args.out).with_suffix(".manifest.json").name}
    if args.format == "json":
        io.write_json(args.out, {**meta, "alpha": prof.alpha_radii, "p": prof.values, "sigma": prof.sigmas,
                                 "significance": prof.significance})
    else:
        io.write_profile(args.out, prof, meta)
    _manifest(args, argv, {"input": args.input, "filter": filt.describe(),
                           "alpha_grid": [args.alpha_max, args.alpha_steps]})
    print(f"S_min = {s_min:.4f} at |alpha| = {where:.4g}  (P = {prof.values[0]:.6g} at origin)")


def cmd_scan_width(args, argv):
    data = io.read_dataset(args.input)
    widths = _width_list(args)
    res = analysis.scan_width(data, widths, _alpha_grid(args), threads=args.threads)
    _emit_table(args, ["w", "S_min", "alpha_at_min"], res.rows(), {**_comments(args), "best_width": fmt_w(res.best_width)})
    _manifest(args, argv, {"input": args.input, "widths": widths})
    print(f"best width {res.best_width:.4g} with S_min = {res.best_significance:.4f}")


def fmt_w(w):
    return f"{w:.10g}"


def cmd_compare_rect(args, argv):
    data = io.read_dataset(args.input)
    if data.params is None:
        raise io.DataError(f"{args.input}: dataset lacks nbar/eta metadata needed for the systematic error")
    rows = []
    for cutoff in args.cutoffs:
        prof, band = analysis.rect_comparison(data, cutoff, _alpha_grid(args))
        s_min, where = analysis.significance(prof)
        rows.append([cutoff, s_min, where, prof.significance[0], prof.values[0], band.max_abs])
        print(f"cutoff {cutoff:g}: S_min {s_min:.3f} at |alpha|={where:.3g}, S(0) {prof.significance[0]:.3f}, "
              f"P(0) {prof.values[0]:.4f}, max|bias| {band.max_abs:.4f}")
    _emit_table(args, ["cutoff", "S_min", "alpha_at_min", "S_origin", "p_origin", "max_abs_bias"], rows,
                _comments(args))
    _manifest(args, argv, {"input": args.input, "cutoffs": args.cutoffs})


def cmd_efficiency_sweep(args, argv):
    widths = args.width if args.width is not None else _width_list(args)
    rows = analysis.efficiency_sweep(args.nbar, args.etas, args.samples, args.seeds, widths,
                                     _alpha_grid(args), threads=args.threads)
    table = []
    for r in rows:
        table.append([r.eta, r.mean_significance, r.wigner_origin, float(r.wigner_sign)])
        print(f"eta {r.eta:g}: mean S_min {r.mean_significance:.3f}, Wigner(0) {r.wigner_origin:.5f}; "
              f"per seed {np.round(r.per_seed, 2).tolist()}")
    _emit_table(args, ["eta", "mean_S", "wigner_origin", "wigner_origin_sign"], table, _comments(args))
    _manifest(args, argv, {"nbar": args.nbar, "etas": args.etas, "samples": args.samples, "seeds": args.seeds,
                           "widths": widths, "per_seed": {f"{r.eta:g}": {"S": r.per_seed, "w": r.widths}
                                                          for r in rows}})


def cmd_verify_filter(args, argv, parser):
    if args.kind == "autocorr":
        if args.width is None:
            parser.error("--kind autocorr requires --width")
        filt = build_autocorrelation_filter(args.width)
    else:
        if args.cutoff is None:
            parser.error("--kind rect requires --cutoff")
        filt = build_rectangular_filter(args.cutoff)
    report = verify_filter_axioms(filt)
    for i, r in enumerate(report.results, 1):
        print(f"axiom {i} {r.name:<20} {'PASS' if r.passed else 'FAIL'}  margin {r.margin:.3e}  {r.detail}")
    if args.out:
        if args.format == "json":
            io.write_json(args.out, report.as_dict())
        else:
            _emit_table(args, ["axiom", "passed", "margin"],
                        [[str(i), "1" if r.passed else "0", r.margin] for i, r in enumerate(report.results, 1)],
                        _comments(args))
        _manifest(args, argv, {"filter": filt.describe()})


def cmd_replay(args, argv):
    m = json.loads(Path(args.manifest).read_text())
    return main(m["argv"])


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file")
    common.add_argument("--seed", type=int, default=1, help="base seed (default 1)")
    common.add_argument("--threads", type=_count, default=1, help="worker cap; results do not depend on it")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    alpha = argparse.ArgumentParser(add_help=False)
    alpha.add_argument("--alpha-max", type=_positive, default=3.0)
    alpha.add_argument("--alpha-steps", type=_count, default=61)

    scan = argparse.ArgumentParser(add_help=False)
    scan.add_argument("--wmin", type=_positive, default=0.6)
    scan.add_argument("--wmax", type=_positive, default=2.4)
    scan.add_argument("--step", type=_positive, default=0.1)
    scan.add_argument("--widths", type=_list(_positive), help="explicit comma-separated widths")

    p = argparse.ArgumentParser(prog="ncquasi", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="simulate homodyne data of a SPATS")
    s.add_argument("--nbar", type=_nonneg, required=True)
    s.add_argument("--eta", type=_efficiency, default=1.0)
    s.add_argument("--samples", type=_count, default=100_000)

    s = sub.add_parser("charfunc", parents=[common], help="estimate the characteristic function")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--bmax", type=_positive)
    s.add_argument("--width", type=_positive, default=1.4, help="size the grid for this filter width")
    s.add_argument("--grid-step", type=_positive, default=0.02)

    s = sub.add_parser("reconstruct", parents=[common, alpha], help="filtered quasiprobability profile")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--filter", choices=("autocorr", "rect"), default="autocorr")
    s.add_argument("--width", type=_positive)
    s.add_argument("--cutoff", type=_positive)

    s = sub.add_parser("scan-width", parents=[common, alpha, scan], help="optimize the filter width")
    s.add_argument("--in", dest="input", required=True)

    s = sub.add_parser("compare-rect", parents=[common, alpha], help="rectangular cutoff vs systematic error")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--cutoffs", type=_list(_positive), default=[2.2, 3.8])

    s = sub.add_parser("efficiency-sweep", parents=[common, alpha, scan], help="significance versus efficiency")
    s.add_argument("--nbar", type=_nonneg, required=True)
    s.add_argument("--etas", type=_list(_efficiency), required=True)
    s.add_argument("--samples", type=_count, default=100_000)
    s.add_argument("--seeds", type=_list(int), default=list(analysis.DEFAULT_SEEDS))
    s.add_argument("--width", type=_positive, help="fixed width instead of a per-seed scan")

    s = sub.add_parser("verify-filter", parents=[common], help="check the nonclassicality-filter axioms")
    s.add_argument("--kind", choices=("autocorr", "rect"), default="autocorr")
    s.add_argument("--width", type=_positive)
    s.add_argument("--cutoff", type=_positive)

    s = sub.add_parser("replay", help="re-run a command from its manifest")
    s.add_argument("manifest")
    return p


_NEEDS_OUT = {"simulate", "charfunc", "reconstruct", "scan-width", "compare-rect", "efficiency-sweep"}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in _NEEDS_OUT and not args.out:
        parser.error(f"{args.command} requires --out")
    handlers = {
        "simulate": lambda: cmd_simulate(args, argv),
        "charfunc": lambda: cmd_charfunc(args, argv),
        "reconstruct": lambda: cmd_reconstruct(args, argv, parser),
        "scan-width": lambda: cmd_scan_width(args, argv),
        "compare-rect": lambda: cmd_compare_rect(args, argv),
        "efficiency-sweep": lambda: cmd_efficiency_sweep(args, argv),
        "verify-filter": lambda: cmd_verify_filter(args, argv, parser),
        "replay": lambda: cmd_replay(args, argv),
    }
    try:
        rc = handlers[args.command]()
    except io.DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NegativeVarianceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
