"""Command-line interface.

Subcommands: ``spectrum``, ``scan``, ``locus``, ``classify``, ``fom`` and
``propagate``.  Every command writes JSON (an object with ``meta`` and
``rows`` or ``clusters``) or CSV (header row, one line per row) to stdout
or ``--output``.  Floats are written with 17 significant digits so that
identical input gives byte-identical output.

Exit codes: 0 success, 1 I/O or numerical failure, 2 invalid input,
3 table verification mismatch.

A ``--config`` file holds ``key = value`` lines whose keys are flag names
(``kappa-over-eps`` or ``kappa_over_eps``); flags on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .analytic_spectra import assemble_full_spectrum
from .degeneracy_atlas import ScanGrid, classify_point, hp_locus, locus_residual, on_locus, scan_plane
from .errors import BosonicEpsError, DefectiveXi
from .fom_lattice import VARIANTS, fom2_classify, verify_table
from .network_models import (PlanePoint, SystemParams, Topology, build_full_matrix, params_from_plane,
                             validate_rates)
from .numeric_engine import DEFAULT_POLICY, FOM_POLICY, eig, match_spectra, propagate

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_MISMATCH = 0, 1, 2, 3

# flag -> default; every flag parses to None so config values can fill gaps
_DEFAULTS = {
    "topology": "two_mode",
    "epsilon": 1.0,
    "gamma_plus_over_eps": 0.0,
    "format": "json",
    "variant": "genuine",
    "t": 1.0,
    "workers": 1,
    "verify_table": False,
}


class UsageError(ValueError):
    """Inconsistent or missing command-line input."""


# ---------------------------------------------------------------- output

def to_json(x, level=0):
    """JSON text with every float written to 17 significant digits."""
    pad, inner = "  " * level, "  " * (level + 1)
    if isinstance(x, dict):
        if not x:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {to_json(v, level + 1)}" for k, v in x.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(x, (list, tuple)):
        if not x:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in x):
            return "[" + ", ".join(to_json(v) for v in x) + "]"
        return "[\n" + ",\n".join(inner + to_json(v, level + 1) for v in x) + "\n" + pad + "]"
    if x is None or isinstance(x, (bool, np.bool_)):
        return json.dumps(None if x is None else bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return format(x, ".17g") if math.isfinite(x) else "null"
    return json.dumps(str(x))


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if isinstance(x, (list, tuple)):
        sep = ";" if any(isinstance(v, (list, tuple)) for v in x) else " "
        return sep.join(str(_cell(v)) for v in x).replace(" ", "+" if sep == ";" else " ")
    return "" if x is None else str(x)


def render(payload, fmt):
    """Serialise ``{"meta": ..., "rows": [...]}`` as JSON or CSV text."""
    if fmt == "json":
        return to_json(payload) + "\n"
    rows = payload.get("rows", payload.get("clusters", []))
    buf = io.StringIO()
    if rows:
        writer = csv.writer(buf, lineterminator="\n")
        header = list(rows[0].keys())
        writer.writerow(header)
        for r in rows:
            writer.writerow([_cell(r.get(k)) for k in header])
    return buf.getvalue()


def _emit(payload, args):
    text = render(payload, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- inputs

def read_config(path):
    """Flat ``key = value`` file to a dict with underscore keys."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


def _floats(text, name):
    try:
        return tuple(float(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise UsageError(f"--{name} expects comma-separated numbers, got {text!r}") from None


def _range(text, name):
    vals = _floats(text, name)
    if len(vals) != 3 or vals[2] != int(vals[2]):
        raise UsageError(f"--{name} expects lo,hi,count")
    return (vals[0], vals[1], int(vals[2]))


def _merge_config(args, parser_types):
    if args.config:
        for key, value in read_config(args.config).items():
            if key not in parser_types:
                raise UsageError(f"unknown config key {key!r}")
            if getattr(args, key, None) is None:
                conv = parser_types[key]
                setattr(args, key, conv(value) if conv else value)
    for key, value in _DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    return args


def system_from_args(args):
    """Build :class:`SystemParams` from either explicit rates or a plane point."""
    eps = float(args.epsilon)
    if args.kappa is not None and args.kappa_over_eps is not None:
        raise UsageError("give --kappa or --kappa-over-eps, not both")
    plane_rates = [v is not None for v in (args.gamma_minus, args.gamma_minus_over_eps, args.gamma_plus)]
    if args.gammas is not None and any(plane_rates):
        raise UsageError("give either --gammas or a plane point, not both")
    if args.kappa is not None:
        kappa_over_eps = float(args.kappa) / eps
    elif args.kappa_over_eps is not None:
        kappa_over_eps = float(args.kappa_over_eps)
    else:
        raise UsageError("--kappa or --kappa-over-eps is required")
    if args.gammas is not None:
        return SystemParams(args.topology, eps, kappa_over_eps * eps, _floats(args.gammas, "gammas"))
    if args.gamma_minus is not None and args.gamma_minus_over_eps is not None:
        raise UsageError("give --gamma-minus or --gamma-minus-over-eps, not both")
    gm = float(args.gamma_minus) / eps if args.gamma_minus is not None else float(args.gamma_minus_over_eps or 0.0)
    gp = float(args.gamma_plus) / eps if args.gamma_plus is not None else float(args.gamma_plus_over_eps)
    return params_from_plane(args.topology, eps, PlanePoint(kappa_over_eps, gm, gp))


def _meta(args, **extra):
    meta = {"command": args.command, "topology": Topology.parse(args.topology).value,
            "epsilon": float(args.epsilon), "version": __version__}
    meta.update(extra)
    return meta


def _policy(args, base):
    changes = {k: float(getattr(args, k)) for k in ("cluster_rel", "rank_safety")
               if getattr(args, k, None) is not None}
    return base.with_(**changes) if changes else base


def _system_meta(p):
    return {"kappa": p.kappa, "gammas": list(p.gammas)}


# ---------------------------------------------------------------- commands

def cmd_spectrum(args):
    p = system_from_args(args)
    M = build_full_matrix(p).entries
    w, _ = eig(M)
    try:
        analytic = assemble_full_spectrum(p)
    except DefectiveXi as exc:
        print(f"warning: {exc}; closed-form assembly undefined, numeric spectrum only", file=sys.stderr)
        analytic = None
    if analytic is None:
        order = np.lexsort((w.imag, w.real))
        rows = [{"index": i + 1, "parity": None, "analytic_re": None, "analytic_im": None,
                 "numeric_re": w[k].real, "numeric_im": w[k].imag, "abs_error": None}
                for i, k in enumerate(order)]
        err = None
    else:
        lam = np.array([e.value for e in analytic])
        pairing, err = match_spectra(lam, w)
        rows = [{"index": e.index, "parity": e.parity, "analytic_re": e.value.real, "analytic_im": e.value.imag,
                 "numeric_re": w[pairing[i]].real, "numeric_im": w[pairing[i]].imag,
                 "abs_error": abs(e.value - w[pairing[i]])} for i, e in enumerate(analytic)]
    _emit({"meta": _meta(args, **_system_meta(p), match_error=err, defective_xi=analytic is None),
           "rows": rows}, args)
    return EXIT_OK


def cmd_scan(args):
    grid = ScanGrid(kappa=_range(args.kappa_range, "kappa-range") if args.kappa_range else ScanGrid.kappa,
                    gamma_minus=(_range(args.gamma_minus_range, "gamma-minus-range") if args.gamma_minus_range
                                 else ScanGrid.gamma_minus),
                    gamma_plus=float(args.gamma_plus_over_eps))
    table = scan_plane(args.topology, float(args.epsilon), grid, _policy(args, DEFAULT_POLICY),
                       flag_threshold=None if args.flag_threshold is None else float(args.flag_threshold),
                       workers=int(args.workers))
    rows = []
    for r in table.data:
        row = dict(zip(table.columns, (float(v) for v in r)))
        row["degenerate_flag"] = bool(row["degenerate_flag"])
        rows.append(row)
    _emit({"meta": _meta(args, **table.meta), "rows": rows}, args)
    return EXIT_OK


def cmd_locus(args):
    topology = Topology.parse(args.topology)
    point = None
    if args.kappa_over_eps is not None or args.kappa is not None:
        p = system_from_args(args)
        point = PlanePoint(p.kappa / p.epsilon, validate_rates(p)[1] / p.epsilon)
    residuals = locus_residual(topology, point) if point is not None else {}
    hits = on_locus(topology, point) if point is not None else []
    rows = []
    for ellipse in hp_locus(topology, include_unlisted=True):
        row = {"branch": ellipse.branch, "c": ellipse.c, "listed": ellipse.listed,
               "expected_blocks": [list(e.blocks) for e in ellipse.expected]}
        if point is not None:
            row.update(residual=abs(residuals[ellipse.branch]), on_locus=ellipse.branch in hits)
        rows.append(row)
    meta = _meta(args)
    if point is not None:
        meta.update(kappa_over_eps=point.kappa_over_eps, gamma_minus_over_eps=point.gamma_minus_over_eps)
    _emit({"meta": meta, "rows": rows}, args)
    return EXIT_OK


def _cluster_rows(clusters):
    return [{"eigenvalue_re": c.eigenvalue.real, "eigenvalue_im": c.eigenvalue.imag, "alg": c.algebraic,
             "geo": c.geometric, "blocks": list(c.blocks), "class": c.classification.value,
             "ED": c.ed, "DD": c.dd} for c in clusters]


def cmd_classify(args):
    p = system_from_args(args)
    policy = _policy(args, DEFAULT_POLICY)
    clusters = classify_point(p, policy)
    _emit({"meta": _meta(args, **_system_meta(p), cluster_rel=policy.cluster_rel),
           "clusters": _cluster_rows(clusters)}, args)
    return EXIT_OK


def cmd_fom(args):
    if args.variant not in VARIANTS:
        raise UsageError(f"--variant must be one of {VARIANTS}")
    policy = _policy(args, FOM_POLICY)
    if args.verify_table:
        reports = verify_table(args.topology, args.variant, policy, epsilon=float(args.epsilon))
        rows = []
        for rep in reports:
            for e in rep.entries:
                d = e.as_dict()
                rows.append({"gamma_plus": d["gamma_plus"], "symbol": d["symbol"],
                             "eigenvalue_re": d["eigenvalue"][0], "eigenvalue_im": d["eigenvalue"][1],
                             "expected_dd": d["expected"]["dd"], "expected_blocks": d["expected"]["blocks"],
                             "observed_dd": None if d["observed"] is None else d["observed"]["dd"],
                             "observed_blocks": None if d["observed"] is None else d["observed"]["blocks"],
                             "match": d["match"], "algebraic_match": d["algebraic_match"]})
        ok = all(r.matched for r in reports)
        meta = _meta(args, variant=args.variant, verify_table=True, match=ok,
                     algebraic_match=all(r.algebraic_matched for r in reports),
                     unexpected=sum(len(r.unexpected) for r in reports))
        _emit({"meta": meta, "clusters": rows}, args)
        return EXIT_OK if ok else EXIT_MISMATCH
    p = system_from_args(args)
    clusters = fom2_classify(p, args.variant, policy)
    _emit({"meta": _meta(args, **_system_meta(p), variant=args.variant), "clusters": _cluster_rows(clusters)},
          args)
    return EXIT_OK


def cmd_propagate(args):
    if args.kappa is None and args.kappa_over_eps is None:
        args.kappa_over_eps = 0.0
    p = system_from_args(args)
    U = propagate(build_full_matrix(p).entries, float(args.t))
    rows = [{"i": i, "j": j, "re": U[i, j].real, "im": U[i, j].imag}
            for i in range(U.shape[0]) for j in range(U.shape[1])]
    _emit({"meta": _meta(args, **_system_meta(p), t=float(args.t), norm=float(np.linalg.norm(U, 2))),
           "rows": rows}, args)
    return EXIT_OK


COMMANDS = {"spectrum": cmd_spectrum, "scan": cmd_scan, "locus": cmd_locus, "classify": cmd_classify,
            "fom": cmd_fom, "propagate": cmd_propagate}


# ---------------------------------------------------------------- parser

# flag name -> converter used for config-file values
_TYPES = {
    "topology": None, "epsilon": float, "kappa": float, "kappa_over_eps": float, "gammas": None,
    "gamma_plus": float, "gamma_minus": float, "gamma_plus_over_eps": float, "gamma_minus_over_eps": float,
    "format": None, "output": None, "cluster_rel": float, "rank_safety": float,
    "kappa_range": None, "gamma_minus_range": None, "flag_threshold": float, "workers": int,
    "variant": None, "verify_table": lambda s: s.strip().lower() in ("1", "true", "yes", "on"), "t": float,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; command-line flags override it")
    common.add_argument("--topology", choices=[t.value for t in Topology])
    common.add_argument("--epsilon", type=float, help="linear coupling (default 1)")
    common.add_argument("--kappa", type=float, help="nonlinear coupling, absolute")
    common.add_argument("--kappa-over-eps", type=float)
    common.add_argument("--gammas", help="comma-separated per-mode rates (replaces the plane point)")
    common.add_argument("--gamma-plus", type=float, help="absolute gamma_plus")
    common.add_argument("--gamma-minus", type=float, help="absolute gamma_minus")
    common.add_argument("--gamma-plus-over-eps", type=float)
    common.add_argument("--gamma-minus-over-eps", type=float)
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--output", help="write here instead of stdout")
    common.add_argument("--cluster-rel", type=float, help="override the eigenvalue clustering radius")
    common.add_argument("--rank-safety", type=float, help="override the rank threshold factor")

    parser = argparse.ArgumentParser(prog="bosonic-eps", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="closed-form and numeric spectra")
    scan = sub.add_parser("scan", parents=[common], help="reduced spectra over the (kappa, gamma_minus) plane")
    scan.add_argument("--kappa-range", help="lo,hi,count for kappa/eps")
    scan.add_argument("--gamma-minus-range", help="lo,hi,count for gamma_minus/eps")
    scan.add_argument("--flag-threshold", type=float, help="plain eigenvalue-gap flag instead of the EP test")
    scan.add_argument("--workers", type=int)
    sub.add_parser("locus", parents=[common], help="degeneracy ellipses and branch residuals")
    sub.add_parser("classify", parents=[common], help="Jordan clusters of the full matrix")
    fom = sub.add_parser("fom", parents=[common], help="second-order moment clusters")
    fom.add_argument("--variant", choices=list(VARIANTS))
    fom.add_argument("--verify-table", action="store_true", default=None,
                     help="compare with the reference table (exit 3 on mismatch)")
    prop = sub.add_parser("propagate", parents=[common], help="dump U(t) = exp(-i M t)")
    prop.add_argument("--t", type=float)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _merge_config(args, _TYPES)
        return COMMANDS[args.command](args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BosonicEpsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
