"""Command-line front end.

Exit codes: 0 when every check passes, 1 on a verification failure, 2 on a
usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import (
    AssemblyError, ConfigurationError, DomainError, NotFoundError, ZetaMetaError,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("zetameta")


def _emit(obj, out: str | None = None) -> None:
    from .pipeline import canonical_json

    text = canonical_json(obj)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cfg(args):
    from .zeta_core import EvalConfig

    return EvalConfig(working_precision=args.precision)


def _table(args, cfg, L=None, U=None, k=None):
    from .ladder import build_ladder, load_table, plan_ladder_range

    if getattr(args, "table", None):
        return load_table(args.table)
    if getattr(args, "t_range", None):
        t_lo, t_hi = args.t_range
    else:
        t_lo, t_hi = plan_ladder_range(np.pi * L, U, k)
    return build_ladder(t_lo, t_hi, cfg=cfg)


def cmd_zeta(args) -> int:
    from .zeta_core import hardy_z, z_tilde_sq, zeta

    cfg = _cfg(args)
    if args.hardy is not None:
        t = args.hardy
        _emit({"t": t, "Z": float(hardy_z(t, cfg)), "z_tilde_sq": float(z_tilde_sq(t, cfg))})
    else:
        s = complex(args.sigma, args.t)
        v = complex(zeta(s, cfg))
        _emit({"s": [s.real, s.imag], "zeta": [v.real, v.imag], "abs": abs(v)})
    return EXIT_OK


def cmd_trig(args) -> int:
    from .trig_library import NAMES, mean_value_closed_form, quadrature_mean, sinc_decomposition

    dec = sinc_decomposition(args.l)
    closed = mean_value_closed_form(args.l, args.U)
    quad = quadrature_mean(args.l, args.U)
    _emit({"l": args.l, "name": NAMES[args.l], "U": args.U, "closed_form": closed, "quadrature": quad,
           "relative_difference": abs(closed - quad) / abs(quad),
           "coefficients": [str(c) for c in dec.coefficients]})
    return EXIT_OK


def cmd_ladder(args) -> int:
    from .ladder import build_ladder, load_table, phi1, phi1_inv, save_table

    cfg = _cfg(args)
    if args.action == "build":
        table = build_ladder(args.t_lo, args.t_hi, args.resolution, cfg)
        save_table(table, args.out)
        _emit({"out": str(args.out), "t_lo": table.t_lo, "t_hi": table.t_hi, "anchor": list(table.anchor),
               "checksum": table.checksum(), "label": "surrogate"})
        return EXIT_OK
    table = load_table(args.table)
    if args.action == "eval":
        _emit({"t": args.x, "phi": phi1(table, args.x)})
    else:
        _emit({"y": args.x, "t": phi1_inv(table, args.x)})
    return EXIT_OK


def cmd_factorize(args) -> int:
    from .factorization import factorize, verify_certificate

    cfg = _cfg(args)
    table = _table(args, cfg, args.L, args.U, args.k)
    cert = factorize(args.l, args.k, args.U, args.L, table, cfg)
    rep = verify_certificate(cert, table, cfg, rel_tol=args.rel_tol)
    _emit({"certificate": cert.to_dict(), "hash": cert.content_hash(), "checks": rep.checks,
           "relative_residual": cert.relative_residual, "ok": rep.ok}, args.out)
    return EXIT_OK if rep.ok else EXIT_FAIL


def _strips(args):
    from .grafting import build_strips

    return build_strips(args.sigma1, args.sigma2, args.delta)


def cmd_strips(args) -> int:
    from .grafting import strips_disjoint

    strips = _strips(args)
    _emit({"strips": [s.to_dict() for s in strips], "disjoint": strips_disjoint(strips)})
    return EXIT_OK


def cmd_graft(args) -> int:
    from .grafting import find_graft, iter_grafts

    strip = _strips(args)[args.strip - 1]
    cfg = _cfg(args)
    kw = dict(t_cap=args.t_cap, graft_tol=args.tol)
    if args.count > 1:
        out = []
        for g in iter_grafts(strip, args.target, tuple(args.t_window), cfg, **kw):
            out.append(g.to_dict())
            if len(out) == args.count:
                break
        _emit({"grafts": out})
        return EXIT_OK if len(out) == args.count else EXIT_FAIL
    g = find_graft(strip, args.target, tuple(args.t_window), cfg, **kw)
    _emit(dict(g.to_dict(), error=g.error))
    return EXIT_OK


def cmd_usets(args) -> int:
    from .grafting import validate_u_set

    text = Path(args.file).read_text()
    try:
        values = json.loads(text, parse_float=str)
        values = [str(v) for v in values]
    except json.JSONDecodeError:
        values = text.replace(",", " ").split()
    res = validate_u_set(values)
    _emit({"valid": res.valid, "violations": list(res.violations), "details": list(res.details),
           "values": [str(v) for v in res.u_set.values] if res.u_set else None})
    return EXIT_OK if res.valid else EXIT_FAIL


def cmd_meta(args) -> int:
    from .ladder import load_table
    from .meta_equations import MetaEquationInstance, verify_meta

    cfg = _cfg(args)
    payload = json.loads(Path(args.bindings).read_text())
    if args.eq is not None and int(payload["eq_id"]) != args.eq:
        raise AssemblyError(f"bindings are for equation {payload['eq_id']}, not {args.eq}")
    inst = MetaEquationInstance.from_bindings(payload, cfg)
    table = load_table(args.table) if args.table else None
    rep = verify_meta(inst, args.form, table, cfg)
    _emit(rep.to_dict())
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_crossbreed(args) -> int:
    from .crossbreeding import run_script

    res = run_script(Path(args.script).read_text())
    text = "\n".join(res.printed) + "\n"
    sys.stdout.write(text)
    if args.golden:
        expected = Path(args.golden).read_text()
        if expected != text:
            log.error("derivation output differs from %s", args.golden)
            return EXIT_FAIL
    return EXIT_OK


def cmd_run(args) -> int:
    from .pipeline import load_config, run_pipeline

    cfg = load_config(args.config) if args.config else None
    if cfg is None:
        from .pipeline import PipelineConfig

        cfg = PipelineConfig()
    manifest = run_pipeline(cfg, args.out)
    if args.command == "report":
        from .pipeline import headline_markdown

        if manifest.headline:
            sys.stdout.write(headline_markdown(manifest))
    else:
        sys.stdout.write(json.dumps({"ok": manifest.ok, "checks": manifest.checks, "errors": manifest.errors},
                                    indent=2) + "\n")
    return EXIT_OK if manifest.ok else EXIT_FAIL


def _add_precision(p) -> None:
    p.add_argument("--precision", type=int, default=15, help="working precision in digits (>15 uses mpmath)")


def _add_strip_args(p) -> None:
    p.add_argument("--sigma1", type=float, default=0.6)
    p.add_argument("--sigma2", type=float, default=0.9)
    p.add_argument("--delta", type=float, default=0.005)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zetameta", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("zeta", help="evaluate zeta(s) or Hardy's Z(t)")
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--hardy", type=float, default=None, metavar="T", help="evaluate Z(T) and Z~^2(T) instead")
    _add_precision(p)
    p.set_defaults(func=cmd_zeta)

    p = sub.add_parser("trig", help="closed-form mean of f_l over a width U")
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--U", type=float, required=True)
    p.set_defaults(func=cmd_trig)

    p = sub.add_parser("ladder", help="build, evaluate or invert the surrogate ladder")
    lsub = p.add_subparsers(dest="action", required=True)
    b = lsub.add_parser("build")
    b.add_argument("--t-lo", type=float, required=True)
    b.add_argument("--t-hi", type=float, required=True)
    b.add_argument("--resolution", type=float, default=0.05)
    b.add_argument("--out", required=True)
    _add_precision(b)
    for name in ("eval", "inverse"):
        e = lsub.add_parser(name)
        e.add_argument("--table", required=True)
        e.add_argument("x", type=float)
        _add_precision(e)
    p.set_defaults(func=cmd_ladder)

    p = sub.add_parser("factorize", help="mean-value certificate for one (l, k, U, L)")
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--U", type=float, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--table", help="ladder CSV; built on demand when omitted")
    p.add_argument("--t-range", type=float, nargs=2, metavar=("T_LO", "T_HI"))
    p.add_argument("--rel-tol", type=float, default=1e-6)
    p.add_argument("--out")
    _add_precision(p)
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("graft", help="find w in a strip with |zeta(w)| = target")
    p.add_argument("--strip", type=int, required=True)
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--t-window", type=float, nargs=2, default=[10.0, 2000.0], metavar=("T_A", "T_B"))
    p.add_argument("--t-cap", type=float, default=16000.0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--count", type=int, default=1, help="number of distinct solutions to list")
    _add_strip_args(p)
    _add_precision(p)
    p.set_defaults(func=cmd_graft)

    p = sub.add_parser("strips", help="twelve disjoint strips")
    ssub = p.add_subparsers(dest="action", required=True)
    b = ssub.add_parser("build")
    _add_strip_args(b)
    p.set_defaults(func=cmd_strips)

    p = sub.add_parser("usets", help="validate an admissible U-set")
    usub = p.add_subparsers(dest="action", required=True)
    v = usub.add_parser("validate")
    v.add_argument("file", help="JSON list or whitespace/comma separated values")
    p.set_defaults(func=cmd_usets)

    p = sub.add_parser("meta", help="verify a meta-functional equation from saved bindings")
    msub = p.add_subparsers(dest="action", required=True)
    v = msub.add_parser("verify")
    v.add_argument("--eq", type=int)
    v.add_argument("--form", choices=("exact", "asymptotic"), default="exact")
    v.add_argument("--bindings", required=True)
    v.add_argument("--table", help="ladder CSV to re-check the certificate against")
    _add_precision(v)
    p.set_defaults(func=cmd_meta)

    p = sub.add_parser("crossbreed", help="run a derivation script")
    csub = p.add_subparsers(dest="action", required=True)
    d = csub.add_parser("derive")
    d.add_argument("--script", required=True)
    d.add_argument("--golden", help="expected output; mismatch exits 1")
    p.set_defaults(func=cmd_crossbreed)

    for name, helptext in (("report", "run the pipeline and print the headline report"),
                           ("run", "run the full pipeline and write the manifest")):
        p = sub.add_parser(name, help=helptext)
        if name == "report":
            p.add_argument("kind", nargs="?", choices=("headline",), default="headline")
        p.add_argument("--config", help="INI configuration; defaults are used when omitted")
        p.add_argument("--out", help="directory for manifest, report and bindings")
        p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, DomainError, AssemblyError, OSError, json.JSONDecodeError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (NotFoundError, ZetaMetaError) as exc:
        log.error("%s", exc)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
