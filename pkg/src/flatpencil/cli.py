"""Command-line entry point.

Subcommands
    frobenius check INPUT       certify WDVV + quasihomogeneity
    frobenius pencil INPUT      emit the certified pencil (g, eta)
    pencil check INPUT          flat-pencil + quasihomogeneity certificates
    pencil reconstruct INPUT    inverse construction, emits Frobenius JSON
    coxeter --type A --rank N   orbit-space pencil + Frobenius JSON
    bracket emit INPUT          first-order brackets of both pencil metrics
    bracket compat INPUT        bracket compatibility certificate
    bracket virasoro INPUT      Virasoro form of the stress field
    bracket recurse INPUT       bihamiltonian recursion from the Casimirs
    bracket central-charge INPUT [--coxeter-rank K]

Exit codes: 0 all certificates pass, 1 certificate failure, 2 usage error,
3 malformed input (parse errors carry line/column).  Reports are printed as
text and, with --out DIR, written as canonical JSON; identical inputs and
seed produce byte-identical report files.  --fast switches the zero tests
to seeded random sampling and requires --seed.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import pencilio, reports
from .coxeter import coxeter_pencil
from .errors import FlatPencilError, InputFormatError, ParseError
from .frobenius import (
    check_quasihomogeneity,
    check_wdvv,
    to_flat_pencil,
    unity_scaling_certificate,
)
from .geometry import check_flat_pencil, check_quasihomogeneous
from .identity import Checker
from .loopspace import (
    Density,
    bracket_from_metric,
    central_charge,
    check_compatibility,
    degree_certificate,
    recursion_step,
    virasoro_check,
)
from .qpoly import QPoly
from .reconstruction import reconstruct_frobenius
from .reports import Certificate, Report

EXIT_OK = 0
EXIT_CERT_FAIL = 1
EXIT_USAGE = 2
EXIT_INPUT = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flatpencil", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--fast", action="store_true", help="sampled zero tests (needs --seed)")
        p.add_argument("--seed", type=int, default=None, help="seed for sampled mode")
        p.add_argument("--out", type=Path, default=None, help="directory for JSON artifacts")
        p.add_argument("--timings", action="store_true", help="include wall-clock timing in the report")

    frob = sub.add_parser("frobenius", help="potential-based certificates")
    frob_sub = frob.add_subparsers(dest="subcommand", required=True)
    for name in ("check", "pencil"):
        p = frob_sub.add_parser(name)
        p.add_argument("input", type=Path)
        common(p)

    pen = sub.add_parser("pencil", help="pencil certificates and reconstruction")
    pen_sub = pen.add_subparsers(dest="subcommand", required=True)
    for name in ("check", "reconstruct"):
        p = pen_sub.add_parser(name)
        p.add_argument("input", type=Path)
        common(p)

    cox = sub.add_parser("coxeter", help="type-A orbit space pencil")
    cox.add_argument("--type", dest="group_type", default="A", help="Coxeter type (only A)")
    cox.add_argument("--rank", type=int, required=True)
    common(cox)

    br = sub.add_parser("bracket", help="loop-space brackets")
    br_sub = br.add_subparsers(dest="subcommand", required=True)
    for name in ("emit", "compat", "virasoro", "recurse", "central-charge"):
        p = br_sub.add_parser(name)
        p.add_argument("input", type=Path)
        if name == "recurse":
            p.add_argument("--steps", type=int, default=1)
        if name == "central-charge":
            p.add_argument("--coxeter-rank", type=int, default=None)
        common(p)
    return parser


def make_checker(args) -> Checker:
    if args.fast:
        if args.seed is None:
            print("error: --fast requires --seed", file=sys.stderr)
            raise SystemExit(EXIT_USAGE)
        return Checker("sampled", seed=args.seed)
    return Checker("exact")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    checker = make_checker(args)
    started = time.monotonic()
    try:
        report, extra, outputs = dispatch(args, checker)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InputFormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FlatPencilError as exc:
        print(f"certification error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CERT_FAIL

    elapsed_ms = int((time.monotonic() - started) * 1000) if args.timings else None
    print(report.summary())
    for key, value in extra.items():
        print(f"{key}: {value}")
    for path in outputs:
        print(f"wrote {path}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        payload = run_report_json(args, report, extra, outputs, elapsed_ms)
        report_path = args.out / f"{command_slug(args)}-report.json"
        report_path.write_text(payload, encoding="utf-8")
        print(f"wrote {report_path}")
    return EXIT_OK if report.passed else EXIT_CERT_FAIL


def command_slug(args) -> str:
    parts = [args.command]
    if getattr(args, "subcommand", None):
        parts.append(args.subcommand)
    return "-".join(parts)


def run_report_json(args, report: Report, extra: dict, outputs: list[str], elapsed_ms) -> str:
    payload = {
        "schema": pencilio.SCHEMA,
        "command": command_slug(args),
        "inputs": input_digests(args),
        "mode": "sampled" if args.fast else "exact",
        "seed": args.seed,
        "certificates": [
            {
                "name": c.name,
                "status": c.status,
                "witness": c.witness,
                "timing_ms": None,
            }
            for c in sorted(report.certificates, key=lambda c: c.name)
        ],
        "outputs": [str(p) for p in outputs],
        "extra": {k: str(v) for k, v in sorted(extra.items())},
        "elapsed_ms": elapsed_ms,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def input_digests(args) -> list[dict]:
    path = getattr(args, "input", None)
    if path is None:
        return []
    text = path.read_text(encoding="utf-8")
    return [{"path": str(path), "sha256": pencilio.sha256_digest(text)}]


def read_input(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputFormatError(f"cannot read {path}: {exc}") from exc


def dispatch(args, checker: Checker):
    handler = {
        ("frobenius", "check"): cmd_frobenius_check,
        ("frobenius", "pencil"): cmd_frobenius_pencil,
        ("pencil", "check"): cmd_pencil_check,
        ("pencil", "reconstruct"): cmd_pencil_reconstruct,
        ("coxeter", None): cmd_coxeter,
        ("bracket", "emit"): cmd_bracket_emit,
        ("bracket", "compat"): cmd_bracket_compat,
        ("bracket", "virasoro"): cmd_bracket_virasoro,
        ("bracket", "recurse"): cmd_bracket_recurse,
        ("bracket", "central-charge"): cmd_bracket_central_charge,
    }[(args.command, getattr(args, "subcommand", None))]
    return handler(args, checker)


def frobenius_report(m, checker: Checker) -> tuple[Report, dict]:
    report = Report()
    report.add(check_wdvv(m, checker))
    extra = {}
    try:
        a_mat, b_vec, c_val = check_quasihomogeneity(m)
        report.add(Certificate("potential-scaling", reports.PASS))
        extra["scaling-quadratic-A"] = [[str(x) for x in row] for row in a_mat]
        extra["scaling-linear-B"] = [str(x) for x in b_vec]
        extra["scaling-constant-C"] = str(c_val)
    except FlatPencilError as exc:
        report.add(Certificate("potential-scaling", reports.FAIL, witness=str(exc)))
    report.add(unity_scaling_certificate(m))
    return report, extra


def cmd_frobenius_check(args, checker):
    m = pencilio.load_frobenius(read_input(args.input))
    report, extra = frobenius_report(m, checker)
    return report, extra, []


def cmd_frobenius_pencil(args, checker):
    m = pencilio.load_frobenius(read_input(args.input))
    report, extra = frobenius_report(m, checker)
    outputs = []
    if report.passed:
        pencil = to_flat_pencil(m, checker)
        for cert in check_flat_pencil(pencil, checker).certificates:
            report.add(cert)
        qh = check_quasihomogeneous(pencil, checker)
        for cert in qh.certificates:
            report.add(cert)
        extra["degree-d"] = qh.d
        # both unity conventions: the coordinate index of e and the scaling
        # potential tau it pairs into
        extra["unity-index"] = m.unity + 1
        extra["tau"] = pencil.tau
        if args.out is not None:
            args.out.mkdir(parents=True, exist_ok=True)
            path = args.out / (args.input.stem + "-pencil.json")
            path.write_text(pencilio.dump_pencil(pencil), encoding="utf-8")
            outputs.append(str(path))
    return report, extra, outputs


def cmd_pencil_check(args, checker):
    pencil, _gens = pencilio.load_pencil(read_input(args.input))
    report = check_flat_pencil(pencil, checker)
    extra = {}
    if pencil.tau is not None:
        qh = check_quasihomogeneous(pencil, checker)
        for cert in qh.certificates:
            report.add(cert)
        extra["degree-d"] = qh.d
    return report, extra, []


def cmd_pencil_reconstruct(args, checker):
    pencil, _gens = pencilio.load_pencil(read_input(args.input))
    for cert in check_flat_pencil(pencil, checker).certificates:
        if cert.status == reports.FAIL:
            raise InputFormatError(f"input is not a flat pencil: {cert.name}: {cert.witness}")
    result = reconstruct_frobenius(pencil, checker)
    extra = {
        "mode": result.mode,
        "degree-d": result.frobenius.d,
        "unity-index": result.frobenius.unity + 1,
    }
    outputs = []
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / (args.input.stem + "-frobenius.json")
        path.write_text(pencilio.dump_frobenius(result.frobenius), encoding="utf-8")
        outputs.append(str(path))
    return result.report, extra, outputs


def cmd_coxeter(args, checker):
    if args.group_type != "A":
        print(f"error: unsupported Coxeter type {args.group_type!r} (only A)", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    bundle, recon = coxeter_pencil(args.rank, checker)
    extra = {
        "degree-d": bundle.d,
        "coxeter-number": bundle.chart.h,
        "unity-scale": bundle.unity_scale,
        "mode": recon.mode,
    }
    outputs = []
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        stem = f"a{args.rank}"
        p_path = args.out / f"{stem}-pencil.json"
        p_path.write_text(pencilio.dump_pencil(bundle.pencil), encoding="utf-8")
        outputs.append(str(p_path))
        f_path = args.out / f"{stem}-frobenius.json"
        f_path.write_text(pencilio.dump_frobenius(recon.frobenius), encoding="utf-8")
        outputs.append(str(f_path))
    return bundle.report, extra, outputs


def cmd_bracket_emit(args, checker):
    pencil, gens = pencilio.load_pencil(read_input(args.input))
    report = Report()
    extra = {}
    outputs = []
    brackets = {}
    for tag, metric in (("bracket1", pencil.g1), ("bracket2", pencil.g2)):
        bracket = bracket_from_metric(metric, checker)
        report.add(
            Certificate(f"{tag}-flatness", reports.PASS, mode=checker.mode)
        )
        report.add(
            Certificate(
                f"{tag}-degree-one",
                degree_certificate(bracket).status,
            )
        )
        brackets[tag] = {
            "metric": [[str(x) for x in row] for row in metric.g],
            "connection": [
                [[str(bracket.conn.gamma[k][i][j]) for j in range(pencil.n)] for i in range(pencil.n)]
                for k in range(pencil.n)
            ],
        }
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / (args.input.stem + "-brackets.json")
        payload = {
            "schema": pencilio.SCHEMA,
            "n": pencil.n,
            "expgens": [[a + 1, str(r)] for a, r in gens],
            **brackets,
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        outputs.append(str(path))
    return report, extra, outputs


def cmd_bracket_compat(args, checker):
    pencil, _gens = pencilio.load_pencil(read_input(args.input))
    b1 = bracket_from_metric(pencil.g1, checker)
    b2 = bracket_from_metric(pencil.g2, checker)
    report = check_compatibility(b1, b2, checker)
    return report, {}, []


def cmd_bracket_virasoro(args, checker):
    m = pencilio.load_frobenius(read_input(args.input))
    pencil = to_flat_pencil(m, checker)
    report = virasoro_check(m, pencil, checker)
    return report, {"degree-d": m.d}, []


def cmd_bracket_recurse(args, checker):
    pencil, _gens = pencilio.load_pencil(read_input(args.input))
    if args.steps < 1:
        print("error: --steps must be >= 1", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    report = Report()
    densities = {}
    for alpha in range(pencil.n):
        h = Density(QPoly.var(pencil.n, alpha))
        densities[f"{alpha + 1},0"] = str(h.h)
        for step in range(1, args.steps + 1):
            h = recursion_step(pencil, h, checker)
            densities[f"{alpha + 1},{step}"] = str(h.h)
    report.add(Certificate("recursion-integrable", reports.PASS, mode=checker.mode))
    outputs = []
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / (args.input.stem + "-densities.json")
        payload = {"schema": pencilio.SCHEMA, "n": pencil.n, "densities": densities}
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        outputs.append(str(path))
    return report, {"steps": args.steps}, outputs


def cmd_bracket_central_charge(args, checker):
    m = pencilio.load_frobenius(read_input(args.input))
    result = central_charge(m, coxeter_rank=args.coxeter_rank)
    report = Report()
    extra = {"central-charge": result.c_formula}
    if result.c_lie is None:
        report.add(reports.skipped("central-charge-match", "no Coxeter tag supplied"))
    else:
        extra["central-charge-lie"] = result.c_lie
        report.add(
            Certificate(
                "central-charge-match",
                reports.PASS if result.equal else reports.FAIL,
                witness=None if result.equal else f"{result.c_formula} != {result.c_lie}",
            )
        )
    return report, extra, []


if __name__ == "__main__":
    sys.exit(main())
