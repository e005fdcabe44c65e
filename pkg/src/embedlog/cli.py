"""Command-line front end: classification reports, fixture generation, and
generator verification.

Exit codes follow one contract everywhere: 0 success (for classify:
embeddable), 1 negative result (not embeddable / verification failed),
2 parse, validation, or constructor error.
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys
from pathlib import Path

import numpy as np
from mpmath import mp, mpf

from ._scalars import cast_like, to_float_matrix, working_precision
from .branches import classify, validate_markov, validate_rate
from .errors import EmbedLogError
from .families import (
    build_example,
    certify_witness,
    closed_form_log,
    sample_delta,
    validated_kappa,
    working_dps,
)
from .linalg import expm
from .ssm import GeneratorParams, build_q, cone_check, sample_interior, variety_residual
from .tolerances import Tolerances, tolerances_from_env

SCHEMA_VERSION = "1"

__all__ = ["main"]


# ---------------------------------------------------------------- matrix I/O

def _significant_digits(token: str) -> int:
    mantissa = token.strip().lstrip("+-").split("e")[0].split("E")[0]
    digits = [c for c in mantissa if c.isdigit()]
    while digits and digits[0] == "0":
        digits.pop(0)
    return len(digits)


def _parse_tokens(rows):
    if len(rows) != 4 or any(len(r) != 4 for r in rows):
        raise ValueError("matrix payload must be 4 rows of 4 fields")
    precision = max(_significant_digits(t) for row in rows for t in row)
    if precision > 17:
        with mp.workdps(precision + 10):
            return np.array(
                [[mpf(t.strip()) for t in row] for row in rows], dtype=object
            )
    return np.array([[float(t) for t in row] for row in rows], dtype=float)


def read_matrix(path: str, fmt: str | None = None) -> np.ndarray:
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    fmt = fmt or ("json" if str(path).endswith(".json") else "csv")
    if fmt == "json":
        # parse_float=str keeps long decimal literals intact for the
        # extended-precision carrier detection
        payload = json.loads(text, parse_float=str, parse_int=str)
        if not isinstance(payload, dict) or "matrix" not in payload:
            raise ValueError('JSON matrix files need a top-level "matrix" key')
        rows = [[str(x) for x in row] for row in payload["matrix"]]
        return _parse_tokens(rows)
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    return _parse_tokens([ln.split(",") for ln in lines])


def _format_entry(x, digits: int) -> str:
    if isinstance(x, mpf):
        return mp.nstr(x, digits)
    return repr(float(x))


def format_matrix(m, fmt: str, digits: int = 17) -> str:
    m = np.asarray(m)
    if fmt == "json":
        rows = [[_format_entry(x, digits) for x in row] for row in m]
        body = ",\n    ".join("[" + ", ".join(row) + "]" for row in rows)
        return '{"matrix": [\n    ' + body + "\n]}\n"
    return "\n".join(",".join(_format_entry(x, digits) for x in row) for row in m) + "\n"


def write_matrix(path: Path, m, fmt: str, digits: int = 17):
    path.write_text(format_matrix(m, fmt, digits))


# ------------------------------------------------------------------- reports

def _matrix_json(m):
    return [[float(x) for x in row] for row in np.asarray(m)]


def report_json(report, tol: Tolerances) -> dict:
    spec = report.spectrum
    return {
        "schema_version": SCHEMA_VERSION,
        "verdict": report.verdict,
        "generators": [int(k) for k in report.generators],
        "principal_is_generator": report.principal_is_generator,
        "spectrum": {
            "eigenvalues": [
                {"re": float(w.real), "im": float(w.imag)}
                for w in spec.eigenvalues
            ],
            "condition": float(spec.condition),
        },
        "branches": [
            {
                "k": b.k,
                "matrix": _matrix_json(b.log),
                "is_rate": b.is_rate,
                "min_offdiag": b.min_offdiag,
            }
            for b in report.branches
        ],
        "tolerances": {
            "rowsum": tol.rowsum,
            "spectral_class": tol.spectral_class,
            "entry": tol.entry,
            "real": tol.real,
        },
    }


def _print_pretty(doc):
    if doc.get("kind") == "verify":
        status = "ok" if doc["ok"] else "MISMATCH"
        print(f"verify: {status} (max |exp(G) - M| = {doc['max_abs_err']:.3e}, "
              f"tol = {doc['tol']:.3e})")
        return
    print(f"verdict: {doc['verdict']}")
    print(f"generators: {doc['generators']}")
    print(f"principal logarithm is a generator: {doc['principal_is_generator']}")
    eig = doc["spectrum"]["eigenvalues"]
    print("eigenvalues:")
    for w in eig:
        print(f"  {w['re']:+.12e} {w['im']:+.12e}i")
    print("branches:")
    for b in doc["branches"]:
        tag = "rate matrix" if b["is_rate"] else f"min offdiag {b['min_offdiag']:.6g}"
        print(f"  k = {b['k']:+d}: {tag}")


def _emit(doc, pretty: bool):
    if pretty:
        _print_pretty(doc)
    else:
        print(json.dumps(doc, indent=2))


# -------------------------------------------------------------- subcommands

def _cmd_classify(args, tol) -> int:
    try:
        m = read_matrix(args.input, args.format)
        markov = validate_markov(m, tol)
        report = classify(markov, tol)
    except (EmbedLogError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(report_json(report, tol), args.pretty)
    return 0 if report.verdict == "Embeddable" else 1


def _write_set(outdir: Path, stem: str, files: dict, fmt: str, digits: int) -> list:
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, payload in files.items():
        if name.endswith("report"):
            path = outdir / f"{stem}.{name}.json"
            path.write_text(json.dumps(payload, indent=2) + "\n")
        else:
            path = outdir / f"{stem}.{name}.{fmt}"
            write_matrix(path, payload, fmt, digits)
        written.append(path)
    return written


def _generate_example(args, tol, outdir) -> int:
    fam = build_example(args.l, tol)
    report = classify(fam.m, tol)
    with working_precision(fam.m.m):
        generator = cast_like(fam.expected_generator.q, fam.m.m)
        roundtrip = max(
            abs(float(x)) for x in (expm(generator) - fam.m.m).flat
        )
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "example",
        "l": args.l,
        "classification": report_json(report, tol),
        "generator_roundtrip_max_err": roundtrip,
    }
    files = {
        "matrix": fam.m.m,
        "generator": fam.expected_generator.q,
        "report": doc,
    }
    written = _write_set(outdir, f"example_l{args.l}", files, args.format, args.digits)
    print(f"generated family member l={args.l}: generators {doc['classification']['generators']}")
    for p in written:
        print(f"  {p}")
    return 0


def _generate_perturbed(args, tol, outdir) -> int:
    rng = random.Random(args.seed)
    kappa = validated_kappa(args.l, args.kappa)
    count = max(1, args.count)
    for index in range(count):
        delta = sample_delta(rng, kappa, tol)
        witness = certify_witness(args.l, delta, tol)
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": "perturbed",
            "l": args.l,
            "seed": args.seed,
            "index": index,
            "kappa": kappa,
            "delta": [float(x) for x in delta.delta],
            "margins": {
                "generator_min_offdiag": witness.margins.generator_min_offdiag,
                "below_violation": witness.margins.below_violation,
                "above_violation": witness.margins.above_violation,
                "entry_radius": witness.margins.entry_radius,
            },
            "classification": report_json(witness.report, tol),
        }
        generator = next(
            b.log for b in witness.report.branches if b.k == args.l
        )
        stem = f"perturbed_l{args.l}_s{args.seed}"
        if count > 1:
            stem += f"_{index:03d}"
        # enough digits that the written matrix still resolves the branch
        # structure when read back onto the extended carrier
        digits = max(args.digits, working_dps(args.l))
        written = _write_set(
            outdir,
            stem,
            {"matrix": witness.m.m, "generator": generator, "report": doc},
            args.format,
            digits,
        )
        print(
            f"certified witness l={args.l} #{index}: "
            f"margin {witness.margins.generator_min_offdiag:.6f}, "
            f"entry radius {witness.margins.entry_radius:.3e}"
        )
        for p in written:
            print(f"  {p}")
    return 0


def _generate_ssm(args, tol, outdir) -> int:
    weights = tuple(float(w) for w in args.weights.split(","))
    if len(weights) != 3:
        raise ValueError("--weights needs three comma-separated values")
    probe = sample_interior(args.theta, args.k, weights, args.shift, tol)
    # exp(generator) has eigenvalues far below float64 resolution, so run the
    # whole construction on the extended carrier
    dps = 30 + math.ceil(0.4343 * (abs(4 * probe.v[0]) + 4 * abs(probe.v[2])))
    with mp.workdps(dps):
        params = sample_interior(mpf(args.theta), args.k, weights, args.shift, tol)
        principal = build_q(params)
        shifted = GeneratorParams(
            params.theta + 2 * mp.pi * args.k, params.v
        )
        generator = build_q(shifted)
        markov = validate_markov(expm(generator), tol)
        report = classify(markov, tol)
    verdict = cone_check(probe, args.k, tol)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "ssm",
        "theta": args.theta,
        "k": args.k,
        "weights": list(weights),
        "shift": args.shift,
        "v": [float(x) for x in params.v],
        "variety_residual": float(variety_residual(params.v)),
        "cone": {
            "in_P_theta": verdict.in_P_theta,
            "in_C1": verdict.in_C1,
            "in_C2": verdict.in_C2,
            "violated": list(verdict.violated),
            "binding": list(verdict.binding),
        },
        "classification": report_json(report, tol),
    }
    files = {
        "matrix": markov.m,
        "generator": generator,
        "principal": principal,
        "report": doc,
    }
    stem = f"ssm_k{args.k}"
    written = _write_set(outdir, stem, files, args.format, args.digits)
    print(
        f"generated SS pair at theta={args.theta:.6f}, k={args.k}: "
        f"generators {doc['classification']['generators']}"
    )
    for p in written:
        print(f"  {p}")
    return 0


def _cmd_generate(args, tol) -> int:
    outdir = Path(args.output)
    try:
        if args.kind == "example":
            return _generate_example(args, tol, outdir)
        if args.kind == "perturbed":
            return _generate_perturbed(args, tol, outdir)
        return _generate_ssm(args, tol, outdir)
    except (EmbedLogError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _cmd_verify(args, tol) -> int:
    try:
        m = read_matrix(args.input, args.format)
        g = read_matrix(args.generator, args.format)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        rate = validate_rate(g, tol)
    except EmbedLogError as exc:
        print(f"generator is not a rate matrix: {exc}", file=sys.stderr)
        return 1
    with working_precision(m, g):
        target = np.asarray(m)
        q = cast_like(rate.q, target)
        residual = max(abs(float(x)) for x in (expm(q) - target).flat)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "verify",
        "max_abs_err": residual,
        "tol": args.tol,
        "ok": residual <= args.tol,
    }
    _emit(doc, args.pretty)
    if residual > args.tol:
        print(
            f"exp(generator) misses the matrix by {residual:.3e} > {args.tol:.3e}",
            file=sys.stderr,
        )
        return 1
    return 0


def _cmd_branches(args, tol) -> int:
    from .branches import branch_log
    from .linalg import eigendecompose_markov

    try:
        m = read_matrix(args.input, args.format)
        markov = validate_markov(m, tol)
        report = classify(markov, tol)
        spec = report.spectrum
        ks = sorted({b.k for b in report.branches})
        lo, hi = ks[0] - args.window, ks[-1] + args.window
        branches = [branch_log(spec, k, tol) for k in range(lo, hi + 1)]
    except (EmbedLogError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    doc = report_json(report, tol)
    doc["branches"] = [
        {
            "k": b.k,
            "matrix": _matrix_json(b.log),
            "is_rate": b.is_rate,
            "min_offdiag": b.min_offdiag,
        }
        for b in branches
    ]
    _emit(doc, args.pretty)
    return 0


def _cmd_selftest(args, tol) -> int:
    checks = []

    def check(name, fn):
        try:
            fn()
            checks.append((name, True, ""))
        except Exception as exc:  # noqa: BLE001 - report any failure
            checks.append((name, False, str(exc)))

    def worked_pair():
        u = np.array([-5 * math.pi / 2, -5 * math.pi / 4, 5 * math.pi / 2, 0.5, 1.0, 0.5])
        L = build_q(GeneratorParams(math.pi / 2, u))
        R = build_q(GeneratorParams(math.pi / 2 + 2 * math.pi, u))
        Lfix = math.pi / 4 * np.array(
            [[-26, 17, 13, -4], [4, -14, 4, 6], [6, 4, -14, 4], [-4, 13, 17, -26]]
        )
        Rfix = math.pi / 4 * np.array(
            [[-30, 25, 5, 0], [0, -10, 0, 10], [10, 0, -10, 0], [0, 5, 25, -30]]
        )
        assert np.abs(L - Lfix).max() < 1e-12
        assert np.abs(R - Rfix).max() < 1e-12
        assert np.abs(expm(L) - expm(R)).max() < 1e-9

    def flagship():
        fam = build_example(-1, tol)
        report = classify(fam.m, tol)
        assert report.verdict == "Embeddable"
        assert report.generators == (-1,)
        assert not report.principal_is_generator

    def log_displays():
        from .branches import branch_log
        from .linalg import eigendecompose_markov

        fam = build_example(-1, tol)
        spec = eigendecompose_markov(fam.m.m, tol)
        for k in (0, -1):
            got = to_float_matrix(branch_log(spec, k, tol).log)
            assert np.abs(got - closed_form_log(-1, k)).max() < 1e-8

    check("worked SS pair L/R", worked_pair)
    check("flagship classification", flagship)
    check("logarithm displays", log_displays)
    failed = 0
    for name, ok, msg in checks:
        status = "ok" if ok else f"FAIL ({msg})"
        print(f"selftest: {name}: {status}")
        failed += 0 if ok else 1
    return 1 if failed else 0


# --------------------------------------------------------------------- main

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embedlog",
        description="Embeddability of 4x4 Markov matrices via logarithm branches.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="matrix file format (default: by extension)")
        p.add_argument("--pretty", action="store_true",
                       help="human-readable output instead of JSON")

    p_classify = sub.add_parser("classify", help="classify a Markov matrix")
    p_classify.add_argument("--input", "-i", required=True)
    add_common(p_classify)

    p_generate = sub.add_parser("generate", help="generate certified matrices")
    p_generate.add_argument("kind", choices=("example", "perturbed", "ssm"))
    p_generate.add_argument("--l", type=int, default=-1)
    p_generate.add_argument("--seed", type=int, default=0)
    p_generate.add_argument("--kappa", type=float, default=1e-3)
    p_generate.add_argument("--theta", type=float, default=math.pi / 2)
    p_generate.add_argument("--k", type=int, default=1)
    p_generate.add_argument("--weights", default="0.25,0.25,0.5")
    p_generate.add_argument("--shift", type=float, default=1.0)
    p_generate.add_argument("--count", type=int, default=1)
    p_generate.add_argument("--output", "-o", default=".")
    p_generate.add_argument("--digits", type=int, default=17)
    p_generate.add_argument("--format", choices=("csv", "json"), default="csv")

    p_verify = sub.add_parser("verify", help="check a generator against a matrix")
    p_verify.add_argument("--input", "-i", required=True, help="Markov matrix file")
    p_verify.add_argument("--generator", required=True, help="candidate rate matrix file")
    p_verify.add_argument("--tol", type=float, default=5e-9)
    add_common(p_verify)

    p_branches = sub.add_parser("branches", help="dump a window of logarithm branches")
    p_branches.add_argument("--input", "-i", required=True)
    p_branches.add_argument("--window", type=int, default=0,
                            help="extra branches on each side of the classify window")
    add_common(p_branches)

    sub.add_parser("selftest", help="run the built-in fixture regression")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    tol = tolerances_from_env()
    if args.command == "classify":
        return _cmd_classify(args, tol)
    if args.command == "generate":
        return _cmd_generate(args, tol)
    if args.command == "verify":
        return _cmd_verify(args, tol)
    if args.command == "branches":
        return _cmd_branches(args, tol)
    return _cmd_selftest(args, tol)


if __name__ == "__main__":
    raise SystemExit(main())
