"""Command-line entry point ``kissing``.

Exit codes: 0 success, 2 usage error, 3 domain or validity error, 4 solver failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import geom_bounds as gb
from .certifier import (CertificateStatus, CodeFormatError, DegenerateCodeError, certificate_document,
                        certify_text)
from .geom_bounds import Space
from .numerics import DomainError, ParseError
from .sdp_model import SdpModelError, build_sdp, problem_summary, write_sdpa
from .sdp_solver import SolverSettings
from .tables import compute_table, jump_table, sdp_bound

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_SOLVER = 0, 2, 3, 4
MAX_DEGREE = 12


class UsageError(Exception):
    pass


class SolverFailure(Exception):
    pass


def _records(rows: list[dict]) -> str:
    return "\n".join("\n".join(f"{k}: {v}" for k, v in row.items()) + "\n" for row in rows)


def _human(rows: list[dict]) -> str:
    if not rows:
        return ""
    keys = list(rows[0])
    cells = [[str(r.get(k, "")) for k in keys] for r in rows]
    widths = [max(len(k), *(len(c[i]) for c in cells)) for i, k in enumerate(keys)]
    lines = ["  ".join(k.ljust(w) for k, w in zip(keys, widths)).rstrip()]
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines) + "\n"


def _emit(rows: list[dict], fmt: str) -> None:
    sys.stdout.write(_records(rows) if fmt == "record" else _human(rows))


def _f6(x: Optional[float]) -> str:
    return "-" if x is None else f"{x:.6f}"


# ---------------------------------------------------------------- commands


def _bound_row(rep: gb.BoundReport) -> dict:
    return {"space": rep.query.space.value, "dim": rep.query.n, "radius": repr(rep.query.r),
            "method": rep.method, "direction": rep.direction, "value": _f6(rep.value),
            "rigorous": "yes" if rep.rigorous else "no"}


def cmd_bounds(args) -> int:
    space, n, r = Space.parse(args.space), args.dim, args.radius
    reports = []
    if space is Space.EUCLIDEAN:
        reports = list(gb.euclidean_bounds(n))
    elif args.method == "asymptotic":
        if space is not Space.HYPERBOLIC:
            raise UsageError("asymptotic method is defined for space H only")
        value = gb.asymptotic_hyp(n, r)
        reports = [gb.BoundReport(gb.BoundQuery(space, n, r), value, "asymptotic", "geometric")]
    elif space is Space.HYPERBOLIC:
        reports = [gb.lower_bound_hyp(n, r), gb.upper_bound_hyp(n, r)]
    elif r > gb.PI_3 + gb.RADIUS_SLACK:
        reports = [gb.limiting_kappa_sph(n, r)]
    else:
        reports = [gb.lower_bound_sph(n, r), gb.upper_bound_sph(n, r)]
    _emit([_bound_row(rep) for rep in reports], args.format)
    return EXIT_OK


def cmd_sdp(args) -> int:
    space = Space.parse(args.space)
    if space is Space.EUCLIDEAN:
        raise UsageError("sdp needs space H or S")
    if args.dim < 3:
        raise UsageError("sdp needs --dim >= 3")
    if args.degree < 2:
        raise UsageError("sdp needs --degree >= 2")
    if space is Space.SPHERICAL and args.radius >= math.pi / 2:
        raise DomainError(f"spherical sdp needs r < pi/2, got {args.radius}")
    settings = SolverSettings(max_iterations=args.max_iterations)
    run = sdp_bound(space, args.dim, args.radius, args.degree, settings)
    s, rep = run.solution, run.report
    row = {"space": space.value, "dim": args.dim, "radius": repr(args.radius), "degree": args.degree,
           "cos_theta": repr(run.cos_theta), "status": s.status, "objective": f"{s.objective:.10f}",
           "dual_objective": f"{s.dual_objective:.10f}", "iterations": s.iterations,
           "max_residual": f"{rep.max_residual:.3e}", "min_eigenvalue": f"{rep.min_eigenvalue:.3e}",
           "verification": rep.label, "wall_time": f"{s.wall_time:.2f}"}
    if args.format == "record":
        for name, eig in rep.block_min_eigenvalues.items():
            row[f"min_eig_{name}"] = f"{eig:.3e}"
    _emit([row], args.format)
    if not args.no_verify and run.bound is None:
        for f in rep.failures:
            print(f"kissing: {f}", file=sys.stderr)
        raise SolverFailure(f"solver status {s.status}; no verified bound (best iterate shown)")
    return EXIT_OK


def cmd_certify(args) -> int:
    try:
        text = Path(args.file).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
    cert = certify_text(text, args.dim, args.space)
    sys.stdout.write(certificate_document(cert))
    if cert.status is CertificateStatus.NOT_FEASIBLE:
        print("kissing: the code is not a kissing configuration for any spherical radius", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


def cmd_jumps(args) -> int:
    rows = [{"jump": f"{j.source}->{j.target}", "closed_form": j.closed_form,
             "r_lo": repr(j.r_exact.lo), "r_hi": repr(j.r_exact.hi), "reference": j.approx}
            for j in jump_table()]
    _emit(rows, args.format)
    return EXIT_OK


def cmd_table(args) -> int:
    if args.which == "S3":
        return cmd_jumps(args)
    degree = None
    if args.sdp:
        degree = args.degree
        if not 2 <= degree <= MAX_DEGREE:
            raise UsageError(f"--degree must be in [2, {MAX_DEGREE}]")
    rows = []
    for row in compute_table(args.which, degree):
        ref = row.reference
        out = {"r": ref.r, "theoretical_lower": _f6(row.theoretical_lower),
               "construction_lower": "incomplete" if row.construction_lower is None else row.construction_lower}
        if degree is not None:
            out["sdp"] = _f6(row.sdp)
        out.update({"ref_theoretical_lower": ref.theoretical_lower, "ref_construction_lower": ref.construction_lower,
                    "ref_sdp": ref.sdp_reference, "ref_levenshtein": ref.levenshtein,
                    "ref_coxeter": ref.coxeter or "*", "flags": ",".join(row.flags) or "-"})
        rows.append(out)
    if args.format == "human":
        print(f"# {args.which}: ref_* columns are reference values (not computed)")
    _emit(rows, args.format)
    return EXIT_OK


def cmd_export_sdp(args) -> int:
    space = Space.parse(args.space)
    if space is Space.EUCLIDEAN:
        raise UsageError("export-sdp needs space H or S")
    cos_theta = gb.cos_theta_of_radius(space, args.radius).cos_theta
    p = build_sdp(args.dim, cos_theta, args.degree)
    if args.output == "-":
        write_sdpa(p, sys.stdout)
    else:
        with open(args.output, "w") as fh:
            write_sdpa(p, fh)
        summary = problem_summary(p)
        print(f"wrote {args.output}: {summary['constraints']} constraints, {len(summary['blocks'])} blocks",
              file=sys.stderr)
    return EXIT_OK


# ------------------------------------------------------------------ parser


def _nonneg(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value >= 0 or math.isinf(value):
        raise argparse.ArgumentTypeError(f"radius must be a finite number >= 0, got {text}")
    return value


def _space(text: str) -> Space:
    try:
        return Space.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "record"), default="human",
                        help="aligned text or key: value records")
    ap = argparse.ArgumentParser(prog="kissing", description="Bounds on hyperbolic and spherical kissing numbers.")
    sub = ap.add_subparsers(dest="command", required=True)

    def geometry(p, need_radius=True):
        p.add_argument("--space", type=_space, required=True, help="H, S or E")
        p.add_argument("--dim", type=int, required=True)
        p.add_argument("--radius", type=_nonneg, required=need_radius, default=0.0)

    p = sub.add_parser("bounds", parents=[common], help="closed-form bounds at one radius")
    geometry(p)
    p.add_argument("--method", choices=("geometric", "asymptotic"), default="geometric")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sdp", parents=[common], help="solve the three-point SDP")
    geometry(p)
    p.add_argument("--degree", type=int, default=8)
    p.add_argument("--max-iterations", type=int, default=200)
    p.add_argument("--no-verify", action="store_true", help="report without failing on an unverified result")
    p.set_defaults(func=cmd_sdp)

    p = sub.add_parser("certify", parents=[common], help="certify a decimal spherical code")
    p.add_argument("file")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--space", type=_space, required=True)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("table", parents=[common], help="reproduce a reference table")
    p.add_argument("which", choices=("H3", "H4", "S3", "S4"))
    p.add_argument("--sdp", action="store_true", help="also compute the SDP column")
    p.add_argument("--degree", type=int, default=8)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("jumps", parents=[common], help="jump radii of k_S(3, r)")
    p.set_defaults(func=cmd_jumps)

    p = sub.add_parser("export-sdp", parents=[common], help="write the SDP in SDPA sparse format")
    geometry(p)
    p.add_argument("--degree", type=int, default=8)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_export_sdp)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"kissing: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        sys.stderr.close()
        return EXIT_OK
    except SolverFailure as exc:
        print(f"kissing: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (gb.OutOfValidityError, gb.DegenerateRadiusError, gb.UnsupportedDimensionError, DomainError,
            ParseError, CodeFormatError, DegenerateCodeError, SdpModelError, ValueError) as exc:
        print(f"kissing: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
