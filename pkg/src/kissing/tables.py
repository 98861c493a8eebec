"""Reference tables, jump radii of k_S(3, r), and bundled-fixture lookup.

Reference columns are transcribed as printed and never recomputed; only the
theoretical lower bound, the construction lower bound and (on request) the
SDP bound are computed.
"""
from __future__ import annotations

import json
import math
import os
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Optional, Union

from .certifier import CodeCertificate, certify_text
from .geom_bounds import Space, cos_theta_of_radius, lower_bound_hyp, lower_bound_sph
from .numerics import PI, Interval, interval_eval
from .sdp_model import SdpSolution, VerificationReport, bound_from_solution, build_sdp, verify_solution
from .sdp_solver import SolverSettings, solve

FIXTURES_ENV = "KISSING_FIXTURES"
DEFAULT_FIXTURES = Path(__file__).resolve().parent / "fixtures"

# a code counts for a row when its certified radius is this close to the row
# radius (printed radii are rounded to 13-14 digits)
ROW_SLACK = 1e-9
THEORETICAL_TOL = 5e-6


@dataclass(frozen=True)
class ReferenceRow:
    table: str
    r: str
    theoretical_lower: str
    construction_lower: int
    sdp_reference: str
    levenshtein: str
    coxeter: Optional[str]

    @property
    def radius(self) -> float:
        return parse_reference(self.r)


def parse_reference(text: str) -> float:
    """Value of a transcribed cell: a decimal, ``pi/k``, or ``a+b*10^-k``."""
    m = re.fullmatch(r"pi/(\d+)", text)
    if m:
        return math.pi / int(m.group(1))
    m = re.fullmatch(r"([\d.]+)([+-])(?:([\d.]+)\*)?10\^-(\d+)", text)
    if m:
        head, sign, coef, exp = m.groups()
        tail = float(coef or 1) * 10.0 ** -int(exp)
        return float(head) + (tail if sign == "+" else -tail)
    return float(text)


def _rows(table: str, data: str) -> tuple[ReferenceRow, ...]:
    rows = []
    for line in data.strip().splitlines():
        r, lower, cons, sdp, lev, cox = line.split()
        rows.append(ReferenceRow(table, r, lower, int(cons), sdp, lev, None if cox == "*" else cox))
    return tuple(rows)


H3_ROWS = _rows("H3", """
0               4       12 12.368591 13.2857 13.3973
0.3007680932244 4.37289 13 13.66695  14.6365 14.7591
0.3741678937820 4.58663 14 14.57930  15.4829 15.5389
0.4603413898301 4.90925 15 15.76145  16.6843 16.7150
0.5150988762761 5.15856 16 16.63748  17.5619 17.6233
0.5575414271933 5.37771 17 17.39631  18.3659 18.4214
0.6117193853329 5.69307 18 18.57836  19.5957 19.5694
0.6752402229782 6.1184  19 20.12475  21.1343 21.1170
0.6839781903772 6.18194 20 20.43374  21.3570 21.3482
0.7441766799717 6.65554 21 21.88751  23.0631 23.0705
0.7727858684533 6.90384 22 22.81495  24.0041 23.9732
0.8064065300517 7.21623 23 24.08326  25.2137 25.1087
0.8070321648835 7.22226 24 24.32215  25.2348 25.1306
""")

H4_ROWS = _rows("H4", """
0               5.11506 24 24.05691 26      26.4420
0.2803065634764 5.70802 25 28.36959 29.9154 29.9757
0.2937915284847 5.76935 26 28.54566 30.2755 30.3417
0.3533981811745 6.08306 27 30.35228 32.0432 32.2152
0.4029707622959 6.40115 29 32.37496 33.8969 34.1172
0.4361470369242 6.64597 30 33.73058 35.3805 35.5826
""")

S4_ROWS = _rows("S4", """
0                  5.11506 24 24.056903  26          26.4420
0.064960281031     5.0847  22 24.25996   25.8154     26.2614
0.135              4.98499 21 23.698995  25.2181     25.6681
0.2348312007464    4.72978 21 22.343847  23.7439     24.1511
0.315              4.43922 20 20.975086  22.1389     22.4263
0.3478604258810    4.30116 20 20.418654  21.3944     21.6076
0.3743605576995    4.18278 18 20.039183  20.7611     20.9061
0.393              4.09608 17 19.493801  20.2984     20.3925
0.3966966954949    4.07857 17 19.336889  20.2050     20.2888
0.439              3.87137 16 17.528082  18.7761     19.0626
0.44269036900123   3.85274 16 17.387671  18.6476     18.9525
0.49               3.60742 15 15.92363   17.0608     17.5025
0.49969620570817   3.55583 15 15.650850  16.7492     17.1977
0.53               3.3923  14 14.877753  15.8038     16.2314
0.54100885503509   3.33217 14 14.632380  15.4706     15.8766
0.55183            3.27277 13 14.402314  15.1480     15.5262
0.55558271937072   3.2521  13 14.313536  15.0373     15.4043
0.595              3.03363 12 12.970691  13.8506     14.1160
0.61547970865277   2.91955 12 12.302214  13+7*10^-10 13.4436
0.6299             2.8392  11 11.902489  12.4471     12.9700
0.63337378793619   2.81986 11 11.780786  12.3190     12.8560
0.653              2.71075 10 10.99092   11.6302     12.2128
0.68471920300192   2.53556 10 10.000004  10.6250     11.17937
0.6847193          2.53556 9  9.99999994 10.624998   11.17936
0.68811601660265   2.51692 9  9.8530813  10.5242     11.0693
0.71               2.3976  8  8.9684325  9.9017      10.3642
0.785398163397449  2       8  8.0000293  8-10^-14    8.00008
0.78539828         2       5  7.9999982  7.999994    8.00009
0.88607712356268   1.52096 5  5.008075   5+5*10^-9   5.00003
0.9                1.46106 4  4.5958861  4.4014      4.5586
0.91173828638360   1.4121  4  4.0000002  4+2*10^-7   4.0002
0.9206             1.37591 3  3.74363    3.7436      *
0.95531661577188   1.2431  3  3+5*10^-8  3+4*10^-8   *
pi/3               1       2  2+10^-15   2           *
""")

REFERENCE_TABLES = {"H3": H3_ROWS, "H4": H4_ROWS, "S4": S4_ROWS}
TABLE_GEOMETRY = {"H3": (Space.HYPERBOLIC, 3), "H4": (Space.HYPERBOLIC, 4), "S4": (Space.SPHERICAL, 4)}


# ------------------------------------------------------------------ jumps


@dataclass(frozen=True)
class JumpSpec:
    source: int
    target: int
    closed_form: str
    approx: str
    r_exact: Interval


def _sextic(t: Fraction) -> Fraction:
    u = t * t
    return ((16 * u - 44) * u + 34) * u - 7


def sextic_root(lo: Fraction = Fraction(866, 1000), hi: Fraction = Fraction(952, 1000),
                grid: int = 200, width: Fraction = Fraction(1, 10 ** 14)) -> tuple[Fraction, Fraction]:
    """Unique root of 16 t^6 - 44 t^4 + 34 t^2 - 7 with arccos t in (pi/10, pi/6).

    The default window brackets [cos(pi/6), cos(pi/10)].  A sign change is
    located on a rational grid and then bisected exactly.
    """
    step = (hi - lo) / grid
    brackets = []
    for k in range(grid):
        a, b = lo + k * step, lo + (k + 1) * step
        fa, fb = _sextic(a), _sextic(b)
        if fa == 0:
            return a, a
        if fa * fb < 0:
            brackets.append((a, b))
    if len(brackets) != 1:
        raise ArithmeticError(f"expected one sign change, found {len(brackets)}")
    a, b = brackets[0]
    while b - a > width:
        m = (a + b) / 2
        fm = _sextic(m)
        if fm == 0:
            return m, m
        if (fm < 0) == (_sextic(a) < 0):
            a = m
        else:
            b = m
    return a, b


def _jump_table() -> tuple[JumpSpec, ...]:
    t_lo, t_hi = sextic_root()
    tau = Interval(Interval.from_value(t_lo).lo, Interval.from_value(t_hi).hi)
    # csc(pi/18) = 1 / cos(pi/2 - pi/18)
    forms = [
        (12, 10, "pi/10", "0.3141592653590", interval_eval("pi / 10")),
        (10, 9, "arccos(tau), 16 tau^6 - 44 tau^4 + 34 tau^2 - 7 = 0", "0.4122234203273", tau.arccos()),
        (9, 8, "pi/6", "0.5235987755983", interval_eval("pi / 6")),
        (8, 7, "arcsec(2 sqrt 2)/2", "0.6047146014441", interval_eval("arccos(1 / (2 * sqrt(2))) / 2")),
        (7, 6, "pi/4 + arccsc(2 - csc(pi/18))/2", "0.6507545374483",
         interval_eval("pi / 4 + arcsin(1 / (2 - 1 / cos(4 * pi / 9))) / 2")),
        (6, 4, "pi/4", "0.7853981633974", interval_eval("pi / 4")),
        (4, 3, "arccos(-1/4)/2", "0.9117382909685", interval_eval("arccos(-1 / 4) / 2")),
        (3, 2, "arccos(-1/3)/2", "0.9553166181245", interval_eval("arccos(-1 / 3) / 2")),
        (2, 1, "pi/3", "1.0471975511966", interval_eval("pi / 3")),
        (1, 0, "pi", "3.1415926535898", PI),
    ]
    return tuple(JumpSpec(*f) for f in forms)


@lru_cache(maxsize=1)
def jump_table() -> tuple[JumpSpec, ...]:
    return _jump_table()


# --------------------------------------------------------------- fixtures


def fixtures_dir() -> Path:
    env = os.environ.get(FIXTURES_ENV)
    return Path(env) if env else DEFAULT_FIXTURES


def fixture_manifest(directory: Optional[Path] = None) -> dict[str, dict]:
    """``{file name: {"dim": n, "size": N}}``; names like ``x-3-13.txt`` are read without a manifest."""
    directory = directory or fixtures_dir()
    path = directory / "manifest.json"
    if path.exists():
        return json.loads(path.read_text())
    out = {}
    for f in sorted(directory.glob("*.txt")):
        m = re.fullmatch(r".*-(\d+)-(\d+)\.txt", f.name)
        if m:
            out[f.name] = {"dim": int(m.group(1)), "size": int(m.group(2))}
    return out


def fixture_space(name: str) -> Space:
    """Space a bundled code is meant for: packings are hyperbolic, the rest spherical."""
    return Space.HYPERBOLIC if name.startswith("pack-") else Space.SPHERICAL


def load_fixture_certificates(space: Union[Space, str], n: int,
                              directory: Optional[Path] = None) -> list[tuple[str, CodeCertificate]]:
    directory = directory or fixtures_dir()
    space = Space.parse(space)
    out = []
    for name, info in fixture_manifest(directory).items():
        if info["dim"] != n or not (directory / name).exists():
            continue
        out.append((name, certify_text((directory / name).read_text(), n, space)))
    return out


def _fits(cert: CodeCertificate, r: float) -> bool:
    rad = cert.radius
    if rad is None:
        return False
    if cert.space is Space.HYPERBOLIC:
        return rad.lo <= r + ROW_SLACK
    return rad.hi >= r - ROW_SLACK


def construction_lower(certs: list[tuple[str, CodeCertificate]], r: float) -> Optional[int]:
    sizes = [c.size for _, c in certs if _fits(c, r)]
    return max(sizes) if sizes else None


# --------------------------------------------------------------------- SDP


@dataclass
class SdpRun:
    space: Space
    n: int
    r: float
    degree: int
    cos_theta: float
    solution: SdpSolution
    report: VerificationReport

    @property
    def bound(self) -> Optional[float]:
        return self.report.objective if self.report.passed and self.solution.status in ("optimal", "near_optimal") else None


def sdp_bound(space: Union[Space, str], n: int, r: float, degree: int,
              settings: Optional[SolverSettings] = None, cos_theta: Optional[float] = None) -> SdpRun:
    space = Space.parse(space)
    if cos_theta is None:
        cos_theta = cos_theta_of_radius(space, r).cos_theta
    p = build_sdp(n, cos_theta, degree)
    s = solve(p, settings or SolverSettings())
    report = verify_solution(p, s)
    if s.status in ("optimal", "near_optimal"):
        bound_from_solution(p, s)
    return SdpRun(space, n, r, degree, cos_theta, s, report)


# ------------------------------------------------------------------- rows


@dataclass
class TableRow:
    reference: ReferenceRow
    theoretical_lower: float
    construction_lower: Optional[int]
    sdp: Optional[float] = None
    flags: tuple[str, ...] = ()

    @property
    def incomplete(self) -> bool:
        return self.construction_lower is None


def theoretical_lower(space: Space, n: int, r: float) -> float:
    if space is Space.HYPERBOLIC:
        return lower_bound_hyp(n, r).value
    return lower_bound_sph(n, r).value


def compute_table(which: str, degree: Optional[int] = None,
                  directory: Optional[Path] = None) -> list[TableRow]:
    space, n = TABLE_GEOMETRY[which]
    certs = load_fixture_certificates(space, n, directory)
    rows = []
    for ref in REFERENCE_TABLES[which]:
        r = ref.radius
        lower = theoretical_lower(space, n, r)
        cons = construction_lower(certs, r)
        flags = []
        if abs(lower - float(ref.theoretical_lower)) > THEORETICAL_TOL:
            flags.append("theoretical_lower")
        if cons is None:
            flags.append("incomplete")
        elif cons != ref.construction_lower:
            flags.append("construction_lower")
        sdp = None
        if degree is not None:
            sdp = sdp_bound(space, n, r, degree).bound
            if sdp is None:
                flags.append("sdp_unverified")
            elif sdp < ref.construction_lower - 1e-6:
                flags.append("sdp_below_construction")
        rows.append(TableRow(ref, lower, cons, sdp, tuple(flags)))
    return rows
