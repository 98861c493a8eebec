"""Exact certification of kissing configurations from decimal spherical codes.

A code file lists N points of R^n as decimal literals.  Each literal is read
as the rational it denotes, so point i is an exact vector b_i, and the unit
vector in its direction is sqrt(a_i) b_i with a_i = 1 / (b_i . b_i).  The
inner product of two such unit vectors is sqrt(a_i a_j) (b_i . b_j), a signed
square root of a rational, so the maximal one can be found by exact
comparison.  Only the final arccosh / arccos is done in interval arithmetic.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .geom_bounds import Space, radius_of_max_cos
from .numerics import Interval, ParseError, SqrtRational, rationalize, sqrt_rational_compare


class CodeFormatError(ValueError):
    pass


class DegenerateCodeError(ValueError):
    """Zero vectors, repeated directions, or fewer than two points."""


@dataclass(frozen=True)
class RawCode:
    n: int
    points: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if self.n < 2:
            raise CodeFormatError(f"dimension must be >= 2, got {self.n}")
        if len(self.points) < 2:
            raise CodeFormatError(f"a code needs at least 2 points, got {len(self.points)}")
        for i, p in enumerate(self.points):
            if len(p) != self.n:
                raise CodeFormatError(f"point {i} has {len(p)} coordinates, expected {self.n}")


@dataclass(frozen=True)
class ExactPoint:
    a: Fraction
    b: tuple[Fraction, ...]


@dataclass(frozen=True)
class ExactCode:
    points: tuple[ExactPoint, ...]

    @property
    def n(self) -> int:
        return len(self.points[0].b)

    def __len__(self) -> int:
        return len(self.points)


class CertificateStatus(str, enum.Enum):
    CERTIFIED = "certified"
    # hyperbolic request for a code with t* < 1/2: it is a kissing
    # configuration at every radius, r = 0 included
    EUCLIDEAN_FEASIBLE = "feasible-at-zero"
    # spherical request for a code with t* > 1/2: no radius works
    NOT_FEASIBLE = "not-feasible"


@dataclass(frozen=True)
class CodeCertificate:
    size: int
    n: int
    max_inner_product: SqrtRational
    argmax: tuple[int, int]
    space: Space
    status: CertificateStatus
    hyperbolic_min_radius: Optional[Interval] = None
    spherical_max_radius: Optional[Interval] = None

    @property
    def radius(self) -> Optional[Interval]:
        if self.space is Space.HYPERBOLIC:
            return self.hyperbolic_min_radius
        return self.spherical_max_radius


def load_code(text: str, n: int) -> RawCode:
    tokens = text.split()
    for pos, tok in enumerate(tokens):
        try:
            rationalize(tok)
        except ParseError:
            raise ParseError(f"token {pos + 1} ({tok!r}) is not a decimal literal") from None
    if n < 1:
        raise CodeFormatError(f"dimension must be positive, got {n}")
    if len(tokens) % n:
        raise CodeFormatError(f"{len(tokens)} coordinates do not split into points of dimension {n}")
    points = tuple(tuple(tokens[i:i + n]) for i in range(0, len(tokens), n))
    return RawCode(n, points)


def exactify(raw: RawCode) -> ExactCode:
    out = []
    for i, p in enumerate(raw.points):
        b = tuple(rationalize(x) for x in p)
        norm2 = sum(x * x for x in b)
        if norm2 == 0:
            raise DegenerateCodeError(f"point {i} is the zero vector")
        out.append(ExactPoint(1 / norm2, b))
    return ExactCode(tuple(out))


def inner_product(code: ExactCode, i: int, j: int) -> SqrtRational:
    """<x_i, x_j> = sqrt(a_i a_j) (b_i . b_j), exactly."""
    p, q = code.points[i], code.points[j]
    dot = sum(x * y for x, y in zip(p.b, q.b))
    return SqrtRational.from_signed_square((dot > 0) - (dot < 0), p.a * q.a * dot * dot)


def max_inner_product(code: ExactCode) -> tuple[SqrtRational, tuple[int, int]]:
    """Exact maximum over pairs i < j; ties go to the first pair in index order."""
    if len(code) < 2:
        raise DegenerateCodeError("a code needs at least 2 points")
    best, arg = None, (0, 1)
    for i in range(len(code)):
        for j in range(i + 1, len(code)):
            t = inner_product(code, i, j)
            if best is None or sqrt_rational_compare(t, best) > 0:
                best, arg = t, (i, j)
    return best, arg


def certify(code: ExactCode, space: Union[Space, str]) -> CodeCertificate:
    space = Space.parse(space)
    if space is Space.EUCLIDEAN:
        raise ValueError("certification needs space H or S")
    t, arg = max_inner_product(code)
    one = SqrtRational.from_rational(1)
    half = SqrtRational.from_rational(Fraction(1, 2))
    if t == one:
        raise DegenerateCodeError(f"points {arg[0]} and {arg[1]} have the same direction")
    hyp = sph = None
    if not t < half:
        hyp = radius_of_max_cos(Space.HYPERBOLIC, t)
    if not t > half:
        sph = radius_of_max_cos(Space.SPHERICAL, t)
    if space is Space.HYPERBOLIC:
        status = CertificateStatus.CERTIFIED if hyp is not None else CertificateStatus.EUCLIDEAN_FEASIBLE
        if hyp is None:
            hyp = Interval(0.0, 0.0)
    else:
        status = CertificateStatus.CERTIFIED if sph is not None else CertificateStatus.NOT_FEASIBLE
    return CodeCertificate(len(code), code.n, t, arg, space, status, hyp, sph)


def certify_text(text: str, n: int, space: Union[Space, str]) -> CodeCertificate:
    return certify(exactify(load_code(text, n)), space)


def feasible_at(cert: CodeCertificate, r: float) -> bool:
    """Re-check in interval arithmetic that the code is a kissing configuration at radius r.

    Hyperbolic: 1 - 1/(1 + cosh 2r) >= t*.  Spherical: 1 - 1/(1 + cos 2r) >= t*.
    Returns False when the enclosures cannot decide.
    """
    two_r = Interval.from_value(Fraction(r)) * 2
    if cert.space is Space.HYPERBOLIC:
        c = 1 - 1 / (1 + two_r.cosh())
    else:
        denom = 1 + two_r.cos()
        if denom.lo <= 0:
            return False
        c = 1 - 1 / denom
    return c.lo >= cert.max_inner_product.to_interval().hi


# ------------------------------------------------------------- document


def _interval_lines(prefix: str, iv: Optional[Interval]) -> list[str]:
    if iv is None:
        return [f"{prefix}: absent"]
    lo, hi = iv.hex()
    return [f"{prefix}_lo_hex: {lo}", f"{prefix}_hi_hex: {hi}",
            f"{prefix}_lo: {iv.lo!r}", f"{prefix}_hi: {iv.hi!r}"]


def certificate_document(cert: CodeCertificate) -> str:
    t = cert.max_inner_product
    lines = [
        f"space: {cert.space.value}",
        f"status: {cert.status.value}",
        f"size: {cert.size}",
        f"dimension: {cert.n}",
        f"max_inner_product_sign: {t.sign}",
        f"max_inner_product_square_num: {t.square.numerator}",
        f"max_inner_product_square_den: {t.square.denominator}",
        f"max_inner_product_approx: {float(t)!r}",
        f"argmax: {cert.argmax[0]} {cert.argmax[1]}",
    ]
    lines += _interval_lines("hyperbolic_min_radius", cert.hyperbolic_min_radius)
    lines += _interval_lines("spherical_max_radius", cert.spherical_max_radius)
    return "\n".join(lines) + "\n"


def parse_certificate_document(text: str) -> CodeCertificate:
    fields = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise CodeFormatError(f"malformed certificate line {line!r}")
        fields[key.strip()] = value.strip()

    def interval(prefix):
        if fields.get(prefix) == "absent":
            return None
        return Interval(float.fromhex(fields[f"{prefix}_lo_hex"]), float.fromhex(fields[f"{prefix}_hi_hex"]))

    t = SqrtRational.from_signed_square(
        int(fields["max_inner_product_sign"]),
        Fraction(int(fields["max_inner_product_square_num"]), int(fields["max_inner_product_square_den"])))
    i, j = (int(x) for x in fields["argmax"].split())
    return CodeCertificate(int(fields["size"]), int(fields["dimension"]), t, (i, j),
                           Space.parse(fields["space"]), CertificateStatus(fields["status"]),
                           interval("hyperbolic_min_radius"), interval("spherical_max_radius"))


def unit_norm_holds(code: ExactCode) -> bool:
    """a_i (b_i . b_i) = 1, checked as an integer identity."""
    for p in code.points:
        norm2 = sum(x * x for x in p.b)
        prod = p.a * norm2
        if prod.numerator != prod.denominator:
            return False
    return True


def float_max_inner_product(points: Sequence[Sequence[float]]) -> float:
    unit = []
    for p in points:
        norm = math.sqrt(sum(x * x for x in p))
        unit.append([x / norm for x in p])
    return max(sum(x * y for x, y in zip(unit[i], unit[j]))
               for i in range(len(unit)) for j in range(i + 1, len(unit)))
