"""Closed-form bounds on the hyperbolic and spherical kissing functions.

Every bound is a ratio of beta integrals with parameters ((n-1)/2, 1/2): the
fraction of a sphere covered by one cap is ``B(sin^2 a; .,.) / (2 B(.,.))``
for a cap of angular radius ``a <= pi/2``.  The upper bounds pack caps of
half-angle ``theta`` with ``sin theta = sech(r)/2`` (hyperbolic) or
``sec(r)/2`` (spherical); the lower bounds cover with caps of radius
``2 theta``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .numerics import Interval, SqrtRational
from .special_functions import beta, incomplete_beta


class Space(str, enum.Enum):
    HYPERBOLIC = "H"
    SPHERICAL = "S"
    EUCLIDEAN = "E"

    @classmethod
    def parse(cls, text: "str | Space") -> "Space":
        if isinstance(text, Space):
            return text
        key = text.strip().upper()
        aliases = {"H": cls.HYPERBOLIC, "HYPERBOLIC": cls.HYPERBOLIC,
                   "S": cls.SPHERICAL, "SPHERICAL": cls.SPHERICAL,
                   "E": cls.EUCLIDEAN, "EUCLIDEAN": cls.EUCLIDEAN, "R": cls.EUCLIDEAN}
        if key not in aliases:
            raise ValueError(f"unknown space {text!r}; use H, S or E")
        return aliases[key]


class OutOfValidityError(ValueError):
    """The requested radius lies outside the window where a formula holds."""


class DegenerateRadiusError(ValueError):
    pass


class UnsupportedDimensionError(ValueError):
    pass


# radii this close above pi/3 are treated as pi/3 (decimal renderings of pi/3
# round up past the double nearest to it)
RADIUS_SLACK = 1e-12
PI_3 = math.pi / 3
PI_4 = math.pi / 4


@dataclass(frozen=True)
class BoundQuery:
    space: Space
    n: int
    r: float = 0.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"dimension must be >= 2, got {self.n}")
        if self.r < 0:
            raise ValueError(f"radius must be >= 0, got {self.r}")
        if self.space is Space.SPHERICAL and self.r > math.pi + RADIUS_SLACK:
            raise ValueError(f"spherical radius must be <= pi, got {self.r}")


@dataclass(frozen=True)
class BoundReport:
    query: BoundQuery
    value: float
    direction: str  # upper | lower | exact | asymptotic
    method: str  # geometric | sdp | construction | reference | limiting
    rigorous: bool = False
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("bound value must be non-negative")
        if self.direction == "exact" and self.method != "limiting":
            raise ValueError("only limiting cases produce exact values")


@dataclass(frozen=True)
class AngleConversion:
    """Cosine of the minimal angular separation between kissing neighbours.

    ``theta`` is None when ``cos_theta < -1``: no second neighbour fits.
    """

    cos_theta: float
    theta: Optional[float]


DENSITY_TABLE: dict[int, float] = {
    1: 1.0,
    2: math.pi / math.sqrt(12),
    3: math.pi / math.sqrt(18),
    8: math.pi ** 4 / 384,
    24: math.pi ** 12 / math.factorial(12),
}

# lim_{r -> 0} kappa_S(n, r); reference metadata only, never a computed bound
SMALL_RADIUS_LIMIT: dict[int, tuple[int, str]] = {
    2: (5, "known"),
    3: (12, "known"),
    4: (22, "conjectural"),
}


def cos_theta_of_radius(space: Union[Space, str], r: float) -> AngleConversion:
    space = Space.parse(space)
    if r < 0:
        raise ValueError(f"radius must be >= 0, got {r}")
    if space is Space.EUCLIDEAN:
        c = 0.5
    elif space is Space.HYPERBOLIC:
        c = 1.0 - 1.0 / (1.0 + math.cosh(2 * r))
    else:
        if r > math.pi / 2:
            raise OutOfValidityError(f"spherical radius {r} exceeds pi/2")
        if PI_3 < r <= PI_3 + RADIUS_SLACK:
            r = PI_3
        denom = 1.0 + math.cos(2 * r)
        if denom <= 0.0:
            raise DegenerateRadiusError(
                "at r = pi/2 there is no code constraint; use limiting_kappa_sph")
        c = 1.0 - 1.0 / denom
    theta = math.acos(max(-1.0, min(1.0, c))) if c >= -1.0 - 1e-15 else None
    return AngleConversion(c, theta)


def radius_of_max_cos(space: Union[Space, str], t) -> Interval:
    """Enclose the radius whose neighbour cosine equals ``t``.

    Hyperbolic: the least ``r`` with ``1 - 1/(1 + cosh 2r) >= t``, for t in [1/2, 1).
    Spherical: the greatest ``r`` with ``1 - 1/(1 + cos 2r) >= t``, for t in [-1, 1/2].
    """
    space = Space.parse(space)
    if not isinstance(t, SqrtRational):
        t = SqrtRational.from_rational(Fraction(t))
    half = SqrtRational.from_rational(Fraction(1, 2))
    one = SqrtRational.from_rational(1)
    if space is Space.HYPERBOLIC:
        if t < half or not t < one:
            raise ValueError(f"hyperbolic radius needs t in [1/2, 1), got t = {t}")
        c = _ratio(t).intersect(Interval(1.0, math.inf))
        return c.arccosh() * 0.5
    if space is Space.SPHERICAL:
        if t > half or t < -one:
            raise ValueError(f"spherical radius needs t in [-1, 1/2], got t = {t}")
        c = _ratio(t).intersect(Interval(-1.0, 1.0))
        return c.arccos() * 0.5
    raise ValueError("Euclidean space has no radius parameter")


def _ratio(t: SqrtRational) -> Interval:
    """Enclosure of t / (1 - t)."""
    if t.is_rational():
        q = t.as_rational()
        return Interval.from_value(q / (1 - q))
    ti = t.to_interval()
    return ti / (1 - ti)


def _params(n: int) -> tuple[float, float]:
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    return (n - 1) / 2, 0.5


def _cap_ratio(n: int, x: float) -> float:
    y, z = _params(n)
    # B(x; y, 1/2) has a square-root singularity at x = 1, so a rounding error
    # of one ulp there costs 1e-8 in the ratio; snap such arguments to 1
    x = 1.0 if x >= 1.0 - 8 * 2.0 ** -53 else max(0.0, x)
    return 2 * beta(y, z) / incomplete_beta(x, y, z)


def _check_radius(r: float) -> None:
    if r < 0:
        raise ValueError(f"radius must be >= 0, got {r}")


def upper_bound_hyp(n: int, r: float) -> BoundReport:
    _check_radius(r)
    s = 1 / math.cosh(r) ** 2
    return BoundReport(BoundQuery(Space.HYPERBOLIC, n, r), _cap_ratio(n, s / 4), "upper", "geometric")


def lower_bound_hyp(n: int, r: float) -> BoundReport:
    _check_radius(r)
    s = 1 / math.cosh(r) ** 2
    return BoundReport(BoundQuery(Space.HYPERBOLIC, n, r), _cap_ratio(n, s - s * s / 4), "lower", "geometric")


def _spherical_radius(r: float) -> float:
    _check_radius(r)
    if r > PI_3 + RADIUS_SLACK:
        raise OutOfValidityError(
            f"spherical cap bounds hold for 0 <= r <= pi/3; r = {r} (use limiting_kappa_sph)")
    return min(r, PI_3)


def upper_bound_sph(n: int, r: float) -> BoundReport:
    r = _spherical_radius(r)
    s = 1 / math.cos(r) ** 2
    return BoundReport(BoundQuery(Space.SPHERICAL, n, r), _cap_ratio(n, s / 4), "upper", "geometric")


def lower_bound_sph(n: int, r: float) -> BoundReport:
    r = _spherical_radius(r)
    y, z = _params(n)
    s = 1 / math.cos(r) ** 2
    x = min(1.0, max(0.0, s - s * s / 4))
    full = beta(y, z)
    if r <= PI_4:
        value = 2 * full / incomplete_beta(x, y, z)
    else:
        # the doubled cap passes the equator: its area is the complement
        value = 2 * full / (2 * full - incomplete_beta(x, y, z))
    return BoundReport(BoundQuery(Space.SPHERICAL, n, r), value, "lower", "geometric")


def limiting_kappa_sph(n: int, r: float) -> BoundReport:
    if not PI_3 < r <= math.pi + RADIUS_SLACK:
        raise OutOfValidityError(f"limiting values cover pi/3 < r <= pi; r = {r}")
    value = 1.0 if r <= math.pi / 2 else 0.0
    return BoundReport(BoundQuery(Space.SPHERICAL, n, min(r, math.pi)), value, "exact", "limiting", rigorous=True)


def euclidean_bounds(n: int) -> tuple[BoundReport, BoundReport]:
    q = BoundQuery(Space.EUCLIDEAN, n, 0.0)
    return (BoundReport(q, _cap_ratio(n, 0.75), "lower", "geometric"),
            BoundReport(q, _cap_ratio(n, 0.25), "upper", "geometric"))


def asymptotic_hyp(n: int, r: float) -> float:
    """Leading term (n-1) d_{n-1} B((n-1)/2, 1/2) e^{(n-1) r} of kappa_H(n, r)."""
    m = n - 1
    if m not in DENSITY_TABLE:
        supported = ", ".join(str(k + 1) for k in sorted(DENSITY_TABLE))
        raise UnsupportedDimensionError(
            f"packing density of R^{m} is not tabulated; supported n: {supported}")
    return m * DENSITY_TABLE[m] * beta(m / 2, 0.5) * math.exp(m * r)


def small_radius_limit(n: int) -> Optional[tuple[int, str]]:
    return SMALL_RADIUS_LIMIT.get(n)
