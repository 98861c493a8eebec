"""Exact-rational orthogonal polynomials and the three-point kernel matrices.

``jacobi_p(n, k)`` is the degree-k Jacobi polynomial with both parameters
(n-3)/2, scaled to equal 1 at u = 1 (Chebyshev T_k when n = 2).  From these
we build the trivariate kernels ``q_poly`` and the S_3-averaged matrices
``s_matrix`` whose entries are polynomials in the inner products (u, v, t).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

Exponent = tuple[int, int, int]

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class UniPoly:
    """Univariate polynomial; ``coeffs[i]`` multiplies ``u**i``."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        c = [Fraction(x) for x in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def constant(cls, value) -> "UniPoly":
        return cls((Fraction(value),))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, u):
        acc = 0 * u
        for c in reversed(self.coeffs):
            acc = acc * u + (c if isinstance(u, Fraction) or isinstance(u, int) else float(c))
        return acc

    def __add__(self, other: "UniPoly") -> "UniPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (ZERO,) * (n - len(self.coeffs))
        b = other.coeffs + (ZERO,) * (n - len(other.coeffs))
        return UniPoly(tuple(x + y for x, y in zip(a, b)))

    def __sub__(self, other: "UniPoly") -> "UniPoly":
        return self + other.scale(-1)

    def __mul__(self, other: "UniPoly") -> "UniPoly":
        if not self.coeffs or not other.coeffs:
            return UniPoly(())
        out = [ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return UniPoly(tuple(out))

    def scale(self, factor) -> "UniPoly":
        f = Fraction(factor)
        return UniPoly(tuple(f * c for c in self.coeffs))

    def shift(self, power: int = 1) -> "UniPoly":
        """Multiply by ``u**power``."""
        return UniPoly((ZERO,) * power + self.coeffs)

    def to_tripoly(self, var: int = 0) -> "TriPoly":
        terms = {}
        for i, c in enumerate(self.coeffs):
            if c:
                e = [0, 0, 0]
                e[var] = i
                terms[tuple(e)] = c
        return TriPoly(terms)


class TriPoly:
    """Sparse polynomial in (u, v, t) with rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Exponent, Fraction] | None = None):
        self.terms: dict[Exponent, Fraction] = {
            e: Fraction(c) for e, c in (terms or {}).items() if c != 0}

    @classmethod
    def constant(cls, value) -> "TriPoly":
        return cls({(0, 0, 0): Fraction(value)})

    @classmethod
    def variable(cls, index: int) -> "TriPoly":
        e = [0, 0, 0]
        e[index] = 1
        return cls({tuple(e): ONE})

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, TriPoly):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self) -> str:
        return f"TriPoly({dict(sorted(self.terms.items()))})"

    def __add__(self, other: "TriPoly") -> "TriPoly":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, ZERO) + c
        return TriPoly(out)

    def __sub__(self, other: "TriPoly") -> "TriPoly":
        return self + other.scale(-1)

    def scale(self, factor) -> "TriPoly":
        f = Fraction(factor)
        return TriPoly({e: f * c for e, c in self.terms.items()})

    def __mul__(self, other: "TriPoly") -> "TriPoly":
        out: dict[Exponent, Fraction] = {}
        for (a1, b1, c1), x in self.terms.items():
            for (a2, b2, c2), y in other.terms.items():
                e = (a1 + a2, b1 + b2, c1 + c2)
                out[e] = out.get(e, ZERO) + x * y
        return TriPoly(out)

    def __pow__(self, k: int) -> "TriPoly":
        result = TriPoly.constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __call__(self, u, v, t):
        total = 0
        for (a, b, c), coef in self.terms.items():
            total += (coef if isinstance(u, (int, Fraction)) else float(coef)) * u ** a * v ** b * t ** c
        return total

    def permuted(self, perm: Sequence[int]) -> "TriPoly":
        """Substitute variable ``perm[i]`` for variable ``i``."""
        out: dict[Exponent, Fraction] = {}
        for e, c in self.terms.items():
            f = [0, 0, 0]
            for i in range(3):
                f[perm[i]] += e[i]
            out[tuple(f)] = c
        return TriPoly(out)

    def symmetrized(self) -> "TriPoly":
        """Average over the six permutations of (u, v, t)."""
        out: dict[Exponent, Fraction] = {}
        sixth = Fraction(1, 6)
        for e, c in self.terms.items():
            for p in itertools.permutations(e):
                out[p] = out.get(p, ZERO) + sixth * c
        return TriPoly(out)

    def restrict_uu1(self) -> UniPoly:
        """Substitute (u, v, t) = (u, u, 1)."""
        coeffs: dict[int, Fraction] = {}
        for (a, b, _), c in self.terms.items():
            coeffs[a + b] = coeffs.get(a + b, ZERO) + c
        deg = max(coeffs, default=-1)
        return UniPoly(tuple(coeffs.get(i, ZERO) for i in range(deg + 1)))


U = TriPoly.variable(0)
V = TriPoly.variable(1)
T = TriPoly.variable(2)


@lru_cache(maxsize=None)
def _jacobi_raw(alpha: Fraction, k: int) -> UniPoly:
    """Symmetric Jacobi P_k^(alpha, alpha) in the standard normalization."""
    if k == 0:
        return UniPoly.constant(1)
    if k == 1:
        return UniPoly((ZERO, alpha + 1))
    ab = 2 * alpha
    a_k = 2 * k * (k + ab) * (2 * k + ab - 2)
    b_k = (2 * k + ab - 1) * (2 * k + ab) * (2 * k + ab - 2)
    c_k = 2 * (k + alpha - 1) * (k + alpha - 1) * (2 * k + ab)
    p1, p2 = _jacobi_raw(alpha, k - 1), _jacobi_raw(alpha, k - 2)
    return (p1.shift().scale(b_k) - p2.scale(c_k)).scale(1 / Fraction(a_k))


@lru_cache(maxsize=None)
def jacobi_p(n: int, k: int) -> UniPoly:
    """P^n_k: Jacobi((n-3)/2, (n-3)/2) of degree k with P^n_k(1) = 1."""
    if n < 2 or k < 0:
        raise ValueError(f"need n >= 2 and k >= 0, got n={n}, k={k}")
    if n == 2:
        return _chebyshev_t(k)
    raw = _jacobi_raw(Fraction(n - 3, 2), k)
    return raw.scale(1 / raw(ONE))


@lru_cache(maxsize=None)
def _chebyshev_t(k: int) -> UniPoly:
    if k == 0:
        return UniPoly.constant(1)
    if k == 1:
        return UniPoly((ZERO, ONE))
    return _chebyshev_t(k - 1).shift().scale(2) - _chebyshev_t(k - 2)


_W = T - U * V  # t - uv
_S = (TriPoly.constant(1) - U * U) * (TriPoly.constant(1) - V * V)  # (1-u^2)(1-v^2)


@lru_cache(maxsize=None)
def _w_power(a: int) -> TriPoly:
    return _W ** a


@lru_cache(maxsize=None)
def _s_power(b: int) -> TriPoly:
    return _S ** b


@lru_cache(maxsize=None)
def q_poly(n: int, k: int) -> TriPoly:
    """Q^{n-1}_k(u, v, t) = s^{k/2} P^{n-1}_k(w / sqrt(s)) with w = t - uv, s = (1-u^2)(1-v^2).

    P^{n-1}_k has the parity of k, so each term c_a x^a contributes
    c_a w^a s^{(k-a)/2} with an integral power of s.
    """
    if n < 3:
        raise ValueError(f"q_poly needs n >= 3, got {n}")
    p = jacobi_p(n - 1, k)
    out = TriPoly()
    for a, c in enumerate(p.coeffs):
        if c == 0:
            continue
        if (k - a) % 2:
            raise ArithmeticError(f"P^{n - 1}_{k} has a term of the wrong parity")
        out = out + (_w_power(a) * _s_power((k - a) // 2)).scale(c)
    return out


@lru_cache(maxsize=None)
def s_entry(n: int, k: int, i: int, j: int) -> TriPoly:
    """Entry (i, j) of S^n_k: the S_3 average of P^{n+2k}_i(u) P^{n+2k}_j(v) Q^{n-1}_k(u,v,t)."""
    if i > j:
        return s_entry(n, k, j, i)
    pu = jacobi_p(n + 2 * k, i).to_tripoly(0)
    pv = jacobi_p(n + 2 * k, j).to_tripoly(1)
    return (pu * pv * q_poly(n, k)).symmetrized()


def s_matrix(n: int, k: int, d: int) -> list[list[TriPoly]]:
    """The (d-k+1) x (d-k+1) matrix S^n_k of S_3-invariant polynomials."""
    if n < 3:
        raise ValueError(f"s_matrix needs n >= 3, got {n}")
    if not 0 <= k <= d:
        raise ValueError(f"need 0 <= k <= d, got k={k}, d={d}")
    size = d - k + 1
    return [[s_entry(n, k, i, j) for j in range(size)] for i in range(size)]


def monomials(nvars: int, max_degree: int, order: str = "grlex") -> list[tuple[int, ...]]:
    """Exponent tuples of total degree <= max_degree.

    ``grlex`` sorts by degree then lexicographically with u > v > t;
    ``grevlex`` breaks ties by the reverse-lexicographic rule.
    """
    exps = [e for e in itertools.product(range(max_degree + 1), repeat=nvars)
            if sum(e) <= max_degree]
    if order == "grlex":
        exps.sort(key=lambda e: (sum(e), tuple(-x for x in e)))
    elif order == "grevlex":
        exps.sort(key=lambda e: (sum(e), tuple(x for x in reversed(e))))
    else:
        raise ValueError(f"unknown monomial order {order!r}")
    return exps


def uni_from_terms(terms: Iterable[tuple[int, Fraction]]) -> UniPoly:
    coeffs: dict[int, Fraction] = {}
    for e, c in terms:
        coeffs[e] = coeffs.get(e, ZERO) + c
    deg = max(coeffs, default=-1)
    return UniPoly(tuple(coeffs.get(i, ZERO) for i in range(deg + 1)))
