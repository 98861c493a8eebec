"""Assembly of the three-point semidefinite program for spherical codes.

The program bounds the size of a code on S^{n-1} whose pairwise inner
products are at most ``cos_theta``.  Its two polynomial inequality
constraints are replaced by sum-of-squares identities; matching the
coefficient of every monomial then gives a block-diagonal SDP in equality
form::

    minimize   1 + <C, X>
    subject to <A_i, X> = b_i   for every monomial i
               X = diag(F_0..F_d, b, Q0, Q1, R, R0..R3) PSD, a >= 0

All polynomial algebra is done over the rationals; coefficients are rounded
to doubles once, when the constraint rows are emitted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, TextIO

import numpy as np

from .orthopoly import TriPoly, jacobi_p, monomials, s_entry


class SdpModelError(ValueError):
    pass


class NoBoundError(RuntimeError):
    """The solution does not certify a bound (solver failed or diverged)."""


@dataclass(frozen=True)
class Block:
    name: str
    size: int
    kind: str = "psd"  # "psd" or "diag" (nonnegative scalars)


@dataclass
class BlockTerms:
    """Sparse upper-triangle coefficients of one block across constraints.

    For ``row < col`` the stored value sits at both (row, col) and (col, row),
    so it contributes ``2 * val * X[row, col]`` to ``<A, X>``.
    """

    con: np.ndarray
    row: np.ndarray
    col: np.ndarray
    val: np.ndarray


@dataclass
class SdpProblem:
    blocks: list[Block]
    terms: list[BlockTerms]
    rhs: np.ndarray
    objective: list[BlockTerms]  # ``con`` unused (zeros)
    offset: float = 1.0
    row_labels: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def num_constraints(self) -> int:
        return len(self.rhs)

    def block_index(self, name: str) -> int:
        for i, b in enumerate(self.blocks):
            if b.name == name:
                return i
        raise KeyError(name)

    def scaled_objective(self, factor: float) -> "SdpProblem":
        obj = [BlockTerms(t.con, t.row, t.col, t.val * factor) for t in self.objective]
        return SdpProblem(self.blocks, self.terms, self.rhs, obj, self.offset * factor,
                          self.row_labels, dict(self.meta, objective_scale=factor))


@dataclass
class SdpSolution:
    X: list[np.ndarray]  # psd blocks as matrices, diag blocks as vectors
    y: np.ndarray
    Z: list[np.ndarray]
    status: str  # optimal | near_optimal | max_iter | numerical_breakdown | infeasible
    objective: float
    dual_objective: float
    iterations: int = 0
    primal_infeasibility: float = math.nan
    dual_infeasibility: float = math.nan
    duality_gap: float = math.nan
    min_eigenvalues: list[float] = field(default_factory=list)
    wall_time: float = 0.0


@dataclass
class VerificationReport:
    passed: bool
    max_residual: float
    min_eigenvalue: float
    block_min_eigenvalues: dict
    eps_eq: float
    eps_psd: float
    objective: float
    objective_consistent: bool
    failures: list[str]

    @property
    def label(self) -> str:
        return "verified (numerical)" if self.passed else "unverified"


# ---------------------------------------------------------------- assembly


def _multiplier(c: Fraction, var: int) -> TriPoly:
    """(x + 1)(c - x) for x the given variable."""
    e = [0, 0, 0]
    out = {(0, 0, 0): c}
    e[var] = 1
    out[tuple(e)] = c - 1
    e[var] = 2
    out[tuple(e)] = Fraction(-1)
    return TriPoly(out)


_GRAM_CONDITION = TriPoly({(0, 0, 0): Fraction(1), (1, 1, 1): Fraction(2),
                           (2, 0, 0): Fraction(-1), (0, 2, 0): Fraction(-1),
                           (0, 0, 2): Fraction(-1)})


class _Assembler:
    def __init__(self):
        self.blocks: list[Block] = []
        self.coef: list[dict] = []
        self.rhs: dict = {}

    def add_block(self, name: str, size: int, kind: str = "psd") -> int:
        self.blocks.append(Block(name, size, kind))
        self.coef.append({})
        return len(self.blocks) - 1

    def add(self, blk: int, key, r: int, c: int, value: Fraction) -> None:
        if value == 0:
            return
        if r > c:
            r, c = c, r
        d = self.coef[blk]
        k = (key, r, c)
        d[k] = d.get(k, 0) + value
        self.rhs.setdefault(key, Fraction(0))

    def add_gram(self, blk: int, basis: Sequence[tuple], mult: TriPoly, tag: str) -> None:
        """Coefficients of <G, mult * v v^T> where v is the monomial vector ``basis``."""
        m_terms = list(mult.terms.items())
        for p, ep in enumerate(basis):
            for q in range(p, len(basis)):
                eq = basis[q]
                for f, cf in m_terms:
                    e = tuple(a + b + g for a, b, g in zip(ep, eq, f))
                    self.add(blk, (tag, e), p, q, cf)


def _uni(e: int) -> tuple:
    return (e,)


def build_sdp(n: int, cos_theta: float, d: int, order: str = "grlex") -> SdpProblem:
    """Assemble the degree-``d`` three-point program for minimal-cosine ``cos_theta``."""
    if n < 3:
        raise SdpModelError(f"the three-point program needs n >= 3, got {n}")
    if d < 2:
        raise SdpModelError(f"degree d = {d} is too small; need d >= 2 for the multiplier terms")
    if not -1.0 <= cos_theta <= 1.0:
        raise SdpModelError(f"cos_theta must lie in [-1, 1], got {cos_theta}")
    c = Fraction(cos_theta)
    asm = _Assembler()

    blk_f = [asm.add_block(f"F{k}", d - k + 1) for k in range(d + 1)]
    blk_a = asm.add_block("a", d, "diag")
    blk_b = asm.add_block("b", 2)
    blk_q0 = asm.add_block("Q0", d + 1)
    blk_q1 = asm.add_block("Q1", d)
    basis_d = monomials(3, d, order)
    basis_d1 = monomials(3, d - 1, order)
    blk_r = asm.add_block("R", len(basis_d))
    blk_rm = [asm.add_block(f"R{m}", len(basis_d1)) for m in range(4)]

    # (i): sum_k a_k P_k(u) + 2 b12 + b22 + 3 sum_k <S_k(u,u,1), F_k> + 1
    #      + <Q0, V^d(u)> + (u+1)(c-u) <Q1, V^{d-1}(u)> = 0
    for k in range(1, d + 1):
        for e, coef in enumerate(jacobi_p(n, k).coeffs):
            asm.add(blk_a, ("i", _uni(e)), k - 1, k - 1, coef)
    asm.add(blk_b, ("i", _uni(0)), 0, 1, Fraction(1))
    asm.add(blk_b, ("i", _uni(0)), 1, 1, Fraction(1))
    for k in range(d + 1):
        size = d - k + 1
        for i in range(size):
            for j in range(i, size):
                restricted = s_entry(n, k, i, j).restrict_uu1()
                for e, coef in enumerate(restricted.coeffs):
                    asm.add(blk_f[k], ("i", _uni(e)), i, j, 3 * coef)
    asm.rhs[("i", _uni(0))] = Fraction(-1)
    uni_d = [(p,) for p in range(d + 1)]
    uni_d1 = [(p,) for p in range(d)]
    one_u = {(0,): Fraction(1)}
    g_u = {(0,): c, (1,): c - 1, (2,): Fraction(-1)}
    _add_uni_gram(asm, blk_q0, uni_d, one_u)
    _add_uni_gram(asm, blk_q1, uni_d1, g_u)

    # (ii): b22 + sum_k <S_k, F_k> + <R, V^d> + sum_m g_m <R_m, V^{d-1}> = 0
    asm.add(blk_b, ("ii", (0, 0, 0)), 1, 1, Fraction(1))
    for k in range(d + 1):
        size = d - k + 1
        for i in range(size):
            for j in range(i, size):
                for e, coef in s_entry(n, k, i, j).terms.items():
                    asm.add(blk_f[k], ("ii", e), i, j, coef)
    asm.add_gram(blk_r, basis_d, TriPoly.constant(1), "ii")
    for m, mult in enumerate([_multiplier(c, 0), _multiplier(c, 1), _multiplier(c, 2), _GRAM_CONDITION]):
        asm.add_gram(blk_rm[m], basis_d1, mult, "ii")

    return _emit(asm, order, meta={"n": n, "cos_theta": cos_theta, "d": d, "order": order})


def _add_uni_gram(asm: _Assembler, blk: int, basis, mult: dict) -> None:
    for p, (ep,) in enumerate(basis):
        for q in range(p, len(basis)):
            (eq,) = basis[q]
            for (f,), cf in mult.items():
                asm.add(blk, ("i", (ep + eq + f,)), p, q, cf)


def _row_key(order: str):
    def key(label):
        tag, e = label
        tag_rank = 0 if tag == "i" else 1
        if order == "grlex":
            tie = tuple(-x for x in e)
        else:
            tie = tuple(reversed(e))
        return (tag_rank, sum(e), tie)

    return key


def _emit(asm: _Assembler, order: str, meta: dict) -> SdpProblem:
    live = set()
    for d in asm.coef:
        for (key, _, _), v in d.items():
            if v != 0:
                live.add(key)
    labels = sorted((k for k in asm.rhs if k in live or asm.rhs[k] != 0), key=_row_key(order))
    index = {k: i for i, k in enumerate(labels)}
    terms = []
    for d in asm.coef:
        items = [(index[key], r, c, float(v)) for (key, r, c), v in d.items() if v != 0]
        items.sort()
        if items:
            con, row, col, val = (np.array(x) for x in zip(*items))
        else:
            con = row = col = np.zeros(0, dtype=int)
            val = np.zeros(0)
        terms.append(BlockTerms(con.astype(np.int64), row.astype(np.int64), col.astype(np.int64),
                                val.astype(float)))
    rhs = np.array([float(asm.rhs[k]) for k in labels])

    objective = []
    for blk in asm.blocks:
        if blk.name == "a":
            idx = np.arange(blk.size)
            objective.append(_obj_terms(idx, idx, np.ones(blk.size)))
        elif blk.name == "b":
            objective.append(_obj_terms([0], [0], [1.0]))
        elif blk.name == "F0":
            r, c = np.triu_indices(blk.size)
            objective.append(_obj_terms(r, c, np.ones(len(r))))
        else:
            objective.append(_obj_terms([], [], []))
    return SdpProblem(asm.blocks, terms, rhs, objective, 1.0, labels, meta)


def _obj_terms(r, c, v) -> BlockTerms:
    r = np.asarray(r, dtype=np.int64)
    return BlockTerms(np.zeros(len(r), dtype=np.int64), r, np.asarray(c, dtype=np.int64),
                      np.asarray(v, dtype=float))


# ------------------------------------------------------------- evaluation


def _block_inner(blk: Block, t: BlockTerms, X: np.ndarray) -> np.ndarray:
    """Per-term contribution val * <E_rc, X> (with symmetric doubling)."""
    if blk.kind == "diag":
        return t.val * X[t.row]
    weight = np.where(t.row == t.col, 1.0, 2.0)
    return weight * t.val * X[t.row, t.col]


def apply_constraints(p: SdpProblem, X: Sequence[np.ndarray]) -> np.ndarray:
    """Vector of <A_i, X> over all constraints."""
    out = np.zeros(p.num_constraints)
    for blk, t, x in zip(p.blocks, p.terms, X):
        np.add.at(out, t.con, _block_inner(blk, t, x))
    return out


def objective_value(p: SdpProblem, X: Sequence[np.ndarray]) -> float:
    total = p.offset
    for blk, t, x in zip(p.blocks, p.objective, X):
        total += float(np.sum(_block_inner(blk, t, x)))
    return total


def zero_point(p: SdpProblem) -> list[np.ndarray]:
    return [np.zeros(b.size) if b.kind == "diag" else np.zeros((b.size, b.size)) for b in p.blocks]


def bound_from_solution(p: SdpProblem, s: SdpSolution) -> float:
    """Objective 1 + sum a_k + b11 + <J, F0>, recomputed from the primal blocks."""
    if s.status not in ("optimal", "near_optimal"):
        raise NoBoundError(f"solver status {s.status!r} does not certify a bound")
    return objective_value(p, s.X)


def _min_eig(blk: Block, x: np.ndarray) -> float:
    if x.size == 0:
        return math.inf
    if blk.kind == "diag":
        return float(np.min(x))
    sym = 0.5 * (x + x.T)
    try:
        return float(np.linalg.eigvalsh(sym)[0])
    except np.linalg.LinAlgError:
        # Gershgorin lower bound
        radius = np.sum(np.abs(sym), axis=1) - np.abs(np.diag(sym))
        return float(np.min(np.diag(sym) - radius))


def verify_solution(p: SdpProblem, s: SdpSolution, eps_eq: float = 1e-7,
                    eps_psd: float = 1e-7) -> VerificationReport:
    """Recheck equality residuals and block eigenvalues of a solution from scratch."""
    residual = apply_constraints(p, s.X) - p.rhs
    max_res = float(np.max(np.abs(residual))) if residual.size else 0.0
    eigs = {b.name: _min_eig(b, x) for b, x in zip(p.blocks, s.X)}
    min_eig = min(eigs.values())
    obj = objective_value(p, s.X)
    consistent = abs(obj - s.objective) <= max(eps_eq, 1e-9 * abs(obj)) if math.isfinite(s.objective) else False
    failures = []
    if not max_res <= eps_eq:
        worst = int(np.argmax(np.abs(residual)))
        failures.append(f"equality residual {max_res:.3e} > {eps_eq:g} at row {p.row_labels[worst] if p.row_labels else worst}")
    if not min_eig >= -eps_psd:
        bad = min(eigs, key=eigs.get)
        failures.append(f"block {bad} has eigenvalue {min_eig:.3e} < -{eps_psd:g}")
    if not consistent:
        failures.append(f"reported objective {s.objective!r} differs from recomputed {obj!r}")
    return VerificationReport(not failures, max_res, min_eig, eigs, eps_eq, eps_psd, obj, consistent, failures)


def perturb(s: SdpSolution, block: int, row: int, col: int, amount: float) -> SdpSolution:
    """Copy of ``s`` with one (symmetric) primal entry shifted by ``amount``."""
    X = [x.copy() for x in s.X]
    if X[block].ndim == 1:
        X[block][row] += amount
    else:
        X[block][row, col] += amount
        if row != col:
            X[block][col, row] += amount
    return SdpSolution(X, s.y, s.Z, s.status, s.objective, s.dual_objective, s.iterations,
                       s.primal_infeasibility, s.dual_infeasibility, s.duality_gap,
                       s.min_eigenvalues, s.wall_time)


# ------------------------------------------------------------- file format
#
# Problems are written in the sparse SDPA layout: m, block count, block sizes
# (negative for diagonal blocks), the right-hand side, then one line
# ``matrix block row col value`` per nonzero, 1-based; matrix 0 holds the
# negated objective.  Solutions are lines ``block row col value``.


def write_sdpa(p: SdpProblem, fh: TextIO) -> None:
    fh.write(f'"three-point kissing program {p.meta}\n')
    fh.write(f'"objective offset {p.offset!r}\n')
    fh.write(f"{p.num_constraints}\n{len(p.blocks)}\n")
    fh.write(" ".join(str(-b.size if b.kind == "diag" else b.size) for b in p.blocks) + "\n")
    fh.write(" ".join(repr(float(v)) for v in p.rhs) + "\n")
    for bi, t in enumerate(p.objective, start=1):
        for r, c, v in zip(t.row, t.col, t.val):
            fh.write(f"0 {bi} {r + 1} {c + 1} {-float(v)!r}\n")
    for bi, t in enumerate(p.terms, start=1):
        for i, r, c, v in zip(t.con, t.row, t.col, t.val):
            fh.write(f"{i + 1} {bi} {r + 1} {c + 1} {float(v)!r}\n")


def read_sdpa(fh: TextIO) -> SdpProblem:
    offset = 0.0
    lines = []
    for line in fh:
        s = line.strip()
        if not s:
            continue
        if s[0] in '"*':
            if s.startswith('"objective offset'):
                offset = float(s.split()[-1])
            continue
        lines.append(s.replace(",", " ").replace("{", " ").replace("}", " ").replace("(", " ").replace(")", " "))
    m = int(lines[0].split()[0])
    nblocks = int(lines[1].split()[0])
    sizes = [int(x) for x in lines[2].split()[:nblocks]]
    rhs = np.array([float(x) for x in lines[3].split()[:m]])
    blocks = [Block(f"B{i + 1}", abs(s), "diag" if s < 0 else "psd") for i, s in enumerate(sizes)]
    cons = [[] for _ in blocks]
    objs = [[] for _ in blocks]
    for s in lines[4:]:
        mat, blk, r, c, v = s.split()[:5]
        mat, blk, r, c, v = int(mat), int(blk) - 1, int(r) - 1, int(c) - 1, float(v)
        if r > c:
            r, c = c, r
        if mat == 0:
            objs[blk].append((0, r, c, -v))
        else:
            cons[blk].append((mat - 1, r, c, v))
    return SdpProblem(blocks, [_terms(x) for x in cons], rhs, [_terms(x) for x in objs], offset,
                      list(range(m)), {})


def _terms(items) -> BlockTerms:
    if not items:
        z = np.zeros(0, dtype=np.int64)
        return BlockTerms(z, z, z, np.zeros(0))
    con, row, col, val = zip(*sorted(items))
    return BlockTerms(np.array(con, dtype=np.int64), np.array(row, dtype=np.int64),
                      np.array(col, dtype=np.int64), np.array(val, dtype=float))


def write_solution(p: SdpProblem, X: Sequence[np.ndarray], fh: TextIO) -> None:
    for bi, (blk, x) in enumerate(zip(p.blocks, X), start=1):
        if blk.kind == "diag":
            for r, v in enumerate(x):
                fh.write(f"{bi} {r + 1} {r + 1} {float(v)!r}\n")
        else:
            for r in range(blk.size):
                for c in range(r, blk.size):
                    fh.write(f"{bi} {r + 1} {c + 1} {float(x[r, c])!r}\n")


def read_solution(p: SdpProblem, fh: TextIO) -> list[np.ndarray]:
    X = zero_point(p)
    for line in fh:
        s = line.split()
        if not s or s[0].startswith(('"', "*")):
            continue
        bi, r, c, v = int(s[0]) - 1, int(s[1]) - 1, int(s[2]) - 1, float(s[3])
        if p.blocks[bi].kind == "diag":
            X[bi][r] = v
        else:
            X[bi][r, c] = v
            X[bi][c, r] = v
    return X


def problem_summary(p: SdpProblem) -> dict:
    return {
        "constraints": p.num_constraints,
        "blocks": {b.name: b.size for b in p.blocks},
        "rows_i": sum(1 for k in p.row_labels if isinstance(k, tuple) and k[0] == "i"),
        "rows_ii": sum(1 for k in p.row_labels if isinstance(k, tuple) and k[0] == "ii"),
    }
