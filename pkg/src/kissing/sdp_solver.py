"""Dense primal-dual interior-point solver for block-diagonal SDPs.

Solves ``min <C, X> s.t. <A_i, X> = b_i, X PSD`` together with its dual
``max b.y s.t. sum_i y_i A_i + Z = C, Z PSD`` by infeasible-start path
following with the HKM search direction and a Mehrotra predictor-corrector
step.  Diagonal blocks are handled as nonnegative orthants.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .sdp_model import BlockTerms, SdpProblem, SdpSolution, apply_constraints, objective_value

log = logging.getLogger(__name__)

# blocks up to this size get a batched dense Schur update
_DENSE_BLOCK = 40
_CHUNK = 256
# iterations without a better iterate before giving up
_STALL = 12


@dataclass(frozen=True)
class SolverSettings:
    max_iterations: int = 200
    gap_tolerance: float = 1e-9
    feasibility_tolerance: float = 1e-9
    step_fraction: float = 0.98
    initial_scale: float = 1.0

    def __post_init__(self):
        if self.gap_tolerance <= 0 or self.feasibility_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if not 0 < self.step_fraction < 1:
            raise ValueError("step_fraction must lie in (0, 1)")
        if self.initial_scale <= 0:
            raise ValueError("initial_scale must be positive")


class _Block:
    def __init__(self, size: int, kind: str, terms, obj_terms, m: int):
        self.size = s = size
        self.diag = kind == "diag"
        con, row, col, val = terms.con, terms.row, terms.col, terms.val
        if self.diag:
            self.A = sp.csr_matrix((val, (con, row)), shape=(m, s))
            self.C = np.zeros(s)
            np.add.at(self.C, obj_terms.row, obj_terms.val)
        else:
            off = row != col
            rr = np.concatenate([row, col[off]])
            cc = np.concatenate([col, row[off]])
            vv = np.concatenate([val, val[off]])
            ii = np.concatenate([con, con[off]])
            self.A = sp.csr_matrix((vv, (ii, rr * s + cc)), shape=(m, s * s))
            self.C = np.zeros((s, s))
            np.add.at(self.C, (obj_terms.row, obj_terms.col), obj_terms.val)
            offo = obj_terms.row != obj_terms.col
            np.add.at(self.C, (obj_terms.col[offo], obj_terms.row[offo]), obj_terms.val[offo])
            self.touch = np.unique(ii)
            self.A_touch = self.A[self.touch]
            if s <= _DENSE_BLOCK:
                self.A_dense = self.A_touch.toarray().reshape(len(self.touch), s, s)
            else:
                self.A_dense = None
                order = np.argsort(ii, kind="stable")
                ii_s, rr_s, cc_s, vv_s = ii[order], rr[order], cc[order], vv[order]
                bounds = np.searchsorted(ii_s, np.append(self.touch, m))
                self.pieces = [(rr_s[a:b], cc_s[a:b], vv_s[a:b]) for a, b in zip(bounds[:-1], bounds[1:])]
        self.a_norms = np.sqrt(np.asarray(self.A.multiply(self.A).sum(axis=1)).ravel())

    def apply(self, X: np.ndarray) -> np.ndarray:
        return self.A @ X.ravel()

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        v = self.A.T @ y
        return v if self.diag else v.reshape(self.size, self.size)

    def inner(self, X: np.ndarray, Z: np.ndarray) -> float:
        return float(np.dot(X.ravel(), Z.ravel()))

    def schur(self, X: np.ndarray, Zinv: np.ndarray, M: np.ndarray) -> None:
        """Add tr(A_i X A_j Z^-1) into M."""
        if self.diag:
            w = X * Zinv
            Aw = self.A.multiply(w[None, :]).tocsr()
            M += (Aw @ self.A.T).toarray()
            return
        s = self.size
        if self.A_dense is not None:
            T = np.matmul(np.matmul(X, self.A_dense), Zinv).reshape(len(self.touch), s * s)
            M[np.ix_(self.touch, self.touch)] += (self.A_touch @ T.T)
            return
        for start in range(0, len(self.touch), _CHUNK):
            idx = range(start, min(start + _CHUNK, len(self.touch)))
            T = np.empty((s * s, len(idx)))
            for col, i in enumerate(idx):
                rr, cc, vv = self.pieces[i]
                T[:, col] = (X[:, rr] @ (vv[:, None] * Zinv[cc, :])).ravel()
            M[np.ix_(self.touch, self.touch[start:start + len(idx)])] += self.A_touch @ T


def _sym(W: np.ndarray) -> np.ndarray:
    return 0.5 * (W + W.T)


def _max_step(blk: _Block, X: np.ndarray, dX: np.ndarray) -> float:
    """Largest alpha with X + alpha dX still PSD (X positive definite)."""
    if blk.diag:
        neg = dX < 0
        return float(np.min(-X[neg] / dX[neg])) if np.any(neg) else math.inf
    L = np.linalg.cholesky(X)
    Li = sla.solve_triangular(L, np.eye(blk.size), lower=True)
    W = _sym(Li @ dX @ Li.T)
    lam = np.linalg.eigvalsh(W)[0]
    return -1.0 / lam if lam < 0 else math.inf


def _inverse(blk: _Block, Z: np.ndarray) -> np.ndarray:
    if blk.diag:
        return 1.0 / Z
    L = np.linalg.cholesky(Z)
    Li = sla.solve_triangular(L, np.eye(blk.size), lower=True)
    return Li.T @ Li


def solve(p: SdpProblem, settings: SolverSettings | None = None) -> SdpSolution:
    settings = settings or SolverSettings()
    started = time.perf_counter()
    m = p.num_constraints
    original = p
    p = _row_scaled(p)
    b = p.rhs.astype(float)
    blocks = [_Block(bk.size, bk.kind, t, o, m) for bk, t, o in zip(p.blocks, p.terms, p.objective)]

    row_nnz = np.zeros(m)
    for blk in blocks:
        row_nnz += blk.a_norms
    empty = (row_nnz == 0) & (b != 0)
    if np.any(empty):
        X0 = [np.zeros(bl.size) if bl.diag else np.zeros((bl.size, bl.size)) for bl in blocks]
        return _finish(original, X0, np.zeros(m), X0, "infeasible", 0, started)

    N = sum(bl.size for bl in blocks)
    # Gram matrix of the constraint rows, used to put each primal
    # direction back onto the affine space A(dX) = rp
    AAt = sum((bl.A @ bl.A.T).toarray() for bl in blocks)
    try:
        gram = sla.cho_factor(AAt + 1e-14 * np.eye(m), lower=True)
    except np.linalg.LinAlgError:
        gram = None
    norm_b = float(np.linalg.norm(b))
    norm_c = math.sqrt(sum(float(np.sum(bl.C ** 2)) for bl in blocks))
    X, Z = [], []
    for blk in blocks:
        s = blk.size
        an = blk.a_norms
        ratio = float(np.max((1 + np.abs(b)) / (1 + an))) if m else 1.0
        xi = max(10.0, math.sqrt(s), s * ratio) * settings.initial_scale
        eta = max(10.0, math.sqrt(s), float(an.max(initial=0.0)), float(np.linalg.norm(blk.C))) * settings.initial_scale
        if blk.diag:
            X.append(np.full(s, xi))
            Z.append(np.full(s, eta))
        else:
            X.append(np.eye(s) * xi)
            Z.append(np.eye(s) * eta)
    y = np.zeros(m)

    best = None
    status = "max_iter"
    it = 0
    for it in range(1, settings.max_iterations + 1):
        AX = sum(bl.apply(x) for bl, x in zip(blocks, X))
        rp = b - AX
        ATy = [bl.adjoint(y) for bl in blocks]
        Rd = [bl.C - a - z for bl, a, z in zip(blocks, ATy, Z)]
        gap = sum(bl.inner(x, z) for bl, x, z in zip(blocks, X, Z))
        mu = gap / N
        pobj = sum(bl.inner(bl.C, x) for bl, x in zip(blocks, X)) + p.offset
        dobj = float(b @ y) + p.offset
        pinf = float(np.linalg.norm(rp)) / (1 + norm_b)
        dinf = math.sqrt(sum(float(np.sum(r ** 2)) for r in Rd)) / (1 + norm_c)
        rgap = max(abs(pobj - dobj), gap) / (1 + abs(pobj))
        merit = max(pinf, dinf, rgap)
        if best is None or merit < best[0]:
            best = (merit, [x.copy() for x in X], y.copy(), [z.copy() for z in Z])
            best_it = it
        log.debug("it %3d pobj %.10g dobj %.10g pinf %.2e dinf %.2e gap %.2e",
                  it, pobj, dobj, pinf, dinf, rgap)
        if pinf <= settings.feasibility_tolerance and dinf <= settings.feasibility_tolerance \
                and rgap <= settings.gap_tolerance:
            status = "optimal"
            break
        if it - best_it > _STALL:
            log.debug("no progress in %d iterations", _STALL)
            break

        try:
            Zinv = [_inverse(bl, z) for bl, z in zip(blocks, Z)]
            M = np.zeros((m, m))
            for bl, x, zi in zip(blocks, X, Zinv):
                bl.schur(x, zi, M)
            M = 0.5 * (M + M.T)
            factor = _factor(M)
        except np.linalg.LinAlgError as exc:
            log.debug("breakdown in the Schur complement: %s", exc)
            status = "numerical_breakdown"
            break

        XRdZi = [x * r * zi if bl.diag else x @ r @ zi for bl, x, r, zi in zip(blocks, X, Rd, Zinv)]
        AZi = sum(bl.apply(zi) for bl, zi in zip(blocks, Zinv))
        base = b + sum(bl.apply(w) for bl, w in zip(blocks, XRdZi))

        def direction(sigma, corr):
            rhs = base - sigma * mu * AZi
            if corr is not None:
                rhs = rhs + sum(bl.apply(c) for bl, c in zip(blocks, corr))
            dy = factor(rhs)
            dZ = [r - bl.adjoint(dy) for bl, r in zip(blocks, Rd)]
            dX = []
            for i, bl in enumerate(blocks):
                if bl.diag:
                    d = sigma * mu * Zinv[i] - X[i] - X[i] * dZ[i] * Zinv[i]
                else:
                    d = sigma * mu * Zinv[i] - X[i] - X[i] @ dZ[i] @ Zinv[i]
                if corr is not None:
                    d = d - corr[i]
                dX.append(d if bl.diag else _sym(d))
            return dX, dy, dZ

        def primal_step(dX):
            """Step to the boundary, after pulling dX back onto A(dX) = rp if that is cheap."""
            raw = min(_max_step(bl, x, d) for bl, x, d in zip(blocks, X, dX))
            if gram is None:
                return dX, raw
            err = rp - sum(bl.apply(d) for bl, d in zip(blocks, dX))
            w = sla.cho_solve(gram, err)
            fixed = [d + bl.adjoint(w) for bl, d in zip(blocks, dX)]
            step = min(_max_step(bl, x, d) for bl, x, d in zip(blocks, X, fixed))
            return (fixed, step) if step >= 0.5 * min(raw, 1.0) else (dX, raw)

        try:
            dXp, dyp, dZp = direction(0.0, None)
            dXp, ap = primal_step(dXp)
            ap = min(1.0, ap)
            ad = min(1.0, min(_max_step(bl, z, d) for bl, z, d in zip(blocks, Z, dZp)))
            gap_aff = sum(bl.inner(x + ap * dx, z + ad * dz)
                          for bl, x, dx, z, dz in zip(blocks, X, dXp, Z, dZp))
            sigma = min(1.0, (gap_aff / gap) ** 3)
            # back off from the boundary more when the predictor was short
            gamma = min(settings.step_fraction, 0.9 + 0.09 * min(ap, ad))
            corr = [dx * dz * zi if bl.diag else dx @ dz @ zi
                    for bl, dx, dz, zi in zip(blocks, dXp, dZp, Zinv)]
            dX, dy, dZ = direction(sigma, corr)
            dX, ap = primal_step(dX)
            ap = min(1.0, gamma * ap)
            ad = min(1.0, gamma * min(_max_step(bl, z, d) for bl, z, d in zip(blocks, Z, dZ)))
            ap = ad = min(ap, ad)
        except np.linalg.LinAlgError as exc:
            log.debug("breakdown computing the step: %s", exc)
            status = "numerical_breakdown"
            break
        log.debug("    sigma %.2e step %.3f", sigma, ap)
        if ap < 1e-12:
            status = "numerical_breakdown"
            break
        X = [x + ap * d for x, d in zip(X, dX)]
        y = y + ad * dy
        Z = [z + ad * d for z, d in zip(Z, dZ)]
    else:
        it = settings.max_iterations

    if status != "optimal":
        merit, X, y, Z = best
        if merit <= math.sqrt(settings.gap_tolerance) * 10:
            status = "near_optimal"
    if gram is not None:
        X = _restore(blocks, X, b, gram)
    # undo the row scaling on the dual vector
    return _finish(original, X, y * p.meta["row_scale"], Z, status, it, started)


def _restore(blocks, X, b, gram, max_rounds: int = 300, tol: float = 1e-10):
    """Alternate least-norm projection onto A(X) = b with clipping onto the cone.

    The final iterate of an interior-point run is PSD but only approximately
    feasible; this trades its residual for a tiny negative eigenvalue.  The
    returned point always comes from the affine step, so its residual is at
    rounding level, and the loop stops once its most negative eigenvalue is
    above -tol or stops improving.
    """
    best, best_eig = None, -math.inf
    for k in range(max_rounds):
        res = b - sum(bl.apply(x) for bl, x in zip(blocks, X))
        w = sla.cho_solve(gram, res)
        X = [x + bl.adjoint(w) if bl.diag else _sym(x + bl.adjoint(w)) for bl, x in zip(blocks, X)]
        clipped, low = [], math.inf
        for bl, x in zip(blocks, X):
            if bl.diag:
                lam = x
                clipped.append(np.maximum(x, 0.0))
            else:
                lam, vec = np.linalg.eigh(x)
                clipped.append((vec * np.maximum(lam, 0.0)) @ vec.T)
            if lam.size:
                low = min(low, float(lam.min()))
        if low > best_eig:
            stale = 0 if best is None or low > best_eig + 0.01 * abs(best_eig) else stale + 1
            best, best_eig = X, low
        else:
            stale += 1
        if low >= -tol or stale >= 10:
            break
        X = [c if bl.diag else _sym(c) for bl, c in zip(blocks, clipped)]
    log.debug("restoration: %d rounds, min eigenvalue %.2e", k + 1, best_eig)
    return best


def _row_scaled(p: SdpProblem) -> SdpProblem:
    """Copy of ``p`` with every constraint row divided by its norm."""
    m = p.num_constraints
    sq = np.zeros(m)
    for blk, t in zip(p.blocks, p.terms):
        w = np.where(t.row == t.col, 1.0, 2.0) if blk.kind != "diag" else 1.0
        np.add.at(sq, t.con, w * t.val ** 2)
    norms = np.sqrt(sq)
    scale = np.where(norms > 0, 1.0 / np.where(norms > 0, norms, 1.0), 1.0)
    terms = [BlockTerms(t.con, t.row, t.col, t.val * scale[t.con]) for t in p.terms]
    return SdpProblem(p.blocks, terms, p.rhs * scale, p.objective, p.offset, p.row_labels,
                      dict(p.meta, row_scale=scale))


def _factor(M: np.ndarray):
    try:
        c = sla.cho_factor(M, lower=True, check_finite=True)
        return lambda r: sla.cho_solve(c, r)
    except np.linalg.LinAlgError:
        scale = max(1.0, float(np.max(np.abs(np.diag(M)))))
        lu = sla.lu_factor(M + 1e-14 * scale * np.eye(len(M)))
        return lambda r: sla.lu_solve(lu, r)


def _finish(p: SdpProblem, X, y, Z, status: str, iterations: int, started: float) -> SdpSolution:
    from .sdp_model import _min_eig

    AX = apply_constraints(p, X)
    rp = float(np.max(np.abs(AX - p.rhs))) if len(AX) else 0.0
    pobj = objective_value(p, X)
    dobj = float(p.rhs @ y) + p.offset
    # dual residual from scratch
    dres = 0.0
    for blk, t, o, z in zip(p.blocks, p.terms, p.objective, Z):
        C = np.zeros(z.shape)
        ATy = np.zeros(z.shape)
        if blk.kind == "diag":
            np.add.at(C, o.row, o.val)
            np.add.at(ATy, t.row, t.val * y[t.con])
        else:
            for mat, tt, vals in ((C, o, o.val), (ATy, t, t.val * y[t.con] if len(t.con) else t.val)):
                np.add.at(mat, (tt.row, tt.col), vals)
                off = tt.row != tt.col
                np.add.at(mat, (tt.col[off], tt.row[off]), vals[off])
        if z.size:
            dres = max(dres, float(np.max(np.abs(C - ATy - z))))
    eigs = [_min_eig(blk, x) for blk, x in zip(p.blocks, X)]
    return SdpSolution(X=X, y=y, Z=Z, status=status, objective=pobj, dual_objective=dobj,
                       iterations=iterations, primal_infeasibility=rp, dual_infeasibility=dres,
                       duality_gap=abs(pobj - dobj), min_eigenvalues=eigs,
                       wall_time=time.perf_counter() - started)

