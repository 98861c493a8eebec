"""Independent evaluators used as oracles by the SDP tests."""
import itertools

import numpy as np
import scipy.sparse as sp
import scipy.special as sc


def gegenbauer(n, k):
    """P^n_k as a numpy poly1d, normalised to 1 at x = 1 (scipy coefficients)."""
    if n == 2:
        p = sc.chebyt(k)
    else:
        a = (n - 3) / 2
        p = sc.jacobi(k, a, a)
    return np.poly1d(np.asarray(p.coeffs) / p(1.0))


def q_value(n, k, u, v, t):
    """(1-u^2)^{k/2} (1-v^2)^{k/2} P^{n-1}_k((t-uv)/sqrt(...)), expanded so s = 0 is fine."""
    s = (1 - u * u) * (1 - v * v)
    w = t - u * v
    coeffs = gegenbauer(n - 1, k).coeffs[::-1]
    return sum(c * w ** j * s ** ((k - j) // 2) for j, c in enumerate(coeffs) if (k - j) % 2 == 0)


def s_value(n, k, i, j, u, v, t):
    pi, pj = gegenbauer(n + 2 * k, i), gegenbauer(n + 2 * k, j)
    return sum(pi(a) * pj(b) * q_value(n, k, a, b, c) for a, b, c in itertools.permutations((u, v, t))) / 6


def monomial_vector(basis, point):
    return np.array([np.prod([x ** e for x, e in zip(point, ex)]) for ex in basis])


def random_psd(rng, size):
    g = rng.standard_normal((size, size))
    return g @ g.T / size


def solve_clarabel(p):
    """Solve an SdpProblem with cvxpy + Clarabel; returns the optimal value."""
    import cvxpy as cp

    m = p.num_constraints
    variables, cons, rows = [], [], []
    for blk, t in zip(p.blocks, p.terms):
        if blk.kind == "diag":
            v = cp.Variable(blk.size)
            cons.append(v >= 0)
            if len(t.con):
                rows.append(sp.csr_matrix((t.val, (t.con, t.row)), shape=(m, blk.size)) @ v)
        else:
            v = cp.Variable((blk.size, blk.size), symmetric=True)
            cons.append(v >> 0)
            if len(t.con):
                w = np.where(t.row == t.col, 1.0, 2.0)
                a = sp.csr_matrix((w * t.val, (t.con, t.row * blk.size + t.col)), shape=(m, blk.size ** 2))
                rows.append(a @ cp.vec(v, order="C"))
        variables.append(v)
    cons.append(sum(rows) == p.rhs)
    obj = p.offset
    for blk, o, v in zip(p.blocks, p.objective, variables):
        for r, c, val in zip(o.row, o.col, o.val):
            obj = obj + (val * v[r] if blk.kind == "diag" else val * (1 if r == c else 2) * v[r, c])
    prob = cp.Problem(cp.Minimize(obj), cons)
    prob.solve(solver=cp.CLARABEL)
    return prob.value, prob.status
