import io
import math

import numpy as np
import pytest

from kissing.orthopoly import monomials
from kissing.sdp_model import (NoBoundError, SdpModelError, SdpSolution, apply_constraints, bound_from_solution,
                               build_sdp, objective_value, perturb, problem_summary, read_solution, read_sdpa,
                               verify_solution, write_sdpa, write_solution, zero_point)
from kissing.sdp_solver import solve

from sdp_oracles import gegenbauer, monomial_vector, random_psd, s_value


def _zero_solution(p, status="optimal"):
    X = zero_point(p)
    return SdpSolution(X, np.zeros(p.num_constraints), zero_point(p), status, objective_value(p, X), 1.0)


def _solved(n, c, d, order="grlex"):
    p = build_sdp(n, c, d, order)
    return p, solve(p)


def test_block_sizes():
    p = build_sdp(4, -1.0, 2)
    sizes = {b.name: b.size for b in p.blocks}
    assert sizes == {"F0": 3, "F1": 2, "F2": 1, "a": 2, "b": 2, "Q0": 3, "Q1": 2, "R": 10,
                     "R0": 4, "R1": 4, "R2": 4, "R3": 4}
    assert p.blocks[p.block_index("a")].kind == "diag"
    assert problem_summary(build_sdp(4, 0.5, 8))["blocks"]["R"] == math.comb(11, 3) == 165


@pytest.mark.parametrize("d", [2, 3, 5])
def test_row_counts_against_enumeration(d):
    p = build_sdp(3, 0.5, d)
    q = build_sdp(3, 0.5, d, order="grevlex")
    summary = problem_summary(p)
    # (i) is a polynomial of degree 2d in u
    assert summary["rows_i"] == problem_summary(q)["rows_i"] == 2 * d + 1
    # (ii): every monomial of degree <= 2d, plus uvt times each monomial of degree 2d - 2
    expected_ii = math.comb(2 * d + 3, 3) + math.comb(2 * d, 2)
    assert summary["rows_ii"] == problem_summary(q)["rows_ii"] == expected_ii
    assert sorted(map(str, p.row_labels)) == sorted(map(str, q.row_labels))


def test_rows_reference_declared_variables():
    p = build_sdp(4, 0.3, 4)
    for blk, t in zip(p.blocks, p.terms):
        assert np.all((t.con >= 0) & (t.con < p.num_constraints))
        assert np.all((t.row >= 0) & (t.row <= t.col) & (t.col < blk.size))


@pytest.mark.parametrize("kwargs, match", [
    (dict(n=2, cos_theta=0.5, d=3), "n >= 3"),
    (dict(n=3, cos_theta=0.5, d=1), "degree"),
    (dict(n=3, cos_theta=1.5, d=3), "cos_theta"),
])
def test_build_errors(kwargs, match):
    with pytest.raises(SdpModelError, match=match):
        build_sdp(**kwargs)


def _random_blocks(p, rng):
    X = []
    for blk in p.blocks:
        X.append(rng.uniform(0, 1, blk.size) if blk.kind == "diag" else random_psd(rng, blk.size))
    return X


def _identity_i(p, X, n, c, d, u):
    get = lambda name: X[p.block_index(name)]
    a, b = get("a"), get("b")
    total = sum(a[k - 1] * gegenbauer(n, k)(u) for k in range(1, d + 1)) + 2 * b[0, 1] + b[1, 1] + 1
    for k in range(d + 1):
        F = get(f"F{k}")
        total += 3 * sum(F[i, j] * s_value(n, k, i, j, u, u, 1.0) for i in range(d - k + 1) for j in range(d - k + 1))
    vd, vd1 = u ** np.arange(d + 1), u ** np.arange(d)
    total += vd @ get("Q0") @ vd + (u + 1) * (c - u) * (vd1 @ get("Q1") @ vd1)
    return total


def _identity_ii(p, X, n, c, d, pt, order):
    u, v, t = pt
    get = lambda name: X[p.block_index(name)]
    total = get("b")[1, 1]
    for k in range(d + 1):
        F = get(f"F{k}")
        total += sum(F[i, j] * s_value(n, k, i, j, u, v, t) for i in range(d - k + 1) for j in range(d - k + 1))
    V = monomial_vector(monomials(3, d, order), pt)
    V1 = monomial_vector(monomials(3, d - 1, order), pt)
    mults = [(u + 1) * (c - u), (v + 1) * (c - v), (t + 1) * (c - t), 1 + 2 * u * v * t - u * u - v * v - t * t]
    total += V @ get("R") @ V
    for m, g in enumerate(mults):
        total += g * (V1 @ get(f"R{m}") @ V1)
    return total


@pytest.mark.parametrize("n, c, d, order", [(4, 0.3, 3, "grlex"), (3, -0.4, 3, "grevlex"), (5, 0.5, 2, "grlex")])
def test_identity_by_sampling(n, c, d, order):
    rng = np.random.default_rng(n * 10 + d)
    p = build_sdp(n, c, d, order)
    X = _random_blocks(p, rng)
    values = apply_constraints(p, X)
    for _ in range(50):
        u = rng.uniform(-1, 1)
        predicted = 1.0 + sum(val * u ** lab[1][0] for val, lab in zip(values, p.row_labels) if lab[0] == "i")
        assert predicted == pytest.approx(_identity_i(p, X, n, c, d, u), rel=1e-9, abs=1e-9)
        pt = rng.uniform(-0.95, 0.95, 3)
        predicted = sum(val * np.prod(pt ** np.array(lab[1])) for val, lab in zip(values, p.row_labels)
                        if lab[0] == "ii")
        assert predicted == pytest.approx(_identity_ii(p, X, n, c, d, pt, order), rel=1e-9, abs=1e-9)


def test_bound_from_zero_solution():
    p = build_sdp(4, -1.0, 2)
    assert bound_from_solution(p, _zero_solution(p)) == 1.0
    for status in ("max_iter", "numerical_breakdown", "infeasible"):
        with pytest.raises(NoBoundError):
            bound_from_solution(p, _zero_solution(p, status))


def test_zero_solution_fails_verification():
    p = build_sdp(4, 0.2, 3)
    rep = verify_solution(p, _zero_solution(p))
    assert not rep.passed
    assert rep.max_residual == float(np.max(np.abs(p.rhs))) == 1.0
    assert rep.label == "unverified"


def test_sdpa_round_trip():
    p = build_sdp(4, 0.25, 3)
    buf = io.StringIO()
    write_sdpa(p, buf)
    q = read_sdpa(io.StringIO(buf.getvalue()))
    assert [(b.size, b.kind) for b in q.blocks] == [(b.size, b.kind) for b in p.blocks]
    np.testing.assert_array_equal(q.rhs, p.rhs)
    X = _random_blocks(p, np.random.default_rng(3))
    np.testing.assert_array_equal(apply_constraints(q, X), apply_constraints(p, X))
    assert objective_value(q, X) == objective_value(p, X)


def test_solution_round_trip():
    p = build_sdp(3, 0.1, 3)
    X = _random_blocks(p, np.random.default_rng(4))
    buf = io.StringIO()
    write_solution(p, X, buf)
    Y = read_solution(p, io.StringIO(buf.getvalue()))
    for blk, x, y in zip(p.blocks, X, Y):
        if blk.kind == "diag":
            np.testing.assert_array_equal(x, y)
        else:
            np.testing.assert_array_equal(np.triu(x), np.triu(y))
            np.testing.assert_array_equal(y, y.T)


def test_solved_antipodal_program_verifies():
    p, s = _solved(4, -1.0, 4)
    rep = verify_solution(p, s, 1e-7, 1e-7)
    assert rep.passed, rep.failures
    assert bound_from_solution(p, s) == pytest.approx(2.0, abs=1e-5)


def test_perturbation_breaks_equality():
    p, s = _solved(4, -1.0, 4)
    bad = perturb(s, p.block_index("F0"), 0, 1, 1e-3)
    rep = verify_solution(p, bad)
    assert not rep.passed and rep.max_residual > 1e-7


def _bound(n, c, d, order="grlex"):
    p, s = _solved(n, c, d, order)
    rep = verify_solution(p, s)
    return rep.objective if rep.passed and s.status in ("optimal", "near_optimal") else math.inf


def test_degree_monotonicity():
    values = [_bound(3, 0.5, d) for d in (2, 3, 4, 5)]
    assert values[0] == math.inf
    for lo, hi in zip(values[1:], values[2:]):
        assert hi <= lo + 1e-6


def test_monotone_in_cos_theta():
    grid = [-0.6, -0.2, 0.1, 0.3, 0.5]
    values = [_bound(3, c, 3) for c in grid]
    for lo, hi in zip(values, values[1:]):
        assert lo <= hi + 1e-6


def test_orderings_agree():
    assert _bound(4, 0.35, 3, "grlex") == pytest.approx(_bound(4, 0.35, 3, "grevlex"), abs=1e-7)
