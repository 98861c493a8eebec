"""One test per primary acceptance criterion; each prints a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines.
"""
import math
import time
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from kissing.certifier import certify, certify_text, exactify, load_code
from kissing.geom_bounds import (Space, asymptotic_hyp, cos_theta_of_radius, lower_bound_hyp, lower_bound_sph,
                                 upper_bound_hyp, upper_bound_sph)
from kissing.numerics import SqrtRational
from kissing.sdp_model import build_sdp, perturb, verify_solution
from kissing.sdp_solver import solve
from kissing.tables import (DEFAULT_FIXTURES, H3_ROWS, S4_ROWS, fixture_manifest, fixture_space, jump_table,
                            sdp_bound)

mpmath.mp.dps = 40


def verdict(name, ok, detail):
    print(f"\n{'PASS' if ok else 'FAIL'} [{name}] {detail}")
    assert ok, detail


def test_hyperbolic_lower_bounds_table():
    start = time.perf_counter()
    worst, bad = 0.0, []
    for row in H3_ROWS:
        delta = abs(lower_bound_hyp(3, row.radius).value - float(row.theoretical_lower))
        worst = max(worst, delta)
        if delta > 5e-6:
            bad.append(row.r)
    elapsed = time.perf_counter() - start
    verdict("hyperbolic lower bounds", not bad and elapsed < 1.0,
            f"{len(H3_ROWS)} rows, max |delta| {worst:.2e}, mismatched {bad}, {elapsed:.3f}s")


def test_spherical_lower_bounds_table():
    start = time.perf_counter()
    bad = []
    for row in S4_ROWS:
        got = lower_bound_sph(4, row.radius).value
        delta = abs(got - float(row.theoretical_lower))
        if delta > 5e-6:
            bad.append(f"r={row.r}: {got:.6f} vs {row.theoretical_lower} ({delta:.1e})")
    anchors = (abs(lower_bound_sph(4, 0).value - 5.11506) <= 5e-6 and lower_bound_sph(4, math.pi / 4).value == 2
               and lower_bound_sph(4, math.pi / 3).value == pytest.approx(1, abs=1e-12))
    elapsed = time.perf_counter() - start
    verdict("spherical lower bounds", not bad and anchors and elapsed < 1.0,
            f"{len(S4_ROWS)} rows, anchors {'ok' if anchors else 'off'}, mismatched {bad}, {elapsed:.3f}s")


def test_certifier_ground_truth():
    timings = []
    start = time.perf_counter()
    ico = certify(exactify(load_code((DEFAULT_FIXTURES / "icosahedron.txt").read_text(), 3)), "S")
    timings.append(time.perf_counter() - start)
    exact = ico.max_inner_product == SqrtRational(1, Fraction(1, 5))
    rad = ico.spherical_max_radius
    ico_radius = rad.width <= 1e-10 and rad.contains(Fraction(str(mpmath.pi / 10)))
    start = time.perf_counter()
    c13 = certify_text((DEFAULT_FIXTURES / "pack-3-13.txt").read_text(), 3, "H")
    timings.append(time.perf_counter() - start)
    h = c13.hyperbolic_min_radius
    near13 = h.lo - 1e-9 <= 0.3007680932244 <= h.hi + 1e-9
    gap = float(ico.max_inner_product.square - Fraction(1, 5))
    verdict("certifier ground truth", exact and ico_radius and near13 and max(timings) < 1.0,
            f"t*^2 - 1/5 = {gap:.1e} (exact: {exact}), pi/10 enclosed with width {rad.width:.1e}: {ico_radius}, "
            f"13-point radius [{h.lo!r}, {h.hi!r}]: {near13}, slowest {max(timings):.3f}s")


def test_jump_radii():
    start = time.perf_counter()
    jumps = jump_table()
    elapsed = time.perf_counter() - start
    worst = max(abs(j.r_exact.mid - float(j.approx)) for j in jumps)
    widest = max(j.r_exact.width for j in jumps)
    sextic = jumps[1].r_exact
    ok = worst <= 1e-12 and widest <= 1e-12 and abs(sextic.mid - 0.4122234203273) <= 1e-12 and elapsed < 1.0
    verdict("jump radii", ok, f"10 radii, max |delta| {worst:.1e}, max width {widest:.1e}, {elapsed:.3f}s")


@pytest.mark.slow
def test_sdp_desk_scale():
    anchors = [(math.pi / 3, 2.0, 1e-4), (0.95531661577188, 3.0, 1e-4), (0.68471920300192, 10.000004, 1e-2)]
    lines, ok = [], True
    for r, expected, tol in anchors:
        run = sdp_bound("S", 4, r, 8)
        good = run.bound is not None and abs(run.bound - expected) <= tol
        ok &= good
        lines.append(f"r={r:.14g}: {run.bound} vs {expected} (tol {tol:g}, {run.solution.wall_time:.0f}s)")
    values = []
    for d in range(2, 7):
        b = sdp_bound("H", 3, 0.0, d).bound
        values.append(math.inf if b is None else b)
    monotone = all(b <= a + 1e-6 for a, b in zip(values, values[1:]))
    sub = all(v >= 12 for v in values) and monotone and values[3] <= 16
    lines.append(f"n=3 r=0 d=2..6: {[round(v, 6) for v in values]} (d=2 has no finite optimum)")
    verdict("SDP desk-scale reproduction", ok and sub, "; ".join(lines))


def _grid():
    pts = []
    for k in range(200):
        n = 2 + k % 9
        pts.append((n, (k // 9) / 22))
    return pts


def test_sandwich_and_monotonicity():
    grid = _grid()
    failures = []
    by_n = {}
    for n, s in grid:
        rh, rs = 5.0 * s, (math.pi / 3) * s
        lh, uh = lower_bound_hyp(n, rh).value, upper_bound_hyp(n, rh).value
        ls, us = lower_bound_sph(n, rs).value, upper_bound_sph(n, rs).value
        if not lh <= uh:
            failures.append(("H sandwich", n, rh))
        if not ls <= us:
            failures.append(("S sandwich", n, rs))
        by_n.setdefault(n, []).append((rh, lh, uh, rs, ls, us))
    for n, rows in by_n.items():
        rows.sort()
        for a, b in zip(rows, rows[1:]):
            if not (b[1] >= a[1] and b[2] >= a[2]):
                failures.append(("H monotone", n, b[0]))
            if not (b[4] <= a[4] and b[5] <= a[5]):
                failures.append(("S monotone", n, b[3]))
    verdict("sandwich and monotonicity", not failures, f"{len(grid)} grid points, n in 2..10, failures {failures}")


def test_cross_module_soundness():
    rows, bad = [], []
    for name, info in sorted(fixture_manifest(DEFAULT_FIXTURES).items()):
        space = fixture_space(name)
        cert = certify_text((DEFAULT_FIXTURES / name).read_text(), info["dim"], space)
        rad = cert.radius
        # the conservative end of the enclosure: largest cos theta it allows
        r = rad.hi if space is Space.HYPERBOLIC else rad.lo
        run = sdp_bound(space, info["dim"], max(r, 0.0), 4)
        ok = run.bound is not None and cert.size <= run.bound + 1e-6
        rows.append(f"{name}: {cert.size} <= {run.bound}")
        if not ok:
            bad.append(name)
    verdict("cross-module soundness", bool(rows) and not bad,
            f"{len(rows)} fixtures at d=4, failing {bad}")


def test_asymptotics():
    prefactor = 2 * (math.pi / math.sqrt(12)) * 2
    radii = [10, 15, 20, 25, 30, 35, 40]
    ratios = [upper_bound_hyp(3, r).value / math.exp(2 * r) for r in radii]
    # once converged the differences are rounding noise, allowed a few ulps either way
    noise = 8 * math.ulp(ratios[-1])
    steps = np.diff(ratios)
    monotone = bool(np.all(steps >= -noise) or np.all(steps <= noise))
    shrinking = all(abs(b) <= abs(a) + noise for a, b in zip(steps, steps[1:]))
    drift = abs(ratios[-1] - ratios[-3]) / ratios[-1]
    magnitude = math.floor(math.log10(ratios[-1])) == math.floor(math.log10(prefactor))
    closed = asymptotic_hyp(3, 40) / math.exp(80)
    ok = monotone and shrinking and drift < 1e-6 and magnitude and closed == pytest.approx(prefactor, rel=1e-12)
    verdict("asymptotics", ok, f"ratio at r=40 {ratios[-1]:.9f}, prefactor {prefactor:.9f}, "
                               f"drift r=30..40 {drift:.1e}, monotone {monotone}")


def test_verifier_catches_perturbations():
    p = build_sdp(4, cos_theta_of_radius("S", 0.5).cos_theta, 4)
    s = solve(p)
    base = verify_solution(p, s)
    rng = np.random.default_rng(2024)
    caught, notes = 0, []
    for _ in range(20):
        bi = int(rng.integers(len(p.blocks)))
        blk = p.blocks[bi]
        r, c = sorted(int(x) for x in rng.integers(blk.size, size=2))
        if blk.kind == "diag":
            c = r
        rep = verify_solution(p, perturb(s, bi, r, c, 1e-3))
        if blk.name == "b" and (r, c) == (0, 0):
            # b11 sits in the objective only, so no equality row sees it
            hit = not rep.passed and not rep.objective_consistent
            notes.append(f"b[0,0] caught by objective check: {hit}")
        else:
            hit = rep.max_residual > 1e-7
        caught += hit
    verdict("verifier catches perturbations", base.passed and caught == 20,
            f"baseline verified {base.passed}, caught {caught}/20 {'; '.join(notes)}")
