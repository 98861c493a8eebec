"""Regenerate the bundled spherical-code fixtures.

Codes with a rational or simple closed form are written directly.  The rest
are found by maximising the minimal angle with sequential linear programming
on ``min s  s.t.  x_i . x_j <= s, |x_i| = 1``, basin hopping from a few
random starts, and Newton polishing on the active contacts.  Coordinates are
written with 16 significant digits.

    python3 scripts/make_fixtures.py [--starts K] [--only STEM ...]
"""
from __future__ import annotations

import argparse
import itertools
import json
import math
from pathlib import Path

import numpy as np
from scipy.optimize import linprog, minimize

OUT = Path(__file__).resolve().parent.parent / "src" / "kissing" / "fixtures"
PHI = "1.618033988749895"

# (file stem, dimension, point count)
# targets are 1 - 1/(1 + cosh 2r) or 1 - 1/(1 + cos 2r) at the tabulated radii
SEARCH = (
    [(f"pack-3-{n}", 3, n) for n in range(13, 25)]
    + [(f"pack-4-{n}", 4, n) for n in (25, 26, 27, 29, 30)]
    + [(f"sph-4-{n}", 4, n) for n in (9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 20, 21, 22)]
)
# these two need more random starts to reach the tabulated radius
MIN_STARTS = {"pack-4-29": 48, "sph-4-22": 48}


def icosahedron() -> list[list[str]]:
    pts = []
    for a, b in itertools.product(("1", "-1"), (PHI, "-" + PHI)):
        pts += [["0", a, b], [a, b, "0"], [b, "0", a]]
    return pts


def exact_codes() -> dict[str, tuple[int, list[list[str]]]]:
    codes = {"icosahedron": (3, icosahedron())}
    codes["antipodal"] = (5, [["1", "0", "0", "0", "0"], ["-1", "0", "0", "0", "0"]])
    codes["sph-4-2"] = (4, [["1", "0", "0", "0"], ["-1", "0", "0", "0"]])
    codes["sph-4-3"] = (4, [["1", "-1", "0", "0"], ["0", "1", "-1", "0"], ["-1", "0", "1", "0"]])
    codes["sph-4-4"] = (4, [["1", "1", "1", "0"], ["1", "-1", "-1", "0"],
                            ["-1", "1", "-1", "0"], ["-1", "-1", "1", "0"]])
    # regular simplex: no rational realisation exists, so write decimals
    simplex = _simplex5()
    codes["sph-4-5"] = (4, [[_fmt(x) for x in p] for p in simplex])
    cross = []
    for i in range(4):
        for s in ("1", "-1"):
            p = ["0"] * 4
            p[i] = s
            cross.append(p)
    codes["sph-4-8"] = (4, cross)
    cell = []
    for i, j in itertools.combinations(range(4), 2):
        for si, sj in itertools.product(("1", "-1"), repeat=2):
            p = ["0"] * 4
            p[i], p[j] = si, sj
            cell.append(p)
    codes["pack-4-24"] = (4, cell)
    return codes


def _simplex5() -> np.ndarray:
    e = np.eye(5) - 1 / 5
    # orthonormal basis of the hyperplane sum x = 0
    q, _ = np.linalg.qr(e[:, :4])
    pts = e @ q
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def _fmt(x: float) -> str:
    s = f"{x:.15e}"
    return "0" if float(s) == 0 else s


def _max_ip(x: np.ndarray) -> float:
    g = x @ x.T
    np.fill_diagonal(g, -np.inf)
    return float(g.max())


def _repel(x: np.ndarray, power: float, steps: int = 400) -> np.ndarray:
    n = x.shape[1]

    def energy(flat):
        y = flat.reshape(-1, n)
        norms = np.linalg.norm(y, axis=1, keepdims=True)
        u = y / norms
        diff = u[:, None, :] - u[None, :, :]
        d2 = (diff ** 2).sum(-1) + np.eye(len(u))
        e = d2 ** (-power / 2)
        np.fill_diagonal(e, 0.0)
        grad_u = -power * ((d2 ** (-power / 2 - 1))[:, :, None] * diff).sum(1)
        np.fill_diagonal(d2, 1.0)
        # project the gradient through the normalisation
        grad = (grad_u - (grad_u * u).sum(1, keepdims=True) * u) / norms
        return e.sum() / 2, grad.ravel()

    res = minimize(energy, x.ravel(), jac=True, method="L-BFGS-B", options={"maxiter": steps})
    y = res.x.reshape(-1, n)
    return y / np.linalg.norm(y, axis=1, keepdims=True)


def _slp(x: np.ndarray, iters: int = 400) -> np.ndarray:
    """Sequential LP with a box trust region on tangent moves."""
    npts, n = x.shape
    nv = npts * n + 1
    rho = 0.05
    t = _max_ip(x)
    for _ in range(iters):
        g = x @ x.T
        pairs = [(i, j) for i, j in itertools.combinations(range(npts), 2) if g[i, j] > t - 4 * rho - 1e-3]
        a = np.zeros((len(pairs), nv))
        b = np.empty(len(pairs))
        for k, (i, j) in enumerate(pairs):
            a[k, i * n:(i + 1) * n] = x[j]
            a[k, j * n:(j + 1) * n] = x[i]
            a[k, -1] = -1.0
            b[k] = -g[i, j]
        eq = np.zeros((npts, nv))
        for i in range(npts):
            eq[i, i * n:(i + 1) * n] = x[i]
        c = np.zeros(nv)
        c[-1] = 1.0
        bounds = [(-rho, rho)] * (nv - 1) + [(None, None)]
        res = linprog(c, A_ub=a, b_ub=b, A_eq=eq, b_eq=np.zeros(npts), bounds=bounds, method="highs")
        if res.status != 0:
            rho *= 0.5
            continue
        y = x + res.x[:-1].reshape(npts, n)
        y /= np.linalg.norm(y, axis=1, keepdims=True)
        ty = _max_ip(y)
        if ty < t:
            x, t = y, ty
            rho = min(0.2, rho * 1.5)
        else:
            rho *= 0.5
        if rho < 1e-13:
            break
    return x


def _polish(x: np.ndarray, rounds: int = 30) -> np.ndarray:
    """Gauss-Newton on the active contacts: make them all equal to a common s."""
    npts, n = x.shape
    for _ in range(rounds):
        s = _max_ip(x)
        g = x @ x.T
        active = [(i, j) for i, j in itertools.combinations(range(npts), 2) if g[i, j] > s - 1e-7]
        rows, rhs = [], []
        for i, j in active:
            row = np.zeros(npts * n + 1)
            row[i * n:(i + 1) * n] = x[j]
            row[j * n:(j + 1) * n] = x[i]
            row[-1] = -1.0
            rows.append(row)
            rhs.append(s - g[i, j])
        for i in range(npts):
            row = np.zeros(npts * n + 1)
            row[i * n:(i + 1) * n] = 2 * x[i]
            rows.append(row)
            rhs.append(1 - x[i] @ x[i])
        a = np.array(rows)
        step = np.linalg.lstsq(a, np.array(rhs), rcond=None)[0]
        y = x + step[:-1].reshape(npts, n)
        y /= np.linalg.norm(y, axis=1, keepdims=True)
        if _max_ip(y) > _max_ip(x) + 1e-15:
            break
        x = y
    return x


def search(n: int, npts: int, starts: int, seed: int, hops: int = 30) -> np.ndarray:
    """Random starts, each refined by basin hopping around the incumbent."""
    rng = np.random.default_rng(seed)
    best, best_t = None, math.inf
    for _ in range(starts):
        x = rng.standard_normal((npts, n))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        x = _slp(x)
        t = _max_ip(x)
        for _ in range(hops):
            y = x + rng.uniform(0.02, 0.3) * rng.standard_normal(x.shape)
            y = _slp(y / np.linalg.norm(y, axis=1, keepdims=True))
            ty = _max_ip(y)
            if ty < t - 1e-12:
                x, t = y, ty
        if t < best_t - 1e-13:
            best, best_t = x, t
    return _polish(best)


def write(stem: str, dim: int, points) -> None:
    text = "\n".join(" ".join(p) for p in points) + "\n"
    (OUT / f"{stem}.txt").write_text(text)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--starts", type=int, default=4)
    ap.add_argument("--only", nargs="*", help="file stems to regenerate")
    args = ap.parse_args()
    OUT.mkdir(parents=True, exist_ok=True)
    manifest_path = OUT / "manifest.json"
    manifest = json.loads(manifest_path.read_text()) if manifest_path.exists() else {}
    for stem, (dim, pts) in exact_codes().items():
        if args.only and stem not in args.only:
            continue
        write(stem, dim, pts)
        manifest[f"{stem}.txt"] = {"dim": dim, "size": len(pts)}
    for stem, dim, npts in SEARCH:
        if args.only and stem not in args.only:
            continue
        x = search(dim, npts, max(args.starts, MIN_STARTS.get(stem, 0)), seed=1000 * dim + npts)
        write(stem, dim, [[_fmt(v) for v in p] for p in x])
        manifest[f"{stem}.txt"] = {"dim": dim, "size": npts}
        print(f"{stem}: max inner product {_max_ip(x):.15f}", flush=True)
    manifest_path.write_text(json.dumps(dict(sorted(manifest.items())), indent=2) + "\n")


if __name__ == "__main__":
    main()
