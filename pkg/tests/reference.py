"""Independent reference implementations used as test oracles.

These deliberately avoid the library's own code paths: brute-force
nearest neighbors, a plain cyclic Jacobi eigensolver, and a
numerically-integrated Bjontegaard metric.
"""

import numpy as np
from scipy.integrate import quad


def brute_force_nearest(queries: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Exhaustive nearest neighbor; ties broken by lowest index."""
    out = np.empty(len(queries), dtype=np.int64)
    for qi, q in enumerate(queries):
        d2 = np.sum((points - q) ** 2, axis=1)
        out[qi] = int(np.argmin(d2))  # first occurrence = lowest index
    return out


def jacobi_eigh(matrix: np.ndarray, sweeps: int = 60, tol: float = 1e-14):
    """Cyclic-by-row Jacobi diagonalization of a symmetric matrix.

    Returns (eigenvalues ascending, eigenvector columns).  Slow; for
    small test matrices only.
    """
    a = np.array(matrix, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(1.0, float(np.abs(a).max()))
    for _ in range(sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                if tau == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    values = np.diag(a).copy()
    order = np.argsort(values, kind="stable")
    return values[order], v[:, order]


def bd_rate_numeric(curve_a, curve_b) -> float:
    """Bjontegaard delta rate with quadrature instead of the closed-form
    polynomial integral."""
    def fit(curve):
        rate = np.array([c[0] for c in curve], dtype=np.float64)
        ps = np.array([c[1] for c in curve], dtype=np.float64)
        return np.polyfit(ps, np.log(rate), 3), ps.min(), ps.max()

    poly_a, lo_a, hi_a = fit(curve_a)
    poly_b, lo_b, hi_b = fit(curve_b)
    lo, hi = max(lo_a, lo_b), min(hi_a, hi_b)
    int_a, _ = quad(lambda p: np.polyval(poly_a, p), lo, hi)
    int_b, _ = quad(lambda p: np.polyval(poly_b, p), lo, hi)
    return (np.exp((int_b - int_a) / (hi - lo)) - 1.0) * 100.0


def random_spatial_graph(n: int, edge_prob: float, rng):
    """Random weighted edge list (i < j) for oracle graph tests."""
    ii, jj, ww = [], [], []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.uniform() < edge_prob:
                ii.append(i)
                jj.append(j)
                ww.append(rng.uniform(0.2, 1.0))
    from pgft.graph import SpatialGraph

    return SpatialGraph(n=n, edges_i=np.array(ii, dtype=np.int64),
                        edges_j=np.array(jj, dtype=np.int64),
                        weights=np.array(ww, dtype=np.float64),
                        epsilon_sq=0.0, sigma_sq=0.4)
