"""NumPy fallback implementations of the hot kernels.

Semantics match ``corrineq._kernels._compiled``; the compiled module is
preferred at import time when available. Points are always (n, d) float64
arrays, one row per point.
"""

import numpy as np

# Block size for the vectorized Dykstra sweep; bounds the (m, block, d)
# correction buffer.
_BLOCK = 8192


def polytope_contains(normals, offsets, pts):
    """Membership mask for {x : normals @ x <= offsets}, boundary inclusive."""
    return np.asarray((pts @ normals.T <= offsets[None, :]).all(axis=1))


def _dykstra_block(normals, offsets, pts, tol, max_sweeps):
    n, d = pts.shape
    m = normals.shape[0]
    nrm2 = np.einsum("ij,ij->i", normals, normals)
    # the per-sweep change can plateau near zero while the iterate is still
    # infeasible, so stopping also requires primal feasibility
    feas_tol = 1e3 * tol * (1.0 + float(np.abs(offsets).max(initial=0.0)))
    x = pts.copy()
    corr = np.zeros((m, n, d))
    sweeps = np.zeros(n, dtype=np.int64)
    converged = np.zeros(n, dtype=bool)
    active = np.arange(n)
    for sweep in range(max_sweeps):
        xa = x[active]
        x_prev = xa.copy()
        for i in range(m):
            y = xa + corr[i, active]
            viol = (y @ normals[i] - offsets[i]) / nrm2[i]
            np.maximum(viol, 0.0, out=viol)
            x_new = y - viol[:, None] * normals[i][None, :]
            corr[i, active] = y - x_new
            xa = x_new
        x[active] = xa
        sweeps[active] = sweep + 1
        change = np.linalg.norm(xa - x_prev, axis=1)
        feas = (xa @ normals.T - offsets[None, :]).max(axis=1) <= feas_tol
        done = (change < tol) & feas
        converged[active[done]] = True
        active = active[~done]
        if active.size == 0:
            break
    return x, converged, sweeps


def polytope_project(normals, offsets, pts, tol, max_sweeps):
    """Dykstra projection of each point onto {x : normals @ x <= offsets}.

    Returns (projected, converged, sweeps). Points already inside are
    returned unchanged with zero sweeps.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    n = pts.shape[0]
    proj = pts.copy()
    converged = np.ones(n, dtype=bool)
    sweeps = np.zeros(n, dtype=np.int64)
    outside = ~polytope_contains(normals, offsets, pts)
    idx = np.nonzero(outside)[0]
    for start in range(0, idx.size, _BLOCK):
        blk = idx[start:start + _BLOCK]
        p, c, s = _dykstra_block(normals, offsets, pts[blk], tol, max_sweeps)
        proj[blk] = p
        converged[blk] = c
        sweeps[blk] = s
    return proj, converged, sweeps


def ellipsoid_contains(semi_axes, pts):
    """Membership mask for {x : sum (x_i/a_i)^2 <= 1}."""
    z = pts / semi_axes[None, :]
    return np.einsum("ij,ij->i", z, z) <= 1.0


def ellipsoid_project(semi_axes, pts, tol):
    """Nearest point on an axis-aligned ellipsoid, per row of pts.

    Solves the secular equation sum a_i^2 y_i^2 / (a_i^2 + lam)^2 = 1 by
    bisection on lam for exterior points; interior points pass through.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    proj = pts.copy()
    outside = ~ellipsoid_contains(semi_axes, pts)
    if not outside.any():
        return proj
    y = pts[outside]
    a2 = semi_axes * semi_axes
    lo = np.zeros(y.shape[0])
    hi = np.sqrt(np.einsum("ij,ij->i", y * a2[None, :], y))
    # g(hi) <= 0 since (a^2+lam)^2 >= lam^2; g(0) > 0 for exterior points
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        z = (semi_axes[None, :] * y) / (a2[None, :] + mid[:, None])
        g = np.einsum("ij,ij->i", z, z) - 1.0
        gt = g > 0.0
        lo = np.where(gt, mid, lo)
        hi = np.where(gt, hi, mid)
        if np.all(hi - lo <= tol * (1.0 + lo)):
            break
    lam = 0.5 * (lo + hi)
    proj[outside] = a2[None, :] * y / (a2[None, :] + lam[:, None])
    return proj
