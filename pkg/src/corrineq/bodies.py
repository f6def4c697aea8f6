"""Convex body representations with membership, projection and distance.

Variants: balls and axis-aligned ellipsoids centered at the origin,
quadratic-form ellipsoids {<S x, x> <= 1}, halfspace intersections
(H-polytopes), generalized balls {sum f_i(|x_i|) <= 1} with strictly
increasing component functions, and finite intersections. All bodies are
closed (boundary counts as inside) and immutable after construction.

Projection onto an H-polytope uses Dykstra's alternating projections onto
the halfspaces; onto an ellipsoid, bisection on the Lagrange-multiplier
secular equation. Generalized balls support membership only: they may be
non-convex, so nearest-point projection is not defined for them here.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ._kernels import (ellipsoid_contains, ellipsoid_project,
                       polytope_contains, polytope_project)
from .utils import rng_for

PROJ_TOL = 1e-9
MAX_SWEEPS = 10_000
_FEAS_TOL = 1e-9
ACCEPT_RATE_FLOOR = 1e-4


class DimensionMismatchError(ValueError):
    pass


class UnboundedBodyError(ValueError):
    pass


class ProjectionError(RuntimeError):
    """Dykstra failed to converge; carries the last iterate and residual."""

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class UnsupportedOperationError(TypeError):
    pass


class SamplingError(RuntimeError):
    pass


@dataclass
class CheckReport:
    """Outcome of a probabilistic hypothesis check.

    Passing does not prove the property; a witness disproves it.
    """
    passed: bool
    n_checked: int
    witness: object = None
    detail: str = ""

    def to_dict(self):
        w = self.witness
        if isinstance(w, np.ndarray):
            w = w.tolist()
        return {"passed": bool(self.passed), "n_checked": int(self.n_checked),
                "witness": w, "detail": self.detail}


def _as_points(x, dim):
    pts = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if pts.shape[1] != dim:
        raise DimensionMismatchError(
            f"point dimension {pts.shape[1]} != body dimension {dim}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must have finite coordinates")
    return pts


class ConvexBody:
    """Base class; subclasses set self.dim and implement the batch ops."""

    dim = None

    def contains_batch(self, pts):
        raise NotImplementedError

    def project_batch(self, pts):
        raise NotImplementedError

    def contains(self, x):
        return bool(self.contains_batch(_as_points(x, self.dim))[0])

    def project(self, x):
        return self.project_batch(_as_points(x, self.dim))[0]

    def distance_batch(self, pts):
        pts = _as_points(pts, self.dim)
        return np.linalg.norm(pts - self.project_batch(pts), axis=1)

    def distance(self, x):
        return float(self.distance_batch(_as_points(x, self.dim))[0])

    def bounding_radius(self):
        raise NotImplementedError

    def bounding_box(self):
        """(lo, hi) axis-aligned box containing the body."""
        r = self.bounding_radius()
        return -r * np.ones(self.dim), r * np.ones(self.dim)

    def to_dict(self):
        raise NotImplementedError


class Ball(ConvexBody):
    def __init__(self, radius, dim):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = float(radius)
        self.dim = int(dim)

    def contains_batch(self, pts):
        pts = _as_points(pts, self.dim)
        return np.einsum("ij,ij->i", pts, pts) <= self.radius ** 2

    def project_batch(self, pts):
        pts = _as_points(pts, self.dim)
        nrm = np.linalg.norm(pts, axis=1)
        scale = np.where(nrm > self.radius, self.radius / np.maximum(nrm, 1e-300), 1.0)
        return pts * scale[:, None]

    def distance_batch(self, pts):
        pts = _as_points(pts, self.dim)
        return np.maximum(np.linalg.norm(pts, axis=1) - self.radius, 0.0)

    def bounding_radius(self):
        return self.radius

    def to_dict(self):
        return {"type": "ball", "radius": self.radius, "d": self.dim}


class Ellipsoid(ConvexBody):
    """Axis-aligned: {x : sum (x_i / a_i)^2 <= 1}."""

    def __init__(self, semi_axes):
        a = np.asarray(semi_axes, dtype=np.float64)
        if a.ndim != 1 or a.size < 1 or np.any(a <= 0):
            raise ValueError("semi_axes must be a vector of positive reals")
        self.semi_axes = a
        self.dim = a.size

    def contains_batch(self, pts):
        return ellipsoid_contains(self.semi_axes, _as_points(pts, self.dim))

    def project_batch(self, pts):
        return ellipsoid_project(self.semi_axes, _as_points(pts, self.dim), 1e-12)

    def bounding_radius(self):
        return float(self.semi_axes.max())

    def bounding_box(self):
        return -self.semi_axes.copy(), self.semi_axes.copy()

    def to_dict(self):
        return {"type": "ellipsoid", "semi_axes": self.semi_axes.tolist()}


class QuadraticEllipsoid(ConvexBody):
    """{x : <S x, x> <= 1} for a symmetric positive-definite matrix S."""

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        if not np.allclose(m, m.T, atol=1e-12):
            raise ValueError("matrix must be symmetric")
        try:
            np.linalg.cholesky(m)
        except np.linalg.LinAlgError as exc:
            raise ValueError("matrix must be positive definite") from exc
        self.matrix = 0.5 * (m + m.T)
        self.dim = m.shape[0]
        evals, evecs = np.linalg.eigh(self.matrix)
        self._evecs = evecs
        self._axes = 1.0 / np.sqrt(evals)

    def contains_batch(self, pts):
        pts = _as_points(pts, self.dim)
        return np.einsum("ij,jk,ik->i", pts, self.matrix, pts) <= 1.0

    def project_batch(self, pts):
        pts = _as_points(pts, self.dim)
        z = pts @ self._evecs
        return ellipsoid_project(self._axes, z, 1e-12) @ self._evecs.T

    def bounding_radius(self):
        return float(self._axes.max())

    def to_dict(self):
        return {"type": "quadratic_ellipsoid", "matrix": self.matrix.tolist()}


class HPolytope(ConvexBody):
    """{x : <n_j, x> <= b_j for all j}.

    For d > 3 a bounding radius hint must be supplied; for d <= 3
    boundedness and the radius are certified by vertex enumeration.
    """

    def __init__(self, normals, offsets, radius_hint=None):
        n = np.ascontiguousarray(normals, dtype=np.float64)
        b = np.ascontiguousarray(offsets, dtype=np.float64)
        if n.ndim != 2 or b.ndim != 1 or n.shape[0] != b.size:
            raise ValueError("need (m, d) normals and (m,) offsets")
        if np.any(np.linalg.norm(n, axis=1) == 0):
            raise ValueError("halfspace normals must be nonzero")
        self.normals = n
        self.offsets = b
        self.dim = n.shape[1]
        self.radius_hint = None if radius_hint is None else float(radius_hint)
        self._vertices = None

    def contains_batch(self, pts):
        return polytope_contains(self.normals, self.offsets,
                                 _as_points(pts, self.dim))

    def project_batch(self, pts):
        pts = _as_points(pts, self.dim)
        proj, converged, sweeps = polytope_project(
            self.normals, self.offsets, pts, PROJ_TOL, MAX_SWEEPS)
        if not converged.all():
            i = int(np.nonzero(~converged)[0][0])
            residual = float(np.max(pts[i] @ self.normals.T - self.offsets))
            raise ProjectionError(
                f"Dykstra did not converge in {MAX_SWEEPS} sweeps "
                "(empty polytope?)", last_iterate=proj[i], residual=residual)
        return proj

    def vertices(self):
        """Vertex enumeration, d <= 3 only; cached."""
        if self.dim > 3:
            raise UnboundedBodyError(
                "vertex enumeration only supported for d <= 3")
        if self._vertices is None:
            verts = []
            for idx in combinations(range(len(self.offsets)), self.dim):
                sub = self.normals[list(idx)]
                if abs(np.linalg.det(sub)) < 1e-12:
                    continue
                v = np.linalg.solve(sub, self.offsets[list(idx)])
                if np.all(self.normals @ v <= self.offsets + _FEAS_TOL * (1 + np.abs(self.offsets))):
                    verts.append(v)
            self._vertices = np.array(verts) if verts else np.empty((0, self.dim))
        return self._vertices

    def _recession_direction(self):
        """A nonzero direction of recession, or None when the cone is {0}."""
        N = self.normals
        d = self.dim
        if np.linalg.matrix_rank(N, tol=1e-10) < d:
            # directions orthogonal to all normals recede
            _, _, vt = np.linalg.svd(N)
            return vt[-1]
        if d == 1:
            for v in (np.array([1.0]), np.array([-1.0])):
                if np.all(N @ v <= 1e-12):
                    return v
            return None
        # extreme rays have d-1 active constraints
        for idx in combinations(range(N.shape[0]), d - 1):
            sub = N[list(idx)]
            _, s, vt = np.linalg.svd(sub)
            null_dims = d - np.sum(s > 1e-10 * max(1.0, s[0] if s.size else 1.0))
            if null_dims != 1:
                continue
            v = vt[-1]
            for cand in (v, -v):
                if np.all(N @ cand <= 1e-10):
                    return cand
        return None

    def bounding_radius(self):
        if self.radius_hint is not None:
            return self.radius_hint
        if self.dim > 3:
            raise UnboundedBodyError(
                "d > 3 H-polytopes need an explicit radius_hint")
        if self._recession_direction() is not None:
            raise UnboundedBodyError("polytope is unbounded")
        verts = self.vertices()
        if verts.shape[0] == 0:
            raise ValueError("polytope appears to be empty")
        return float(np.linalg.norm(verts, axis=1).max())

    def bounding_box(self):
        if self.dim <= 3 and self.radius_hint is None:
            self.bounding_radius()  # certifies boundedness
            verts = self.vertices()
            return verts.min(axis=0), verts.max(axis=0)
        return super().bounding_box()

    def to_dict(self):
        d = {"type": "hpolytope",
             "halfspaces": [{"n": n.tolist(), "b": float(b)}
                            for n, b in zip(self.normals, self.offsets)]}
        if self.radius_hint is not None:
            d["radius_hint"] = self.radius_hint
        return d


class GeneralizedBall(ConvexBody):
    """{x : sum_i f_i(|x_i|) <= 1} with strictly increasing f_i, f_i(0) = 0.

    Possibly non-convex; membership only. Component functions are given as
    monotone grids and evaluated by linear interpolation (linear
    extrapolation past the last node).
    """

    def __init__(self, components):
        self.grids = []
        for grid_t, grid_f in components:
            t = np.asarray(grid_t, dtype=np.float64)
            f = np.asarray(grid_f, dtype=np.float64)
            if t.size < 2 or t.size != f.size:
                raise ValueError("component grids need >= 2 matching nodes")
            if t[0] != 0 or f[0] != 0:
                raise ValueError("component grids must start at (0, 0)")
            if np.any(np.diff(t) <= 0) or np.any(np.diff(f) <= 0):
                raise ValueError("component grids must be strictly increasing")
            self.grids.append((t, f))
        self.dim = len(self.grids)
        if self.dim < 1:
            raise ValueError("need at least one component")

    def _component(self, i, r):
        t, f = self.grids[i]
        out = np.interp(r, t, f)
        beyond = r > t[-1]
        if np.any(beyond):
            slope = (f[-1] - f[-2]) / (t[-1] - t[-2])
            out = np.where(beyond, f[-1] + slope * (r - t[-1]), out)
        return out

    def component_value(self, i, r):
        """f_i(r) for r >= 0, vectorized."""
        return self._component(i, np.asarray(r, dtype=np.float64))

    def component_inverse(self, i, level):
        """f_i^{-1}(level) for level >= 0, vectorized."""
        t, f = self.grids[i]
        level = np.asarray(level, dtype=np.float64)
        out = np.interp(level, f, t)
        beyond = level > f[-1]
        if np.any(beyond):
            slope = (f[-1] - f[-2]) / (t[-1] - t[-2])
            out = np.where(beyond, t[-1] + (level - f[-1]) / slope, out)
        return out if out.ndim else float(out)

    def level_sum(self, pts):
        pts = _as_points(pts, self.dim)
        total = np.zeros(pts.shape[0])
        for i in range(self.dim):
            total += self._component(i, np.abs(pts[:, i]))
        return total

    def contains_batch(self, pts):
        return self.level_sum(pts) <= 1.0

    def project_batch(self, pts):
        raise UnsupportedOperationError(
            "generalized balls may be non-convex; projection/distance "
            "are not defined for them")

    def bounding_box(self):
        hi = np.array([self.component_inverse(i, 1.0) for i in range(self.dim)])
        return -hi, hi

    def bounding_radius(self):
        return float(np.linalg.norm(self.bounding_box()[1]))

    def to_dict(self):
        return {"type": "generalized_ball",
                "components": [{"grid_t": t.tolist(), "grid_f": f.tolist()}
                               for t, f in self.grids]}


class Intersection(ConvexBody):
    def __init__(self, bodies):
        bodies = list(bodies)
        if not bodies:
            raise ValueError("intersection of nothing")
        dims = {b.dim for b in bodies}
        if len(dims) != 1:
            raise DimensionMismatchError("member dimensions differ")
        self.bodies = bodies
        self.dim = dims.pop()

    def contains_batch(self, pts):
        pts = _as_points(pts, self.dim)
        mask = np.ones(pts.shape[0], dtype=bool)
        for b in self.bodies:
            mask &= b.contains_batch(pts)
        return mask

    def project_batch(self, pts):
        # Dykstra over the member bodies, each projected exactly
        pts = _as_points(pts, self.dim)
        x = pts.copy()
        corr = [np.zeros_like(pts) for _ in self.bodies]
        for sweep in range(MAX_SWEEPS):
            x_prev = x.copy()
            for i, b in enumerate(self.bodies):
                y = x + corr[i]
                x = b.project_batch(y)
                corr[i] = y - x
            if np.linalg.norm(x - x_prev, axis=1).max() < PROJ_TOL:
                return x
        raise ProjectionError(
            f"Dykstra over members did not converge in {MAX_SWEEPS} sweeps",
            last_iterate=x[0], residual=float(np.linalg.norm(x[0] - x_prev[0])))

    def bounding_radius(self):
        radii = []
        for b in self.bodies:
            try:
                radii.append(b.bounding_radius())
            except UnboundedBodyError:
                continue
        if not radii:
            raise UnboundedBodyError("no member provides a bounding radius")
        return min(radii)

    def bounding_box(self):
        los, his = zip(*[b.bounding_box() for b in self.bodies])
        return np.max(los, axis=0), np.min(his, axis=0)

    def to_dict(self):
        return {"type": "intersection",
                "bodies": [b.to_dict() for b in self.bodies]}


# --- module-level operations -------------------------------------------------

def contains(body, x):
    return body.contains(x)


def project(body, x):
    return body.project(x)


def distance(body, x):
    return body.distance(x)


def bounding_radius(body):
    return body.bounding_radius()


def contains_origin(body):
    return body.contains(np.zeros(body.dim))


def sample_in_body(body, n, rng, max_rate_inverse=None):
    """Uniform rejection sample of n points from the body's interior.

    Draws uniformly in the bounding box. Raises SamplingError when the
    acceptance rate falls below ACCEPT_RATE_FLOOR.
    """
    lo, hi = body.bounding_box()
    if max_rate_inverse is None:
        max_rate_inverse = 1.0 / ACCEPT_RATE_FLOOR
    out = []
    got, tried = 0, 0
    batch = max(4096, 2 * n)
    while got < n:
        pts = rng.uniform(lo, hi, size=(batch, body.dim))
        keep = pts[body.contains_batch(pts)]
        out.append(keep[: n - got])
        got += min(len(keep), n - got)
        tried += batch
        if got < n and tried > max(20_000, n * max_rate_inverse):
            raise SamplingError(
                f"rejection acceptance rate below floor ({got}/{tried}); "
                "increase the sample budget or supply a tighter box")
    return np.vstack(out)


def is_projection_closed(body, n_samples=1000, rng_seed=0):
    """Check x in A => zeroing any one coordinate stays in A (probabilistic)."""
    rng = rng_for(rng_seed)
    pts = sample_in_body(body, n_samples, rng)
    for i in range(body.dim):
        proj = pts.copy()
        proj[:, i] = 0.0
        bad = ~body.contains_batch(proj)
        if bad.any():
            j = int(np.nonzero(bad)[0][0])
            return CheckReport(False, n_samples, witness=pts[j],
                               detail=f"zeroing coordinate {i} leaves the set")
    return CheckReport(True, n_samples)


def is_symmetric(body, n_samples=1000, rng_seed=0):
    """Check x in A => -x in A (probabilistic)."""
    rng = rng_for(rng_seed)
    pts = sample_in_body(body, n_samples, rng)
    bad = ~body.contains_batch(-pts)
    if bad.any():
        j = int(np.nonzero(bad)[0][0])
        return CheckReport(False, n_samples, witness=pts[j],
                           detail="-x left the set")
    return CheckReport(True, n_samples)


def box_body(lo, hi):
    """Axis-aligned box [lo, hi] as an HPolytope."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    d = lo.size
    eye = np.eye(d)
    return HPolytope(np.vstack([eye, -eye]), np.concatenate([hi, -lo]))


def simplex_body(weights=None, level=1.0, d=None):
    """{x_i >= 0, sum w_i x_i <= level}; the standard simplex by default."""
    if weights is None:
        weights = np.ones(d)
    w = np.asarray(weights, dtype=np.float64)
    d = w.size
    normals = np.vstack([-np.eye(d), w])
    offsets = np.concatenate([np.zeros(d), [level]])
    return HPolytope(normals, offsets)
