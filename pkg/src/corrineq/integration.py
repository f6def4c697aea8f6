"""Estimation engines: Monte Carlo with error bars and common random
numbers, spherical averages, the radial-derivative formula
rho(t) t^{d-1} sigma(S^{d-1}) (avg_f(t) - mu(f)), nested 1D quadrature for
coordinate-separable bodies, and a fine-grid 2D oracle.

Monte Carlo runs on a fixed substream plan: the sample budget is split into
chunks of MC_CHUNK draws, substream i seeded from (seed, stream=i), partial
sums merged in index order. The plan depends only on the budget, so results
are byte-identical for any worker count.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import pi

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import bodies
from .measures import (Density1D, MeasureEstimate, ProductDensity,
                       RadialDensity, sphere_area)
from .utils import rng_for, thread_count

MC_CHUNK = 1 << 18


class ScalarField:
    """Nonnegative bounded test integrand with batch evaluation.

    `func` maps an (n, d) array to an (n,) array of values in [0, f0].
    """

    def __init__(self, d, func, tag, f0=None, support_radius=None):
        self.d = int(d)
        self._func = func
        self.tag = tag
        self.f0 = float(f0) if f0 is not None else float(self(np.zeros((1, d)))[0])
        self.support_radius = support_radius

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        if pts.shape[1] != self.d:
            raise bodies.DimensionMismatchError(
                f"field is {self.d}-dimensional, points are {pts.shape[1]}-dimensional")
        vals = np.asarray(self._func(pts), dtype=np.float64)
        if not np.all(np.isfinite(vals)):
            raise ValueError("field produced non-finite values")
        return vals

    def at(self, x):
        return float(self(np.asarray(x, dtype=np.float64)[None, :])[0])

    def to_dict(self):
        return {"tag": self.tag, "d": self.d, "f0": self.f0}


def indicator(body):
    return ScalarField(body.dim, lambda p: body.contains_batch(p).astype(np.float64),
                       "indicator-of-body", f0=None,
                       support_radius=_try_radius(body))


def _try_radius(body):
    try:
        return body.bounding_radius()
    except Exception:
        return None


def gaussian_bump(d, scale=1.0, center=None):
    """exp(-|x - c|^2 / (2 scale^2)); log-concave, symmetric when c = 0."""
    c = np.zeros(d) if center is None else np.asarray(center, dtype=np.float64)
    return ScalarField(
        d, lambda p: np.exp(-0.5 * np.sum((p - c) ** 2, axis=1) / scale**2),
        "log-concave-closed-form")


def constant_field(d, value=1.0):
    return ScalarField(d, lambda p: np.full(p.shape[0], float(value)),
                       "log-concave-closed-form", f0=value)


class DecreasingPhi:
    """Nonincreasing phi: R+ -> R+, closed form or grid; validated at input."""

    def __init__(self, func=None, grid=None, values=None, name="phi"):
        if func is not None:
            probe = np.linspace(0.0, 50.0, 4097)
            v = np.asarray(func(probe), dtype=np.float64)
            if np.any(np.diff(v) > 1e-12):
                raise ValueError("phi must be nonincreasing")
            self._func, self._grid, self._values = func, None, None
        else:
            g = np.asarray(grid, dtype=np.float64)
            v = np.asarray(values, dtype=np.float64)
            if g.ndim != 1 or g.shape != v.shape or np.any(np.diff(g) <= 0):
                raise ValueError("phi grid must be increasing and match values")
            if np.any(np.diff(v) > 1e-12):
                raise ValueError("phi must be nonincreasing")
            self._func, self._grid, self._values = None, g, v
        self.name = name

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self._func is not None:
            return np.asarray(self._func(t), dtype=np.float64)
        return np.interp(t, self._grid, self._values)


def composed_quadratic(sigma_matrix, phi: DecreasingPhi):
    """x -> phi(<Sigma x, x>) for symmetric PD Sigma and nonincreasing phi."""
    S = np.asarray(sigma_matrix, dtype=np.float64)
    d = S.shape[0]
    if S.shape != (d, d) or not np.allclose(S, S.T, atol=1e-12):
        raise ValueError("Sigma must be symmetric")
    def f(p):
        q = np.einsum("ij,jk,ik->i", p, S, p)
        return phi(q)
    return ScalarField(d, f, "composed-quadratic")


# ---------------------------------------------------------------------------
# Monte Carlo with a fixed substream plan


def _substream_plan(n):
    """[(stream_index, count), ...] independent of worker count."""
    plan = []
    i, left = 0, int(n)
    while left > 0:
        take = min(MC_CHUNK, left)
        plan.append((i, take))
        i += 1
        left -= take
    return plan


def _map_substreams(work, plan):
    threads = thread_count()
    if threads <= 1 or len(plan) <= 1:
        return [work(item) for item in plan]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(work, plan))


def mc_integral(measure, field, n, seed):
    """Plain MC estimate of mu(field) with std_error = sd/sqrt(n)."""
    if n <= 0:
        raise ValueError("sample budget must be positive")
    plan = _substream_plan(n)

    def work(item):
        stream, count = item
        pts = measure.sample(count, rng_for(seed, stream))
        v = field(pts)
        return v.sum(), (v * v).sum()

    parts = _map_substreams(work, plan)
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0)
    return MeasureEstimate(float(mean), float(np.sqrt(var / n)), int(n), "mc")


@dataclass
class JointEstimate:
    """CRN estimates of mu(A∩B), mu(A), mu(B) and the gap mu(A∩B)-mu(A)mu(B)."""
    ab: MeasureEstimate
    a: MeasureEstimate
    b: MeasureEstimate
    gap: float
    gap_se: float
    n_samples: int
    seed: int

    def to_dict(self):
        return {"ab": self.ab.to_dict(), "a": self.a.to_dict(),
                "b": self.b.to_dict(), "gap": self.gap, "gap_se": self.gap_se,
                "n_samples": self.n_samples, "seed": self.seed}


def _gap_se(p_ab, p_a, p_b, n):
    # delta method for g = m_ab - m_a m_b with indicator moments:
    # all pairwise products of the three indicators reduce to 1_{A∩B}
    g = np.array([1.0, -p_b, -p_a])
    S = np.array([
        [p_ab - p_ab * p_ab, p_ab - p_ab * p_a, p_ab - p_ab * p_b],
        [p_ab - p_ab * p_a, p_a - p_a * p_a, p_ab - p_a * p_b],
        [p_ab - p_ab * p_b, p_ab - p_a * p_b, p_b - p_b * p_b]])
    var = max(float(g @ S @ g), 0.0)
    return float(np.sqrt(var / n))


def mc_joint(measure, body_a, body_b, n, seed):
    """mu(A∩B), mu(A), mu(B) from one sample stream, plus the gap estimate."""
    if n <= 0:
        raise ValueError("sample budget must be positive")
    if body_a.dim != body_b.dim:
        raise bodies.DimensionMismatchError("bodies disagree on dimension")
    plan = _substream_plan(n)

    def work(item):
        stream, count = item
        pts = measure.sample(count, rng_for(seed, stream))
        wa = body_a.contains_batch(pts)
        wb = body_b.contains_batch(pts)
        return int((wa & wb).sum()), int(wa.sum()), int(wb.sum())

    parts = _map_substreams(work, plan)
    c_ab = sum(p[0] for p in parts)
    c_a = sum(p[1] for p in parts)
    c_b = sum(p[2] for p in parts)
    p_ab, p_a, p_b = c_ab / n, c_a / n, c_b / n

    def est(p):
        return MeasureEstimate(float(p), float(np.sqrt(max(p * (1 - p), 0.0) / n)),
                               int(n), "mc")

    return JointEstimate(est(p_ab), est(p_a), est(p_b),
                         float(p_ab - p_a * p_b), _gap_se(p_ab, p_a, p_b, n),
                         int(n), int(seed))


# ---------------------------------------------------------------------------
# Spherical averages and the radial derivative formula


def sphere_average(field, t, m_dirs=256, seed=0):
    """(1/sigma(S^{d-1})) * int_{S^{d-1}} f(t theta) dsigma(theta).

    d=1 and d=2 are deterministic (two-point / periodic trapezoid); d>=3
    uses Monte Carlo directions.
    """
    if t < 0:
        raise ValueError("radius must be nonnegative")
    if m_dirs < 2:
        raise ValueError("need at least 2 directions")
    d = field.d
    if d == 1:
        v = 0.5 * (field(np.array([[t]])) + field(np.array([[-t]])))
        return MeasureEstimate(float(v[0]), 0.0, 2, "radial-quadrature")
    if d == 2:
        ang = np.arange(m_dirs) * (2 * pi / m_dirs)
        pts = t * np.column_stack([np.cos(ang), np.sin(ang)])
        return MeasureEstimate(float(field(pts).mean()), 0.0, int(m_dirs),
                               "radial-quadrature")
    dirs = rng_for(seed, 0).standard_normal((m_dirs, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    v = field(t * dirs)
    return MeasureEstimate(float(v.mean()), float(v.std(ddof=0) / np.sqrt(m_dirs)),
                           int(m_dirs), "mc")


def phi_derivative(field, measure, t, m_dirs, mu_f, seed=0):
    """rho(t) t^{d-1} int_{S^{d-1}} [f(t theta) - mu(f)] dsigma(theta)."""
    if not isinstance(measure, RadialDensity):
        raise TypeError("phi_derivative requires a radial measure")
    d = measure.d
    if t == 0.0 and d >= 2:
        return 0.0
    avg = sphere_average(field, t, m_dirs, seed).value
    rho = float(measure.rho(t))
    return rho * t ** (d - 1) * sphere_area(d) * (avg - mu_f)


# ---------------------------------------------------------------------------
# Nested sliced quadrature for separable bodies


def _ellipsoid_axes(body):
    if isinstance(body, bodies.Ball):
        return np.full(body.dim, body.radius)
    if isinstance(body, bodies.Ellipsoid):
        return body.semi_axes
    if isinstance(body, bodies.QuadraticEllipsoid):
        off = body.matrix - np.diag(np.diag(body.matrix))
        if np.max(np.abs(off)) > 1e-12:
            raise ValueError("rotated ellipsoid is not coordinate-separable")
        return 1.0 / np.sqrt(np.diag(body.matrix))
    return None


def _slice_ellipsoid(marginals, axes, q):
    """mu(ellipse(axes)) by recursing on the squared-radius budget s in [0,1];
    the slice coordinate uses t = a sqrt(s) sin(theta) so integrands stay
    smooth at the boundary."""
    u, w = leggauss(q)
    theta = 0.5 * pi * u
    wt = 0.5 * pi * w
    ct, st = np.cos(theta), np.sin(theta)

    def level(k, s):
        width = axes[k] * np.sqrt(s)
        if k == 0:
            return marginals[0].cdf(width) - marginals[0].cdf(-width)
        t = width[:, None] * st[None, :]
        pdf = marginals[k].pdf_at(t.ravel()).reshape(t.shape)
        inner = level(k - 1, (s[:, None] * (ct * ct)[None, :]).ravel())
        inner = inner.reshape(t.shape)
        return np.sum(pdf * inner * width[:, None] * (ct * wt)[None, :], axis=1)

    return float(level(len(axes) - 1, np.array([1.0]))[0])


def _slice_generalized(marginals, body, q, s0=1.0):
    """mu(generalized ball at level budget s0) by recursing on the budget.

    Marginals are symmetric and the level sum depends on |t|, so each level
    integrates over [0, width] and doubles; this also keeps the |t| kink of
    the level sum at the interval endpoint where Gauss nodes cluster."""
    u, w = leggauss(q)
    u01 = 0.5 * (u + 1.0)

    def level(k, s):
        width = body.component_inverse(k, np.clip(s, 0.0, np.inf))
        if k == 0:
            return marginals[0].cdf(width) - marginals[0].cdf(-width)
        t = width[:, None] * u01[None, :]
        pdf = marginals[k].pdf_at(t.ravel()).reshape(t.shape)
        s_next = s[:, None] - body.component_value(k, t.ravel()).reshape(t.shape)
        inner = level(k - 1, np.clip(s_next, 0.0, np.inf).ravel()).reshape(t.shape)
        return np.sum(pdf * inner * width[:, None] * w[None, :], axis=1)

    return float(level(len(marginals) - 1, np.array([float(s0)]))[0])


def _slice_value(product_measure, body, q):
    axes = _ellipsoid_axes(body)
    if axes is not None:
        return _slice_ellipsoid(product_measure.marginals, axes, q)
    if isinstance(body, bodies.GeneralizedBall):
        return _slice_generalized(product_measure.marginals, body, q)
    raise ValueError("body is not coordinate-separable")


def sliced_measure(product_measure, body, nodes_per_level=64):
    """Deterministic mu(B) by nested Gauss-Legendre over coordinate slices.

    Returns the refined (doubled-node) value; discretization_error is the
    difference between the two resolutions.
    """
    if not isinstance(product_measure, ProductDensity):
        raise TypeError("sliced_measure requires a product measure")
    d = product_measure.d
    if body.dim != d:
        raise bodies.DimensionMismatchError("body/measure dimension mismatch")
    if d > 4:
        raise ValueError("sliced quadrature is limited to d <= 4; use MC")
    coarse = _slice_value(product_measure, body, nodes_per_level)
    fine = _slice_value(product_measure, body, 2 * nodes_per_level)
    return MeasureEstimate(fine, 0.0, (2 * nodes_per_level) ** max(d - 1, 1),
                           "nested-quadrature",
                           discretization_error=abs(fine - coarse))


# ---------------------------------------------------------------------------
# Fine-grid oracle (d = 2 only)


def _density_lookup(measure):
    if isinstance(measure, RadialDensity):
        lo = np.array([-measure.r_max, -measure.r_max])
        hi = -lo
        def dens(pts):
            r = np.linalg.norm(pts, axis=1)
            out = np.where(r <= measure.r_max, measure.rho(np.minimum(r, measure.r_max)), 0.0)
            return out
        return lo, hi, dens
    if isinstance(measure, ProductDensity):
        lo, hi = measure.box()
        return lo, hi, measure.density_at
    raise TypeError("unsupported measure")


def grid_oracle_2d(measure, field, cells_per_axis=4096):
    """Midpoint-rule integral of field against the measure's density on the
    truncation box. Test oracle only; d = 2."""
    if measure.d != 2:
        raise ValueError("grid oracle is 2D only")
    lo, hi, dens = _density_lookup(measure)
    m = int(cells_per_axis)
    hx = (hi[0] - lo[0]) / m
    hy = (hi[1] - lo[1]) / m
    xs = lo[0] + (np.arange(m) + 0.5) * hx
    total = 0.0
    block = max(1, (1 << 21) // m)
    ys = lo[1] + (np.arange(m) + 0.5) * hy
    for j0 in range(0, m, block):
        yb = ys[j0:j0 + block]
        X, Y = np.meshgrid(xs, yb, indexing="ij")
        pts = np.column_stack([X.ravel(), Y.ravel()])
        total += float(np.sum(field(pts) * dens(pts)))
    return MeasureEstimate(total * hx * hy, 0.0, m * m, "grid-oracle")
