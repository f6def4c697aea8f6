"""Core constructions and end-to-end verifiers: the function classes checked
probabilistically, the f_n approximants of indicators, the Phi profile
t -> mu(f 1_{B_t}) - mu(f) mu(B_t) with its turning point, the discrete FKG
inequality, slice monotonicity, and the inequality verifiers that produce
VerificationReports.

Verdict rule: `violated` only when the gap is below -(5 SE + 10 det_tol);
`confirmed` when the gap clears -det_tol; `inconclusive` between. Hypothesis
failures yield `inapplicable-hypothesis` instead of a gap verdict.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import bodies
from ._kernels import BACKEND
from .bodies import CheckReport, PROJ_TOL
from .integration import (ScalarField, indicator, mc_integral, mc_joint,
                          phi_derivative, sliced_measure, sphere_average,
                          _map_substreams, _slice_ellipsoid,
                          _slice_generalized, _substream_plan)
from .measures import (MeasureEstimate, ProductDensity, RadialDensity,
                       _cumtrapz, sphere_area)
from .utils import canonical_json, rng_for

from . import __version__

DEFAULT_N = 10**6
DEFAULT_M_DIRS = 256
DEFAULT_T_STEPS = 33


class FnApproximant(ScalarField):
    """f_n(x) = 1 - n min(1/n, dist(x, A)): 1 on A, 0 beyond 1/n, Lipschitz n."""

    def __init__(self, body, n):
        if n < 1:
            raise ValueError("approximant index must be >= 1")
        self.body = body
        self.n = int(n)
        # distance carries the projection tolerance into values
        self.value_tol = n * PROJ_TOL + 1e-12
        radius = None
        try:
            radius = body.bounding_radius() + 1.0 / n
        except Exception:
            pass
        super().__init__(body.dim,
                         lambda p: np.maximum(0.0, 1.0 - self.n * body.distance_batch(p)),
                         "fn-approximant", f0=None, support_radius=radius)


def fn_eval(approx, x):
    """Exact formula value at a single point."""
    return approx.at(x)


# ---------------------------------------------------------------------------
# Hypothesis checkers


def _value_slack(field):
    return getattr(field, "value_tol", 1e-9)


def check_class_Cd(field, measure, n_rays=64, n_levels=16, seed=0):
    """Probabilistic membership check for the class of bounded nonnegative
    functions with convex superlevel sets and maximum at the origin.

    Four parts: (a) f(x) <= f(0) on random points, (b) random superlevel
    midpoints stay in the level set, (c) monotone decay along random rays,
    (d) f(0) exceeds mu(f) - 3 SE.
    """
    slack = _value_slack(field)
    d = field.d
    f0 = field.f0
    pool = measure.sample(4096, rng_for(seed, 0))
    vals = field(pool)
    parts = {}
    witness = None

    bad = np.nonzero(vals > f0 + slack)[0]
    parts["max_at_origin"] = bad.size == 0
    if bad.size:
        witness = {"part": "max_at_origin", "x": pool[bad[0]].tolist(),
                   "value": float(vals[bad[0]]), "f0": f0}

    rng = rng_for(seed, 1)
    ok_levels = True
    n_pairs_checked = 0
    for _ in range(n_levels):
        c = rng.uniform(0.0, f0)
        idx = np.nonzero(vals > c)[0]
        if idx.size < 2:
            continue
        i = rng.choice(idx, size=64)
        j = rng.choice(idx, size=64)
        lam = rng.uniform(0.0, 1.0, size=64)[:, None]
        mid = lam * pool[i] + (1.0 - lam) * pool[j]
        fmid = field(mid)
        n_pairs_checked += 64
        viol = np.nonzero(fmid < c - slack)[0]
        if viol.size and ok_levels:
            ok_levels = False
            k = viol[0]
            if witness is None:
                witness = {"part": "superlevel_convexity", "level": float(c),
                           "x": pool[i[k]].tolist(), "y": pool[j[k]].tolist(),
                           "mid_value": float(fmid[k])}
    parts["superlevel_convexity"] = ok_levels

    rng = rng_for(seed, 2)
    dirs = rng.standard_normal((n_rays, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    if isinstance(measure, RadialDensity):
        r_top = field.support_radius or measure.r_max
    else:
        r_top = field.support_radius or float(np.max(np.abs(measure.box()[1])))
    ts = np.linspace(0.0, r_top, 64)
    ray_ok = True
    for k in range(n_rays):
        line = ts[:, None] * dirs[k][None, :]
        fv = field(line)
        inc = np.nonzero(np.diff(fv) > slack)[0]
        if inc.size:
            ray_ok = False
            if witness is None:
                witness = {"part": "ray_monotonicity",
                           "direction": dirs[k].tolist(),
                           "t": float(ts[inc[0] + 1])}
            break
    parts["ray_monotonicity"] = ray_ok

    # strictness of f(0) > mu(f) is a paper-level fact; numerically we
    # accept equality up to roundoff (the constant field is the edge case)
    est = mc_integral(measure, field, 65536, seed + 1)
    parts["origin_above_mean"] = f0 >= est.value - 3.0 * est.std_error - 1e-12
    if not parts["origin_above_mean"] and witness is None:
        witness = {"part": "origin_above_mean", "f0": f0, "mu_f": est.value,
                   "se": est.std_error}

    passed = all(parts.values())
    return CheckReport(passed, int(4096 + n_pairs_checked + n_rays * 64 + 65536),
                       witness, {"parts": parts, "mu_f": est.value})


def check_class_Cd_bar(field, measure, n_lines=64, n_pts=65, seed=0):
    """Every axis-parallel 1D restriction must peak at coordinate 0 and decay
    monotonically in the coordinate's absolute value."""
    slack = _value_slack(field)
    d = field.d
    base = measure.sample(n_lines, rng_for(seed, 0))
    if isinstance(measure, RadialDensity):
        r_top = measure.r_max
    else:
        r_top = float(np.max(np.abs(measure.box()[1])))
    if field.support_radius:
        r_top = min(r_top, field.support_radius * 1.5)
    ts = np.linspace(-r_top, r_top, n_pts)
    mid = n_pts // 2
    witness = None
    for k in range(n_lines):
        axis = k % d
        line = np.repeat(base[k][None, :], n_pts, axis=0)
        line[:, axis] = ts
        fv = field(line)
        peak_ok = np.all(fv <= fv[mid] + slack)
        dec_ok = np.all(np.diff(fv[mid:]) <= slack)
        inc_ok = np.all(np.diff(fv[:mid + 1]) >= -slack)
        if not (peak_ok and dec_ok and inc_ok):
            witness = {"axis": axis, "base": base[k].tolist(),
                       "part": "restriction_not_in_C1"}
            break
    return CheckReport(witness is None, n_lines * n_pts, witness,
                       {"n_lines": n_lines})


# ---------------------------------------------------------------------------
# Phi profile


@dataclass
class PhiProfile:
    t_grid: np.ndarray
    phi: np.ndarray
    phi_se: np.ndarray
    dphi: np.ndarray
    dphi_se: np.ndarray
    t1_estimate: float  # None when no sign change is detectable
    unimodal_verdict: bool
    mu_f: float
    method: str
    detail: dict

    def rows(self):
        return [(float(t), float(p), float(ps), float(dp))
                for t, p, ps, dp in zip(self.t_grid, self.phi, self.phi_se, self.dphi)]


def _radial_avg_table(field, measure, m_dirs, n_fine):
    """Sphere averages of the field on a fine radial grid (d <= 2)."""
    d = measure.d
    r = np.linspace(0.0, measure.r_max, n_fine)
    if d == 1:
        pts = np.concatenate([r, -r])[:, None]
        v = field(pts)
        avg = 0.5 * (v[:n_fine] + v[n_fine:])
    else:
        ang = np.arange(m_dirs) * (2 * np.pi / m_dirs)
        dirs = np.column_stack([np.cos(ang), np.sin(ang)])
        pts = (r[:, None, None] * dirs[None, :, :]).reshape(-1, 2)
        avg = field(pts).reshape(n_fine, m_dirs).mean(axis=1)
    return r, avg


def _avg_quadrature_tol(field, m_dirs, d):
    if d == 1:
        return 1e-12
    if field.tag in ("indicator-of-body", "fn-approximant"):
        return field.f0 * 4.0 / m_dirs
    return 1e-9


def phi_profile(field, measure, t_grid=None, n=DEFAULT_N, m_dirs=DEFAULT_M_DIRS,
                seed=0, n_fine=8193):
    """Phi(t) = mu(f 1_{B_t}) - mu(f) mu(B_t) on a radius grid, with Phi',
    the first turning point t1, and an increase-then-decrease verdict.

    d <= 2 runs on the deterministic radial-quadrature path (SE 0); d >= 3
    estimates Phi by common-random-number MC and Phi' by MC sphere averages.
    """
    if not isinstance(measure, RadialDensity):
        raise TypeError("phi_profile requires a radial measure")
    d = measure.d
    if t_grid is None:
        t_grid = np.linspace(0.05, min(6.0, measure.r_max), DEFAULT_T_STEPS)
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if t_grid.size == 0:
        raise ValueError("empty radius grid")

    if d <= 2:
        r, avg = _radial_avg_table(field, measure, m_dirs, n_fine)
        h = sphere_area(d) * measure.rho(r) * r ** (d - 1) * avg
        cum = _cumtrapz(h, r)
        mu_f = float(cum[-1])
        mu_fb = np.interp(t_grid, r, cum)
        mu_b = np.array([measure.mass_of_ball(t) for t in t_grid])
        phi = mu_fb - mu_f * mu_b
        phi_se = np.zeros_like(phi)
        dphi = np.array([phi_derivative(field, measure, t, m_dirs, mu_f)
                         for t in t_grid])
        dphi_se = np.zeros_like(dphi)
        method = "radial-quadrature"

        def dphi_fn(t):
            return phi_derivative(field, measure, t, m_dirs, mu_f)

        det_tol = _avg_quadrature_tol(field, m_dirs, d)
    else:
        plan = _substream_plan(n)

        def work(item):
            stream, count = item
            pts = measure.sample(count, rng_for(seed, stream))
            return np.linalg.norm(pts, axis=1), field(pts)

        parts = _map_substreams(work, plan)
        radii = np.concatenate([p[0] for p in parts])
        fv = np.concatenate([p[1] for p in parts])
        order = np.argsort(radii, kind="stable")
        radii = radii[order]
        fv = fv[order]
        cf = np.concatenate([[0.0], np.cumsum(fv)])
        cf2 = np.concatenate([[0.0], np.cumsum(fv * fv)])
        idx = np.searchsorted(radii, t_grid, side="right")
        m_fb = cf[idx] / n
        m_f2b = cf2[idx] / n
        m_b = idx / n
        mu_f = float(cf[-1] / n)
        mu_f2 = float(cf2[-1] / n)
        phi = m_fb - mu_f * m_b
        # delta method for (fI, f, I) with gradient (1, -mu_B, -mu_f)
        var = np.maximum(
            (m_f2b - m_fb**2)
            + m_b**2 * (mu_f2 - mu_f**2)
            + mu_f**2 * (m_b - m_b**2)
            - 2 * m_b * (m_f2b - m_fb * mu_f)
            - 2 * mu_f * (m_fb - m_fb * m_b)
            + 2 * m_b * mu_f * (m_fb - mu_f * m_b), 0.0)
        phi_se = np.sqrt(var / n)
        dphi = np.empty_like(t_grid)
        dphi_se = np.empty_like(t_grid)
        for i, t in enumerate(t_grid):
            est = sphere_average(field, t, m_dirs, seed + 7000 + i)
            scale = float(measure.rho(t)) * t ** (d - 1) * sphere_area(d)
            dphi[i] = scale * (est.value - mu_f)
            dphi_se[i] = scale * est.std_error
        method = "mc"
        dphi_fn = None
        det_tol = 0.0

    t1, bracket = _first_sign_change(t_grid, dphi, dphi_se, dphi_fn, det_tol)
    unimodal = _unimodal_verdict(t_grid, dphi, dphi_se, t1, det_tol)
    return PhiProfile(t_grid, phi, phi_se, dphi, dphi_se, t1, unimodal,
                      mu_f, method,
                      {"det_tol": det_tol, "bracket": bracket, "n": int(n),
                       "m_dirs": int(m_dirs), "seed": int(seed)})


def _first_sign_change(t_grid, dphi, dphi_se, dphi_fn, det_tol):
    """First + -> - bracket of Phi'; deterministic paths refine by bisection.
    MC paths only accept brackets where both ends clear 3 SE."""
    for i in range(len(t_grid) - 1):
        a, b = dphi[i], dphi[i + 1]
        if a > 0 >= b:
            if dphi_fn is None:
                if a < 3 * dphi_se[i] or -b < 3 * dphi_se[i + 1]:
                    continue
                return float(0.5 * (t_grid[i] + t_grid[i + 1])), \
                    (float(t_grid[i]), float(t_grid[i + 1]))
            lo, hi = t_grid[i], t_grid[i + 1]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if dphi_fn(mid) > 0:
                    lo = mid
                else:
                    hi = mid
                if hi - lo < 1e-10:
                    break
            return float(0.5 * (lo + hi)), (float(t_grid[i]), float(t_grid[i + 1]))
    return None, None


def _unimodal_verdict(t_grid, dphi, dphi_se, t1, det_tol):
    tol = 3.0 * dphi_se + det_tol + 1e-9
    if t1 is None:
        return bool(np.all(dphi >= -tol) or np.all(dphi <= tol))
    before = t_grid <= t1
    return bool(np.all(dphi[before] >= -tol[before])
                and np.all(dphi[~before] <= tol[~before]))


# ---------------------------------------------------------------------------
# FKG on an interval


def fkg_check(x, nu, f, g, discrete=False):
    """FKG for comonotone f, g against a density grid (or point masses).

    Returns lhs = int fg dnu, rhs = int f dnu int g dnu, their gap, and (for
    small grids) the double-sum oracle 0.5 sum_ij w_i w_j (f_i-f_j)(g_i-g_j).
    """
    x = np.asarray(x, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if not (x.shape == nu.shape == f.shape == g.shape) or x.ndim != 1:
        raise ValueError("x, nu, f, g must be matching 1D arrays")
    if np.any(nu < 0):
        raise ValueError("density values must be nonnegative")
    if x.size > 1 and np.any(np.diff(x) <= 0):
        raise ValueError("x must be strictly increasing")

    def direction(v):
        dv = np.diff(v)
        tol = 1e-12 * max(1.0, float(np.max(np.abs(v))))
        up, down = np.any(dv > tol), np.any(dv < -tol)
        if up and down:
            return None
        return 1 if up else (-1 if down else 0)

    df, dg = direction(f), direction(g)
    if df is None or dg is None or df * dg == -1:
        raise ValueError("comonotonicity required: f and g must be monotone "
                         "in the same direction")

    if discrete or x.size < 3:
        w = nu.copy()
    else:
        w = nu.copy()
        dx = np.diff(x)
        tw = np.zeros_like(x)
        tw[:-1] += 0.5 * dx
        tw[1:] += 0.5 * dx
        w *= tw
    total = w.sum()
    if total <= 0:
        raise ValueError("measure has zero mass")
    w /= total

    lhs = float(np.sum(w * f * g))
    rhs = float(np.sum(w * f) * np.sum(w * g))
    out = {"lhs": lhs, "rhs": rhs, "gap": lhs - rhs, "oracle_gap": None}
    if x.size <= 4096:
        acc = 0.0
        for i0 in range(0, x.size, 512):
            fi = f[i0:i0 + 512][:, None]
            gi = g[i0:i0 + 512][:, None]
            wi = w[i0:i0 + 512][:, None]
            acc += float(np.sum(wi * w[None, :] * (fi - f[None, :]) * (gi - g[None, :])))
        out["oracle_gap"] = 0.5 * acc
    return out


# ---------------------------------------------------------------------------
# Slice monotonicity


def slice_monotonicity_check(product_measure, body, axis, grid,
                             nodes_per_level=64):
    """s(v) = mass of the (d-1)-dimensional slice at coordinate `axis` = v;
    checks evenness and monotone decrease in |v|."""
    if not isinstance(product_measure, ProductDensity):
        raise TypeError("slice check requires a product measure")
    d = product_measure.d
    if body.dim != d or not 0 <= axis < d:
        raise ValueError("bad axis or dimension mismatch")
    if d < 2:
        raise ValueError("slicing needs d >= 2")
    rest = [m for i, m in enumerate(product_measure.marginals) if i != axis]
    grid = np.asarray(grid, dtype=np.float64)

    from .integration import _ellipsoid_axes
    axes = _ellipsoid_axes(body)
    if axes is not None:
        a_axis = axes[axis]
        a_rest = np.delete(axes, axis)

        def s_of(v):
            budget = 1.0 - (v / a_axis) ** 2
            if budget <= 0:
                return 0.0
            return _slice_ellipsoid(rest, a_rest * np.sqrt(budget), nodes_per_level)
    elif isinstance(body, bodies.GeneralizedBall):
        comps = [(t.copy(), f.copy()) for i, (t, f) in enumerate(body.grids)
                 if i != axis]
        reduced = bodies.GeneralizedBall(comps)

        def s_of(v):
            budget = 1.0 - float(body.component_value(axis, abs(v)))
            if budget <= 0:
                return 0.0
            return _slice_generalized(rest, reduced, nodes_per_level, s0=budget)
    else:
        raise ValueError("body is not coordinate-separable")

    vals = np.array([s_of(v) for v in grid])
    mirror = np.array([s_of(-v) for v in grid])
    tol = 1e-7
    even_dev = float(np.max(np.abs(vals - mirror))) if grid.size else 0.0
    pos = grid >= 0
    pv = vals[pos][np.argsort(grid[pos])]
    increase = float(np.max(np.diff(pv))) if pv.size > 1 else 0.0
    passed = even_dev <= tol and increase <= tol
    witness = None
    if not passed:
        witness = {"even_dev": even_dev, "max_increase": increase}
    return CheckReport(passed, int(grid.size * 2), witness,
                       {"values": vals.tolist(), "even_dev": even_dev,
                        "max_increase": increase})


# ---------------------------------------------------------------------------
# Verification reports and theorem verifiers


@dataclass
class VerificationReport:
    theorem: str
    verdict: str  # confirmed | violated | inconclusive | inapplicable-hypothesis
    gap: float
    gap_se: float
    lhs: float
    rhs: float
    hypothesis_checks: dict
    provenance: dict
    extras: dict = dc_field(default_factory=dict)

    def to_dict(self):
        return {"theorem": self.theorem, "verdict": self.verdict,
                "gap": self.gap, "gap_se": self.gap_se,
                "lhs": self.lhs, "rhs": self.rhs,
                "hypothesis_checks": self.hypothesis_checks,
                "provenance": self.provenance, "extras": self.extras}

    def to_json(self):
        return canonical_json(self.to_dict())


def _verdict(gap, se, det_tol=0.0):
    if gap < -(5.0 * se + 10.0 * det_tol + 1e-12):
        return "violated"
    if gap >= -(det_tol + 1e-12):
        return "confirmed"
    return "inconclusive"


def _provenance(seed, n, method, **extra):
    p = {"seed": int(seed), "n_samples": int(n), "method": method,
         "backend": BACKEND, "version": __version__}
    p.update(extra)
    return p


def _inapplicable(theorem, checks, seed, n):
    return VerificationReport(theorem, "inapplicable-hypothesis", None, None,
                              None, None, checks,
                              _provenance(seed, n, "none"))


def verify_theorem_2_1(field, measure, ball_radius, n=DEFAULT_N,
                       m_dirs=DEFAULT_M_DIRS, seed=0, skip_hypothesis=False,
                       n_fine=8193):
    """mu(f 1_B) >= mu(f) mu(B) for a centered ball B and f in the class."""
    checks = {}
    if not skip_hypothesis:
        rep = check_class_Cd(field, measure, seed=seed)
        checks["class_Cd"] = rep.to_dict()
        if not rep.passed:
            return _inapplicable("2.1", checks, seed, n)

    d = measure.d
    if d <= 2:
        r, avg = _radial_avg_table(field, measure, m_dirs, n_fine)
        h = sphere_area(d) * measure.rho(r) * r ** (d - 1) * avg
        cum = _cumtrapz(h, r)
        mu_f = float(cum[-1])
        lhs = float(np.interp(ball_radius, r, cum))
        mu_b = measure.mass_of_ball(ball_radius)
        gap = lhs - mu_f * mu_b
        det_tol = max(2e-5 * max(field.f0, 1.0),
                      _avg_quadrature_tol(field, m_dirs, d))
        return VerificationReport(
            "2.1", _verdict(gap, 0.0, det_tol), float(gap), 0.0, lhs,
            float(mu_f * mu_b), checks,
            _provenance(seed, n_fine, "radial-quadrature", det_tol=det_tol),
            {"mu_f": mu_f, "mu_B": mu_b, "ball_radius": float(ball_radius)})

    plan = _substream_plan(n)
    r2 = ball_radius * ball_radius

    def work(item):
        stream, count = item
        pts = measure.sample(count, rng_for(seed, stream))
        fv = field(pts)
        ib = np.einsum("ij,ij->i", pts, pts) <= r2
        fb = fv * ib
        return (fb.sum(), (fb * fb).sum(), fv.sum(), (fv * fv).sum(),
                float(ib.sum()))

    parts = _map_substreams(work, plan)
    s_fb, s_fb2, s_f, s_f2, s_b = [sum(p[k] for p in parts) for k in range(5)]
    m_fb, m_f2b, m_f, m_f2, m_b = s_fb / n, s_fb2 / n, s_f / n, s_f2 / n, s_b / n
    gap = m_fb - m_f * m_b
    var = max(
        (m_f2b - m_fb**2)
        + m_b**2 * (m_f2 - m_f**2)
        + m_f**2 * (m_b - m_b**2)
        - 2 * m_b * (m_f2b - m_fb * m_f)
        - 2 * m_f * (m_fb - m_fb * m_b)
        + 2 * m_b * m_f * (m_fb - m_f * m_b), 0.0)
    se = float(np.sqrt(var / n))
    return VerificationReport(
        "2.1", _verdict(gap, se), float(gap), se, float(m_fb),
        float(m_f * m_b), checks, _provenance(seed, n, "mc"),
        {"mu_f": float(m_f), "mu_B": float(m_b),
         "ball_radius": float(ball_radius)})


def verify_theorem_1_1(A, measure, ball_radius, n=DEFAULT_N, seed=0,
                       approx_ladder=(2, 4, 8, 16, 32), approx_n=100_000):
    """mu(A ∩ B) >= mu(A) mu(B) for bounded convex A containing the origin
    and a centered ball B, under a radial measure.

    Also exercises the approximation route: mu(f_n) decreasing toward mu(A)
    on a common sample stream, with the f_n-based gaps reported alongside.
    """
    checks = {}
    origin_in = bool(A.contains(np.zeros(A.dim)))
    checks["contains_origin"] = {"passed": origin_in}
    try:
        radius = A.bounding_radius()
        checks["bounded"] = {"passed": True, "bounding_radius": float(radius)}
    except bodies.UnboundedBodyError as exc:
        checks["bounded"] = {"passed": False, "detail": str(exc)}
        return _inapplicable("1.1", checks, seed, n)
    if not origin_in:
        return _inapplicable("1.1", checks, seed, n)

    B = bodies.Ball(ball_radius, A.dim)
    joint = mc_joint(measure, A, B, n, seed)
    extras = {"mu_A": joint.a.value, "mu_B": joint.b.value,
              "mu_AB": joint.ab.value, "ball_radius": float(ball_radius)}

    if approx_ladder:
        pts = measure.sample(approx_n, rng_for(seed, 900_000))
        dist = A.distance_batch(pts)
        in_b = np.linalg.norm(pts, axis=1) <= ball_radius
        mu_a_crn = float(np.mean(dist <= 1e-12))
        ladder = []
        for idx in approx_ladder:
            fv = np.maximum(0.0, 1.0 - idx * dist)
            ladder.append({"n": int(idx),
                           "mu_fn": float(fv.mean()),
                           "gap_fn": float((fv * in_b).mean()
                                           - fv.mean() * in_b.mean())})
        extras["approximation_route"] = {
            "mu_A_crn": mu_a_crn, "ladder": ladder,
            "monotone": bool(all(ladder[i]["mu_fn"] >= ladder[i + 1]["mu_fn"]
                                 for i in range(len(ladder) - 1)))}

    return VerificationReport(
        "1.1", _verdict(joint.gap, joint.gap_se), joint.gap, joint.gap_se,
        joint.ab.value, float(joint.a.value * joint.b.value), checks,
        _provenance(seed, n, "mc"), extras)


def verify_theorem_1_2(A, product_measure, B, n=DEFAULT_N, seed=0,
                       check_samples=1000):
    """mu(A ∩ B) >= mu(A) mu(B) under a product measure, for convex bounded
    projection-closed A and a centered ellipsoid (or generalized ball) B."""
    checks = {}
    rep = bodies.is_projection_closed(A, n_samples=check_samples, rng_seed=seed)
    checks["projection_closed"] = rep.to_dict()
    try:
        radius = A.bounding_radius()
        checks["bounded"] = {"passed": True, "bounding_radius": float(radius)}
    except bodies.UnboundedBodyError as exc:
        checks["bounded"] = {"passed": False, "detail": str(exc)}
        return _inapplicable("1.2", checks, seed, n)
    if not rep.passed:
        return _inapplicable("1.2", checks, seed, n)

    joint = mc_joint(product_measure, A, B, n, seed)
    extras = {"mu_A": joint.a.value, "mu_B": joint.b.value,
              "mu_AB": joint.ab.value}
    if product_measure.d <= 4:
        try:
            sl = sliced_measure(product_measure, B)
            extras["mu_B_sliced"] = sl.value
            extras["mu_B_consistent"] = bool(
                abs(sl.value - joint.b.value) <= 4 * joint.b.std_error + 1e-6)
        except ValueError:
            pass
    return VerificationReport(
        "1.2", _verdict(joint.gap, joint.gap_se), joint.gap, joint.gap_se,
        joint.ab.value, float(joint.a.value * joint.b.value), checks,
        _provenance(seed, n, "mc"), extras)
