"""Probability measures: rotationally invariant d(mu) = rho(|x|) dx and
products of symmetric 1D marginals, with truncation, tabulated CDF/quantile
machinery and inverse-transform samplers.

All tabulations use N_NODES uniform nodes (a power of two plus one, so the
trapezoid rule nests under refinement). Truncation radii are chosen so the
neglected tail is below TAIL_EPS; user-supplied grids imply their own
truncation.
"""

from dataclasses import dataclass
from math import gamma, pi

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import gammaincc

from .utils import rng_for

N_NODES = 65_537
TAIL_EPS = 1e-10


def sphere_area(d):
    """Surface measure of S^{d-1}: 2 pi^{d/2} / Gamma(d/2)."""
    return 2.0 * pi ** (d / 2.0) / gamma(d / 2.0)


def _cumtrapz(y, x):
    dx = np.diff(x)
    return np.concatenate([[0.0], np.cumsum(0.5 * (y[1:] + y[:-1]) * dx)])


@dataclass
class MeasureEstimate:
    """A measure/integral value with its uncertainty and provenance."""
    value: float
    std_error: float
    n_samples: int
    method: str  # mc | radial-quadrature | nested-quadrature | grid-oracle
    discretization_error: float = None

    def to_dict(self):
        d = {"value": self.value, "std_error": self.std_error,
             "n_samples": self.n_samples, "method": self.method}
        if self.discretization_error is not None:
            d["discretization_error"] = self.discretization_error
        return d


class Density1D:
    """Tabulated 1D density on [lo, hi] with CDF and quantile interpolation.

    The quantile is the monotone inverse of the CDF restricted to the grid
    region where CDF increments are resolvable in double precision; the
    attribute `resolved` marks that region (relevant only in extreme tails).
    """

    def __init__(self, grid, pdf, symmetric=False, tag="grid"):
        x = np.asarray(grid, dtype=np.float64)
        p = np.asarray(pdf, dtype=np.float64)
        if x.ndim != 1 or x.size < 3 or p.shape != x.shape:
            raise ValueError("grid and pdf must be matching 1D arrays")
        if np.any(p < 0):
            raise ValueError("density values must be nonnegative")
        cdf = _cumtrapz(p, x)
        total = cdf[-1]
        if total <= 0:
            raise ValueError("density integrates to zero")
        self.grid = x
        self.pdf = p / total
        self.cdf_values = cdf / total
        self.symmetric = bool(symmetric)
        self.tag = tag
        # strictly increasing section of the CDF, for inversion
        inc = np.concatenate([[True], np.diff(self.cdf_values) > 0])
        self._qx = x[inc]
        self._qp = self.cdf_values[inc]
        # region where increments are well above float quantization noise
        pmax = self.pdf.max()
        self.resolved = self.pdf >= 1e-7 * pmax

    @property
    def support(self):
        return float(self.grid[0]), float(self.grid[-1])

    def pdf_at(self, x):
        return np.interp(x, self.grid, self.pdf, left=0.0, right=0.0)

    def cdf(self, x):
        return np.interp(x, self.grid, self.cdf_values, left=0.0, right=1.0)

    def quantile(self, p):
        p = np.asarray(p, dtype=np.float64)
        if np.any((p < 0) | (p > 1)):
            raise ValueError("probabilities must lie in [0, 1]")
        return np.interp(p, self._qp, self._qx)

    def mass(self, a, b):
        return float(self.cdf(b) - self.cdf(a))

    def sample(self, n, rng):
        if isinstance(rng, (int, np.integer)):
            rng = rng_for(rng)
        return self.quantile(rng.random(n))

    def tilt(self, weight, tag="tilted"):
        """New density proportional to pdf(x) * weight(x)."""
        w = np.asarray(weight(self.grid), dtype=np.float64)
        return Density1D(self.grid, self.pdf * w,
                         symmetric=self.symmetric, tag=tag)


def gaussian_1d(sigma=1.0, r_max_sigmas=12.0):
    g = np.linspace(-r_max_sigmas * sigma, r_max_sigmas * sigma, N_NODES)
    pdf = np.exp(-0.5 * (g / sigma) ** 2) / (sigma * np.sqrt(2 * pi))
    return Density1D(g, pdf, symmetric=True, tag="gaussian")


def density_from_profile(profile, r_max, n_nodes=N_NODES, tag="profile"):
    """Symmetric 1D density with pdf proportional to profile(|x|)."""
    g = np.linspace(-r_max, r_max, n_nodes)
    pdf = np.asarray(profile(np.abs(g)), dtype=np.float64)
    if np.any(pdf <= 0):
        raise ValueError("profile must be strictly positive on [0, r_max]")
    return Density1D(g, pdf, symmetric=True, tag=tag)


def density_from_grid(t, rho):
    """Symmetric marginal from a positive profile grid on [0, R].

    Values between nodes come from monotone cubic (PCHIP) interpolation;
    continuity of the underlying profile is assumed, not certified.
    """
    t = np.asarray(t, dtype=np.float64)
    rho = np.asarray(rho, dtype=np.float64)
    if t[0] != 0 or np.any(np.diff(t) <= 0):
        raise ValueError("profile grid must start at 0 and increase")
    if np.any(rho <= 0):
        raise ValueError("profile values must be strictly positive")
    interp = PchipInterpolator(t, rho)
    return density_from_profile(lambda r: interp(r), t[-1], tag="grid")


class RadialDensity:
    """Rotationally invariant probability measure rho(|x|) dx on R^d.

    The radius under the measure has density proportional to
    rho(r) r^{d-1} on [0, r_max]; directions are uniform on the sphere.
    """

    def __init__(self, d, profile, r_max, tag="radial"):
        if d < 1:
            raise ValueError("dimension must be >= 1")
        self.d = int(d)
        self.r_max = float(r_max)
        self.tag = tag
        r = np.linspace(0.0, self.r_max, N_NODES)
        raw = np.asarray(profile(r), dtype=np.float64)
        if np.any(raw <= 0):
            raise ValueError("radial profile must be positive on [0, r_max]")
        radial_pdf = raw * r ** (self.d - 1)
        self.norm_const = float(sphere_area(self.d) * _cumtrapz(radial_pdf, r)[-1])
        self._profile = profile
        self.radial_law = Density1D(r, radial_pdf, tag=tag + "-radius")

    def rho(self, r):
        """Normalized profile value(s)."""
        return np.asarray(self._profile(np.asarray(r, dtype=np.float64))) / self.norm_const

    def total_mass(self):
        """Recompute sigma(S^{d-1}) * int rho(r) r^{d-1} dr (should be 1)."""
        r = self.radial_law.grid
        pdf = self.rho(r) * r ** (self.d - 1)
        return float(sphere_area(self.d) * _cumtrapz(pdf, r)[-1])

    def mass_of_ball(self, t):
        """Measure of the centered ball of radius t (deterministic path)."""
        return float(self.radial_law.cdf(t))

    def sample(self, n, rng):
        if isinstance(rng, (int, np.integer)):
            rng = rng_for(rng)
        radii = self.radial_law.sample(n, rng)
        dirs = rng.standard_normal((n, self.d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        return dirs * radii[:, None]

    def marginal_1d(self):
        """The 1D symmetric density rho(|x|), only meaningful for d = 1."""
        if self.d != 1:
            raise ValueError("marginal_1d is only defined for d = 1")
        return density_from_profile(lambda r: self.rho(r), self.r_max, tag=self.tag)

    def as_product(self):
        if self.tag != "gaussian":
            raise ValueError("only the Gaussian factors into a product")
        return ProductDensity([gaussian_1d() for _ in range(self.d)])

    def to_dict(self):
        return {"type": self.tag, "d": self.d, "r_max": self.r_max}


class ProductDensity:
    """Product of d symmetric 1D marginals."""

    def __init__(self, marginals):
        marginals = list(marginals)
        if not marginals:
            raise ValueError("need at least one marginal")
        for m in marginals:
            if not m.symmetric:
                raise ValueError("product marginals must be symmetric")
        self.marginals = marginals
        self.d = len(marginals)

    def sample(self, n, rng):
        if isinstance(rng, (int, np.integer)):
            rng = rng_for(rng)
        cols = [m.quantile(rng.random(n)) for m in self.marginals]
        return np.column_stack(cols)

    def density_at(self, pts):
        pts = np.atleast_2d(pts)
        out = np.ones(pts.shape[0])
        for i, m in enumerate(self.marginals):
            out *= m.pdf_at(pts[:, i])
        return out

    def box(self):
        los, his = zip(*[m.support for m in self.marginals])
        return np.array(los), np.array(his)

    def total_mass(self):
        return float(np.prod([m.cdf_values[-1] for m in self.marginals]))

    def to_dict(self):
        return {"type": "product", "d": self.d,
                "marginals": [m.tag for m in self.marginals]}


def _gaussian_r_max(d):
    r = 12.0
    while gammaincc(d / 2.0, r * r / 2.0) > TAIL_EPS:
        r += 1.0
    return r


def gaussian(d):
    """Standard Gaussian on R^d as a RadialDensity."""
    c = (2 * pi) ** (-d / 2.0)
    return RadialDensity(d, lambda r: c * np.exp(-0.5 * r * r),
                         _gaussian_r_max(d), tag="gaussian")


def gaussian_product(d):
    return ProductDensity([gaussian_1d() for _ in range(d)])


def exponential_power(d, alpha=1.0, beta=2.0):
    """Radial profile exp(-(r/alpha)^beta), normalized numerically."""
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")
    # grow the truncation radius until the tail is negligible
    r_max = 4.0 * alpha
    for _ in range(200):
        r = np.linspace(0, 1.5 * r_max, 4097)
        m = _cumtrapz(np.exp(-((r / alpha) ** beta)) * r ** (d - 1), r)
        if (m[-1] - np.interp(r_max, r, m)) <= TAIL_EPS * m[-1]:
            break
        r_max *= 1.5
    return RadialDensity(d, lambda r: np.exp(-((r / alpha) ** beta)),
                         r_max, tag="exppower")


def radial_from_grid(d, r, rho):
    """Radial measure from a positive profile grid; truncation at r[-1]."""
    r = np.asarray(r, dtype=np.float64)
    rho = np.asarray(rho, dtype=np.float64)
    if r[0] != 0 or np.any(np.diff(r) <= 0):
        raise ValueError("profile grid must start at 0 and increase")
    if np.any(rho <= 0):
        raise ValueError("profile values must be strictly positive")
    interp = PchipInterpolator(r, rho)
    return RadialDensity(d, lambda rr: interp(rr), r[-1], tag="radial-grid")


def sample(measure, n, seed):
    """i.i.d. draws from a RadialDensity or ProductDensity, seeded."""
    return measure.sample(n, rng_for(seed))


def cdf_1d(density, x):
    return float(density.cdf(x)) if np.isscalar(x) else density.cdf(x)


def quantile_1d(density, p):
    return float(density.quantile(p)) if np.isscalar(p) else density.quantile(p)
