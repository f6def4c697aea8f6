"""JSON config parsing for the CLI: bodies, measures, scalar fields, and
profile functions, plus whole per-theorem instance configs.

The dict schema mirrors the bodies' to_dict output, so configs and report
descriptors round-trip: {"type": "ball", "radius": 1.0, "d": 2}.
"""

import json

import numpy as np

from . import bodies, transport
from .integration import (DecreasingPhi, composed_quadratic, constant_field,
                          gaussian_bump, indicator)
from .engine import FnApproximant
from .measures import (ProductDensity, density_from_grid, exponential_power,
                       gaussian, gaussian_1d, gaussian_product,
                       radial_from_grid)


class ConfigError(ValueError):
    """Malformed or semantically invalid config; maps to CLI exit 3."""


def _require(cfg, key, kind):
    if key not in cfg:
        raise ConfigError(f"{kind} config missing required key {key!r}")
    return cfg[key]


def _as_array(value, kind, key):
    try:
        arr = np.asarray(value, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{kind}.{key} is not numeric: {exc}") from None
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{kind}.{key} contains non-finite entries")
    return arr


def parse_body(cfg):
    if not isinstance(cfg, dict):
        raise ConfigError("body config must be a JSON object")
    kind = _require(cfg, "type", "body")
    try:
        if kind == "ball":
            return bodies.Ball(float(_require(cfg, "radius", "ball")),
                               int(_require(cfg, "d", "ball")))
        if kind == "ellipsoid":
            return bodies.Ellipsoid(_as_array(
                _require(cfg, "semi_axes", "ellipsoid"), "ellipsoid", "semi_axes"))
        if kind == "quadratic_ellipsoid":
            return bodies.QuadraticEllipsoid(_as_array(
                _require(cfg, "matrix", "quadratic_ellipsoid"),
                "quadratic_ellipsoid", "matrix"))
        if kind == "hpolytope":
            halfspaces = _require(cfg, "halfspaces", "hpolytope")
            if not halfspaces:
                raise ConfigError("hpolytope needs at least one halfspace")
            normals = _as_array([h["n"] for h in halfspaces], "hpolytope", "n")
            offsets = _as_array([h["b"] for h in halfspaces], "hpolytope", "b")
            hint = cfg.get("radius_hint")
            return bodies.HPolytope(normals, offsets, radius_hint=hint)
        if kind == "box":
            lo = _as_array(_require(cfg, "lo", "box"), "box", "lo")
            hi = _as_array(_require(cfg, "hi", "box"), "box", "hi")
            return bodies.box_body(lo, hi)
        if kind == "generalized_ball":
            comps = []
            for c in _require(cfg, "components", "generalized_ball"):
                comps.append((_as_array(c["grid_t"], "generalized_ball", "grid_t"),
                              _as_array(c["grid_f"], "generalized_ball", "grid_f")))
            return bodies.GeneralizedBall(comps)
        if kind == "intersection":
            parts = [parse_body(b)
                     for b in _require(cfg, "bodies", "intersection")]
            return bodies.Intersection(parts)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {kind} body: {exc}") from None
    raise ConfigError(f"unknown body type {kind!r}")


def parse_marginal(cfg):
    """One symmetric 1D density: {"type": "gaussian", "sigma": s} or
    {"type": "grid", "t": [...], "rho": [...]}."""
    if not isinstance(cfg, dict):
        raise ConfigError("marginal config must be a JSON object")
    kind = _require(cfg, "type", "marginal")
    try:
        if kind == "gaussian":
            return gaussian_1d(float(cfg.get("sigma", 1.0)))
        if kind == "grid":
            t = _as_array(_require(cfg, "t", "grid marginal"), "marginal", "t")
            rho = _as_array(_require(cfg, "rho", "grid marginal"),
                            "marginal", "rho")
            return density_from_grid(t, rho)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {kind} marginal: {exc}") from None
    raise ConfigError(f"unknown marginal type {kind!r}")


def parse_measure(cfg):
    if not isinstance(cfg, dict):
        raise ConfigError("measure config must be a JSON object")
    kind = _require(cfg, "type", "measure")
    try:
        if kind == "gaussian":
            return gaussian(int(_require(cfg, "d", "gaussian")))
        if kind == "product_gaussian":
            return gaussian_product(int(_require(cfg, "d", "product_gaussian")))
        if kind == "product":
            marginals = [parse_marginal(m)
                         for m in _require(cfg, "marginals", "product")]
            return ProductDensity(marginals)
        if kind == "radial_grid":
            return radial_from_grid(
                int(_require(cfg, "d", "radial_grid")),
                _as_array(_require(cfg, "r", "radial_grid"), "radial_grid", "r"),
                _as_array(_require(cfg, "rho", "radial_grid"), "radial_grid", "rho"))
        if kind == "exponential_power":
            return exponential_power(int(_require(cfg, "d", "exponential_power")),
                                     float(cfg.get("alpha", 1.0)),
                                     float(cfg.get("beta", 2.0)))
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {kind} measure: {exc}") from None
    raise ConfigError(f"unknown measure type {kind!r}")


def parse_phi(cfg):
    if not isinstance(cfg, dict):
        raise ConfigError("phi config must be a JSON object")
    kind = _require(cfg, "type", "phi")
    try:
        if kind == "exp":
            rate = float(cfg.get("rate", 1.0))
            if rate < 0:
                raise ConfigError("exp phi needs rate >= 0 to be nonincreasing")
            return DecreasingPhi(func=lambda t: np.exp(-rate * t),
                                 name=f"exp-{rate}")
        if kind == "ramp":
            return transport.phi_n(int(_require(cfg, "n", "ramp phi")))
        if kind == "constant":
            level = float(cfg.get("value", 1.0))
            return DecreasingPhi(func=lambda t: np.full_like(
                np.asarray(t, dtype=np.float64), level), name="constant")
        if kind == "grid":
            return DecreasingPhi(
                grid=_as_array(_require(cfg, "t", "grid phi"), "phi", "t"),
                values=_as_array(_require(cfg, "values", "grid phi"),
                                 "phi", "values"),
                name="grid")
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {kind} phi: {exc}") from None
    raise ConfigError(f"unknown phi type {kind!r}")


def parse_field(cfg):
    if not isinstance(cfg, dict):
        raise ConfigError("field config must be a JSON object")
    kind = _require(cfg, "type", "field")
    try:
        if kind == "indicator":
            return indicator(parse_body(_require(cfg, "body", "indicator")))
        if kind == "fn":
            return FnApproximant(parse_body(_require(cfg, "body", "fn")),
                                 int(_require(cfg, "n", "fn")))
        if kind == "gaussian_bump":
            return gaussian_bump(int(_require(cfg, "d", "gaussian_bump")),
                                 scale=float(cfg.get("scale", 1.0)),
                                 center=cfg.get("center"))
        if kind == "constant":
            return constant_field(int(_require(cfg, "d", "constant")),
                                  float(cfg.get("value", 1.0)))
        if kind == "composed_quadratic":
            sigma = _as_array(_require(cfg, "sigma", "composed_quadratic"),
                              "composed_quadratic", "sigma")
            return composed_quadratic(sigma, parse_phi(
                _require(cfg, "phi", "composed_quadratic")))
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {kind} field: {exc}") from None
    raise ConfigError(f"unknown field type {kind!r}")


def _sigma_matrix(cfg, d_hint=None):
    sigma = cfg.get("sigma")
    if sigma is None:
        if d_hint is None:
            raise ConfigError("config needs a sigma matrix")
        return np.eye(int(d_hint))
    mat = _as_array(sigma, "config", "sigma")
    if mat.ndim == 1:
        mat = np.diag(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ConfigError("sigma must be a square matrix or a diagonal vector")
    return mat


def load_instance(cfg, theorem):
    """Extract the verifier inputs for one theorem from a parsed JSON dict."""
    if not isinstance(cfg, dict):
        raise ConfigError("top-level config must be a JSON object")
    if theorem == "1.1":
        A = parse_body(_require(cfg, "A", "theorem 1.1"))
        measure = parse_measure(_require(cfg, "measure", "theorem 1.1"))
        return {"A": A, "measure": measure,
                "ball_radius": float(_require(cfg, "ball_radius", "theorem 1.1"))}
    if theorem == "1.2":
        return {"A": parse_body(_require(cfg, "A", "theorem 1.2")),
                "measure": parse_measure(_require(cfg, "measure", "theorem 1.2")),
                "B": parse_body(_require(cfg, "B", "theorem 1.2"))}
    if theorem == "2.1":
        return {"field": parse_field(_require(cfg, "field", "theorem 2.1")),
                "measure": parse_measure(_require(cfg, "measure", "theorem 2.1")),
                "ball_radius": float(_require(cfg, "ball_radius", "theorem 2.1"))}
    if theorem == "4.1":
        field = parse_field(_require(cfg, "field", "theorem 4.1"))
        return {"field": field,
                "sigma": _sigma_matrix(cfg, d_hint=field.d),
                "phi": parse_phi(_require(cfg, "phi", "theorem 4.1"))}
    if theorem == "corollary":
        A = parse_body(_require(cfg, "A", "corollary"))
        return {"A": A, "sigma": _sigma_matrix(cfg, d_hint=A.dim)}
    raise ConfigError(f"unknown theorem tag {theorem!r}")


def load_file(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
