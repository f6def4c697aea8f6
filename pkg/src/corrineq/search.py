"""Random instance generation, batch verification, and hypothesis-necessity
scans: break exactly one hypothesis and hunt for genuinely negative gaps,
demonstrating that the hypothesis is not vacuous.

A `violated` verdict in an all-hypotheses-hold batch is a bug signal, never
mathematics; batch_verify(strict=True) raises on it.
"""

import io

import numpy as np

from . import bodies, engine, transport
from .integration import gaussian_bump, mc_joint
from .measures import (Density1D, density_from_profile, gaussian,
                       gaussian_1d, gaussian_product, radial_from_grid,
                       ProductDensity)
from .utils import rng_for, stable_hash

BROKEN_HYPOTHESES = ("origin-not-in-A", "A-not-projection-closed",
                     "phi-not-decreasing", "tilt-not-logconcave")


class BatchViolationError(AssertionError):
    """A proven inequality came back `violated`; treat as a regression."""


def _random_polytope(d, rng, origin=True):
    m = int(rng.integers(2 * d, 6 * d + 1))
    normals = rng.standard_normal((m, d))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    lo_off = 0.3 if origin else -1.2
    offsets = rng.uniform(lo_off, 1.5, m)
    box_r = float(rng.uniform(1.5, 2.5))
    eye = np.eye(d)
    normals = np.vstack([normals, eye, -eye])
    offsets = np.concatenate([offsets, np.full(2 * d, box_r)])
    hint = box_r * np.sqrt(d) if d > 3 else None
    return bodies.HPolytope(normals, offsets, radius_hint=hint)


def _random_projection_closed(d, rng):
    """box ∩ {sum w_i |x_i| <= L}: zeroing any coordinate stays inside."""
    a = rng.uniform(0.4, 2.0, d)
    b = rng.uniform(0.4, 2.0, d)
    w = rng.uniform(0.3, 1.0, d)
    level = float(rng.uniform(0.8, 2.0))
    eye = np.eye(d)
    normals = [eye, -eye]
    offsets = [b, a]
    signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * d)).T.reshape(-1, d)
    normals.append(signs * w[None, :])
    offsets.append(np.full(signs.shape[0], level))
    return bodies.HPolytope(np.vstack(normals), np.concatenate(offsets))


def _random_radial_measure(d, rng):
    alpha = float(rng.uniform(0.8, 1.4))
    beta = float(rng.uniform(1.6, 2.6))
    r_max = alpha * (-np.log(1e-12)) ** (1.0 / beta) * 2.0
    r = np.linspace(0.0, r_max, 513)
    return radial_from_grid(d, r, np.exp(-((r / alpha) ** beta)) + 1e-200)


def _random_product_measure(d, rng):
    marginals = []
    for _ in range(d):
        alpha = float(rng.uniform(0.8, 1.4))
        beta = float(rng.uniform(1.6, 2.6))
        r_max = alpha * (-np.log(1e-12)) ** (1.0 / beta) * 2.0
        marginals.append(density_from_profile(
            lambda r, a=alpha, p=beta: np.exp(-((r / a) ** p)) + 1e-200, r_max))
    return ProductDensity(marginals)


def _random_generalized_ball(d, rng):
    comps = []
    for _ in range(d):
        p = float(rng.uniform(0.5, 2.0))
        c = float(rng.uniform(0.7, 1.5))
        t_max = c * 4.0 ** (1.0 / p)
        t = np.linspace(0.0, t_max, 257)
        comps.append((t, (t / c) ** p))
    return bodies.GeneralizedBall(comps)


def random_instance(spec, seed):
    """Deterministic (A, measure, B) triple from an instance spec dict.

    Keys: d; body in {polytope, ellipsoid, projection_closed}; measure in
    {gaussian, radial_grid, product_gaussian, product_grid}; b_kind in
    {ball, ellipsoid, generalized_ball}; origin (bool, default True).
    """
    rng = rng_for(seed, 0)
    d = int(spec["d"])
    body_kind = spec.get("body", "polytope")
    measure_kind = spec.get("measure", "gaussian")
    b_kind = spec.get("b_kind", "ball")
    origin = bool(spec.get("origin", True))

    if body_kind == "polytope":
        A = _random_polytope(d, rng, origin=origin)
        if origin and not A.contains(np.zeros(d)):
            raise ValueError("origin constraint produced an infeasible body")
    elif body_kind == "ellipsoid":
        A = bodies.Ellipsoid(rng.uniform(0.5, 2.0, d))
    elif body_kind == "projection_closed":
        A = _random_projection_closed(d, rng)
    else:
        raise ValueError(f"unknown body kind {body_kind!r}")

    if measure_kind == "gaussian":
        measure = gaussian(d)
    elif measure_kind == "radial_grid":
        measure = _random_radial_measure(d, rng)
    elif measure_kind == "product_gaussian":
        measure = gaussian_product(d)
    elif measure_kind == "product_grid":
        measure = _random_product_measure(d, rng)
    else:
        raise ValueError(f"unknown measure kind {measure_kind!r}")

    if b_kind == "ball":
        B = bodies.Ball(float(rng.uniform(0.6, 1.8)), d)
    elif b_kind == "ellipsoid":
        B = bodies.Ellipsoid(rng.uniform(0.6, 1.8, d))
    elif b_kind == "generalized_ball":
        B = _random_generalized_ball(d, rng)
    else:
        raise ValueError(f"unknown B kind {b_kind!r}")
    return A, measure, B


class BatchReport:
    def __init__(self, theorem, rows):
        self.theorem = theorem
        self.rows = rows

    @property
    def counts(self):
        out = {}
        for r in self.rows:
            out[r["verdict"]] = out.get(r["verdict"], 0) + 1
        return out

    @property
    def any_violated(self):
        return any(r["verdict"] == "violated" for r in self.rows)

    def to_csv(self):
        buf = io.StringIO()
        buf.write("instance_id,theorem,d,body_descriptor_hash,gap,se,verdict,seed\n")
        for r in self.rows:
            buf.write("{instance_id},{theorem},{d},{body_descriptor_hash},"
                      "{gap!r},{se!r},{verdict},{seed}\n".format(**r))
        return buf.getvalue()


def _row(i, theorem, d, A, gap, se, verdict, seed):
    return {"instance_id": i, "theorem": theorem, "d": d,
            "body_descriptor_hash": stable_hash(A.to_dict()),
            "gap": gap, "se": se, "verdict": verdict, "seed": seed}


def batch_verify(theorem, n_instances, n=100_000, seed=0, d_list=None,
                 strict=False):
    """Run the verifier for `theorem` over random admissible instances."""
    if theorem not in ("1.1", "1.2"):
        raise ValueError("batch verification covers theorems 1.1 and 1.2")
    rows = []
    for i in range(int(n_instances)):
        inst_seed = seed + 1000 * i
        if theorem == "1.1":
            ds = d_list or (1, 2, 3, 5)
            d = ds[i % len(ds)]
            spec = {"d": d, "body": "polytope",
                    "measure": "gaussian" if i % 2 == 0 else "radial_grid",
                    "b_kind": "ball"}
            A, measure, B = random_instance(spec, inst_seed)
            rep = engine.verify_theorem_1_1(A, measure, B.radius, n=n,
                                            seed=inst_seed, approx_ladder=())
        else:
            ds = d_list or (2, 3)
            d = ds[i % len(ds)]
            spec = {"d": d, "body": "projection_closed",
                    "measure": "product_gaussian" if i % 2 == 0 else "product_grid",
                    "b_kind": "ellipsoid" if i % 3 else "generalized_ball"}
            A, measure, B = random_instance(spec, inst_seed)
            rep = engine.verify_theorem_1_2(A, measure, B, n=n, seed=inst_seed)
        rows.append(_row(i, theorem, d, A, rep.gap, rep.gap_se, rep.verdict,
                         inst_seed))
    report = BatchReport(theorem, rows)
    if strict and report.any_violated:
        bad = [r for r in rows if r["verdict"] == "violated"]
        raise BatchViolationError(
            f"{len(bad)} violated verdict(s) in a proven-theorem batch; "
            f"first instance_id={bad[0]['instance_id']} seed={bad[0]['seed']}")
    return report


class ScanReport(BatchReport):
    def __init__(self, hypothesis, rows):
        super().__init__(hypothesis, rows)
        self.hypothesis = hypothesis

    @property
    def hits(self):
        """Instances whose gap is negative beyond 5 SE: genuine
        counterexamples to the unhypothesized statement."""
        return [r for r in self.rows
                if r["gap"] is not None and r["gap"] < -5.0 * r["se"] - 1e-12]


def _scan_origin(i, seed, n):
    rng = rng_for(seed, 1)
    a = float(rng.uniform(1.5, 2.5))
    w = float(rng.uniform(0.5, 1.5))
    A = bodies.box_body(np.array([a]), np.array([a + w]))
    B = bodies.Ball(1.0, 1)
    joint = mc_joint(gaussian(1), A, B, n, seed)
    verdict = engine._verdict(joint.gap, joint.gap_se)
    return _row(i, "1.1-no-origin", 1, A, joint.gap, joint.gap_se, verdict, seed)


def _scan_projection(i, seed, n):
    rng = rng_for(seed, 1)
    lo = rng.uniform(0.3, 1.0, 2)
    w = rng.uniform(0.5, 1.5, 2)
    A = bodies.box_body(lo, lo + w)
    B = bodies.Ellipsoid(rng.uniform(0.6, 1.5, 2))
    joint = mc_joint(gaussian_product(2), A, B, n, seed)
    verdict = engine._verdict(joint.gap, joint.gap_se)
    return _row(i, "1.2-not-closed", 2, A, joint.gap, joint.gap_se, verdict, seed)


def _scan_phi(i, seed, n):
    rng = rng_for(seed, 1)
    scale = float(rng.uniform(0.7, 1.5))
    power = float(rng.uniform(0.8, 2.0))
    f = gaussian_bump(1, scale=scale)
    measure = gaussian(1)

    def work_gap():
        pts = measure.sample(n, rng_for(seed, 2))
        fv = f(pts)
        pv = np.abs(pts[:, 0]) ** (2 * power)  # phi(t) = t^power, increasing
        m = np.array([np.mean(fv * pv), np.mean(fv), np.mean(pv)])
        vec = np.column_stack([fv * pv, fv, pv])
        cov = vec.T @ vec / n - np.outer(m, m)
        gap = float(m[0] - m[1] * m[2])
        grad = np.array([1.0, -m[2], -m[1]])
        se = float(np.sqrt(max(grad @ cov @ grad, 0.0) / n))
        return gap, se

    gap, se = work_gap()
    verdict = engine._verdict(gap, se)
    row = _row(i, "4.1-phi-increasing", 1,
               bodies.Ball(scale, 1), gap, se, verdict, seed)
    row["body_descriptor_hash"] = stable_hash(
        {"field": "gaussian-bump", "scale": scale, "phi_power": power})
    return row


def _scan_tilt(i, seed, n):
    rng = rng_for(seed, 1)
    sigma = float(rng.uniform(1.2, 2.5))
    tmap = transport.monotone_map(gaussian_1d(), gaussian_1d(sigma))
    check = transport.contraction_check(tmap, tol=1e-4)
    gap = 1.0 - check["max_increment_ratio"]
    verdict = "violated" if not check["passed"] else "confirmed"
    row = _row(i, "contraction-no-logconcavity", 1,
               bodies.Ball(sigma, 1), gap, 0.0, verdict, seed)
    row["body_descriptor_hash"] = stable_hash({"tilt_sigma": sigma})
    return row


def necessity_scan(broken_hypothesis, n_instances, n=100_000, seed=0):
    """Instances violating exactly one hypothesis, ranked by gap / SE."""
    runners = {"origin-not-in-A": _scan_origin,
               "A-not-projection-closed": _scan_projection,
               "phi-not-decreasing": _scan_phi,
               "tilt-not-logconcave": _scan_tilt}
    if broken_hypothesis not in runners:
        raise ValueError(f"unknown hypothesis tag {broken_hypothesis!r}; "
                         f"expected one of {BROKEN_HYPOTHESES}")
    run = runners[broken_hypothesis]
    rows = [run(i, seed + 1000 * i, n) for i in range(int(n_instances))]
    rows.sort(key=lambda r: r["gap"] / max(r["se"], 1e-15))
    return ScanReport(broken_hypothesis, rows)
