"""Approximants, class checks, the Phi profile, FKG, slices, verifiers."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats
from scipy.special import erf

from corrineq import bodies, engine, measures
from corrineq import integration as integ
from corrineq.utils import rng_for

SQRT2 = np.sqrt(2.0)
GAMMA2_SQUARE = erf(1.0 / SQRT2) ** 2
GAMMA2_DISK = stats.chi2.cdf(1.0, df=2)
SQUARE_DISK_GAP = GAMMA2_DISK * (1.0 - GAMMA2_SQUARE)  # 0.21008707476220417

# d=2 gaussian bump closed forms: mu(f) = 1/2, Phi(t) runs through
# (e^{-t^2/2} - e^{-t^2})-type expressions
T1_BUMP = np.sqrt(2.0 * np.log(2.0))            # 1.1774100225154747
PHI_AT_1 = 0.5 * (np.exp(-0.5) - np.exp(-1.0))  # 0.11932560927059555
DPHI_AT_1 = np.exp(-0.5) * (np.exp(-0.5) - 0.5)  # 0.06461411131512561


# ---------------------------------------------------------------------------
# f_n approximants


def test_fn_is_one_on_body_zero_beyond_shell():
    sq = bodies.box_body(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
    f4 = engine.FnApproximant(sq, 4)
    rng = rng_for(21, 0)
    pts = rng.uniform(-2.0, 2.0, (2000, 2))
    vals = f4(pts)
    inside = sq.contains_batch(pts)
    far = sq.distance_batch(pts) > 0.25
    assert np.all(vals[inside] == 1.0)
    assert np.all(vals[far] == 0.0)
    assert np.all((vals >= 0.0) & (vals <= 1.0))


def test_fn_monotone_in_n_and_lipschitz():
    ball = bodies.Ball(1.0, 2)
    rng = rng_for(22, 0)
    pts = rng.uniform(-2.0, 2.0, (1000, 2))
    prev = None
    for n in (1, 2, 4, 8):
        v = engine.FnApproximant(ball, n)(pts)
        if prev is not None:
            assert np.all(v <= prev + 1e-12)
        prev = v
    # Lipschitz constant n along the radial direction (closed-form distance)
    f2 = engine.FnApproximant(ball, 2)
    x = np.linspace(0.0, 2.0, 101)
    line = np.column_stack([x, np.zeros_like(x)])
    dv = np.abs(np.diff(f2(line)))
    assert np.max(dv) <= 2.0 * (x[1] - x[0]) + 1e-9


def test_fn_eval_point_api():
    ball = bodies.Ball(1.0, 3)
    f = engine.FnApproximant(ball, 5)
    assert engine.fn_eval(f, np.zeros(3)) == 1.0
    assert engine.fn_eval(f, [1.1, 0.0, 0.0]) == pytest.approx(0.5, abs=1e-9)
    assert engine.fn_eval(f, [2.0, 0.0, 0.0]) == 0.0


def test_fn_rejects_bad_index():
    with pytest.raises(ValueError):
        engine.FnApproximant(bodies.Ball(1.0, 2), 0)


# ---------------------------------------------------------------------------
# class checks


def test_class_check_accepts_bump_and_indicator():
    g = measures.gaussian(2)
    assert engine.check_class_Cd(integ.gaussian_bump(2), g).passed
    sq = bodies.box_body(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
    assert engine.check_class_Cd(integ.indicator(sq), g).passed
    f8 = engine.FnApproximant(sq, 8)
    assert engine.check_class_Cd(f8, g).passed


def test_class_check_accepts_constant():
    # the constant function sits on the boundary of the class: f(0) = mu(f)
    rep = engine.check_class_Cd(integ.constant_field(2), measures.gaussian(2))
    assert rep.passed


def test_class_check_rejects_bimodal():
    """Two off-center bumps: the max is away from the origin."""
    def two_bumps(p):
        a = np.exp(-np.sum((p - [1.5, 0.0]) ** 2, axis=1))
        b = np.exp(-np.sum((p + [1.5, 0.0]) ** 2, axis=1))
        return np.maximum(a, b)

    f = integ.ScalarField(2, two_bumps, "log-concave-closed-form")
    rep = engine.check_class_Cd(f, measures.gaussian(2))
    assert not rep.passed
    assert rep.witness["part"] in ("max_at_origin", "ray_monotonicity")


def test_class_check_rejects_cross_superlevels():
    """max of two perpendicular ridges: max at origin and monotone on every
    ray, but cross-shaped (nonconvex) superlevel sets."""
    def cross(p):
        a = np.exp(-(p[:, 0] ** 2 + 9.0 * p[:, 1] ** 2))
        b = np.exp(-(9.0 * p[:, 0] ** 2 + p[:, 1] ** 2))
        return np.maximum(a, b)

    f = integ.ScalarField(2, cross, "log-concave-closed-form")
    rep = engine.check_class_Cd(f, measures.gaussian(2), n_levels=32)
    assert not rep.passed
    assert rep.witness["part"] == "superlevel_convexity"


def test_class_check_bar_axis_restrictions():
    pm = measures.gaussian_product(2)
    assert engine.check_class_Cd_bar(integ.gaussian_bump(2), pm).passed
    shifted = integ.gaussian_bump(2, center=[0.8, 0.0])
    assert not engine.check_class_Cd_bar(shifted, pm).passed


# ---------------------------------------------------------------------------
# Phi profile


def test_phi_profile_bump_closed_forms():
    prof = engine.phi_profile(integ.gaussian_bump(2), measures.gaussian(2),
                              t_grid=np.linspace(0.25, 3.0, 12))
    assert prof.method == "radial-quadrature"
    assert np.all(prof.phi_se == 0.0)
    assert prof.mu_f == pytest.approx(0.5, abs=1e-6)
    i1 = 3  # t = 1.0 exactly
    assert prof.t_grid[i1] == 1.0
    assert prof.phi[i1] == pytest.approx(PHI_AT_1, abs=1e-6)
    assert prof.dphi[i1] == pytest.approx(DPHI_AT_1, abs=1e-6)
    assert prof.t1_estimate == pytest.approx(T1_BUMP, abs=1e-6)
    assert prof.unimodal_verdict


def test_phi_profile_increasing_then_decreasing():
    sq = bodies.box_body(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
    prof = engine.phi_profile(integ.indicator(sq), measures.gaussian(2))
    assert prof.t1_estimate is not None
    assert prof.unimodal_verdict
    # Phi vanishes at both ends and is positive at the peak
    assert prof.phi[0] < 0.01
    assert prof.phi[-1] == pytest.approx(0.0, abs=1e-6)
    assert np.max(prof.phi) > 0.1


def test_phi_profile_constant_field_is_zero():
    # zero up to the radial quadrature error of the two mass cumulants
    prof = engine.phi_profile(integ.constant_field(2), measures.gaussian(2))
    assert np.max(np.abs(prof.phi)) < 1e-6
    assert prof.t1_estimate is None
    assert prof.unimodal_verdict


def test_phi_profile_d1():
    prof = engine.phi_profile(integ.gaussian_bump(1), measures.gaussian(1),
                              t_grid=np.linspace(0.25, 3.0, 12))
    # d=1: Phi'(t) = 2 rho(t) (avg_f(t) - mu_f); mu_f = 1/sqrt(2)
    assert prof.mu_f == pytest.approx(1.0 / SQRT2, abs=1e-7)
    t1_expect = np.sqrt(np.log(2.0))  # e^{-t^2/2} = 2^{-1/2}
    assert prof.t1_estimate == pytest.approx(t1_expect, abs=1e-6)


def test_phi_profile_d3_mc_brackets_truth():
    prof = engine.phi_profile(integ.gaussian_bump(3), measures.gaussian(3),
                              t_grid=np.linspace(0.3, 3.0, 10),
                              n=200_000, m_dirs=64, seed=2)
    assert prof.method == "mc"
    # Phi(t) = P(chi2_3 <= t^2 under scale 2)... use the closed form
    # mu(f 1_{B_t}) = 2^{-3/2} chi2.cdf(2 t^2, 3); mu(f) = 2^{-3/2}
    mu_f = 2.0 ** -1.5
    expect = mu_f * stats.chi2.cdf(2 * prof.t_grid ** 2, 3) \
        - mu_f * stats.chi2.cdf(prof.t_grid ** 2, 3)
    dev = np.abs(prof.phi - expect) / np.maximum(prof.phi_se, 1e-12)
    assert np.max(dev) < 5.0


def test_phi_profile_requires_radial():
    with pytest.raises(TypeError):
        engine.phi_profile(integ.gaussian_bump(2),
                           measures.gaussian_product(2))


# ---------------------------------------------------------------------------
# FKG


def test_fkg_uniform_variance():
    x = np.linspace(0.0, 1.0, 65537)
    res = engine.fkg_check(x, np.ones_like(x), x, x)
    # discrete trapezoid variance of U[0,1]: 1/12 + h^2/6, h = 2^-16
    assert res["gap"] == pytest.approx(1.0 / 12.0, abs=1e-10)
    assert res["oracle_gap"] is None  # grid too large for the double sum


def test_fkg_matches_double_sum_oracle():
    rng = rng_for(31, 0)
    x = np.sort(rng.uniform(-2.0, 2.0, 800))
    x += np.arange(800) * 1e-9  # enforce strict increase
    nu = rng.uniform(0.1, 2.0, 800)
    f = np.cumsum(rng.uniform(0.0, 1.0, 800))
    g = np.cumsum(rng.uniform(0.0, 0.5, 800))
    res = engine.fkg_check(x, nu, f, g)
    assert res["oracle_gap"] is not None
    assert res["gap"] == pytest.approx(res["oracle_gap"], abs=1e-10)
    assert res["gap"] >= -1e-12


def test_fkg_rejects_anticomonotone():
    x = np.linspace(0.0, 1.0, 64)
    with pytest.raises(ValueError, match="comonotonicity"):
        engine.fkg_check(x, np.ones(64), x, -x)


def test_fkg_discrete_point_masses():
    x = np.array([0.0, 1.0, 2.0])
    nu = np.array([0.25, 0.5, 0.25])
    f = np.array([0.0, 1.0, 2.0])
    res = engine.fkg_check(x, nu, f, f, discrete=True)
    # E[X^2] - E[X]^2 with P = (1/4, 1/2, 1/4): 1.5 - 1 = 0.5
    assert res["gap"] == pytest.approx(0.5, abs=1e-14)


@settings(max_examples=60, deadline=None, derandomize=True)
@given(seed=st.integers(0, 10_000), size=st.integers(3, 200),
       direction=st.sampled_from([1.0, -1.0]))
def test_fkg_property_comonotone_staircases(seed, size, direction):
    """Random monotone staircases against random densities: the gap is
    structurally nonnegative."""
    rng = rng_for(seed, 77)
    x = np.cumsum(rng.uniform(0.01, 1.0, size))
    nu = rng.uniform(0.0, 3.0, size) + 1e-6
    f = direction * np.cumsum(rng.integers(0, 3, size).astype(float))
    g = direction * np.cumsum(rng.uniform(0.0, 2.0, size))
    res = engine.fkg_check(x, nu, f, g)
    assert res["gap"] >= -1e-12
    if res["oracle_gap"] is not None:
        assert abs(res["gap"] - res["oracle_gap"]) < 1e-9 * max(
            1.0, abs(res["gap"]))


# ---------------------------------------------------------------------------
# slice monotonicity


def test_slice_monotonicity_ellipsoid():
    pm = measures.gaussian_product(2)
    ell = bodies.Ellipsoid(np.array([1.0, 1.5]))
    grid = np.linspace(-0.9, 0.9, 13)
    rep = engine.slice_monotonicity_check(pm, ell, 0, grid)
    assert rep.passed
    vals = np.array(rep.detail["values"])
    # peak at the middle (v = 0)
    assert np.argmax(vals) == 6


def test_slice_monotonicity_generalized_ball():
    t = np.linspace(0.0, 3.0, 257)
    gb = bodies.GeneralizedBall([(t, t), (t, t ** 2)])
    pm = measures.gaussian_product(2)
    rep = engine.slice_monotonicity_check(pm, gb, 1, np.linspace(-0.9, 0.9, 9))
    assert rep.passed


def test_slice_monotonicity_rejects_polytope():
    pm = measures.gaussian_product(2)
    sq = bodies.box_body(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        engine.slice_monotonicity_check(pm, sq, 0, np.linspace(-0.5, 0.5, 5))


# ---------------------------------------------------------------------------
# theorem verifiers


def test_verify_2_1_square_disk_deterministic():
    sq = bodies.box_body(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
    rep = engine.verify_theorem_2_1(integ.indicator(sq), measures.gaussian(2),
                                    1.0)
    assert rep.verdict == "confirmed"
    assert rep.gap_se == 0.0
    assert rep.gap == pytest.approx(SQUARE_DISK_GAP, abs=2e-4)
    assert rep.hypothesis_checks["class_Cd"]["passed"]


def test_verify_2_1_bump_d3_mc():
    rep = engine.verify_theorem_2_1(integ.gaussian_bump(3),
                                    measures.gaussian(3), 1.0,
                                    n=300_000, seed=3)
    assert rep.verdict == "confirmed"
    # closed form: 2^{-3/2} (chi2.cdf(2, 3) - chi2.cdf(1, 3))
    expect = 2.0 ** -1.5 * (stats.chi2.cdf(2.0, 3) - stats.chi2.cdf(1.0, 3))
    assert abs(rep.gap - expect) < 5 * rep.gap_se


def test_verify_2_1_inapplicable_for_bimodal():
    def two_bumps(p):
        a = np.exp(-np.sum((p - [1.5, 0.0]) ** 2, axis=1))
        b = np.exp(-np.sum((p + [1.5, 0.0]) ** 2, axis=1))
        return np.maximum(a, b)

    f = integ.ScalarField(2, two_bumps, "log-concave-closed-form")
    rep = engine.verify_theorem_2_1(f, measures.gaussian(2), 1.0)
    assert rep.verdict == "inapplicable-hypothesis"
    assert rep.gap is None


def test_verify_1_1_square_and_interval():
    sq = bodies.box_body(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
    rep = engine.verify_theorem_1_1(sq, measures.gaussian(2), 1.0,
                                    n=300_000, seed=4)
    assert rep.verdict == "confirmed"
    assert abs(rep.gap - SQUARE_DISK_GAP) < 5 * rep.gap_se
    route = rep.extras["approximation_route"]
    assert route["monotone"]
    mu_fns = [step["mu_fn"] for step in route["ladder"]]
    assert mu_fns[-1] >= route["mu_A_crn"] - 1e-12

    # d=1 exact-oracle variant: A = [-0.5, 2], B = [-1, 1]
    a = bodies.box_body(np.array([-0.5]), np.array([2.0]))
    rep1 = engine.verify_theorem_1_1(a, measures.gaussian(1), 1.0,
                                     n=400_000, seed=5)
    mu_a = stats.norm.cdf(2.0) - stats.norm.cdf(-0.5)
    mu_b = erf(1.0 / SQRT2)
    mu_ab = stats.norm.cdf(1.0) - stats.norm.cdf(-0.5)
    assert rep1.verdict == "confirmed"
    assert abs(rep1.gap - (mu_ab - mu_a * mu_b)) < 5 * rep1.gap_se


def test_verify_1_1_gates():
    # origin outside A
    shifted = bodies.box_body(np.array([1.0]), np.array([2.0]))
    rep = engine.verify_theorem_1_1(shifted, measures.gaussian(1), 1.0,
                                    n=10_000)
    assert rep.verdict == "inapplicable-hypothesis"
    assert not rep.hypothesis_checks["contains_origin"]["passed"]
    # unbounded A
    halfplane = bodies.HPolytope(np.array([[1.0, 0.0]]), np.array([1.0]))
    rep2 = engine.verify_theorem_1_1(halfplane, measures.gaussian(2), 1.0,
                                     n=10_000)
    assert rep2.verdict == "inapplicable-hypothesis"
    assert not rep2.hypothesis_checks["bounded"]["passed"]


def test_verify_1_2_box_and_ellipsoid():
    box = bodies.box_body(np.array([-0.5, -1.0]), np.array([2.0, 1.0]))
    ell = bodies.Ellipsoid(np.array([1.0, 1.5]))
    rep = engine.verify_theorem_1_2(box, measures.gaussian_product(2), ell,
                                    n=300_000, seed=6)
    assert rep.verdict == "confirmed"
    assert rep.extras["mu_B_consistent"]
    # independent 2D grid oracle for the same gap
    pm = measures.gaussian_product(2)
    inter = bodies.Intersection([box, ell])
    mu_ab = integ.grid_oracle_2d(pm, integ.indicator(inter)).value
    mu_a = integ.grid_oracle_2d(pm, integ.indicator(box)).value
    mu_b = integ.grid_oracle_2d(pm, integ.indicator(ell)).value
    assert abs(rep.gap - (mu_ab - mu_a * mu_b)) < 5 * rep.gap_se + 5e-4


def test_verify_1_2_gate_projection():
    shifted = bodies.box_body(np.array([0.5, -1.0]), np.array([2.0, 1.0]))
    rep = engine.verify_theorem_1_2(shifted, measures.gaussian_product(2),
                                    bodies.Ellipsoid(np.array([1.0, 1.0])),
                                    n=10_000)
    assert rep.verdict == "inapplicable-hypothesis"


def test_report_json_deterministic():
    sq = bodies.box_body(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
    a = engine.verify_theorem_1_1(sq, measures.gaussian(2), 1.0,
                                  n=50_000, seed=9).to_json()
    b = engine.verify_theorem_1_1(sq, measures.gaussian(2), 1.0,
                                  n=50_000, seed=9).to_json()
    assert a == b
    assert '"provenance"' in a and '"backend"' in a
