"""Backend equivalence and projection-kernel correctness.

The compiled extension and the NumPy fallback must agree; projections must
satisfy the defining variational properties regardless of backend.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corrineq._kernels import BACKEND, pure
from corrineq._kernels import (ellipsoid_contains, ellipsoid_project,
                               polytope_contains, polytope_project)
from corrineq.utils import rng_for

PROJ_TOL = 1e-10
MAX_SWEEPS = 2000


def random_polytope(rng, d, m):
    normals = rng.standard_normal((m, d))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    offsets = rng.uniform(0.2, 1.5, m)
    eye = np.eye(d)
    return (np.vstack([normals, eye, -eye]),
            np.concatenate([offsets, np.full(2 * d, 2.0)]))


def test_compiled_backend_active():
    # the built package must prefer the extension; a fallback here means
    # the build step silently failed
    assert BACKEND == "compiled"


@pytest.mark.parametrize("d,m", [(1, 3), (2, 6), (3, 10), (5, 14)])
def test_backends_agree_polytope(d, m):
    rng = rng_for(101, d)
    normals, offsets = random_polytope(rng, d, m)
    pts = rng.standard_normal((400, d)) * 2.0

    mask_active = polytope_contains(normals, offsets, pts)
    mask_pure = pure.polytope_contains(normals, offsets, pts)
    assert np.array_equal(mask_active, mask_pure)

    proj_a, conv_a, _ = polytope_project(normals, offsets, pts,
                                         PROJ_TOL, MAX_SWEEPS)
    proj_p, conv_p, _ = pure.polytope_project(normals, offsets, pts,
                                              PROJ_TOL, MAX_SWEEPS)
    assert conv_a.all() and conv_p.all()
    assert np.max(np.abs(proj_a - proj_p)) < 1e-7


@pytest.mark.parametrize("d", [1, 2, 4])
def test_backends_agree_ellipsoid(d):
    rng = rng_for(202, d)
    axes = rng.uniform(0.5, 2.0, d)
    pts = rng.standard_normal((500, d)) * 2.5
    assert np.array_equal(ellipsoid_contains(axes, pts),
                          pure.ellipsoid_contains(axes, pts))
    pa = ellipsoid_project(axes, pts, 1e-12)
    pp = pure.ellipsoid_project(axes, pts, 1e-12)
    assert np.max(np.abs(pa - pp)) < 1e-8


def test_polytope_projection_properties():
    rng = rng_for(303, 0)
    normals, offsets = random_polytope(rng, 3, 9)
    pts = rng.standard_normal((300, 3)) * 2.0
    proj, conv, sweeps = polytope_project(normals, offsets, pts,
                                          PROJ_TOL, MAX_SWEEPS)
    assert conv.all()

    # projected points are feasible (tiny slack for the iterative solve)
    viol = (proj @ normals.T - offsets[None, :]).max()
    assert viol < 1e-6

    # idempotence: projecting a projected point moves it (almost) nowhere
    proj2, _, sweeps2 = polytope_project(normals, offsets, proj,
                                         PROJ_TOL, MAX_SWEEPS)
    assert np.max(np.linalg.norm(proj2 - proj, axis=1)) < 1e-6
    inside = polytope_contains(normals, offsets, proj)
    assert np.all(sweeps2[inside] == 0)

    # optimality against random feasible points: |x - proj(x)| <= |x - z|
    z = proj[rng.permutation(proj.shape[0])]
    dist_proj = np.linalg.norm(pts - proj, axis=1)
    dist_z = np.linalg.norm(pts - z, axis=1)
    assert np.all(dist_proj <= dist_z + 1e-6)


def test_distance_is_one_lipschitz():
    rng = rng_for(404, 0)
    normals, offsets = random_polytope(rng, 2, 6)

    def dist(pts):
        proj, conv, _ = polytope_project(normals, offsets, pts,
                                         PROJ_TOL, MAX_SWEEPS)
        assert conv.all()
        return np.linalg.norm(pts - proj, axis=1)

    x = rng.standard_normal((200, 2)) * 3.0
    y = x + rng.standard_normal((200, 2)) * 0.5
    assert np.all(np.abs(dist(x) - dist(y))
                  <= np.linalg.norm(x - y, axis=1) + 1e-7)


def test_segment_between_projections_is_feasible():
    rng = rng_for(505, 0)
    normals, offsets = random_polytope(rng, 3, 8)
    pts = rng.standard_normal((100, 3)) * 3.0
    proj, _, _ = polytope_project(normals, offsets, pts, PROJ_TOL, MAX_SWEEPS)
    lam = rng.uniform(0.0, 1.0, (50, 1))
    a = proj[rng.integers(0, 100, 50)]
    b = proj[rng.integers(0, 100, 50)]
    mid = lam * a + (1.0 - lam) * b
    viol = (mid @ normals.T - offsets[None, :]).max()
    assert viol < 1e-6


def test_ellipsoid_projection_optimality():
    rng = rng_for(606, 0)
    axes = np.array([0.7, 1.3, 2.1])
    pts = rng.standard_normal((200, 3)) * 3.0
    proj = ellipsoid_project(axes, pts, 1e-14)
    level = np.sum((proj / axes) ** 2, axis=1)
    outside = ~ellipsoid_contains(axes, pts)
    # exterior points land on the boundary
    assert np.max(np.abs(level[outside] - 1.0)) < 1e-8
    # interior points pass through unchanged
    assert np.array_equal(proj[~outside], pts[~outside])
    # x - p is parallel to the outward normal grad(sum (x/a)^2) at p
    gap = pts[outside] - proj[outside]
    grad = 2.0 * proj[outside] / axes[None, :] ** 2
    cos = np.sum(gap * grad, axis=1) / (
        np.linalg.norm(gap, axis=1) * np.linalg.norm(grad, axis=1))
    assert np.min(cos) > 1.0 - 1e-8


@settings(max_examples=25, deadline=None, derandomize=True)
@given(lo=st.lists(st.floats(-2.0, -0.1), min_size=2, max_size=4),
       scale=st.floats(0.5, 3.0))
def test_box_projection_matches_clip(lo, scale):
    """A box as halfspaces: Dykstra must reproduce the closed-form clip."""
    lo = np.asarray(lo)
    hi = -lo[::-1]  # guarantees lo < 0 < hi componentwise
    d = lo.size
    eye = np.eye(d)
    normals = np.vstack([eye, -eye])
    offsets = np.concatenate([hi, -lo])
    pts = rng_for(707, d).standard_normal((64, d)) * scale
    proj, conv, _ = polytope_project(normals, offsets, pts,
                                     PROJ_TOL, MAX_SWEEPS)
    assert conv.all()
    assert np.max(np.abs(proj - np.clip(pts, lo, hi))) < 1e-8


@settings(max_examples=25, deadline=None, derandomize=True)
@given(r=st.floats(0.3, 3.0))
def test_round_ellipsoid_projection_is_radial(r):
    axes = np.full(3, r)
    pts = rng_for(808, 0).standard_normal((64, 3)) * 2.0
    proj = ellipsoid_project(axes, pts, 1e-14)
    nrm = np.linalg.norm(pts, axis=1)
    outside = nrm > r
    expect = pts[outside] * (r / nrm[outside])[:, None]
    assert np.max(np.abs(proj[outside] - expect)) < 1e-9
