import numpy as np
import pytest

from gleason.collar import (
    collar_cover,
    collar_membership,
    interior_cover,
    sample_collar,
    verify_lemma1,
)
from gleason.errors import CoverFailure, PointOutsideDomain


def test_ball_cover_geometry(ball, ball_cover):
    assert ball_cover.size > 0
    assert ball_cover.sigma > 0
    assert ball_cover.clearance >= ball_cover.sigma / 4
    # every boundary sample point lies in some patch
    assert np.all(ball_cover.covering_patch(ball_cover.boundary) >= 0)
    # patch centres are on the boundary with unit inner normals
    assert np.all(np.abs(ball.r(ball_cover.centers)) < 1e-10)
    assert np.allclose(np.linalg.norm(ball_cover.center_normals, axis=1), 1.0)


def test_small_budget_still_covers(ball):
    cover = collar_cover(ball, patch_budget=8)
    assert cover.size <= 8
    assert np.all(cover.covering_patch(cover.boundary) >= 0)


def test_zero_budget_raises(ball):
    with pytest.raises(CoverFailure):
        collar_cover(ball, patch_budget=0)


def test_membership_on_ball(ball, ball_cover):
    sigma = ball_cover.sigma
    corr = collar_membership(ball_cover, ball, np.array([1 - sigma / 4, 0]))
    assert corr is not None
    assert np.allclose(corr.w, [1, 0], atol=1e-10)
    assert corr.s == pytest.approx(1 - sigma / 4, abs=1e-10)
    assert corr.residual < 1e-12
    assert collar_membership(ball_cover, ball, np.zeros(2)) is None
    assert collar_membership(ball_cover, ball, np.array([0.3, 0.2])) is None


def test_membership_rejects_outside(ball, ball_cover):
    with pytest.raises(PointOutsideDomain):
        collar_membership(ball_cover, ball, np.array([1.1, 0]))


def test_membership_round_trip(ellipsoid, ellipsoid_cover, rng):
    z, w, patch, s = sample_collar(ellipsoid_cover, ellipsoid, 40, rng)
    for zi, wi, si in zip(z, w, s):
        corr = collar_membership(ellipsoid_cover, ellipsoid, zi)
        assert corr is not None
        assert corr.residual <= 1e-8 * ellipsoid.diameter
        assert abs(ellipsoid.r(corr.w)) <= 1e-10
        # the root is unique along the line through 0 and z
        assert np.allclose(corr.w, wi, atol=1e-8)
        assert corr.s == pytest.approx(si, abs=1e-8)


def test_boundary_point_has_s_one(ball, ball_cover):
    w = np.array([np.cos(0.3), np.sin(0.3) * 1j])
    corr = collar_membership(ball_cover, ball, w)
    assert corr is not None
    assert corr.s == 1.0
    assert corr.depth == 0.0


def test_lemma1_ball(ball, ball_cover, tmp_path):
    report = verify_lemma1(ball, ball_cover, sample_count=4000)
    assert report.violations == 0
    assert report.worst_margin > 0
    assert report.monotone
    path = tmp_path / "lemma1.csv"
    report.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "patch_id,s,t_abs,margin,inside"
    assert len(lines) == 4001


def test_lemma1_grange(grange, grange_cover):
    # the shipped exponent is small enough for the sampled membership test
    assert verify_lemma1(grange, grange_cover, sample_count=4000).violations == 0
    # the smooth-domain exponent fails at small depth near |z1| = 1, z2 = 0
    report = verify_lemma1(grange, grange_cover, sample_count=4000, epsilon=1.0)
    bad = report.rows[~report.rows["inside"]]
    assert report.violations > 0
    centers = grange_cover.centers[bad["patch_id"]]
    near = (np.abs(np.abs(centers[:, 0]) - 1) < 1e-9) & (np.abs(centers[:, 1]) < 1e-9)
    assert np.any(near & (1 - bad["s"] < 1e-4))


def test_interior_cover(shifted_annulus, shifted_annulus_cover):
    assert shifted_annulus_cover.size == 0
    assert shifted_annulus_cover.clearance == 0.02
    z = np.array([0.75 + 0.55j, 0.1])
    assert collar_membership(shifted_annulus_cover, shifted_annulus, z) is None
    with pytest.raises(CoverFailure):
        interior_cover(shifted_annulus, 0.0)
