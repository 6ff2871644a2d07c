"""The ten acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

import time

import numpy as np
import pytest

from gleason.cconvexity import check_cconvex, is_simply_connected, slice_domain
from gleason.collar import collar_membership, sample_collar, verify_lemma1
from gleason.core import (
    decompose_at_point,
    decompose_polynomial,
    integrate_I,
    named_oracle,
    polynomial_oracle,
    straight_plan,
)
from gleason.errors import CircleExitsDomain
from gleason.experiments import continuity_experiment, estimate_K, grange_approach
from gleason.geometry import tangent_frame
from gleason.paths import plan_path
from gleason.polynomials import Polynomial, leibenzon_closed_form


def _ball_points(rng, count, n=2, rmax=1.0):
    g = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True) * rmax * rng.uniform(0, 1, (count, 1)) ** (1 / (2 * n))


def _closed_form(p, z):
    return np.array([complex(leibenzon_closed_form(p, i).eval(z)) for i in range(p.n)])


def test_1_division_identity(acceptance):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = 0.0
    for k in range(500):
        n = 2 if k % 2 == 0 else 3
        p = Polynomial.random(n, int(rng.integers(1, 21)), rng, vanish_at_origin=False)
        base = _ball_points(rng, 1, n, 0.9)[0]
        worst = max(worst, decompose_polynomial(p, base).remainder)
    elapsed = time.perf_counter() - start
    ok = worst < 1e-12 and elapsed < 10
    acceptance("1", "division identity", ok, f"max relative remainder {worst:.2e}, {elapsed:.1f} s for 500 polynomials")
    assert ok


def test_2_path_independence(ball, ball_cover, acceptance):
    rng = np.random.default_rng(7)
    pts = _ball_points(rng, 100, 2, 0.999)
    worst_pair = worst_oracle = 0.0
    for z in pts:
        p = Polynomial.random(2, int(rng.integers(1, 9)), rng)
        f = polynomial_oracle(p)
        corr = collar_membership(ball_cover, ball, z)
        plan_a = plan_path(ball, ball_cover, z, correspondence=corr)
        end = plan_a.endpoint
        plan_b = plan_path(ball, ball_cover, z, correspondence=corr, waypoints=[end * (0.5 + 0.2j)])
        dirs = np.eye(2) if corr is None else tangent_frame(ball, corr.w, check_boundary=False).tangents
        exact = _closed_form(p, z)
        for e in dirs:
            va = integrate_I(f, z, e, plan_a, ball, ball_cover)
            vb = integrate_I(f, z, e, plan_b, ball, ball_cover)
            worst_pair = max(worst_pair, abs(va - vb))
            worst_oracle = max(worst_oracle, abs(va - np.dot(e / np.linalg.norm(e), exact)))
    ok = worst_pair < 1e-8 and worst_oracle < 1e-8
    acceptance("2", "path independence", ok,
               f"max |I_a - I_b| {worst_pair:.2e}, max |I - closed form| {worst_oracle:.2e} over 100 pairs")
    assert ok


@pytest.mark.parametrize("name", ["ball", "ellipsoid"])
def test_3_sy_recovery(name, request, acceptance):
    domain = request.getfixturevalue(name)
    cover = request.getfixturevalue(name + "_cover")
    rng = np.random.default_rng(11)
    z, *_ = sample_collar(cover, domain, 200, rng)
    worst = 0.0
    min_delta = np.inf
    for zi in z:
        p = Polynomial.random(2, int(rng.integers(1, 7)), rng)
        rep = decompose_at_point(polynomial_oracle(p), zi, domain, cover, "sy_system")
        worst = max(worst, float(np.max(np.abs(rep.values - _closed_form(p, zi)))))
        min_delta = min(min_delta, rep.diagnostics["delta"])
    ok = worst < 1e-7 and min_delta >= 1e-6
    acceptance("3" + ("a" if name == "ball" else "b"), f"SY recovery on the {name}", ok,
               f"max error {worst:.2e}, min |Delta| {min_delta:.3f} at 200 collar points")
    assert ok


def test_4_lemma1_membership(ball, ball_cover, acceptance):
    report = verify_lemma1(ball, ball_cover, 10_000, epsilon=1.0)
    ok = report.violations == 0 and report.monotone
    acceptance("4", "collar membership", ok,
               f"{report.violations} violations in 10^4 samples, margin monotone in depth: {report.monotone}")
    assert ok


@pytest.mark.parametrize("name", ["ball", "ellipsoid"])
def test_5_bijection_round_trip(name, request, acceptance):
    domain = request.getfixturevalue(name)
    cover = request.getfixturevalue(name + "_cover")
    z, *_ = sample_collar(cover, domain, 1000, np.random.default_rng(5))
    worst = 0.0
    missing = 0
    for zi in z:
        corr = collar_membership(cover, domain, zi)
        if corr is None:
            missing += 1
            continue
        worst = max(worst, corr.residual)
    bound = 1e-8 * domain.diameter
    ok = missing == 0 and worst < bound
    acceptance("5" + ("a" if name == "ball" else "b"), f"round trip on the {name}", ok,
               f"max |F(w, s) - z| {worst:.2e} (bound {bound:.1e}), {missing} unmatched of 1000")
    assert ok


def test_6a_key_estimate_ball(ball, ball_cover, acceptance):
    start = time.perf_counter()
    table = estimate_K(ball, ball_cover, [0, 0], 0.3, degrees=range(1, 16), trials=50, seed=0)
    elapsed = time.perf_counter() - start
    ok = table.log_slope <= 0.02 and elapsed < 150
    acceptance("6a", "key estimate on the ball", ok,
               f"log-ratio slope {table.log_slope:.4f}, K_emp {table.summary:.3f}, {elapsed:.1f} s")
    assert ok


@pytest.mark.xfail(strict=True, reason="fixed-degree ratios do not increase strictly; see the decisions ledger")
def test_6b_key_estimate_grange(grange, grange_cover, acceptance):
    start = time.perf_counter()
    rows = grange_approach(grange, grange_cover, target=(1.0, 0.0), ks=range(2, 9), degree=10, trials=50)
    elapsed = time.perf_counter() - start
    ratios = np.array([r for _, _, r in rows])
    ok = bool(np.all(np.diff(ratios) > 0)) and elapsed < 150
    acceptance("6b", "key estimate near the non-Holder point", ok,
               "degree-10 ratios for k = 2..8: " + ", ".join(f"{r:.2f}" for r in ratios) + f" ({elapsed:.1f} s)")
    assert ok


def test_7_cconvexity_certificates(ball, ellipsoid, annulus, acceptance):
    ball_cert = check_cconvex(ball, n_lines=200, resolution=256)
    ell_cert = check_cconvex(ellipsoid, n_lines=200, resolution=256)
    axis = (np.zeros(2, complex), np.array([1, 0], complex))
    ann_cert = check_cconvex(annulus, n_lines=200, resolution=256, extra_lines=[axis])
    w = ann_cert.witness
    stable = False
    if w is not None and w["reason"] == "not simply connected":
        a = np.array([complex(*c) for c in w["a"]])
        b = np.array([complex(*c) for c in w["b"]])
        stable = not is_simply_connected(slice_domain(annulus, a, b, resolution=512))
    ok = ball_cert.verdict == "PASS" and ell_cert.verdict == "PASS" and ann_cert.verdict == "FAIL" and stable
    acceptance("7", "C-convexity certificates", ok,
               f"ball {ball_cert.verdict}, ellipsoid {ell_cert.verdict}, annulus {ann_cert.verdict} "
               f"(witness line {None if w is None else w['line_id']}, still not simply connected at 512: {stable})")
    assert ok


def test_8_non_convex_necessity(shifted_annulus, shifted_annulus_cover, acceptance):
    f = named_oracle("annulus_pole", center=0.75)
    z = np.array([0.75 + 0.55j, 0.1])
    aborted = False
    try:
        integrate_I(f, z, [1, 0], straight_plan(z, shifted_annulus_cover.clearance), shifted_annulus,
                    shifted_annulus_cover)
    except CircleExitsDomain:
        aborted = True
    rep = decompose_at_point(f, z, shifted_annulus, shifted_annulus_cover, "direct_contour")
    ok = aborted and rep.residual < 1e-7
    acceptance("8", "curves replace segments", ok,
               f"straight segment raised CircleExitsDomain: {aborted}; planned path residual {rep.residual:.2e} "
               f"({rep.diagnostics['path_nodes']} nodes)")
    assert ok


def test_9_continuity(ball, ball_cover, acceptance):
    poly = polynomial_oracle(Polynomial.parse("z1*z2/2", 2))
    quotient = named_oracle("quotient")
    cases = [
        ("z1 z2 / 2 at (0.3, 0.2)", poly, [0.3, 0.2], None),
        ("z1 z2 / 2 at (0.85, 0)", poly, [0.85, 0], None),
        ("z1/(2 - z2) at (0.2, 0.3)", quotient, [0.2, 0.3], None),
        ("z1/(2 - z2) at (0.05, 0.85)", quotient, [0.05, 0.85], [1, 0]),
    ]
    finals = []
    for _, f, z, u in cases:
        table = continuity_experiment(f, z, ball, ball_cover, direction=u, ks=range(3, 13))
        finals.append(table.final_delta)
    ok = max(finals) < 1e-4
    acceptance("9", "continuity of I", ok,
               "; ".join(f"{label}: {d:.1e}" for (label, *_), d in zip(cases, finals)))
    assert ok


def test_10_approximant_limit(ball, ball_cover, acceptance):
    f = named_oracle("quotient")
    z_in = np.array([0.3, 0.2])
    z_col = np.array([1 - ball_cover.sigma / 8, 0.1j])
    z_col = z_col * (1 - ball_cover.sigma / 8) / np.linalg.norm(z_col)
    tails, gaps = [], []
    for z, method in ((z_in, "direct_contour"), (z_col, "sy_system")):
        approx = decompose_at_point(f, z, ball, None, "approximant_limit", degrees=(2, 12))
        ref = decompose_at_point(f, z, ball, ball_cover, method)
        tails.append(approx.diagnostics["tail"])
        gaps.append(float(np.max(np.abs(approx.values - ref.values))))
    ok = max(tails) < 1e-5 and max(gaps) < 1e-5
    acceptance("10", "approximant limit", ok,
               f"tail at degree 12: {tails[0]:.1e} / {tails[1]:.1e}; gap to direct_contour {gaps[0]:.1e}, "
               f"to sy_system {gaps[1]:.1e}")
    assert ok
