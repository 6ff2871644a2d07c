import numpy as np
import pytest

from gleason.collar import sample_collar
from gleason.core import (
    ADVERTISED_TOL,
    HolomorphicOracle,
    cauchy_directional_derivative,
    decompose_at_point,
    decompose_polynomial,
    integrate_I,
    named_oracle,
    oracle_from_spec,
    polynomial_oracle,
    solve_SY,
)
from gleason.errors import (
    CircleExitsDomain,
    DimensionMismatch,
    MethodInapplicable,
    NonConvergent,
    PointOutsideDomain,
    SingularSystem,
)
from gleason.paths import plan_path
from gleason.polynomials import Polynomial, leibenzon_closed_form


def poly(text, n=2):
    return Polynomial.parse(text, n)


# -- Cauchy derivatives --------------------------------------------------------

def test_cauchy_examples():
    f = polynomial_oracle(poly("z1**2"))
    assert cauchy_directional_derivative(f, [1, 0], [1, 0], 0.3) == pytest.approx(2, abs=1e-12)
    g = polynomial_oracle(poly("z1*z2"))
    assert cauchy_directional_derivative(g, [0.5, 0.5], [0, 1], 0.2) == pytest.approx(0.5, abs=1e-12)
    q = named_oracle("quotient")
    assert cauchy_directional_derivative(q, [0.5, 0.5], [1, 0], 0.3) == pytest.approx(1 / 1.5, abs=1e-12)


def test_cauchy_circle_checks(ball):
    q = named_oracle("quotient")
    with pytest.raises(CircleExitsDomain):
        cauchy_directional_derivative(q, [0.9, 0], [1, 0], 0.2, domain=ball)
    # a pole just outside the circle makes the m and 2m rules disagree
    pole = named_oracle("annulus_pole", center=0.75)
    with pytest.raises(NonConvergent):
        cauchy_directional_derivative(pole, [0.5, 0], [1, 0], 0.249, m=16)


# -- oracles -------------------------------------------------------------------

def test_oracle_checks():
    with pytest.raises(ValueError):
        polynomial_oracle(poly("z1 + 1")).__class__(lambda z: z[..., 0] + 1, 2)
    f = oracle_from_spec("poly:z1*z2", 2)
    with pytest.raises(DimensionMismatch):
        f(np.zeros(3))
    assert (f + f.scaled(2))(np.array([1.0, 2.0])) == pytest.approx(6)
    assert oracle_from_spec("exp_sum", 2)(np.zeros(2)) == 0


# -- integrals -----------------------------------------------------------------

def test_integral_matches_closed_form(ball, ball_cover):
    p = poly("z1**3 + 2*z1*z2 - 1j*z2**2")
    f = polynomial_oracle(p)
    z = np.array([0.3 + 0.1j, -0.2 + 0.25j])
    plan = plan_path(ball, ball_cover, z)
    for i in range(2):
        val = integrate_I(f, z, np.eye(2)[i], plan, ball, ball_cover)
        assert val == pytest.approx(complex(leibenzon_closed_form(p, i).eval(z)), abs=1e-8)


def test_integral_path_independent(shifted_annulus, shifted_annulus_cover):
    f = named_oracle("annulus_pole")
    z = np.array([0.75 + 0.55j, 0.1])
    a = plan_path(shifted_annulus, shifted_annulus_cover, z)
    b = plan_path(shifted_annulus, shifted_annulus_cover, z, force_raster=True, resolution=96)
    va = integrate_I(f, z, [1, 0], a, shifted_annulus, shifted_annulus_cover)
    vb = integrate_I(f, z, [1, 0], b, shifted_annulus, shifted_annulus_cover)
    assert va == pytest.approx(vb, abs=1e-8)


def test_integral_of_zero(ball, ball_cover):
    zero = HolomorphicOracle(lambda z: np.zeros(z.shape[:-1]), 2, "zero")
    z = np.array([0.3, 0.2])
    plan = plan_path(ball, ball_cover, z)
    assert integrate_I(zero, z, [1, 0], plan, ball, ball_cover) == 0


def test_integral_collar_tangent(ball, ball_cover, rng):
    p = poly("z1**2*z2 + z2**3 + 3*z1")
    f = polynomial_oracle(p)
    z, w, *_ = sample_collar(ball_cover, ball, 3, rng)
    for zi, wi in zip(z, w):
        e = np.array([-np.conj(wi[1]), np.conj(wi[0])])
        plan = plan_path(ball, ball_cover, zi)
        expect = sum(e[i] * complex(leibenzon_closed_form(p, i).eval(zi)) for i in range(2))
        assert integrate_I(f, zi, e, plan, ball, ball_cover) == pytest.approx(expect, abs=1e-8)


# -- SY system -----------------------------------------------------------------

def test_sy_example():
    x, delta = solve_SY(np.array([[0, 1]]), [0.9, 0], [0, 0.81])
    assert np.allclose(x, [0.9, 0], atol=1e-15)
    assert delta == pytest.approx(0.9)


def test_sy_random_matches_dense_solve(rng):
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) + 3 * np.eye(3)
    rhs = rng.normal(size=3) + 1j * rng.normal(size=3)
    x, _ = solve_SY(a[:2], a[2], rhs)
    assert np.allclose(x, np.linalg.solve(a, rhs), atol=1e-10)


def test_sy_singular():
    with pytest.raises(SingularSystem):
        solve_SY(np.array([[1, 0]]), [0.5, 0], [0, 0])
    with pytest.raises(DimensionMismatch):
        solve_SY(np.array([[1, 0, 0]]), [0.5, 0], [0, 0])


# -- polynomial decomposition ---------------------------------------------------

def test_decompose_square():
    f1, f2 = decompose_polynomial(poly("z1**2"))
    assert f1.allclose(poly("z1")) and f2.is_zero()


def test_decompose_product_shifted():
    a, b = 0.3 + 0.1j, -0.2j
    dec = decompose_polynomial(poly("z1*z2"), [a, b])
    f1, f2 = dec
    assert f1.allclose(poly("z2/2") + Polynomial.constant(b / 2, 2))
    assert f2.allclose(poly("z1/2") + Polynomial.constant(a / 2, 2))
    assert dec.remainder < 1e-15


def test_decompose_constant_and_checks(ball):
    dec = decompose_polynomial(Polynomial.constant(3.0, 2), [0.1, 0.2])
    assert all(f.is_zero() for f in dec) and dec.remainder == 0
    with pytest.raises(PointOutsideDomain):
        decompose_polynomial(poly("z1"), [1.2, 0], ball)
    with pytest.raises(DimensionMismatch):
        decompose_polynomial(poly("z1"), [0.1, 0.2, 0.3])


def test_decompose_random_identity(rng):
    for _ in range(5):
        p = Polynomial.random(3, 6, rng)
        base = 0.3 * (rng.normal(size=3) + 1j * rng.normal(size=3))
        dec = decompose_polynomial(p, base)
        assert dec.remainder < 1e-12
        z = rng.normal(size=3) + 1j * rng.normal(size=3)
        lhs = p.eval(z) - p.eval(base)
        rhs = sum((z[i] - base[i]) * dec.factors[i].eval(z) for i in range(3))
        assert lhs == pytest.approx(rhs, abs=1e-10 * (1 + abs(lhs)))


def test_decompose_linear(rng):
    p, q = Polynomial.random(2, 4, rng), Polynomial.random(2, 4, rng)
    c = 0.7 - 0.2j
    base = np.array([0.2, -0.1j])
    lhs = decompose_polynomial(p + q * c, base)
    dp, dq = decompose_polynomial(p, base), decompose_polynomial(q, base)
    for i in range(2):
        assert lhs.factors[i].allclose(dp.factors[i] + dq.factors[i] * c, atol=1e-12)


# -- pointwise decomposition -----------------------------------------------------

def test_methods_agree_interior(ball, ball_cover):
    f = polynomial_oracle(poly("z1**2*z2 + 2j*z1 - z2**3"))
    z = np.array([0.3, 0.2])
    ref = decompose_at_point(f, z, ball, ball_cover, "closed_form")
    direct = decompose_at_point(f, z, ball, ball_cover, "direct_contour")
    approx = decompose_at_point(f, z, ball, None, "approximant_limit")
    assert np.allclose(direct.values, ref.values, atol=1e-7)
    assert np.allclose(approx.values, ref.values, atol=1e-7)
    assert ref.passed and direct.passed and approx.passed


def test_quotient_closed_form(ball, ball_cover):
    f = named_oracle("quotient")
    z = np.array([0.3 + 0.1j, 0.4 - 0.2j])
    rep = decompose_at_point(f, z, ball, ball_cover)
    assert rep.method == "direct_contour"
    # T_1 = -log(1 - z2/2)/z2 and T_2 = z1 (1/(2 - z2) - T_1)/z2 for z1/(2 - z2)
    t1 = -np.log(1 - z[1] / 2) / z[1]
    assert rep.values[0] == pytest.approx(t1, abs=1e-9)
    assert rep.residual < 1e-9


def test_sy_in_collar(ball, ball_cover):
    f = named_oracle("quotient")
    z = np.array([1 - ball_cover.sigma / 8, 0.0])
    rep = decompose_at_point(f, z, ball, ball_cover)
    assert rep.method == "sy_system"
    assert rep.diagnostics["delta"] >= 1e-6
    assert rep.passed


def test_origin_gives_gradient(ball, ball_cover):
    f = named_oracle("exp_sum")
    rep = decompose_at_point(f, np.zeros(2), ball, ball_cover, "direct_contour")
    assert np.allclose(rep.values, [1, 1], atol=1e-12)


def test_method_applicability(ball, ball_cover):
    f = named_oracle("quotient")
    with pytest.raises(MethodInapplicable):
        decompose_at_point(f, np.array([0.3, 0.2]), ball, ball_cover, "sy_system")
    with pytest.raises(MethodInapplicable):
        decompose_at_point(f, np.array([1 - ball_cover.sigma / 8, 0]), ball, ball_cover, "direct_contour")
    with pytest.raises(MethodInapplicable):
        decompose_at_point(f, np.array([0.3, 0.2]), ball, ball_cover, "closed_form")
    with pytest.raises(MethodInapplicable):
        decompose_at_point(f, np.array([0.3, 0.2]), ball, None, "direct_contour")
    with pytest.raises(ValueError):
        decompose_at_point(f, np.array([0.3, 0.2]), ball, ball_cover, "bogus")
    with pytest.raises(PointOutsideDomain):
        decompose_at_point(f, np.array([1.3, 0.2]), ball, ball_cover)


def test_report_json(ball, ball_cover):
    from gleason.schemas import validate

    rep = decompose_at_point(named_oracle("quotient"), np.array([0.3, 0.2]), ball, ball_cover)
    validate({"command": "decompose", "domain": "ball", "status": rep.status, "files": [],
              "function": "quotient", "reports": [rep.to_json_dict()]}, "decomposition")
    assert rep.tolerance == ADVERTISED_TOL["direct_contour"]
