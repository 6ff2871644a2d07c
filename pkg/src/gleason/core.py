"""Division operators ``T_i``: Cauchy-circle derivatives, path integrals, the SY system.

For ``f`` holomorphic with ``f(0) = 0`` the decomposition
``f(z) = sum_i z_i T_i(f)(z)`` is produced by one of four methods:

``closed_form``       termwise formula for polynomials (the oracle),
``direct_contour``    ``int_gamma D_i f(lam z) dlam`` along a planned curve,
``sy_system``         tangential integrals plus the identity row, solved by Cramer's rule,
``approximant_limit`` closed form applied to least-squares polynomial fits.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .collar import CollarCover, collar_membership
from .domains import Domain
from .errors import (
    CircleExitsDomain,
    DimensionMismatch,
    MethodInapplicable,
    NonConvergent,
    PointOutsideDomain,
    QuadratureStall,
    SingularSystem,
)
from .geometry import BoundaryFrame, tangent_frame
from .paths import PathPlan, plan_path
from .polynomials import Polynomial, fit_approximant, leibenzon_all, leibenzon_closed_form

__all__ = [
    "HolomorphicOracle",
    "polynomial_oracle",
    "named_oracle",
    "oracle_from_spec",
    "cauchy_directional_derivative",
    "straight_plan",
    "integrate_I",
    "solve_SY",
    "decompose_polynomial",
    "DecompositionReport",
    "decompose_at_point",
    "METHODS",
]

METHODS = ("closed_form", "direct_contour", "sy_system", "approximant_limit")
CIRCLE_POINTS = 64
CIRCLE_RTOL = 1e-6
QUAD_TOL = 1e-9
QUAD_MAX_PANELS = 4000
DELTA_FLOOR = 1e-8
RESIDUAL_TOL = 1e-7
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


# -- oracles ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HolomorphicOracle:
    """A vectorized holomorphic function ``(..., n) -> (...)``."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    n: int
    name: str = "f"
    vanishes_at_origin: bool = True
    polynomial: Polynomial | None = None

    def __post_init__(self):
        if self.vanishes_at_origin:
            f0 = complex(self(np.zeros(self.n)))
            if abs(f0) > 1e-12:
                raise ValueError(f"{self.name}: f(0) = {f0:.3g} but vanishing was declared")

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if z.shape[-1] != self.n:
            raise DimensionMismatch(f"{self.name} expects points with {self.n} coordinates")
        return np.asarray(self.evaluator(z), dtype=complex)

    def __add__(self, other: "HolomorphicOracle") -> "HolomorphicOracle":
        poly = self.polynomial + other.polynomial if self.polynomial and other.polynomial else None
        return HolomorphicOracle(lambda z: self(z) + other(z), self.n, f"({self.name})+({other.name})",
                                 self.vanishes_at_origin and other.vanishes_at_origin, poly)

    def scaled(self, c: complex) -> "HolomorphicOracle":
        poly = self.polynomial * c if self.polynomial is not None else None
        return HolomorphicOracle(lambda z: c * self(z), self.n, f"{c}*({self.name})",
                                 self.vanishes_at_origin, poly)


def polynomial_oracle(p: Polynomial, name: str | None = None) -> HolomorphicOracle:
    return HolomorphicOracle(p.eval, p.n, name or "poly", p.vanishes_at_origin, p)


def _quotient(z):
    return z[..., 0] / (2.0 - z[..., 1])


def named_oracle(name: str, n: int = 2, **params) -> HolomorphicOracle:
    """Rational test functions vanishing at 0.

    ``quotient``       ``z1 / (2 - z2)``, holomorphic on a neighbourhood of the closed unit ball;
    ``annulus_pole``   ``1/(z1 - c) + 1/c`` with a pole at ``z1 = c`` (default ``c = 0.75``);
    ``exp_sum``        ``exp(z1 + ... + zn) - 1``.
    """
    if n < 2 and name != "exp_sum":
        raise DimensionMismatch(f"{name} needs n >= 2")
    if name == "quotient":
        return HolomorphicOracle(_quotient, n, "quotient")
    if name == "annulus_pole":
        c = complex(params.get("center", 0.75))

        def pole(z):
            return 1.0 / (z[..., 0] - c) + 1.0 / c

        return HolomorphicOracle(pole, n, "annulus_pole")
    if name == "exp_sum":
        return HolomorphicOracle(lambda z: np.expm1(np.sum(z, axis=-1)), n, "exp_sum")
    raise ValueError(f"unknown oracle {name!r}")


def oracle_from_spec(spec: str, n: int) -> HolomorphicOracle:
    """``poly:<expression>`` or the name of a rational oracle."""
    if spec.startswith("poly:"):
        return polynomial_oracle(Polynomial.parse(spec[5:], n), spec[5:])
    return named_oracle(spec, n)


# -- derivatives and quadrature ---------------------------------------------

def _circle_derivative(f, centers, dirs, radii, domain: Domain | None, m: int):
    """Batched trapezoid Cauchy formula on ``2m`` nodes; returns (value, |m vs 2m|)."""
    k = np.arange(2 * m)
    roots = np.exp(2j * np.pi * k / (2 * m))
    pts = centers[:, None, :] + (radii[:, None] * roots)[:, :, None] * dirs[:, None, :]
    if domain is not None:
        rv = domain.r(pts)
        if np.any(rv >= 0):
            bad = np.argwhere(rv >= 0)[0]
            raise CircleExitsDomain(
                f"circle node at {np.round(pts[bad[0], bad[1]], 6)} has r = {rv[bad[0], bad[1]]:.3g}"
            )
    vals = f(pts) / roots[None, :]
    fine = vals.mean(axis=1) / radii
    coarse = vals[:, ::2].mean(axis=1) / radii
    return fine, np.abs(fine - coarse)


def cauchy_directional_derivative(f, center, direction, radius: float, m: int = CIRCLE_POINTS,
                                  domain: Domain | None = None) -> complex:
    """``d/dt f(center + t e)`` at ``t = 0`` from ``(1/2 pi i) int f(center + t e) / t^2 dt``.

    The trapezoid rule with ``2m`` nodes is compared with its ``m``-node
    subset; a relative gap above ``1e-6`` raises :class:`NonConvergent`.
    With ``domain`` given, every node must satisfy ``r < 0``.
    """
    if m < 16:
        raise ValueError("need at least 16 circle points")
    center = np.atleast_2d(np.asarray(center, dtype=complex))
    e = np.atleast_2d(np.asarray(direction, dtype=complex))
    value, gap = _circle_derivative(f, center, e, np.array([float(radius)]), domain, m)
    if gap[0] > CIRCLE_RTOL * max(1.0, abs(value[0])):
        raise NonConvergent(f"circle rule m vs 2m differ by {gap[0]:.3g}")
    return complex(value[0])


def _adaptive_gl(func, a: float, b: float, tol: float, max_panels: int):
    """Composite 16-point Gauss-Legendre with bisection; returns (value, error estimate, panels)."""

    def rule(lo, hi):
        x = 0.5 * (hi - lo) * _GL_X + 0.5 * (hi + lo)
        return 0.5 * (hi - lo) * np.dot(_GL_W, func(x))

    total_len = b - a
    stack = [(a, b, rule(a, b))]
    value = 0j
    err = 0.0
    panels = 0
    while stack:
        lo, hi, whole = stack.pop()
        mid = 0.5 * (lo + hi)
        left, right = rule(lo, mid), rule(mid, hi)
        gap = abs(left + right - whole)
        if gap <= tol * max((hi - lo) / total_len, 1e-6) or hi - lo < 1e-12 * total_len:
            value += left + right
            err += gap
            panels += 1
            continue
        if len(stack) + panels > max_panels:
            raise QuadratureStall(f"adaptive quadrature exceeded {max_panels} panels")
        stack.append((mid, hi, right))
        stack.append((lo, mid, left))
    return value, err, panels


def straight_plan(z, clearance: float) -> PathPlan:
    """The segment ``[0, 1]`` as a plan, without any safety check."""
    z = np.asarray(z, dtype=complex)
    return PathPlan(z=z.copy(), kind="interior", nodes=np.array([0j, 1 + 0j]),
                    clearance=float(clearance), clearance_collar=float("nan"))


@dataclass(frozen=True)
class QuadratureInfo:
    value: complex
    error_estimate: float
    panels: int
    max_circle_gap: float


def integrate_I(f, z, direction, plan: PathPlan, domain: Domain, cover: CollarCover, *,
                m: int = CIRCLE_POINTS, tol: float = QUAD_TOL, max_panels: int = QUAD_MAX_PANELS,
                full_output: bool = False):
    """``int_gamma D_e f(lam z) dlam`` along ``plan``.

    Circles have radius ``A/2`` on the first part.  On the collar part the
    point ``gamma(s) z`` sits at depth ``tau0 + (1 - s)`` above the boundary
    point, and the radius is ``min(sigma, depth^(1/(1+eps/2))) / 2``; the
    substitution ``1 - s = u^((2+eps)/eps)`` removes the endpoint blow-up.
    """
    z = np.asarray(z, dtype=complex)
    e = np.asarray(direction, dtype=complex)
    e = e / np.linalg.norm(e)
    total = 0j
    err = 0.0
    panels = 0
    gap_max = 0.0

    def derivative(lam, radii):
        nonlocal gap_max
        centers = lam[:, None] * z
        vals, gap = _circle_derivative(f, centers, np.broadcast_to(e, centers.shape), radii, domain, m)
        bad = gap > CIRCLE_RTOL * np.maximum(1.0, np.abs(vals))
        if np.any(bad):
            raise NonConvergent(f"circle rule m vs 2m differ by {gap[bad].max():.3g}")
        gap_max = max(gap_max, float(gap.max()))
        return vals

    rho1 = 0.5 * min(cover.clearance, plan.clearance)
    for a, b, part in plan.segments():
        if part == 1:
            def seg(t, a=a, b=b):
                lam = a + t * (b - a)
                return derivative(lam, np.full(len(t), rho1)) * (b - a)

            v, ee, pp = _adaptive_gl(seg, 0.0, 1.0, tol, max_panels)
        else:
            eps = domain.holder_epsilon
            tau0 = plan.correspondence.depth
            expo = (2.0 + eps) / eps
            u_max = (plan.sigma / 2) ** (1.0 / expo)

            def tail(u):
                tau = u**expo
                lam = 1.0 + tau * plan.mu_z
                depth = tau0 + tau
                radii = 0.5 * np.minimum(plan.sigma, depth ** (1.0 / (1.0 + eps / 2.0)))
                jac = expo * u ** (expo - 1.0)
                # lam runs from 1 + (sigma/2) mu to 1, i.e. tau decreasing
                return -derivative(lam, radii) * plan.mu_z * jac

            v, ee, pp = _adaptive_gl(tail, 0.0, u_max, tol, max_panels)
        total += v
        err += ee
        panels += pp
    if full_output:
        return QuadratureInfo(total, err, panels, gap_max)
    return total


# -- linear algebra ---------------------------------------------------------

def solve_SY(frame: BoundaryFrame | np.ndarray, z, rhs):
    """Solve ``sum_i e^j_i x_i = I_j`` (j < n) and ``sum_i z_i x_i = f(z)`` by Cramer's rule.

    ``frame`` is a :class:`BoundaryFrame` or an ``(n-1, n)`` array of rows.
    Returns ``(x, |Delta|)``.
    """
    rows = frame.tangents if isinstance(frame, BoundaryFrame) else np.asarray(frame, dtype=complex)
    z = np.asarray(z, dtype=complex)
    rhs = np.asarray(rhs, dtype=complex)
    n = len(z)
    if rows.shape != (n - 1, n) or rhs.shape != (n,):
        raise DimensionMismatch("SY needs n-1 frame rows, z and n right-hand sides")
    mat = np.vstack([rows, z[None, :]])
    delta = np.linalg.det(mat)
    if abs(delta) < DELTA_FLOOR:
        raise SingularSystem(f"|Delta| = {abs(delta):.3g} below {DELTA_FLOOR:g}")
    x = np.empty(n, dtype=complex)
    for i in range(n):
        swapped = mat.copy()
        swapped[:, i] = rhs
        x[i] = np.linalg.det(swapped) / delta
    return x, float(abs(delta))


# -- polynomials ------------------------------------------------------------

@dataclass(frozen=True)
class PolynomialDecomposition:
    factors: tuple  # f_1..f_n
    point: np.ndarray
    remainder: float  # max |coefficient| of P - P(p) - sum (z_i - p_i) f_i, relative

    def __iter__(self):
        return iter(self.factors)


def _dense_remainder(p: Polynomial, point: np.ndarray, factors) -> float:
    d = max(p.degree, 1)
    n = p.n
    acc = p.to_dense(d).copy()
    acc[(0,) * n] -= complex(p.eval(point)) if p.degree >= 0 else 0
    for i, fi in enumerate(factors):
        if fi.is_zero():
            continue
        dense = fi.to_dense(d - 1)
        src = [slice(0, d)] * n
        dst = list(src)
        dst[i] = slice(1, d + 1)
        acc[tuple(dst)] -= dense[tuple(src)]
        acc[tuple(src)] += point[i] * dense[tuple(src)]
    scale = max(p.max_abs_coefficient(), abs(complex(p.eval(point))) if p.degree >= 0 else 0.0, 1e-300)
    return float(np.max(np.abs(acc)) / scale)


def decompose_polynomial(p: Polynomial, point=None, domain: Domain | None = None) -> PolynomialDecomposition:
    """Polynomials ``f_i`` with ``P(z) - P(point) = sum_i (z_i - point_i) f_i(z)``."""
    n = p.n
    point = np.zeros(n, dtype=complex) if point is None else np.asarray(point, dtype=complex)
    if point.shape != (n,):
        raise DimensionMismatch(f"point must have {n} coordinates")
    if domain is not None and domain.r(point) >= 0:
        raise PointOutsideDomain(f"r(p) = {float(domain.r(point)):.3g}")
    if p.degree <= 0:
        return PolynomialDecomposition(tuple(Polynomial.zero(n) for _ in range(n)), point, 0.0)
    if not np.any(point):
        core = p - Polynomial.constant(p.coefficient((0,) * n), n)
        factors = tuple(leibenzon_closed_form(core, i) for i in range(n))
    else:
        factors = leibenzon_all(p, point)
    return PolynomialDecomposition(factors, point, _dense_remainder(p, point, factors))


# -- pointwise decomposition --------------------------------------------------

ADVERTISED_TOL = {
    "closed_form": 1e-12,
    "direct_contour": RESIDUAL_TOL,
    "sy_system": RESIDUAL_TOL,
    "approximant_limit": 1e-5,
}


@dataclass(frozen=True)
class DecompositionReport:
    z: np.ndarray
    method: str
    values: np.ndarray  # T_1(f)(z) .. T_n(f)(z)
    f_value: complex
    residual: float  # |f(z) - sum z_i T_i(f)(z)|
    tolerance: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.residual < self.tolerance * (1.0 + abs(self.f_value))

    @property
    def status(self) -> str:
        return "OK" if self.passed else "FAILED"

    def to_json_dict(self) -> dict:
        def pair(c):
            return [float(np.real(c)), float(np.imag(c))]

        diag = {}
        for key, val in self.diagnostics.items():
            if isinstance(val, (complex, np.complexfloating)):
                diag[key] = pair(val)
            elif isinstance(val, (list, tuple, np.ndarray)):
                diag[key] = [float(v) for v in np.ravel(val)]
            elif isinstance(val, (np.floating, np.integer)):
                diag[key] = val.item()
            else:
                diag[key] = val
        return {
            "z": [pair(c) for c in self.z],
            "method": self.method,
            "values": [pair(c) for c in self.values],
            "f_value": pair(self.f_value),
            "residual": self.residual,
            "tolerance": self.tolerance,
            "status": self.status,
            "diagnostics": diag,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


def _approximant_samples(domain: Domain, count: int, seed: int, shrink: float = 0.9) -> np.ndarray:
    rng = np.random.default_rng(seed)
    pts = np.concatenate([domain.interior_sample(rng, count), domain.boundary_sample(count // 3, rng)])
    pts = shrink * pts
    return pts[domain.r(pts) < 0]


def _closed_form_values(p: Polynomial, z: np.ndarray) -> np.ndarray:
    core = p - Polynomial.constant(p.coefficient((0,) * p.n), p.n)
    return np.array([complex(leibenzon_closed_form(core, i).eval(z)) for i in range(p.n)])


def decompose_at_point(
    f: HolomorphicOracle,
    z,
    domain: Domain,
    cover: CollarCover | None,
    method: str = "auto",
    *,
    plan: PathPlan | None = None,
    degrees: tuple = (2, 12),
    samples: np.ndarray | None = None,
    tail_points: np.ndarray | None = None,
    seed: int = 0,
) -> DecompositionReport:
    """``T_1(f)(z), ..., T_n(f)(z)`` by the requested method.

    ``auto`` picks ``closed_form`` for polynomials, ``sy_system`` in the
    collar and ``direct_contour`` elsewhere.  At ``z = 0`` the values are
    ``D_i f(0)``; for ``|z| < 1e-3 diam`` the straight segment is used, since a
    ball of radius ``A`` about 0 lies in the domain.
    """
    z = np.asarray(z, dtype=complex)
    n = domain.n
    if z.shape != (n,) or f.n != n:
        raise DimensionMismatch(f"point and oracle must have {n} coordinates")
    if domain.r(z) > domain.boundary_tol:
        raise PointOutsideDomain(f"r(z) = {float(domain.r(z)):.3g}")
    if f.vanishes_at_origin is False:
        raise ValueError("decomposition needs f(0) = 0")
    if method == "auto":
        if f.polynomial is not None:
            method = "closed_form"
        else:
            method = "direct_contour" if collar_membership(cover, domain, z) is None else "sy_system"
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if cover is None and method not in ("closed_form", "approximant_limit"):
        raise MethodInapplicable(f"{method} needs a collar cover")
    diag: dict = {}
    small = np.linalg.norm(z) < 1e-3 * domain.diameter

    if method == "closed_form":
        if f.polynomial is None:
            raise MethodInapplicable("closed_form needs a polynomial oracle")
        values = _closed_form_values(f.polynomial, z)
    elif method == "approximant_limit":
        values = _approximant_values(f, z, domain, degrees, samples, tail_points, seed, diag)
    elif not np.any(z):
        rho = 0.5 * cover.clearance
        values = np.array([cauchy_directional_derivative(f, z, np.eye(n)[i], rho, domain=domain)
                           for i in range(n)])
        diag["note"] = "z = 0: values are D_i f(0)"
    elif small or method == "direct_contour":
        corr = None if small else collar_membership(cover, domain, z)
        if corr is not None:
            raise MethodInapplicable("direct_contour is not available in the collar; use sy_system")
        if small:
            plan = straight_plan(z, cover.clearance)
        elif plan is None:
            plan = plan_path(domain, cover, z, correspondence=corr)
        infos = [integrate_I(f, z, np.eye(n)[i], plan, domain, cover, full_output=True) for i in range(n)]
        values = np.array([q.value for q in infos])
        diag["quadrature_error"] = float(sum(q.error_estimate for q in infos))
        diag["panels"] = int(sum(q.panels for q in infos))
        diag["path_nodes"] = int(len(plan.nodes))
    else:  # sy_system
        corr = collar_membership(cover, domain, z)
        if corr is None:
            raise MethodInapplicable("sy_system needs z in the collar or on the boundary")
        if plan is None:
            plan = plan_path(domain, cover, z, correspondence=corr)
        frame = tangent_frame(domain, corr.w, check_boundary=False)
        infos = [integrate_I(f, z, e, plan, domain, cover, full_output=True) for e in frame.tangents]
        rhs = np.array([q.value for q in infos] + [complex(f(z))])
        values, delta = solve_SY(frame, z, rhs)
        diag["delta"] = delta
        diag["quadrature_error"] = float(sum(q.error_estimate for q in infos))
        diag["panels"] = int(sum(q.panels for q in infos))
        diag["depth"] = corr.depth
    f_value = complex(f(z))
    residual = float(abs(f_value - np.dot(z, values)))
    return DecompositionReport(z.copy(), method, values, f_value, residual, ADVERTISED_TOL[method], diag)


def _approximant_values(f, z, domain, degrees, samples, tail_points, seed, diag):
    d0, d1 = degrees
    if samples is None:
        samples = _approximant_samples(domain, 4000, seed)
    check = np.atleast_2d(z) if tail_points is None else np.asarray(tail_points, dtype=complex)
    prev = None
    tails, residuals = [], []
    values = None
    for d in range(d0, d1 + 1):
        fit = fit_approximant(f, samples, d)
        ops = [leibenzon_closed_form(fit.poly, i) for i in range(domain.n)]
        values = np.array([complex(op.eval(z)) for op in ops])
        on_check = np.stack([op.eval(check) for op in ops])
        if prev is not None:
            tails.append(float(np.max(np.abs(on_check - prev))))
        prev = on_check
        residuals.append(fit.residual)
    diag["degrees"] = list(range(d0, d1 + 1))
    diag["fit_residuals"] = residuals
    diag["tails"] = tails
    diag["tail"] = tails[-1] if tails else float("nan")
    return values
