"""Empirical experiments: the key-estimate constant ``K`` and continuity of ``I`` and ``T_i``."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .collar import CollarCover, collar_membership
from .core import HolomorphicOracle, decompose_at_point, integrate_I
from .domains import Domain
from .errors import PatchSeam
from .geometry import tangent_frame
from .paths import plan_path
from .polynomials import Polynomial, leibenzon_closed_form

__all__ = [
    "ball_sphere_points",
    "support_set",
    "KTable",
    "estimate_K",
    "grange_approach",
    "ContinuityTable",
    "continuity_experiment",
]


def ball_sphere_points(center, radius: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform points on the sphere ``|z - center| = radius`` in C^n."""
    center = np.asarray(center, dtype=complex)
    g = rng.normal(size=(count, len(center))) + 1j * rng.normal(size=(count, len(center)))
    return center + radius * g / np.linalg.norm(g, axis=1, keepdims=True)


def support_set(domain: Domain, cover: CollarCover, points: np.ndarray, *, s_count: int = 12,
                theta_count: int = 16, dilation: float = 1.05, delta: float | None = None) -> np.ndarray:
    """Points on every derivative circle used to compute ``T_i`` at ``points``.

    Interior parts use coordinate directions with radius ``A/2``; collar parts
    use the tangent frame with the depth schedule.  Radii are dilated by
    ``dilation`` and points with ``r > -delta`` are dropped.
    """
    delta = 1e-9 * domain.scale if delta is None else delta
    theta = np.exp(2j * np.pi * np.arange(theta_count) / theta_count)
    eps = domain.holder_epsilon
    out = []
    for z in points:
        corr = collar_membership(cover, domain, z)
        plan = plan_path(domain, cover, z, correspondence=corr)
        if corr is None:
            dirs = np.eye(domain.n, dtype=complex)
        else:
            dirs = tangent_frame(domain, corr.w, check_boundary=False).tangents
        s1 = np.linspace(0.0, plan.split, s_count)
        lam = plan.gamma(s1)
        radii = np.full(len(lam), 0.5 * min(cover.clearance, plan.clearance))
        if corr is not None:
            tau = (plan.sigma / 2) * np.geomspace(1.0, 1e-6, s_count)
            lam = np.concatenate([lam, 1.0 + tau * plan.mu_z])
            depth = corr.depth + tau
            radii = np.concatenate([radii, 0.5 * np.minimum(plan.sigma, depth ** (1 / (1 + eps / 2)))])
        centers = lam[:, None] * z
        circ = centers[:, None, None, :] + dilation * (radii[:, None, None, None] * theta[None, :, None, None]) \
            * dirs[None, None, :, :]
        out.append(circ.reshape(-1, domain.n))
    pts = np.concatenate(out + [np.asarray(points, dtype=complex)])
    return pts[domain.r(pts) <= -delta]


@dataclass(frozen=True)
class KTable:
    rows: list  # (degree, trial, ratio)
    degrees: tuple

    @property
    def max_by_degree(self) -> np.ndarray:
        return np.array([max(r for d, _, r in self.rows if d == deg) for deg in self.degrees])

    @property
    def summary(self) -> float:
        return float(self.max_by_degree.max())

    @property
    def log_slope(self) -> float:
        """Least-squares slope of ``log(max ratio)`` against degree."""
        if len(self.degrees) < 2:
            return 0.0
        return float(np.polyfit(np.array(self.degrees, float), np.log(self.max_by_degree), 1)[0])

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["degree", "trial", "ratio"])
            for d, t, r in self.rows:
                writer.writerow([d, t, repr(float(r))])


def _ratio(p: Polynomial, b_pts: np.ndarray, s_pts: np.ndarray) -> float:
    top = max(float(np.max(np.abs(leibenzon_closed_form(p, i).eval(b_pts)))) for i in range(p.n))
    return top / float(np.max(np.abs(p.eval(s_pts))))


def estimate_K(domain: Domain, cover: CollarCover, center, radius: float, degrees=range(1, 16),
               trials: int = 50, seed: int = 0, *, b_points: int = 96, support_points: int = 24,
               polynomials=None) -> KTable:
    """Empirical ``max_i ||T_i(P)||_B / ||P||_S`` over random polynomials per degree.

    ``B`` is the ball ``(center, radius)``; suprema over ``B`` are taken on its
    sphere (maximum principle).  ``S`` is :func:`support_set` of a subsample
    of the sphere.  Coefficients are uniform in the unit disc with ``P(0) = 0``;
    the ratio does not depend on normalizing ``||P||_S = 1``.  ``polynomials``
    optionally maps a degree to a fixed list of test polynomials.
    """
    rng = np.random.default_rng(seed)
    b_pts = ball_sphere_points(center, radius, b_points, rng)
    b_pts = b_pts[domain.r(b_pts) < 0]
    s_pts = support_set(domain, cover, b_pts[:support_points])
    degrees = tuple(int(d) for d in degrees)
    rows = []
    for deg in degrees:
        polys = polynomials(deg) if polynomials is not None else [
            Polynomial.random(domain.n, deg, rng) for _ in range(trials)
        ]
        for t, p in enumerate(polys):
            rows.append((deg, t, _ratio(p, b_pts, s_pts)))
    return KTable(rows, degrees)


def grange_approach(domain: Domain, cover: CollarCover, target=(1.0, 0.0), ks=range(2, 9), degree: int = 10,
                    trials: int = 50, seed: int = 0, radius_fraction: float = 0.25) -> list:
    """``(k, distance, max ratio)`` for test balls centred at distance ``2^-k`` from ``target``.

    Centres move inward along the inner normal at ``target``; each ball has
    radius ``radius_fraction * 2^-k``.  The same polynomial ensemble is used
    for every ``k``.
    """
    target = np.asarray(target, dtype=complex)
    normal = -domain.grad(target)
    normal = normal / np.linalg.norm(normal)
    rng = np.random.default_rng(seed)
    ensemble = [Polynomial.random(domain.n, degree, rng) for _ in range(trials)]
    out = []
    for k in ks:
        dist = 2.0 ** (-k)
        table = estimate_K(domain, cover, target + dist * normal, radius_fraction * dist, degrees=(degree,),
                           seed=seed, polynomials=lambda _d: ensemble)
        out.append((int(k), dist, table.summary))
    return out


@dataclass(frozen=True)
class ContinuityTable:
    rows: list  # (k, distance, delta_I, delta_T)

    @property
    def deltas(self) -> np.ndarray:
        return np.array([max(r[2], r[3]) for r in self.rows])

    @property
    def final_delta(self) -> float:
        return float(self.deltas[-1])

    @property
    def rates(self) -> np.ndarray:
        """``delta / |z_n - z|``; bounded for Lipschitz behaviour."""
        return self.deltas / np.array([r[1] for r in self.rows])

    def monotone(self) -> bool:
        d = self.deltas
        return bool(np.all(d[1:] <= d[:-1] * (1 + 1e-9) + 1e-14))

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "distance", "delta_I", "delta_T"])
            for k, dist, di, dt in self.rows:
                writer.writerow([k, repr(float(dist)), repr(float(di)), repr(float(dt))])


def _integrals_and_values(f, z, domain, cover, method):
    report = decompose_at_point(f, z, domain, cover, method)
    corr = collar_membership(cover, domain, z)
    plan = plan_path(domain, cover, z, correspondence=corr)
    if corr is None:
        dirs = np.eye(domain.n, dtype=complex)
    else:
        dirs = tangent_frame(domain, corr.w, check_boundary=False).tangents
    integrals = np.array([integrate_I(f, z, e, plan, domain, cover) for e in dirs])
    return integrals, report.values, (-1 if corr is None else corr.patch)


def continuity_experiment(f: HolomorphicOracle, z, domain: Domain, cover: CollarCover, *, direction=None,
                          ks=range(3, 13), method: str = "auto", seed: int = 0) -> ContinuityTable:
    """``|I(z_n) - I(z)|`` and ``|T(f)(z_n) - T(f)(z)|`` for ``z_n = z + 2^-k u``.

    ``u`` is a unit vector (random when not given).  Every ``z_n`` must lie in
    the same patch as ``z`` (or outside the collar with ``z``), otherwise
    :class:`PatchSeam` is raised.
    """
    z = np.asarray(z, dtype=complex)
    if direction is None:
        rng = np.random.default_rng(seed)
        direction = rng.normal(size=domain.n) + 1j * rng.normal(size=domain.n)
    u = np.asarray(direction, dtype=complex)
    u = u / np.linalg.norm(u) if np.any(u) else u
    base_I, base_T, patch = _integrals_and_values(f, z, domain, cover, method)
    rows = []
    for k in ks:
        dist = 2.0 ** (-k)
        zn = z + dist * u
        integ, vals, pn = _integrals_and_values(f, zn, domain, cover, method)
        if pn != patch:
            raise PatchSeam(f"z_n at k = {k} lies in patch {pn}, z in patch {patch}")
        rows.append((int(k), float(np.linalg.norm(zn - z)), float(np.max(np.abs(integ - base_I))),
                     float(np.max(np.abs(vals - base_T)))))
    return ContinuityTable(rows)
