"""Boundary collar: finite patch cover, the correspondence map and its inverse.

For a patch centred at ``w_k`` with inner normal ``n_k`` the collar map is

    F_k(w, s) = w + (1 - s) pi_w(n_k),      w in W_k cap bd(Omega), 1 - s in [0, sigma/2).

Because ``pi_w(n_k)`` lies on the complex line through 0 and ``w``, the point
``F_k(w, s)`` stays on that line, and ``pi_w(n_k) = pi_z(n_k)``.  Inverting
``F_k`` at ``z`` therefore reduces to one real unknown: with
``m = <n_k, z> / <z, z>`` the boundary point is ``w = (1 - tau m) z`` where
``tau = 1 - s`` solves ``r((1 - tau m) z) = 0``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .domains import Domain
from .errors import CoverFailure, NewtonDivergence, PointOutsideDomain
from .geometry import frame_vectors, hermitian, inner_normal, project_onto_line

__all__ = [
    "CollarCover",
    "Correspondence",
    "collar_cover",
    "collar_membership",
    "interior_cover",
    "sample_collar",
    "verify_lemma1",
    "Lemma1Report",
]

NEWTON_MAX_ITER = 50
TAU_DECADES = 8  # verification depths span sigma * 10^-8 .. sigma


@dataclass(frozen=True, eq=False)
class CollarCover:
    centers: np.ndarray  # (m, n) patch centres on the boundary
    center_normals: np.ndarray  # (m, n) inner unit normals at the centres
    radii: np.ndarray  # (m,) ball radius of each W_k
    patch_sigmas: np.ndarray  # (m,)
    sigma: float
    clearance: float  # A
    boundary: np.ndarray = field(repr=False)  # boundary sample used for covering
    lemma1_checked: bool = True

    @property
    def size(self) -> int:
        return len(self.centers)

    def patch_contains(self, k: int, w) -> np.ndarray:
        return np.linalg.norm(np.asarray(w) - self.centers[k], axis=-1) < self.radii[k]

    def covering_patch(self, w) -> np.ndarray:
        """Index of a patch containing each ``w`` (nearest centre), ``-1`` if none."""
        w = np.atleast_2d(np.asarray(w, dtype=complex))
        d = np.linalg.norm(w[:, None, :] - self.centers[None], axis=-1)
        k = np.argmin(d / self.radii, axis=1)
        inside = d[np.arange(len(w)), k] < self.radii[k]
        return np.where(inside, k, -1)

    def distance_to_boundary(self, domain: Domain, z, chunk: int = 2048) -> np.ndarray:
        """``min(gradient-foot distance, distance to the boundary sample)``."""
        z = np.asarray(z, dtype=complex)
        flat = z.reshape(-1, domain.n)
        out = np.empty(len(flat))
        for start in range(0, len(flat), chunk):
            part = flat[start : start + chunk]
            d_sample = np.min(np.linalg.norm(part[:, None, :] - self.boundary[None], axis=-1), axis=1)
            d_foot = domain.distance_estimate(part)
            out[start : start + chunk] = np.minimum(d_sample, np.where(np.isfinite(d_foot), d_foot, np.inf))
        return out.reshape(z.shape[:-1])

    def in_collar(self, domain: Domain, z) -> bool:
        return collar_membership(self, domain, z) is not None


@dataclass(frozen=True)
class Correspondence:
    """``z = w + (1 - s) pi_w(n_{w_k})`` with ``w`` in patch ``k``."""

    z: np.ndarray
    w: np.ndarray
    w_k: np.ndarray
    patch: int
    s: float
    residual: float
    iterations: int

    @property
    def depth(self) -> float:
        return 1.0 - self.s


def _farthest_point_centers(points: np.ndarray, budget: int) -> np.ndarray:
    chosen = [0]
    dist = np.linalg.norm(points - points[0], axis=1)
    while len(chosen) < budget:
        nxt = int(np.argmax(dist))
        if dist[nxt] == 0:
            break
        chosen.append(nxt)
        dist = np.minimum(dist, np.linalg.norm(points - points[nxt], axis=1))
    return np.array(chosen)


def _collar_directions(points: np.ndarray, normal: np.ndarray) -> np.ndarray:
    """``pi_w(n)`` for every row ``w`` of ``points``."""
    return project_onto_line(np.broadcast_to(normal, points.shape), points)


def _lemma1_margins(domain, points, normal, sigma, epsilon, draws):
    """``-r`` at ``w + tau pi_w(n) + t e`` for pre-drawn unit randoms ``draws``."""
    idx, u_tau, u_t, phase, mix = draws
    w = points[idx % len(points)]
    tau = sigma * 10.0 ** (-TAU_DECADES * u_tau)
    t_abs = tau ** (1.0 / (1.0 + epsilon / 2.0)) * u_t
    frames = frame_vectors(-inner_normal(domain, w, check_boundary=False))
    e = np.einsum("pj,pjn->pn", mix, frames)
    e /= np.linalg.norm(e, axis=-1, keepdims=True)
    pts = w + tau[:, None] * _collar_directions(w, normal) + (t_abs * np.exp(1j * phase))[:, None] * e
    return -domain.r(pts), w, tau, t_abs


def _draws(rng, count, n):
    mix = rng.normal(size=(count, n - 1)) + 1j * rng.normal(size=(count, n - 1))
    return (
        rng.integers(0, 2**31, count),
        rng.uniform(size=count),
        rng.uniform(size=count),
        rng.uniform(0, 2 * np.pi, count),
        mix,
    )


def collar_cover(
    domain: Domain,
    boundary_sample_count: int = 1500,
    patch_budget: int = 24,
    *,
    sigma_max: float = 0.4,
    radius_factor: float = 1.2,
    verification_samples: int = 600,
    interior_samples: int = 2000,
    require_lemma1: bool = True,
    seed: int = 0,
) -> CollarCover:
    """Finite cover ``W_1..W_m`` of the boundary, collar width ``sigma`` and clearance ``A``.

    Centres are chosen by farthest-point sampling of a boundary sample; every
    patch is a ball of radius ``radius_factor`` times the covering radius.  Per
    patch, ``sigma_k`` is the largest value (by halving then bisection) for
    which the collar-tube membership test holds on an in-patch sample.  With
    ``require_lemma1=False`` only inward pointing of ``pi_w(n_k)`` is enforced;
    this is how covers of merely C^1 domains are built for experiments.
    """
    if patch_budget < 1:
        raise CoverFailure("patch budget must be at least 1")
    rng = np.random.default_rng(seed)
    boundary = domain.boundary_sample(boundary_sample_count, rng)
    centers_idx = _farthest_point_centers(boundary, patch_budget)
    centers = boundary[centers_idx]
    d = np.linalg.norm(boundary[:, None, :] - centers[None], axis=-1)
    covering_radius = float(d.min(axis=1).max())
    radius = radius_factor * covering_radius if covering_radius > 0 else domain.diameter
    radii = np.full(len(centers), radius)
    if np.any(d.min(axis=1) >= radius):
        raise CoverFailure("boundary sample not covered by the patch budget")
    normals = inner_normal(domain, centers, check_boundary=False)

    sigmas = np.zeros(len(centers))
    for k in range(len(centers)):
        local = boundary[np.linalg.norm(boundary - centers[k], axis=1) < radius]
        dirs = _collar_directions(local, normals[k])
        slope = np.real(hermitian(dirs, domain.grad(local)))
        if np.any(slope >= 0):
            raise CoverFailure(
                f"patch {k}: projected normal fails to point inward; increase the patch budget"
            )
        draws = _draws(rng, verification_samples, domain.n)

        def ok(sig):
            if require_lemma1:
                margins = _lemma1_margins(domain, local, normals[k], sig, domain.holder_epsilon, draws)[0]
                if np.any(margins <= 0):
                    return False
            tau = sig * np.linspace(0.05, 1.0, 20)
            pts = local[:, None, :] + tau[None, :, None] * dirs[:, None, :]
            return bool(np.all(domain.r(pts) < 0))

        hi = sigma_max
        if ok(hi):
            sigmas[k] = hi
            continue
        lo = hi / 2
        while not ok(lo):
            hi = lo
            lo /= 2
            if lo < 1e-6:
                raise CoverFailure(f"patch {k}: no collar width satisfies the membership test")
        for _ in range(10):
            mid = 0.5 * (lo + hi)
            if ok(mid):
                lo = mid
            else:
                hi = mid
        sigmas[k] = lo
    sigma = float(sigmas.min())

    # clearance A: inner edge of the collar plus interior points outside it
    partial = CollarCover(centers, normals, radii, sigmas, sigma, np.inf, boundary, require_lemma1)
    edge = []
    for k in range(len(centers)):
        local = boundary[partial.patch_contains(k, boundary)]
        edge.append(local + (sigma / 2) * _collar_directions(local, normals[k]))
    edge = np.concatenate(edge)
    interior = domain.interior_sample(rng, interior_samples)
    outside = np.array([collar_membership(partial, domain, z) is None for z in interior], dtype=bool)
    cand = np.concatenate([edge, interior[outside], domain.seed[None], np.zeros((1, domain.n))])
    cand = cand[domain.r(cand) < 0]
    clearance = float(np.min(partial.distance_to_boundary(domain, cand)))
    if not clearance > 0:
        raise CoverFailure("clearance A is not positive")
    return CollarCover(centers, normals, radii, sigmas, sigma, clearance, boundary, require_lemma1)


def interior_cover(domain: Domain, clearance: float, boundary_sample_count: int = 1500,
                   seed: int = 0) -> CollarCover:
    """A cover with no patches and a prescribed clearance ``A``.

    Used on domains without a valid collar (for example non C-convex ones):
    every point is treated as interior and paths only need to stay ``A`` away
    from the boundary.
    """
    if not clearance > 0:
        raise CoverFailure("clearance A must be positive")
    boundary = domain.boundary_sample(boundary_sample_count, np.random.default_rng(seed))
    empty = np.zeros((0, domain.n), dtype=complex)
    return CollarCover(empty, empty, np.zeros(0), np.zeros(0), 0.0, float(clearance), boundary, False)


def sample_collar(cover: CollarCover, domain: Domain, count: int, rng: np.random.Generator,
                  include_boundary: bool = False):
    """Points ``z = F_k(w, s)`` with ``w`` from the cover's boundary sample.

    Returns ``(z, w, patch, s)``; ``1 - s`` is uniform on ``(0, sigma/2)``, or
    on ``[0, sigma/2)`` with ``include_boundary``.
    """
    idx = rng.integers(0, len(cover.boundary), count)
    w = cover.boundary[idx]
    patch = cover.covering_patch(w)
    if np.any(patch < 0):
        raise CoverFailure("boundary sample point outside every patch")
    tau = rng.uniform(0.0, cover.sigma / 2, count)
    if not include_boundary:
        tau = np.where(tau == 0, cover.sigma / 4, tau)
    z = w + tau[:, None] * project_onto_line(cover.center_normals[patch], w)
    return z, w, patch, 1.0 - tau


def collar_membership(cover: CollarCover, domain: Domain, z) -> Correspondence | None:
    """Boundary point ``w``, patch centre ``w_k`` and ``s`` with ``z = F_k(w, s)``.

    Returns ``None`` when ``z`` lies in no ``V_k``.  Patches are tried in order
    of distance from ``z``; the root in ``tau`` is found by Newton's method
    safeguarded by the bracket ``[0, sigma/2]``.
    """
    z = np.asarray(z, dtype=complex)
    rz = float(domain.r(z))
    tol = domain.boundary_tol
    if rz > tol:
        raise PointOutsideDomain(f"r(z) = {rz:.3g} > 0")
    zz = float(hermitian(z, z).real)
    if zz == 0:
        return None
    tau_max = cover.sigma / 2
    order = np.argsort(np.linalg.norm(cover.centers - z, axis=1))
    for k in order:
        m = complex(hermitian(cover.center_normals[k], z)) / zz
        step = -m * z  # d/dtau of (1 - tau m) z

        def phi(tau):
            return float(domain.r((1 - tau * m) * z))

        def dphi(tau):
            return float(np.real(hermitian(step, domain.grad((1 - tau * m) * z))))

        iterations = 0
        if abs(rz) <= tol:
            tau = 0.0
        else:
            if phi(tau_max) <= 0:
                continue
            lo, hi = 0.0, tau_max
            tau = 0.0
            f = rz
            converged = False
            for iterations in range(1, NEWTON_MAX_ITER + 1):
                df = dphi(tau)
                cand = tau - f / df if df > 0 else -1.0
                if not lo < cand < hi:
                    cand = 0.5 * (lo + hi)
                tau = cand
                f = phi(tau)
                if f < 0:
                    lo = tau
                else:
                    hi = tau
                if abs(f) <= 1e-14 * max(1.0, domain.scale) or hi - lo <= 1e-16:
                    converged = True
                    break
            if not converged:
                raise NewtonDivergence(f"collar inversion did not converge in patch {k}")
        w = (1 - tau * m) * z
        if not cover.patch_contains(k, w):
            continue
        back = w + tau * project_onto_line(cover.center_normals[k], w)
        residual = float(np.linalg.norm(back - z))
        if residual > 1e-8 * domain.diameter:
            raise NewtonDivergence(f"round trip residual {residual:.3g} in patch {k}")
        return Correspondence(
            z=z.copy(), w=w, w_k=cover.centers[k].copy(), patch=int(k), s=1.0 - tau,
            residual=residual, iterations=iterations,
        )
    return None


@dataclass(frozen=True)
class Lemma1Report:
    rows: np.ndarray  # structured: patch_id, s, t_abs, margin, inside
    violations: int
    worst_margin: float
    bin_edges: np.ndarray  # log10 of (1 - s) / sigma
    bin_mean_margin: np.ndarray
    bin_min_margin: np.ndarray

    @property
    def monotone(self) -> bool:
        """Mean margin shrinks as ``s -> 1`` (bins run from shallow to deep)."""
        m = self.bin_mean_margin[np.isfinite(self.bin_mean_margin)]
        return bool(np.all(np.diff(m) > 0))

    def to_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["patch_id", "s", "t_abs", "margin", "inside"])
            for row in self.rows:
                writer.writerow(
                    [int(row["patch_id"]), repr(float(row["s"])), repr(float(row["t_abs"])),
                     repr(float(row["margin"])), int(row["inside"])]
                )


def verify_lemma1(
    domain: Domain,
    cover: CollarCover,
    sample_count: int = 10_000,
    *,
    epsilon: float | None = None,
    bins: int = 8,
    seed: int = 1,
    boundary_points: np.ndarray | None = None,
) -> Lemma1Report:
    """Sample ``(z, s, t, e)`` and test ``z + (1 - s) pi_z(n_{w_i}) + t e`` in ``Omega``.

    ``z`` ranges over boundary points inside patch ``W_i``, ``1 - s`` is drawn
    log-uniformly from ``sigma * [1e-8, 1]`` (so the limit ``s -> 1`` is
    populated), ``|t| < (1 - s)^(1 / (1 + eps/2))`` and ``e`` is a random
    complex unit tangent vector at ``z``.
    """
    eps = domain.holder_epsilon if epsilon is None else epsilon
    rng = np.random.default_rng(seed)
    pts = cover.boundary if boundary_points is None else np.asarray(boundary_points, dtype=complex)
    owner = cover.covering_patch(pts)
    patches = [k for k in range(cover.size) if np.any(owner == k)]
    per = np.array_split(np.arange(sample_count), len(patches))
    records = []
    for k, chunk in zip(patches, per):
        if len(chunk) == 0:
            continue
        local = pts[owner == k]
        draws = _draws(rng, len(chunk), domain.n)
        margins, _, tau, t_abs = _lemma1_margins(domain, local, cover.center_normals[k], cover.sigma, eps, draws)
        for tau_i, t_i, m_i in zip(tau, t_abs, margins):
            records.append((k, 1.0 - tau_i, t_i, m_i, m_i > 0))
    dtype = [("patch_id", int), ("s", float), ("t_abs", float), ("margin", float), ("inside", bool)]
    rows = np.array(records, dtype=dtype)
    logdepth = np.log10(np.maximum(1.0 - rows["s"], 1e-300) / cover.sigma)
    edges = np.linspace(-TAU_DECADES, 0.0, bins + 1)
    which = np.clip(np.digitize(logdepth, edges) - 1, 0, bins - 1)
    mean = np.full(bins, np.nan)
    low = np.full(bins, np.nan)
    for b in range(bins):
        sel = rows["margin"][which == b]
        if len(sel):
            mean[b] = sel.mean()
            low[b] = sel.min()
    return Lemma1Report(
        rows=rows,
        violations=int(np.sum(~rows["inside"])),
        worst_margin=float(rows["margin"].min()),
        bin_edges=edges,
        bin_mean_margin=mean,
        bin_min_margin=low,
    )
