"""Curves ``gamma_z`` from 0 to 1 in the lam-plane of the line through 0 and z.

Interior points get a polyline whose image ``gamma(s) z`` keeps distance at
least ``A`` from the boundary.  Collar points get a polyline ``gamma^1`` to
``1 + (sigma/2) mu_z`` followed by the exact segment
``gamma^2(s) = 1 + (1 - s) mu_z`` on ``[1 - sigma/2, 1]``, whose image walks
``z + (1 - s) pi_w(n_{w_k})``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .collar import CollarCover, Correspondence, collar_membership
from .domains import Domain
from .errors import NoSafePath, NotCollinear, PointOutsideDomain, ZeroDirection
from .geometry import hermitian, inner_normal, project_onto_line

__all__ = ["PathPlan", "mu", "plan_path", "validate_path", "PathValidation"]

CLEARANCE_RTOL = 1e-9


def mu(z, w, w_k, domain: Domain, tol: float = 1e-8) -> complex:
    """The scalar ``mu_z`` with ``mu_z z = pi_w(n_{w_k})``."""
    z = np.asarray(z, dtype=complex)
    proj = project_onto_line(inner_normal(domain, w_k, check_boundary=False), w)
    zz = hermitian(z, z).real
    if zz == 0:
        raise ZeroDirection("mu is undefined at z = 0")
    value = complex(hermitian(proj, z) / zz)
    residual = float(np.linalg.norm(value * z - proj))
    if residual > tol:
        raise NotCollinear(f"pi_w(n_wk) is not a multiple of z (residual {residual:.3g})")
    return value


@dataclass(frozen=True, eq=False)
class PathPlan:
    z: np.ndarray
    kind: str  # "interior" or "collar"
    nodes: np.ndarray  # gamma^1 polyline, nodes[0] = 0
    clearance: float  # min over gamma^1 of d(gamma(s) z, boundary)
    clearance_collar: float  # min over gamma^2 (nan for interior plans)
    mu_z: complex | None = None
    sigma: float = 0.0
    correspondence: Correspondence | None = field(default=None, repr=False)

    @property
    def split(self) -> float:
        """Parameter where gamma^1 ends (1 for interior plans)."""
        return 1.0 - self.sigma / 2 if self.kind == "collar" else 1.0

    @property
    def lengths(self) -> np.ndarray:
        return np.abs(np.diff(self.nodes))

    @property
    def length(self) -> float:
        extra = abs(self.mu_z) * self.sigma / 2 if self.kind == "collar" else 0.0
        return float(self.lengths.sum() + extra)

    @property
    def deriv_bound(self) -> float:
        """``max |gamma'(s)|`` for the arc-length parametrization of each part."""
        speed1 = self.lengths.sum() / self.split
        if self.kind == "collar":
            return float(max(speed1, abs(self.mu_z)))
        return float(speed1)

    @property
    def endpoint(self) -> complex:
        return complex(self.nodes[-1])

    def gamma(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        out = np.empty(s.shape, dtype=complex)
        first = s <= self.split
        cum = np.concatenate([[0.0], np.cumsum(self.lengths)])
        total = cum[-1]
        arc = np.clip(s[first] / self.split, 0.0, 1.0) * total
        seg = np.clip(np.searchsorted(cum, arc, side="right") - 1, 0, len(self.nodes) - 2)
        frac = np.where(self.lengths[seg] > 0, (arc - cum[seg]) / np.where(self.lengths[seg] > 0, self.lengths[seg], 1), 0)
        out[first] = self.nodes[seg] + frac * (self.nodes[seg + 1] - self.nodes[seg])
        if self.kind == "collar":
            out[~first] = 1.0 + (1.0 - s[~first]) * self.mu_z
        return out

    def derivative(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        out = np.empty(s.shape, dtype=complex)
        first = s <= self.split
        cum = np.concatenate([[0.0], np.cumsum(self.lengths)])
        arc = np.clip(s[first] / self.split, 0.0, 1.0) * cum[-1]
        seg = np.clip(np.searchsorted(cum, arc, side="right") - 1, 0, len(self.nodes) - 2)
        unit = np.diff(self.nodes) / np.where(self.lengths > 0, self.lengths, 1)
        out[first] = unit[seg] * cum[-1] / self.split
        if self.kind == "collar":
            out[~first] = -self.mu_z
        return out

    def segments(self) -> list:
        """``(lam_start, lam_end, part)`` pieces in order from 0 to 1."""
        pieces = [(complex(a), complex(b), 1) for a, b in zip(self.nodes[:-1], self.nodes[1:]) if a != b]
        if self.kind == "collar":
            pieces.append((self.endpoint, 1.0 + 0j, 2))
        return pieces

    def to_json_dict(self) -> dict:
        return {
            "z": [[float(c.real), float(c.imag)] for c in self.z],
            "kind": self.kind,
            "nodes": [[float(c.real), float(c.imag)] for c in self.nodes],
            "mu_z": None if self.mu_z is None else [self.mu_z.real, self.mu_z.imag],
            "sigma": self.sigma,
            "clearance": self.clearance,
            "deriv_bound": self.deriv_bound,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict())


# -- safe-set search ----------------------------------------------------------

class _SafeSet:
    """Membership in ``{lam : lam z in Omega, d(lam z, bd) >= A}``."""

    def __init__(self, domain: Domain, cover: CollarCover, z: np.ndarray, threshold: float):
        self.domain = domain
        self.cover = cover
        self.z = z
        self.threshold = threshold * (1 - CLEARANCE_RTOL)

    def clearance(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=complex)
        pts = lam[..., None] * self.z
        d = self.cover.distance_to_boundary(self.domain, pts)
        return np.where(self.domain.r(pts) < 0, d, -np.inf)

    def segment_ok(self, a: complex, b: complex, step: float) -> bool:
        count = max(16, int(np.ceil(abs(b - a) / step)) + 1)
        lam = a + np.linspace(0.0, 1.0, count) * (b - a)
        return bool(np.all(self.clearance(lam) >= self.threshold))

    def polyline_clearance(self, nodes: np.ndarray, step: float) -> float:
        vals = []
        for a, b in zip(nodes[:-1], nodes[1:]):
            count = max(16, int(np.ceil(abs(b - a) / step)) + 1)
            vals.append(self.clearance(a + np.linspace(0.0, 1.0, count) * (b - a)).min())
        return float(min(vals))


def _raster_route(safe: _SafeSet, end: complex, resolution: int, extent: float) -> np.ndarray:
    """Shortest 8-connected route over safe grid nodes, then string-pulled."""
    half = resolution // 2
    h = extent / half
    idx = np.arange(-half, half + 1)
    lam = h * (idx[None, :] + 1j * idx[:, None])
    ok = safe.clearance(lam) >= safe.threshold
    m = len(idx)
    ids = np.arange(m * m).reshape(m, m)
    src = ids[half, half]
    if not ok[half, half]:
        raise NoSafePath("origin is not in the safe set")
    rows, cols, wts = [], [], []
    for di, dj in ((0, 1), (1, 0), (1, 1), (1, -1)):
        i0 = np.arange(max(0, -di), m - max(0, di))
        j0 = np.arange(max(0, -dj), m - max(0, dj))
        ii, jj = np.meshgrid(i0, j0, indexing="ij")
        both = ok[ii, jj] & ok[ii + di, jj + dj]
        rows.append(ids[ii, jj][both])
        cols.append(ids[ii + di, jj + dj][both])
        wts.append(np.full(both.sum(), h * np.hypot(di, dj)))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    wts = np.concatenate(wts)
    graph = coo_matrix((np.concatenate([wts, wts]), (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
                       shape=(m * m, m * m)).tocsr()
    dist, pred = dijkstra(graph, indices=src, return_predecessors=True)
    flat = lam.ravel()
    order = np.argsort(np.abs(flat - end), kind="stable")
    target = None
    for cand in order[:64]:
        if np.isfinite(dist[cand]) and safe.segment_ok(flat[cand], end, h / 4):
            target = cand
            break
    if target is None:
        raise NoSafePath("the safe set does not connect 0 to the endpoint at this resolution")
    route = [target]
    while route[-1] != src:
        route.append(pred[route[-1]])
    nodes = np.concatenate([flat[np.array(route[::-1])], [end]])
    nodes[0] = 0.0
    # string pulling: jump to the farthest node reachable by a safe segment
    pulled = [nodes[0]]
    i = 0
    while i < len(nodes) - 1:
        j = len(nodes) - 1
        while j > i + 1 and not safe.segment_ok(nodes[i], nodes[j], h / 4):
            j -= 1
        pulled.append(nodes[j])
        i = j
    return np.array(pulled)


def _lam_extent(domain: Domain, z: np.ndarray) -> float:
    radius = np.max(np.abs(domain.corners), axis=0)
    lim = radius[np.abs(z) > 0] / np.abs(z[np.abs(z) > 0])
    return float(np.min(lim))


def plan_path(
    domain: Domain,
    cover: CollarCover,
    z,
    *,
    resolution: int = 128,
    waypoints=None,
    correspondence: Correspondence | None = None,
    force_raster: bool = False,
) -> PathPlan:
    """Plan ``gamma_z``; the straight route is used whenever it is safe.

    ``waypoints`` (lam values) forces a polyline ``0 -> waypoints -> end``;
    it must itself be safe.  ``force_raster`` skips the straight-route attempt.
    """
    z = np.asarray(z, dtype=complex)
    if np.linalg.norm(z) == 0:
        raise ZeroDirection("plan_path needs z != 0")
    if domain.r(z) > domain.boundary_tol:
        raise PointOutsideDomain(f"r(z) = {float(domain.r(z)):.3g}")
    corr = correspondence if correspondence is not None else collar_membership(cover, domain, z)
    if corr is None:
        kind, mu_z, end = "interior", None, 1.0 + 0j
    else:
        kind = "collar"
        mu_z = mu(z, corr.w, corr.w_k, domain)
        end = 1.0 + (cover.sigma / 2) * mu_z
    safe = _SafeSet(domain, cover, z, cover.clearance)
    extent = _lam_extent(domain, z)
    step = extent / max(resolution, 16) / 4
    if waypoints is not None:
        nodes = np.concatenate([[0j], np.asarray(waypoints, dtype=complex), [end]])
        if not all(safe.segment_ok(a, b, step) for a, b in zip(nodes[:-1], nodes[1:])):
            raise NoSafePath("requested waypoints leave the safe set")
    elif not force_raster and safe.segment_ok(0j, end, step):
        nodes = np.array([0j, end])
    else:
        nodes = _raster_route(safe, end, resolution, extent)
    clearance = safe.polyline_clearance(nodes, step)
    clearance2 = float("nan")
    if kind == "collar":
        taus = np.linspace(0.0, cover.sigma / 2, 33)
        clearance2 = float(safe.clearance(1.0 + taus * mu_z).min())
    return PathPlan(z=z.copy(), kind=kind, nodes=nodes, clearance=clearance, clearance_collar=clearance2,
                    mu_z=mu_z, sigma=cover.sigma if kind == "collar" else 0.0, correspondence=corr)


# -- validation ---------------------------------------------------------------

@dataclass(frozen=True)
class PathValidation:
    endpoints_ok: bool
    inside_ok: bool
    clearance_ok: bool
    loop_free: bool
    deriv_bound: float
    collar_formula_error: float
    continuity_deviation: float | None
    continuity_ratio: float | None

    @property
    def passed(self) -> bool:
        return self.endpoints_ok and self.inside_ok and self.clearance_ok and self.loop_free


def _segments_cross(p1, p2, q1, q2) -> bool:
    def cross(u, v):
        return u.real * v.imag - u.imag * v.real

    d1 = cross(q2 - q1, p1 - q1)
    d2 = cross(q2 - q1, p2 - q1)
    d3 = cross(p2 - p1, q1 - p1)
    d4 = cross(p2 - p1, q2 - p1)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def _loop_free(nodes: np.ndarray, tol: float = 1e-12) -> bool:
    pts = list(nodes)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if abs(pts[i] - pts[j]) < tol:
                return False
    segs = list(zip(pts[:-1], pts[1:]))
    for i in range(len(segs)):
        for j in range(i + 2, len(segs)):
            if _segments_cross(*segs[i], *segs[j]):
                return False
    return True


def validate_path(domain: Domain, cover: CollarCover, plan: PathPlan, *, samples: int = 2001,
                  eta=None) -> PathValidation:
    """Sampled checks of a plan; optionally replans at ``z + eta`` for continuity."""
    s = np.linspace(0.0, 1.0, samples)
    g = plan.gamma(s)
    pts = g[:, None] * plan.z
    endpoints_ok = abs(g[0]) < 1e-12 and abs(g[-1] - 1) < 1e-12
    inside_ok = bool(np.all(domain.r(pts[:-1]) < 0) and domain.r(pts[-1]) <= domain.boundary_tol)
    first = s <= plan.split
    d = cover.distance_to_boundary(domain, pts[first])
    clearance_ok = bool(d.min() >= cover.clearance * (1 - 1e-6)) and inside_ok
    loop_nodes = plan.nodes if plan.kind == "interior" else np.concatenate([plan.nodes, [1.0]])
    loop_free = _loop_free(loop_nodes)
    collar_err = 0.0
    if plan.kind == "collar":
        corr = plan.correspondence
        proj = project_onto_line(inner_normal(domain, corr.w_k, check_boundary=False), corr.w)
        tail = ~first
        expect = plan.z + (1 - s[tail])[:, None] * proj
        collar_err = float(np.max(np.linalg.norm(pts[tail] - expect, axis=1))) if tail.any() else 0.0
    deviation = ratio = None
    if eta is not None:
        other = plan_path(domain, cover, plan.z + np.asarray(eta, dtype=complex))
        deviation = float(np.max(np.abs(other.gamma(s) - g)))
        ratio = deviation / float(np.linalg.norm(eta))
    return PathValidation(
        endpoints_ok=bool(endpoints_ok), inside_ok=inside_ok, clearance_ok=clearance_ok,
        loop_free=loop_free, deriv_bound=plan.deriv_bound, collar_formula_error=collar_err,
        continuity_deviation=deviation, continuity_ratio=ratio,
    )
