"""Bounded domains in C^n given by a real defining function, plus the catalog.

Points are complex arrays of shape ``(n,)`` or ``(..., n)``.  The gradient of
the defining function ``r`` is reported in complex form

    grad r = dr/dx_j + i dr/dy_j,

so that ``r(z + dz) ~ r(z) + Re <dz, grad r>`` with the Hermitian product
``<a, b> = sum a_j conj(b_j)``.  The complex partials are
``dr/dz_j = conj(grad_j) / 2``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from .errors import GleasonError

__all__ = ["Domain", "make_domain", "load_domain", "CATALOG_KINDS", "grange_h"]

CATALOG_KINDS = ("ball", "ellipsoid", "grange", "annulus_product", "custom_polynomial_r")


@dataclass(frozen=True, eq=False)
class Domain:
    """``Omega = {r < 0}`` with a nonvanishing gradient on the boundary.

    ``box`` has shape ``(n, 2, 2)``: ``box[j, 0]`` bounds ``Re z_j`` and
    ``box[j, 1]`` bounds ``Im z_j``.
    """

    name: str
    n: int
    defining_function: Callable[[np.ndarray], np.ndarray]
    box: np.ndarray
    seed: np.ndarray
    holder_epsilon: float = 1.0
    gradient_function: Callable[[np.ndarray], np.ndarray] | None = None
    kind: str = "custom"
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if not 0 < self.holder_epsilon <= 1:
            raise ValueError(f"holder_epsilon must lie in (0, 1], got {self.holder_epsilon}")
        object.__setattr__(self, "box", np.asarray(self.box, dtype=float).reshape(self.n, 2, 2))
        object.__setattr__(self, "seed", np.asarray(self.seed, dtype=complex).reshape(self.n))

    # -- evaluation -------------------------------------------------------
    def r(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return np.asarray(self.defining_function(z), dtype=float)

    def grad(self, z) -> np.ndarray:
        """Complex form of the real gradient, same shape as ``z``."""
        z = np.asarray(z, dtype=complex)
        if self.gradient_function is not None:
            return np.asarray(self.gradient_function(z), dtype=complex)
        h = 1e-6 * self.diameter
        out = np.zeros(z.shape, dtype=complex)
        for j in range(self.n):
            step = np.zeros(self.n, dtype=complex)
            step[j] = h
            dx = (self.r(z + step) - self.r(z - step)) / (2 * h)
            step[j] = 1j * h
            dy = (self.r(z + step) - self.r(z - step)) / (2 * h)
            out[..., j] = dx + 1j * dy
        return out

    def dr_dz(self, z) -> np.ndarray:
        """Complex partials ``dr/dz_j``."""
        return np.conj(self.grad(z)) / 2

    def contains(self, z) -> np.ndarray:
        return self.r(z) < 0

    # -- scales -----------------------------------------------------------
    @property
    def corners(self) -> np.ndarray:
        lo, hi = self.box[..., 0], self.box[..., 1]
        pts = []
        for bits in np.ndindex(*(2,) * (2 * self.n)):
            b = np.array(bits).reshape(self.n, 2)
            part = np.where(b == 0, lo, hi)
            pts.append(part[:, 0] + 1j * part[:, 1])
        return np.array(pts)

    @cached_property
    def diameter(self) -> float:
        widths = self.box[..., 1] - self.box[..., 0]
        return float(np.sqrt((widths**2).sum()))

    @cached_property
    def scale(self) -> float:
        """``max |r|`` over a coarse sample of the bounding box."""
        return float(np.max(np.abs(self.r(self.box_sample(np.random.default_rng(0), 512)))))

    @property
    def boundary_tol(self) -> float:
        return 1e-8 * self.scale

    def box_sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        lo, hi = self.box[..., 0], self.box[..., 1]
        u = rng.uniform(size=(count, self.n, 2))
        part = lo + u * (hi - lo)
        pts = part[..., 0] + 1j * part[..., 1]
        return np.concatenate([pts, self.corners[: min(len(self.corners), count)]])

    def interior_sample(self, rng: np.random.Generator, count: int, max_rounds: int = 200) -> np.ndarray:
        """Rejection sample of ``count`` points of ``Omega``, uniform in volume."""
        found = []
        total = 0
        for _ in range(max_rounds):
            cand = self.box_sample(rng, 4 * count)[: 4 * count]
            keep = cand[self.r(cand) < 0]
            found.append(keep)
            total += len(keep)
            if total >= count:
                break
        pts = np.concatenate(found)
        if len(pts) < count:
            raise GleasonError(f"could only sample {len(pts)} interior points of {self.name}")
        return pts[:count]

    # -- boundary ---------------------------------------------------------
    def project_to_boundary(self, z, iterations: int = 40) -> np.ndarray:
        """Newton iteration ``w <- w - r(w) grad / |grad|^2`` (foot of the gradient line)."""
        w = np.array(z, dtype=complex, copy=True)
        for _ in range(iterations):
            g = self.grad(w)
            g2 = np.sum(np.abs(g) ** 2, axis=-1)
            rv = self.r(w)
            safe = g2 > 1e-300
            step = np.where(safe, rv / np.where(safe, g2, 1.0), 0.0)
            w = w - step[..., None] * g
            if np.all(np.abs(rv) <= 1e-15 * max(1.0, self.scale)):
                break
        return w

    def ray_crossings(self, origins, directions, samples: int = 96, bisections: int = 64) -> np.ndarray:
        """All sign changes of ``r`` along rays ``origin + t * direction`` inside the box.

        Each ray is scanned at ``samples`` points up to ``diameter`` and every
        bracketed crossing is refined by bisection.
        """
        origins = np.atleast_2d(np.asarray(origins, dtype=complex))
        directions = np.atleast_2d(np.asarray(directions, dtype=complex))
        origins, directions = np.broadcast_arrays(origins, directions)
        t = np.linspace(0.0, self.diameter, samples)
        pts = origins[:, None, :] + t[None, :, None] * directions[:, None, :]
        vals = self.r(pts)
        change = np.signbit(vals[:, :-1]) != np.signbit(vals[:, 1:])
        ray_idx, seg_idx = np.nonzero(change)
        if len(ray_idx) == 0:
            return np.zeros((0, self.n), dtype=complex)
        lo = t[seg_idx].copy()
        hi = t[seg_idx + 1].copy()
        o = origins[ray_idx]
        d = directions[ray_idx]
        sign_lo = np.signbit(vals[ray_idx, seg_idx])
        for _ in range(bisections):
            mid = 0.5 * (lo + hi)
            m_sign = np.signbit(self.r(o + mid[:, None] * d))
            same = m_sign == sign_lo
            lo = np.where(same, mid, lo)
            hi = np.where(same, hi, mid)
        return o + (0.5 * (lo + hi))[:, None] * d

    def axis_boundary_points(self) -> np.ndarray:
        """Boundary crossings along the +-1, +-i coordinate directions from the seed."""
        dirs = []
        for j in range(self.n):
            for unit in (1, -1, 1j, -1j):
                v = np.zeros(self.n, dtype=complex)
                v[j] = unit
                dirs.append(v)
        dirs = np.array(dirs)
        pts = []
        for d in dirs:
            hits = self.ray_crossings(self.seed, d)
            if len(hits):
                pts.append(hits[0])
        return np.array(pts).reshape(-1, self.n)

    def boundary_sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Roughly ``count`` boundary points: axis crossings first, then random rays.

        Rays start at the seed and at random interior points so that parts of
        the boundary hidden from the seed (holes) are also reached.
        """
        pts = [self.axis_boundary_points()]
        have = len(pts[0])
        starts = np.concatenate([self.seed[None], self.interior_sample(rng, 16)])
        while have < count:
            batch = max(count - have, 16)
            dirs = rng.normal(size=(batch, self.n)) + 1j * rng.normal(size=(batch, self.n))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            orig = starts[rng.integers(0, len(starts), batch)]
            orig[: batch // 2] = self.seed
            hits = self.ray_crossings(orig, dirs)
            pts.append(hits)
            have += len(hits)
        out = np.concatenate(pts)
        head = len(pts[0])
        return np.concatenate([out[:head], out[head:count]]) if count > head else out

    def distance_estimate(self, z) -> np.ndarray:
        """Distance to the boundary via the gradient-line foot point (``inf`` if it stalls)."""
        z = np.asarray(z, dtype=complex)
        foot = self.project_to_boundary(z)
        dist = np.linalg.norm(z - foot, axis=-1)
        # stalled iterations (critical points of r) give no estimate
        return np.where(np.abs(self.r(foot)) <= self.boundary_tol, dist, np.inf)

    def to_json_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "params": dict(self.params), "epsilon": self.holder_epsilon}


# -- catalog -----------------------------------------------------------------

def grange_h(x):
    """``h(x) = -x / log x`` for ``0 < x < 1`` and ``h(0) = 0``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(x > 0, -x / np.log(np.where(x > 0, x, 0.5)), 0.0)
    return out


def _grange_dh(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.log(np.where(x > 0, x, 0.5))
        out = np.where(x > 0, -1.0 / lg + 1.0 / lg**2, 0.0)
    return out


def _ball(params) -> dict:
    n = int(params.get("n", 2))
    radius = float(params.get("radius", 1.0))
    center = np.asarray(_decode_complex_list(params.get("center", [0.0] * n)), dtype=complex)

    def r(z):
        return np.sum(np.abs(z - center) ** 2, axis=-1) - radius**2

    def grad(z):
        return 2 * (z - center)

    box = [[[c.real - radius * 1.05, c.real + radius * 1.05], [c.imag - radius * 1.05, c.imag + radius * 1.05]] for c in center]
    return dict(n=n, defining_function=r, gradient_function=grad, box=box, seed=center)


def _ellipsoid(params) -> dict:
    weights = np.asarray(params.get("weights", [1.0, 4.0]), dtype=float)
    n = len(weights)

    def r(z):
        return np.sum(weights * np.abs(z) ** 2, axis=-1) - 1.0

    def grad(z):
        return 2 * weights * z

    half = 1.05 / np.sqrt(weights)
    box = [[[-h, h], [-h, h]] for h in half]
    return dict(n=n, defining_function=r, gradient_function=grad, box=box, seed=np.zeros(n))


def _grange(params) -> dict:
    # h(x) = 1 at x = e^{-W(1)}; beyond the cap the value is frozen, which
    # keeps r finite and positive outside the domain.
    cap = float(params.get("cap", 0.9))

    def r(z):
        rho = np.minimum(np.abs(z[..., 1]), cap)
        return np.abs(z[..., 0]) ** 2 + grange_h(rho) - 1.0

    def grad(z):
        out = np.zeros(z.shape, dtype=complex)
        out[..., 0] = 2 * z[..., 0]
        rho = np.abs(z[..., 1])
        with np.errstate(divide="ignore", invalid="ignore"):
            unit = np.where(rho > 0, z[..., 1] / np.where(rho > 0, rho, 1.0), 0.0)
        out[..., 1] = np.where(rho < cap, _grange_dh(rho), 0.0) * unit
        return out

    x0 = 0.5671432904097838  # solves -x / log x = 1
    box = [[[-1.05, 1.05], [-1.05, 1.05]], [[-x0 * 1.05, x0 * 1.05], [-x0 * 1.05, x0 * 1.05]]]
    return dict(n=2, defining_function=r, gradient_function=grad, box=box, seed=np.zeros(2))


def _annulus_product(params) -> dict:
    inner = float(params.get("inner", 0.5))
    outer = float(params.get("outer", 1.0))
    c = params.get("center", 0.0)
    center = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
    n = int(params.get("n", 2))
    width = (outer - inner) / 2

    def parts(z):
        rho = np.abs(z[..., 0] - center)
        r1 = (rho - inner) * (rho - outer) / width
        others = np.abs(z[..., 1:]) ** 2 - 1.0
        return rho, r1, others

    def r(z):
        _, r1, others = parts(z)
        return np.maximum(r1, others.max(axis=-1))

    def grad(z):
        rho, r1, others = parts(z)
        out = np.zeros(z.shape, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            unit = np.where(rho > 0, (z[..., 0] - center) / np.where(rho > 0, rho, 1.0), 0.0)
        g1 = (2 * rho - inner - outer) / width * unit
        k = others.argmax(axis=-1)
        first = r1 >= others.max(axis=-1)
        out[..., 0] = np.where(first, g1, 0.0)
        for j in range(1, n):
            out[..., j] = np.where(~first & (k == j - 1), 2 * z[..., j], 0.0)
        return out

    box = [[[center.real - outer * 1.05, center.real + outer * 1.05], [center.imag - outer * 1.05, center.imag + outer * 1.05]]]
    box += [[[-1.05, 1.05], [-1.05, 1.05]] for _ in range(n - 1)]
    seed = np.zeros(n, dtype=complex)
    seed[0] = center + (inner + outer) / 2
    return dict(n=n, defining_function=r, gradient_function=grad, box=box, seed=seed)


def _custom_polynomial_r(params) -> dict:
    """``r(z) = Re sum c * z^alpha * conj(z)^beta``; gradient by finite differences."""
    terms = params["terms"]
    n = int(params.get("n", len(terms[0]["alpha"])))
    alphas = np.array([t["alpha"] for t in terms], dtype=int)
    betas = np.array([t.get("beta", [0] * n) for t in terms], dtype=int)
    coeffs = np.array([complex(t.get("re", 0.0), t.get("im", 0.0)) for t in terms])

    def r(z):
        z = np.asarray(z, dtype=complex)
        mono = np.ones(z.shape[:-1] + (len(coeffs),), dtype=complex)
        for j in range(n):
            zj = z[..., j : j + 1]
            mono = mono * zj ** alphas[:, j] * np.conj(zj) ** betas[:, j]
        return np.real(mono @ coeffs)

    return dict(n=n, defining_function=r, gradient_function=None, box=params.get("box", [[[-2.0, 2.0], [-2.0, 2.0]]] * n),
                seed=params.get("seed", [0.0] * n))


_BUILDERS = {
    "ball": _ball,
    "ellipsoid": _ellipsoid,
    "grange": _grange,
    "annulus_product": _annulus_product,
    "custom_polynomial_r": _custom_polynomial_r,
}


def _decode_complex_list(value):
    if isinstance(value, list) and value and isinstance(value[0], list):
        return [complex(a, b) for a, b in value]
    return value


def make_domain(kind: str, params: Mapping | None = None, epsilon: float = 1.0, name: str | None = None) -> Domain:
    """Build a catalog domain.

    ``ball``: ``{n, radius, center}``; ``ellipsoid``: ``{weights}`` for
    ``sum w_j |z_j|^2 < 1``; ``grange``: ``{|z1|^2 + h(|z2|) < 1}``;
    ``annulus_product``: ``{inner < |z1 - center| < outer} x {|z_j| < 1}``;
    ``custom_polynomial_r``: ``{terms, n, box, seed}`` (box defaults to ``[-2, 2]``
    per real coordinate, seed to 0).
    """
    if kind not in _BUILDERS:
        raise ValueError(f"unknown domain kind {kind!r}; expected one of {CATALOG_KINDS}")
    params = dict(params or {})
    spec = _BUILDERS[kind](params)
    return Domain(name=name or kind, kind=kind, params=params, holder_epsilon=float(epsilon), **spec)


def load_domain(source) -> Domain:
    """Load ``{name, kind, params, epsilon}`` from a JSON path, string or mapping."""
    if isinstance(source, Mapping):
        data = source
    else:
        text = str(source)
        path = Path(text)
        data = json.loads(path.read_text()) if not text.lstrip().startswith("{") and path.exists() else json.loads(text)
    for key in ("kind",):
        if key not in data:
            raise ValueError(f"domain spec is missing field {key!r}")
    return make_domain(data["kind"], data.get("params", {}), float(data.get("epsilon", 1.0)), data.get("name"))
