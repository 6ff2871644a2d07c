"""Numerical certificate for C-convexity: slice topology and transversality.

A complex line ``{a + lam b}`` is rasterized over the ``lam``-plane.  Inside
pixels are labelled with 4-connectivity; the complement is labelled with
8-connectivity, the dual digital topology, so that a diagonal pinch of the
inside set is not mistaken for a hole.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage, optimize

from .domains import Domain
from .errors import DegenerateDirection, NoCrossing

__all__ = [
    "SliceRegion",
    "slice_domain",
    "is_connected",
    "is_simply_connected",
    "slice_topology",
    "TransversalityReport",
    "check_transversality",
    "CConvexCertificate",
    "check_cconvex",
]

FOUR = ndimage.generate_binary_structure(2, 1)
EIGHT = ndimage.generate_binary_structure(2, 2)
MIN_COMPONENT_PIXELS = 4


@dataclass(frozen=True, eq=False)
class SliceRegion:
    a: np.ndarray
    b: np.ndarray
    re: np.ndarray  # (m,) grid abscissae of lam
    im: np.ndarray  # (m,) grid ordinates of lam
    values: np.ndarray = field(repr=False)  # r(a + lam b) on the grid, shape (m, m) indexed [im, re]

    @property
    def mask(self) -> np.ndarray:
        return self.values < 0

    @property
    def lam(self) -> np.ndarray:
        return self.re[None, :] + 1j * self.im[:, None]

    @property
    def resolution(self) -> int:
        return len(self.re)

    @property
    def empty(self) -> bool:
        return not self.mask.any()


def _lambda_rectangle(domain: Domain, a: np.ndarray, b: np.ndarray):
    """Bounding rectangle of ``{lam : a + lam b in box}``."""
    j = int(np.argmax(np.abs(b)))
    lo, hi = domain.box[j, :, 0], domain.box[j, :, 1]
    corners = np.array([complex(x, y) for x in (lo[0], hi[0]) for y in (lo[1], hi[1])])
    lam = (corners - a[j]) / b[j]
    return lam.real.min(), lam.real.max(), lam.imag.min(), lam.imag.max()


def slice_domain(domain: Domain, a, b, resolution: int = 256) -> SliceRegion:
    """Raster of ``Omega cap {a + lam b}`` on a ``resolution x resolution`` grid."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if abs(np.linalg.norm(b) - 1.0) > 1e-10:
        raise DegenerateDirection(f"|b| = {np.linalg.norm(b):.12g}, expected 1")
    if resolution < 64:
        raise ValueError("resolution must be at least 64")
    x0, x1, y0, y1 = _lambda_rectangle(domain, a, b)
    # one padding cell keeps the frame outside the domain
    hx = (x1 - x0) / (resolution - 3)
    hy = (y1 - y0) / (resolution - 3)
    re = np.linspace(x0 - hx, x1 + hx, resolution)
    im = np.linspace(y0 - hy, y1 + hy, resolution)
    lam = re[None, :] + 1j * im[:, None]
    values = domain.r(a + lam[..., None] * b)
    return SliceRegion(a=a, b=b, re=re, im=im, values=values)


def slice_topology(region: SliceRegion) -> dict:
    """Connectedness, simple connectedness and raster-quality flags of a slice.

    The empty slice counts as connected and simply connected and is flagged.
    """
    mask = region.mask
    if not mask.any():
        return {"connected": True, "simply_connected": True, "empty": True, "warning": False,
                "components": 0, "holes": 0}
    labels, count = ndimage.label(mask, structure=FOUR)
    sizes = np.bincount(labels.ravel())[1:]
    out_labels, out_count = ndimage.label(~mask, structure=EIGHT)
    frame = np.concatenate([out_labels[0], out_labels[-1], out_labels[:, 0], out_labels[:, -1]])
    touching = set(np.unique(frame[frame > 0]).tolist())
    bounded = [k for k in range(1, out_count + 1) if k not in touching]
    out_sizes = np.bincount(out_labels.ravel())[1:]
    small = bool(np.any(sizes < MIN_COMPONENT_PIXELS)) or bool(
        any(out_sizes[k - 1] < MIN_COMPONENT_PIXELS for k in bounded)
    )
    return {
        "connected": count == 1,
        "simply_connected": len(touching) == 1 and not bounded,
        "empty": False,
        "warning": small,
        "components": int(count),
        "holes": len(bounded),
    }


def is_connected(region: SliceRegion) -> bool:
    return slice_topology(region)["connected"]


def is_simply_connected(region: SliceRegion) -> bool:
    return slice_topology(region)["simply_connected"]


@dataclass(frozen=True)
class TransversalityReport:
    crossings: int
    min_defect: float  # min |sum_j dr/dz_j(w) b_j| over boundary points of the slice
    min_relative_defect: float  # same, divided by |grad r(w)|
    witness_lam: complex
    transversal: bool


def _tangency_defect(domain: Domain, w: np.ndarray, b: np.ndarray):
    d = domain.dr_dz(w)
    defect = np.abs(d @ b)
    gnorm = np.linalg.norm(domain.grad(w), axis=-1)
    return defect, gnorm


def check_transversality(domain: Domain, a, b, resolution: int = 256,
                         region: SliceRegion | None = None) -> TransversalityReport:
    """Boundary points of the slice and their complex-tangency defect.

    Crossings are sign changes of ``r`` between adjacent raster nodes, refined
    by bisection.  A line that only touches the boundary (no sign change) is
    detected by minimizing ``r`` along the line from the lowest raster node.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    region = region if region is not None else slice_domain(domain, a, b, resolution)
    v = region.values
    lam = region.lam
    lo_list, hi_list = [], []
    for axis in (0, 1):
        s0 = [slice(None), slice(None)]
        s1 = [slice(None), slice(None)]
        s0[axis] = slice(0, -1)
        s1[axis] = slice(1, None)
        change = np.signbit(v[tuple(s0)]) != np.signbit(v[tuple(s1)])
        lo_list.append(lam[tuple(s0)][change])
        hi_list.append(lam[tuple(s1)][change])
    lo = np.concatenate(lo_list)
    hi = np.concatenate(hi_list)
    scale = max(domain.scale, 1e-300)
    if len(lo):
        neg_lo = domain.r(a + lo[:, None] * b) < 0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            neg_mid = domain.r(a + mid[:, None] * b) < 0
            move_lo = neg_mid == neg_lo
            lo = np.where(move_lo, mid, lo)
            hi = np.where(move_lo, hi, mid)
        points = 0.5 * (lo + hi)
    else:
        # tangential contact: r >= 0 on the line with a zero minimum
        if region.mask.all():
            raise NoCrossing("slice covers the whole raster")
        idx = np.unravel_index(np.argmin(v), v.shape)
        start = lam[idx]

        def f(x):
            return float(domain.r(a + complex(x[0], x[1]) * b))

        res = optimize.minimize(f, [start.real, start.imag], method="Nelder-Mead",
                                options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 4000})
        if abs(res.fun) > 1e-10 * scale:
            raise NoCrossing("line misses the closed domain")
        points = np.array([complex(res.x[0], res.x[1])])
    w = a + points[:, None] * b
    defect, gnorm = _tangency_defect(domain, w, b)
    rel = defect / np.maximum(gnorm, 1e-300)
    k = int(np.argmin(rel))
    return TransversalityReport(
        crossings=len(points),
        min_defect=float(defect.min()),
        min_relative_defect=float(rel[k]),
        witness_lam=complex(points[k]),
        transversal=bool(rel[k] > 1e-6),
    )


@dataclass
class CConvexCertificate:
    verdict: str  # PASS, FAIL or INCONCLUSIVE
    lines: list  # one dict per sampled line
    witness: dict | None
    counted: int  # nonempty slices entering the verdict
    resolution: int

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "witness": self.witness,
            "lines_sampled": len(self.lines),
            "lines_counted": self.counted,
            "resolution": self.resolution,
        }

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["line_id", "a", "b", "connected", "simply_connected", "min_defect"])
            for row in self.lines:
                writer.writerow([
                    row["line_id"], _fmt_vec(row["a"]), _fmt_vec(row["b"]),
                    int(row["connected"]), int(row["simply_connected"]),
                    "" if row["min_defect"] is None else repr(row["min_defect"]),
                ])

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True))


def _fmt_vec(v) -> str:
    return " ".join(f"{float(c.real)!r}{float(c.imag):+}j" for c in np.asarray(v, dtype=complex))


def _encode_vec(v) -> list:
    return [[float(c.real), float(c.imag)] for c in np.asarray(v, dtype=complex)]


def _sample_lines(domain: Domain, n_lines: int, rng: np.random.Generator):
    n = domain.n
    lines = []
    origin = np.zeros(n, dtype=complex)
    for j in range(n):
        b = np.zeros(n, dtype=complex)
        b[j] = 1.0
        lines.append((origin, b))
    inner = domain.interior_sample(rng, n_lines)
    near = domain.boundary_sample(n_lines, rng)
    while len(lines) < n_lines:
        k = len(lines)
        p = inner[k % len(inner)]
        if k % 3 == 0:
            q = origin
        elif k % 3 == 1:
            q = near[rng.integers(len(near))] * (1 - 1e-3) + 1e-3 * domain.seed
        else:
            q = inner[rng.integers(len(inner))]
        b = q - p
        norm = np.linalg.norm(b)
        if norm < 1e-9:
            continue
        lines.append((p, b / norm))
    return lines[:n_lines]


def check_cconvex(domain: Domain, n_lines: int = 200, resolution: int = 256, seed: int = 0,
                  extra_lines=()) -> CConvexCertificate:
    """Sample complex lines and aggregate slice topology and transversality.

    Lines are the coordinate axes through 0, then lines through pairs drawn
    from random interior points, near-boundary points and the origin.
    ``FAIL`` carries the first witness (non-simply-connected preferred, then
    disconnected, then non-transversal).  Empty slices are excluded from the
    count.
    """
    rng = np.random.default_rng(seed)
    lines = (list(extra_lines) + _sample_lines(domain, n_lines, rng))[:n_lines]
    rows = []
    counted = 0
    warn = False
    failures = {"simply_connected": None, "connected": None, "transversal": None}
    for idx, (a, b) in enumerate(lines):
        region = slice_domain(domain, a, b, resolution)
        topo = slice_topology(region)
        min_defect = None
        transversal = True
        if not topo["empty"]:
            counted += 1
            warn = warn or topo["warning"]
            try:
                tr = check_transversality(domain, a, b, region=region)
                min_defect = tr.min_relative_defect
                transversal = tr.transversal
            except NoCrossing:
                pass
        row = {
            "line_id": idx, "a": np.asarray(a), "b": np.asarray(b),
            "connected": topo["connected"], "simply_connected": topo["simply_connected"],
            "empty": topo["empty"], "warning": topo["warning"], "min_defect": min_defect,
            "transversal": transversal,
        }
        rows.append(row)
        for key in ("simply_connected", "connected", "transversal"):
            if not row[key] and failures[key] is None:
                failures[key] = row
    witness = None
    for key in ("simply_connected", "connected", "transversal"):
        if failures[key] is not None:
            f = failures[key]
            witness = {"line_id": f["line_id"], "a": _encode_vec(f["a"]), "b": _encode_vec(f["b"]),
                       "reason": "not " + key.replace("_", " ")}
            break
    if witness is not None:
        verdict = "FAIL"
    elif warn:
        verdict = "INCONCLUSIVE"
    else:
        verdict = "PASS"
    return CConvexCertificate(verdict=verdict, lines=rows, witness=witness, counted=counted,
                              resolution=resolution)
