"""Pointwise boundary geometry: normals, complex tangent frames, line projections."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domains import Domain
from .errors import GradientVanishes, NotOnBoundary, ZeroDirection

__all__ = [
    "hermitian",
    "project_onto_line",
    "inner_normal",
    "tangent_frame",
    "BoundaryFrame",
    "frame_vectors",
]

GRADIENT_TOL = 1e-12


def hermitian(a, b) -> np.ndarray:
    """``<a, b> = sum_j a_j conj(b_j)`` over the last axis (linear in ``a``)."""
    return np.sum(np.asarray(a) * np.conj(np.asarray(b)), axis=-1)


def project_onto_line(v, z, tol: float = 1e-14) -> np.ndarray:
    """Orthogonal projection of ``v`` onto the complex line ``C z``.

    Broadcasts over leading axes.  Raises :class:`ZeroDirection` when ``|z|``
    is below ``tol``.
    """
    v = np.asarray(v, dtype=complex)
    z = np.asarray(z, dtype=complex)
    zz = hermitian(z, z).real
    if np.any(zz <= tol**2):
        raise ZeroDirection("cannot project onto the line through 0 and 0")
    coef = hermitian(v, z) / zz
    return coef[..., None] * z


def _unit_gradient(domain: Domain, w: np.ndarray, check_boundary: bool) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    if check_boundary:
        rv = np.abs(domain.r(w))
        if np.any(rv > domain.boundary_tol):
            raise NotOnBoundary(f"|r(w)| = {np.max(rv):.3g} exceeds {domain.boundary_tol:.3g}")
    g = domain.grad(w)
    norm = np.linalg.norm(g, axis=-1)
    if np.any(norm < GRADIENT_TOL):
        raise GradientVanishes(f"|grad r| = {np.min(norm):.3g} at a boundary point")
    return g / norm[..., None]


def inner_normal(domain: Domain, w, check_boundary: bool = True) -> np.ndarray:
    """Inner unit normal ``-grad r / |grad r|`` at boundary point(s) ``w``."""
    return -_unit_gradient(domain, w, check_boundary)


def frame_vectors(unit_normal: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the complex tangent space ``{v : <v, nu> = 0}``.

    Gram-Schmidt on the standard basis vectors in increasing index order,
    skipping the index where ``|nu_k|`` is largest (first one on ties).  The
    frame is continuous in ``nu`` away from the seams where that index
    switches.  Returns shape ``(..., n - 1, n)``.
    """
    nu = np.asarray(unit_normal, dtype=complex)
    n = nu.shape[-1]
    flat = nu.reshape(-1, n)
    out = np.zeros((len(flat), n - 1, n), dtype=complex)
    drop = np.argmax(np.abs(flat), axis=-1)
    for p, (vec, k) in enumerate(zip(flat, drop)):
        basis = [vec]
        row = 0
        for idx in range(n):
            if idx == k:
                continue
            a = np.zeros(n, dtype=complex)
            a[idx] = 1.0
            for b in basis:
                a = a - hermitian(a, b) * b
            a = a / np.linalg.norm(a)
            basis.append(a)
            out[p, row] = a
            row += 1
    return out.reshape(nu.shape[:-1] + (n - 1, n))


@dataclass(frozen=True)
class BoundaryFrame:
    base_point: np.ndarray
    inner_normal: np.ndarray
    tangents: np.ndarray  # shape (n - 1, n)

    def annihilation_defect(self, domain: Domain) -> float:
        """``max_j |sum_k dr/dz_k e^j_k|``; zero for an exact complex tangent frame."""
        d = domain.dr_dz(self.base_point)
        return float(np.max(np.abs(self.tangents @ d))) if len(self.tangents) else 0.0

    def gram_determinant(self) -> float:
        g = self.tangents.conj() @ self.tangents.T
        return float(abs(np.linalg.det(g))) if len(self.tangents) else 1.0


def tangent_frame(domain: Domain, w, check_boundary: bool = True) -> BoundaryFrame:
    """Inner normal and complex unit tangent vectors ``e^1..e^{n-1}`` at ``w``."""
    w = np.asarray(w, dtype=complex)
    nu = _unit_gradient(domain, w, check_boundary)
    return BoundaryFrame(base_point=w.copy(), inner_normal=-nu, tangents=frame_vectors(nu))
