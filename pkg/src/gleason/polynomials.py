"""Multivariate complex polynomials and the closed-form division operators.

A :class:`Polynomial` in ``n`` complex variables is stored as a map from
multi-indices ``alpha`` to complex coefficients.  Coordinates are indexed from
0 throughout the package, so ``T_0`` here is the operator attached to ``z_1``.

The closed form

    T_i(P)(z) = int_0^1 D_i P(lam z) dlam = sum_alpha c_alpha alpha_i z^(alpha - e_i) / |alpha|

is the exact reference every quadrature route in :mod:`gleason.core` is
checked against.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from itertools import product
from typing import Callable, Mapping

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaln

from .errors import DimensionMismatch, IllConditioned, NonVanishing

__all__ = [
    "Polynomial",
    "FitResult",
    "leibenzon_closed_form",
    "leibenzon_at",
    "fit_approximant",
    "monomial_exponents",
]


def monomial_exponents(n: int, degree: int, min_degree: int = 0) -> np.ndarray:
    """All multi-indices with ``min_degree <= |alpha| <= degree``, graded order."""
    rows = [a for a in product(range(degree + 1), repeat=n) if min_degree <= sum(a) <= degree]
    rows.sort(key=lambda a: (sum(a), tuple(-x for x in a)))
    return np.array(rows, dtype=int).reshape(-1, n)


class Polynomial:
    """Immutable polynomial in ``n`` complex variables.

    Exact zero coefficients are never stored, so ``degree`` is the largest
    ``|alpha|`` with a nonzero coefficient (``-1`` for the zero polynomial).
    """

    __slots__ = ("_n", "_terms", "_exps", "_coeffs")

    def __init__(self, terms: Mapping[tuple, complex], n: int):
        if n < 1:
            raise DimensionMismatch(f"dimension must be positive, got {n}")
        clean = {}
        for alpha, c in terms.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n:
                raise DimensionMismatch(f"multi-index {alpha} has length != {n}")
            if any(a < 0 for a in alpha):
                raise ValueError(f"negative exponent in {alpha}")
            c = complex(c)
            if c != 0:
                clean[alpha] = clean.get(alpha, 0) + c
        self._n = n
        self._terms = {a: c for a, c in sorted(clean.items()) if c != 0}
        if self._terms:
            self._exps = np.array(list(self._terms.keys()), dtype=int)
            self._coeffs = np.array(list(self._terms.values()), dtype=complex)
        else:
            self._exps = np.zeros((0, n), dtype=int)
            self._coeffs = np.zeros(0, dtype=complex)

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, n: int) -> "Polynomial":
        return cls({}, n)

    @classmethod
    def constant(cls, c: complex, n: int) -> "Polynomial":
        return cls({(0,) * n: c}, n)

    @classmethod
    def coordinate(cls, i: int, n: int) -> "Polynomial":
        """The coordinate function ``z_i`` (0-based)."""
        if not 0 <= i < n:
            raise DimensionMismatch(f"coordinate {i} out of range for n={n}")
        alpha = [0] * n
        alpha[i] = 1
        return cls({tuple(alpha): 1.0}, n)

    @classmethod
    def from_arrays(cls, exponents, coeffs, n: int | None = None) -> "Polynomial":
        exponents = np.asarray(exponents, dtype=int)
        if n is None:
            n = exponents.shape[1]
        terms: dict = {}
        for alpha, c in zip(map(tuple, exponents), np.asarray(coeffs, dtype=complex)):
            terms[alpha] = terms.get(alpha, 0) + c
        return cls(terms, n)

    @classmethod
    def from_dense(cls, array: np.ndarray) -> "Polynomial":
        """Inverse of :meth:`to_dense`: ``array[alpha]`` is the coefficient of ``z^alpha``."""
        array = np.asarray(array, dtype=complex)
        idx = np.argwhere(array != 0)
        return cls({tuple(a): array[tuple(a)] for a in idx}, array.ndim)

    @classmethod
    def random(
        cls,
        n: int,
        degree: int,
        rng: np.random.Generator,
        vanish_at_origin: bool = True,
    ) -> "Polynomial":
        """Dense random polynomial with coefficients uniform in the complex unit disc."""
        exps = monomial_exponents(n, degree, min_degree=1 if vanish_at_origin else 0)
        m = len(exps)
        radius = np.sqrt(rng.uniform(0.0, 1.0, m))
        phase = rng.uniform(0.0, 2 * np.pi, m)
        return cls.from_arrays(exps, radius * np.exp(1j * phase), n)

    # -- basic properties -------------------------------------------------
    @property
    def n(self) -> int:
        return self._n

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @property
    def exponents(self) -> np.ndarray:
        return self._exps.copy()

    @property
    def coefficients(self) -> np.ndarray:
        return self._coeffs.copy()

    @property
    def degree(self) -> int:
        if not self._terms:
            return -1
        return int(self._exps.sum(axis=1).max())

    @property
    def vanishes_at_origin(self) -> bool:
        return (0,) * self._n not in self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, alpha) -> complex:
        return self._terms.get(tuple(alpha), 0j)

    def max_abs_coefficient(self) -> float:
        return float(np.abs(self._coeffs).max()) if self._terms else 0.0

    def __repr__(self) -> str:
        if not self._terms:
            return f"Polynomial(0, n={self._n})"
        parts = []
        for alpha, c in self._terms.items():
            mono = "*".join(
                f"z{j + 1}" + (f"^{a}" if a > 1 else "") for j, a in enumerate(alpha) if a
            )
            parts.append(f"({c:.6g})" + (f"*{mono}" if mono else ""))
        return f"Polynomial({' + '.join(parts)}, n={self._n})"

    # -- evaluation -------------------------------------------------------
    def __call__(self, z) -> np.ndarray | complex:
        return self.eval(z)

    def eval(self, z) -> np.ndarray | complex:
        """Evaluate at a point (shape ``(n,)``) or a batch (shape ``(..., n)``)."""
        z = np.asarray(z, dtype=complex)
        if z.shape[-1] != self._n:
            raise DimensionMismatch(f"point has {z.shape[-1]} coordinates, expected {self._n}")
        scalar = z.ndim == 1
        pts = z.reshape(-1, self._n)
        if not self._terms:
            out = np.zeros(len(pts), dtype=complex)
        else:
            dmax = int(self._exps.max())
            # powers[j, k, p] = z_j^k at point p
            powers = np.ones((self._n, dmax + 1, len(pts)), dtype=complex)
            for k in range(1, dmax + 1):
                powers[:, k] = powers[:, k - 1] * pts.T
            mono = np.ones((len(self._coeffs), len(pts)), dtype=complex)
            for j in range(self._n):
                mono *= powers[j, self._exps[:, j]]
            out = self._coeffs @ mono
        if scalar:
            return complex(out[0])
        return out.reshape(z.shape[:-1])

    # -- algebra ----------------------------------------------------------
    def _check_same(self, other: "Polynomial"):
        if not isinstance(other, Polynomial):
            return NotImplemented
        if other._n != self._n:
            raise DimensionMismatch(f"dimensions {self._n} and {other._n} differ")
        return None

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = Polynomial.constant(other, self._n)
        if self._check_same(other) is NotImplemented:
            return NotImplemented
        terms = dict(self._terms)
        for a, c in other._terms.items():
            terms[a] = terms.get(a, 0) + c
        return Polynomial(terms, self._n)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({a: -c for a, c in self._terms.items()}, self._n)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return Polynomial({a: c * other for a, c in self._terms.items()}, self._n)
        if self._check_same(other) is NotImplemented:
            return NotImplemented
        terms: dict = {}
        for a, c in self._terms.items():
            for b, d in other._terms.items():
                key = tuple(x + y for x, y in zip(a, b))
                terms[key] = terms.get(key, 0) + c * d
        return Polynomial(terms, self._n)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = Polynomial.constant(1.0, self._n)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def allclose(self, other: "Polynomial", atol: float = 1e-12) -> bool:
        return (self - other).max_abs_coefficient() <= atol

    def trimmed(self, atol: float) -> "Polynomial":
        """Copy with coefficients of modulus ``<= atol`` removed."""
        return Polynomial({a: c for a, c in self._terms.items() if abs(c) > atol}, self._n)

    # -- calculus ---------------------------------------------------------
    def partial(self, i: int) -> "Polynomial":
        """``D_i P``: exponent ``alpha -> alpha - e_i`` with factor ``alpha_i``."""
        if not 0 <= i < self._n:
            raise DimensionMismatch(f"coordinate {i} out of range for n={self._n}")
        terms = {}
        for a, c in self._terms.items():
            if a[i]:
                b = list(a)
                b[i] -= 1
                terms[tuple(b)] = c * a[i]
        return Polynomial(terms, self._n)

    def directional(self, e) -> "Polynomial":
        """Complex directional derivative ``sum_i e_i D_i P``."""
        e = np.asarray(e, dtype=complex)
        out = Polynomial.zero(self._n)
        for i in range(self._n):
            if e[i] != 0:
                out = out + self.partial(i) * complex(e[i])
        return out

    # -- dense form and translation ---------------------------------------
    def to_dense(self, degree: int | None = None) -> np.ndarray:
        """Coefficient tensor of shape ``(d+1,)*n`` indexed by the exponent."""
        d = max(self.degree, 0) if degree is None else degree
        out = np.zeros((d + 1,) * self._n, dtype=complex)
        for a, c in self._terms.items():
            out[a] += c
        return out

    def shift(self, p) -> "Polynomial":
        """The polynomial ``u -> P(u + p)``."""
        p = np.asarray(p, dtype=complex)
        if p.shape != (self._n,):
            raise DimensionMismatch(f"shift vector must have shape ({self._n},)")
        if not self._terms:
            return self
        dense = self.to_dense()
        d = dense.shape[0] - 1
        binom = np.array([[math.comb(a, k) for a in range(d + 1)] for k in range(d + 1)], dtype=float)
        powers_idx = np.subtract.outer(np.arange(d + 1), np.arange(d + 1)).T  # a - k
        for j in range(self._n):
            # new[k] = sum_{a >= k} C(a, k) p^(a-k) old[a]
            ppow = np.where(powers_idx >= 0, p[j] ** np.clip(powers_idx, 0, None), 0)
            mat = binom * ppow
            dense = np.moveaxis(np.tensordot(mat, np.moveaxis(dense, j, 0), axes=(1, 0)), 0, j)
        return Polynomial.from_dense(dense)

    # -- serialization ----------------------------------------------------
    def to_json_dict(self) -> dict:
        return {
            "n": self._n,
            "terms": [
                {"alpha": list(a), "re": c.real, "im": c.imag} for a, c in self._terms.items()
            ],
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "Polynomial":
        n = int(data["n"])
        terms: dict = {}
        for t in data["terms"]:
            alpha = tuple(t["alpha"])
            terms[alpha] = terms.get(alpha, 0) + complex(t.get("re", 0.0), t.get("im", 0.0))
        return cls(terms, n)

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def loads(cls, text: str) -> "Polynomial":
        return cls.from_json_dict(json.loads(text))

    @classmethod
    def parse(cls, expr: str, n: int) -> "Polynomial":
        """Parse an expression in ``z1..zn`` such as ``"z1^2 + 2j*z1*z2"``."""
        import sympy

        symbols = sympy.symbols(" ".join(f"z{j + 1}" for j in range(n)) + " ")
        if n == 1:
            symbols = (symbols[0],) if isinstance(symbols, tuple) else (symbols,)
        local = {f"z{j + 1}": s for j, s in enumerate(symbols)}
        local["I"] = sympy.I
        text = expr.replace("^", "**")
        text = re.sub(r"(\d+(?:\.\d*)?(?:[eE][-+]?\d+)?)[jJ]\b", r"(\1*I)", text)
        parsed = sympy.sympify(text, locals=local)
        poly = sympy.Poly(sympy.expand(parsed), *symbols)
        terms = {tuple(m): complex(c) for m, c in poly.terms()}
        return cls(terms, n)


def leibenzon_closed_form(p: Polynomial, i: int) -> Polynomial:
    """Exact ``T_i(P)`` for a polynomial vanishing at the origin.

    Termwise, ``int_0^1 lam^(|alpha|-1) dlam = 1/|alpha|`` gives
    ``T_i(z^alpha) = alpha_i z^(alpha - e_i) / |alpha|``.
    """
    if not p.vanishes_at_origin:
        raise NonVanishing(f"P(0) = {p.coefficient((0,) * p.n)} != 0")
    if not 0 <= i < p.n:
        raise DimensionMismatch(f"coordinate {i} out of range for n={p.n}")
    terms = {}
    for a, c in p.terms.items():
        if a[i]:
            b = list(a)
            b[i] -= 1
            terms[tuple(b)] = c * a[i] / sum(a)
    return Polynomial(terms, p.n)


def leibenzon_at(p: Polynomial, i: int, base) -> Polynomial:
    """``T_i`` of ``P`` relative to the base point ``base``, in original coordinates.

    Returns ``f_i(z) = int_0^1 D_i P(base + lam (z - base)) dlam``, which is
    ``T_i(P(. + base) - P(base))`` evaluated at ``z - base``.
    """
    if not 0 <= i < p.n:
        raise DimensionMismatch(f"coordinate index {i} out of range for n = {p.n}")
    return leibenzon_all(p, base)[i]


def leibenzon_all(p: Polynomial, base) -> tuple:
    """All ``f_1..f_n`` of :func:`leibenzon_at` from one expansion of ``P``.

    Expanding ``P(lam z + (1 - lam) base)`` binomially gives coefficients
    ``W[beta, k]`` of ``z^beta lam^|beta| (1 - lam)^k``.  Since
    ``d/dz_i`` of that expansion is ``lam D_i P(...)``, each ``f_i`` follows by
    differentiating in ``z_i`` and integrating the Beta weights
    ``int lam^(|beta|-1) (1 - lam)^k = (|beta|-1)! k! / (|beta|+k)!``.  No
    shifted polynomial (with coefficients inflated by ``(1 + |base|)^deg``)
    is ever formed.
    """
    base = np.asarray(base, dtype=complex)
    n = p.n
    if base.shape != (n,):
        raise DimensionMismatch(f"base point must have shape ({n},)")
    d = p.degree
    if d <= 0:
        return tuple(Polynomial.zero(n) for _ in range(n))
    # work[beta..., k]: coefficient of z^beta carrying base-degree k
    work = np.zeros((d + 1,) * n + (d + 1,), dtype=complex)
    work[(Ellipsis, 0)] = p.to_dense(d)
    for j in range(n):
        if base[j] == 0:
            continue
        new = work.copy()
        for m in range(1, d + 1):
            src = [slice(None)] * (n + 1)
            dst = [slice(None)] * (n + 1)
            src[j] = slice(m, d + 1)
            dst[j] = slice(0, d + 1 - m)
            src[n] = slice(0, d + 1 - m)
            dst[n] = slice(m, d + 1)
            binom = np.array([math.comb(b + m, b) for b in range(d + 1 - m)], dtype=float)
            shape = [1] * (n + 1)
            shape[j] = d + 1 - m
            new[tuple(dst)] += work[tuple(src)] * (binom.reshape(shape) * base[j] ** m)
        work = new
    b_tot = np.indices((d + 1,) * n).sum(axis=0)[..., None]
    k = np.arange(d + 1)
    bb, kk = np.broadcast_arrays(b_tot, k)
    weight = np.zeros(bb.shape)
    ok = (bb >= 1) & (bb + kk <= d)
    weight[ok] = np.exp(gammaln(bb[ok]) + gammaln(kk[ok] + 1) - gammaln(bb[ok] + kk[ok] + 1))
    collapsed = (work * weight).sum(axis=-1)  # coefficient of z^beta, already integrated
    out = []
    for i in range(n):
        src = [slice(None)] * n
        src[i] = slice(1, d + 1)
        shape = [1] * n
        shape[i] = d
        part = collapsed[tuple(src)] * np.arange(1, d + 1).reshape(shape)
        out.append(Polynomial.from_dense(part))
    return tuple(out)


@dataclass(frozen=True)
class FitResult:
    poly: Polynomial
    residual: float  # sup over the sample of |f - P|
    condition: float  # condition estimate of the normal equations, cond(V)^2
    degree: int


def fit_approximant(
    f: Callable[[np.ndarray], np.ndarray],
    samples: np.ndarray,
    degree: int,
    max_condition: float = 1e12,
) -> FitResult:
    """Least-squares polynomial approximant of ``f`` on ``samples`` with ``P(0) = 0``.

    The constant monomial is left out of the basis, so the fit vanishes at the
    origin by construction.  Columns are scaled to unit norm and the system is
    solved through a QR factorization of the (scaled) Vandermonde matrix.
    """
    samples = np.asarray(samples, dtype=complex)
    n = samples.shape[-1]
    exps = monomial_exponents(n, degree, min_degree=1)
    if len(samples) < len(exps) + 1:
        raise IllConditioned(
            f"{len(samples)} samples cannot determine {len(exps)} coefficients"
        )
    values = np.asarray(f(samples), dtype=complex)
    vander = np.ones((len(samples), len(exps)), dtype=complex)
    for j in range(n):
        vander *= samples[:, j : j + 1] ** exps[:, j]
    scale = np.linalg.norm(vander, axis=0)
    scale[scale == 0] = 1.0
    q, r = np.linalg.qr(vander / scale)
    sv = np.linalg.svd(r, compute_uv=False)
    cond = float((sv[0] / sv[-1]) ** 2) if sv[-1] > 0 else math.inf
    if cond > max_condition:
        raise IllConditioned(f"normal-equation condition {cond:.3g} exceeds {max_condition:.1g}")
    coeffs = solve_triangular(r, q.conj().T @ values) / scale
    poly = Polynomial.from_arrays(exps, coeffs, n)
    residual = float(np.max(np.abs(values - vander @ coeffs)))
    return FitResult(poly=poly, residual=residual, condition=cond, degree=degree)
