"""The twelve elementary functions and their closed-form interval means.

Functions 1..9 are trigonometric integrands of t; 10..12 are sinc atoms of
the width U.  Every integrand has period dividing pi, so its mean over
[pi L, pi L + U] depends on U only and decomposes exactly as

    mean(l, U) = c0 + c2 sinc(2U) + c4 sinc(4U) + c6 sinc(6U).

The rational coefficients are derived here by expanding the powers of sin and
cos into cosine polynomials with exact arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError

__all__ = [
    "U_MAX",
    "NAMES",
    "ElementaryFunction",
    "SincDecomposition",
    "FUNCTIONS",
    "sinc",
    "eval_f",
    "mean_value_closed_form",
    "mean_value_formula",
    "quadrature_mean",
    "sinc_decomposition",
]

U_MAX = math.pi / 12

NAMES = {
    1: "sin^2 t",
    2: "cos^2 t",
    3: "sin^4 t",
    4: "cos^4 t",
    5: "sin^6 t",
    6: "cos^6 t",
    7: "cos 2t",
    8: "cos 4t",
    9: "cos 6t",
    10: "sin(2U)/(2U)",
    11: "sin(4U)/(4U)",
    12: "sin(6U)/(6U)",
}


@dataclass(frozen=True)
class ElementaryFunction:
    l: int
    kind: str  # "integrand" or "sinc"

    @property
    def name(self) -> str:
        return NAMES[self.l]


FUNCTIONS = tuple(ElementaryFunction(l, "integrand" if l <= 9 else "sinc") for l in range(1, 13))


@dataclass(frozen=True)
class SincDecomposition:
    l: int
    c0: Fraction
    c2: Fraction
    c4: Fraction
    c6: Fraction

    @property
    def coefficients(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.c0, self.c2, self.c4, self.c6)

    def atom_coefficients(self) -> dict[int, Fraction]:
        """Nonzero coefficients keyed by the sinc-atom index 10, 11, 12."""
        pairs = {10: self.c2, 11: self.c4, 12: self.c6}
        return {l: c for l, c in pairs.items() if c != 0}

    def evaluate(self, atoms: dict[int, float]) -> float:
        """c0 + sum c_j * atoms[9 + j] over the nonzero coefficients."""
        return float(self.c0) + math.fsum(float(c) * atoms[l] for l, c in self.atom_coefficients().items())


def _check_l(l: int, lo: int, hi: int) -> None:
    if not isinstance(l, (int, np.integer)) or not lo <= l <= hi:
        raise DomainError(f"function index must be in {lo}..{hi}, got {l!r}")


def _check_u(U: float) -> None:
    if not 0.0 < U < U_MAX:
        raise DomainError(f"U must lie in (0, pi/12), got {U!r}")


def sinc(x):
    """sin(x)/x with the removable singularity filled by 1."""
    x = np.asarray(x, dtype=float)
    safe = np.where(x == 0.0, 1.0, x)
    out = np.where(x == 0.0, 1.0, np.sin(safe) / safe)
    return float(out) if out.ndim == 0 else out


def eval_f(l: int, x):
    """Value of f_l; x is a point t for l <= 9 and a width U for l >= 10."""
    _check_l(l, 1, 12)
    if l >= 10:
        arr = np.asarray(x, dtype=float)
        if np.any(arr <= 0.0) or np.any(arr >= U_MAX):
            raise DomainError(f"U must lie in (0, pi/12) for f_{l}")
        return sinc(2 * (l - 9) * arr)
    x = np.asarray(x, dtype=float)
    if l <= 6:
        power = 2 * ((l + 1) // 2)
        base = np.sin(x) if l % 2 == 1 else np.cos(x)
        out = base**power
    else:
        out = np.cos(2 * (l - 6) * x)
    return float(out) if out.ndim == 0 else out


def _cos_poly_mul(a: dict[int, Fraction], b: dict[int, Fraction]) -> dict[int, Fraction]:
    # Polynomials in cos(2 j t), stored as {j: coefficient}.
    out: dict[int, Fraction] = {}
    for i, ca in a.items():
        for j, cb in b.items():
            if i == 0 or j == 0:
                key = i + j
                out[key] = out.get(key, Fraction(0)) + ca * cb
            else:
                for key in (i + j, abs(i - j)):
                    out[key] = out.get(key, Fraction(0)) + ca * cb / 2
    return {k: v for k, v in out.items() if v != 0}


@lru_cache(maxsize=None)
def sinc_decomposition(l: int) -> SincDecomposition:
    """Exact rational coefficients (c0, c2, c4, c6) of the mean of f_l."""
    _check_l(l, 1, 9)
    if l >= 7:
        poly = {l - 6: Fraction(1)}
    else:
        sign = -1 if l % 2 == 1 else 1
        square = {0: Fraction(1, 2), 1: Fraction(sign, 2)}  # sin^2 or cos^2
        poly = {0: Fraction(1)}
        for _ in range((l + 1) // 2):
            poly = _cos_poly_mul(poly, square)
    # mean of cos(2 j t) over [pi L, pi L + U] is sinc(2 j U)
    return SincDecomposition(l, *(poly.get(j, Fraction(0)) for j in range(4)))


@lru_cache(maxsize=None)
def _series_coefficients(l: int, n_terms: int = 24) -> tuple[float, ...]:
    # mean(l, U) = sum_m d_m U^(2m); exact d_m, so leading-order
    # cancellation (mean ~ U^6/7 for sin^6) costs no precision.
    dec = sinc_decomposition(l)
    coeffs = []
    for m in range(n_terms):
        d = Fraction(0)
        for j, c in zip((1, 2, 3), (dec.c2, dec.c4, dec.c6)):
            if c:
                d += c * Fraction((-1) ** m * (2 * j) ** (2 * m), math.factorial(2 * m + 1))
        if m == 0:
            d += dec.c0
        coeffs.append(float(d))
    return tuple(coeffs)


def mean_value_closed_form(l: int, U):
    """(1/U) * integral of f_l over [pi L, pi L + U], for l = 1..9."""
    _check_l(l, 1, 9)
    arr = np.asarray(U, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= U_MAX):
        raise DomainError(f"U must lie in (0, pi/12), got {U!r}")
    u2 = arr * arr
    acc = np.zeros_like(arr)
    for d in reversed(_series_coefficients(l)):
        acc = acc * u2 + d
    return float(acc) if acc.ndim == 0 else acc


def mean_value_formula(l: int, U: float) -> float:
    """The closed form written directly in sines (cancels badly for small U)."""
    _check_l(l, 1, 9)
    _check_u(U)
    dec = sinc_decomposition(l)
    return float(dec.c0) + float(dec.c2) * sinc(2 * U) + float(dec.c4) * sinc(4 * U) + float(dec.c6) * sinc(6 * U)


def quadrature_mean(l: int, U: float, L: int = 0, rel_tol: float = 1e-13) -> float:
    """Mean of f_l over [pi L, pi L + U] by adaptive Gauss-Kronrod (scipy)."""
    from scipy.integrate import quad

    _check_l(l, 1, 9)
    _check_u(U)
    a = math.pi * L
    val, _ = quad(lambda t: eval_f(l, t), a, a + U, epsabs=1e-300, epsrel=rel_tol, limit=200)
    return val / U
