"""Evaluation of zeta(s), Hardy's Z(t) and the normalized square Z~^2(t).

Two independent routes are implemented:

* Euler-Maclaurin summation for zeta(s) anywhere with Re(s) > 0, in double
  precision (vectorized) or, when ``working_precision > 15``, in mpmath
  arithmetic with the same algorithm.
* The Riemann-Siegel formula with the C0..C4 correction terms for Z(t),
  used on the critical line above ``EvalConfig.rs_cutoff``.  Below the
  cutoff Z(t) is obtained by rotating the Euler-Maclaurin value by the
  Riemann-Siegel theta function.

Large phases (t * log n with t up to 1e5) are reduced modulo 2*pi in
extended (80-bit) floating point before the trigonometric call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import CapabilityError, DomainError

__all__ = [
    "EvalConfig",
    "CriticalSample",
    "DEFAULT_CONFIG",
    "zeta",
    "zeta_many",
    "hardy_z",
    "z_tilde_sq",
    "critical_sample",
    "theta",
    "bernoulli",
]

_LD = np.longdouble
_TWO_PI_LD = _LD("6.28318530717958647692528676655900576839433879875021")
_PI_LD = _LD("3.14159265358979323846264338327950288419716939937511")
_LOG_TWO_PI_LD = _LD("1.83787706640934548356065947281123527972279494727556")

# Euler-Maclaurin: N = ceil(_EM_N_SLOPE*|t|) + _EM_N_BASE main terms and
# _EM_TERMS Bernoulli corrections keep the tail ratio below ~0.48.
_EM_N_SLOPE = 0.35
_EM_N_BASE = 20
_EM_TERMS = 30


@dataclass(frozen=True)
class EvalConfig:
    """Numerical settings shared by every stage.

    ``t_min`` is the lower height cutoff standing in for the unspecified
    L0 of the factorization formulas.
    """

    working_precision: int = 15
    t_min: float = 100.0
    quadrature_rel_tol: float = 1e-9
    rootfind_abs_tol: float = 1e-11
    rs_cutoff: float = 1000.0
    max_height: float = 1e6

    def __post_init__(self):
        if self.working_precision < 15:
            raise DomainError("working_precision must be >= 15")
        if not self.t_min > math.e:
            raise DomainError("t_min must exceed e so that ln t > 1")
        if self.quadrature_rel_tol <= 0 or self.rootfind_abs_tol <= 0:
            raise DomainError("tolerances must be positive")
        if self.max_height <= self.t_min:
            raise DomainError("max_height must exceed t_min")

    @property
    def extended(self) -> bool:
        return self.working_precision > 15

    def to_dict(self) -> dict:
        return {
            "working_precision": self.working_precision,
            "t_min": self.t_min,
            "quadrature_rel_tol": self.quadrature_rel_tol,
            "rootfind_abs_tol": self.rootfind_abs_tol,
            "rs_cutoff": self.rs_cutoff,
            "max_height": self.max_height,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvalConfig":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})


DEFAULT_CONFIG = EvalConfig()


@dataclass(frozen=True)
class CriticalSample:
    t: float
    z: float
    z_tilde_sq: float


@lru_cache(maxsize=None)
def _bernoulli_table(n_max: int) -> tuple:
    # Akiyama-Tanigawa, exact; B_1 = +1/2 convention is irrelevant here
    # since only even indices are used.
    out = []
    a = [Fraction(0)] * (n_max + 1)
    for m in range(n_max + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        out.append(a[0])
    return tuple(out)


def bernoulli(n: int) -> Fraction:
    """Exact Bernoulli number B_n (with B_1 = +1/2)."""
    size = max(64, 1 << (n).bit_length())
    return _bernoulli_table(size)[n]


@lru_cache(maxsize=None)
def _em_coefficients(m_terms: int) -> np.ndarray:
    # B_{2k} / (2k)!  for k = 1..m_terms
    return np.array(
        [float(bernoulli(2 * k) / math.factorial(2 * k)) for k in range(1, m_terms + 1)]
    )


def _check_height(t: float, cfg: EvalConfig) -> None:
    if abs(t) > cfg.max_height:
        raise CapabilityError(
            f"|t| = {abs(t):g} exceeds max_height = {cfg.max_height:g} for the configured precision"
        )


def _em_vector(s: np.ndarray) -> np.ndarray:
    """Euler-Maclaurin zeta for a batch of points sharing one truncation."""
    sigma = s.real
    t = s.imag
    n_main = int(math.ceil(_EM_N_SLOPE * float(np.max(np.abs(t))))) + _EM_N_BASE
    n_ld = np.arange(1, n_main, dtype=_LD)
    logn_ld = np.log(n_ld)
    logn = logn_ld.astype(np.float64)

    out = np.empty(s.shape, dtype=np.complex128)
    chunk = max(1, 4_000_000 // n_main)
    for start in range(0, s.size, chunk):
        sl = slice(start, start + chunk)
        sg = sigma[sl]
        tt = t[sl].astype(_LD)
        phase = np.mod(np.outer(tt, logn_ld), _TWO_PI_LD).astype(np.float64)
        mag = np.exp(-np.outer(sg, logn))
        head = (mag * np.cos(phase)).sum(axis=1) - 1j * (mag * np.sin(phase)).sum(axis=1)
        out[sl] = head

    big_n = float(n_main)
    log_big_n = math.log(big_n)
    ph = np.mod(t.astype(_LD) * _LD(np.log(_LD(n_main))), _TWO_PI_LD).astype(np.float64)
    n_pow = np.exp(-sigma * log_big_n) * (np.cos(ph) - 1j * np.sin(ph))  # N^{-s}
    out += n_pow * big_n / (s - 1.0) + 0.5 * n_pow

    coeffs = _em_coefficients(_EM_TERMS)
    poch = s.copy()
    power = n_pow / big_n  # N^{-s-1}
    tail = np.zeros_like(out)
    inv_n2 = 1.0 / (big_n * big_n)
    for k in range(1, _EM_TERMS + 1):
        if k > 1:
            poch = poch * (s + (2 * k - 3)) * (s + (2 * k - 2))
            power = power * inv_n2
        tail += coeffs[k - 1] * poch * power
    return out + tail


def _em_mp(s, dps: int):
    import mpmath

    with mpmath.workdps(dps + 10):
        s = mpmath.mpc(s)
        t = abs(s.imag)
        n_main = int(math.ceil(_EM_N_SLOPE * float(t))) + 3 * dps
        m_terms = 2 * dps + 10
        head = mpmath.fsum(mpmath.power(n, -s) for n in range(1, n_main))
        big_n = mpmath.mpf(n_main)
        n_pow = mpmath.power(big_n, -s)
        total = head + n_pow * big_n / (s - 1) + n_pow / 2
        poch = s
        power = n_pow / big_n
        for k in range(1, m_terms + 1):
            if k > 1:
                poch *= (s + 2 * k - 3) * (s + 2 * k - 2)
                power /= big_n * big_n
            b = bernoulli(2 * k)
            coeff = mpmath.mpf(b.numerator) / (b.denominator * mpmath.factorial(2 * k))
            total += coeff * poch * power
        return +total


def _validate_s(s: complex, cfg: EvalConfig) -> None:
    if s == 1:
        raise DomainError("zeta has a simple pole at s = 1")
    if not s.real > 0:
        raise DomainError("only Re(s) > 0 is supported")
    _check_height(s.imag, cfg)


def zeta(s, cfg: EvalConfig = DEFAULT_CONFIG):
    """Riemann zeta at a single point.

    Returns a Python complex in double precision, or an ``mpmath.mpc`` when
    ``cfg.working_precision > 15``.
    """
    s = complex(s) if not cfg.extended else s
    _validate_s(complex(s), cfg)
    if cfg.extended:
        return _em_mp(s, cfg.working_precision)
    return complex(_em_vector(np.array([s], dtype=np.complex128))[0])


def zeta_many(s, cfg: EvalConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Vectorized double-precision zeta over an array of points."""
    s = np.atleast_1d(np.asarray(s, dtype=np.complex128))
    if np.any(s == 1):
        raise DomainError("zeta has a simple pole at s = 1")
    if np.any(s.real <= 0):
        raise DomainError("only Re(s) > 0 is supported")
    if s.size and np.max(np.abs(s.imag)) > cfg.max_height:
        raise CapabilityError(f"heights above max_height = {cfg.max_height:g} requested")
    if s.size == 0:
        return s.copy()
    # Group by height so short sums are not padded to the longest one.
    order = np.argsort(np.abs(s.imag), kind="stable")
    out = np.empty_like(s)
    block = 512
    for start in range(0, s.size, block):
        idx = order[start : start + block]
        out[idx] = _em_vector(s[idx])
    return out


def _theta_ld(t: np.ndarray) -> np.ndarray:
    t = t.astype(_LD)
    inv = 1.0 / t
    inv2 = inv * inv
    series = inv * (
        _LD(1) / 48
        + inv2 * (_LD(7) / 5760 + inv2 * (_LD(31) / 80640 + inv2 * (_LD(127) / 430080 + inv2 * (_LD(511) / 1216512))))
    )
    return t / 2 * (np.log(t) - _LOG_TWO_PI_LD) - t / 2 - _PI_LD / 8 + series


def theta(t):
    """Riemann-Siegel theta function (asymptotic series, accurate for t >= 10)."""
    arr = np.asarray(t, dtype=np.float64)
    val = _theta_ld(np.atleast_1d(arr)).astype(np.float64)
    return float(val[0]) if arr.ndim == 0 else val


@lru_cache(maxsize=1)
def _psi_derivative_series() -> np.ndarray:
    """Taylor coefficients of d^j/dp^j Psi(1/2 + z), j = 0..12, in powers of z.

    Psi(p) = cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p) is entire, but the
    coefficient recursion cancels heavily, so it runs in 150-digit arithmetic.
    """
    import mpmath

    degree = 120
    with mpmath.workdps(150):
        pi = mpmath.pi
        num = [mpmath.mpf(0)] * degree
        c, s = mpmath.cos(5 * pi / 8), mpmath.sin(5 * pi / 8)
        for m in range(degree // 2):
            term = (2 * pi) ** m / mpmath.factorial(m)
            if m % 2 == 0:
                num[2 * m] += c * term * (1 if m % 4 == 0 else -1)
            else:
                num[2 * m] += s * term * (1 if m % 4 == 1 else -1)
        den = [mpmath.mpf(0)] * degree
        for m in range(0, degree, 2):
            den[m] = (-1) ** (m // 2) * (2 * pi) ** m / mpmath.factorial(m)
        ratio = [mpmath.mpf(0)] * degree
        for n in range(degree):
            acc = num[n] - mpmath.fsum(den[j] * ratio[n - j] for j in range(1, n + 1))
            ratio[n] = acc / den[0]
        # Psi(1/2 + z) = -num(z) / den(z)
        base = [-x for x in ratio]
        table = np.zeros((13, degree))
        for j in range(13):
            for n in range(j, degree):
                table[j, n - j] = float(base[n] * mpmath.ff(n, j))
    return table


def _poly_eval(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(z)
    for c in coeffs[::-1]:
        acc = acc * z + c
    return acc


def _rs_corrections(p: np.ndarray, a: np.ndarray) -> np.ndarray:
    tab = _psi_derivative_series()
    z = p - 0.5
    d = [_poly_eval(tab[j], z) for j in range(13)]
    pi2 = math.pi**2
    pi4 = pi2 * pi2
    pi6 = pi4 * pi2
    pi8 = pi4 * pi4
    c0 = d[0]
    c1 = -d[3] / (96 * pi2)
    c2 = d[2] / (64 * pi2) + d[6] / (18432 * pi4)
    c3 = -d[1] / (64 * pi2) - d[5] / (3840 * pi4) - d[9] / (5308416 * pi6)
    c4 = (
        d[0] / (128 * pi2)
        + 19 * d[4] / (24576 * pi4)
        + 11 * d[8] / (5898240 * pi6)
        + d[12] / (2038431744 * pi8)
    )
    inv = 1.0 / a
    return c0 + inv * (c1 + inv * (c2 + inv * (c3 + inv * c4)))


def _riemann_siegel(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t)
    a_all = np.sqrt(t / (2 * math.pi))
    n_all = np.floor(a_all).astype(np.int64)
    n_max = int(n_all.max())
    n_ld = np.arange(1, n_max + 1, dtype=_LD)
    logn_ld = np.log(n_ld)
    weights = 1.0 / np.sqrt(np.arange(1, n_max + 1, dtype=np.float64))
    chunk = max(1, 2_000_000 // n_max)
    for start in range(0, t.size, chunk):
        sl = slice(start, start + chunk)
        tt = t[sl]
        th = _theta_ld(tt)
        phase = np.mod(th[:, None] - np.outer(tt.astype(_LD), logn_ld), _TWO_PI_LD).astype(np.float64)
        mask = np.arange(1, n_max + 1)[None, :] <= n_all[sl][:, None]
        main = 2.0 * (np.cos(phase) * weights * mask).sum(axis=1)
        a = a_all[sl]
        n = n_all[sl]
        p = a - n
        sign = np.where(n % 2 == 1, 1.0, -1.0)  # (-1)^(N-1)
        out[sl] = main + sign * _rs_corrections(p, a) / np.sqrt(a)
    return out


def _z_via_zeta(t: np.ndarray) -> np.ndarray:
    vals = zeta_many(0.5 + 1j * t, DEFAULT_CONFIG)
    th = np.mod(_theta_ld(t), _TWO_PI_LD).astype(np.float64)
    return (np.exp(1j * th) * vals).real


def _z_mp(t: float, dps: int):
    import mpmath

    with mpmath.workdps(dps + 10):
        val = _em_mp(mpmath.mpc(0.5, t), dps)
        return +(mpmath.expj(mpmath.siegeltheta(t)) * val).real


def hardy_z(t, cfg: EvalConfig = DEFAULT_CONFIG):
    """Hardy's Z(t), real with |Z(t)| = |zeta(1/2 + i t)|.

    Accepts a scalar or an array; arrays are evaluated in double precision.
    """
    arr = np.asarray(t, dtype=np.float64)
    flat = np.atleast_1d(arr).ravel()
    if flat.size and float(flat.min()) < cfg.t_min:
        raise DomainError(f"t = {float(flat.min())!r} is below t_min = {cfg.t_min!r}")
    if flat.size and float(flat.max()) > cfg.max_height:
        raise CapabilityError(f"t above max_height = {cfg.max_height:g}")
    if cfg.extended and arr.ndim == 0:
        return _z_mp(float(arr), cfg.working_precision)
    out = np.empty_like(flat)
    hi = flat >= cfg.rs_cutoff
    if hi.any():
        out[hi] = _riemann_siegel(flat[hi])
    if (~hi).any():
        out[~hi] = _z_via_zeta(flat[~hi])
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def z_tilde_sq(t, cfg: EvalConfig = DEFAULT_CONFIG):
    """Z(t)^2 / ln t, the normalized square with omega(t) := ln t."""
    arr = np.asarray(t, dtype=np.float64)
    if arr.size and float(np.min(arr)) <= math.e:
        raise DomainError("z_tilde_sq needs t > e")
    z = hardy_z(arr, cfg)
    if cfg.extended and arr.ndim == 0:
        import mpmath

        return z * z / mpmath.log(float(arr))
    res = np.square(z) / np.log(arr)
    return float(res) if arr.ndim == 0 else res


def critical_sample(t: float, cfg: EvalConfig = DEFAULT_CONFIG) -> CriticalSample:
    z = float(hardy_z(float(t), cfg))
    return CriticalSample(t=float(t), z=z, z_tilde_sq=z * z / math.log(t))
