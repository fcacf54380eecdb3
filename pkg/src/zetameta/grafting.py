"""Disjoint vertical strips, admissible width sets, and graft points.

A graft for target a in (0, 1) is a point w inside a strip with |zeta(w)| = a.
The search scans |zeta(sigma + it)| on a fixed line, brackets level crossings
(including crossings hidden between grid points near a local extremum), and
refines each bracket with Brent's method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from typing import Iterator, Mapping, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import ConfigurationError, DegenerateTargetError, DomainError, NotFoundError
from .trig_library import eval_f
from .zeta_core import DEFAULT_CONFIG, EvalConfig, zeta, zeta_many

__all__ = [
    "N_STRIPS",
    "GRAFT_TOL",
    "DEFAULT_WINDOW",
    "DEFAULT_T_CAP",
    "PI_OVER_12",
    "Strip",
    "AdmissibleUSet",
    "USetValidation",
    "Graft",
    "build_strips",
    "strips_disjoint",
    "validate_u_set",
    "find_graft",
    "iter_grafts",
    "build_graft_targets",
]

N_STRIPS = 12
GRAFT_TOL = 1e-9
DEFAULT_WINDOW = (10.0, 2000.0)
DEFAULT_T_CAP = 16000.0
SCAN_STEP = 0.05
_CHUNK = 4096

_PI_DIGITS = "3.14159265358979323846264338327950288419716939937510582097494459230781640628620899863"
_MIN_GAP = Decimal("1e-34")
with localcontext() as _ctx:
    _ctx.prec = 100
    PI_OVER_12 = Decimal(_PI_DIGITS) / 12
_MIN_MARGIN = Decimal("1e-43")
_MAX_COUNT = 10**43


@dataclass(frozen=True)
class Strip:
    l: int
    sigma0: float
    delta: float

    @property
    def bounds(self) -> tuple[float, float]:
        return (self.sigma0 - self.delta, self.sigma0 + self.delta)

    def contains(self, w: complex) -> bool:
        lo, hi = self.bounds
        return lo < w.real < hi and w.imag > 0

    def to_dict(self) -> dict:
        return {"l": self.l, "sigma0": self.sigma0, "delta": self.delta, "bounds": list(self.bounds)}


def build_strips(sigma1: float, sigma2: float, delta: float) -> tuple[Strip, ...]:
    """Twelve equally spaced, pairwise disjoint strips between sigma1 and sigma2.

    Centers sit at sigma1 + (l - 1/2) h with h = (sigma2 - sigma1) / 12, so the
    layout fits iff delta < h / 2.
    """
    if not 0.5 < sigma1 < sigma2 < 1.0:
        raise ConfigurationError(f"need 1/2 < sigma1 < sigma2 < 1, got ({sigma1!r}, {sigma2!r})")
    if not delta > 0:
        raise ConfigurationError("delta must be positive")
    h = (sigma2 - sigma1) / N_STRIPS
    if not delta < h / 2:
        raise ConfigurationError(
            f"delta = {delta!r} too large for 12 disjoint strips in ({sigma1!r}, {sigma2!r}); "
            f"need delta < {h / 2!r}"
        )
    strips = tuple(Strip(l, sigma1 + (l - 0.5) * h, delta) for l in range(1, N_STRIPS + 1))
    # rounding can still collapse the margins when the span is near the float spacing
    if not (sigma1 < strips[0].bounds[0] and strips[-1].bounds[1] < sigma2
            and all(a.bounds[1] < b.bounds[0] for a, b in zip(strips, strips[1:]))):
        raise ConfigurationError("strip layout is not resolvable in double precision; widen the span")
    return strips


def strips_disjoint(strips: Sequence[Strip]) -> bool:
    ordered = sorted(strips, key=lambda s: s.sigma0)
    return all(a.bounds[1] < b.bounds[0] for a, b in zip(ordered, ordered[1:]))


@dataclass(frozen=True)
class AdmissibleUSet:
    values: tuple[Decimal, ...]

    def __len__(self) -> int:
        return len(self.values)

    def as_floats(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.values)


@dataclass(frozen=True)
class USetValidation:
    violations: tuple[str, ...]
    u_set: AdmissibleUSet | None = None
    details: tuple[str, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.violations


def _to_decimal(x) -> Decimal:
    if isinstance(x, Decimal):
        return x
    if isinstance(x, float):
        return Decimal(repr(x))  # the shortest decimal that round-trips
    return Decimal(str(x))


def validate_u_set(candidate) -> USetValidation:
    """Check a finite width set against the ordering and Planck-scale margins.

    Values are read as exact decimals (floats through their shortest repr),
    and every comparison is done in decimal arithmetic at 100 digits.
    """
    with localcontext() as ctx:
        ctx.prec = 100
        values = [_to_decimal(x) for x in candidate]
        upper = PI_OVER_12
        found: dict[str, list[str]] = {}

        def flag(name: str, msg: str) -> None:
            found.setdefault(name, []).append(msg)

        if not values:
            flag("empty", "the set has no elements")
        if len(values) > _MAX_COUNT:
            flag("too_many", f"{len(values)} elements exceed 10^43")
        for i, u in enumerate(values):
            if not 0 < u < upper:
                flag("out_of_range", f"U_{i + 1} = {u} is outside (0, pi/12)")
        for i, (a, b) in enumerate(zip(values, values[1:])):
            if not b > a:
                flag("not_increasing", f"U_{i + 2} = {b} does not exceed U_{i + 1} = {a}")
            if not b - a > _MIN_GAP:
                flag("gap", f"U_{i + 2} - U_{i + 1} = {b - a} is not above 1e-34")
        if values:
            if not values[0] > _MIN_MARGIN:
                flag("left_margin", f"U_1 = {values[0]} is not above 1e-43")
            if not upper - values[-1] > _MIN_MARGIN:
                flag("right_margin", f"pi/12 - U_n0 = {upper - values[-1]:.3E} is not above 1e-43")
    if found:
        names = tuple(found)
        return USetValidation(names, None, tuple(m for n in names for m in found[n]))
    return USetValidation((), AdmissibleUSet(tuple(values)))


@dataclass(frozen=True)
class Graft:
    l: int
    n: int
    w: complex
    target: float
    achieved: float
    strip_id: int
    source_hash: str = ""  # content hash of the certificate the target came from
    window: tuple[float, float] = field(default=DEFAULT_WINDOW)

    @property
    def error(self) -> float:
        return abs(self.achieved - self.target)

    def to_dict(self) -> dict:
        return {
            "l": self.l, "n": self.n, "w": [self.w.real, self.w.imag], "target": self.target,
            "achieved": self.achieved, "strip_id": self.strip_id, "source_hash": self.source_hash,
            "window": list(self.window),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Graft":
        return cls(int(d["l"]), int(d["n"]), complex(*d["w"]), float(d["target"]), float(d["achieved"]),
                   int(d["strip_id"]), str(d.get("source_hash", "")), tuple(d.get("window", DEFAULT_WINDOW)))


def _line_roots(sigma: float, target: float, a: float, b: float, step: float,
                cfg: EvalConfig) -> Iterator[float]:
    """Solutions t of |zeta(sigma + i t)| = target on (a, b], in increasing order."""

    def g(t: float) -> float:
        return abs(zeta(complex(sigma, t), cfg)) - target

    def refine(lo: float, hi: float) -> float:
        return brentq(g, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=200)

    n = max(2, int(math.ceil((b - a) / step)))
    grid = a + (b - a) * np.arange(n + 1) / n
    last = -math.inf
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        lo_i, hi_i = max(start - 1, 0), min(stop + 1, n)
        xs = grid[lo_i : hi_i + 1]
        vals = np.abs(zeta_many(sigma + 1j * xs, cfg)) - target
        for j in range(start - lo_i, stop - lo_i):
            ga, gb = vals[j], vals[j + 1]
            roots: list[float] = []
            if ga == 0.0:
                roots.append(float(xs[j]))
            elif ga * gb < 0:
                roots.append(refine(xs[j], xs[j + 1]))
            elif 0 < j and ga * vals[j - 1] > 0 and ga * gb > 0:
                # grid extremum on the far side of the level: look for a hidden dip
                sign = 1.0 if ga > 0 else -1.0
                if sign * ga < sign * vals[j - 1] and sign * ga <= sign * gb:
                    left, right = float(xs[j - 1]), float(xs[j + 1])
                    res = minimize_scalar(lambda t: sign * abs(zeta(complex(sigma, t), cfg)) ** 2,
                                          bounds=(left, right), method="bounded",
                                          options={"xatol": 1e-13})
                    tm = float(res.x)
                    if sign * g(tm) < 0:
                        roots.extend([refine(left, tm), refine(tm, right)])
            for r in roots:
                if r > last and a < r <= b:
                    last = r
                    yield r


def iter_grafts(strip: Strip, target: float, t_window: tuple[float, float] = DEFAULT_WINDOW,
                cfg: EvalConfig = DEFAULT_CONFIG, *, l: int | None = None, n: int = 0,
                graft_tol: float = GRAFT_TOL, t_cap: float = DEFAULT_T_CAP,
                step: float = SCAN_STEP, source_hash: str = "") -> Iterator[Graft]:
    """All grafts in deterministic scan order.

    Windows escalate as (a, b], (b, 2b], (2b, 4b], ... up to ``t_cap``; inside each
    window the strip center line is scanned first, then sigma0 -/+ delta/2.
    """
    if not 0.0 < target < 1.0:
        raise DomainError(f"graft target must lie in (0, 1), got {target!r}")
    a, b = float(t_window[0]), float(t_window[1])
    if not 0 < a < b:
        raise DomainError(f"window must satisfy 0 < t_a < t_b, got {t_window!r}")
    lines = (strip.sigma0, strip.sigma0 - strip.delta / 2, strip.sigma0 + strip.delta / 2)
    lo, hi = a, min(b, max(t_cap, b))
    while True:
        for sigma in lines:
            for t in _line_roots(sigma, target, lo, hi, step, cfg):
                w = complex(sigma, t)
                achieved = abs(zeta(w, cfg))
                if abs(achieved - target) <= graft_tol and strip.contains(w):
                    yield Graft(l if l is not None else strip.l, n, w, float(target), float(achieved),
                                strip.l, source_hash, (a, hi))
        if hi >= t_cap:
            return
        lo, hi = hi, min(2 * hi, t_cap)


def find_graft(strip: Strip, target: float, t_window: tuple[float, float] = DEFAULT_WINDOW,
               cfg: EvalConfig = DEFAULT_CONFIG, **kwargs) -> Graft:
    """First graft in scan order; see :func:`iter_grafts` for the keyword options."""
    for graft in iter_grafts(strip, target, t_window, cfg, **kwargs):
        return graft
    cap = kwargs.get("t_cap", DEFAULT_T_CAP)
    raise NotFoundError(
        f"no solution of |zeta(w)| = {target!r} in strip {strip.l} for t in "
        f"({t_window[0]}, {max(cap, t_window[1])}]; enlarge the window or t_cap"
    )


def build_graft_targets(certs: Mapping, u_set: Sequence[float], l: int, n: int) -> float:
    """Target modulus for graft (l, n): f_l(alpha_0) for l <= 9, f_l(U_n) for l >= 10.

    ``certs`` maps (l, n) to a factorization certificate; ``n`` is 1-based.
    """
    if not 1 <= n <= len(u_set):
        raise DomainError(f"n = {n} outside 1..{len(u_set)}")
    if 1 <= l <= 9:
        try:
            cert = certs[(l, n)]
        except KeyError:
            raise DomainError(f"no certificate for (l, n) = ({l}, {n})") from None
        value = float(eval_f(l, cert.alpha[0]))
    elif 10 <= l <= 12:
        value = float(eval_f(l, float(u_set[n - 1])))
    else:
        raise DomainError(f"l must lie in 1..12, got {l}")
    if not 0.0 < value < 1.0:
        raise DegenerateTargetError(f"target for (l, n) = ({l}, {n}) is {value!r}, not inside (0, 1)")
    return value
