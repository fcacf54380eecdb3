"""Mean-value certificates for the nine zeta-factorization formulas.

For an integrand f_l, depth k, width U and base [pi L, pi L + U]:

1. I_k is the k-th reverse iterate of the base under the ladder.
2. With W_k(t) = prod_{j<k} Z~^2(phi^j(t)) (the Jacobian of t -> phi^k(t)),
   J_f = int_{I_k} f_l(phi^k(t)) W_k(t) dt and J_1 = int_{I_k} W_k(t) dt.
3. c in I_k solves f_l(phi^k(c)) W_k(c) |I_k| = J_f and c' solves
   W_k(c') |I_k| = J_1; both are the smallest bracketed roots.
4. alpha_r = phi^(k-r)(c), beta_r = phi^(k-r)(c'), alpha_0 = phi^k(c).

Then f_l(alpha_0) prod Z~^2(alpha_r) / Z~^2(beta_r) = J_f / J_1, which is the
mean of f_l over the base, i.e. the closed form of the trig library.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import CertificateError, DegeneratePointError, DomainError, RangeError
from .ladder import IteratedInterval, LadderTable, iterate_forward, phi1, reverse_interval
from .quadrature import adaptive_integrate
from .trig_library import U_MAX, eval_f, mean_value_closed_form
from .zeta_core import DEFAULT_CONFIG, EvalConfig, z_tilde_sq

__all__ = [
    "K_MAX",
    "DEGENERATE_FLOOR",
    "FactorizationCertificate",
    "CertificateReport",
    "MeanValueChain",
    "weight_wk",
    "mean_value_chain",
    "factorize",
    "verify_certificate",
    "product_identity_residual",
]

K_MAX = 3
DEGENERATE_FLOOR = 1e-12
MEAN_VALUE_RULE = "smallest-root"
_SCAN_SUBDIVISION = 4


@dataclass(frozen=True)
class FactorizationCertificate:
    l: int
    k: int
    U: float
    L: int
    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    lhs: float
    rhs: float
    residual: float
    intervals: tuple[tuple[float, float], ...] = ()
    j_f: float = float("nan")
    j_1: float = float("nan")
    mean_value_rule: str = MEAN_VALUE_RULE
    table_checksum: str = ""

    @property
    def relative_residual(self) -> float:
        return self.residual / abs(self.rhs) if self.rhs else self.residual

    @property
    def pi_L(self) -> float:
        return math.pi * self.L

    def to_dict(self) -> dict:
        d = asdict(self)
        d["alpha"] = list(self.alpha)
        d["beta"] = list(self.beta)
        d["intervals"] = [list(iv) for iv in self.intervals]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FactorizationCertificate":
        d = dict(d)
        d["alpha"] = tuple(d["alpha"])
        d["beta"] = tuple(d["beta"])
        d["intervals"] = tuple(tuple(iv) for iv in d.get("intervals", ()))
        return cls(**d)

    def content_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, allow_nan=True)
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class CertificateReport:
    residual: float
    relative_residual: float
    checks: dict[str, bool] = field(default_factory=dict)
    details: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    @property
    def failures(self) -> list[str]:
        return [name for name, passed in self.checks.items() if not passed]


@dataclass(frozen=True)
class MeanValueChain:
    """Points phi^(k-r)(c) for r = 0..k, plus the integrals that fixed c."""

    points: tuple[float, ...]  # index r -> phi^(k-r)(c); points[0] is the terminal image
    j_value: float
    intervals: tuple[IteratedInterval, ...]


def _forward_chain(table: LadderTable, t, k: int) -> list:
    chain = [np.asarray(t, dtype=float)]
    for depth in range(k):
        try:
            chain.append(np.asarray(phi1(table, chain[-1])))
        except DomainError as exc:
            raise RangeError(f"forward iterate {depth + 1} leaves the ladder table") from exc
    return chain


def weight_wk(table: LadderTable, t, k: int):
    """prod_{j=0}^{k-1} Z~^2(phi^j(t)), the k-fold substitution Jacobian."""
    if k < 1:
        raise DomainError("k must be >= 1")
    chain = _forward_chain(table, t, k - 1)
    w = np.ones_like(chain[0])
    for x in chain:
        w = w * z_tilde_sq(x, table.cfg)
    return float(w) if np.ndim(w) == 0 else w


def _check_args(k: int, U: float, k_max: int) -> None:
    if not 1 <= k <= k_max:
        raise DomainError(f"k must lie in 1..{k_max}, got {k}")
    if not 0.0 < U < U_MAX:
        raise DomainError(f"U must lie in (0, pi/12), got {U!r}")


def _reverse_intervals(table: LadderTable, U: float, L: int, k: int) -> tuple[IteratedInterval, ...]:
    pi_L = math.pi * L
    base = IteratedInterval(0, pi_L, pi_L + U)
    out = [base]
    for r in range(1, k + 1):
        out.append(reverse_interval(table, base, r))
    return tuple(out)


def _scan_roots(g, lo: float, hi: float, step: float):
    """Yield sign-change brackets of g on [lo, hi], left to right."""
    n = max(32, int(math.ceil((hi - lo) / step)))
    xs = np.linspace(lo, hi, n + 1)
    gs = g(xs)
    for i in range(n):
        a, b = gs[i], gs[i + 1]
        if a == 0.0:
            yield xs[i], xs[i]
        elif a * b < 0:
            yield xs[i], xs[i + 1]


def mean_value_chain(f, k: int, U: float, L: int, table: LadderTable,
                     cfg: EvalConfig | None = None, skip=None) -> MeanValueChain:
    """Mean-value point of f(phi^k(t)) W_k(t) on I_k and its forward chain.

    ``f`` is a vectorized function of the terminal point phi^k(t).  ``skip``
    is an optional predicate on the chain that rejects a root and moves on to
    the next bracket (used to avoid degenerate denominators).
    """
    cfg = cfg or table.cfg
    intervals = _reverse_intervals(table, U, L, k)
    ik = intervals[-1]

    def terms(t):
        chain = _forward_chain(table, t, k)
        w = np.ones_like(chain[0])
        for x in chain[:-1]:
            w = w * z_tilde_sq(x, table.cfg)
        return f(chain[-1]) * w

    breaks = table.grid[(table.grid > ik.lo) & (table.grid < ik.hi)]
    j_value, _ = adaptive_integrate(terms, ik.lo, ik.hi, breaks=breaks, rel_tol=cfg.quadrature_rel_tol)
    length = ik.length

    def g(t):
        return terms(np.asarray(t, dtype=float)) * length - j_value

    def g_scalar(t):
        return float(g(np.array([t]))[0])

    step = table.resolution / _SCAN_SUBDIVISION
    for attempt in range(3):
        for a, b in _scan_roots(g, ik.lo, ik.hi, step):
            c = a if a == b else brentq(g_scalar, a, b, xtol=cfg.rootfind_abs_tol,
                                        rtol=4 * np.finfo(float).eps, maxiter=200)
            chain = [float(x) for x in _forward_chain(table, c, k)]
            points = tuple(reversed(chain))  # points[r] = phi^(k-r)(c)
            if skip is not None and skip(points):
                continue
            return MeanValueChain(points, j_value, intervals)
        step /= 8
    raise CertificateError(f"no admissible mean-value point found on I_{k} = [{ik.lo}, {ik.hi}]")


def _beta_chain(k: int, U: float, L: int, table: LadderTable, cfg: EvalConfig) -> MeanValueChain:
    def degenerate(points):
        zt = z_tilde_sq(np.array(points[1:]), table.cfg)
        return bool(np.any(zt < DEGENERATE_FLOOR))

    return mean_value_chain(lambda x: np.ones_like(x), k, U, L, table, cfg, skip=degenerate)


def _lhs(l_value: float, alpha: tuple, beta: tuple, cfg: EvalConfig) -> float:
    za = z_tilde_sq(np.array(alpha[1:]), cfg)
    zb = z_tilde_sq(np.array(beta), cfg)
    out = l_value
    for a, b in zip(za.tolist(), zb.tolist()):
        out *= a / b
    return out


def factorize(l: int, k: int, U: float, L: int, table: LadderTable,
              cfg: EvalConfig | None = None, k_max: int = K_MAX) -> FactorizationCertificate:
    """Construct the certificate for formula l at depth k over [pi L, pi L + U]."""
    if not 1 <= l <= 9:
        raise DomainError(f"l must lie in 1..9, got {l}")
    _check_args(k, U, k_max)
    cfg = cfg or table.cfg

    alpha_chain = mean_value_chain(lambda x: eval_f(l, x), k, U, L, table, cfg)
    beta_chain = _beta_chain(k, U, L, table, cfg)
    alpha = alpha_chain.points
    beta = beta_chain.points[1:]
    lhs = _lhs(eval_f(l, alpha[0]), alpha, beta, table.cfg)
    rhs = mean_value_closed_form(l, U)
    return FactorizationCertificate(
        l=l, k=k, U=float(U), L=int(L),
        alpha=alpha, beta=beta,
        lhs=lhs, rhs=rhs, residual=abs(lhs - rhs),
        intervals=tuple((iv.lo, iv.hi) for iv in alpha_chain.intervals[1:]),
        j_f=alpha_chain.j_value, j_1=beta_chain.j_value,
        table_checksum=table.checksum(),
    )


def verify_certificate(cert: FactorizationCertificate, table: LadderTable,
                       cfg: EvalConfig | None = None, rel_tol: float = 1e-6) -> CertificateReport:
    """Recompute lhs/rhs from the stored points and check every invariant."""
    cfg = cfg or table.cfg
    k = cert.k
    alpha, beta = tuple(cert.alpha), tuple(cert.beta)
    report = CertificateReport(residual=float("nan"), relative_residual=float("nan"))
    checks = report.checks

    checks["shape"] = len(alpha) == k + 1 and len(beta) == k
    if not checks["shape"]:
        report.details["shape"] = f"expected {k + 1} alphas and {k} betas"
        return report

    lhs = _lhs(eval_f(cert.l, alpha[0]), alpha, beta, table.cfg)
    rhs = mean_value_closed_form(cert.l, cert.U)
    report.residual = abs(lhs - rhs)
    report.relative_residual = report.residual / abs(rhs)
    checks["residual"] = report.residual <= rel_tol * abs(rhs)

    pi_L = math.pi * cert.L
    checks["membership_alpha0"] = pi_L < alpha[0] < pi_L + cert.U
    intervals = _reverse_intervals(table, cert.U, cert.L, k)
    bad = [r for r in range(1, k + 1) if not intervals[r].contains(alpha[r])]
    checks["membership_alpha"] = not bad
    if bad:
        report.details["membership_alpha"] = f"alpha_r outside I_r for r in {bad}"
    bad = [r for r in range(1, k + 1) if not intervals[r].contains(beta[r - 1])]
    checks["membership_beta"] = not bad
    if bad:
        report.details["membership_beta"] = f"beta_r outside I_r for r in {bad}"

    def chain_gap(points, r_from):
        worst = 0.0
        for r in range(r_from, len(points)):
            img = phi1(table, points[r])
            gap = abs(img - points[r - 1])
            worst = max(worst, gap / (8 * np.spacing(abs(points[r - 1]))))
        return worst

    checks["chain_alpha"] = chain_gap(alpha, 1) <= 1.0
    # beta_0 is not part of the certificate; the chain starts at beta_1.
    checks["chain_beta"] = chain_gap((float("nan"),) + beta, 2) <= 1.0 if k >= 2 else True
    return report


def product_identity_residual(cert1: FactorizationCertificate, cert2: FactorizationCertificate,
                              cfg: EvalConfig = DEFAULT_CONFIG) -> float:
    """Relative residual of f1(a0) prod Z~^2(a^1) + f2(a0) prod Z~^2(a^2) = prod Z~^2(beta)."""
    if (cert1.l, cert2.l) != (1, 2) or (cert1.k, cert1.U, cert1.L) != (cert2.k, cert2.U, cert2.L):
        raise DomainError("need certificates for l = 1 and l = 2 at identical (k, U, L)")
    num1 = float(np.prod(z_tilde_sq(np.array(cert1.alpha[1:]), cfg)))
    num2 = float(np.prod(z_tilde_sq(np.array(cert2.alpha[1:]), cfg)))
    den = float(np.prod(z_tilde_sq(np.array(cert1.beta), cfg)))
    lhs = eval_f(1, cert1.alpha[0]) * num1 + eval_f(2, cert2.alpha[0]) * num2
    return abs(lhs - den) / den
