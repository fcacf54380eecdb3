"""Meta-functional equations: certificates with grafted moduli in place of f_l.

Exact form (for the surrogate ladder):

    |zeta(w_l)| prod_r Z~^2(alpha_r) / Z~^2(beta_r) = c0 + sum_j c_j |zeta(w_{9+j})|

Asymptotic form: each Z~^2 ratio is replaced by |zeta(1/2 + i alpha_r)|^2 /
|zeta(1/2 + i beta_r)|^2, i.e. the omega = ln t normalisation is dropped.  The
two differ by the factor prod_r ln(alpha_r) / ln(beta_r), which tends to 1
as L grows; that factor is reported rather than assumed.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .errors import AssemblyError, StaleBindingError
from .factorization import FactorizationCertificate, verify_certificate
from .grafting import GRAFT_TOL, Graft
from .ladder import LadderTable
from .trig_library import eval_f, sinc_decomposition
from .zeta_core import DEFAULT_CONFIG, EvalConfig, hardy_z, z_tilde_sq, zeta

__all__ = [
    "CERT_TOL",
    "ASYMPTOTIC_FUDGE",
    "FORMS",
    "MetaEquationInstance",
    "MetaReport",
    "support",
    "assemble_meta",
    "verify_meta",
    "omega_envelope",
    "omega_trend",
]

CERT_TOL = 1e-6
ASYMPTOTIC_FUDGE = 2.0
FORMS = ("exact", "asymptotic")


def support(eq_id: int) -> tuple[int, ...]:
    """Graft indices referenced by equation ``eq_id``: itself plus nonzero sinc atoms."""
    return (eq_id, *sorted(sinc_decomposition(eq_id).atom_coefficients()))


def _ratio_exact(cert: FactorizationCertificate, cfg: EvalConfig) -> float:
    a = z_tilde_sq(np.array(cert.alpha[1:]), cfg)
    b = z_tilde_sq(np.array(cert.beta), cfg)
    return math.prod((a / b).tolist())


def _ratio_asymptotic(cert: FactorizationCertificate, cfg: EvalConfig) -> float:
    a = hardy_z(np.array(cert.alpha[1:]), cfg) ** 2
    b = hardy_z(np.array(cert.beta), cfg) ** 2
    return math.prod((a / b).tolist())


def _modulus(g: Graft, cfg: EvalConfig) -> float:
    return abs(zeta(g.w, cfg))


@dataclass(frozen=True)
class MetaEquationInstance:
    eq_id: int
    form: str
    cert: FactorizationCertificate
    grafts: tuple[Graft, ...]  # ordered as support(eq_id)
    c0: Fraction
    coefficients: tuple[tuple[int, Fraction], ...]  # (graft index, c) for the sinc atoms
    ratio: float
    lhs_value: float
    rhs_value: float
    residual: float

    @property
    def k(self) -> int:
        return self.cert.k

    @property
    def U(self) -> float:
        return self.cert.U

    @property
    def L(self) -> int:
        return self.cert.L

    def graft(self, l: int) -> Graft:
        for g in self.grafts:
            if g.l == l:
                return g
        raise KeyError(l)

    def coefficient_mass(self) -> float:
        return float(sum(abs(c) for _, c in self.coefficients))

    def binding_hash(self) -> str:
        blob = json.dumps({"cert": self.cert.content_hash(), "grafts": [g.to_dict() for g in self.grafts]},
                          sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_dict(self) -> dict:
        return {
            "eq_id": self.eq_id,
            "form": self.form,
            "certificate": self.cert.to_dict(),
            "grafts": [g.to_dict() for g in self.grafts],
            "c0": str(self.c0),
            "coefficients": {str(l): str(c) for l, c in self.coefficients},
            "ratio": self.ratio,
            "lhs": self.lhs_value,
            "rhs": self.rhs_value,
            "residual": self.residual,
            "binding_hash": self.binding_hash(),
        }

    @classmethod
    def from_bindings(cls, d: Mapping, cfg: EvalConfig = DEFAULT_CONFIG) -> "MetaEquationInstance":
        """Reassemble from a ``to_dict`` payload; numbers are recomputed, not trusted."""
        cert = FactorizationCertificate.from_dict(d["certificate"])
        grafts = [Graft.from_dict(g) for g in d["grafts"]]
        return assemble_meta(int(d["eq_id"]), cert, grafts, cfg, form=d.get("form", "exact"))


def _check_binding(g: Graft, expected: float, source: str | None) -> None:
    if source is not None and g.source_hash and g.source_hash != source:
        raise StaleBindingError(f"graft w_{g.l} was built for another certificate")
    if g.target != expected:
        raise StaleBindingError(
            f"graft w_{g.l} targets {g.target!r} but the bindings require {expected!r}"
        )


def assemble_meta(eq_id: int, cert: FactorizationCertificate, grafts: Iterable[Graft],
                  cfg: EvalConfig = DEFAULT_CONFIG, form: str = "exact") -> MetaEquationInstance:
    """Bind a certificate and its grafts into one meta-functional equation."""
    if form not in FORMS:
        raise AssemblyError(f"form must be one of {FORMS}, got {form!r}")
    if cert.l != eq_id:
        raise AssemblyError(f"certificate is for f_{cert.l}, not equation {eq_id}")
    by_l = {g.l: g for g in grafts}
    needed = support(eq_id)
    missing = [l for l in needed if l not in by_l]
    if missing:
        raise AssemblyError(f"equation {eq_id} needs grafts {list(needed)}; missing {missing}")

    _check_binding(by_l[eq_id], float(eval_f(eq_id, cert.alpha[0])), cert.content_hash())
    for l in needed[1:]:
        _check_binding(by_l[l], float(eval_f(l, cert.U)), None)

    dec = sinc_decomposition(eq_id)
    coeffs = tuple(sorted(dec.atom_coefficients().items()))
    ratio = _ratio_exact(cert, cfg) if form == "exact" else _ratio_asymptotic(cert, cfg)
    lhs = _modulus(by_l[eq_id], cfg) * ratio
    rhs = float(dec.c0) + math.fsum(float(c) * _modulus(by_l[l], cfg) for l, c in coeffs)
    return MetaEquationInstance(eq_id, form, cert, tuple(by_l[l] for l in needed), dec.c0, coeffs,
                                ratio, lhs, rhs, abs(lhs - rhs))


@dataclass
class MetaReport:
    eq_id: int
    form: str
    lhs: float
    rhs: float
    residual: float
    bound: float
    checks: dict[str, bool] = field(default_factory=dict)
    extra: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {"eq_id": self.eq_id, "form": self.form, "lhs": self.lhs, "rhs": self.rhs,
                "residual": self.residual, "bound": self.bound, "ok": self.ok,
                "checks": dict(self.checks), "extra": dict(self.extra)}


def omega_envelope(cert: FactorizationCertificate) -> float:
    """sum_r |I_r| / (t_r ln t_r): first-order bound on |ln alpha_r / ln beta_r - 1| summed over r."""
    total = 0.0
    for lo, hi in cert.intervals:  # I_1 .. I_k
        total += (hi - lo) / (lo * math.log(lo))
    return total


def omega_trend(envelope_small_L: float, envelope_large_L: float) -> bool:
    return envelope_large_L < envelope_small_L


def verify_meta(instance: MetaEquationInstance, form: str = "exact", table: LadderTable | None = None,
                cfg: EvalConfig = DEFAULT_CONFIG, cert_tol: float = CERT_TOL,
                graft_tol: float = GRAFT_TOL, fudge: float = ASYMPTOTIC_FUDGE) -> MetaReport:
    """Recompute an instance from its bindings and check it against its tolerance.

    Exact form: |lhs - rhs| <= cert_tol |rhs| + (P + sum |c|) graft_tol, where P is
    the Z~^2 ratio product multiplying the integrand graft.

    Asymptotic form: the extra residual |lhs_asym - lhs_exact| must stay below
    fudge * k / ln(pi L) * |lhs_exact| and below the exact log-ratio bound.
    """
    cert = instance.cert
    exact = assemble_meta(instance.eq_id, cert, instance.grafts, cfg, form="exact")
    checks: dict[str, bool] = {}
    extra: dict[str, float] = {"ratio": exact.ratio}
    if table is not None:
        cert_report = verify_certificate(cert, table, cfg, rel_tol=cert_tol)
        checks.update({f"certificate_{name}": ok for name, ok in cert_report.checks.items()})
    for g in exact.grafts:
        checks[f"graft_{g.l}"] = abs(abs(zeta(g.w, cfg)) - g.target) <= graft_tol

    if form == "exact":
        bound = cert_tol * abs(exact.rhs_value) + (exact.ratio + exact.coefficient_mass()) * graft_tol
        checks["residual"] = exact.residual <= bound
        return MetaReport(instance.eq_id, "exact", exact.lhs_value, exact.rhs_value, exact.residual,
                          bound, checks, extra)
    if form != "asymptotic":
        raise AssemblyError(f"form must be one of {FORMS}, got {form!r}")

    asym = assemble_meta(instance.eq_id, cert, instance.grafts, cfg, form="asymptotic")
    x = [math.log(a) / math.log(b) - 1.0 for a, b in zip(cert.alpha[1:], cert.beta)]
    log_ratio_bound = math.prod(1.0 + abs(v) for v in x) - 1.0
    drift = abs(asym.lhs_value - exact.lhs_value)
    bound = fudge * cert.k / math.log(cert.pi_L) * abs(exact.lhs_value)
    # rounding slack on the factor: a few ulps per ratio
    slack = 64 * np.finfo(float).eps * cert.k * abs(exact.lhs_value)
    checks["omega_bound"] = drift <= bound
    checks["log_ratio"] = drift <= log_ratio_bound * abs(exact.lhs_value) + slack
    extra.update({"lhs_exact": exact.lhs_value, "extra_residual": drift, "log_ratio_bound": log_ratio_bound,
                  "omega_envelope": omega_envelope(cert), "ratio_asymptotic": asym.ratio})
    return MetaReport(instance.eq_id, "asymptotic", asym.lhs_value, asym.rhs_value, asym.residual,
                      bound, checks, extra)
