"""Exact symbolic engine for combining and eliminating meta-functional equations.

Atoms are opaque symbols:

- ``P(l,k)``  the product term |zeta(w_l)| prod Z~^2(alpha_r) / Z~^2(beta_r),
- ``G(l,k)``  the graft modulus |zeta(w_l)| for l <= 9 (its target depends on k),
- ``G(l)``    the graft modulus for the sinc atoms l = 10, 11, 12,
- ``N(l,k)``  prod Z~^2(alpha_r^{l,k}),
- ``D(k)``    prod Z~^2(beta_r^{k}).

A :class:`LinearRelation` means ``sum c * atom + constant = 0`` with exact
rational coefficients.  A :class:`RationalRelation` is an equality of two
expression trees built from +, *, / and rational constants.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .errors import DomainError, EliminationError, SubstitutionError
from .trig_library import sinc_decomposition

__all__ = [
    "Atom",
    "P",
    "G",
    "N",
    "D",
    "parse_atom",
    "LinearRelation",
    "Const",
    "Sym",
    "Add",
    "Mul",
    "Div",
    "RationalRelation",
    "relation_of",
    "combine",
    "eliminate",
    "product_identity",
    "substitute_denominator",
    "unsubstitute",
    "canonical",
    "numeric_eval",
    "propagated_tolerance",
    "run_script",
]

_KIND_ORDER = {"P": 0, "G": 1, "N": 2, "D": 3}
_DENOMINATOR_FLOOR = 1e-12


@dataclass(frozen=True, order=False)
class Atom:
    kind: str  # "P", "G", "N" or "D"
    l: int = 0
    k: int = 0

    def __post_init__(self):
        if self.kind not in _KIND_ORDER:
            raise DomainError(f"unknown atom kind {self.kind!r}")

    @property
    def sort_key(self) -> tuple[int, int, int]:
        return (_KIND_ORDER[self.kind], self.l, self.k)

    def __str__(self) -> str:
        if self.kind == "D":
            return f"D({self.k})"
        if self.kind == "G" and self.l >= 10:
            return f"G({self.l})"
        return f"{self.kind}({self.l},{self.k})"


def P(l: int, k: int) -> Atom:
    return Atom("P", l, k)


def G(l: int, k: int = 0) -> Atom:
    return Atom("G", l, 0 if l >= 10 else k)


def N(l: int, k: int) -> Atom:
    return Atom("N", l, k)


def D(k: int) -> Atom:
    return Atom("D", 0, k)


_ATOM_RE = re.compile(r"^([PGND])\(?(\d+)(?:,\s*(\d+))?\)?$")


def parse_atom(text: str) -> Atom:
    """Parse ``P(3,2)``, ``G(1,2)``, ``G11``, ``G(11)``, ``N(1,2)`` or ``D(2)``."""
    m = _ATOM_RE.match(text.strip())
    if not m:
        raise DomainError(f"cannot parse atom {text!r}")
    kind, a, b = m.group(1), int(m.group(2)), m.group(3)
    if kind == "D":
        if b is not None:
            raise DomainError(f"D takes one index, got {text!r}")
        return D(a)
    if kind == "G" and a >= 10:
        return G(a)
    if b is None:
        raise DomainError(f"{kind}({a}, k) needs a depth index k, got {text!r}")
    return Atom(kind, a, int(b))


def _fmt_fraction(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


@dataclass(frozen=True)
class LinearRelation:
    """``sum terms[a] * a + constant = 0``.

    ``sources`` maps an originating equation key ``(eq_id, k)`` to the absolute
    weight with which its residual enters this relation.
    """

    terms: tuple[tuple[Atom, Fraction], ...] = ()
    constant: Fraction = Fraction(0)
    sources: tuple[tuple[tuple[int, int], Fraction], ...] = ()

    @classmethod
    def build(cls, terms: Mapping[Atom, Fraction], constant=Fraction(0),
              sources: Mapping[tuple[int, int], Fraction] | None = None) -> "LinearRelation":
        clean = sorted(((a, Fraction(c)) for a, c in terms.items() if c != 0), key=lambda p: p[0].sort_key)
        src = sorted(((key, Fraction(w)) for key, w in (sources or {}).items() if w != 0))
        return cls(tuple(clean), Fraction(constant), tuple(src))

    @property
    def coefficients(self) -> dict[Atom, Fraction]:
        return dict(self.terms)

    @property
    def source_weights(self) -> dict[tuple[int, int], Fraction]:
        return dict(self.sources)

    def coefficient(self, atom: Atom) -> Fraction:
        return self.coefficients.get(atom, Fraction(0))

    def is_trivial(self) -> bool:
        return not self.terms and self.constant == 0

    def scaled(self, factor: Fraction) -> "LinearRelation":
        factor = Fraction(factor)
        return LinearRelation.build({a: c * factor for a, c in self.terms}, self.constant * factor,
                                    {s: w * abs(factor) for s, w in self.sources})

    def normalized(self) -> "LinearRelation":
        """Integer coefficients with gcd 1; the first P atom (else first atom) positive."""
        values = [c for _, c in self.terms] + ([self.constant] if self.constant else [])
        if not values:
            return self
        lcm = 1
        for v in values:
            lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
        ints = [int(v * lcm) for v in values]
        g = 0
        for v in ints:
            g = math.gcd(g, abs(v))
        factor = Fraction(lcm, g)
        lead = next((c for a, c in self.terms if a.kind == "P"), None)
        if lead is None:
            lead = self.terms[0][1] if self.terms else self.constant
        if lead < 0:
            factor = -factor
        return self.scaled(factor)

    def canonical(self) -> str:
        """Normalized text, e.g. ``3*P(3,2) + 3*P(4,2) - 2*P(5,2) - 2*P(6,2) - 1 = 0``."""
        rel = self.normalized()
        if rel.is_trivial():
            return "0 = 0"
        parts: list[str] = []
        items = [(str(a), c) for a, c in rel.terms] + ([("", rel.constant)] if rel.constant else [])
        for i, (name, c) in enumerate(items):
            mag = abs(c)
            body = _fmt_fraction(mag) if not name else (name if mag == 1 else f"{_fmt_fraction(mag)}*{name}")
            if i == 0:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append(("- " if c < 0 else "+ ") + body)
        return " ".join(parts) + " = 0"

    def equation_text(self) -> str:
        """Both sides with positive coefficients: terms with c > 0 on the left."""
        left = [(a, c) for a, c in self.terms if c > 0]
        right = [(a, -c) for a, c in self.terms if c < 0]
        const_left = self.constant if self.constant > 0 else Fraction(0)
        const_right = -self.constant if self.constant < 0 else Fraction(0)

        def side(items, const):
            parts = [str(a) if c == 1 else f"{_fmt_fraction(c)}*{a}" for a, c in items]
            if const:
                parts.append(_fmt_fraction(const))
            return " + ".join(parts) if parts else "0"

        return f"{side(left, const_left)} = {side(right, const_right)}"

    def __str__(self) -> str:
        return self.canonical()


def relation_of(eq_id: int, k: int) -> LinearRelation:
    """P(eq,k) - c0 - sum c_j G(9+j) = 0 with exact coefficients."""
    if not 1 <= eq_id <= 9:
        raise DomainError(f"equation index must be in 1..9, got {eq_id}")
    if k < 1:
        raise DomainError("k must be >= 1")
    dec = sinc_decomposition(eq_id)
    terms = {P(eq_id, k): Fraction(1)}
    for l, c in dec.atom_coefficients().items():
        terms[G(l)] = -c
    return LinearRelation.build(terms, -dec.c0, {(eq_id, k): Fraction(1)})


def combine(a: LinearRelation, b: LinearRelation, ca, cb) -> LinearRelation:
    ca, cb = Fraction(ca), Fraction(cb)
    terms: dict[Atom, Fraction] = {}
    for rel, c in ((a, ca), (b, cb)):
        for atom, v in rel.terms:
            terms[atom] = terms.get(atom, Fraction(0)) + c * v
    sources: dict[tuple[int, int], Fraction] = {}
    for rel, c in ((a, ca), (b, cb)):
        for key, w in rel.sources:
            sources[key] = sources.get(key, Fraction(0)) + abs(c) * w
    return LinearRelation.build(terms, ca * a.constant + cb * b.constant, sources)


def eliminate(atom: Atom, a: LinearRelation, b: LinearRelation) -> LinearRelation:
    """The normalized combination of ``a`` and ``b`` free of ``atom``."""
    xa, xb = a.coefficient(atom), b.coefficient(atom)
    if xa == 0 or xb == 0:
        where = "first" if xa == 0 else "second"
        raise EliminationError(f"{atom} does not occur in the {where} relation")
    return combine(a, b, xb, -xa).normalized()


# expression trees --------------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Sym:
    atom: Atom


@dataclass(frozen=True)
class Add:
    items: tuple


@dataclass(frozen=True)
class Mul:
    items: tuple


@dataclass(frozen=True)
class Div:
    num: "Expr"
    den: "Expr"


Expr = Union[Const, Sym, Add, Mul, Div]


def render(e: Expr) -> str:
    if isinstance(e, Const):
        return _fmt_fraction(e.value)
    if isinstance(e, Sym):
        return str(e.atom)
    if isinstance(e, Add):
        return " + ".join(render(x) for x in e.items)
    if isinstance(e, Mul):
        return "*".join(f"({render(x)})" if isinstance(x, (Add, Div)) else render(x) for x in e.items)
    return f"({render(e.num)})/({render(e.den)})"


def _rank(e: Expr) -> int:
    return {Const: 0, Sym: 1, Mul: 2, Div: 3, Add: 4}[type(e)]


def _sort_key(e: Expr):
    if isinstance(e, Sym):
        return (1, e.atom.sort_key, "")
    return (_rank(e), (), render(e))


def canonical(e: Expr) -> Expr:
    """Flatten, fold constants and sort operands so equal trees render identically."""
    if isinstance(e, (Const, Sym)):
        return e
    if isinstance(e, Div):
        num, den = canonical(e.num), canonical(e.den)
        if isinstance(den, Const):
            if den.value == 0:
                raise DomainError("division by the constant 0")
            return canonical(Mul((Const(1 / den.value), num)))
        return Div(num, den)
    cls = type(e)
    flat: list[Expr] = []
    for x in e.items:
        x = canonical(x)
        flat.extend(x.items if isinstance(x, cls) else (x,))
    consts = [x.value for x in flat if isinstance(x, Const)]
    rest = sorted((x for x in flat if not isinstance(x, Const)), key=_sort_key)
    if cls is Add:
        c = sum(consts, Fraction(0))
        items = rest + ([Const(c)] if c != 0 else [])
        empty = Const(Fraction(0))
    else:
        c = math.prod(consts, start=Fraction(1))
        if c == 0:
            return Const(Fraction(0))
        items = ([Const(c)] if c != 1 else []) + rest
        empty = Const(Fraction(1))
    if not items:
        return empty
    return items[0] if len(items) == 1 else cls(tuple(items))


@dataclass(frozen=True)
class RationalRelation:
    lhs: Expr
    rhs: Expr
    sources: tuple[tuple[tuple[int, int], Fraction], ...] = ()

    def canonical(self) -> "RationalRelation":
        return RationalRelation(canonical(self.lhs), canonical(self.rhs), self.sources)

    def text(self) -> str:
        c = self.canonical()
        return f"{render(c.lhs)} = {render(c.rhs)}"

    @property
    def source_weights(self) -> dict[tuple[int, int], Fraction]:
        return dict(self.sources)

    def __str__(self) -> str:
        return self.text()


def product_identity(k: int) -> RationalRelation:
    """D(k) = G(1,k) N(1,k) + G(2,k) N(2,k), from adding the first two equations at depth k.

    The identity is D(k) (P(1,k) + P(2,k) - 1) = 0 after clearing, so its
    residual is inherited from equations 1 and 2.
    """
    rhs = Add((Mul((Sym(G(1, k)), Sym(N(1, k)))), Mul((Sym(G(2, k)), Sym(N(2, k))))))
    return RationalRelation(Sym(D(k)), rhs, (((1, k), Fraction(1)), ((2, k), Fraction(1))))


def _identity_for(identities: Iterable[RationalRelation], k: int) -> Expr:
    for ident in identities:
        if ident.lhs == Sym(D(k)):
            return ident.rhs
    raise SubstitutionError(f"no denominator identity for k = {k}")


def _grouped_side(items: list[tuple[Atom, Fraction]], constant: Fraction, term) -> Expr:
    # terms sharing a coefficient are factored: 3 (x + y) rather than 3 x + 3 y
    groups: dict[Fraction, list[Expr]] = {}
    for atom, c in items:
        groups.setdefault(c, []).append(term(atom))
    parts: list[Expr] = []
    for c, xs in groups.items():
        body = xs[0] if len(xs) == 1 else Add(tuple(xs))
        parts.append(body if c == 1 else Mul((Const(c), body)))
    if constant:
        parts.append(Const(constant))
    if not parts:
        return Const(Fraction(0))
    return parts[0] if len(parts) == 1 else Add(tuple(parts))


def substitute_denominator(target: LinearRelation, identities: Iterable[RationalRelation]) -> RationalRelation:
    """Write each P(l,k) as G(l,k) N(l,k) / D(k) and expand D(k) through its identity.

    Terms with positive coefficients form one side and the negated rest the
    other; the side carrying the constant is placed on the left.
    """
    identities = list(identities)
    if any(a.kind != "P" for a, _ in target.terms):
        raise SubstitutionError("only relations purely in product terms can be substituted")
    used: dict[int, Expr] = {}

    def term(atom: Atom) -> Expr:
        if atom.k not in used:
            used[atom.k] = _identity_for(identities, atom.k)
        return Div(Mul((Sym(G(atom.l, atom.k)), Sym(N(atom.l, atom.k)))), used[atom.k])

    pos = [(a, c) for a, c in target.terms if c > 0]
    neg = [(a, -c) for a, c in target.terms if c < 0]
    left = _grouped_side(pos, max(target.constant, Fraction(0)), term)
    right = _grouped_side(neg, max(-target.constant, Fraction(0)), term)
    if target.constant < 0:
        left, right = right, left

    sources = dict(target.sources)
    mass = sum((abs(c) for _, c in target.terms), Fraction(0))
    for k in sorted(used):
        # |P/(P1 + P2) - P| <= 2 |P| |P1 + P2 - 1| with |P| <= 1 while |P1 + P2 - 1| <= 1/2
        for key in ((1, k), (2, k)):
            sources[key] = sources.get(key, Fraction(0)) + 2 * mass
    return RationalRelation(left, right, tuple(sorted(sources.items())))


def _linearize(e: Expr, dens: Mapping[str, int]) -> dict:
    # Maps an expression back to {Atom | None: coefficient}; None is the constant slot.
    e = canonical(e)
    if isinstance(e, Const):
        return {None: e.value}
    if isinstance(e, Add):
        out: dict = {}
        for x in e.items:
            for key, v in _linearize(x, dens).items():
                out[key] = out.get(key, Fraction(0)) + v
        return out
    if isinstance(e, Mul) and isinstance(e.items[0], Const):
        c = e.items[0].value
        rest = e.items[1] if len(e.items) == 2 else Mul(e.items[1:])
        return {key: c * v for key, v in _linearize(rest, dens).items()}
    if isinstance(e, Div):
        k = dens.get(render(e.den))
        num = e.num
        if k is not None and isinstance(num, Mul) and len(num.items) == 2:
            g, n = num.items
            if (isinstance(g, Sym) and isinstance(n, Sym) and g.atom.kind == "G" and n.atom.kind == "N"
                    and g.atom.l == n.atom.l and g.atom.k == n.atom.k == k):
                return {P(g.atom.l, k): Fraction(1)}
    raise SubstitutionError(f"cannot map {render(e)} back to product terms")


def unsubstitute(rel: RationalRelation, identities: Iterable[RationalRelation]) -> LinearRelation:
    """Inverse of :func:`substitute_denominator`: fold G N / D back into P atoms."""
    dens = {render(canonical(i.rhs)): i.lhs.atom.k for i in identities}
    left, right = _linearize(rel.lhs, dens), _linearize(rel.rhs, dens)
    terms: dict[Atom, Fraction] = {}
    for key in set(left) | set(right):
        terms[key] = left.get(key, Fraction(0)) - right.get(key, Fraction(0))
    constant = terms.pop(None, Fraction(0))
    return LinearRelation.build(terms, constant).normalized()


# numerics --------------------------------------------------------------------------------------


def _eval(e: Expr, binding: Mapping[Atom, float]) -> float:
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Sym):
        try:
            return float(binding[e.atom])
        except KeyError:
            raise DomainError(f"atom {e.atom} is not bound") from None
    if isinstance(e, Add):
        return math.fsum(_eval(x, binding) for x in e.items)
    if isinstance(e, Mul):
        return math.prod(_eval(x, binding) for x in e.items)
    den = _eval(e.den, binding)
    if abs(den) < _DENOMINATOR_FLOOR:
        raise DomainError(f"denominator {render(e.den)} = {den!r} is numerically zero")
    return _eval(e.num, binding) / den


def numeric_eval(rel: LinearRelation | RationalRelation, binding: Mapping[Atom, float]) -> float:
    """lhs - rhs of a relation under ``binding`` (for a linear relation, the zero-form value)."""
    if isinstance(rel, LinearRelation):
        vals = []
        for atom, c in rel.terms:
            if atom not in binding:
                raise DomainError(f"atom {atom} is not bound")
            vals.append(float(c) * float(binding[atom]))
        return math.fsum(vals + [float(rel.constant)])
    return _eval(rel.lhs, binding) - _eval(rel.rhs, binding)


def propagated_tolerance(rel: LinearRelation | RationalRelation,
                         residuals: Mapping[tuple[int, int], float]) -> float:
    """sum over source equations of weight * residual."""
    total = []
    for key, w in rel.sources:
        if key not in residuals:
            raise DomainError(f"no residual supplied for equation {key}")
        total.append(float(w) * float(residuals[key]))
    return math.fsum(total)


# derivation scripts ----------------------------------------------------------------------------


@dataclass
class ScriptResult:
    env: dict = field(default_factory=dict)
    printed: list[str] = field(default_factory=list)


def _show(value) -> str:
    if isinstance(value, LinearRelation):
        return value.equation_text()
    return value.text()


def run_script(text: str) -> ScriptResult:
    """Run a derivation script.

    Commands (one per line, ``#`` starts a comment)::

        E3 = eq 3 k 2
        S1 = combine 1 E3 1 E4
        C = eliminate G11 S1 S2
        I2 = identity k 2
        R = substitute C I2
        B = unsubstitute R I2
        print C          # both sides, positive coefficients
        canonical C      # normalized '... = 0' form
    """
    result = ScriptResult()
    env = result.env

    def get(name: str):
        if name not in env:
            raise DomainError(f"undefined name {name!r}")
        return env[name]

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "print" and len(tok) == 2:
                result.printed.append(_show(get(tok[1])))
                continue
            if tok[0] == "canonical" and len(tok) == 2:
                value = get(tok[1])
                result.printed.append(value.canonical() if isinstance(value, LinearRelation) else value.text())
                continue
            if len(tok) < 3 or tok[1] != "=":
                raise DomainError("expected 'NAME = command ...' or 'print NAME'")
            name, cmd, args = tok[0], tok[2], tok[3:]
            if cmd == "eq" and len(args) == 3 and args[1] == "k":
                env[name] = relation_of(int(args[0]), int(args[2]))
            elif cmd == "combine" and len(args) == 4:
                env[name] = combine(get(args[1]), get(args[3]), Fraction(args[0]), Fraction(args[2]))
            elif cmd == "eliminate" and len(args) == 3:
                env[name] = eliminate(parse_atom(args[0]), get(args[1]), get(args[2]))
            elif cmd == "identity" and len(args) == 2 and args[0] == "k":
                env[name] = product_identity(int(args[1]))
            elif cmd == "substitute" and len(args) >= 2:
                env[name] = substitute_denominator(get(args[0]), [get(a) for a in args[1:]])
            elif cmd == "unsubstitute" and len(args) >= 2:
                env[name] = unsubstitute(get(args[0]), [get(a) for a in args[1:]])
            else:
                raise DomainError(f"unknown command {' '.join(tok[2:])!r}")
        except (DomainError, EliminationError, SubstitutionError, ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"line {lineno}: {exc}") from exc
    return result
