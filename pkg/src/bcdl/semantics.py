"""Finite classical models: concept extensions and validity of closed formulas."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ModelError, OpenFormulaError, ParseError, UnknownNameError
from .syntax import (
    And,
    Atom,
    Bot,
    Concept,
    Exists,
    Forall,
    Formula,
    Member,
    Not,
    Or,
    Role,
    Signature,
    Subsume,
    Theory,
    Var,
    format_formula,
    is_closed,
    iter_formula_lines,
)


@dataclass(frozen=True, eq=False)
class Model:
    """A finite interpretation.

    ``ind_val`` keeps the signature's individual order; that order is the
    set N over which information terms quantify.
    """

    domain: frozenset
    ind_val: Mapping[str, object]
    concept_val: Mapping[str, frozenset] = field(default_factory=dict)
    role_val: Mapping[str, frozenset] = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "domain", frozenset(self.domain))
        object.__setattr__(self, "ind_val", dict(self.ind_val))
        object.__setattr__(self, "concept_val", {a: frozenset(v) for a, v in self.concept_val.items()})
        object.__setattr__(self, "role_val", {r: frozenset(v) for r, v in self.role_val.items()})
        if not self.domain:
            raise ModelError("model domain must be non-empty")
        for c, d in self.ind_val.items():
            if d not in self.domain:
                raise ModelError(f"individual {c!r} is mapped outside the domain")
        for a, ext in self.concept_val.items():
            if not ext <= self.domain:
                raise ModelError(f"concept {a!r} has elements outside the domain")
        for r, pairs in self.role_val.items():
            for pair in pairs:
                if len(pair) != 2 or pair[0] not in self.domain or pair[1] not in self.domain:
                    raise ModelError(f"role {r!r} has a pair outside the domain")

    @property
    def individuals(self) -> tuple[str, ...]:
        return tuple(self.ind_val)

    def __eq__(self, other):
        if not isinstance(other, Model):
            return NotImplemented
        return (
            self.domain == other.domain
            and self.ind_val == other.ind_val
            and _nonempty(self.concept_val) == _nonempty(other.concept_val)
            and _nonempty(self.role_val) == _nonempty(other.role_val)
        )

    def __hash__(self):
        return hash((self.domain, tuple(self.ind_val.items())))

    def val(self, c: str):
        try:
            return self.ind_val[c]
        except KeyError:
            raise UnknownNameError(c, "individual") from None

    def successors(self, role: str, e) -> frozenset:
        key = ("succ", role, e)
        if key not in self._cache:
            self._cache[key] = frozenset(b for a, b in self.role_val.get(role, ()) if a == e)
        return self._cache[key]


def _nonempty(m: Mapping) -> dict:
    return {k: v for k, v in m.items() if v}


def extension(m: Model, c: Concept) -> frozenset:
    key = ("ext", c)
    cached = m._cache.get(key)
    if cached is not None:
        return cached
    match c:
        case Atom(a):
            result = m.concept_val.get(a, frozenset())
        case Not(d):
            result = m.domain - extension(m, d)
        case And(l, r):
            result = extension(m, l) & extension(m, r)
        case Or(l, r):
            result = extension(m, l) | extension(m, r)
        case Exists(role, d):
            inner = extension(m, d)
            result = frozenset(e for e in m.domain if m.successors(role, e) & inner)
        case Forall(role, d):
            inner = extension(m, d)
            result = frozenset(e for e in m.domain if m.successors(role, e) <= inner)
        case _:
            raise TypeError(f"not a concept: {c!r}")
    m._cache[key] = result
    return result


def holds(m: Model, k: Formula) -> bool:
    """``M |= K`` for a closed formula K."""
    if not is_closed(k):
        raise OpenFormulaError(f"formula is not closed: {format_formula(k)}")
    match k:
        case Bot():
            return False
        case Role(s, t, r):
            return (m.val(s), m.val(t)) in m.role_val.get(r, ())
        case Member(t, c):
            return m.val(t) in extension(m, c)
        case Subsume(a, c):
            return m.concept_val.get(a, frozenset()) <= extension(m, c)
    raise TypeError(f"not a formula: {k!r}")


def induced_model(theory: Theory, sig: Signature) -> Model:
    """Closed-world reading of the ABox over domain N with identity valuation."""
    concept_val: dict[str, set] = {a: set() for a in sig.concept_names}
    role_val: dict[str, set] = {r: set() for r in sig.roles}
    for k in theory.abox:
        match k:
            case Member(t, Atom(a)):
                concept_val.setdefault(a, set()).add(t)
            case Role(s, t, r):
                role_val.setdefault(r, set()).add((s, t))
    return Model(
        frozenset(sig.individuals),
        {c: c for c in sig.individuals},
        concept_val,
        role_val,
    )


@dataclass(frozen=True)
class Violation:
    axiom: Subsume
    witness: object

    def __str__(self):
        return f"{format_formula(self.axiom)} fails at {self.witness}"


def check_tbox(m: Model, tbox: Iterable[Subsume]) -> list[Violation]:
    """Every subsumption with a counterexample element, in TBox order."""
    report = []
    for ax in tbox:
        bad = m.concept_val.get(ax.atom, frozenset()) - extension(m, ax.concept)
        if bad:
            report.append(Violation(ax, _first(bad, m)))
    return report


def _first(elements: frozenset, m: Model):
    """Smallest element, preferring the order of named individuals."""
    order = {v: i for i, v in enumerate(m.ind_val.values())}
    return min(elements, key=lambda e: (order.get(e, len(order)), str(e)))


# ---------------------------------------------------------------------------
# Model files

_PAIR = re.compile(r"\(\s*([^,\s()]+)\s*,\s*([^,\s()]+)\s*\)")


def parse_model(text: str, sig: Signature | None = None) -> Model:
    domain: list[str] = []
    ind_val: dict[str, str] = {}
    concept_val: dict[str, set] = {}
    role_val: dict[str, set] = {}
    for lineno, line in iter_formula_lines(text):
        head, sep, rest = line.partition(":")
        if not sep:
            raise ParseError(f"expected 'key: values', got {line!r}", line=lineno)
        words = head.split()
        if words == ["domain"]:
            domain.extend(rest.split())
        elif words == ["individuals"]:
            for item in rest.split():
                name, eq, elem = item.partition("=")
                if not eq:
                    raise ParseError(f"expected name=element, got {item!r}", line=lineno)
                ind_val[name] = elem
        elif len(words) == 2 and words[0] == "concept":
            concept_val.setdefault(words[1], set()).update(rest.split())
        elif len(words) == 2 and words[0] == "role":
            pairs = _PAIR.findall(rest)
            if _PAIR.sub("", rest).strip():
                raise ParseError(f"malformed role pairs {rest.strip()!r}", line=lineno)
            role_val.setdefault(words[1], set()).update(pairs)
        else:
            raise ParseError(f"unknown model line {line!r}", line=lineno)
    if sig is not None:
        if not ind_val:
            ind_val = {c: c for c in sig.individuals}
        missing = [c for c in sig.individuals if c not in ind_val]
        if missing:
            raise ModelError(f"individuals without a value: {', '.join(missing)}")
        ind_val = {c: ind_val[c] for c in sig.individuals}
        for a in concept_val:
            if sig.kind_of(a) != "concept_names":
                raise UnknownNameError(a, "concept")
        for r in role_val:
            if sig.kind_of(r) != "roles":
                raise UnknownNameError(r, "role")
    return Model(frozenset(domain), ind_val, concept_val, role_val)


def load_model(path, sig: Signature | None = None) -> Model:
    return parse_model(Path(path).read_text(encoding="utf-8"), sig)


def format_model(m: Model) -> str:
    order = {v: i for i, v in enumerate(m.ind_val.values())}

    def key(e):
        return (order.get(e, len(order)), str(e))

    lines = ["domain: " + " ".join(str(e) for e in sorted(m.domain, key=key))]
    lines.append("individuals: " + " ".join(f"{c}={e}" for c, e in m.ind_val.items()))
    for a in sorted(m.concept_val):
        if m.concept_val[a]:
            lines.append(f"concept {a}: " + " ".join(str(e) for e in sorted(m.concept_val[a], key=key)))
    for r in sorted(m.role_val):
        if m.role_val[r]:
            pairs = sorted(m.role_val[r], key=lambda p: (key(p[0]), key(p[1])))
            lines.append(f"role {r}: " + " ".join(f"({a},{b})" for a, b in pairs))
    return "\n".join(lines) + "\n"
