"""Information terms: the spaces IT_N(K), enumeration and realizability.

Literal syntax (whitespace-insensitive)::

    tt | (a, b) | tag k a | wit d a | fun { d1 -> a1; d2 -> a2 }

The notation of printed examples, where pairs, tags and witnesses all look
like ``(x, y)``, is produced by :func:`format_compact` and read back by
:func:`parse_compact`, which needs the formula to disambiguate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import IllFormedTermError, ITOverflow, OpenFormulaError, ParseError, UnknownNameError
from .semantics import Model, holds
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
    TokenStream,
    format_formula,
    is_closed,
)

DEFAULT_CAP = 10**6


@dataclass(frozen=True)
class Tt:
    def __str__(self):
        return "tt"


TT = Tt()


@dataclass(frozen=True)
class Pair:
    first: "InfoTerm"
    second: "InfoTerm"


@dataclass(frozen=True)
class Tag:
    k: int
    arg: "InfoTerm"


@dataclass(frozen=True)
class Wit:
    d: str
    arg: "InfoTerm"


@dataclass(frozen=True)
class Fun:
    """Extensional function table, entries in signature order."""

    table: tuple[tuple[str, "InfoTerm"], ...]

    @classmethod
    def of(cls, mapping: Mapping[str, "InfoTerm"] | Iterable[tuple[str, "InfoTerm"]]) -> "Fun":
        items = mapping.items() if isinstance(mapping, Mapping) else mapping
        return cls(tuple(items))

    def keys(self) -> tuple[str, ...]:
        return tuple(d for d, _ in self.table)

    def at(self, d: str) -> "InfoTerm":
        for key, value in self.table:
            if key == d:
                return value
        raise KeyError(d)


@dataclass(frozen=True)
class PVar:
    """Pattern variable (decision tables only); ``?`` alone is anonymous."""

    name: str


InfoTerm = Union[Tt, Pair, Tag, Wit, Fun]
ITTuple = tuple  # tuple[InfoTerm, ...] aligned with a list of closed formulas


# ---------------------------------------------------------------------------
# Formula shapes


def _shape(k: Formula):
    """Classify a closed formula by the IT clause that applies to it."""
    match k:
        case Bot() | Role():
            return ("simple",)
        case Member(_, Atom() | Not()):
            return ("simple",)
        case Member(c, And(l, r)):
            return ("and", Member(c, l), Member(c, r))
        case Member(c, Or(l, r)):
            return ("or", Member(c, l), Member(c, r))
        case Member(c, Exists(role, d)):
            return ("exists", c, role, d)
        case Member(c, Forall(role, d)):
            return ("forall", c, role, d)
        case Subsume(a, d):
            return ("sub", a, d)
    raise TypeError(f"not a formula: {k!r}")


def _require_closed(k: Formula):
    if not is_closed(k):
        raise OpenFormulaError(f"formula is not closed: {format_formula(k)}")


def _individuals(sig) -> tuple[str, ...]:
    return sig.individuals


# ---------------------------------------------------------------------------
# Membership


def belongs(eta, k: Formula, sig) -> bool:
    """``eta in IT_N(K)``; ``sig`` is anything with an ``individuals`` tuple."""
    _require_closed(k)
    return _belongs(eta, k, tuple(_individuals(sig)))


def _belongs(eta, k: Formula, n: tuple[str, ...]) -> bool:
    shape = _shape(k)
    match shape[0]:
        case "simple":
            return isinstance(eta, Tt)
        case "and":
            return isinstance(eta, Pair) and _belongs(eta.first, shape[1], n) and _belongs(eta.second, shape[2], n)
        case "or":
            return isinstance(eta, Tag) and eta.k in (1, 2) and _belongs(eta.arg, shape[eta.k], n)
        case "exists":
            _, _, _, d = shape
            return isinstance(eta, Wit) and eta.d in n and _belongs(eta.arg, Member(eta.d, d), n)
        case "forall" | "sub":
            body = shape[3] if shape[0] == "forall" else shape[2]
            return (
                isinstance(eta, Fun)
                and eta.keys() == n
                and all(_belongs(v, Member(d, body), n) for d, v in eta.table)
            )
    return False


def belongs_tuple(gamma: Sequence, formulas: Sequence[Formula], sig) -> int | None:
    """Index of the first position where ``gamma`` fails, or None."""
    if len(gamma) != len(formulas):
        return min(len(gamma), len(formulas))
    for i, (eta, k) in enumerate(zip(gamma, formulas)):
        if not belongs(eta, k, sig):
            return i
    return None


# ---------------------------------------------------------------------------
# Cardinality and enumeration


def space_size(k: Formula, sig) -> int:
    """|IT_N(K)|, computed arithmetically."""
    _require_closed(k)
    return _size(_concept_key(k), len(_individuals(sig)))


def _concept_key(k: Formula):
    # IT_N(c:C) does not depend on c, so spaces are keyed by the concept.
    match k:
        case Member(_, c):
            return c
        case Subsume(_, c):
            return Forall("", c)
        case _:
            return None


@lru_cache(maxsize=None)
def _size(c, n: int) -> int:
    match c:
        case None | Atom() | Not():
            return 1
        case And(l, r):
            return _size(l, n) * _size(r, n)
        case Or(l, r):
            return _size(l, n) + _size(r, n)
        case Exists(_, d):
            return n * _size(d, n)
        case Forall(_, d):
            return _size(d, n) ** n
    raise TypeError(c)


def enumerate_terms(k: Formula, sig, cap: int = DEFAULT_CAP) -> Iterator[InfoTerm]:
    """Stream IT_N(K) in canonical order.

    Tags ascend, witnesses follow signature order and function tables are
    listed lexicographically with the first individual most significant.
    Raises :class:`ITOverflow` before yielding anything if the space is
    larger than ``cap``.
    """
    if cap <= 0:
        raise ValueError("cap must be positive")
    size = space_size(k, sig)
    if size > cap:
        raise ITOverflow(cap, size)
    return _gen(_concept_key(k), tuple(_individuals(sig)))


def _gen(c, n: tuple[str, ...]) -> Iterator[InfoTerm]:
    match c:
        case None | Atom() | Not():
            yield TT
        case And(l, r):
            rights = list(_gen(r, n))
            for a in _gen(l, n):
                for b in rights:
                    yield Pair(a, b)
        case Or(l, r):
            for a in _gen(l, n):
                yield Tag(1, a)
            for b in _gen(r, n):
                yield Tag(2, b)
        case Exists(_, d):
            inner = list(_gen(d, n))
            for e in n:
                for a in inner:
                    yield Wit(e, a)
        case Forall(_, d):
            inner = list(_gen(d, n))
            for values in itertools.product(inner, repeat=len(n)):
                yield Fun(tuple(zip(n, values)))


def enumerate_tuples(formulas: Sequence[Formula], sig, cap: int = DEFAULT_CAP) -> Iterator[tuple]:
    """Every tuple of IT_N(Gamma), first position most significant."""
    total = 1
    for k in formulas:
        total *= space_size(k, sig)
    if total > cap:
        raise ITOverflow(cap, total, "information-term tuple space")
    spaces = [list(enumerate_terms(k, sig, cap)) for k in formulas]
    return itertools.product(*spaces)


# ---------------------------------------------------------------------------
# Realizability


def realizes(m: Model, eta, k: Formula) -> bool:
    """``M |>_eta K``; N is the model's ordered set of named individuals."""
    _require_closed(k)
    n = m.individuals
    if not _belongs(eta, k, n):
        raise IllFormedTermError(f"{format_literal(eta)} is not an information term for {format_formula(k)}")
    return _realizes(m, eta, k, n)


def _realizes(m: Model, eta, k: Formula, n) -> bool:
    shape = _shape(k)
    match shape[0]:
        case "simple":
            return holds(m, k)
        case "and":
            return _realizes(m, eta.first, shape[1], n) and _realizes(m, eta.second, shape[2], n)
        case "or":
            return _realizes(m, eta.arg, shape[eta.k], n)
        case "exists":
            _, c, role, d = shape
            return holds(m, Role(c, eta.d, role)) and _realizes(m, eta.arg, Member(eta.d, d), n)
        case "forall":
            _, c, role, d = shape
            if not holds(m, k):
                return False
            return all(
                _realizes(m, v, Member(e, d), n) for e, v in eta.table if holds(m, Role(c, e, role))
            )
        case "sub":
            _, a, d = shape
            if not holds(m, k):
                return False
            return all(_realizes(m, v, Member(e, d), n) for e, v in eta.table if holds(m, Member(e, Atom(a))))
    return False


def realizes_tuple(m: Model, gamma: Sequence, formulas: Sequence[Formula]) -> bool:
    return all(realizes(m, eta, k) for eta, k in zip(gamma, formulas, strict=True))


def canonical(k: Formula, sig) -> InfoTerm:
    """A fixed inhabitant of IT_N(K): first tag, first individual."""
    _require_closed(k)
    return _canonical(_concept_key(k), tuple(_individuals(sig)))


@lru_cache(maxsize=4096)
def _canonical(c, n: tuple[str, ...]) -> InfoTerm:
    match c:
        case None | Atom() | Not():
            return TT
        case And(l, r):
            return Pair(_canonical(l, n), _canonical(r, n))
        case Or(l, _):
            return Tag(1, _canonical(l, n))
        case Exists(_, d):
            return Wit(n[0], _canonical(d, n))
        case Forall(_, d):
            inner = _canonical(d, n)
            return Fun(tuple((e, inner) for e in n))
    raise TypeError(c)


def find_realizer(m: Model, k: Formula) -> InfoTerm | None:
    """Some eta with ``M |>_eta K``, or None when no term realizes K.

    Choices follow canonical order, so the result is the first realizer
    :func:`enumerate_terms` would reach for each independent position.
    """
    _require_closed(k)
    return _find(m, k, m.individuals)


def _find(m: Model, k: Formula, n) -> InfoTerm | None:
    shape = _shape(k)
    match shape[0]:
        case "simple":
            return TT if holds(m, k) else None
        case "and":
            a = _find(m, shape[1], n)
            b = _find(m, shape[2], n) if a is not None else None
            return Pair(a, b) if b is not None else None
        case "or":
            for i in (1, 2):
                a = _find(m, shape[i], n)
                if a is not None:
                    return Tag(i, a)
            return None
        case "exists":
            _, c, role, d = shape
            for e in n:
                if holds(m, Role(c, e, role)):
                    a = _find(m, Member(e, d), n)
                    if a is not None:
                        return Wit(e, a)
            return None
        case "forall" | "sub":
            if not holds(m, k):
                return None
            if shape[0] == "forall":
                _, c, role, d = shape
                guard = lambda e: holds(m, Role(c, e, role))  # noqa: E731
            else:
                _, a_name, d = shape
                guard = lambda e: holds(m, Member(e, Atom(a_name)))  # noqa: E731
            table = []
            for e in n:
                v = _find(m, Member(e, d), n) if guard(e) else None
                if v is None:
                    if guard(e):
                        return None
                    v = _canonical(_concept_key(Member(e, d)), tuple(n))
                table.append((e, v))
            return Fun(tuple(table))
    return None


def enumerate_realizers(m: Model, k: Formula, cap: int = DEFAULT_CAP) -> list[InfoTerm]:
    """All eta in IT_N(K) realizing K in M, in canonical order.

    Equal to filtering :func:`enumerate_terms` by :func:`realizes`, but built
    directly from the model so that large spaces with few realizers stay
    cheap.
    """
    _require_closed(k)
    out = list(_realizers(m, k, m.individuals, cap))
    return out


def _realizers(m: Model, k: Formula, n, cap: int) -> list[InfoTerm]:
    shape = _shape(k)
    match shape[0]:
        case "simple":
            return [TT] if holds(m, k) else []
        case "and":
            left = _realizers(m, shape[1], n, cap)
            if not left:
                return []
            right = _realizers(m, shape[2], n, cap)
            _check_cap(len(left) * len(right), cap)
            return [Pair(a, b) for a in left for b in right]
        case "or":
            return [Tag(1, a) for a in _realizers(m, shape[1], n, cap)] + [
                Tag(2, b) for b in _realizers(m, shape[2], n, cap)
            ]
        case "exists":
            _, c, role, d = shape
            out = []
            for e in n:
                if holds(m, Role(c, e, role)):
                    out.extend(Wit(e, a) for a in _realizers(m, Member(e, d), n, cap))
            _check_cap(len(out), cap)
            return out
        case "forall" | "sub":
            if not holds(m, k):
                return []
            if shape[0] == "forall":
                _, c, role, d = shape
                guarded = [holds(m, Role(c, e, role)) for e in n]
            else:
                _, a_name, d = shape
                guarded = [holds(m, Member(e, Atom(a_name))) for e in n]
            columns = []
            total = 1
            for e, g in zip(n, guarded):
                if g:
                    col = _realizers(m, Member(e, d), n, cap)
                else:
                    col = list(enumerate_terms(Member(e, d), _N(n), cap))
                total *= len(col)
                _check_cap(total, cap)
                columns.append(col)
            return [Fun(tuple(zip(n, values))) for values in itertools.product(*columns)]
    return []


@dataclass(frozen=True)
class _N:
    individuals: tuple[str, ...]


def _check_cap(size: int, cap: int):
    if size > cap:
        raise ITOverflow(cap, size, "realizer space")


# ---------------------------------------------------------------------------
# Literal syntax


def format_literal(eta) -> str:
    match eta:
        case Tt():
            return "tt"
        case Pair(a, b):
            return f"({format_literal(a)}, {format_literal(b)})"
        case Tag(k, a):
            return f"tag {k} {_atomic_literal(a)}"
        case Wit(d, a):
            return f"wit {d} {_atomic_literal(a)}"
        case Fun(table):
            if not table:
                return "fun {}"
            return "fun { " + "; ".join(f"{d} -> {format_literal(v)}" for d, v in table) + " }"
        case PVar(name):
            return "?" if name == "" else f"?{name}"
    raise TypeError(f"not an information term: {eta!r}")


def _atomic_literal(eta) -> str:
    s = format_literal(eta)
    return f"({s})" if isinstance(eta, (Tag, Wit)) else s


def parse_literal(text: str, sig: Signature | None = None, *, patterns: bool = False) -> InfoTerm:
    """Parse the literal syntax.

    With ``patterns`` set, ``?name`` and ``?`` may stand for a whole term or
    for the individual of a ``wit``; the parsed value then contains
    :class:`PVar` nodes and ``Wit('?name', ...)`` witnesses.
    """
    ts = TokenStream(text)
    eta = _LiteralParser(ts, sig, patterns).term()
    ts.expect_end()
    return eta


class _LiteralParser:
    def __init__(self, ts: TokenStream, sig: Signature | None, patterns: bool):
        self.ts = ts
        self.sig = sig
        self.patterns = patterns

    def individual(self) -> str:
        tok = self.ts.peek
        if tok.kind == "var" and self.patterns:
            self.ts.next()
            return tok.text
        tok = self.ts.expect_kind("ident", "an individual")
        if self.sig is not None and not self.sig.is_individual(tok.text):
            raise UnknownNameError(tok.text, "individual", tok.pos)
        return tok.text

    def term(self):
        ts = self.ts
        tok = ts.peek
        if tok.kind == "var" and self.patterns:
            ts.next()
            return PVar(tok.text[1:])
        if ts.accept("("):
            inner = self.term()
            if ts.accept(","):
                second = self.term()
                ts.expect(")")
                return Pair(inner, second)
            ts.expect(")")
            return inner
        if tok.kind == "ident":
            if tok.text == "tt":
                ts.next()
                return TT
            if tok.text == "tag":
                ts.next()
                k = ts.expect_kind("int", "a tag index")
                return Tag(int(k.text), self.term())
            if tok.text == "wit":
                ts.next()
                d = self.individual()
                return Wit(d, self.term())
            if tok.text == "fun":
                ts.next()
                ts.expect("{")
                entries = []
                if not ts.at("}"):
                    while True:
                        d = self.individual()
                        ts.expect("->")
                        entries.append((d, self.term()))
                        if not ts.accept(";"):
                            break
                ts.expect("}")
                return Fun(tuple(entries))
        ts.error("expected an information term")


# ---------------------------------------------------------------------------
# Compact notation


def format_compact(eta) -> str:
    """Render with the uniform pair notation: ``(2, (tt, (p_off, tt)))``."""
    match eta:
        case Tt():
            return "tt"
        case Pair(a, b):
            return f"({format_compact(a)}, {format_compact(b)})"
        case Tag(k, a):
            return f"({k}, {format_compact(a)})"
        case Wit(d, a):
            return f"({d}, {format_compact(a)})"
        case Fun(table):
            return "{" + ", ".join(f"{d} -> {format_compact(v)}" for d, v in table) + "}"
    raise TypeError(f"not an information term: {eta!r}")


def parse_compact(text: str, k: Formula, sig) -> InfoTerm:
    """Read the uniform pair notation, resolving each pair against ``k``."""
    _require_closed(k)
    ts = TokenStream(text)
    eta = _CompactParser(ts, tuple(_individuals(sig))).term(k)
    ts.expect_end()
    return eta


class _CompactParser:
    def __init__(self, ts: TokenStream, n: tuple[str, ...]):
        self.ts = ts
        self.n = n

    def term(self, k: Formula):
        ts = self.ts
        shape = _shape(k)
        match shape[0]:
            case "simple":
                tok = ts.expect_kind("ident", "'tt'")
                if tok.text != "tt":
                    raise ParseError(f"expected 'tt' for {format_formula(k)}", tok.pos)
                return TT
            case "and":
                ts.expect("(")
                a = self.term(shape[1])
                ts.expect(",")
                b = self.term(shape[2])
                ts.expect(")")
                return Pair(a, b)
            case "or":
                ts.expect("(")
                tok = ts.expect_kind("int", "a disjunct index 1 or 2")
                i = int(tok.text)
                if i not in (1, 2):
                    raise ParseError("disjunct index must be 1 or 2", tok.pos)
                ts.expect(",")
                a = self.term(shape[i])
                ts.expect(")")
                return Tag(i, a)
            case "exists":
                _, _, _, d = shape
                ts.expect("(")
                tok = ts.expect_kind("ident", "a witness individual")
                if tok.text not in self.n:
                    raise UnknownNameError(tok.text, "individual", tok.pos)
                ts.expect(",")
                a = self.term(Member(tok.text, d))
                ts.expect(")")
                return Wit(tok.text, a)
            case "forall" | "sub":
                body = shape[3] if shape[0] == "forall" else shape[2]
                ts.expect("{")
                entries = []
                if not ts.at("}"):
                    while True:
                        tok = ts.expect_kind("ident", "an individual")
                        if tok.text not in self.n:
                            raise UnknownNameError(tok.text, "individual", tok.pos)
                        ts.expect("->")
                        entries.append((tok.text, self.term(Member(tok.text, body))))
                        if not ts.accept(","):
                            break
                ts.expect("}")
                return Fun(tuple(entries))
        raise TypeError(k)


def squash(text: str) -> str:
    """Drop all whitespace; printed terms compare this way."""
    return "".join(text.split())
