"""Abstract syntax, parsing and printing for concepts, formulas and theories.

Surface syntax (ASCII)::

    concept := disj
    disj    := conj ["or" disj]
    conj    := unary ["and" conj]
    unary   := "not" unary | ("exists" | "forall") ROLE "." unary
             | "(" concept ")" | CONCEPT
    formula := "bot" | "(" term "," term ")" ":" ROLE
             | CONCEPT "sub" concept | term ":" concept

``and`` and ``or`` associate to the right, so ``A and B and C`` is
``A and (B and C)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Union

from .errors import (
    NonAtomicAntecedentError,
    ParseError,
    SignatureError,
    UnboundVariableError,
    UnknownNameError,
)

KEYWORDS = frozenset({"and", "or", "not", "exists", "forall", "sub", "bot"})


# ---------------------------------------------------------------------------
# Signature


@dataclass(frozen=True)
class Signature:
    individuals: tuple[str, ...]
    roles: tuple[str, ...] = ()
    concept_names: tuple[str, ...] = ()
    variables: tuple[str, ...] = ()

    def __post_init__(self):
        for field in ("individuals", "roles", "concept_names", "variables"):
            object.__setattr__(self, field, tuple(getattr(self, field)))
        if not self.individuals:
            raise SignatureError("a signature needs at least one individual")
        seen: dict[str, str] = {}
        for field in ("individuals", "roles", "concept_names", "variables"):
            for name in getattr(self, field):
                if name in KEYWORDS or not _IDENT.fullmatch(name):
                    raise SignatureError(f"{name!r} is not a valid name")
                if name in seen:
                    if seen[name] == field:
                        raise SignatureError(f"duplicate name {name!r} in {field}")
                    raise SignatureError(f"{name!r} declared both in {seen[name]} and {field}")
                seen[name] = field
        object.__setattr__(self, "_kinds", seen)

    def kind_of(self, name: str) -> str | None:
        return self._kinds.get(name)

    def is_individual(self, name: str) -> bool:
        return self._kinds.get(name) == "individuals"

    def is_variable(self, name: str) -> bool:
        return self._kinds.get(name) == "variables"

    def with_variables(self, names: Iterable[str]) -> "Signature":
        extra = [n for n in names if n not in self.variables]
        if not extra:
            return self
        return Signature(self.individuals, self.roles, self.concept_names, self.variables + tuple(extra))

    def to_text(self) -> str:
        lines = []
        for header, names in (
            ("individuals", self.individuals),
            ("roles", self.roles),
            ("concepts", self.concept_names),
            ("variables", self.variables),
        ):
            lines.append(f"{header}: {' '.join(names)}".rstrip())
        return "\n".join(lines) + "\n"


def parse_signature(text: str) -> Signature:
    """Read the ``individuals: / roles: / concepts: / variables:`` format.

    A section continues over following lines until the next header.
    """
    sections: dict[str, list[str]] = {"individuals": [], "roles": [], "concepts": [], "variables": []}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, rest = line.partition(":")
        if sep and head.strip() in sections:
            current = head.strip()
            sections[current].extend(rest.split())
        elif current is None:
            raise ParseError(f"expected a section header, got {line!r}", line=lineno)
        else:
            sections[current].extend(line.split())
    return Signature(
        tuple(sections["individuals"]),
        tuple(sections["roles"]),
        tuple(sections["concepts"]),
        tuple(sections["variables"]),
    )


def load_signature(path) -> Signature:
    return parse_signature(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Terms, concepts, formulas


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


Term = Union[str, Var]


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Not:
    arg: "Concept"


@dataclass(frozen=True)
class And:
    left: "Concept"
    right: "Concept"


@dataclass(frozen=True)
class Or:
    left: "Concept"
    right: "Concept"


@dataclass(frozen=True)
class Exists:
    role: str
    arg: "Concept"


@dataclass(frozen=True)
class Forall:
    role: str
    arg: "Concept"


Concept = Union[Atom, Not, And, Or, Exists, Forall]


@dataclass(frozen=True)
class Bot:
    pass


BOT = Bot()


@dataclass(frozen=True)
class Role:
    s: Term
    t: Term
    role: str


@dataclass(frozen=True)
class Member:
    t: Term
    concept: Concept


@dataclass(frozen=True)
class Subsume:
    atom: str
    concept: Concept


Formula = Union[Bot, Role, Member, Subsume]


def conj(*concepts: Concept) -> Concept:
    """Right-nested conjunction, matching how ``A and B and C`` parses."""
    if not concepts:
        raise ValueError("conj needs at least one concept")
    result = concepts[-1]
    for c in reversed(concepts[:-1]):
        result = And(c, result)
    return result


def disj(*concepts: Concept) -> Concept:
    if not concepts:
        raise ValueError("disj needs at least one concept")
    result = concepts[-1]
    for c in reversed(concepts[:-1]):
        result = Or(c, result)
    return result


def split_conj(c: Concept, n: int) -> list[Concept]:
    """Inverse of :func:`conj` for an n-ary right-nested conjunction."""
    parts = []
    for _ in range(n - 1):
        if not isinstance(c, And):
            raise ValueError("not an n-ary conjunction")
        parts.append(c.left)
        c = c.right
    parts.append(c)
    return parts


def formula_terms(k: Formula) -> tuple[Term, ...]:
    match k:
        case Role(s, t, _):
            return (s, t)
        case Member(t, _):
            return (t,)
        case _:
            return ()


def free_vars(k: Formula) -> frozenset[str]:
    return frozenset(t.name for t in formula_terms(k) if isinstance(t, Var))


def occurs(name: str, k: Formula) -> bool:
    return any((t.name if isinstance(t, Var) else t) == name for t in formula_terms(k))


def is_closed(k: Formula) -> bool:
    return not free_vars(k)


def is_simple(k: Formula) -> bool:
    match k:
        case Bot() | Role():
            return True
        case Member(_, Atom() | Not()):
            return True
        case _:
            return False


def classify(k: Formula) -> dict[str, bool]:
    return {"closed": is_closed(k), "simple": is_simple(k)}


def concept_names_in(c: Concept) -> Iterator[tuple[str, str]]:
    """Yield ``(kind, name)`` for every concept and role name in ``c``."""
    match c:
        case Atom(a):
            yield "concepts", a
        case Not(d):
            yield from concept_names_in(d)
        case And(l, r) | Or(l, r):
            yield from concept_names_in(l)
            yield from concept_names_in(r)
        case Exists(role, d) | Forall(role, d):
            yield "roles", role
            yield from concept_names_in(d)


def concept_depth(c: Concept) -> int:
    match c:
        case Atom():
            return 0
        case Not(d) | Exists(_, d) | Forall(_, d):
            return 1 + concept_depth(d)
        case And(l, r) | Or(l, r):
            return 1 + max(concept_depth(l), concept_depth(r))
    raise TypeError(c)


# ---------------------------------------------------------------------------
# Substitutions


@dataclass(frozen=True)
class Substitution:
    """Finite map from variable names to individual names."""

    bindings: tuple[tuple[str, str], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[str, str] | None = None, **kw: str) -> "Substitution":
        merged = dict(mapping or {})
        merged.update(kw)
        return cls(tuple(sorted(merged.items())))

    def as_dict(self) -> dict[str, str]:
        return dict(self.bindings)

    def __contains__(self, var: str) -> bool:
        return any(v == var for v, _ in self.bindings)

    def __getitem__(self, var: str) -> str:
        for v, c in self.bindings:
            if v == var:
                return c
        raise KeyError(var)

    def update(self, var: str, individual: str) -> "Substitution":
        """``sigma[individual/var]``."""
        d = self.as_dict()
        d[var] = individual
        return Substitution.of(d)

    def term(self, t: Term) -> Term:
        if isinstance(t, Var) and t.name in self:
            return self[t.name]
        return t

    def closes(self, formulas: Iterable[Formula]) -> bool:
        bound = {v for v, _ in self.bindings}
        return all(free_vars(k) <= bound for k in formulas)

    def __str__(self):
        return "{" + ", ".join(f"{v}->{c}" for v, c in self.bindings) + "}"


def apply_subst(sigma: Substitution, k: Formula) -> Formula:
    missing = free_vars(k) - {v for v, _ in sigma.bindings}
    if missing:
        raise UnboundVariableError(missing)
    return subst_partial(sigma, k)


def subst_partial(sigma: Substitution, k: Formula) -> Formula:
    """Replace the variables ``sigma`` binds, leaving the others in place."""
    match k:
        case Role(s, t, r):
            return Role(sigma.term(s), sigma.term(t), r)
        case Member(t, c):
            return Member(sigma.term(t), c)
        case _:
            return k


def rename(k: Formula, old: str, new: Term) -> Formula:
    def f(t: Term) -> Term:
        return new if isinstance(t, Var) and t.name == old else t

    match k:
        case Role(s, t, r):
            return Role(f(s), f(t), r)
        case Member(t, c):
            return Member(f(t), c)
        case _:
            return k


# ---------------------------------------------------------------------------
# Lexer

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow>->|=>|\|-)
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*|\?)
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<str>"[^"]*")
  | (?P<punct>[(),:.;{}|])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind == "ident" and value in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, value, pos))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


class TokenStream:
    def __init__(self, text: str, line: int | None = None):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.line = line

    @property
    def peek(self) -> Token:
        return self.tokens[self.i]

    def peek_at(self, offset: int) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek
        return tok.text == text and tok.kind in ("kw", "punct", "arrow")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.next()

    def expect_kind(self, kind: str, what: str) -> Token:
        tok = self.peek
        if tok.kind != kind:
            self.error(f"expected {what}")
        return self.next()

    def error(self, message: str):
        tok = self.peek
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"{message}, found {found}", tok.pos, self.line)

    def expect_end(self):
        if self.peek.kind != "eof":
            self.error("expected end of input")


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, ts: TokenStream, sig: Signature):
        self.ts = ts
        self.sig = sig

    def name(self, expected: str) -> Token:
        tok = self.ts.expect_kind("ident", f"a {expected.rstrip('s')} name")
        if self.sig.kind_of(tok.text) != expected:
            raise UnknownNameError(tok.text, expected.rstrip("s"), tok.pos, self.ts.line)
        return tok

    def concept(self) -> Concept:
        left = self.conj()
        if self.ts.accept("or"):
            return Or(left, self.concept())
        return left

    def conj(self) -> Concept:
        left = self.unary()
        if self.ts.accept("and"):
            return And(left, self.conj())
        return left

    def unary(self) -> Concept:
        ts = self.ts
        if ts.accept("not"):
            return Not(self.unary())
        if ts.at("exists") or ts.at("forall"):
            quant = ts.next().text
            role = self.name("roles").text
            ts.expect(".")
            body = self.unary()
            return Exists(role, body) if quant == "exists" else Forall(role, body)
        if ts.accept("("):
            c = self.concept()
            ts.expect(")")
            return c
        return Atom(self.name("concept_names").text)

    def term(self) -> Term:
        tok = self.ts.expect_kind("ident", "an individual or variable")
        kind = self.sig.kind_of(tok.text)
        if kind == "individuals":
            return tok.text
        if kind == "variables":
            return Var(tok.text)
        raise UnknownNameError(tok.text, "individual or variable", tok.pos, self.ts.line)

    def formula(self) -> Formula:
        ts = self.ts
        if ts.accept("bot"):
            return BOT
        if ts.at("(") and ts.peek_at(1).kind == "ident" and ts.peek_at(2).text == ",":
            ts.next()
            s = self.term()
            ts.expect(",")
            t = self.term()
            ts.expect(")")
            ts.expect(":")
            return Role(s, t, self.name("roles").text)
        tok = ts.peek
        if tok.kind == "ident" and ts.peek_at(1).text == "sub":
            if self.sig.kind_of(tok.text) != "concept_names":
                raise UnknownNameError(tok.text, "concept", tok.pos, ts.line)
            ts.next()
            ts.next()
            return Subsume(tok.text, self.concept())
        start = ts.i
        if tok.kind == "ident" and ts.peek_at(1).text == ":":
            t = self.term()
            ts.expect(":")
            return Member(t, self.concept())
        # A non-atomic left-hand side followed by ``sub``.
        if tok.text in ("(", "not", "exists", "forall") or tok.kind == "ident":
            try:
                self.concept()
            except ParseError:
                ts.i = start
            else:
                if ts.at("sub"):
                    raise NonAtomicAntecedentError(tok.pos, ts.line)
                ts.i = start
        ts.error("expected a formula")


def parse_concept(text: str, sig: Signature, line: int | None = None) -> Concept:
    ts = TokenStream(text, line)
    c = _Parser(ts, sig).concept()
    ts.expect_end()
    return c


def parse_formula(text: str, sig: Signature, line: int | None = None) -> Formula:
    ts = TokenStream(text, line)
    k = _Parser(ts, sig).formula()
    ts.expect_end()
    return k


def parse_term(text: str, sig: Signature) -> Term:
    ts = TokenStream(text)
    t = _Parser(ts, sig).term()
    ts.expect_end()
    return t


# ---------------------------------------------------------------------------
# Printer

_PREC = {Or: 1, And: 2}


def _prec(c: Concept) -> int:
    return _PREC.get(type(c), 3)


def format_concept(c: Concept) -> str:
    match c:
        case Atom(a):
            return a
        case Not(d):
            return "not " + _wrap(d, 3)
        case Exists(r, d):
            return f"exists {r}." + _wrap(d, 3)
        case Forall(r, d):
            return f"forall {r}." + _wrap(d, 3)
        case And(l, r):
            return f"{_wrap(l, 3)} and {_wrap(r, 2)}"
        case Or(l, r):
            return f"{_wrap(l, 2)} or {_wrap(r, 1)}"
    raise TypeError(f"not a concept: {c!r}")


def _wrap(c: Concept, min_prec: int) -> str:
    s = format_concept(c)
    return f"({s})" if _prec(c) < min_prec else s


def format_term(t: Term) -> str:
    return t.name if isinstance(t, Var) else t


def format_formula(k: Formula) -> str:
    match k:
        case Bot():
            return "bot"
        case Role(s, t, r):
            return f"({format_term(s)}, {format_term(t)}) : {r}"
        case Member(t, c):
            return f"{format_term(t)} : {format_concept(c)}"
        case Subsume(a, c):
            return f"{a} sub {format_concept(c)}"
    raise TypeError(f"not a formula: {k!r}")


# ---------------------------------------------------------------------------
# Theories


@dataclass(frozen=True)
class Theory:
    tbox: tuple[Subsume, ...] = ()
    abox: tuple[Formula, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tbox", _dedup(self.tbox))
        object.__setattr__(self, "abox", _dedup(self.abox))
        for k in self.tbox:
            if not isinstance(k, Subsume):
                raise ParseError(f"TBox entry is not a subsumption: {format_formula(k)}")
        for k in self.abox:
            if not is_abox_assertion(k):
                raise ParseError(f"not an ABox assertion: {format_formula(k)}")


def is_abox_assertion(k: Formula) -> bool:
    match k:
        case Role(s, t, _):
            return isinstance(s, str) and isinstance(t, str)
        case Member(t, Atom()):
            return isinstance(t, str)
    return False


def _dedup(items: Iterable) -> tuple:
    return tuple(dict.fromkeys(items))


def iter_formula_lines(text: str) -> Iterator[tuple[int, str]]:
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def parse_theory(text: str, sig: Signature) -> Theory:
    tbox, abox = [], []
    for lineno, line in iter_formula_lines(text):
        k = parse_formula(line, sig, lineno)
        if isinstance(k, Subsume):
            tbox.append(k)
        elif is_abox_assertion(k):
            abox.append(k)
        else:
            raise ParseError(f"not a TBox or ABox formula: {line!r}", line=lineno)
    return Theory(tuple(tbox), tuple(abox))


def load_theory(path, sig: Signature) -> Theory:
    return parse_theory(Path(path).read_text(encoding="utf-8"), sig)


def format_theory(theory: Theory) -> str:
    lines = [format_formula(k) for k in theory.tbox]
    lines += [format_formula(k) for k in theory.abox]
    return "".join(line + "\n" for line in lines)
