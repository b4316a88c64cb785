"""ABox stores, decision-table implementations and environment directories.

Decision-table files look like::

    service DoProduceRequest
    row: (tt, wit ?p tt) | ?req : AcceptedProduceRequest; (?req, ?o) : hasOffer | tag 2 (tt, wit ?o tt)
    default: tag 1 tt

A row is ``pattern | guard | template``. Patterns use the information-term
literal syntax with ``?name`` and ``?`` holes, both for whole subterms and
for the individual of a ``wit``. The guard is a ``;``-separated list of
store atoms (``?v : A``, ``?v : not A``, ``(?u, ?v) : R``) answered by
backtracking over the individuals in signature order; the first solution
wins. The service parameter (``?req`` for ``DoProduceRequest(req)``) is
bound to the called individual. Rows are tried in order; the ``default``
line (``default: template`` or ``default: pattern | template``) must
follow them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping

from .composition import Environment, ServiceSpec, load_specs
from .errors import ParseError, TableError
from .infoterm import (
    Fun,
    InfoTerm,
    Pair,
    PVar,
    Tag,
    Tt,
    Wit,
    belongs,
    canonical,
    find_realizer,
    format_literal,
    parse_literal,
)
from .semantics import Model, induced_model
from .syntax import (
    Atom,
    Formula,
    Member,
    Role,
    Signature,
    Theory,
    format_formula,
    is_abox_assertion,
    load_signature,
    load_theory,
    parse_theory,
)

# ---------------------------------------------------------------------------
# Store


@dataclass(frozen=True)
class Store:
    """A set of ground atomic assertions, kept sorted for stable output."""

    signature: Signature
    assertions: tuple[Formula, ...] = ()

    def __post_init__(self):
        for k in self.assertions:
            if not is_abox_assertion(k):
                raise ParseError(f"store entries must be ABox assertions: {format_formula(k)}")
        ordered = sorted(set(self.assertions), key=_assertion_key)
        object.__setattr__(self, "assertions", tuple(ordered))

    def __contains__(self, k: Formula) -> bool:
        return k in set(self.assertions)

    def model(self) -> Model:
        return induced_model(Theory((), self.assertions), self.signature)

    def add(self, *ks: Formula) -> "Store":
        return Store(self.signature, self.assertions + ks)

    def remove(self, *ks: Formula) -> "Store":
        gone = set(ks)
        return Store(self.signature, tuple(k for k in self.assertions if k not in gone))


def _assertion_key(k: Formula):
    if isinstance(k, Role):
        return (1, k.role, k.s, k.t)
    return (0, k.concept.name, k.t, "")


def parse_store(text: str, sig: Signature) -> Store:
    theory = parse_theory(text, sig)
    if theory.tbox:
        raise ParseError("a store holds ABox assertions only")
    return Store(sig, theory.abox)


def load_store(path, sig: Signature) -> Store:
    return parse_store(Path(path).read_text(encoding="utf-8"), sig)


def format_store(store: Store) -> str:
    return "".join(format_formula(k) + "\n" for k in store.assertions)


def save_store(store: Store, path) -> None:
    Path(path).write_text(format_store(store), encoding="utf-8")


# ---------------------------------------------------------------------------
# Decision tables


@dataclass(frozen=True)
class GuardAtom:
    args: tuple[str, ...]  # "?v" for variables, otherwise individuals
    name: str  # concept or role name
    negated: bool = False


@dataclass(frozen=True)
class Row:
    pattern: object  # InfoTerm with PVar holes
    guard: tuple[GuardAtom, ...]
    template: object
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class DecisionTable:
    service: str
    rows: tuple[Row, ...]
    default: Row


_ROLE_ATOM = re.compile(r"^\(\s*(\??\w*)\s*,\s*(\??\w*)\s*\)\s*:\s*(\w+)$")
_MEMBER_ATOM = re.compile(r"^(\??\w*)\s*:\s*(not\s+)?(\w+)$")


def _parse_guard(text: str, sig: Signature, lineno: int) -> tuple[GuardAtom, ...]:
    atoms = []
    for part in filter(None, (p.strip() for p in text.split(";"))):
        if m := _ROLE_ATOM.match(part):
            s, t, r = m.groups()
            if sig.kind_of(r) != "roles":
                raise ParseError(f"unknown role {r!r} in guard", line=lineno)
            atoms.append(GuardAtom((s, t), r))
        elif m := _MEMBER_ATOM.match(part):
            t, neg, a = m.groups()
            if sig.kind_of(a) != "concept_names":
                raise ParseError(f"unknown concept {a!r} in guard", line=lineno)
            atoms.append(GuardAtom((t,), a, bool(neg)))
        else:
            raise ParseError(f"malformed guard atom {part!r}", line=lineno)
        for arg in atoms[-1].args:
            if arg == "?":
                raise ParseError("guard variables must be named", line=lineno)
            if not arg.startswith("?") and not sig.is_individual(arg):
                raise TableError("template-references-unknown-individual", f"{arg!r} in guard on line {lineno}")
    return tuple(atoms)


def _parse_term(text: str, sig: Signature, lineno: int):
    try:
        return parse_literal(text, None, patterns=True)
    except ParseError as e:
        raise ParseError(f"{e}", line=lineno) from e


def parse_tables(text: str, sig: Signature) -> list[DecisionTable]:
    tables: list[DecisionTable] = []
    name: str | None = None
    rows: list[Row] = []
    default: Row | None = None

    def close(lineno):
        nonlocal name, rows, default
        if name is None:
            return
        if default is None:
            raise TableError("missing-default", f"table {name!r} ends at line {lineno} without a default row")
        tables.append(DecisionTable(name, tuple(rows), default))
        name, rows, default = None, [], None

    lineno = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("service "):
            close(lineno)
            name = line.split(None, 1)[1].strip()
            continue
        if name is None:
            raise ParseError("expected 'service NAME' before rows", line=lineno)
        head, sep, rest = line.partition(":")
        if not sep or head.strip() not in ("row", "default"):
            raise ParseError(f"expected 'row:' or 'default:', got {line!r}", line=lineno)
        if default is not None:
            raise ParseError("rows after the default row", line=lineno)
        parts = [p.strip() for p in rest.split("|")]
        if head.strip() == "row":
            if len(parts) != 3:
                raise ParseError("a row needs 'pattern | guard | template'", line=lineno)
            pattern, guard, template = parts
        else:
            if len(parts) == 1:
                pattern, guard, template = "?", "", parts[0]
            elif len(parts) == 2:
                pattern, guard, template = parts[0], "", parts[1]
            else:
                raise ParseError("a default needs 'template' or 'pattern | template'", line=lineno)
        row = Row(_parse_term(pattern, sig, lineno), _parse_guard(guard, sig, lineno), _parse_term(template, sig, lineno), lineno)
        if head.strip() == "row":
            rows.append(row)
        else:
            default = row
    close(lineno)
    return tables


def load_tables(path, sig: Signature) -> list[DecisionTable]:
    return parse_tables(Path(path).read_text(encoding="utf-8"), sig)


# pattern matching ----------------------------------------------------------


def _bind(env: dict, name: str, value) -> dict | None:
    if name == "":
        return env
    if name in env:
        return env if env[name] == value else None
    return {**env, name: value}


def match_pattern(pattern, eta: InfoTerm, env: dict) -> dict | None:
    match pattern:
        case PVar(name):
            return _bind(env, name, eta)
        case Tt():
            return env if isinstance(eta, Tt) else None
        case Pair(p1, p2):
            if not isinstance(eta, Pair):
                return None
            env = match_pattern(p1, eta.first, env)
            return None if env is None else match_pattern(p2, eta.second, env)
        case Tag(k, p):
            if not isinstance(eta, Tag) or eta.k != k:
                return None
            return match_pattern(p, eta.arg, env)
        case Wit(d, p):
            if not isinstance(eta, Wit):
                return None
            env = _bind(env, d[1:], eta.d) if d.startswith("?") else (env if d == eta.d else None)
            return None if env is None else match_pattern(p, eta.arg, env)
        case Fun(table):
            if not isinstance(eta, Fun) or len(table) != len(eta.table):
                return None
            for (pd, pv), (d, v) in zip(table, eta.table):
                env = _bind(env, pd[1:], d) if pd.startswith("?") else (env if pd == d else None)
                if env is None:
                    return None
                env = match_pattern(pv, v, env)
                if env is None:
                    return None
            return env
    raise TypeError(f"not a pattern: {pattern!r}")


def _solve(atoms: tuple[GuardAtom, ...], env: dict, store: "_Facts") -> Iterator[dict]:
    if not atoms:
        yield env
        return
    atom, rest = atoms[0], atoms[1:]
    free = [a[1:] for a in atom.args if a.startswith("?") and a[1:] not in env]
    for values in _assignments(len(dict.fromkeys(free)), store.individuals):
        trial = dict(env)
        trial.update(zip(dict.fromkeys(free), values))
        args = tuple(trial[a[1:]] if a.startswith("?") else a for a in atom.args)
        if not all(isinstance(a, str) for a in args):
            continue
        if store.holds(atom.name, args) != atom.negated:
            yield from _solve(rest, trial, store)


def _assignments(n: int, individuals: tuple[str, ...]) -> Iterator[tuple[str, ...]]:
    if n == 0:
        yield ()
        return
    for d in individuals:
        for tail in _assignments(n - 1, individuals):
            yield (d,) + tail


class _Facts:
    def __init__(self, store: Store):
        self.individuals = store.signature.individuals
        self.members = {(k.concept.name, k.t) for k in store.assertions if isinstance(k, Member)}
        self.roles = {(k.role, k.s, k.t) for k in store.assertions if isinstance(k, Role)}

    def holds(self, name: str, args: tuple[str, ...]) -> bool:
        if len(args) == 1:
            return (name, args[0]) in self.members
        return (name, *args) in self.roles


def instantiate(template, env: Mapping[str, object]) -> InfoTerm:
    match template:
        case PVar(name):
            value = env.get(name)
            if value is None or isinstance(value, str):
                raise TableError("unbound-template-variable", f"?{name} does not stand for an information term")
            return value
        case Tt():
            return template
        case Pair(a, b):
            return Pair(instantiate(a, env), instantiate(b, env))
        case Tag(k, a):
            return Tag(k, instantiate(a, env))
        case Wit(d, a):
            return Wit(_individual(d, env), instantiate(a, env))
        case Fun(table):
            return Fun(tuple((_individual(d, env), instantiate(v, env)) for d, v in table))
    raise TypeError(f"not a template: {template!r}")


def _individual(d: str, env: Mapping[str, object]) -> str:
    if not d.startswith("?"):
        return d
    value = env.get(d[1:])
    if not isinstance(value, str):
        raise TableError("unbound-template-variable", f"{d} does not stand for an individual")
    return value


def _pattern_vars(p) -> Iterator[str]:
    match p:
        case PVar(name):
            if name:
                yield name
        case Pair(a, b):
            yield from _pattern_vars(a)
            yield from _pattern_vars(b)
        case Tag(_, a):
            yield from _pattern_vars(a)
        case Wit(d, a):
            if d.startswith("?") and d != "?":
                yield d[1:]
            yield from _pattern_vars(a)
        case Fun(table):
            for d, v in table:
                if d.startswith("?") and d != "?":
                    yield d[1:]
                yield from _pattern_vars(v)


def _template_individuals(p) -> Iterator[str]:
    match p:
        case Pair(a, b):
            yield from _template_individuals(a)
            yield from _template_individuals(b)
        case Tag(_, a):
            yield from _template_individuals(a)
        case Wit(d, a):
            if not d.startswith("?"):
                yield d
            yield from _template_individuals(a)
        case Fun(table):
            for d, v in table:
                if not d.startswith("?"):
                    yield d
                yield from _template_individuals(v)


class TableImplementation:
    """First-match evaluation of a decision table against a store."""

    def __init__(self, table: DecisionTable, spec: ServiceSpec, store: Store):
        if table.service != spec.name:
            raise TableError("spec-mismatch", f"table for {table.service!r} used with spec {spec.name!r}")
        sig = store.signature
        for row in table.rows + (table.default,):
            for d in list(_template_individuals(row.template)) + list(_template_individuals(row.pattern)):
                if not sig.is_individual(d):
                    raise TableError(
                        "template-references-unknown-individual", f"{d!r} on line {row.line} of table {table.service}"
                    )
            bound = {spec.param, *_pattern_vars(row.pattern)}
            bound |= {a[1:] for atom in row.guard for a in atom.args if a.startswith("?")}
            unbound = set(_pattern_vars(row.template)) - bound
            if unbound:
                raise TableError(
                    "unbound-template-variable", f"?{sorted(unbound)[0]} on line {row.line} of table {table.service}"
                )
        self.table = table
        self.spec = spec
        self.store = store
        self._facts = _Facts(store)

    def __call__(self, t: str, alpha: InfoTerm) -> InfoTerm:
        for row in self.table.rows + (self.table.default,):
            env = match_pattern(row.pattern, alpha, {self.spec.param: t})
            if env is None:
                continue
            solution = next(_solve(row.guard, env, self._facts), None)
            if solution is None:
                continue
            out = instantiate(row.template, solution)
            if not belongs(out, self.spec.post_at(t), self.store.signature):
                raise TableError(
                    "ill-formed-output",
                    f"{self.spec.name} line {row.line} produced {format_literal(out)}, "
                    f"not a term for {format_formula(self.spec.post_at(t))}",
                )
            return out
        raise TableError("no-row-fires", f"{self.spec.name} on {t} with {format_literal(alpha)}")


def impl_from_table(table: DecisionTable, spec: ServiceSpec, store: Store) -> TableImplementation:
    return TableImplementation(table, spec, store)


# ---------------------------------------------------------------------------
# Environment directories


def derive_eta(m: Model, tbox) -> tuple[InfoTerm, ...]:
    """A realizer of each axiom in ``m`` where one exists, otherwise the
    canonical term (which keeps eta well-formed but will not realize)."""
    return tuple(find_realizer(m, ax) or canonical(ax, m) for ax in tbox)


@dataclass(frozen=True)
class EnvironmentDir:
    root: Path
    signature: Signature
    tbox_theory: Theory
    store: Store
    specs: dict
    tables: dict
    environment: Environment

    def with_store(self, store: Store) -> "EnvironmentDir":
        return build_environment(self.root, self.signature, self.tbox_theory, store, self.specs, self.tables)


def build_environment(root, sig, theory: Theory, store: Store, specs: dict, tables: dict) -> EnvironmentDir:
    full = Theory(theory.tbox, theory.abox + store.assertions)
    eta = derive_eta(store.model(), full.tbox)
    services = []
    for name, table in tables.items():
        if name not in specs:
            raise TableError("spec-mismatch", f"no specification for table {name!r}")
        services.append((specs[name], impl_from_table(table, specs[name], store)))
    env = Environment(sig, full, eta, tuple(services))
    return EnvironmentDir(Path(root), sig, theory, store, specs, tables, env)


def load_environment(root, store_file: str = "store.txt") -> EnvironmentDir:
    """Read ``sig.txt``, ``theory.txt``, ``store.txt``, ``specs/*.spec`` and
    ``tables/*.dt`` from one directory."""
    root = Path(root)
    sig = load_signature(root / "sig.txt")
    theory = load_theory(root / "theory.txt", sig)
    store_path = root / store_file
    store = load_store(store_path, sig) if store_path.exists() else Store(sig)
    specs = load_specs(sorted((root / "specs").glob("*.spec")), sig)
    tables: dict[str, DecisionTable] = {}
    for path in sorted((root / "tables").glob("*.dt")):
        for table in load_tables(path, sig):
            if table.service in tables:
                raise TableError("duplicate-table", f"two tables for {table.service!r}")
            tables[table.service] = table
    return build_environment(root, sig, theory, store, specs, tables)
