"""Service specifications, environments and the composition calculus.

A composition is a tree of rule applications (AND, CASE, SEQ, AX, ENV).
Each non-ENV node carries the proofs of its applicability conditions,
keyed as follows (``x`` is the node's parameter, ``A => B`` its spec and
``Ak => Bk`` the spec of child k):

========  ==========================================================
AND       ``ak: T, x:A |- x:Ak``;  ``b: T, x:B1 and ... and Bn |- x:B``
CASE      ``a: T, x:A |- x:A1 or ... or An``;  ``bk: T, x:Bk |- x:B``
SEQ       ``b1: T, x:A |- x:A1``;  ``bk: T, x:B(k-1) |- x:Ak``;
          ``c: T, x:Bn |- x:B``
AX        ``a: T, x:A |- x:B``
========  ==========================================================

n-ary conjunctions and disjunctions nest to the right, as the concept
parser does.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Mapping, Sequence

from .errors import BCDLError, CompositionError, IllFormedTermError, ParseError, ProofError
from .infoterm import (
    DEFAULT_CAP,
    InfoTerm,
    Tag,
    belongs,
    enumerate_realizers,
    enumerate_terms,
    format_literal,
    realizes,
    realizes_tuple,
)
from .ndproof import Operator, Proof, apply_operator, check_proof, format_sequent, load_proof
from .semantics import Model
from .syntax import (
    Concept,
    Formula,
    Member,
    Signature,
    Subsume,
    Substitution,
    Theory,
    TokenStream,
    Var,
    _Parser,
    conj,
    disj,
    format_concept,
    format_formula,
)

Implementation = Callable[[str, InfoTerm], InfoTerm]

RULES = ("AND", "CASE", "SEQ", "AX", "ENV")


@dataclass(frozen=True)
class ServiceSpec:
    name: str
    param: str
    pre: Concept
    post: Concept

    def pre_at(self, t) -> Member:
        return Member(t, self.pre)

    def post_at(self, t) -> Member:
        return Member(t, self.post)

    def __str__(self):
        return format_spec(self)


def format_spec(spec: ServiceSpec) -> str:
    return f"{spec.name}({spec.param}) :: {format_concept(spec.pre)} => {format_concept(spec.post)}"


def parse_spec(text: str, sig: Signature, line: int | None = None) -> ServiceSpec:
    """``Name(x) :: Pre => Post`` on one logical line."""
    ts = TokenStream(text, line)
    name = ts.expect_kind("ident", "a service name").text
    ts.expect("(")
    param = ts.expect_kind("ident", "a parameter name").text
    if sig.kind_of(param) not in ("variables", None):
        raise ParseError(f"service parameter {param!r} clashes with a {sig.kind_of(param)} name", line=line)
    ts.expect(")")
    ts.expect(":")
    ts.expect(":")
    p = _Parser(ts, sig)
    pre = p.concept()
    ts.expect("=>")
    post = p.concept()
    ts.expect_end()
    return ServiceSpec(name, param, pre, post)


def parse_specs(text: str, sig: Signature) -> list[ServiceSpec]:
    """Specs in a file; a spec starts on a line containing ``::`` and may
    continue over the following indented or ``=>``-led lines."""
    chunks: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if "::" in line and not line[0].isspace():
            chunks.append((lineno, [line.strip()]))
        elif chunks:
            chunks[-1][1].append(line.strip())
        else:
            raise ParseError("expected 'Name(x) :: Pre => Post'", line=lineno)
    return [parse_spec(" ".join(parts), sig, lineno) for lineno, parts in chunks]


def load_specs(paths: Sequence, sig: Signature) -> dict[str, ServiceSpec]:
    library: dict[str, ServiceSpec] = {}
    for path in paths:
        for spec in parse_specs(Path(path).read_text(encoding="utf-8"), sig):
            if spec.name in library and library[spec.name] != spec:
                raise ParseError(f"service {spec.name!r} specified twice with different contracts")
            library[spec.name] = spec
    return library


# ---------------------------------------------------------------------------
# Environments


@dataclass(frozen=True)
class Environment:
    """Signature, theory, TBox information terms and implemented services."""

    signature: Signature
    theory: Theory
    eta: tuple[InfoTerm, ...]
    services: tuple[tuple[ServiceSpec, Implementation], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "eta", tuple(self.eta))
        object.__setattr__(self, "services", tuple(self.services))
        if len(self.eta) != len(self.theory.tbox):
            raise ValueError(f"eta has {len(self.eta)} entries for {len(self.theory.tbox)} TBox axioms")
        for i, (eta, ax) in enumerate(zip(self.eta, self.theory.tbox)):
            if not belongs(eta, ax, self.signature):
                raise IllFormedTermError(f"eta is not an information term for {format_formula(ax)}", i)
        names = [s.name for s, _ in self.services]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise ValueError(f"duplicate services: {', '.join(sorted(dupes))}")

    def service(self, name: str) -> tuple[ServiceSpec, Implementation]:
        for spec, impl in self.services:
            if spec.name == name:
                return spec, impl
        raise KeyError(name)

    def eta_for(self, axiom: Subsume) -> InfoTerm:
        return self.eta[self.theory.tbox.index(axiom)]


# ---------------------------------------------------------------------------
# Compositions


@dataclass(frozen=True)
class Composition:
    rule: str
    spec: ServiceSpec
    children: tuple["Composition", ...] = ()
    acs: tuple[tuple[str, Proof], ...] = ()
    ac_sources: tuple[tuple[str, str], ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unknown composition rule {self.rule!r}")
        if self.rule in ("AND", "CASE", "SEQ") and not self.children:
            raise ValueError(f"{self.rule} needs at least one child")
        if self.rule in ("AX", "ENV") and self.children:
            raise ValueError(f"{self.rule} nodes have no children")

    def ac(self, key: str) -> Proof:
        for k, pi in self.acs:
            if k == key:
                return pi
        raise KeyError(key)

    def with_ac(self, key: str, pi: Proof) -> "Composition":
        acs = tuple((k, pi if k == key else p) for k, p in self.acs)
        return Composition(self.rule, self.spec, self.children, acs, self.ac_sources)

    def nodes(self, path: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], "Composition"]]:
        yield path, self
        for i, child in enumerate(self.children):
            yield from child.nodes(path + (i,))


def ac_obligations(comp: Composition) -> list[tuple[str, Concept, Concept]]:
    """``(key, hypothesis concept, goal concept)`` for every AC of a node."""
    a, b = comp.spec.pre, comp.spec.post
    kids = [c.spec for c in comp.children]
    n = len(kids)
    match comp.rule:
        case "AND":
            obs = [(f"a{k + 1}", a, kids[k].pre) for k in range(n)]
            return obs + [("b", conj(*(s.post for s in kids)), b)]
        case "CASE":
            return [("a", a, disj(*(s.pre for s in kids)))] + [(f"b{k + 1}", kids[k].post, b) for k in range(n)]
        case "SEQ":
            obs = [("b1", a, kids[0].pre)]
            obs += [(f"b{k + 1}", kids[k - 1].post, kids[k].pre) for k in range(1, n)]
            return obs + [("c", kids[-1].post, b)]
        case "AX":
            return [("a", a, b)]
    return []


def ac_sequent(comp: Composition, key: str) -> tuple[Formula, Formula]:
    for k, hyp_c, goal_c in ac_obligations(comp):
        if k == key:
            x = Var(comp.spec.param)
            return Member(x, hyp_c), Member(x, goal_c)
    raise KeyError(key)


@dataclass(frozen=True)
class Obligation:
    path: tuple[int, ...]
    key: str
    sequent: str


@dataclass(frozen=True)
class CompositionReport:
    valid: bool
    obligations: tuple[Obligation, ...]
    nodes: int


def check_composition(env: Environment, comp: Composition) -> CompositionReport:
    """Verify ENV references, AC sequent shapes and every embedded proof.

    Raises :class:`CompositionError` with kind ``spec-mismatch``,
    ``AC-sequent-shape`` or ``embedded-proof-invalid``.
    """
    obligations: list[Obligation] = []
    count = 0
    tbox = set(env.theory.tbox)
    for path, node in comp.nodes():
        count += 1
        if node.rule == "ENV":
            try:
                spec, _ = env.service(node.spec.name)
            except KeyError:
                raise CompositionError(
                    "spec-mismatch", f"no environment service named {node.spec.name!r}", path
                ) from None
            if spec != node.spec:
                raise CompositionError(
                    "spec-mismatch", f"{format_spec(node.spec)} differs from environment {format_spec(spec)}", path
                )
            continue
        expected = {key for key, _, _ in ac_obligations(node)}
        given = {key for key, _ in node.acs}
        if expected != given:
            missing = ", ".join(sorted(expected - given)) or "-"
            extra = ", ".join(sorted(given - expected)) or "-"
            raise CompositionError(
                "AC-sequent-shape", f"{node.rule} expects conditions {sorted(expected)}; missing {missing}, extra {extra}", path
            )
        for key, pi in node.acs:
            hyp_f, goal_f = ac_sequent(node, key)
            try:
                check_proof(pi, env.signature)
            except ProofError as e:
                raise CompositionError("embedded-proof-invalid", f"condition {key}: {e}", path, e) from e
            if pi.goal != goal_f or not set(pi.context) <= tbox | {hyp_f}:
                want = format_sequent_parts(["T", format_formula(hyp_f)], goal_f)
                raise CompositionError(
                    "AC-sequent-shape",
                    f"condition {key} proves {format_sequent(pi.sequent)}, expected {want}",
                    path,
                )
            obligations.append(Obligation(path, key, format_sequent(pi.sequent)))
    return CompositionReport(True, tuple(obligations), count)


def format_sequent_parts(context: Sequence[str], goal: Formula) -> str:
    return f"{', '.join(context)} |- {format_formula(goal)}"


# ---------------------------------------------------------------------------
# Compilation and execution


@dataclass(frozen=True)
class TraceEvent:
    path: tuple[int, ...]
    tag: str
    label: str
    input: InfoTerm
    output: InfoTerm
    replay: Callable[[InfoTerm], InfoTerm] | None = field(default=None, compare=False, repr=False)

    @property
    def where(self) -> str:
        return "root" + "".join(f".{i}" for i in self.path)


class Trace(list):
    """Events in pre-order of the composition tree; AC and service events
    appear in the order they were evaluated within their node."""

    def format(self, notation: str = "literal") -> str:
        from .infoterm import format_compact

        fmt = format_compact if notation == "compact" else format_literal
        return "".join(
            f"{e.where}\t{e.tag}\t{e.label}\t{fmt(e.input)}\t{fmt(e.output)}\n" for e in self
        )


class CompiledService:
    """The implementation a checked composition denotes."""

    def __init__(self, env: Environment, comp: Composition):
        self.env = env
        self.comp = comp
        self.spec = comp.spec

    def __call__(self, t: str, alpha: InfoTerm) -> InfoTerm:
        return self.run(t, alpha, None)

    def run(self, t: str, alpha: InfoTerm, trace: Trace | None) -> InfoTerm:
        return self._node(self.comp, (), t, alpha, trace)

    def _node(self, node: Composition, path, t: str, alpha: InfoTerm, trace: Trace | None) -> InfoTerm:
        slot = None
        if trace is not None:
            slot = len(trace)
            trace.append(None)
        try:
            out = self._dispatch(node, path, t, alpha, trace)
        except IllFormedTermError as e:
            raise CompositionError("ill-formed-input", str(e), path, e) from e
        if trace is not None:
            trace[slot] = TraceEvent(
                path, node.rule, node.spec.name, alpha, out,
                lambda a, node=node, path=path: self._node(node, path, t, a, None),
            )
        return out

    def _ac(self, node: Composition, path, key: str, t: str, alpha: InfoTerm, trace) -> InfoTerm:
        pi = node.ac(key)
        hyp_f, _ = ac_sequent(node, key)
        sigma = Substitution.of({node.spec.param: t})

        def run(a: InfoTerm) -> InfoTerm:
            gamma = [a if k == hyp_f else self.env.eta_for(k) for k in pi.context]
            return apply_operator(Operator(pi, self.env.signature), sigma, gamma)

        out = run(alpha)
        if trace is not None:
            trace.append(TraceEvent(path, f"{node.rule}.{key}", node.spec.name, alpha, out, run))
        return out

    def _dispatch(self, node: Composition, path, t: str, alpha: InfoTerm, trace) -> InfoTerm:
        kids = node.children
        match node.rule:
            case "ENV":
                _, impl = self.env.service(node.spec.name)
                return impl(t, alpha)
            case "AX":
                return self._ac(node, path, "a", t, alpha, trace)
            case "AND":
                outs = []
                for k, child in enumerate(kids):
                    arg = self._ac(node, path, f"a{k + 1}", t, alpha, trace)
                    outs.append(self._node(child, path + (k,), t, arg, trace))
                combined = outs[-1]
                from .infoterm import Pair

                for o in reversed(outs[:-1]):
                    combined = Pair(o, combined)
                return self._ac(node, path, "b", t, combined, trace)
            case "CASE":
                tagged = self._ac(node, path, "a", t, alpha, trace)
                k, arg = _untag(tagged, len(kids), path)
                out = self._node(kids[k], path + (k,), t, arg, trace)
                return self._ac(node, path, f"b{k + 1}", t, out, trace)
            case "SEQ":
                current = alpha
                for k, child in enumerate(kids):
                    current = self._ac(node, path, f"b{k + 1}", t, current, trace)
                    current = self._node(child, path + (k,), t, current, trace)
                return self._ac(node, path, "c", t, current, trace)
        raise ValueError(node.rule)


def _untag(eta: InfoTerm, n: int, path) -> tuple[int, InfoTerm]:
    """Decode a right-nested n-ary disjunction term into (index, payload)."""
    k = 0
    while k < n - 1:
        if not isinstance(eta, Tag):
            raise CompositionError("internal", "CASE condition did not produce a tagged term", path)
        if eta.k == 1:
            return k, eta.arg
        if eta.k != 2:
            raise CompositionError("internal", f"CASE tag {eta.k} out of range", path)
        eta = eta.arg
        k += 1
    return n - 1, eta


def compile_composition(env: Environment, comp: Composition) -> CompiledService:
    return CompiledService(env, comp)


class PreconditionError(IllFormedTermError):
    kind = "precondition-violation"


def execute(env: Environment, comp: Composition, t: str, alpha: InfoTerm) -> tuple[InfoTerm, Trace]:
    if not env.signature.is_individual(t):
        raise PreconditionError(f"{t!r} is not an individual of the signature")
    if not belongs(alpha, comp.spec.pre_at(t), env.signature):
        raise PreconditionError(
            f"{format_literal(alpha)} is not an information term for {format_formula(comp.spec.pre_at(t))}"
        )
    trace = Trace()
    out = CompiledService(env, comp).run(t, alpha, trace)
    return out, trace


# ---------------------------------------------------------------------------
# Uniform solvability


@dataclass(frozen=True)
class Counterexample:
    individual: str
    input: InfoTerm
    output: InfoTerm | None
    reason: str


@dataclass(frozen=True)
class UniformReport:
    ok: bool
    checked: int
    counterexample: Counterexample | None = None

    def __bool__(self):
        return self.ok


def verify_uniform(
    m: Model,
    spec: ServiceSpec,
    impl: Implementation,
    cap: int = DEFAULT_CAP,
    *,
    exhaustive: bool = False,
) -> UniformReport:
    """Check that ``impl`` maps realizers of ``t:pre`` to realizers of
    ``t:post`` for every named individual t.

    By default only the realizing inputs are generated, straight from the
    model. ``exhaustive`` walks the whole input space and filters it, which
    is slower but uses nothing beyond enumeration and ``realizes``.
    """
    checked = 0
    for t in m.individuals:
        pre, post = spec.pre_at(t), spec.post_at(t)
        if exhaustive:
            inputs = (a for a in enumerate_terms(pre, m, cap) if realizes(m, a, pre))
        else:
            inputs = enumerate_realizers(m, pre, cap)
        for alpha in inputs:
            checked += 1
            try:
                out = impl(t, alpha)
            except BCDLError as e:
                return UniformReport(False, checked, Counterexample(t, alpha, None, f"implementation failed: {e}"))
            if not belongs(out, post, m):
                return UniformReport(False, checked, Counterexample(t, alpha, out, "output is not a term for the post-condition"))
            if not realizes(m, out, post):
                return UniformReport(False, checked, Counterexample(t, alpha, out, "output does not realize the post-condition"))
    return UniformReport(True, checked)


def is_environment_model(m: Model, env: Environment, cap: int = DEFAULT_CAP) -> bool:
    """M realizes the TBox through eta and every service solves its spec."""
    if not realizes_tuple(m, env.eta, env.theory.tbox):
        return False
    return all(verify_uniform(m, spec, impl, cap).ok for spec, impl in env.services)


# ---------------------------------------------------------------------------
# Composition files


def parse_composition(
    text: str,
    sig: Signature,
    specs: Mapping[str, ServiceSpec],
    base_dir: Path | None = None,
    proofs: Mapping[str, Proof] | None = None,
) -> Composition:
    """Read the indented block format::

        SEQ ProduceAndShip
          ac b1 proofs/pas_b1.ndp
          AND DoRequest
            ...
          ENV ProcessOffers

    A rule line names its service, either from ``specs`` or inline as
    ``RULE Name(x) :: Pre => Post``. ``ac KEY PATH`` lines attach proof files
    (relative to ``base_dir``) to the enclosing node.
    """
    base_dir = Path(base_dir or ".")
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        indent = len(body) - len(body.lstrip(" "))
        entries.append((lineno, indent, body.strip()))
    if not entries:
        raise ParseError("empty composition file")
    pos = 0

    def block(min_indent: int) -> Composition:
        nonlocal pos
        lineno, indent, line = entries[pos]
        word, _, rest = line.partition(" ")
        if word not in RULES:
            raise ParseError(f"expected a rule line ({', '.join(RULES)}), got {line!r}", line=lineno)
        spec = _node_spec(rest.strip(), sig, specs, lineno)
        pos += 1
        acs: list[tuple[str, Proof]] = []
        sources: list[tuple[str, str]] = []
        children: list[Composition] = []
        child_indent = None
        while pos < len(entries) and entries[pos][1] > indent:
            c_lineno, c_indent, c_line = entries[pos]
            if child_indent is None:
                child_indent = c_indent
            elif c_indent != child_indent:
                raise ParseError("inconsistent indentation", line=c_lineno)
            if c_line.startswith("ac "):
                parts = c_line.split()
                if len(parts) != 3:
                    raise ParseError("expected 'ac KEY PATH'", line=c_lineno)
                _, key, ref = parts
                try:
                    pi = proofs[ref] if proofs is not None and ref in proofs else load_proof(base_dir / ref, sig)
                except ParseError as e:
                    raise ParseError(f"in proof {ref}: {e}", line=c_lineno) from e
                except ProofError as e:
                    raise CompositionError("embedded-proof-invalid", f"{ref}: {e}") from e
                acs.append((key, pi))
                sources.append((key, ref))
                pos += 1
            else:
                children.append(block(c_indent))
        try:
            return Composition(word, spec, tuple(children), tuple(acs), tuple(sources))
        except ValueError as e:
            raise ParseError(str(e), line=lineno) from e

    comp = block(0)
    if pos != len(entries):
        raise ParseError("trailing lines after the root composition", line=entries[pos][0])
    return comp


def _node_spec(text: str, sig: Signature, specs: Mapping[str, ServiceSpec], lineno: int) -> ServiceSpec:
    if "::" in text:
        return parse_spec(text, sig, lineno)
    name = text.strip()
    if name not in specs:
        raise ParseError(f"unknown service {name!r}", line=lineno)
    return specs[name]


def load_composition(path, sig: Signature, specs: Mapping[str, ServiceSpec]) -> Composition:
    path = Path(path)
    return parse_composition(path.read_text(encoding="utf-8"), sig, specs, path.parent)


def format_composition(comp: Composition, indent: int = 0) -> str:
    pad = "  " * indent
    lines = [f"{pad}{comp.rule} {comp.spec.name}"]
    sources = dict(comp.ac_sources)
    for key, _ in comp.acs:
        lines.append(f"{pad}  ac {key} {sources.get(key, '<inline>')}")
    for child in comp.children:
        lines.append(format_composition(child, indent + 1).rstrip("\n"))
    return "\n".join(lines) + "\n"
