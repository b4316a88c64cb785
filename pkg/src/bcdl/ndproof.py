"""Natural-deduction proofs: construction, checking and operator extraction.

Every node stores the sequent it concludes. Contexts are the open
assumptions of the subtree: two-premise rules concatenate premise contexts
and drop duplicates, discharging rules remove the discharged formula when it
is present. A hypothesis leaf may carry extra context, which is how
weakening enters a proof.

Proof files are s-expressions::

    (andE1 (hyp "x : A and B"))
    (existsE p (hyp "x : exists R.A") (existsI "(x, p) : R" (hyp "p : A")))

Formulas are quoted strings; eigenvariables of ``existsE``/``forallI`` are
bare names and need not be declared in the signature.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import IllFormedTermError, ParseError, ProofError, UnboundVariableError
from .infoterm import TT, Fun, InfoTerm, Pair, Tag, Wit, belongs, canonical, format_literal
from .syntax import (
    BOT,
    And,
    Atom,
    Bot,
    Exists,
    Forall,
    Formula,
    Member,
    Not,
    Or,
    Role,
    Signature,
    Subsume,
    Substitution,
    Var,
    apply_subst,
    concept_names_in,
    format_formula,
    formula_terms,
    free_vars,
    occurs,
    parse_formula,
)


class Rule(enum.Enum):
    HYP = "hyp"
    BOT_I = "botI"
    BOT_E = "botE"
    SUB_E = "subE"
    NOT_I = "notI"
    AND_I = "andI"
    AND_E1 = "andE1"
    AND_E2 = "andE2"
    OR_I1 = "orI1"
    OR_I2 = "orI2"
    OR_E = "orE"
    EXISTS_I = "existsI"
    EXISTS_E = "existsE"
    FORALL_I = "forallI"
    FORALL_E = "forallE"


ARITY = {
    Rule.HYP: 0,
    Rule.BOT_I: 2,
    Rule.BOT_E: 1,
    Rule.SUB_E: 1,
    Rule.NOT_I: 1,
    Rule.AND_I: 2,
    Rule.AND_E1: 1,
    Rule.AND_E2: 1,
    Rule.OR_I1: 1,
    Rule.OR_I2: 1,
    Rule.OR_E: 3,
    Rule.EXISTS_I: 1,
    Rule.EXISTS_E: 2,
    Rule.FORALL_I: 1,
    Rule.FORALL_E: 1,
}


@dataclass(frozen=True)
class Sequent:
    context: tuple[Formula, ...]
    goal: Formula

    def __str__(self):
        return format_sequent(self)


def format_sequent(s: Sequent) -> str:
    ctx = ", ".join(format_formula(k) for k in s.context)
    return f"{ctx} |- {format_formula(s.goal)}" if ctx else f"|- {format_formula(s.goal)}"


@dataclass(frozen=True)
class Proof:
    """One rule application.

    ``data`` is the rule's formula argument: the stated goal (hyp, botE,
    orI, forallI), the subsumption used (subE), the discharged membership
    (notI), or the role assertion added (existsI, forallE).
    """

    rule: Rule
    goal: Formula
    context: tuple[Formula, ...]
    premises: tuple["Proof", ...] = ()
    eigen: str | None = None
    data: Formula | None = None

    @property
    def sequent(self) -> Sequent:
        return Sequent(self.context, self.goal)

    def nodes(self):
        yield self
        for p in self.premises:
            yield from p.nodes()

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def depth(self) -> int:
        return 1 + max((p.depth() for p in self.premises), default=0)


def _dedup(formulas: Iterable[Formula]) -> tuple[Formula, ...]:
    return tuple(dict.fromkeys(formulas))


def _remove(formulas: Iterable[Formula], *gone: Formula) -> tuple[Formula, ...]:
    return tuple(k for k in formulas if k not in gone)


def _mismatch(message: str, path=()):
    return ProofError("rule-mismatch", message, path)


def _member(k: Formula, what: str, path) -> Member:
    if not isinstance(k, Member):
        raise _mismatch(f"{what} must be a membership, got {format_formula(k)}", path)
    return k


def conclude(
    rule: Rule,
    premises: Sequence[Proof],
    *,
    data: Formula | None = None,
    eigen: str | None = None,
    path: tuple[int, ...] = (),
) -> tuple[Formula, tuple[Formula, ...]]:
    """The (goal, context) a rule application concludes from its premises.

    Raises a ``rule-mismatch`` :class:`ProofError` when the premises do not
    fit the rule schema. Eigenvariable side conditions are not checked here.
    """
    if rule is Rule.HYP:
        raise ValueError("hypotheses conclude their stated sequent")
    if len(premises) != ARITY[rule]:
        raise _mismatch(f"{rule.value} takes {ARITY[rule]} premises, got {len(premises)}", path)
    goals = [p.goal for p in premises]
    ctxs = [p.context for p in premises]
    needs_data = {Rule.BOT_E, Rule.SUB_E, Rule.NOT_I, Rule.OR_I1, Rule.OR_I2, Rule.EXISTS_I, Rule.FORALL_I, Rule.FORALL_E}
    if rule in needs_data and data is None:
        raise _mismatch(f"{rule.value} needs a formula argument", path)
    if rule in (Rule.EXISTS_E, Rule.FORALL_I) and not eigen:
        raise _mismatch(f"{rule.value} needs an eigenvariable", path)

    match rule:
        case Rule.BOT_I:
            a = _member(goals[0], "first premise", path)
            b = _member(goals[1], "second premise", path)
            if b != Member(a.t, Not(a.concept)):
                raise _mismatch(
                    f"premises {format_formula(a)} and {format_formula(b)} are not t:C and t:not C", path
                )
            return BOT, _dedup(ctxs[0] + ctxs[1])
        case Rule.BOT_E:
            if goals[0] != BOT:
                raise _mismatch(f"premise must conclude bot, got {format_formula(goals[0])}", path)
            return data, ctxs[0]
        case Rule.SUB_E:
            if not isinstance(data, Subsume):
                raise _mismatch(f"subE needs a subsumption, got {format_formula(data)}", path)
            a = _member(goals[0], "premise", path)
            if a.concept != Atom(data.atom):
                raise _mismatch(f"premise {format_formula(a)} is not about {data.atom}", path)
            return Member(a.t, data.concept), _dedup(ctxs[0] + (data,))
        case Rule.NOT_I:
            d = _member(data, "discharged formula", path)
            if goals[0] != BOT:
                raise _mismatch(f"premise must conclude bot, got {format_formula(goals[0])}", path)
            return Member(d.t, Not(d.concept)), _remove(ctxs[0], d)
        case Rule.AND_I:
            a = _member(goals[0], "first premise", path)
            b = _member(goals[1], "second premise", path)
            if a.t != b.t:
                raise _mismatch("conjuncts are about different terms", path)
            return Member(a.t, And(a.concept, b.concept)), _dedup(ctxs[0] + ctxs[1])
        case Rule.AND_E1 | Rule.AND_E2:
            a = _member(goals[0], "premise", path)
            if not isinstance(a.concept, And):
                raise _mismatch(f"premise {format_formula(a)} is not a conjunction", path)
            part = a.concept.left if rule is Rule.AND_E1 else a.concept.right
            return Member(a.t, part), ctxs[0]
        case Rule.OR_I1 | Rule.OR_I2:
            g = _member(data, "goal", path)
            if not isinstance(g.concept, Or):
                raise _mismatch(f"goal {format_formula(g)} is not a disjunction", path)
            part = g.concept.left if rule is Rule.OR_I1 else g.concept.right
            if goals[0] != Member(g.t, part):
                raise _mismatch(f"premise {format_formula(goals[0])} is not the chosen disjunct", path)
            return g, ctxs[0]
        case Rule.OR_E:
            a = _member(goals[0], "first premise", path)
            if not isinstance(a.concept, Or):
                raise _mismatch(f"premise {format_formula(a)} is not a disjunction", path)
            if goals[1] != goals[2]:
                raise _mismatch("case branches conclude different formulas", path)
            left, right = Member(a.t, a.concept.left), Member(a.t, a.concept.right)
            return goals[1], _dedup(ctxs[0] + _remove(ctxs[1], left) + _remove(ctxs[2], right))
        case Rule.EXISTS_I:
            if not isinstance(data, Role):
                raise _mismatch(f"existsI needs a role assertion, got {format_formula(data)}", path)
            a = _member(goals[0], "premise", path)
            if a.t != data.t:
                raise _mismatch(f"premise is about {a.t}, role points to {data.t}", path)
            return Member(data.s, Exists(data.role, a.concept)), _dedup(ctxs[0] + (data,))
        case Rule.EXISTS_E:
            a = _member(goals[0], "first premise", path)
            if not isinstance(a.concept, Exists):
                raise _mismatch(f"premise {format_formula(a)} is not existential", path)
            p = Var(eigen)
            discharged = (Role(a.t, p, a.concept.role), Member(p, a.concept.arg))
            return goals[1], _dedup(ctxs[0] + _remove(ctxs[1], *discharged))
        case Rule.FORALL_I:
            g = _member(data, "goal", path)
            if not isinstance(g.concept, Forall):
                raise _mismatch(f"goal {format_formula(g)} is not universal", path)
            p = Var(eigen)
            if goals[0] != Member(p, g.concept.arg):
                raise _mismatch(f"premise must conclude {eigen} : ..., got {format_formula(goals[0])}", path)
            return g, _remove(ctxs[0], Role(g.t, p, g.concept.role))
        case Rule.FORALL_E:
            if not isinstance(data, Role):
                raise _mismatch(f"forallE needs a role assertion, got {format_formula(data)}", path)
            a = _member(goals[0], "premise", path)
            if not isinstance(a.concept, Forall) or a.t != data.s or a.concept.role != data.role:
                raise _mismatch(f"premise {format_formula(a)} is not {data.s} : forall {data.role}.C", path)
            return Member(data.t, a.concept.arg), _dedup(ctxs[0] + (data,))
    raise _mismatch(f"unknown rule {rule}", path)


# ---------------------------------------------------------------------------
# Builders


def _node(rule: Rule, premises: Sequence[Proof], data=None, eigen=None) -> Proof:
    goal, ctx = conclude(rule, premises, data=data, eigen=eigen)
    return Proof(rule, goal, ctx, tuple(premises), eigen, data)


def hyp(k: Formula, *extra: Formula) -> Proof:
    return Proof(Rule.HYP, k, _dedup((k,) + extra), (), None, k)


def bot_i(p1: Proof, p2: Proof) -> Proof:
    return _node(Rule.BOT_I, (p1, p2))


def bot_e(goal: Formula, p: Proof) -> Proof:
    return _node(Rule.BOT_E, (p,), goal)


def sub_e(axiom: Subsume, p: Proof) -> Proof:
    return _node(Rule.SUB_E, (p,), axiom)


def not_i(discharged: Member, p: Proof) -> Proof:
    return _node(Rule.NOT_I, (p,), discharged)


def and_i(p1: Proof, p2: Proof) -> Proof:
    return _node(Rule.AND_I, (p1, p2))


def and_e(k: int, p: Proof) -> Proof:
    return _node(Rule.AND_E1 if k == 1 else Rule.AND_E2, (p,))


def or_i(k: int, goal: Member, p: Proof) -> Proof:
    return _node(Rule.OR_I1 if k == 1 else Rule.OR_I2, (p,), goal)


def or_e(p1: Proof, p2: Proof, p3: Proof) -> Proof:
    return _node(Rule.OR_E, (p1, p2, p3))


def exists_i(role: Role, p: Proof) -> Proof:
    return _node(Rule.EXISTS_I, (p,), role)


def exists_e(eigen: str, p1: Proof, p2: Proof) -> Proof:
    return _node(Rule.EXISTS_E, (p1, p2), eigen=eigen)


def forall_i(eigen: str, goal: Member, p: Proof) -> Proof:
    return _node(Rule.FORALL_I, (p,), goal, eigen)


def forall_e(role: Role, p: Proof) -> Proof:
    return _node(Rule.FORALL_E, (p,), role)


# ---------------------------------------------------------------------------
# Checking


def check_proof(pi: Proof, sig: Signature | None = None) -> Sequent:
    """Verify every node of ``pi`` and return the root sequent.

    Errors carry one of the kinds ``rule-mismatch``,
    ``eigenvariable-capture`` or ``hypothesis-not-in-context`` and the path
    of premise indices leading to the offending node.
    """
    _check(pi, (), sig)
    return pi.sequent


def _check(node: Proof, path: tuple[int, ...], sig: Signature | None):
    for i, p in enumerate(node.premises):
        _check(p, path + (i,), sig)
    if sig is not None:
        for k in (node.goal,) + node.context:
            _check_names(k, sig, path)
    if node.rule is Rule.HYP:
        if node.premises:
            raise _mismatch("hypotheses have no premises", path)
        if node.goal not in node.context:
            raise ProofError(
                "hypothesis-not-in-context", f"{format_formula(node.goal)} is not among the assumptions", path
            )
        return
    goal, ctx = conclude(node.rule, node.premises, data=node.data, eigen=node.eigen, path=path)
    if goal != node.goal:
        raise _mismatch(f"node states {format_formula(node.goal)} but the rule yields {format_formula(goal)}", path)
    if set(ctx) != set(node.context) or len(_dedup(node.context)) != len(node.context):
        raise _mismatch("node context does not match the combined premise contexts", path)
    if node.rule is Rule.EXISTS_E:
        p = node.eigen
        first = node.premises[0].goal
        discharged = (Role(first.t, Var(p), first.concept.role), Member(Var(p), first.concept.arg))
        gamma2 = _remove(node.premises[1].context, *discharged)
        if first.t == Var(p):
            raise ProofError("eigenvariable-capture", f"eigenvariable {p} equals the existential subject", path)
        for k in gamma2 + (node.goal,):
            if occurs(p, k):
                raise ProofError("eigenvariable-capture", f"eigenvariable {p} occurs in {format_formula(k)}", path)
    elif node.rule is Rule.FORALL_I:
        p = node.eigen
        if node.goal.t == Var(p):
            raise ProofError("eigenvariable-capture", f"eigenvariable {p} equals the universal subject", path)
        for k in node.context:
            if occurs(p, k):
                raise ProofError("eigenvariable-capture", f"eigenvariable {p} occurs in {format_formula(k)}", path)
    if node.eigen is not None and sig is not None and sig.kind_of(node.eigen) not in (None, "variables"):
        raise ProofError("eigenvariable-capture", f"eigenvariable {node.eigen} is a declared constant", path)


def _check_names(k: Formula, sig: Signature, path):
    for t in formula_terms(k):
        if isinstance(t, str) and not sig.is_individual(t):
            raise _mismatch(f"unknown individual {t!r}", path)
    match k:
        case Role(_, _, r):
            names = [("roles", r)]
        case Member(_, c):
            names = list(concept_names_in(c))
        case Subsume(a, c):
            names = [("concepts", a)] + list(concept_names_in(c))
        case _:
            names = []
    for kind, name in names:
        expected = "concept_names" if kind == "concepts" else "roles"
        if sig.kind_of(name) != expected:
            raise _mismatch(f"unknown {kind[:-1]} {name!r}", path)


# ---------------------------------------------------------------------------
# Extraction


@dataclass(frozen=True)
class Operator:
    """The realizability-preserving function a checked proof denotes."""

    proof: Proof
    sig: Signature = field(compare=False)

    @property
    def sequent(self) -> Sequent:
        return self.proof.sequent

    def __call__(self, sigma: Substitution, gamma: Sequence[InfoTerm]) -> InfoTerm:
        return apply_operator(self, sigma, gamma)


def extract(pi: Proof, sig: Signature) -> Operator:
    check_proof(pi, sig)
    return Operator(pi, sig)


def apply_operator(op: Operator, sigma: Substitution, gamma: Sequence[InfoTerm]) -> InfoTerm:
    """Evaluate the extracted operator on a closing substitution and a tuple
    of information terms for the (substituted) context, in context order."""
    pi = op.proof
    missing = set().union(*(free_vars(k) for k in pi.context + (pi.goal,))) - set(sigma.as_dict())
    if missing:
        raise UnboundVariableError(missing)
    if len(gamma) != len(pi.context):
        raise IllFormedTermError(
            f"expected {len(pi.context)} context terms, got {len(gamma)}", min(len(gamma), len(pi.context))
        )
    for i, (eta, k) in enumerate(zip(gamma, pi.context)):
        if not belongs(eta, apply_subst(sigma, k), op.sig):
            raise IllFormedTermError(
                f"{format_literal(eta)} is not an information term for {format_formula(apply_subst(sigma, k))}", i
            )
    env = dict(zip(pi.context, gamma))
    return _eval(pi, sigma, env, op.sig)


def _bind_defaults(sigma: Substitution, node: Proof, n: tuple[str, ...]) -> Substitution:
    free = set().union(*(free_vars(k) for k in node.context + (node.goal,)))
    unbound = sorted(free - set(sigma.as_dict()))
    for v in unbound:
        # Variables local to a subproof: any individual is a valid instance.
        sigma = sigma.update(v, n[0])
    return sigma


def _eval(node: Proof, sigma: Substitution, env: dict, sig: Signature) -> InfoTerm:
    sigma = _bind_defaults(sigma, node, sig.individuals)
    ps = node.premises
    match node.rule:
        case Rule.HYP:
            return env[node.goal]
        case Rule.BOT_I | Rule.NOT_I:
            return TT
        case Rule.BOT_E:
            return canonical(apply_subst(sigma, node.goal), sig)
        case Rule.SUB_E:
            table = env[node.data]
            return table.at(sigma.term(node.goal.t))
        case Rule.AND_I:
            return Pair(_eval(ps[0], sigma, env, sig), _eval(ps[1], sigma, env, sig))
        case Rule.AND_E1:
            return _eval(ps[0], sigma, env, sig).first
        case Rule.AND_E2:
            return _eval(ps[0], sigma, env, sig).second
        case Rule.OR_I1:
            return Tag(1, _eval(ps[0], sigma, env, sig))
        case Rule.OR_I2:
            return Tag(2, _eval(ps[0], sigma, env, sig))
        case Rule.OR_E:
            tagged = _eval(ps[0], sigma, env, sig)
            disj = ps[0].goal
            part = disj.concept.left if tagged.k == 1 else disj.concept.right
            branch_env = dict(env)
            branch_env[Member(disj.t, part)] = tagged.arg
            return _eval(ps[tagged.k], sigma, branch_env, sig)
        case Rule.EXISTS_I:
            return Wit(sigma.term(node.data.t), _eval(ps[0], sigma, env, sig))
        case Rule.EXISTS_E:
            witness = _eval(ps[0], sigma, env, sig)
            ex = ps[0].goal
            p = Var(node.eigen)
            inner_env = dict(env)
            inner_env[Role(ex.t, p, ex.concept.role)] = TT
            inner_env[Member(p, ex.concept.arg)] = witness.arg
            return _eval(ps[1], sigma.update(node.eigen, witness.d), inner_env, sig)
        case Rule.FORALL_I:
            p = Var(node.eigen)
            inner_env = dict(env)
            inner_env[Role(node.goal.t, p, node.goal.concept.role)] = TT
            return Fun(
                tuple((d, _eval(ps[0], sigma.update(node.eigen, d), inner_env, sig)) for d in sig.individuals)
            )
        case Rule.FORALL_E:
            table = _eval(ps[0], sigma, env, sig)
            return table.at(sigma.term(node.data.t))
    raise ValueError(f"unknown rule {node.rule}")


# ---------------------------------------------------------------------------
# Proof files

_SEXP_TOKEN = re.compile(r'\s+|;[^\n]*|(?P<open>\()|(?P<close>\))|(?P<str>"[^"]*")|(?P<atom>[^\s()";]+)')


def _read_sexp(text: str):
    stack: list[list] = [[]]
    pos = 0
    while pos < len(text):
        m = _SEXP_TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r} in proof", pos)
        if m.group("open"):
            stack.append([])
        elif m.group("close"):
            if len(stack) == 1:
                raise ParseError("unbalanced ')' in proof", pos)
            done = stack.pop()
            stack[-1].append(done)
        elif m.group("str") is not None:
            stack[-1].append(("str", m.group("str")[1:-1], pos))
        elif m.group("atom"):
            stack[-1].append(("atom", m.group("atom"), pos))
        pos = m.end()
    if len(stack) != 1:
        raise ParseError("unbalanced '(' in proof", len(text))
    if len(stack[0]) != 1:
        raise ParseError(f"expected exactly one proof expression, found {len(stack[0])}")
    return stack[0][0]


_RULES_BY_NAME = {r.value: r for r in Rule}


def _eigenvariables(expr) -> set[str]:
    names = set()
    if isinstance(expr, list) and expr and isinstance(expr[0], tuple) and expr[0][1] in ("existsE", "forallI"):
        if len(expr) > 1 and isinstance(expr[1], tuple) and expr[1][0] == "atom":
            names.add(expr[1][1])
    if isinstance(expr, list):
        for sub in expr:
            names |= _eigenvariables(sub)
    return names


def parse_proof(text: str, sig: Signature) -> Proof:
    expr = _read_sexp(text)
    local = sig.with_variables(sorted(n for n in _eigenvariables(expr) if sig.kind_of(n) is None))
    return _build(expr, local)


def load_proof(path, sig: Signature) -> Proof:
    return parse_proof(Path(path).read_text(encoding="utf-8"), sig)


def _build(expr, sig: Signature) -> Proof:
    if not isinstance(expr, list) or not expr or not isinstance(expr[0], tuple) or expr[0][0] != "atom":
        raise ParseError("expected a rule application '(rule ...)'")
    name, pos = expr[0][1], expr[0][2]
    rule = _RULES_BY_NAME.get(name)
    if rule is None:
        raise ParseError(f"unknown rule {name!r}", pos)
    args = expr[1:]
    strings = [a for a in args if isinstance(a, tuple) and a[0] == "str"]
    atoms = [a for a in args if isinstance(a, tuple) and a[0] == "atom"]
    subs = [a for a in args if isinstance(a, list)]

    def formula(tok) -> Formula:
        try:
            return parse_formula(tok[1], sig)
        except ParseError as e:
            raise ParseError(f"in {name} formula {tok[1]!r}: {e}", tok[2]) from e

    if rule is Rule.HYP:
        if not strings or subs or atoms:
            raise ParseError("hyp takes one or more quoted formulas", pos)
        ks = [formula(s) for s in strings]
        return hyp(ks[0], *ks[1:])
    premises = [_build(s, sig) for s in subs]
    needs_eigen = rule in (Rule.EXISTS_E, Rule.FORALL_I)
    if needs_eigen != bool(atoms) or len(atoms) > 1:
        raise ParseError(f"{name} {'needs one' if needs_eigen else 'takes no'} eigenvariable", pos)
    eigen = atoms[0][1] if atoms else None
    data = formula(strings[0]) if strings else None
    if len(strings) > 1:
        raise ParseError(f"{name} takes at most one formula argument", pos)
    if rule in (Rule.AND_I, Rule.AND_E1, Rule.AND_E2, Rule.BOT_I, Rule.OR_E, Rule.EXISTS_E) and data is not None:
        raise ParseError(f"{name} takes no formula argument", pos)
    return _node(rule, premises, data, eigen)


def format_proof(pi: Proof, indent: int = 0) -> str:
    pad = "  " * indent
    if pi.rule is Rule.HYP:
        extra = [k for k in pi.context if k != pi.goal]
        args = " ".join(f'"{format_formula(k)}"' for k in (pi.goal, *extra))
        return f"{pad}(hyp {args})"
    head = [pi.rule.value]
    if pi.eigen is not None:
        head.append(pi.eigen)
    if pi.data is not None:
        head.append(f'"{format_formula(pi.data)}"')
    inner = "\n".join(format_proof(p, indent + 1) for p in pi.premises)
    return f"{pad}({' '.join(head)}\n{inner})"
