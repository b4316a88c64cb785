"""Bounded backward proof search.

Facts reachable by the non-branching eliminations (projections, TBox
unfolding of atomic memberships, universal instantiation along asserted
roles) are saturated first; the search then tries introduction rules on the
goal and finally case splits on disjunctive and existential facts. Depth
grows by iterative deepening. The search is incomplete: ``Unknown`` carries
no claim about derivability.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from .ndproof import (
    Proof,
    and_e,
    and_i,
    bot_e,
    bot_i,
    check_proof,
    exists_e,
    exists_i,
    forall_e,
    forall_i,
    hyp,
    not_i,
    or_e,
    or_i,
    sub_e,
)
from .syntax import (
    BOT,
    And,
    Atom,
    Exists,
    Forall,
    Formula,
    Member,
    Not,
    Or,
    Role,
    Signature,
    Subsume,
    Var,
    formula_terms,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchBudget:
    max_depth: int = 12
    max_nodes: int = 50_000

    def __post_init__(self):
        if self.max_depth <= 0 or self.max_nodes <= 0:
            raise ValueError("search budget limits must be positive")


DEFAULT_BUDGET = SearchBudget()


@dataclass(frozen=True)
class Unknown:
    reason: str
    nodes: int
    depth: int

    def __bool__(self):
        return False


@dataclass
class _Stats:
    nodes: int = 0
    hit_depth_limit: bool = False


class _OutOfNodes(Exception):
    pass


@dataclass
class _Search:
    tbox: tuple[Subsume, ...]
    budget: SearchBudget
    taken: set[str]
    stats: _Stats = field(default_factory=_Stats)
    fresh_counter: int = 0

    def fresh(self) -> str:
        while True:
            self.fresh_counter += 1
            name = f"p{self.fresh_counter}"
            if name not in self.taken:
                self.taken.add(name)
                return name

    def saturate(self, facts: dict[Formula, Proof]) -> dict[Formula, Proof]:
        facts = dict(facts)
        changed = True
        while changed:
            changed = False
            for k, pf in list(facts.items()):
                match k:
                    case Member(t, And(l, r)):
                        if Member(t, l) not in facts:
                            facts[Member(t, l)] = and_e(1, pf)
                            changed = True
                        if Member(t, r) not in facts:
                            facts[Member(t, r)] = and_e(2, pf)
                            changed = True
                    case Member(t, Atom(a)):
                        for ax in self.tbox:
                            new = Member(t, ax.concept)
                            if ax.atom == a and new not in facts:
                                facts[new] = sub_e(ax, pf)
                                changed = True
                    case Member(s, Forall(role, c)):
                        for other in list(facts):
                            if isinstance(other, Role) and other.s == s and other.role == role:
                                new = Member(other.t, c)
                                if new not in facts:
                                    facts[new] = forall_e(other, pf)
                                    changed = True
                    case Member(t, Not(c)):
                        pos = Member(t, c)
                        if pos in facts and BOT not in facts:
                            facts[BOT] = bot_i(facts[pos], pf)
                            changed = True
        return facts

    def search(self, goal: Formula, facts: dict, depth: int, opened: frozenset, seen: frozenset) -> Proof | None:
        self.stats.nodes += 1
        if self.stats.nodes > self.budget.max_nodes:
            raise _OutOfNodes
        facts = self.saturate(facts)
        if goal in facts:
            return facts[goal]
        if BOT in facts:
            return bot_e(goal, facts[BOT])
        if depth <= 0:
            self.stats.hit_depth_limit = True
            return None
        key = (goal, frozenset(facts))
        if key in seen:
            return None
        seen = seen | {key}
        d = depth - 1

        match goal:
            case Member(t, And(l, r)):
                a = self.search(Member(t, l), facts, d, opened, seen)
                if a is not None:
                    b = self.search(Member(t, r), facts, d, opened, seen)
                    if b is not None:
                        return and_i(a, b)
            case Member(t, Or(l, r)):
                for i, part in ((1, l), (2, r)):
                    a = self.search(Member(t, part), facts, d, opened, seen)
                    if a is not None:
                        return or_i(i, goal, a)
            case Member(t, Exists(role, c)):
                for k in list(facts):
                    if isinstance(k, Role) and k.s == t and k.role == role:
                        a = self.search(Member(k.t, c), facts, d, opened, seen)
                        if a is not None:
                            return exists_i(k, a)
            case Member(t, Forall(role, c)):
                p = self.fresh()
                edge = Role(t, Var(p), role)
                a = self.search(Member(Var(p), c), {**facts, edge: hyp(edge)}, d, opened, seen)
                if a is not None:
                    return forall_i(p, goal, a)
            case Member(t, Not(c)):
                assumption = Member(t, c)
                a = self.search(BOT, {**facts, assumption: hyp(assumption)}, d, opened, seen)
                if a is not None:
                    return not_i(assumption, a)
            case _ if goal == BOT:
                for k in list(facts):
                    if isinstance(k, Member) and isinstance(k.concept, Not):
                        a = self.search(Member(k.t, k.concept.arg), facts, d, opened, seen)
                        if a is not None:
                            return bot_i(a, facts[k])

        for k in list(facts):
            if k in opened or not isinstance(k, Member):
                continue
            if isinstance(k.concept, Or):
                left, right = Member(k.t, k.concept.left), Member(k.t, k.concept.right)
                now = opened | {k}
                b1 = self.search(goal, {**facts, left: hyp(left)}, d, now, seen)
                if b1 is None:
                    continue
                b2 = self.search(goal, {**facts, right: hyp(right)}, d, now, seen)
                if b2 is not None:
                    return or_e(facts[k], b1, b2)
        for k in list(facts):
            if k in opened or not isinstance(k, Member) or not isinstance(k.concept, Exists):
                continue
            p = self.fresh()
            edge = Role(k.t, Var(p), k.concept.role)
            member = Member(Var(p), k.concept.arg)
            b = self.search(goal, {**facts, edge: hyp(edge), member: hyp(member)}, d, opened | {k}, seen)
            if b is not None:
                return exists_e(p, facts[k], b)
        return None


def prove(
    tbox: Sequence[Subsume],
    context: Sequence[Formula],
    goal: Formula,
    budget: SearchBudget = DEFAULT_BUDGET,
    sig: Signature | None = None,
) -> Proof | Unknown:
    """Search for a proof of ``tbox, context |- goal``.

    The returned proof has passed :func:`check_proof`; its context is the
    subset of the assumptions it actually uses.
    """
    tbox = tuple(tbox)
    taken = _names(list(tbox) + list(context) + [goal], sig)
    state = _Search(tbox, budget, set(taken))
    facts = {k: hyp(k) for k in context}
    depth = 0
    try:
        for depth in range(1, budget.max_depth + 1):
            state.stats.hit_depth_limit = False
            state.fresh_counter = 0
            state.taken = set(taken)
            found = state.search(goal, facts, depth, frozenset(), frozenset())
            if found is not None:
                check_proof(found, sig)
                log.debug("proved %s at depth %d after %d nodes", goal, depth, state.stats.nodes)
                return found
            if not state.stats.hit_depth_limit:
                return Unknown("search space exhausted", state.stats.nodes, depth)
    except _OutOfNodes:
        return Unknown("node budget exhausted", state.stats.nodes, depth)
    return Unknown("depth budget exhausted", state.stats.nodes, depth)


def _names(formulas: list[Formula], sig: Signature | None) -> set[str]:
    taken: set[str] = set()
    if sig is not None:
        taken |= set(sig.individuals) | set(sig.roles) | set(sig.concept_names) | set(sig.variables)
    for k in formulas:
        for t in formula_terms(k):
            taken.add(t.name if isinstance(t, Var) else t)
    return taken
