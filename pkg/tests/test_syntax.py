import pytest
from hypothesis import given
from hypothesis import strategies as st

from bcdl.errors import NonAtomicAntecedentError, ParseError, SignatureError, UnboundVariableError, UnknownNameError
from bcdl.syntax import (
    BOT,
    And,
    Atom,
    Exists,
    Forall,
    Member,
    Not,
    Or,
    Role,
    Signature,
    Subsume,
    Substitution,
    Theory,
    Var,
    apply_subst,
    conj,
    disj,
    format_concept,
    format_formula,
    free_vars,
    is_closed,
    is_simple,
    parse_concept,
    parse_formula,
    parse_signature,
    parse_theory,
    split_conj,
)

SIG = Signature(("a", "b", "c"), ("R", "S"), ("A", "B", "C"), ("x", "y"))


def concepts(depth=3):
    atoms = st.sampled_from([Atom("A"), Atom("B"), Atom("C")])
    return st.recursive(
        atoms,
        lambda inner: st.one_of(
            inner.map(Not),
            st.tuples(inner, inner).map(lambda p: And(*p)),
            st.tuples(inner, inner).map(lambda p: Or(*p)),
            st.tuples(st.sampled_from(["R", "S"]), inner).map(lambda p: Exists(*p)),
            st.tuples(st.sampled_from(["R", "S"]), inner).map(lambda p: Forall(*p)),
        ),
        max_leaves=8,
    )


terms = st.sampled_from(["a", "b", "c", Var("x"), Var("y")])


def formulas():
    return st.one_of(
        st.just(BOT),
        st.tuples(terms, terms, st.sampled_from(["R", "S"])).map(lambda p: Role(*p)),
        st.tuples(terms, concepts()).map(lambda p: Member(*p)),
        st.tuples(st.sampled_from(["A", "B"]), concepts()).map(lambda p: Subsume(*p)),
    )


@given(concepts())
def test_concept_print_parse_roundtrip(c):
    assert parse_concept(format_concept(c), SIG) == c


@given(formulas())
def test_formula_print_parse_roundtrip(k):
    assert parse_formula(format_formula(k), SIG) == k


def test_precedence():
    assert parse_concept("not A and B or C", SIG) == Or(And(Not(Atom("A")), Atom("B")), Atom("C"))
    assert parse_concept("exists R.A and B", SIG) == And(Exists("R", Atom("A")), Atom("B"))
    assert parse_concept("forall R.(A or B)", SIG) == Forall("R", Or(Atom("A"), Atom("B")))


def test_binary_connectives_nest_to_the_right():
    assert parse_concept("A and B and C", SIG) == And(Atom("A"), And(Atom("B"), Atom("C")))
    assert conj(Atom("A"), Atom("B"), Atom("C")) == parse_concept("A and B and C", SIG)
    assert disj(Atom("A"), Atom("B"), Atom("C")) == parse_concept("A or B or C", SIG)
    assert split_conj(conj(Atom("A"), Atom("B"), Atom("C")), 3) == [Atom("A"), Atom("B"), Atom("C")]


def test_formula_kinds():
    assert parse_formula("(a, x) : R", SIG) == Role("a", Var("x"), "R")
    assert parse_formula("x : A", SIG) == Member(Var("x"), Atom("A"))
    assert parse_formula("A sub B or C", SIG) == Subsume("A", Or(Atom("B"), Atom("C")))
    assert parse_formula("bot", SIG) == BOT


def test_non_atomic_antecedent_rejected():
    with pytest.raises(NonAtomicAntecedentError):
        parse_formula("A and B sub C", SIG)
    with pytest.raises(NonAtomicAntecedentError):
        parse_formula("(A and B) sub C", SIG)


def test_unknown_names_are_reported():
    with pytest.raises(UnknownNameError):
        parse_concept("D", SIG)
    with pytest.raises(UnknownNameError):
        parse_formula("d : A", SIG)
    with pytest.raises(ParseError):
        parse_formula("a : A and", SIG)


def test_signature_rejects_overlapping_names():
    with pytest.raises(SignatureError):
        Signature(("a",), ("a",), (), ())
    sig = parse_signature("individuals: a b\nroles: R\nconcepts: A\n  B\nvariables: x\n")
    assert sig.concept_names == ("A", "B")
    assert parse_signature(sig.to_text()) == sig


def test_closed_and_simple():
    assert is_closed(parse_formula("a : A and B", SIG))
    assert not is_closed(parse_formula("x : A", SIG))
    assert is_simple(parse_formula("a : not (A and B)", SIG))
    assert is_simple(parse_formula("(a, b) : R", SIG))
    assert not is_simple(parse_formula("a : A or B", SIG))
    assert free_vars(parse_formula("(x, y) : R", SIG)) == {"x", "y"}


def test_substitution():
    sigma = Substitution.of({"x": "a"})
    assert apply_subst(sigma, parse_formula("x : A", SIG)) == parse_formula("a : A", SIG)
    with pytest.raises(UnboundVariableError):
        apply_subst(sigma, parse_formula("(x, y) : R", SIG))


def test_theory_deduplicates_and_sorts_entries():
    th = parse_theory("A sub B\na : A\na : A\n# comment\n(a, b) : R\nA sub B\n", SIG)
    assert th.tbox == (Subsume("A", Atom("B")),)
    assert len(th.abox) == 2
    with pytest.raises(ParseError):
        parse_theory("a : A and B\n", SIG)
    assert isinstance(th, Theory)
