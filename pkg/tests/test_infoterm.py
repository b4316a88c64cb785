import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcdl.errors import IllFormedTermError, ITOverflow
from bcdl.infoterm import (
    TT,
    Fun,
    Pair,
    Tag,
    Wit,
    belongs,
    canonical,
    enumerate_realizers,
    enumerate_terms,
    enumerate_tuples,
    find_realizer,
    format_literal,
    format_compact,
    parse_literal,
    parse_compact,
    realizes,
    space_size,
    squash,
)
from bcdl.semantics import Model, holds
from bcdl.syntax import Member, Signature, parse_formula
from oracles import brute_count, brute_terms, random_models
from test_syntax import concepts

SIG3 = Signature(("a", "b", "c"), ("R", "S"), ("A", "B", "C"), ())
SIG2 = Signature(("a", "b"), ("R",), ("A", "B", "C"), ())
M = Model(frozenset("ab"), {"a": "a", "b": "b"}, {"A": {"b"}}, {"R": {("a", "b")}})


def f(text, sig=SIG3):
    return parse_formula(text, sig)


def test_belongs_examples(purchase):
    k = parse_formula("req_1 : ProduceRequest and exists hasProduct.Product", purchase.signature)
    assert belongs(parse_literal("(tt, wit book_1 tt)"), k, purchase.signature)
    assert belongs(TT, f("bot"), SIG3)
    assert not belongs(Tag(3, TT), f("c : A or B"), SIG3)
    assert not belongs(Wit("z", TT), f("a : exists R.A"), SIG3)
    assert not belongs(Fun((("a", TT),)), f("a : forall R.A"), SIG3)


def test_enumeration_examples():
    assert list(enumerate_terms(f("c : A"), SIG3)) == [TT]
    assert list(enumerate_terms(f("c : A or B"), SIG3)) == [Tag(1, TT), Tag(2, TT)]
    assert space_size(f("c : exists R.(A or B)"), SIG3) == 6
    assert len(list(enumerate_terms(f("c : exists R.(A or B)"), SIG3))) == 6
    assert space_size(f("A sub B or C", SIG2), SIG2) == 4
    assert len(list(enumerate_terms(f("A sub B or C", SIG2), SIG2))) == 4


def test_oracle_values():
    assert len(brute_terms(f("c : A"), SIG3.individuals)) == 1
    assert len(brute_terms(f("c : A or B"), SIG3.individuals)) == 2
    assert len(brute_terms(f("c : exists R.(A or B)"), SIG3.individuals)) == 6
    assert len(brute_terms(f("A sub B or C", SIG2), SIG2.individuals)) == 4


def test_enumeration_order():
    terms = list(enumerate_terms(f("a : forall R.(A or B)", SIG2), SIG2))
    assert terms[0] == Fun((("a", Tag(1, TT)), ("b", Tag(1, TT))))
    assert terms[1] == Fun((("a", Tag(1, TT)), ("b", Tag(2, TT))))
    assert [t.d for t in enumerate_terms(f("a : exists R.A"), SIG3)] == ["a", "b", "c"]


def test_overflow_is_raised_before_yielding():
    k = f("a : forall R.forall R.(A or B or C)")
    with pytest.raises(ITOverflow) as err:
        enumerate_terms(k, SIG3, cap=1000)
    assert err.value.estimate == space_size(k, SIG3)
    with pytest.raises(ITOverflow):
        list(enumerate_tuples([k, k], SIG3, cap=10**6))


def test_realizes_examples(purchase):
    assert realizes(M, Wit("b", TT), parse_formula("a : exists R.A", SIG2))
    assert not realizes(M, Wit("a", TT), parse_formula("a : exists R.A", SIG2))
    assert not realizes(M, TT, parse_formula("bot", SIG2))
    alpha2 = parse_compact(
        "(2,(tt,(p_off,(tt,(p_off_price,tt)))))",
        purchase.specs["DoProduceRequest"].post_at("req_2"),
        purchase.signature,
    )
    assert realizes(purchase.store.model(), alpha2, purchase.specs["DoProduceRequest"].post_at("req_2"))
    with pytest.raises(IllFormedTermError):
        realizes(M, TT, parse_formula("a : A or B", SIG2))


def test_forall_and_subsumption_clauses():
    # b has no R-successor: the table entry at a is unconstrained.
    k = parse_formula("b : forall R.(A or B)", SIG2)
    assert all(realizes(M, t, k) for t in enumerate_terms(k, SIG2))
    k = parse_formula("a : forall R.(A or B)", SIG2)
    ok = [t for t in enumerate_terms(k, SIG2) if realizes(M, t, k)]
    assert ok and all(t.at("b") == Tag(1, TT) for t in ok)
    k = parse_formula("A sub A or B", SIG2)
    ok = [t for t in enumerate_terms(k, SIG2) if realizes(M, t, k)]
    assert len(ok) == 2 and all(t.at("b") == Tag(1, TT) for t in ok)
    assert not any(realizes(M, t, parse_formula("A sub B", SIG2)) for t in enumerate_terms(parse_formula("A sub B", SIG2), SIG2))


def test_canonical_examples():
    assert canonical(f("bot"), SIG3) == TT
    assert canonical(f("c : A or B"), SIG3) == Tag(1, TT)
    assert canonical(f("b : exists R.A", SIG2), SIG2) == Wit("a", TT)


def test_literal_syntax():
    eta = Pair(Tag(2, Wit("a", TT)), Fun((("a", TT), ("b", Tag(1, TT)))))
    text = format_literal(eta)
    assert text == "(tag 2 (wit a tt), fun { a -> tt; b -> tag 1 tt })"
    assert parse_literal(text) == eta
    assert parse_literal(" ( tag 2 ( wit a tt ) ,fun{a->tt;b->tag 1 tt} ) ") == eta


def test_compact_notation():
    k = parse_formula("a : (A or B) and exists R.forall R.A", SIG2)
    for eta in enumerate_terms(k, SIG2):
        assert parse_compact(format_compact(eta), k, SIG2) == eta
    assert squash("(2, ( tt ,x))") == "(2,(tt,x))"


@given(concepts(), st.sampled_from(["a", "b", "c"]))
@settings(max_examples=150)
def test_enumeration_is_sound_complete_and_deterministic(c, ind):
    k = Member(ind, c)
    if space_size(k, SIG3) > 5000:
        return
    first = list(enumerate_terms(k, SIG3))
    assert first == list(enumerate_terms(k, SIG3))
    assert len(set(first)) == len(first) == space_size(k, SIG3) == brute_count(c, 3)
    assert set(first) == set(brute_terms(k, SIG3.individuals))
    assert all(belongs(t, k, SIG3) for t in first)
    assert belongs(canonical(k, SIG3), k, SIG3)


@given(concepts(), st.integers(0, 10_000))
@settings(max_examples=150)
def test_realizability_implies_validity(c, seed):
    for m in random_models(SIG3.individuals, ("A", "B", "C"), ("R", "S"), 2, seed):
        for ind in SIG3.individuals:
            k = Member(ind, c)
            if space_size(k, SIG3) > 2000:
                return
            realizers = [t for t in enumerate_terms(k, SIG3) if realizes(m, t, k)]
            if realizers:
                assert holds(m, k)
            assert realizers == enumerate_realizers(m, k)
            found = find_realizer(m, k)
            assert (found is None) == (not realizers)
            if found is not None:
                assert found in realizers
