import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcdl.composition import (
    Composition,
    Environment,
    PreconditionError,
    ac_obligations,
    ac_sequent,
    check_composition,
    compile_composition,
    execute,
    format_composition,
    is_environment_model,
    load_composition,
    parse_composition,
    parse_spec,
    verify_uniform,
)
from bcdl.errors import CompositionError, IllFormedTermError, ParseError
from bcdl.infoterm import TT, Tag, format_compact, parse_literal, squash
from bcdl.ndproof import and_i, hyp, load_proof, or_i
from bcdl.runtime import load_store
from bcdl.syntax import Atom, Member, Or, Var, format_concept
from conftest import ALPHA1, PURCHASE, TOY
from toy_compositions import env_node, node, toy_compositions


def test_spec_syntax(purchase):
    spec = parse_spec("Id(req) :: Request => Request or Offer", purchase.signature)
    assert spec.param == "req" and format_concept(spec.post) == "Request or Offer"
    assert parse_spec(str(spec), purchase.signature) == spec
    with pytest.raises(ParseError):
        parse_spec("Id(req_1) :: Request => Request", purchase.signature)
    with pytest.raises(ParseError):
        parse_spec("Id(req) :: Request", purchase.signature)


def test_single_environment_service_is_valid(purchase):
    comp = Composition("ENV", purchase.specs["DoProduceRequest"])
    assert check_composition(purchase.environment, comp).valid


def test_refuse_request_axiom_is_the_identity(purchase):
    comp = load_composition(PURCHASE / "refuse.comp", purchase.signature, purchase.specs)
    report = check_composition(purchase.environment, comp)
    assert [o.key for o in report.obligations] == ["a"]
    out, trace = execute(purchase.environment, comp, "req_1", TT)
    assert out == TT
    assert [(e.tag, e.input, e.output) for e in trace] == [("AX", TT, TT), ("AX.a", TT, TT)]


def test_full_tree_is_valid(purchase, produce_and_ship):
    report = check_composition(purchase.environment, produce_and_ship)
    assert report.nodes == 7
    assert len(report.obligations) == 10
    assert [n.rule for _, n in produce_and_ship.nodes()] == ["SEQ", "AND", "ENV", "ENV", "CASE", "AX", "ENV"]


def test_environment_spec_must_match(purchase):
    other = parse_spec("DoProduceRequest(req) :: ProduceRequest => RefusedRequest", purchase.signature)
    with pytest.raises(CompositionError) as err:
        check_composition(purchase.environment, Composition("ENV", other))
    assert err.value.kind == "spec-mismatch"
    with pytest.raises(CompositionError) as err:
        check_composition(purchase.environment, Composition("ENV", purchase.specs["ProduceAndShip"]))
    assert err.value.kind == "spec-mismatch"


def test_wrong_case_disjunction_is_rejected(purchase):
    comp = load_composition(PURCHASE / "wrong_case.comp", purchase.signature, purchase.specs)
    with pytest.raises(CompositionError) as err:
        check_composition(purchase.environment, comp)
    assert err.value.kind == "AC-sequent-shape"
    assert err.value.path == (1,)


def test_missing_condition_is_reported(purchase, produce_and_ship):
    seq = produce_and_ship
    trimmed = Composition(seq.rule, seq.spec, seq.children, seq.acs[:-1])
    with pytest.raises(CompositionError) as err:
        check_composition(purchase.environment, trimmed)
    assert err.value.kind == "AC-sequent-shape"


def test_invalid_embedded_proof_is_reported(purchase, produce_and_ship):
    pi = produce_and_ship.ac("b1")
    forged = type(pi)(pi.rule, pi.goal, (), pi.premises, pi.eigen, pi.data)
    with pytest.raises(CompositionError) as err:
        check_composition(purchase.environment, produce_and_ship.with_ac("b1", forged))
    assert err.value.kind == "embedded-proof-invalid"


def _perturb(pi, how, sig):
    goal = pi.goal
    match how:
        case 0:
            return or_i(1, Member(goal.t, Or(goal.concept, Atom("Offer"))), pi)
        case 1:
            return and_i(pi, pi)
        case 2:
            return hyp(goal, Member(Var("req"), Atom("Price")), *pi.context)
        case _:
            return hyp(Member(goal.t, Atom("Price")))


def _all_acs(comp):
    return [(path, key) for path, n in comp.nodes() for key, _ in n.acs]


def _replace(comp, path, key, pi):
    if not path:
        return comp.with_ac(key, pi)
    kids = list(comp.children)
    kids[path[0]] = _replace(kids[path[0]], path[1:], key, pi)
    return Composition(comp.rule, comp.spec, tuple(kids), comp.acs, comp.ac_sources)


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_perturbed_conditions_are_rejected(purchase, produce_and_ship, data):
    path, key = data.draw(st.sampled_from(_all_acs(produce_and_ship)))
    how = data.draw(st.integers(0, 3))
    target = produce_and_ship
    for i in path:
        target = target.children[i]
    bad = _perturb(target.ac(key), how, purchase.signature)
    with pytest.raises(CompositionError) as err:
        check_composition(purchase.environment, _replace(produce_and_ship, path, key, bad))
    assert err.value.kind == "AC-sequent-shape"


def test_weakened_condition_context_is_accepted(purchase, produce_and_ship):
    hyp_f, goal = ac_sequent(produce_and_ship, "b1")
    ax = purchase.environment.theory.tbox[0]
    weakened = hyp(goal, ax)
    assert check_composition(purchase.environment, produce_and_ship.with_ac("b1", weakened)).valid


def test_golden_run(purchase, produce_and_ship):
    alpha1 = parse_literal(ALPHA1, purchase.signature)
    out, trace = execute(purchase.environment, produce_and_ship, "req_2", alpha1)
    assert squash(format_compact(out)) == "(2,(tt,(ps_off,(tt,(ps_off_price,tt)))))"
    assert out == compile_composition(purchase.environment, produce_and_ship)("req_2", alpha1)
    by_tag = {(e.path, e.tag): squash(format_compact(e.output)) for e in trace}
    assert by_tag[((0,), "AND.a1")] == "(tt,(book_1,tt))"
    assert by_tag[((0, 0), "ENV")] == "(2,(tt,(p_off,(tt,(p_off_price,tt)))))"
    assert by_tag[((0, 1), "ENV")] == "(2,(tt,(s_off,(tt,(s_off_price,tt)))))"


def test_trace_events_replay(purchase, produce_and_ship):
    alpha1 = parse_literal(ALPHA1, purchase.signature)
    _, trace = execute(purchase.environment, produce_and_ship, "req_2", alpha1)
    assert trace[0].path == () and trace[0].tag == "SEQ"
    for event in trace:
        assert event.replay(event.input) == event.output
    paths = [e.path for e in trace]
    for i, p in enumerate(paths):
        if p:
            assert p[:-1] in paths[:i]


def test_refusal_path(purchase, produce_and_ship):
    env = purchase.with_store(load_store(PURCHASE / "store_refused.txt", purchase.signature))
    out, trace = execute(env.environment, produce_and_ship, "req_2", parse_literal(ALPHA1, env.signature))
    assert out == Tag(1, TT)
    case_children = {e.path for e in trace if len(e.path) == 2 and e.path[0] == 1}
    assert case_children == {(1, 0)}


def test_case_runs_exactly_one_branch(toy):
    comp = toy_compositions(toy)["three_way_case"]
    pre = comp.spec.pre
    for k, alpha in enumerate([Tag(1, TT), Tag(2, Tag(1, TT)), Tag(2, Tag(2, TT))]):
        _, trace = execute(toy.environment, comp, "a", alpha)
        assert {e.path for e in trace if e.path} == {(k,)}
    assert format_concept(pre) == "C or D or A"


def test_precondition_is_enforced(purchase, produce_and_ship):
    with pytest.raises(PreconditionError):
        execute(purchase.environment, produce_and_ship, "req_2", TT)
    with pytest.raises(PreconditionError):
        execute(purchase.environment, produce_and_ship, "nobody", TT)


def test_runtime_errors_carry_the_node_path(purchase):
    spec = parse_spec("Bad(req) :: ProduceRequest => RefusedRequest", purchase.signature)

    def broken(t, alpha):
        raise IllFormedTermError("boom")

    env = Environment(purchase.signature, purchase.environment.theory, purchase.environment.eta, [(spec, broken)])
    comp = Composition("SEQ", spec, (Composition("ENV", spec),), ())
    hyp_f, goal = ac_sequent(comp, "b1")
    comp = Composition("SEQ", spec, comp.children, (("b1", hyp(hyp_f)), ("c", hyp(Member(Var("req"), Atom("RefusedRequest"))))))
    check_composition(env, comp)
    with pytest.raises(CompositionError) as err:
        execute(env, comp, "req_1", TT)
    assert err.value.kind == "ill-formed-input" and err.value.path == (0,)


def test_degenerate_single_child_rules(toy):
    for rule in ("AND", "CASE", "SEQ"):
        comp = node(toy, rule, "One(x) :: B => C or D", env_node(toy, "Grade"))
        assert check_composition(toy.environment, comp).valid
        assert verify_uniform(toy.store.model(), comp.spec, compile_composition(toy.environment, comp)).ok


def test_composition_file_errors(purchase):
    sig, specs = purchase.signature, purchase.specs
    with pytest.raises(ParseError):
        parse_composition("", sig, specs)
    with pytest.raises(ParseError):
        parse_composition("SEQ Unknown\n", sig, specs)
    with pytest.raises(ParseError):
        parse_composition("FOO ProduceAndShip\n", sig, specs)
    with pytest.raises(ParseError):
        parse_composition("AND DoRequest\n", sig, specs)
    inline = parse_composition(
        "AX Same(req) :: Request => Request\n  ac a proofs/x.ndp\n",
        sig,
        specs,
        proofs={"proofs/x.ndp": hyp(Member(Var("req"), Atom("Request")))},
    )
    assert check_composition(purchase.environment, inline).valid


def test_composition_printing(produce_and_ship):
    text = format_composition(produce_and_ship)
    assert text.splitlines()[0] == "SEQ ProduceAndShip"
    assert "    ENV DoProduceRequest" in text


def test_verify_uniform_examples(purchase, toy):
    spec = parse_spec("Same(x) :: A or B => A or B", toy.signature)
    identity = lambda t, alpha: alpha  # noqa: E731
    for store in ("store.txt", "store_loop.txt", "store_wide.txt", "store_empty.txt"):
        m = load_store(TOY / store, toy.signature).model()
        assert verify_uniform(m, spec, identity).ok
    refuse = lambda t, alpha: Tag(1, TT)  # noqa: E731
    dpr = purchase.specs["DoProduceRequest"]
    report = verify_uniform(purchase.store.model(), dpr, refuse)
    assert not report.ok and report.counterexample.individual == "req_2"
    refused = load_store(PURCHASE / "store_refused.txt", purchase.signature).model()
    assert verify_uniform(refused, dpr, refuse).ok


def test_environment_models(purchase, toy):
    assert is_environment_model(purchase.store.model(), purchase.environment)
    assert is_environment_model(toy.store.model(), toy.environment)
    bad = load_store(PURCHASE / "store_refused.txt", purchase.signature).model()
    assert not is_environment_model(bad, purchase.environment)


def test_obligation_keys(produce_and_ship):
    assert [k for k, _, _ in ac_obligations(produce_and_ship)] == ["b1", "b2", "c"]
    assert [k for k, _, _ in ac_obligations(produce_and_ship.children[0])] == ["a1", "a2", "b"]
    assert [k for k, _, _ in ac_obligations(produce_and_ship.children[1])] == ["a", "b1", "b2"]
    assert ac_obligations(produce_and_ship.children[0].children[0]) == []
