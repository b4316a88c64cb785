"""Command-line front end.

Exit codes: 0 success, 1 definitive negative (invalid proof or composition,
counterexample), 2 unknown or overflow, 3 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .composition import check_composition, compile_composition, execute, load_composition, verify_uniform
from .errors import BCDLError, CompositionError, ITOverflow, ParseError, ProofError, TableError
from .infoterm import (
    DEFAULT_CAP,
    enumerate_realizers,
    enumerate_terms,
    format_literal,
    format_compact,
    parse_literal,
    parse_compact,
)
from .ndproof import check_proof, format_proof, format_sequent, load_proof
from .prover import SearchBudget, Unknown, prove
from .runtime import load_environment, load_store
from .semantics import check_tbox, extension, format_model, load_model
from .syntax import Atom, format_formula, load_signature, load_theory, parse_formula

OK, NEGATIVE, UNKNOWN, USAGE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(USAGE, f"{self.prog}: error: {message} (try --help)\n")


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        sys.stdout.write(text if text.endswith("\n") or not text else text + "\n")


def _fmt(args):
    return format_compact if getattr(args, "notation", "literal") == "compact" else format_literal


# ---------------------------------------------------------------------------
# subcommands


def cmd_check_proof(args) -> int:
    sig = load_signature(args.sig)
    pi = load_proof(args.proof, sig)
    try:
        seq = check_proof(pi, sig)
    except ProofError as e:
        _emit(args, {"valid": False, "kind": e.kind, "path": list(e.path), "message": str(e)}, f"invalid: {e}")
        return NEGATIVE
    text = format_sequent(seq)
    _emit(args, {"valid": True, "sequent": text, "size": pi.size(), "depth": pi.depth()}, text)
    return OK


def cmd_prove(args) -> int:
    sig = load_signature(args.sig)
    tbox = load_theory(args.theory, sig).tbox if args.theory else ()
    context = [parse_formula(k, sig) for k in args.context]
    goal = parse_formula(args.goal, sig)
    result = prove(tbox, context, goal, SearchBudget(args.max_depth, args.max_nodes), sig)
    if isinstance(result, Unknown):
        _emit(
            args,
            {"proved": False, "reason": result.reason, "nodes": result.nodes, "depth": result.depth},
            f"unknown: {result.reason} ({result.nodes} nodes, depth {result.depth})",
        )
        return UNKNOWN
    text = format_proof(result)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    _emit(args, {"proved": True, "proof": text, "sequent": format_sequent(result.sequent)}, text)
    return OK


def _env(args):
    return load_environment(args.env, args.store or "store.txt")


def cmd_check_comp(args) -> int:
    e = _env(args)
    comp = load_composition(args.comp, e.signature, e.specs)
    try:
        report = check_composition(e.environment, comp)
    except CompositionError as err:
        _emit(args, {"valid": False, "kind": err.kind, "path": list(err.path), "message": str(err)}, f"invalid: {err}")
        return NEGATIVE
    lines = [f"valid: {report.nodes} nodes, {len(report.obligations)} applicability conditions"]
    lines += [f"  {_where(o.path)} {o.key}: {o.sequent}" for o in report.obligations]
    payload = {
        "valid": True,
        "nodes": report.nodes,
        "obligations": [{"path": list(o.path), "key": o.key, "sequent": o.sequent} for o in report.obligations],
    }
    _emit(args, payload, "\n".join(lines))
    return OK


def _where(path) -> str:
    return "root" + "".join(f".{i}" for i in path)


def cmd_compile_run(args) -> int:
    e = _env(args)
    comp = load_composition(args.comp, e.signature, e.specs)
    try:
        check_composition(e.environment, comp)
    except CompositionError as err:
        _emit(args, {"ok": False, "kind": err.kind, "message": str(err)}, f"invalid: {err}")
        return NEGATIVE
    t, _, literal = args.input.partition(":")
    t = t.strip()
    if not _ or not e.signature.is_individual(t):
        raise ParseError("--input must look like 'individual : information-term'")
    if args.input_notation == "compact":
        alpha = parse_compact(literal, comp.spec.pre_at(t), e.signature)
    else:
        alpha = parse_literal(literal, e.signature)
    out, trace = execute(e.environment, comp, t, alpha)
    fmt = _fmt(args)
    payload = {
        "output": fmt(out),
        "trace": [
            {"path": list(ev.path), "tag": ev.tag, "label": ev.label, "input": fmt(ev.input), "output": fmt(ev.output)}
            for ev in trace
        ],
    }
    text = fmt(out) + "\n"
    if not args.no_trace:
        text += trace.format(args.notation)
    _emit(args, payload, text)
    return OK


def cmd_enum_it(args) -> int:
    sig = load_signature(args.sig)
    k = parse_formula(args.formula, sig)
    fmt = _fmt(args)
    if args.model:
        terms = enumerate_realizers(load_model(args.model, sig), k, args.cap)
    else:
        terms = list(enumerate_terms(k, sig, args.cap))
    _emit(args, {"count": len(terms), "terms": [fmt(x) for x in terms]}, "".join(fmt(x) + "\n" for x in terms))
    return OK


def cmd_verify_uniform(args) -> int:
    e = _env(args)
    m = load_model(args.model, e.signature) if args.model else e.store.model()
    if args.comp:
        comp = load_composition(args.comp, e.signature, e.specs)
        check_composition(e.environment, comp)
        spec, impl = comp.spec, compile_composition(e.environment, comp)
    else:
        try:
            spec, impl = e.environment.service(args.service)
        except KeyError:
            raise ParseError(f"no environment service named {args.service!r}") from None
    report = verify_uniform(m, spec, impl, args.cap, exhaustive=args.exhaustive)
    fmt = _fmt(args)
    if report.ok:
        _emit(args, {"ok": True, "checked": report.checked}, f"ok: {spec.name} solved on {report.checked} realizing inputs")
        return OK
    cx = report.counterexample
    out = fmt(cx.output) if cx.output is not None else None
    _emit(
        args,
        {"ok": False, "checked": report.checked, "individual": cx.individual, "input": fmt(cx.input), "output": out, "reason": cx.reason},
        f"counterexample: {spec.name} at {cx.individual} with {fmt(cx.input)} -> {out}: {cx.reason}",
    )
    return NEGATIVE


def cmd_show_model(args) -> int:
    if args.env:
        e = load_environment(args.env, args.store or "store.txt")
        sig, m, tbox = e.signature, e.store.model(), e.environment.theory.tbox
    else:
        if not args.sig:
            raise ParseError("show-model needs --env or --sig")
        sig = load_signature(args.sig)
        if args.model:
            m = load_model(args.model, sig)
        elif args.store:
            m = load_store(args.store, sig).model()
        else:
            raise ParseError("show-model needs --model or --store with --sig")
        tbox = load_theory(args.theory, sig).tbox if args.theory else ()
    violations = check_tbox(m, tbox)
    text = format_model(m)
    text += "".join(f"violation: {v}\n" for v in violations)
    payload = {
        "domain": sorted(map(str, m.domain)),
        "concepts": {a: sorted(map(str, extension(m, Atom(a)))) for a in sig.concept_names},
        "violations": [format_formula(v.axiom) for v in violations],
    }
    _emit(args, payload, text)
    return NEGATIVE if violations else OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bcdl", description="Constructive description logic toolkit.")
    p.add_argument("--version", action="version", version=f"bcdl {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, notation=False):
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        if notation:
            sp.add_argument("--notation", choices=("literal", "compact"), default="literal")

    def env_args(sp):
        sp.add_argument("--env", required=True, help="environment directory")
        sp.add_argument("--store", help="store file inside the environment (default store.txt)")

    sp = sub.add_parser("check-proof", help="check a proof file")
    sp.add_argument("proof")
    sp.add_argument("--sig", required=True)
    common(sp)
    sp.set_defaults(func=cmd_check_proof)

    sp = sub.add_parser("prove", help="search for a proof")
    sp.add_argument("--sig", required=True)
    sp.add_argument("--theory", help="file whose TBox axioms may be used")
    sp.add_argument("--context", action="append", default=[], help="hypothesis formula (repeatable)")
    sp.add_argument("--goal", required=True)
    sp.add_argument("--max-depth", type=int, default=SearchBudget().max_depth)
    sp.add_argument("--max-nodes", type=int, default=SearchBudget().max_nodes)
    sp.add_argument("-o", "--output", help="write the proof file here")
    common(sp)
    sp.set_defaults(func=cmd_prove)

    sp = sub.add_parser("check-comp", help="check a composition")
    sp.add_argument("comp")
    env_args(sp)
    common(sp)
    sp.set_defaults(func=cmd_check_comp)

    sp = sub.add_parser("compile-run", help="check, compile and run a composition")
    sp.add_argument("comp")
    env_args(sp)
    sp.add_argument("--input", required=True, help="'individual : information-term'")
    sp.add_argument("--input-notation", choices=("literal", "compact"), default="literal")
    sp.add_argument("--no-trace", action="store_true")
    common(sp, notation=True)
    sp.set_defaults(func=cmd_compile_run)

    sp = sub.add_parser("enum-it", help="enumerate information terms of a closed formula")
    sp.add_argument("--formula", required=True)
    sp.add_argument("--sig", required=True)
    sp.add_argument("--model", help="only list realizers in this model")
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP)
    common(sp, notation=True)
    sp.set_defaults(func=cmd_enum_it)

    sp = sub.add_parser("verify-uniform", help="check uniform solvability in a model")
    env_args(sp)
    which = sp.add_mutually_exclusive_group(required=True)
    which.add_argument("--service")
    which.add_argument("--comp")
    sp.add_argument("--model", help="model file (default: the store's model)")
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP)
    sp.add_argument("--exhaustive", action="store_true", help="walk the whole input space")
    common(sp, notation=True)
    sp.set_defaults(func=cmd_verify_uniform)

    sp = sub.add_parser("show-model", help="print a model and its TBox violations")
    sp.add_argument("--env")
    sp.add_argument("--sig")
    sp.add_argument("--model")
    sp.add_argument("--store")
    sp.add_argument("--theory")
    common(sp)
    sp.set_defaults(func=cmd_show_model)
    return p


def run_cli(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ITOverflow as e:
        print(f"overflow: {e}", file=sys.stderr)
        return UNKNOWN
    except (ParseError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE
    except (ProofError, CompositionError, TableError) as e:
        print(f"invalid: {e}", file=sys.stderr)
        return NEGATIVE
    except BCDLError as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
