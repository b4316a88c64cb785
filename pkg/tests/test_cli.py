import json

import pytest

from bcdl.cli import run_cli
from conftest import ALPHA1, NDC, PURCHASE, TOY

SIG = str(PURCHASE / "sig.txt")
ENV = str(PURCHASE)


def run(capsys, *argv):
    code = run_cli(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_proof(capsys):
    code, out, _ = run(capsys, "check-proof", str(PURCHASE / "proofs" / "dr_a1.ndp"), "--sig", SIG)
    assert code == 0
    assert out.strip().endswith("|- req : ProduceRequest and exists hasProduct.Product")
    code, out, _ = run(capsys, "check-proof", str(NDC / "negative" / "forall_capture.ndp"), "--sig", str(NDC / "sig.txt"), "--json")
    assert code == 1 and json.loads(out)["kind"] == "eigenvariable-capture"


def test_prove_and_recheck(capsys, tmp_path):
    target = tmp_path / "p.ndp"
    code, out, _ = run(
        capsys, "prove", "--sig", SIG, "--theory", str(PURCHASE / "theory.txt"),
        "--context", "req : AcceptedRequest", "--goal", "req : Request", "-o", str(target),
    )
    assert code == 0 and target.exists()
    code, _, _ = run(capsys, "check-proof", str(target), "--sig", SIG)
    assert code == 0


def test_prove_unknown(capsys):
    code, out, _ = run(capsys, "prove", "--sig", str(NDC / "sig.txt"), "--goal", "x : A or not A", "--json")
    assert code == 2 and json.loads(out)["proved"] is False


def test_check_comp(capsys):
    code, out, _ = run(capsys, "check-comp", str(PURCHASE / "produce_and_ship.comp"), "--env", ENV)
    assert code == 0 and out.startswith("valid: 7 nodes, 10 applicability conditions")
    code, out, _ = run(capsys, "check-comp", str(PURCHASE / "wrong_case.comp"), "--env", ENV, "--json")
    assert code == 1 and json.loads(out)["kind"] == "AC-sequent-shape"


def test_compile_run_golden(capsys):
    code, out, _ = run(
        capsys, "compile-run", str(PURCHASE / "produce_and_ship.comp"), "--env", ENV,
        "--input", f"req_2 : {ALPHA1}", "--notation", "compact",
    )
    assert code == 0
    assert out.splitlines()[0].replace(" ", "") == "(2,(tt,(ps_off,(tt,(ps_off_price,tt)))))"


def test_compile_run_json_round_trip(capsys):
    argv = ["compile-run", str(PURCHASE / "produce_and_ship.comp"), "--env", ENV, "--input", f"req_2 : {ALPHA1}"]
    code, out, _ = run(capsys, *argv, "--json")
    payload = json.loads(out)
    assert code == 0 and payload["trace"][0]["path"] == []
    code, plain, _ = run(capsys, *argv, "--no-trace")
    assert plain.strip() == payload["output"]


def test_compile_run_refused_store(capsys):
    code, out, _ = run(
        capsys, "compile-run", str(PURCHASE / "produce_and_ship.comp"), "--env", ENV,
        "--store", "store_refused.txt", "--input", f"req_2 : {ALPHA1}", "--no-trace",
    )
    assert code == 0 and out.strip() == "tag 1 tt"


def test_enum_it(capsys):
    code, out, _ = run(capsys, "enum-it", "--formula", "a : A or B", "--sig", str(NDC / "sig.txt"))
    assert code == 0 and out.splitlines() == ["tag 1 tt", "tag 2 tt"]
    code, out, _ = run(capsys, "enum-it", "--formula", "a : forall R.(A or B)", "--sig", str(NDC / "sig.txt"), "--json")
    assert json.loads(out)["count"] == 8
    code, _, err = run(capsys, "enum-it", "--formula", "a : forall R.(A or B)", "--sig", str(NDC / "sig.txt"), "--cap", "4")
    assert code == 2 and "overflow" in err


def test_verify_uniform(capsys, tmp_path):
    code, out, _ = run(capsys, "verify-uniform", "--env", ENV, "--comp", str(PURCHASE / "produce_and_ship.comp"))
    assert code == 0 and out.startswith("ok:")
    corrupt = tmp_path / "env"
    corrupt.mkdir()
    for name in ("sig.txt", "theory.txt", "store.txt"):
        (corrupt / name).write_text((PURCHASE / name).read_text())
    (corrupt / "specs").mkdir()
    (corrupt / "tables").mkdir()
    for spec in (PURCHASE / "specs").iterdir():
        (corrupt / "specs" / spec.name).write_text(spec.read_text())
    (corrupt / "tables" / "producer.dt").write_text((PURCHASE / "corrupt" / "producer.dt").read_text())
    code, out, _ = run(capsys, "verify-uniform", "--env", str(corrupt), "--service", "DoProduceRequest", "--json")
    assert code == 1 and json.loads(out)["individual"] == "req_2"


def test_show_model(capsys):
    code, out, _ = run(capsys, "show-model", "--env", str(TOY))
    assert code == 0
    code, out, _ = run(
        capsys, "show-model", "--sig", SIG, "--store", str(PURCHASE / "store.txt"),
        "--theory", str(PURCHASE / "theory.txt"), "--json",
    )
    assert code == 0 and json.loads(out)["violations"] == []


@pytest.mark.parametrize(
    "argv",
    [
        ["nonsense"],
        [],
        ["enum-it", "--formula", "a : A or", "--sig", str(NDC / "sig.txt")],
        ["check-proof", "missing.ndp", "--sig", str(NDC / "sig.txt")],
        ["compile-run", str(PURCHASE / "produce_and_ship.comp"), "--env", ENV, "--input", "nobody"],
        ["show-model", "--sig", str(NDC / "sig.txt")],
    ],
)
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(run_cli(argv))
    assert exc.value.code == 3


def test_module_entry_point():
    import subprocess
    import sys

    done = subprocess.run([sys.executable, "-m", "bcdl", "--version"], capture_output=True, text=True)
    assert done.returncode == 0 and done.stdout.startswith("bcdl ")
