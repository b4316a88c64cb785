from pathlib import Path

import pytest

from bcdl.composition import load_composition
from bcdl.runtime import load_environment
from bcdl.syntax import load_signature

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "bcdl" / "fixtures"
PURCHASE = FIXTURES / "purchase"
NDC = FIXTURES / "ndc"
TOY = FIXTURES / "toy"

ALPHA1 = "(tt, (tt, ((wit book_1 tt), (wit my_home tt))))"


@pytest.fixture(scope="session")
def purchase():
    return load_environment(PURCHASE)


@pytest.fixture(scope="session")
def produce_and_ship(purchase):
    return load_composition(PURCHASE / "produce_and_ship.comp", purchase.signature, purchase.specs)


@pytest.fixture(scope="session")
def ndc_sig():
    return load_signature(NDC / "sig.txt")


@pytest.fixture(scope="session")
def toy():
    return load_environment(TOY)


_ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def record(number: int, title: str, ok: bool, detail: str) -> None:
    _ACCEPTANCE[number] = (title, ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number} ({title}): {'PASS' if ok else 'FAIL'} - {detail}")
