from pathlib import Path

import pytest

from stock2vec.corpus import build_sentences
from stock2vec.ingest import (
    build_change_panel,
    load_aliases,
    parse_company_csv,
    parse_price_csv,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    if not (FIXTURES / "config.json").is_file():
        pytest.fail(f"bundled fixtures missing; run `python -m stock2vec.synthetic {FIXTURES}`")
    return FIXTURES


@pytest.fixture(scope="session")
def fixture_panel(fixture_dir):
    aliases = load_aliases(fixture_dir / "aliases.csv")
    return build_change_panel(parse_price_csv(fixture_dir / "prices.csv", aliases),
                              parse_company_csv(fixture_dir / "companies.csv", aliases))


@pytest.fixture(scope="session")
def fixture_corpus(fixture_panel):
    return build_sentences(fixture_panel, "descending")


_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion checked by this test")


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None and (report.when == "call" or report.outcome != "passed"):
        number, text = marker.args
        outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        if _CRITERIA.get(number, ("PASS",))[0] == "PASS" or outcome == "FAIL":
            _CRITERIA[number] = (outcome, text)
    return report


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        outcome, text = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {outcome}  {text}")
