import json
import sys
import time
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "suite", deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")


def pytest_configure(config):
    config._suite_t0 = time.monotonic()


@pytest.fixture
def suite_start_time(request):
    return request.config._suite_t0


def pytest_collection_modifyitems(session, config, items):
    # the acceptance gate goes last so its wall-clock check sees the run
    items.sort(key=lambda item: item.path.name == "test_acceptance.py")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    try:
        import test_acceptance
    except ImportError:
        return
    if not test_acceptance.RESULTS:
        return
    seen = {num: row for num, *row in sorted(test_acceptance.RESULTS)}
    terminalreporter.section("acceptance checks")
    for num in range(1, 11):
        if num in seen:
            title, ok, detail = seen[num]
            verdict = "PASS" if ok else "FAIL"
        elif num == 9:
            title, verdict = "release corpus statistics", "SKIP"
            detail = "set SUMREN_DIR to enable"
        else:
            title, verdict, detail = f"check {num}", "FAIL", "did not run"
        line = f"{num:>2} {verdict} {title}"
        if detail:
            line += f" - {detail}"
        terminalreporter.write_line(line)


@pytest.fixture
def tiny_corpus_dir(tmp_path):
    """One-article corpus around the six-statement opinion-editor article."""
    from sample_articles import HURT_ARTICLE

    cdir = tmp_path / "corpus"
    cdir.mkdir()
    (cdir / "articles.jsonl").write_text(json.dumps({
        "id": "a1", "event_id": "e1", "text": HURT_ARTICLE},
        ensure_ascii=False) + "\n", encoding="utf-8")
    (cdir / "events.jsonl").write_text(json.dumps({
        "event_id": "e1", "name": "capitol riot reaction",
        "article_ids": ["a1"]}) + "\n", encoding="utf-8")
    (cdir / "examples.jsonl").write_text(json.dumps({
        "example_id": "x1", "event_id": "e1", "speaker": "Hurt",
        "statement_ids": ["a1:s000"],
        "references": ["Hurt said Democrats rushed to impeach Trump again."],
        "split": "test"}) + "\n", encoding="utf-8")
    return cdir
