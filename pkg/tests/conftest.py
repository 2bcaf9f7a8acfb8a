import json

import pytest

FIXTURE = {
    "Marie Curie won two Nobel Prizes.": [
        {"title": "Marie Curie", "link": "https://w/Curie", "content": "Marie Curie won two Nobel Prizes."},
        {"title": "Nobel Prize", "link": "https://w/Nobel", "content": "The Nobel Prize is awarded yearly."},
    ],
    "Marie Curie was born in Warsaw.": [
        {"title": "Warsaw", "link": "https://w/Warsaw", "content": "Marie Curie was born in Warsaw."},
    ],
    "Marie Curie was not a physicist.": [
        {"title": "Physics", "link": "https://w/Physics", "content": "Marie Curie was a physicist."},
    ],
    "Ada Lovelace wrote the first program.": [
        {"title": "Ada", "link": "https://w/Ada", "content": "Ada Lovelace wrote the first program."},
    ],
    "Ada Lovelace was born in Paris.": [
        {"title": "Ada", "link": "https://w/Ada", "content": "Ada Lovelace wrote the first program."},
        {"title": "London", "link": "https://w/London", "content": "Ada Lovelace was born in London."},
    ],
}

LABELED = [
    {"id": "bio-2", "prompt": "Tell me about Ada Lovelace.", "response": "Ada Lovelace wrote the first program. Ada Lovelace was born in Paris.",
     "atoms": [{"text": "Ada Lovelace wrote the first program.", "label": "S"}, {"text": "Ada Lovelace was born in Paris.", "label": "NS"}]},
    {"id": "bio-1", "prompt": "Tell me about Marie Curie.", "response": "Marie Curie won two Nobel Prizes. Marie Curie was born in Warsaw. Marie Curie was not a physicist.",
     "atoms": [{"text": "Marie Curie won two Nobel Prizes.", "label": "S"}, {"text": "Marie Curie was born in Warsaw.", "label": "S"},
               {"text": "Marie Curie was not a physicist.", "label": "NS"}]},
]

UNLABELED = [{"id": d["id"], "prompt": d["prompt"], "response": d["response"]} for d in LABELED] + [
    {"id": "bio-3", "prompt": "Tell me about Curie.", "response": "Marie Curie won two Nobel Prizes."},
]

CONFLICTS = [
    {"id": "cf-1", "claim": "The river is long.", "contexts": [
        {"text": "The river is long.", "stance": "support"}, {"text": "The river is not long.", "stance": "conflict"}]},
]


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return path


@pytest.fixture
def fixture_map():
    return FIXTURE


@pytest.fixture
def labeled_file(tmp_path):
    return write_jsonl(tmp_path / "labeled.jsonl", LABELED)


@pytest.fixture
def unlabeled_file(tmp_path):
    return write_jsonl(tmp_path / "unlabeled.jsonl", UNLABELED)


@pytest.fixture
def conflicts_file(tmp_path):
    return write_jsonl(tmp_path / "conflicts.jsonl", CONFLICTS)


# ---------------------------------------------------------------- acceptance summary

_CRITERIA: dict[str, bool] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when != "call" and not report.failed:
        return
    name = report.nodeid.split("::", 1)[1].split("[", 1)[0]
    _CRITERIA[name] = _CRITERIA.get(name, True) and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name in sorted(_CRITERIA):
        number, title = name[len("test_criterion_"):].split("_", 1)
        status = "PASS" if _CRITERIA[name] else "FAIL"
        terminalreporter.write_line(f"criterion {int(number):2d}: {status}  {title.replace('_', ' ')}")
