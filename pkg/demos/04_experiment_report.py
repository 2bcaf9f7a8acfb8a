"""
Comparing assessors on a labelled dataset
=========================================

The harness runs any assessor (three graphical-model variants, four
prompt-only baselines) over a JSON-Lines dataset on identical atoms and
evidence, and aggregates per-response metrics into one table row.

The same run from the command line (against a live endpoint) would be::

    factreason assess --input demos/data/bios.jsonl --format labeled --assessor fr2 \\
        --K 3 --retriever fixture --fixture demos/data/fixture.json --report-format markdown
"""

import tempfile
from pathlib import Path

from factreason.harness import RunConfig, load_dataset, render_report, run_experiment
from factreason.retrieval import RetrieverConfig
from factreason.testing import MockChatTransport

HERE = Path(__file__).parent
entries = load_dataset(HERE / "data" / "bios.jsonl", "labeled")
retriever = RetrieverConfig.from_fixture_file(HERE / "data" / "fixture.json")

results = []
with tempfile.TemporaryDirectory() as cache:
    for assessor in ("fr1", "fr2", "fr3", "fs", "fv", "vs", "deepseek"):
        config = RunConfig(assessor=assessor, K=3, retriever=retriever, cache_dir=cache, dataset="bios")
        results.append(run_experiment(entries, config, MockChatTransport()))

# %%
# MAE compares each response's precision with its gold precision; Brier and E
# need posteriors and so are blank for the prompt-only baselines.  The vs row
# is all undecided because search-result blocks carry the short snippet, and the
# mock responder's word-overlap rule finds nothing to judge in it.
print(render_report(results, "markdown"))

# %%
# Conflicting-evidence claims report accuracy: the share of claims judged supported.
claims = load_dataset(HERE / "data" / "conflicts.jsonl", "conflicts")
row = run_experiment(claims, RunConfig(assessor="fr2", retriever=retriever, dataset="conflicts"), MockChatTransport())
print(render_report(row, "markdown"))
