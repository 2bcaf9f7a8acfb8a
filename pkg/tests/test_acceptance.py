"""Acceptance criteria, one test per criterion.

Every expected value is produced by an oracle from ``oracles.py`` (explicit
summation or the star odds product) or is a closed-form constant.  A one-line
PASS/FAIL summary per criterion is printed at the end of the pytest run.
"""

from __future__ import annotations

import math
import re
import time

import numpy as np
import pytest

from conftest import FIXTURE, UNLABELED, write_jsonl
from factreason import prompts
from factreason.harness import RunConfig, load_dataset, render_report, run_experiment
from factreason.inference import WmbConfig, read_uai, ve_marginals, wmb_marginals, write_uai
from factreason.inference.ordering import min_fill_order
from factreason.metrics import Verdict, brier, e_measure, f1_at_k, mae, precision, recall_at_k
from factreason.model_builder import (
    FR2,
    FR3,
    AtomRecord,
    ContextRecord,
    FrVariant,
    Relation,
    RelationEdge,
    build_fr_model,
    relation_factor,
    table1_rows,
)
from factreason.pgm_core import enumerate_joint, random_model
from factreason.pipeline import parse_atoms, parse_revision
from factreason.baselines import parse_bracketed, parse_hashed
from factreason.relations import NliLabel, parse_nli_label
from factreason.retrieval import RetrieverConfig
from factreason.testing import MockChatTransport, RuleBasedResponder
from oracles import brute_force, two_context_model, star_posterior

pytestmark = pytest.mark.acceptance

CORPUS_SEED = 20240521
CORPUS_SIZE = 200


def random_corpus():
    rng = np.random.default_rng(CORPUS_SEED)
    for _ in range(CORPUS_SIZE):
        n = int(rng.integers(2, 13))
        m = int(rng.integers(1, 21))
        yield random_model(rng, n, m)


def context_model(extra_context_p: float | None = None):
    """One atom, C1 entails it (0.8), C2 contradicts it (0.9); optionally C3 contradicts C2."""
    atoms = [AtomRecord("a1", "atom")]
    contexts = [ContextRecord("C1", content="c1"), ContextRecord("C2", content="c2")]
    edges = [RelationEdge("C1", "a1", Relation.ENTAIL, 0.8), RelationEdge("C2", "a1", Relation.CONTRADICT, 0.9)]
    if extra_context_p is not None:
        contexts.append(ContextRecord("C3", content="c3"))
        edges.append(RelationEdge("C3", "C2", Relation.CONTRADICT, extra_context_p))
    return build_fr_model(atoms, contexts, edges, FR3)


TWO_CONTEXT_P = star_posterior(0.5, [(Relation.ENTAIL, 0.8, 0.99), (Relation.CONTRADICT, 0.9, 0.99)])


def test_criterion_01_two_context_golden_marginal():
    start = time.perf_counter()
    model, binding = context_model()
    p = ve_marginals(model).marginals.p_true(binding["a1"])
    elapsed = time.perf_counter() - start
    assert abs(p - 0.3179) <= 0.001
    assert abs(p - TWO_CONTEXT_P) < 1e-12
    assert round(p, 2) == 0.32
    assert elapsed < 1.0


def test_criterion_02_ve_matches_enumeration_on_random_models():
    worst_marg = worst_logz = 0.0
    for model in random_corpus():
        assert model.num_variables <= 12 and len(model.factors) <= 20
        assert all(0.0 < v <= 1.0 for f in model.factors for v in f.values)
        exact, log_z = enumerate_joint(model)
        res = ve_marginals(model)
        worst_marg = max(worst_marg, res.marginals.max_abs_diff(exact))
        worst_logz = max(worst_logz, abs(res.log_z - log_z))
    assert worst_marg < 1e-9 and worst_logz < 1e-9


def test_criterion_03_star_closed_form():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n_ctx = int(rng.integers(1, 7))
        prior = float(rng.uniform(0.05, 0.95))
        spokes = [
            (Relation.ENTAIL if rng.random() < 0.5 else Relation.CONTRADICT, float(rng.uniform(0.5, 0.999)), float(rng.uniform(0.01, 0.999)))
            for _ in range(n_ctx)
        ]
        atoms = [AtomRecord("a0", "atom")]
        contexts = [ContextRecord(f"a0:c{i}", content=f"c{i}", prior_true=q, retrieved_for={"a0"}) for i, (_, _, q) in enumerate(spokes)]
        edges = [RelationEdge(f"a0:c{i}", "a0", r, p) for i, (r, p, _) in enumerate(spokes)]
        model, binding = build_fr_model(atoms, contexts, edges, FrVariant("FR1", n_ctx), atom_prior=prior)
        got = ve_marginals(model).marginals.p_true(binding["a0"])
        assert abs(got - star_posterior(prior, spokes)) < 1e-12


def test_criterion_04_wmb_contract():
    for model in random_corpus():
        order = min_fill_order(model)
        exact = ve_marginals(model, order)
        tight = wmb_marginals(model, order, WmbConfig(i_bound=order.induced_width + 1))
        assert tight.marginals.max_abs_diff(exact.marginals) < 1e-6
        loose = wmb_marginals(model, order, WmbConfig(i_bound=2))
        assert loose.upper_bound >= exact.log_z - 1e-9
        bounds = [wmb_marginals(model, order, WmbConfig(i_bound=i)).upper_bound for i in range(1, order.induced_width + 2)]
        assert all(b <= a + 1e-9 for a, b in zip(bounds, bounds[1:]))


@pytest.mark.parametrize("base", [[], [(Relation.ENTAIL, 0.7, 0.9)], [(Relation.CONTRADICT, 0.8, 0.95)]])
def test_criterion_05_monotonicity_sweep(base):
    def posterior(spokes):
        atoms = [AtomRecord("a0", "atom")]
        contexts = [ContextRecord(f"c{i}", content=f"c{i}", prior_true=q) for i, (_, _, q) in enumerate(spokes)]
        edges = [RelationEdge(f"c{i}", "a0", r, p) for i, (r, p, _) in enumerate(spokes)]
        model, binding = build_fr_model(atoms, contexts, edges, FR2)
        got = ve_marginals(model).marginals.p_true(binding["a0"])
        oracle, _ = brute_force(model)
        assert abs(got - oracle[binding["a0"]]) < 1e-12
        assert abs(got - star_posterior(0.5, spokes)) < 1e-12
        return got

    before = posterior(base)
    for p in (0.55, 0.7, 0.9, 0.99):
        for q in (0.6, 0.9, 0.99):
            assert posterior(base + [(Relation.ENTAIL, p, q)]) > before
            assert posterior(base + [(Relation.CONTRADICT, p, q)]) < before


def test_criterion_06_third_context_contradicting_context_raises_posterior():
    values = {}
    for p in (0.6, 0.7, 0.8, 0.9, 0.99):
        model, binding = context_model(p)
        got = ve_marginals(model).marginals.p_true(binding["a1"])
        oracle, _ = brute_force(model)
        assert abs(got - oracle[binding["a1"]]) < 1e-12
        assert got > TWO_CONTEXT_P
        values[p] = got
    assert abs(values[0.9] - 0.4116) < 1e-4


def test_criterion_07_e_measure_constants():
    assert abs(e_measure([0.5] * 5) - 0.150515) <= 1e-6
    assert e_measure([1.0] * 5) == 0.0


def test_criterion_08_metric_formulas():
    labels = [Verdict.SUPPORTED] * 6 + [Verdict.CONTRADICTED] * 4 + [Verdict.UNDECIDED] * 4
    assert abs(precision(labels) - 6 / 14) < 1e-12
    assert abs(recall_at_k(labels, 7) - 6 / 7) < 1e-12
    assert abs(f1_at_k(labels, 7) - 4 / 7) < 1e-12
    assert (round(precision(labels), 2), round(f1_at_k(labels, 7), 2)) == (0.43, 0.57)
    assert f1_at_k([Verdict.CONTRADICTED, Verdict.UNDECIDED], 5) == 0.0
    assert abs(mae([0.4, 0.75, 1.0], [0.5, 0.5, 0.5]) - 0.85 / 3) < 1e-12
    assert abs(brier([0.9, 0.2, 0.6], [True, False, False]) - (0.01 + 0.04 + 0.36) / 3) < 1e-12


@pytest.mark.parametrize("p", [0.5, 0.8, 0.9])
def test_criterion_09_relation_factor_table(p):
    q = 1.0 - p
    # rows: (x,y), (x,~y), (~x,y), (~x,~y)
    expected = {
        Relation.ENTAIL: (p, q, p, p),
        Relation.CONTRADICT: (q, p, p, p),
        Relation.EQUIVALENCE: (p, q, q, p),
    }
    for relation, rows in expected.items():
        assert table1_rows(relation_factor(RelationEdge("x", "y", relation, p), 0, 1)) == rows


def test_criterion_10_prompt_reply_exemplars():
    lead = "Please breakdown the following paragraph into independent statements:"
    for section in prompts.ATOMIZER.split(lead)[1:-1]:
        listing = section.split("\n", 1)[1].strip()
        items = listing.splitlines()
        assert items and all(i.startswith("- ") for i in items)
        assert parse_atoms(listing) == [i[2:] for i in items]
    for reply in re.findall(r"^Standalone: (.*)$", prompts.REVISER, re.MULTILINE):
        assert parse_revision(reply) == reply[4:-4]
    nli = re.findall(r"^(Output: \w+)$", prompts.NLI, re.MULTILINE)
    assert [parse_nli_label(r) for r in nli] == [
        NliLabel.CONTRADICTION, NliLabel.CONTRADICTION, NliLabel.NEUTRAL, NliLabel.ENTAILMENT]
    answers = [l[2:] for l in prompts.FACTVERIFY.splitlines() if l.startswith("- [")]
    assert [parse_bracketed(a) for a in answers] == [Verdict.SUPPORTED, Verdict.CONTRADICTED, Verdict.UNDECIDED]
    assert parse_bracketed("[Supported]") is Verdict.SUPPORTED
    decisions = re.findall(r"^Your decision: (###\w+###)$", prompts.VERISCORE, re.MULTILINE)
    assert [parse_hashed(d) for d in decisions] == [Verdict.UNDECIDED, Verdict.SUPPORTED, Verdict.CONTRADICTED]
    assert parse_hashed("###Supported###") is Verdict.SUPPORTED


def test_criterion_11_end_to_end_determinism(tmp_path):
    path = write_jsonl(tmp_path / "three.jsonl", UNLABELED)
    entries = load_dataset(path, "unlabeled")
    assert len(entries) == 3
    reports = []
    for concurrency in (1, 8, 1, 8):
        config = RunConfig(
            assessor="fr3",
            K=3,
            retriever=RetrieverConfig(source="cached_fixture", fixture=FIXTURE),
            concurrency=concurrency,
            dataset="three",
        )
        reports.append(render_report(run_experiment(entries, config, MockChatTransport()), "json").encode("utf-8"))
    assert all(r == reports[0] for r in reports)
    assert b'"failed":0' in reports[0]


@pytest.mark.parametrize("support_p, conflict_p", [(0.9, 0.8), (0.85, 0.85)])
def test_criterion_12_conflicts_micro_check(tmp_path, support_p, conflict_p):
    claim, pro, con = "The bridge opened in 1932.", "The bridge opened in 1932.", "The bridge did not open in 1932."
    path = write_jsonl(tmp_path / "c.jsonl", [{"id": "x", "claim": claim, "contexts": [
        {"text": pro, "stance": "support"}, {"text": con, "stance": "conflict"}]}])
    responder = RuleBasedResponder(overrides={(pro, claim): ("entailment", support_p), (con, claim): ("contradiction", conflict_p)})
    config = RunConfig(assessor="fr2", retriever=RetrieverConfig(source="cached_fixture", fixture={}))
    result = run_experiment(load_dataset(path, "conflicts"), config, MockChatTransport(responder))
    verdict = result.entries[0].report.verdicts[0]
    oracle = star_posterior(0.5, [(Relation.ENTAIL, support_p, 0.99), (Relation.CONTRADICT, conflict_p, 0.99)])
    assert abs(verdict.p_true - oracle) < 1e-12
    if support_p > conflict_p:
        assert verdict.label is Verdict.SUPPORTED and result.aggregate["accuracy"] == 1.0
    else:
        assert abs(oracle - 0.5) < 1e-12 and verdict.label is Verdict.UNDECIDED


def test_criterion_13_uai_round_trip():
    model = two_context_model()
    back = read_uai(write_uai(model))
    oracle, _ = brute_force(model)
    got = ve_marginals(back).marginals.probs[:, 1]
    assert np.max(np.abs(got - np.array(oracle))) < 1e-12
    assert math.isclose(ve_marginals(back).log_z, ve_marginals(model).log_z, abs_tol=1e-12)
