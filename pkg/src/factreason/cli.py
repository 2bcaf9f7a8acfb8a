"""Command-line entry point: ``assess``, ``infer`` and ``version``.

Exit codes: 0 success, 1 fatal error, 2 usage error, 3 run finished but some
entries failed.  API keys are read from ``FACTREASON_LLM_KEY`` and
``FACTREASON_SERPER_KEY`` only.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from loguru import logger

from . import __version__
from .errors import FactReasonError
from .harness import ASSESSOR_NAMES, DATASET_FORMATS, DEFAULT_K, REPORT_FORMATS, RunConfig, load_dataset, render_report, run_experiment
from .inference import InferenceConfig, infer, read_uai
from .llm import LLMConfig
from .retrieval import RetrieverConfig

_RETRIEVERS = {"wikipedia": "wikipedia", "web": "web_search", "fixture": "cached_fixture"}


def _probability(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"expected a probability in (0, 1), got {text}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="factreason", description="Probabilistic factuality assessment.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("assess", help="run an assessor over a JSONL dataset and write a report")
    a.add_argument("--input", required=True, help="JSON-Lines dataset")
    a.add_argument("--format", required=True, choices=DATASET_FORMATS)
    a.add_argument("--assessor", default="fr2", choices=ASSESSOR_NAMES)
    a.add_argument("--K", type=_positive, default=DEFAULT_K, help="target atom count for R@K and F1@K")
    a.add_argument("--retriever", default="wikipedia", choices=sorted(_RETRIEVERS))
    a.add_argument("--fixture", help="JSON file mapping queries to hits (for --retriever fixture)")
    a.add_argument("--k", type=_positive, help="contexts per atom (default 3 for wikipedia, 5 for web)")
    a.add_argument("--atom-prior", type=_probability, default=0.5)
    a.add_argument("--context-prior", type=_probability, help="override every context's prior")
    a.add_argument("--engine", default="auto", choices=("auto", "ve", "wmb"))
    a.add_argument("--ibound", type=_positive, default=6)
    a.add_argument("--llm-endpoint", default=LLMConfig.endpoint)
    a.add_argument("--llm-model", default=LLMConfig.model_name)
    a.add_argument("--cache", help="directory for the response cache (makes runs resumable)")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--concurrency", type=_positive, default=8)
    a.add_argument("--no-revise", action="store_true", help="skip the atom reviser")
    a.add_argument("--output", help="report path (default: stdout)")
    a.add_argument("--report-format", default="json", choices=REPORT_FORMATS)

    i = sub.add_parser("infer", help="posterior marginals of a UAI MARKOV model")
    i.add_argument("--model", required=True, help="UAI file")
    i.add_argument("--query", default="marginals", choices=("marginals",))
    i.add_argument("--engine", default="auto", choices=("auto", "ve", "wmb"))
    i.add_argument("--ibound", type=_positive, default=6)
    i.add_argument("--seed", type=int, default=0)

    sub.add_parser("version", help="print the package version")
    return parser


def _assess(args: argparse.Namespace) -> int:
    source = _RETRIEVERS[args.retriever]
    if source == "cached_fixture":
        if not args.fixture:
            raise SystemExit("factreason assess: --retriever fixture needs --fixture FILE")
        retriever = RetrieverConfig.from_fixture_file(args.fixture, k=args.k)
    else:
        retriever = RetrieverConfig(source=source, k=args.k)
    config = RunConfig(
        assessor=args.assessor,
        K=args.K,
        retriever=retriever,
        atom_prior=args.atom_prior,
        context_prior=args.context_prior,
        inference=InferenceConfig(engine=args.engine, i_bound=args.ibound),
        llm=LLMConfig(endpoint=args.llm_endpoint, model_name=args.llm_model),
        cache_dir=args.cache,
        seed=args.seed,
        concurrency=args.concurrency,
        revise_atoms=not args.no_revise,
        dataset=Path(args.input).stem,
    )
    entries = load_dataset(args.input, args.format)
    result = run_experiment(entries, config)
    text = render_report(result, args.report_format)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    failed = result.aggregate["failed"]
    if failed:
        logger.warning("{} of {} entries failed", failed, len(entries))
        return 3
    return 0


def _infer(args: argparse.Namespace) -> int:
    model = read_uai(Path(args.model).read_text(encoding="utf-8"))
    result = infer(model, InferenceConfig(engine=args.engine, i_bound=args.ibound, seed=args.seed))
    out = {
        "engine": result.engine,
        "exact": result.exact,
        "log_z": result.log_z,
        "log_z_upper": result.log_z_upper,
        "marginals": [list(map(float, row)) for row in result.marginals.probs],
    }
    print(json.dumps(out, indent=2))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logger.remove()
    logger.add(lambda msg: sys.stderr.write(msg), level="INFO" if args.verbose else "WARNING")
    if args.command == "version":
        print(__version__)
        return 0
    try:
        return _assess(args) if args.command == "assess" else _infer(args)
    except (FactReasonError, OSError, ValueError) as exc:
        print(f"factreason {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
