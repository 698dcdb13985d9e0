"""Command line entry point.

Exit codes: 0 success, 2 configuration error, 3 data error,
4 NLP backend requested but degraded (run completed on the fallback).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .evaluation import (
    EvaluationError,
    evaluate,
    format_report,
    format_stats,
    load_gold,
    predicted_from_cluster_dump,
    stats_from_clusters,
    stats_to_dict,
)
from .ingest import IngestError
from .nlp import ENDPOINT_ENV, FALLBACK_TAG
from .pipeline import PipelineConfig, PipelineError, run
from .rules import ConfigError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quotekg",
        description="Build a multilingual quote knowledge graph from Wikiquote dumps.",
    )
    parser.add_argument("--version", action="store_true", help="print version and model expectations")
    sub = parser.add_subparsers(dest="command")

    run_p = sub.add_parser("run", help="run pipeline stages")
    run_p.add_argument("stage", choices=["extract", "enrich", "align", "emit", "all"])
    run_p.add_argument("--dumps-dir", default="fixtures/dumps")
    run_p.add_argument("--languages", help="comma separated edition codes (default: all configured)")
    run_p.add_argument("--min-pages", type=int, default=50)
    run_p.add_argument("--sitelinks", default="fixtures/sitelinks.tsv")
    run_p.add_argument("--rules", help="rules YAML (default: packaged vocabulary)")
    run_p.add_argument("--nlp-endpoint", help=f"NLP service URL (or set {ENDPOINT_ENV})")
    run_p.add_argument("--threshold", type=float, default=0.8)
    run_p.add_argument("--base-iri", default=None)
    run_p.add_argument("--format", choices=["ntriples", "turtle", "both"], default="both")
    run_p.add_argument("--out", default="out")
    run_p.add_argument("--jobs", type=int, default=1)
    run_p.add_argument("--emit-raw", metavar="PATH", help="extra copy of the raw-quote dump")
    run_p.add_argument("--dump-clusters", metavar="PATH", help="extra copy of the cluster dump")

    eval_p = sub.add_parser("eval", help="pairwise clustering evaluation against a gold file")
    eval_p.add_argument("--gold", required=True)
    eval_p.add_argument("--predicted", required=True, help="cluster dump ndjson")
    eval_p.add_argument("--json", action="store_true", help="machine readable output")

    stats_p = sub.add_parser("stats", help="corpus statistics")
    group = stats_p.add_mutually_exclusive_group(required=True)
    group.add_argument("--graph", help="N-Triples graph file")
    group.add_argument("--clusters", help="cluster dump ndjson")
    stats_p.add_argument("--json", action="store_true")
    return parser


def _cmd_run(args) -> int:
    from .rdf import DEFAULT_BASE_IRI

    config = PipelineConfig(
        dumps_dir=args.dumps_dir,
        sitelinks_path=args.sitelinks,
        out_dir=args.out,
        languages=args.languages.split(",") if args.languages else None,
        rules_path=args.rules,
        nlp_endpoint=args.nlp_endpoint,
        threshold=args.threshold,
        fmt=args.format,
        min_pages=args.min_pages,
        jobs=args.jobs,
        base_iri=args.base_iri or DEFAULT_BASE_IRI,
        emit_raw_copy=args.emit_raw,
        dump_clusters_copy=args.dump_clusters,
    )
    report = run(args.stage, config)
    print(json.dumps({"counters": report.counters, "degraded": report.degraded}, indent=2, sort_keys=True))
    return 4 if report.degraded else 0


def _cmd_eval(args) -> int:
    gold = load_gold(args.gold)
    predicted = predicted_from_cluster_dump(args.predicted)
    report = evaluate(predicted, gold)
    if args.json:
        total, (mp, mr, mf) = report.micro
        ap, ar, af = report.macro
        payload = {
            "per_person": [
                {
                    "person": person,
                    "tp": c.tp,
                    "tn": c.tn,
                    "fp": c.fp,
                    "fn": c.fn,
                    "precision": p,
                    "recall": r,
                    "f1": f1,
                }
                for person, c, p, r, f1 in report.rows
            ],
            "micro": {
                "tp": total.tp,
                "tn": total.tn,
                "fp": total.fp,
                "fn": total.fn,
                "precision": mp,
                "recall": mr,
                "f1": mf,
            },
            "macro": {"precision": ap, "recall": ar, "f1": af},
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(format_report(report))
    return 0


def _cmd_stats(args) -> int:
    if args.graph:
        from .rdf import parse_ntriples, stats_from_graph

        with open(args.graph, "rb") as fh:
            triples = parse_ntriples(fh.read())
        stats = stats_from_graph(triples)
    else:
        from .alignment import cluster_from_dict
        from .pipeline import _read_ndjson

        _, rows = _read_ndjson(args.clusters, "quotekg/clusters", "align")
        stats = stats_from_clusters(cluster_from_dict(r) for r in rows)
    if args.json:
        print(json.dumps(stats_to_dict(stats), indent=2, sort_keys=True))
    else:
        print(format_stats(stats))
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.version:
        print(f"quotekg {__version__}")
        print(f"offline embedding model: {FALLBACK_TAG}")
        print(f"remote models: whatever {ENDPOINT_ENV} reports via /health (pinned per run)")
        return 0
    if not args.command:
        parser.print_help()
        return 2
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "stats":
            return _cmd_stats(args)
        parser.error(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (PipelineError, IngestError, EvaluationError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
