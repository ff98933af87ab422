"""Command-line entry points.

Exit codes: 0 success, 1 validation/usage error, 2 gateway or IO error.
Every command emits machine-readable output controlled by ``--format``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .anchors import AnchorStrategy, translate_corpus_to_shorthand
from .config import EngineConfig, build_pipeline, load_runs_and_use_cases, load_shorthand_table
from .corpus import attach_shorthands, ingest_corpus, load_model_runs, load_use_cases
from .errors import (
    ArgumentError,
    BenchAuditError,
    CoverageError,
    GatewayError,
    IngestError,
)
from .gateways import CompletionGateway, EmbeddingGateway, config_from_env
from .judge import RelevanceLabel
from .metrics import (
    MetricReport,
    method_precision_at_k,
    ndcg_at_k,
    recall_at_k,
    system_precision_at_k,
)
from .retrieval import (
    RetrievalHit,
    build_dense_index,
    build_lexical_index,
    save_dense_index,
    save_lexical_index,
)
from .service import compute_convergence, report_payload
from .validity import SkillFamily, facet_coverage


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; the contract is 1
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _emit(payload, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, ensure_ascii=False, indent=2))
        return
    # table: flat key/value lines or aligned rows for lists of records
    if isinstance(payload, dict) and isinstance(payload.get("rows"), list):
        rows = payload["rows"]
        header = list(rows[0]) if rows else []
        widths = [
            max(len(str(h)), *(len(str(r[h])) for r in rows)) if rows else len(str(h))
            for h in header
        ]
        print("  ".join(str(h).ljust(w) for h, w in zip(header, widths)))
        for row in rows:
            print("  ".join(str(row[h]).ljust(w) for h, w in zip(header, widths)))
        for key, value in payload.items():
            if key != "rows":
                print(f"{key}: {value}")
    elif isinstance(payload, dict):
        for key, value in payload.items():
            print(f"{key}: {json.dumps(value, ensure_ascii=False)}")
    else:
        print(json.dumps(payload, ensure_ascii=False))


def _pipeline_from_args(args) -> "object":
    if getattr(args, "config", None):
        return build_pipeline(EngineConfig.load(args.config))
    config = EngineConfig(
        corpus=args.corpus,
        shorthand_table=getattr(args, "shorthands", None),
        default_strategy=AnchorStrategy.EXAMPLE_SYNTHESIS.value,
    )
    return build_pipeline(config)


def _cmd_ingest(args) -> int:
    corpus = ingest_corpus(args.corpus, expect_unique=not args.allow_duplicates)
    if args.shorthands:
        corpus = attach_shorthands(corpus, load_shorthand_table(args.shorthands))
    payload = {
        "items": len(corpus),
        "rows": [
            {
                "benchmark": b.benchmark_id,
                "metric": b.metric_kind.value,
                "items": b.item_count,
            }
            for b in sorted(corpus.benchmarks.values(), key=lambda b: b.benchmark_id)
        ],
    }
    _emit(payload, args.format)
    return 0


def _cmd_index_build(args) -> int:
    corpus = ingest_corpus(args.corpus)
    if args.shorthands:
        corpus = attach_shorthands(corpus, load_shorthand_table(args.shorthands))
    if args.kind == "lexical":
        index = build_lexical_index(corpus, k1=args.k1, b=args.b, space=args.space)
        save_lexical_index(index, args.out)
        payload = {"kind": "lexical", "space": args.space, "items": len(index), "out": args.out}
    else:
        embedder = EmbeddingGateway(config_from_env("embed"))
        index = build_dense_index(corpus, embedder, space=args.space)
        save_dense_index(index, args.out)
        payload = {
            "kind": "dense",
            "space": args.space,
            "items": len(index),
            "dimension": index.dimension,
            "out": args.out,
        }
    _emit(payload, args.format)
    return 0


def _cmd_translate(args) -> int:
    corpus = ingest_corpus(args.corpus)
    lm = CompletionGateway(config_from_env("lm"))
    result = translate_corpus_to_shorthand(corpus, lm, parallelism=args.parallel)
    with open(args.out, "w", encoding="utf-8") as fh:
        for item in corpus:
            if item.item_id in result.mapping:
                fh.write(
                    json.dumps({"id": item.item_id, "shorthand": result.mapping[item.item_id]})
                    + "\n"
                )
    if args.rejects and result.rejects:
        Path(args.rejects).write_text(
            "\n".join(result.rejects) + "\n", encoding="utf-8"
        )
    _emit(
        {"translated": len(result.mapping), "rejects": len(result.rejects), "out": args.out},
        args.format,
    )
    return 0


def _cmd_query(args) -> int:
    pipeline = _pipeline_from_args(args)
    response = pipeline.query(
        args.use_case,
        args.k,
        strategy=args.strategy,
        apply_filter=not args.no_filter,
        engine=args.engine,
        seed=args.seed,
    )
    rows = []
    for judged in response.hits:
        rows.append(
            {
                "rank": judged.hit.rank,
                "item_id": judged.item_id,
                "benchmark": judged.benchmark_id,
                "score": round(judged.hit.score, 6),
                "selection": judged.selection,
                "label": judged.label.value if judged.label else (
                    "judge_failed" if judged.judge_failed else None
                ),
            }
        )
    payload = {
        "use_case": response.use_case,
        "strategy": response.strategy.value,
        "engine": response.engine,
        "anchors": list(response.anchors),
        "rows": rows,
        "timings": response.timings.as_dict(),
    }
    if response.summary:
        payload["summary"] = {
            "method_precision": response.summary.method_precision,
            "system_precision": response.summary.system_precision,
            "judged": response.summary.judged,
            "failed": response.summary.failed,
        }
    _emit(payload, args.format)
    return 0


def _cmd_audit_facets(args) -> int:
    pipeline = _pipeline_from_args(args)
    cases = load_use_cases(args.use_cases)
    members = [c for c in cases if c.facet_family == args.family]
    if not members:
        raise ArgumentError(f"no use cases carry facet_family {args.family!r}")
    axes = {c.facet_axis for c in members}
    if len(axes) != 1:
        raise ArgumentError(f"family {args.family!r} mixes axes {sorted(axes)}")
    family = SkillFamily(
        family_id=args.family,
        base_capability=args.family,
        axis=axes.pop() or "",
        facets=tuple((c.facet_value or c.use_case_id, c) for c in members),
    )
    report = facet_coverage(family, pipeline, args.k)
    payload = {
        "family_id": report.family_id,
        "axis": report.axis,
        "spread": report.spread,
        "rows": [
            {
                "facet": facet,
                "relevant_fraction": round(entry.relevant_fraction, 6),
                "retrieved": entry.retrieved_count,
                "relevant": entry.relevant_count,
                "error": entry.error,
            }
            for facet, entry in report.per_facet.items()
        ],
    }
    _emit(payload, args.format)
    return 0


def _cmd_audit_convergence(args) -> int:
    pipeline = _pipeline_from_args(args)
    runs = load_model_runs(args.runs, pipeline.corpus)
    cases = {c.use_case_id: c for c in load_use_cases(args.use_cases)}
    if args.use_case not in cases:
        raise ArgumentError(f"unknown use case {args.use_case!r}")
    retrieved: dict[str, list[str]] = {}
    with open(args.retrieved, "r", encoding="utf-8") as fh:
        for raw in fh:
            raw = raw.strip()
            if not raw:
                continue
            record = json.loads(raw)
            retrieved[str(record["model"])] = [str(i) for i in record["item_ids"]]
    report = compute_convergence(
        pipeline,
        runs,
        cases[args.use_case],
        retrieved,
        trials=args.trials,
        seed=args.seed,
        shared=args.shared,
    )
    _emit(report_payload(report), args.format)
    return 0


def _cmd_eval_metrics(args) -> int:
    records = []
    with open(args.judged, "r", encoding="utf-8") as fh:
        for raw in fh:
            raw = raw.strip()
            if raw:
                records.append(json.loads(raw))
    selections = [r["selection"] for r in records if r.get("selection") is not None]
    labels = [
        RelevanceLabel(r["label"])
        for r in records
        if r.get("label") in {l.value for l in RelevanceLabel}
    ]
    report = MetricReport(
        use_case_id=args.use_case or "",
        k=args.k,
        strategy=args.strategy or "",
        method_precision=method_precision_at_k(selections, args.k) if selections else None,
        system_precision=system_precision_at_k(labels, args.k) if labels else None,
        ndcg=ndcg_at_k(labels, args.k) if labels else None,
        denominators={"k": args.k, "judged": len(labels), "records": len(records)},
    )
    if args.gold:
        gold = set(Path(args.gold).read_text(encoding="utf-8").split())
        hits = [
            RetrievalHit(item_id=r["item_id"], score=0.0, anchor_index=0, rank=i + 1)
            for i, r in enumerate(records)
        ]
        report.recall = recall_at_k(hits, gold, args.k)
    payload = {
        "use_case_id": report.use_case_id,
        "strategy": report.strategy,
        "k": report.k,
        "method_precision": report.method_precision,
        "system_precision": report.system_precision,
        "recall": report.recall,
        "ndcg": report.ndcg,
        "denominators": report.denominators,
    }
    _emit(payload, args.format)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = EngineConfig.load(args.config)
    pipeline = build_pipeline(config)
    runs, cases = load_runs_and_use_cases(config, pipeline.corpus)
    app = create_app(pipeline, runs=runs, use_cases=cases, default_k=config.default_k)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _add_format(parser) -> None:
    parser.add_argument("--format", choices=("json", "table"), default="json")


def build_parser() -> _Parser:
    parser = _Parser(prog="benchaudit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and summarize a corpus file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--shorthands")
    p.add_argument("--allow-duplicates", action="store_true")
    _add_format(p)
    p.set_defaults(fn=_cmd_ingest)

    p = sub.add_parser("index", help="index operations")
    index_sub = p.add_subparsers(dest="index_command", required=True)
    pb = index_sub.add_parser("build", help="build and persist an index")
    pb.add_argument("--kind", choices=("lexical", "dense"), required=True)
    pb.add_argument("--space", choices=("raw", "shorthand"), default="raw")
    pb.add_argument("--corpus", required=True)
    pb.add_argument("--shorthands")
    pb.add_argument("--out", required=True)
    pb.add_argument("--k1", type=float, default=1.2)
    pb.add_argument("--b", type=float, default=0.75)
    _add_format(pb)
    pb.set_defaults(fn=_cmd_index_build)

    p = sub.add_parser("translate-shorthand", help="rewrite a corpus into shorthand space")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rejects")
    p.add_argument("--parallel", type=int, default=None)
    _add_format(p)
    p.set_defaults(fn=_cmd_translate)

    p = sub.add_parser("query", help="retrieve evidence for a use-case")
    p.add_argument("--use-case", required=True)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--strategy", choices=[s.value for s in AnchorStrategy], default=None)
    p.add_argument("--engine", choices=("dense", "lexical", "random"), default="dense")
    p.add_argument("--no-filter", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.add_argument("--corpus")
    p.add_argument("--shorthands")
    _add_format(p)
    p.set_defaults(fn=_cmd_query)

    p = sub.add_parser("audit", help="validity audits")
    audit_sub = p.add_subparsers(dest="audit_command", required=True)
    pf = audit_sub.add_parser("facets", help="facet-coverage audit for a skill family")
    pf.add_argument("--family", required=True)
    pf.add_argument("--use-cases", required=True)
    pf.add_argument("--k", type=int, default=20)
    pf.add_argument("--config")
    pf.add_argument("--corpus")
    pf.add_argument("--shorthands")
    _add_format(pf)
    pf.set_defaults(fn=_cmd_audit_facets)
    pc = audit_sub.add_parser("convergence", help="rank-agreement audit for a use-case")
    pc.add_argument("--use-case", required=True)
    pc.add_argument("--use-cases", required=True)
    pc.add_argument("--runs", required=True)
    pc.add_argument("--retrieved", required=True, help="lines of {model, item_ids[]}")
    pc.add_argument("--trials", type=int, default=50)
    pc.add_argument("--seed", type=int, default=0)
    pc.add_argument("--shared", action="store_true")
    pc.add_argument("--config")
    pc.add_argument("--corpus")
    pc.add_argument("--shorthands")
    _add_format(pc)
    pc.set_defaults(fn=_cmd_audit_convergence)

    p = sub.add_parser("eval", help="metric evaluation")
    eval_sub = p.add_subparsers(dest="eval_command", required=True)
    pm = eval_sub.add_parser("metrics", help="compute metrics from a judged-results file")
    pm.add_argument("--judged", required=True)
    pm.add_argument("--k", type=int, default=20)
    pm.add_argument("--gold", help="whitespace-separated gold item ids")
    pm.add_argument("--use-case", default="")
    pm.add_argument("--strategy", default="")
    _add_format(pm)
    pm.set_defaults(fn=_cmd_eval_metrics)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.set_defaults(fn=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (GatewayError, IngestError, CoverageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BenchAuditError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
