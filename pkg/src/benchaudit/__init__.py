"""Benchmark-evidence retrieval and validity diagnostics."""

from .anchors import AnchorSet, AnchorStrategy, Shorthand, generate_anchors, parse_shorthand
from .corpus import (
    Benchmark,
    BenchmarkItem,
    Corpus,
    MetricKind,
    ModelRunSet,
    UseCase,
    UseCaseCategory,
    attach_shorthands,
    ingest_corpus,
    load_model_runs,
    load_use_cases,
    select_seed_examples,
)
from .gateways import CompletionGateway, EmbeddingGateway, GatewayConfig
from .judge import JudgedHit, RelevanceLabel, filter_hits, judge_relevance, mean_relevance
from .pipeline import AuditPipeline, QueryResponse, StageTimings
from .validity import (
    FacetCoverageReport,
    RankAgreementReport,
    SkillFamily,
    facet_coverage,
    fleiss_kappa,
    kendall_tau,
    paired_t_test,
    rank_divergence,
    spearman_rho,
    tau_gold,
    tau_ret,
    tau_sanity,
)

__version__ = "0.1.0"
