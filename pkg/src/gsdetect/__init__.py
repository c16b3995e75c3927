"""Generated-squatting-domain detection pipeline.

Step 1 clusters known phishing domain names in embedding space and
derives per-cluster matching rules; Step 2 flags new domains whose
embeddings sit close to enough known-phishing references and survive
the top cluster's rule.
"""

from .analytics import (
    ClusterReport,
    GuidelineResult,
    SweepRow,
    analyze_clusters,
    damerau_levenshtein,
    eval_sweep,
    guideline_match,
)
from .clustering import (
    NOISE,
    Cluster,
    MatchingRule,
    Step1Result,
    dbscan,
    generate_rule,
    run_step1,
)
from .config import PipelineConfig, build_config, make_embedder
from .detector import (
    DetectionResult,
    Mode,
    ReferenceIndex,
    Verdict,
    build_index,
    query,
    run_step2,
)
from .domains import DomainName, PublicSuffixSnapshot, load_psl, parse_fqdn
from .embedding import (
    ReferenceEmbedder,
    TokenVocabulary,
    cosine,
    embed_reference,
    tokenize,
)
from .ingest import (
    IngestRecord,
    SeenSet,
    Source,
    diff_zone,
    ingest_ct,
    ingest_pdns,
    load_ti,
)
from .prefilter import FilterReason, FilterVerdict, filter_domain
from .synth import (
    SplitMix64,
    SynthTemplate,
    Technique,
    synthesize_benign,
    synthesize_cluster,
)

__version__ = "0.1.0"

__all__ = [
    "ClusterReport",
    "Cluster",
    "DetectionResult",
    "DomainName",
    "FilterReason",
    "FilterVerdict",
    "GuidelineResult",
    "IngestRecord",
    "MatchingRule",
    "Mode",
    "NOISE",
    "PipelineConfig",
    "PublicSuffixSnapshot",
    "ReferenceEmbedder",
    "ReferenceIndex",
    "SeenSet",
    "Source",
    "SplitMix64",
    "Step1Result",
    "SweepRow",
    "SynthTemplate",
    "Technique",
    "TokenVocabulary",
    "Verdict",
    "analyze_clusters",
    "build_config",
    "build_index",
    "cosine",
    "damerau_levenshtein",
    "dbscan",
    "diff_zone",
    "embed_reference",
    "eval_sweep",
    "filter_domain",
    "generate_rule",
    "guideline_match",
    "ingest_ct",
    "ingest_pdns",
    "load_psl",
    "load_ti",
    "make_embedder",
    "parse_fqdn",
    "query",
    "run_step1",
    "run_step2",
    "synthesize_benign",
    "synthesize_cluster",
    "tokenize",
]
