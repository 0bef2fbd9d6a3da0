"""cfprobe: counterfactual caption sets and retrieval-bias measurement.

Builds counterfactual image-caption set specifications over intersectional
social attributes, plans and filters image generations, and measures
Skew@K / MaxSkew@K of joint image-text embedding models under
attribute-neutral queries.
"""

from .audit import (
    AuditAnnotation,
    ConfusionStats,
    confusion_stats,
    error_census,
    predict_attribute,
    predict_gender,
)
from .captions import (
    CaptionRecord,
    Census,
    CounterfactualSet,
    dataset_census,
    enumerate_captions,
    enumerate_plan,
    neutral_prompt,
)
from .config import (
    AttributeValue,
    Prefix,
    ProbeConfig,
    Subject,
    default_config,
    load_config,
    save_config,
)
from .embeddings import (
    EmbeddingRecord,
    EmbeddingStore,
    ImageAsset,
    ingest,
    mock_embed,
    normalize,
    write_embeddings,
)
from .errors import (
    ConfigurationError,
    DegenerateVectorError,
    DimensionMismatchError,
    IngestError,
    StageError,
)
from .filtering import (
    ScoredSample,
    caption_image_similarity,
    directional_similarity,
    select_and_filter,
    set_directional_score,
)
from .metrics import (
    NEG_INF,
    DesiredDistribution,
    SkewReport,
    aggregate_across_subjects,
    conditional_skew,
    max_skew_at_k,
    proportion_breakdown,
    skew_at_k,
    skew_report,
)
from .planner import GenerationJob, job_for, plan_jobs
from .retrieval import RetrievalResult, average_text_embedding, default_k, top_k

__version__ = "0.1.0"
