"""docmap: project document corpora into a fixed-dimensionality Euclidean
space where distance encodes relevance, browse the result, and simulate a
learnable activation-pattern decoder over the same coordinates."""

__version__ = "0.1.0"

from .corpus import (
    CorpusConfig,
    Document,
    FeatureVector,
    IngestResult,
    Vocabulary,
    build_vocabulary,
    ingest_corpus,
    tokenize,
    vectorize,
)
from .decoder import (
    ActivationPattern,
    Decoder,
    DecoderSchedule,
    ProtocolConfig,
    SyntheticSubject,
    decode,
    make_cohort,
    preprocess,
    pretrain_anthropogenic,
    run_protocol,
    synth_pattern,
    train_decoder,
)
from .dimension import DimensionEstimate, JlQuery, intrinsic_dimension_pca, jl_min_dimension
from .errors import (
    CohortError,
    CorpusError,
    DocmapError,
    MapFileError,
    UnknownIdError,
    UnmappableTextError,
)
from .knowledge_map import (
    KnowledgeMap,
    NeighborResult,
    ViewProjection,
    build_map,
    load_map,
    locate_text,
    neighbors,
    project_to_view,
    relevance,
    save_map,
    save_map_json,
)
from .som import (
    Som,
    SomConfig,
    SomNode,
    StabilityReport,
    TrainSchedule,
    grow_dimension,
    grow_nodes,
    incremental_evaluate,
    init_som,
    project,
    stability_score,
    train,
)
