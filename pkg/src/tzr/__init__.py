"""tzr: training-free semantic frame retrieval via inverse-attention regions.

Frames are embedded twice over: once globally, and once per low-attention
region (windows of the encoder's attention heatmap that scored below a
threshold, clustered and re-cropped). Queries rank frames by the maximum
cosine over all of a frame's embeddings, surfacing matches that hide in
visually neglected corners of crowded scenes.
"""

from .core import AttentionMap, Box, Embedding, FrameRef, cosine, l2_normalize
from .denseset import AnnotationSet, DensePair, build_denseset
from .encoders import (
    EncodeImageResult,
    EncoderClient,
    EncoderError,
    EncoderInfo,
    HttpEncoderClient,
    TestEncoder,
    build_encoder_app,
    resolve_encoder,
)
from .index import (
    EvalPair,
    FrameRecord,
    RetrievalIndex,
    RetrievalResult,
    load_eval_pairs,
    save_eval_pairs,
    score_frame,
)
from .ingest import EngineConfig, IngestJob, IngestReport, ingest, sample_frames
from .kmeans import KMeansResult, kmeans
from .pipeline import (
    MODES,
    FrameAnalysis,
    PipelineParams,
    analyze_frame,
    binary_mask,
    grid_crops,
    lace,
    lafm_pack,
    larc,
    lard,
    upsample_heatmap,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotationSet",
    "AttentionMap",
    "Box",
    "DensePair",
    "Embedding",
    "EncodeImageResult",
    "EncoderClient",
    "EncoderError",
    "EncoderInfo",
    "EngineConfig",
    "EvalPair",
    "FrameAnalysis",
    "FrameRecord",
    "FrameRef",
    "HttpEncoderClient",
    "IngestJob",
    "IngestReport",
    "KMeansResult",
    "MODES",
    "PipelineParams",
    "RetrievalIndex",
    "RetrievalResult",
    "TestEncoder",
    "analyze_frame",
    "binary_mask",
    "build_denseset",
    "build_encoder_app",
    "cosine",
    "grid_crops",
    "ingest",
    "kmeans",
    "l2_normalize",
    "lace",
    "lafm_pack",
    "larc",
    "lard",
    "load_eval_pairs",
    "resolve_encoder",
    "sample_frames",
    "save_eval_pairs",
    "score_frame",
    "upsample_heatmap",
]
