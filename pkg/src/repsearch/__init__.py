"""Hybrid dense/sparse first-stage retrieval over per-text model representations.

The package turns per-text encoder outputs (a dense hidden-state vector plus
raw next-token logits) into two complementary search structures: a flat
cosine index over the dense vectors and an impact-weighted inverted index
over sparsified logits. Runs from both (optionally joined by lexical BM25)
are combined with min-max weighted score fusion, and ranking quality is
measured with standard graded-relevance metrics.
"""

from .bm25 import Bm25Index, Bm25Indexer, build_bm25_index, load_bm25_index, save_bm25_index, search_bm25
from .dense_index import (
    DenseIndex,
    DenseIndexer,
    build_dense_index,
    load_dense_index,
    save_dense_index,
    search_dense,
)
from .errors import BuildError, ConfigError, ParseError, RepSearchError, SchemaError
from .evaluation import (
    Qrels,
    evaluate_runs,
    mean_metric,
    mrr_at_k,
    ndcg_at_k,
    read_qrels,
    recall_at_k,
    write_qrels,
)
from .fusion import fuse, fuse_all, minmax_normalize, weight_sweep
from .mock_encoder import mock_encode
from .multirep import (
    MODES,
    MULTI_REP_MODES,
    SINGLE_REP_MODES,
    MultiRep,
    colbert_score,
    group_words,
    multirep_from_record,
    pool_tokens,
    pooled_record,
    search_multirep,
)
from .pipeline import PipelineConfig, read_corpus, read_queries, run_pipeline
from .records import (
    RepresentationRecord,
    TokenRecord,
    load_records,
    parse_record,
    serialize_record,
    write_records,
)
from .runs import RunList, read_run_file, write_run_file
from .sparse_index import (
    InvertedIndex,
    SparseIndexer,
    build_sparse_index,
    load_sparse_index,
    save_sparse_index,
    search_sparse,
)
from .sparsifier import (
    LogitSparsifier,
    SparseRep,
    SparsifierConfig,
    VocabTokenizer,
    WholeWordTokenizer,
    quantize,
    restrict_vector,
    sparsify,
    sparsify_record,
    sparsify_text,
    token_keys_for_words,
)
from .text import english_stopwords, extract_words, tokenize

__version__ = "0.1.0"
