"""semspace: build, query, validate and trace LSA-style semantic spaces,
and run construction-integration comprehension simulations on top of them."""

__version__ = "0.1.0"

from .corpusio import (  # noqa: F401
    CommonWordList,
    Corpus,
    LemmaMap,
    Paragraph,
    SourceCategory,
    TokenizePolicy,
    corpus_stats,
    ingest,
    lemmatize,
    readability,
    stratify,
    tokenize,
)
from .errors import ConvergenceError, DataError, InputError, SemspaceError  # noqa: F401
from .vecspace import (  # noqa: F401
    SemanticSpace,
    build_matrix,
    build_space,
    cosine,
    fold_in,
    load_space,
    log_entropy_weight,
    neighbors,
    save_space,
    term_vector,
    truncated_svd,
)
