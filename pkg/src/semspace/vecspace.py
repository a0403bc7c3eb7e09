"""Semantic space construction and queries.

Pipeline: sparse term-paragraph counts -> log-entropy weighting -> truncated
SVD.  Term vectors are the rows of U_k, by default scaled by the singular
values, and similarity is the cosine.  Spaces are immutable once built and
serialize to a versioned binary format that round-trips bit-exactly.
"""
from __future__ import annotations

import json
import struct
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import ArpackNoConvergence, svds

from .corpusio import Corpus
from .errors import ConvergenceError, DataError, InputError

Vector = np.ndarray

# Row norms below this are treated as degenerate (a term weighted to zero
# everywhere has no direction).
_DEGENERATE_NORM = 1e-12

# Matrices with min(shape) at or below this are decomposed densely; above it
# the seeded ARPACK path is used.  Both paths are deterministic for a fixed
# seed on a given machine.
_DENSE_LIMIT = 400

_ARPACK_MAXITER = 5000


@dataclass(frozen=True)
class TermStats:
    term: str
    tf_total: int
    df: int
    global_weight: float


@dataclass
class TermDocMatrix:
    vocab: dict[str, int]  # term -> row index
    counts: sparse.csr_matrix  # terms x paragraphs, integer
    paragraph_ids: tuple[str, ...]


@dataclass
class WeightedMatrix:
    vocab: dict[str, int]
    weights: sparse.csr_matrix  # float64, log-entropy weighted
    term_stats: tuple[TermStats, ...]
    paragraph_ids: tuple[str, ...]


def build_matrix(
    corpus: Corpus, min_count: int = 2, stop_words: Iterable[str] | None = None
) -> TermDocMatrix:
    """Count term occurrences per paragraph.

    Terms with fewer than `min_count` total occurrences are excluded, so the
    matrix never has an all-zero row.  The vocabulary is sorted, which makes
    row order (and everything downstream) deterministic.
    """
    if min_count < 1:
        raise InputError(f"min_count must be >= 1, got {min_count}")
    if len(corpus) == 0:
        raise DataError("empty corpus")
    stop = frozenset(stop_words) if stop_words else frozenset()
    totals: Counter[str] = Counter()
    for p in corpus.paragraphs:
        totals.update(p.tokens)
    vocab = {
        t: i
        for i, t in enumerate(
            sorted(t for t, c in totals.items() if c >= min_count and t not in stop)
        )
    }
    if not vocab:
        raise DataError(f"no terms survive min_count={min_count}")
    rows: list[int] = []
    cols: list[int] = []
    data: list[int] = []
    for col, p in enumerate(corpus.paragraphs):
        for term, count in Counter(p.tokens).items():
            row = vocab.get(term)
            if row is not None:
                rows.append(row)
                cols.append(col)
                data.append(count)
    counts = sparse.csr_matrix(
        (data, (rows, cols)),
        shape=(len(vocab), len(corpus.paragraphs)),
        dtype=np.int64,
    )
    return TermDocMatrix(
        vocab=vocab,
        counts=counts,
        paragraph_ids=tuple(p.id for p in corpus.paragraphs),
    )


def log_entropy_weight(matrix: TermDocMatrix) -> WeightedMatrix:
    """Apply log-entropy weighting.

    Cell weight = log2(count + 1) * G(t) with the global weight

        G(t) = 1 + sum_p (p_tp * log2 p_tp) / log2(n_docs),   p_tp = count_tp / tf_t.

    G is 1 for a term concentrated in a single paragraph and 0 for a term
    spread uniformly over all paragraphs; low G therefore marks frequent,
    widely distributed terms.  For a single-paragraph corpus G is defined
    as 1.
    """
    counts = matrix.counts.tocsr()
    n_terms, n_docs = counts.shape
    tf_total = np.asarray(counts.sum(axis=1)).ravel()
    row_of = np.repeat(np.arange(n_terms), np.diff(counts.indptr))
    p = counts.data / tf_total[row_of]
    contrib = p * np.log2(p)
    if n_docs > 1:
        entropy_sum = np.bincount(row_of, weights=contrib, minlength=n_terms)
        g = 1.0 + entropy_sum / np.log2(n_docs)
        g = np.clip(g, 0.0, 1.0)
    else:
        g = np.ones(n_terms)
    weighted = counts.astype(np.float64).copy()
    weighted.data = np.log2(counts.data + 1.0) * g[row_of]
    df = np.diff(counts.indptr)
    stats = tuple(
        TermStats(term=t, tf_total=int(tf_total[i]), df=int(df[i]), global_weight=float(g[i]))
        for t, i in matrix.vocab.items()
    )
    return WeightedMatrix(
        vocab=dict(matrix.vocab),
        weights=weighted,
        term_stats=stats,
        paragraph_ids=matrix.paragraph_ids,
    )


class SemanticSpace:
    """Immutable k-dimensional semantic space.

    `term_vectors` holds one row per vocabulary term: U_k * Sigma_k when
    built with scaling="sigma" (the default), plain U_k with scaling="none".
    """

    def __init__(
        self,
        vocab: dict[str, int],
        term_vectors: np.ndarray,
        singular_values: np.ndarray,
        term_stats: tuple[TermStats, ...],
        build_config: dict,
    ):
        if term_vectors.shape[0] != len(vocab):
            raise ValueError("term_vectors/vocab size mismatch")
        if term_vectors.shape[1] != len(singular_values):
            raise ValueError("term_vectors/singular_values size mismatch")
        self.vocab = vocab
        self.term_vectors = np.ascontiguousarray(term_vectors, dtype=np.float64)
        self.singular_values = np.ascontiguousarray(singular_values, dtype=np.float64)
        self.term_vectors.setflags(write=False)
        self.singular_values.setflags(write=False)
        self.term_stats = term_stats
        self.build_config = dict(build_config)
        self._row_norms = np.linalg.norm(self.term_vectors, axis=1)
        self._row_norms.setflags(write=False)
        self._global_weights = np.array([s.global_weight for s in term_stats])
        self._global_weights.setflags(write=False)
        self._terms = tuple(sorted(vocab, key=vocab.__getitem__))

    @property
    def k(self) -> int:
        return self.term_vectors.shape[1]

    @property
    def terms(self) -> tuple[str, ...]:
        return self._terms

    def __contains__(self, word: str) -> bool:
        return word in self.vocab

    def row(self, word: str) -> int:
        try:
            return self.vocab[word]
        except KeyError:
            raise DataError(f"unknown word: {word!r}") from None

    def global_weight(self, word: str) -> float:
        return float(self._global_weights[self.row(word)])

    def stats(self, word: str) -> TermStats:
        return self.term_stats[self.row(word)]


def _canonical_signs(u: np.ndarray) -> np.ndarray:
    """Flip each left singular vector so its largest-magnitude entry is
    positive; removes the solver's sign ambiguity so builds are repeatable."""
    u = u.copy()
    for j in range(u.shape[1]):
        i = int(np.argmax(np.abs(u[:, j])))
        if u[i, j] < 0:
            u[:, j] = -u[:, j]
    return u


def _svd_top_k(
    weights: sparse.csr_matrix, k: int, seed: int, solver: str
) -> tuple[np.ndarray, np.ndarray]:
    n_terms, n_docs = weights.shape
    small = min(n_terms, n_docs)
    if solver not in ("auto", "dense", "arpack"):
        raise InputError(f"unknown SVD solver {solver!r}")
    if solver == "auto":
        solver = "dense" if (small <= _DENSE_LIMIT or k >= small) else "arpack"
    if solver == "arpack" and k >= small:
        raise InputError(
            f"arpack solver requires k < min(terms, paragraphs) = {small}, got k={k}"
        )
    if solver == "dense":
        u, s, _ = np.linalg.svd(weights.toarray(), full_matrices=False)
        u, s = u[:, :k], s[:k]
    else:
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(small)
        try:
            u, s, _ = svds(weights, k=k, v0=v0, maxiter=_ARPACK_MAXITER, which="LM")
        except ArpackNoConvergence as exc:
            raise ConvergenceError(
                f"truncated SVD did not converge within {_ARPACK_MAXITER} "
                f"iterations ({len(exc.eigenvalues)} of {k} singular values found)"
            ) from exc
        order = np.argsort(s)[::-1]
        u, s = u[:, order], s[order]
    return _canonical_signs(u), s


def truncated_svd(
    weighted: WeightedMatrix,
    k: int,
    seed: int = 0,
    scaling: str = "sigma",
    solver: str = "auto",
    extra_config: dict | None = None,
) -> SemanticSpace:
    """Rank-k SVD of the weighted matrix.

    Deterministic for a fixed seed.  `scaling` chooses between Sigma-scaled
    term vectors (U_k Sigma_k, the default) and raw U_k rows.
    """
    n_terms, n_docs = weighted.weights.shape
    if not 1 <= k <= min(n_terms, n_docs):
        raise InputError(
            f"k={k} out of range 1..min(terms={n_terms}, paragraphs={n_docs})"
        )
    if scaling not in ("sigma", "none"):
        raise InputError(f"unknown scaling {scaling!r} (expected 'sigma' or 'none')")
    u, s = _svd_top_k(weighted.weights, k, seed, solver)
    vectors = u * s if scaling == "sigma" else u
    config = {
        "k": k,
        "seed": seed,
        "scaling": scaling,
        "weighting": "log_entropy",
        "solver": solver,
    }
    if extra_config:
        config.update(extra_config)
    return SemanticSpace(
        vocab=dict(weighted.vocab),
        term_vectors=vectors,
        singular_values=s,
        term_stats=weighted.term_stats,
        build_config=config,
    )


def build_space(
    corpus: Corpus,
    k: int = 300,
    min_count: int = 2,
    seed: int = 0,
    scaling: str = "sigma",
    solver: str = "auto",
    stop_words: Iterable[str] | None = None,
    clamp_k: bool = False,
) -> SemanticSpace:
    """Full pipeline: counts -> log-entropy -> truncated SVD.

    With clamp_k=True an oversized k is silently reduced to
    min(terms, paragraphs); the incremental trace uses this so tiny corpus
    prefixes still build.
    """
    matrix = build_matrix(corpus, min_count=min_count, stop_words=stop_words)
    weighted = log_entropy_weight(matrix)
    if clamp_k:
        k = min(k, *weighted.weights.shape)
    return truncated_svd(
        weighted, k, seed=seed, scaling=scaling, solver=solver,
        extra_config={"min_count": min_count},
    )


def cosine(a: Vector, b: Vector) -> float:
    """Cosine similarity, clipped into [-1, 1].  Near-zero vectors are
    rejected as degenerate."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na < _DEGENERATE_NORM or nb < _DEGENERATE_NORM:
        raise DataError("degenerate vector")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def term_vector(space: SemanticSpace, word: str) -> Vector:
    return space.term_vectors[space.row(word)]


def fold_in(space: SemanticSpace, tokens: Sequence[str]) -> tuple[Vector, float]:
    """Project a token list into the space as a weighted centroid.

    Each in-vocabulary term type contributes log2(tf + 1) * global_weight
    times its vector, mirroring the training cell weighting.  Returns the
    vector and the coverage ratio (share of token occurrences that were in
    vocabulary); raises if nothing projects.
    """
    counts = Counter(tokens)
    vec = np.zeros(space.k)
    known = 0
    for term, count in counts.items():
        row = space.vocab.get(term)
        if row is None:
            continue
        known += count
        weight = np.log2(count + 1.0) * space._global_weights[row]
        vec += weight * space.term_vectors[row]
    if known == 0:
        raise DataError("empty projection")
    return vec, known / len(tokens)


def neighbors(
    space: SemanticSpace,
    probe: str | Vector,
    n: int,
    min_weight: float = 0.0,
    max_weight: float = 1.0,
) -> list[tuple[str, float]]:
    """Top-n terms by cosine with the probe, restricted to terms whose
    global weight lies in [min_weight, max_weight].

    A term probe is excluded from its own neighbor list.  Ties are broken
    lexicographically, so the ranking is deterministic, and the top-n list
    is always a prefix of the top-(n+1) list.
    """
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    if isinstance(probe, str):
        probe_row = space.row(probe)
        v = space.term_vectors[probe_row]
    else:
        probe_row = -1
        v = np.asarray(probe, dtype=np.float64)
    nv = float(np.linalg.norm(v))
    if nv < _DEGENERATE_NORM:
        raise DataError("degenerate vector")
    mask = (
        (space._global_weights >= min_weight)
        & (space._global_weights <= max_weight)
        & (space._row_norms >= _DEGENERATE_NORM)
    )
    if probe_row >= 0:
        mask[probe_row] = False
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        return []
    sims = (space.term_vectors[idx] @ v) / (space._row_norms[idx] * nv)
    sims = np.clip(sims, -1.0, 1.0)
    ranked = sorted(
        ((space._terms[i], float(c)) for i, c in zip(idx, sims)),
        key=lambda tc: (-tc[1], tc[0]),
    )
    return ranked[:n]


_MAGIC = b"SEMSPACE"
_FORMAT_VERSION = 1


def save_space(space: SemanticSpace) -> bytes:
    """Serialize to the versioned binary layout (see README: magic, version,
    JSON header, then little-endian float64/int64 arrays)."""
    header = {
        "k": space.k,
        "n_terms": len(space.vocab),
        "terms": list(space.terms),
        "build_config": space.build_config,
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode(
        "utf-8"
    )
    parts = [
        _MAGIC,
        struct.pack("<I", _FORMAT_VERSION),
        struct.pack("<Q", len(header_bytes)),
        header_bytes,
        np.ascontiguousarray(space.term_vectors, dtype="<f8").tobytes(),
        np.ascontiguousarray(space.singular_values, dtype="<f8").tobytes(),
        np.array([s.global_weight for s in space.term_stats], dtype="<f8").tobytes(),
        np.array([s.tf_total for s in space.term_stats], dtype="<i8").tobytes(),
        np.array([s.df for s in space.term_stats], dtype="<i8").tobytes(),
    ]
    return b"".join(parts)


def load_space(data: bytes) -> SemanticSpace:
    if len(data) < len(_MAGIC) + 12 or data[: len(_MAGIC)] != _MAGIC:
        raise InputError("not a semantic space file (bad magic bytes)")
    off = len(_MAGIC)
    (version,) = struct.unpack_from("<I", data, off)
    off += 4
    if version != _FORMAT_VERSION:
        raise InputError(
            f"unsupported space format version {version} (expected {_FORMAT_VERSION})"
        )
    (header_len,) = struct.unpack_from("<Q", data, off)
    off += 8
    if len(data) < off + header_len:
        raise InputError("truncated space file (incomplete header)")
    try:
        header = json.loads(data[off : off + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InputError(f"corrupt space header: {exc}") from exc
    off += header_len
    k = header["k"]
    n_terms = header["n_terms"]
    terms = header["terms"]
    if len(terms) != n_terms:
        raise InputError("corrupt space header: term count mismatch")

    def take(count: int, dtype: str) -> np.ndarray:
        nonlocal off
        nbytes = count * 8
        if len(data) < off + nbytes:
            raise InputError("truncated space file (incomplete arrays)")
        arr = np.frombuffer(data, dtype=dtype, count=count, offset=off).copy()
        off += nbytes
        return arr

    vectors = take(n_terms * k, "<f8").reshape(n_terms, k)
    singular = take(k, "<f8")
    gw = take(n_terms, "<f8")
    tf = take(n_terms, "<i8")
    df = take(n_terms, "<i8")
    stats = tuple(
        TermStats(term=t, tf_total=int(tf[i]), df=int(df[i]), global_weight=float(gw[i]))
        for i, t in enumerate(terms)
    )
    return SemanticSpace(
        vocab={t: i for i, t in enumerate(terms)},
        term_vectors=vectors,
        singular_values=singular,
        term_stats=stats,
        build_config=header["build_config"],
    )


def save_space_file(space: SemanticSpace, path: str | Path) -> None:
    Path(path).write_bytes(save_space(space))


def load_space_file(path: str | Path) -> SemanticSpace:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read space file {path}: {exc}") from exc
    return load_space(data)
