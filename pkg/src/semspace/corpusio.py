"""Corpus ingestion: tokenization, lemmatization, readability scoring and
level-wise stratification.

A corpus is an ordered list of paragraphs, each carrying a source category,
a cumulative age level (1..4) and, once scored, a readability value.  The
exposure order of the paragraphs is significant: it is the order in which a
growing semantic space "reads" them.
"""
from __future__ import annotations

import dataclasses
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

from .errors import InputError

AGE_LEVELS = (1, 2, 3, 4)  # 1 = 4-7y, 2 = 7-11y, 3 = 11-18y, 4 = adult


class SourceCategory(str, Enum):
    STORIES = "stories"
    CHILD_PRODUCTIONS = "child_productions"
    TEXTBOOKS = "textbooks"
    ENCYCLOPEDIA = "encyclopedia"
    DICTIONARY = "dictionary"
    NEWS = "news"


class LemmaMode(str, Enum):
    NONE = "none"
    VERBS_ONLY = "verbs_only"
    ALL = "all"


@dataclass(frozen=True)
class TokenizePolicy:
    """Controls how intra-word punctuation is treated.

    French corpora need apostrophes (elisions: l'eau) and hyphens
    (peut-etre) inside words.  `split_elisions` splits every intra-word
    apostrophe so that "l'eau" becomes ["l'", "eau"]; the default keeps the
    word whole.  The active policy is recorded in every run manifest.
    """

    keep_apostrophes: bool = True
    keep_hyphens: bool = True
    split_elisions: bool = False


@dataclass(frozen=True)
class Paragraph:
    id: str
    tokens: tuple[str, ...]
    sentence_lengths: tuple[int, ...]
    category: SourceCategory
    level: int
    readability: float | None = None

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ValueError(f"paragraph {self.id}: empty token list")
        if sum(self.sentence_lengths) != len(self.tokens):
            raise ValueError(
                f"paragraph {self.id}: sentence_lengths sum "
                f"{sum(self.sentence_lengths)} != token count {len(self.tokens)}"
            )
        if self.level not in AGE_LEVELS:
            raise ValueError(f"paragraph {self.id}: level {self.level} not in 1..4")
        if self.readability is not None and self.readability < 0:
            raise ValueError(f"paragraph {self.id}: negative readability")


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    category: SourceCategory
    level: int


@dataclass(frozen=True)
class Corpus:
    paragraphs: tuple[Paragraph, ...]
    manifest: tuple[ManifestEntry, ...] = ()

    def __post_init__(self) -> None:
        ids = [p.id for p in self.paragraphs]
        if len(set(ids)) != len(ids):
            dup = next(i for i, c in Counter(ids).items() if c > 1)
            raise ValueError(f"duplicate paragraph id: {dup}")

    def __len__(self) -> int:
        return len(self.paragraphs)


@dataclass(frozen=True)
class LemmaMap:
    """token -> (lemma, part-of-speech tag).  A tag starting with 'v' or 'V'
    marks a verb."""

    entries: dict[str, tuple[str, str]]

    @classmethod
    def from_tsv(cls, path: str | Path) -> "LemmaMap":
        entries: dict[str, tuple[str, str]] = {}
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read lemma map {path}: {exc}") from exc
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 3:
                raise InputError(
                    f"lemma map {path}:{lineno}: expected 3 tab-separated fields "
                    f"(token, lemma, pos), got {len(fields)}"
                )
            token, lemma, pos = (f.strip() for f in fields)
            if not lemma:
                raise InputError(f"lemma map {path}:{lineno}: empty lemma")
            entries[_normalize(token)] = (_normalize(lemma), pos)
        return cls(entries)

    def is_verb(self, token: str) -> bool:
        entry = self.entries.get(token)
        return entry is not None and entry[1][:1].casefold() == "v"


class CommonWordList:
    """The 'easy' reference word list used by the readability measure.

    Membership is exact string match after NFC normalization and case
    folding, applied both when loading and when testing.
    """

    def __init__(self, words: Iterable[str]):
        self._words = frozenset(_normalize(w) for w in words)

    @classmethod
    def from_file(cls, path: str | Path) -> "CommonWordList":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read word list {path}: {exc}") from exc
        return cls(w for w in text.splitlines() if w.strip())

    def __contains__(self, word: str) -> bool:
        return _normalize(word) in self._words

    def __len__(self) -> int:
        return len(self._words)


_SENTENCE_SPLIT = re.compile(r"[.!?]+")


def _normalize(text: str) -> str:
    return unicodedata.normalize("NFC", text).replace("’", "'").casefold()


@lru_cache(maxsize=None)
def _token_pattern(keep_apostrophes: bool, keep_hyphens: bool) -> re.Pattern[str]:
    core = r"[^\W_]+"  # unicode letters and digits, no underscore
    joiners = ("'" if keep_apostrophes else "") + ("\\-" if keep_hyphens else "")
    if joiners:
        return re.compile(f"{core}(?:[{joiners}]{core})*")
    return re.compile(core)


def _split_elisions(token: str) -> list[str]:
    if "'" not in token:
        return [token]
    parts = token.split("'")
    out = [p + "'" for p in parts[:-1] if p]
    if parts[-1]:
        out.append(parts[-1])
    return out


def tokenize(
    text: str, policy: TokenizePolicy = TokenizePolicy()
) -> tuple[list[str], list[int]]:
    """Split raw text into lowercase tokens plus per-sentence word counts.

    Sentences are cut on runs of terminal punctuation (. ! ?); this is
    deliberately naive (no abbreviation handling).  Digits are kept as
    tokens.  Empty output is allowed; the caller decides what to do.
    """
    normalized = _normalize(text)
    pattern = _token_pattern(policy.keep_apostrophes, policy.keep_hyphens)
    tokens: list[str] = []
    lengths: list[int] = []
    for chunk in _SENTENCE_SPLIT.split(normalized):
        words = pattern.findall(chunk)
        if policy.split_elisions:
            words = [w for tok in words for w in _split_elisions(tok)]
        if words:
            tokens.extend(words)
            lengths.append(len(words))
    return tokens, lengths


def lemmatize(
    tokens: Sequence[str], lemma_map: LemmaMap, mode: LemmaMode | str
) -> list[str]:
    """Replace tokens by their lemmas.

    `verbs_only` replaces only tokens whose map entry carries a verb tag;
    noun and adjective forms pass through unchanged (different forms of a
    noun are treated as carrying different meanings).  Unmapped tokens
    always pass through.
    """
    mode = LemmaMode(mode)
    if mode is LemmaMode.NONE:
        return list(tokens)
    out = []
    for tok in tokens:
        entry = lemma_map.entries.get(tok)
        if entry is None:
            out.append(tok)
        elif mode is LemmaMode.ALL or entry[1][:1].casefold() == "v":
            out.append(entry[0])
        else:
            out.append(tok)
    return out


def lemmatize_corpus(
    corpus: Corpus, lemma_map: LemmaMap, mode: LemmaMode | str
) -> Corpus:
    """Apply `lemmatize` to every paragraph, preserving ids, order and any
    readability already computed on the surface forms."""
    mode = LemmaMode(mode)
    if mode is LemmaMode.NONE:
        return corpus
    paragraphs = tuple(
        dataclasses.replace(p, tokens=tuple(lemmatize(p.tokens, lemma_map, mode)))
        for p in corpus.paragraphs
    )
    return Corpus(paragraphs=paragraphs, manifest=corpus.manifest)


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    """Parse a manifest of TSV lines `path<TAB>category<TAB>level`.

    Relative source paths are resolved against the manifest's directory.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read manifest {path}: {exc}") from exc
    entries = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.rstrip("\n").split("\t")
        if len(fields) != 3:
            raise InputError(
                f"manifest {path}:{lineno}: expected 3 tab-separated fields "
                f"(path, category, level), got {len(fields)}"
            )
        src, cat_name, level_s = (f.strip() for f in fields)
        try:
            category = SourceCategory(cat_name)
        except ValueError:
            valid = ", ".join(c.value for c in SourceCategory)
            raise InputError(
                f"manifest {path}:{lineno}: unknown category {cat_name!r} "
                f"(valid: {valid})"
            ) from None
        try:
            level = int(level_s)
        except ValueError:
            raise InputError(
                f"manifest {path}:{lineno}: level must be an integer, got {level_s!r}"
            ) from None
        if level not in AGE_LEVELS:
            raise InputError(f"manifest {path}:{lineno}: level {level} not in 1..4")
        src_path = Path(src)
        if not src_path.is_absolute():
            src_path = path.parent / src_path
        entries.append(ManifestEntry(str(src_path), category, level))
    if not entries:
        raise InputError(f"manifest {path}: no source entries")
    return entries


def ingest(
    manifest: str | Path | Sequence[ManifestEntry],
    policy: TokenizePolicy = TokenizePolicy(),
) -> Corpus:
    """Read every declared source and split it into paragraphs.

    A paragraph is a blank-line-separated block.  Blocks that tokenize to
    nothing (punctuation-only) are dropped; a source yielding no paragraphs
    is an error.  Exposure order follows manifest order; paragraph ids are
    `<source index>.<paragraph index>`.
    """
    if isinstance(manifest, (str, Path)):
        entries = read_manifest(manifest)
    else:
        entries = list(manifest)
    paragraphs: list[Paragraph] = []
    for src_idx, entry in enumerate(entries):
        try:
            text = Path(entry.path).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read source file {entry.path}: {exc}") from exc
        para_idx = 0
        for block in re.split(r"\n\s*\n", text):
            tokens, lengths = tokenize(block, policy)
            if not tokens:
                continue
            paragraphs.append(
                Paragraph(
                    id=f"{src_idx}.{para_idx}",
                    tokens=tuple(tokens),
                    sentence_lengths=tuple(lengths),
                    category=entry.category,
                    level=entry.level,
                )
            )
            para_idx += 1
        if para_idx == 0:
            raise InputError(f"empty source: {entry.path}")
    return Corpus(paragraphs=tuple(paragraphs), manifest=tuple(entries))


def readability(paragraph: Paragraph, word_list: CommonWordList) -> float:
    """Readability = 3/4 percentage of difficult words + 1/4 mean sentence
    length (in words).

    The difficult-word share is on a 0-100 scale.  A difficult word is any
    token absent from the common-word list; proper nouns and digit tokens
    count as difficult unless listed.
    """
    difficult = sum(1 for t in paragraph.tokens if t not in word_list)
    pct_difficult = 100.0 * difficult / len(paragraph.tokens)
    mean_sentence_len = sum(paragraph.sentence_lengths) / len(
        paragraph.sentence_lengths
    )
    return 0.75 * pct_difficult + 0.25 * mean_sentence_len


def stratify(corpus: Corpus, word_list: CommonWordList) -> Corpus:
    """Score every paragraph and reorder: ascending age level, then
    ascending readability within each level.  The sort is stable, so equal
    scores keep their original relative order."""
    scored = [
        dataclasses.replace(p, readability=readability(p, word_list))
        for p in corpus.paragraphs
    ]
    scored.sort(key=lambda p: (p.level, p.readability))
    return Corpus(paragraphs=tuple(scored), manifest=corpus.manifest)


@dataclass(frozen=True)
class CorpusStats:
    token_count: int
    paragraph_count: int
    words_by_category: dict[str, int]
    mean_readability_by_level: dict[int, float]
    readability_monotone: bool | None  # None when fewer than 2 levels scored

    def to_jsonable(self) -> dict:
        return {
            "token_count": self.token_count,
            "paragraph_count": self.paragraph_count,
            "words_by_category": dict(sorted(self.words_by_category.items())),
            "mean_readability_by_level": {
                str(k): v for k, v in sorted(self.mean_readability_by_level.items())
            },
            "readability_monotone": self.readability_monotone,
        }


def corpus_stats(corpus: Corpus) -> CorpusStats:
    """Exact token/paragraph totals, per-category word totals and per-level
    mean readability, plus a flag telling whether level means strictly
    increase with the level (computed over levels with scored paragraphs)."""
    words_by_category: Counter[str] = Counter()
    by_level: dict[int, list[float]] = {}
    token_count = 0
    for p in corpus.paragraphs:
        token_count += len(p.tokens)
        words_by_category[p.category.value] += len(p.tokens)
        if p.readability is not None:
            by_level.setdefault(p.level, []).append(p.readability)
    means = {lvl: sum(v) / len(v) for lvl, v in sorted(by_level.items())}
    monotone: bool | None = None
    if len(means) >= 2:
        vals = [means[lvl] for lvl in sorted(means)]
        monotone = all(b > a for a, b in zip(vals, vals[1:]))
    return CorpusStats(
        token_count=token_count,
        paragraph_count=len(corpus.paragraphs),
        words_by_category=dict(words_by_category),
        mean_readability_by_level=means,
        readability_monotone=monotone,
    )


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write line-delimited records: id, level, category, readability,
    space-joined tokens.  Sentence boundaries are not representable in this
    format; a reloaded corpus treats each paragraph as one sentence."""
    lines = []
    for p in corpus.paragraphs:
        score = "-" if p.readability is None else repr(p.readability)
        lines.append(
            "\t".join([p.id, str(p.level), p.category.value, score, " ".join(p.tokens)])
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_corpus(path: str | Path) -> Corpus:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read corpus {path}: {exc}") from exc
    paragraphs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 5:
            raise InputError(
                f"corpus {path}:{lineno}: expected 5 tab-separated fields, "
                f"got {len(fields)}"
            )
        pid, level_s, cat_name, score_s, token_s = fields
        tokens = tuple(token_s.split())
        if not tokens:
            raise InputError(f"corpus {path}:{lineno}: empty token list")
        try:
            paragraphs.append(
                Paragraph(
                    id=pid,
                    tokens=tokens,
                    sentence_lengths=(len(tokens),),
                    category=SourceCategory(cat_name),
                    level=int(level_s),
                    readability=None if score_s == "-" else float(score_s),
                )
            )
        except (ValueError, KeyError) as exc:
            raise InputError(f"corpus {path}:{lineno}: {exc}") from exc
    if not paragraphs:
        raise InputError(f"corpus {path}: no paragraphs")
    return Corpus(paragraphs=tuple(paragraphs))
