"""Incremental similarity tracing with gain attribution.

Replays corpus growth one paragraph at a time, rebuilding the semantic space
at each step, and splits every word pair's similarity change into five
paragraph categories: occurrence of one word only (either side), direct
co-occurrence, second-order co-occurrence (at least three bridge word types
in the new paragraph that have each co-occurred with both words so far), and
the third-or-more-order remainder.  The per-category sums telescope: they
add up exactly to final minus initial similarity.

Exact mode rebuilds at every step.  Stride mode rebuilds every s steps and
books the whole stride delta into a separate "mixed" bucket, so the
telescoping identity survives but per-category gains are only collected for
the exact rebuild points; stride results are labeled approximate.
"""
from __future__ import annotations

import itertools
import json
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpusio import Corpus, Paragraph
from .errors import DataError, InputError
from .reporting import dump_json, text_table
from .vecspace import build_space, cosine, term_vector

CHECKPOINT_VERSION = 1
MIXED_BUCKET = "mixed"


class PairCategory(str, Enum):
    X_ONLY = "x_only"
    Y_ONLY = "y_only"
    DIRECT_COOC = "direct_cooc"
    SECOND_ORDER = "second_order"
    THIRD_OR_MORE = "third_or_more"


CATEGORY_ORDER = tuple(c.value for c in PairCategory)


@dataclass(frozen=True)
class WordPair:
    x: str
    y: str

    def __post_init__(self) -> None:
        if self.x == self.y:
            raise ValueError(f"pair words must differ, got {self.x!r} twice")

    @property
    def key(self) -> str:
        return f"{self.x}/{self.y}"


class CoocIndex:
    """Symmetric term -> co-occurring-terms map over the corpus seen so far.

    Two terms co-occur when they appear in the same paragraph at least once;
    a term never co-occurs with itself.  The index only grows.
    """

    def __init__(self, partners: dict[str, set[str]] | None = None):
        self._partners: dict[str, set[str]] = partners or {}

    def update(self, tokens: Iterable[str]) -> None:
        types = sorted(set(tokens))
        for a, b in itertools.combinations(types, 2):
            self._partners.setdefault(a, set()).add(b)
            self._partners.setdefault(b, set()).add(a)

    def partners(self, term: str) -> frozenset[str]:
        return frozenset(self._partners.get(term, ()))

    def __len__(self) -> int:
        return len(self._partners)

    def to_jsonable(self) -> dict[str, list[str]]:
        return {t: sorted(p) for t, p in sorted(self._partners.items())}

    @classmethod
    def from_jsonable(cls, data: Mapping[str, Sequence[str]]) -> "CoocIndex":
        return cls({t: set(p) for t, p in data.items()})


def update_index(index: CoocIndex, paragraph: Paragraph) -> CoocIndex:
    """Add every unordered distinct token pair of the paragraph; idempotent."""
    index.update(paragraph.tokens)
    return index


def classify(pair: WordPair, paragraph: Paragraph, index: CoocIndex) -> PairCategory:
    """Categorize a new paragraph for one pair.

    The index must describe the corpus *before* this paragraph.  Precedence:
    both words present -> direct co-occurrence; one word only -> that side's
    occurrence bucket; otherwise second-order if at least three distinct
    bridge types in the paragraph have already co-occurred with both words,
    else third-or-more.
    """
    types = set(paragraph.tokens)
    has_x = pair.x in types
    has_y = pair.y in types
    if has_x and has_y:
        return PairCategory.DIRECT_COOC
    if has_x:
        return PairCategory.X_ONLY
    if has_y:
        return PairCategory.Y_ONLY
    x_partners = index.partners(pair.x)
    y_partners = index.partners(pair.y)
    bridges = 0
    for w in types:
        if w == pair.x or w == pair.y:
            continue
        if w in x_partners and w in y_partners:
            bridges += 1
            if bridges >= 3:
                return PairCategory.SECOND_ORDER
    return PairCategory.THIRD_OR_MORE


@dataclass
class GainLedger:
    x: str
    y: str
    start: int
    end: int
    mode: str
    initial_similarity: float
    final_similarity: float
    trajectory: list[tuple[int, float]]
    step_categories: list[str]  # one per trajectory point after the first
    gains_by_category: dict[str, float]
    events_by_category: dict[str, int]

    @property
    def total_gain(self) -> float:
        return self.final_similarity - self.initial_similarity

    def telescoping_error(self) -> float:
        return abs(sum(self.gains_by_category.values()) - self.total_gain)

    def to_jsonable(self) -> dict:
        return {
            "x": self.x,
            "y": self.y,
            "start": self.start,
            "end": self.end,
            "mode": self.mode,
            "initial_similarity": self.initial_similarity,
            "final_similarity": self.final_similarity,
            "trajectory": [[t, s] for t, s in self.trajectory],
            "step_categories": self.step_categories,
            "gains_by_category": self.gains_by_category,
            "events_by_category": self.events_by_category,
        }

    @classmethod
    def from_jsonable(cls, data: dict) -> "GainLedger":
        return cls(
            x=data["x"],
            y=data["y"],
            start=data["start"],
            end=data["end"],
            mode=data["mode"],
            initial_similarity=data["initial_similarity"],
            final_similarity=data["final_similarity"],
            trajectory=[(int(t), float(s)) for t, s in data["trajectory"]],
            step_categories=list(data["step_categories"]),
            gains_by_category=dict(data["gains_by_category"]),
            events_by_category=dict(data["events_by_category"]),
        )


def _pair_similarity(space, pair: WordPair) -> float:
    # A weighted-to-zero word has no direction; its similarity is booked as 0
    # so every step still yields a value.
    try:
        return cosine(term_vector(space, pair.x), term_vector(space, pair.y))
    except DataError:
        return 0.0


def _space_prefix(corpus: Corpus, t: int, k: int, seed: int, scaling: str):
    prefix = Corpus(paragraphs=corpus.paragraphs[:t], manifest=corpus.manifest)
    # min_count is forced to 1 so the traced vocabulary grows monotonically
    # and every pair keeps a similarity at every step.
    return build_space(
        prefix, k=k, min_count=1, seed=seed, scaling=scaling, clamp_k=True
    )


def _params_fingerprint(pairs, start, end, k, seed, scaling, mode, stride) -> dict:
    return {
        "pairs": [[p.x, p.y] for p in pairs],
        "start": start,
        "end": end,
        "k": k,
        "seed": seed,
        "scaling": scaling,
        "mode": mode,
        "stride": stride,
    }


def _write_checkpoint(path, fingerprint, t, index, sims, ledgers) -> None:
    payload = {
        "format_version": CHECKPOINT_VERSION,
        "params": fingerprint,
        "t": t,
        "index": index.to_jsonable(),
        "similarities": {key: s for key, s in sims.items()},
        "ledgers": {key: lg.to_jsonable() for key, lg in ledgers.items()},
    }
    tmp = str(path) + ".tmp"
    Path(tmp).write_text(dump_json(payload), encoding="utf-8")
    os.replace(tmp, path)


def _read_checkpoint(path, fingerprint):
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read checkpoint {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"corrupt checkpoint {path}: {exc}") from exc
    if payload.get("format_version") != CHECKPOINT_VERSION:
        raise InputError(
            f"unsupported checkpoint format version {payload.get('format_version')} "
            f"(expected {CHECKPOINT_VERSION})"
        )
    if payload["params"] != fingerprint:
        raise InputError(
            f"checkpoint {path} was written with different trace parameters"
        )
    return payload


def run_trace(
    corpus: Corpus,
    pairs: Sequence[WordPair],
    start: int,
    end: int,
    k: int,
    seed: int = 0,
    scaling: str = "sigma",
    mode: str = "exact",
    stride: int | None = None,
    checkpoint_path: str | Path | None = None,
    checkpoint_every: int = 0,
) -> dict[WordPair, GainLedger]:
    """Trace pair similarities over the growing corpus.

    `start`/`end` are paragraph counts: the first space is built on the
    first `start` paragraphs, the last on the first `end`.  Every pair word
    must occur within the starting window.  In exact mode each step t
    classifies paragraph t against the pre-step co-occurrence index and adds
    (sim_t - sim_{t-1}) to that category's bucket.
    """
    if mode not in ("exact", "stride"):
        raise InputError(f"unknown trace mode {mode!r}")
    if mode == "stride":
        if stride is None or stride < 1:
            raise InputError("stride mode needs a stride >= 1")
    else:
        stride = 1
    if not pairs:
        raise InputError("no pairs to trace")
    if start < 2:
        raise InputError(f"start must be >= 2, got {start}")
    if not start < end <= len(corpus):
        raise InputError(
            f"window [{start}, {end}] out of range for a corpus of {len(corpus)} paragraphs"
        )
    seen = set()
    for p in corpus.paragraphs[:start]:
        seen.update(p.tokens)
    for pair in pairs:
        for w in (pair.x, pair.y):
            if w not in seen:
                raise DataError(
                    f"pair word {w!r} does not occur in the first {start} paragraphs"
                )

    fingerprint = _params_fingerprint(pairs, start, end, k, seed, scaling, mode, stride)
    rebuilds = set(range(start + stride, end + 1, stride))
    rebuilds.add(end)

    resume = None
    if checkpoint_path is not None and Path(checkpoint_path).exists():
        resume = _read_checkpoint(checkpoint_path, fingerprint)

    if resume is None:
        index = CoocIndex()
        for p in corpus.paragraphs[:start]:
            update_index(index, p)
        space = _space_prefix(corpus, start, k, seed, scaling)
        sims = {pair.key: _pair_similarity(space, pair) for pair in pairs}
        ledgers = {
            pair.key: GainLedger(
                x=pair.x,
                y=pair.y,
                start=start,
                end=end,
                mode=mode if mode == "exact" else f"stride:{stride}",
                initial_similarity=sims[pair.key],
                final_similarity=sims[pair.key],
                trajectory=[(start, sims[pair.key])],
                step_categories=[],
                gains_by_category={c: 0.0 for c in CATEGORY_ORDER},
                events_by_category={c: 0 for c in CATEGORY_ORDER},
            )
            for pair in pairs
        }
        if mode == "stride":
            for lg in ledgers.values():
                lg.gains_by_category[MIXED_BUCKET] = 0.0
        done_until = start
    else:
        index = CoocIndex.from_jsonable(resume["index"])
        sims = dict(resume["similarities"])
        ledgers = {
            key: GainLedger.from_jsonable(lg) for key, lg in resume["ledgers"].items()
        }
        done_until = resume["t"]

    pending: dict[str, PairCategory | None] = {}
    steps_since_checkpoint = 0
    for t in range(done_until + 1, end + 1):
        paragraph = corpus.paragraphs[t - 1]
        # classify against the index as it stood before this paragraph
        for pair in pairs:
            cat = classify(pair, paragraph, index)
            ledgers[pair.key].events_by_category[cat.value] += 1
            pending[pair.key] = cat
        update_index(index, paragraph)

        if t in rebuilds or t == end:
            space = _space_prefix(corpus, t, k, seed, scaling)
            for pair in pairs:
                lg = ledgers[pair.key]
                sim = _pair_similarity(space, pair)
                gain = sim - sims[pair.key]
                if mode == "exact":
                    lg.gains_by_category[pending[pair.key].value] += gain
                    lg.step_categories.append(pending[pair.key].value)
                else:
                    lg.gains_by_category[MIXED_BUCKET] += gain
                    lg.step_categories.append(MIXED_BUCKET)
                lg.trajectory.append((t, sim))
                lg.final_similarity = sim
                sims[pair.key] = sim

        steps_since_checkpoint += 1
        if (
            checkpoint_path is not None
            and checkpoint_every > 0
            and steps_since_checkpoint >= checkpoint_every
        ):
            _write_checkpoint(checkpoint_path, fingerprint, t, index, sims, ledgers)
            steps_since_checkpoint = 0

    if checkpoint_path is not None:
        _write_checkpoint(checkpoint_path, fingerprint, end, index, sims, ledgers)
    return {pair: ledgers[pair.key] for pair in pairs}


@dataclass
class TraceReport:
    rows: list[dict]
    category_means: dict[str, float]
    zero_direct_pairs: int
    approximate: bool
    telescoping_max_error: float

    def to_jsonable(self) -> dict:
        return {
            "pairs": self.rows,
            "category_means": self.category_means,
            "zero_direct_pairs": self.zero_direct_pairs,
            "approximate": self.approximate,
            "telescoping_max_error": self.telescoping_max_error,
        }

    def to_json(self) -> str:
        return dump_json(self.to_jsonable())

    def to_text(self) -> str:
        buckets = list(self.rows[0]["gains"].keys()) if self.rows else []
        headers = ["pair", "initial", "final", "total_gain"] + buckets + ["events_direct"]
        table_rows = []
        for row in self.rows:
            table_rows.append(
                [row["pair"], row["initial"], row["final"], row["total_gain"]]
                + [row["gains"][b] for b in buckets]
                + [row["events"]["direct_cooc"]]
            )
        lines = [text_table(headers, table_rows), ""]
        lines.append("category means over pairs:")
        for cat, mean in self.category_means.items():
            lines.append(f"  {cat}: {mean:.6f}")
        lines.append(f"pairs with zero direct co-occurrences: {self.zero_direct_pairs}")
        lines.append(f"approximate (stride) mode: {self.approximate}")
        lines.append(
            f"telescoping max |sum(gains) - (final - initial)|: "
            f"{self.telescoping_max_error:.3e}"
        )
        return "\n".join(lines) + "\n"


def trace_report(ledgers: Mapping[WordPair, GainLedger] | Sequence[GainLedger]) -> TraceReport:
    """Summarize ledgers: per-pair decomposition, across-pair category means,
    and the count of pairs whose words never directly co-occurred."""
    if isinstance(ledgers, Mapping):
        ledger_list = list(ledgers.values())
    else:
        ledger_list = list(ledgers)
    if not ledger_list:
        raise InputError("no ledgers to report")
    buckets: list[str] = list(CATEGORY_ORDER)
    if any(MIXED_BUCKET in lg.gains_by_category for lg in ledger_list):
        buckets.append(MIXED_BUCKET)
    rows = []
    for lg in ledger_list:
        rows.append(
            {
                "pair": f"{lg.x}/{lg.y}",
                "initial": lg.initial_similarity,
                "final": lg.final_similarity,
                "total_gain": lg.total_gain,
                "gains": {b: lg.gains_by_category.get(b, 0.0) for b in buckets},
                "events": dict(lg.events_by_category),
            }
        )
    means = {
        b: sum(lg.gains_by_category.get(b, 0.0) for lg in ledger_list) / len(ledger_list)
        for b in buckets
    }
    zero_direct = sum(
        1 for lg in ledger_list if lg.events_by_category.get("direct_cooc", 0) == 0
    )
    return TraceReport(
        rows=rows,
        category_means=means,
        zero_direct_pairs=zero_direct,
        approximate=any(lg.mode != "exact" for lg in ledger_list),
        telescoping_max_error=max(lg.telescoping_error() for lg in ledger_list),
    )


def trajectory_tsv(ledgers: Mapping[WordPair, GainLedger] | Sequence[GainLedger]) -> str:
    """`step<TAB>pair<TAB>similarity<TAB>category` rows for plotting; the
    first point of each pair has no category."""
    if isinstance(ledgers, Mapping):
        ledger_list = list(ledgers.values())
    else:
        ledger_list = list(ledgers)
    lines = ["step\tpair\tsimilarity\tcategory"]
    for lg in ledger_list:
        pair = f"{lg.x}/{lg.y}"
        for i, (t, sim) in enumerate(lg.trajectory):
            cat = "" if i == 0 else lg.step_categories[i - 1]
            lines.append(f"{t}\t{pair}\t{sim!r}\t{cat}")
    return "\n".join(lines) + "\n"
