"""Behavioral-data validation protocols over a semantic space.

Four report-generating evaluations: association norms (tiered cosines and
frequency correlation), similarity judgments, a four-alternative vocabulary
test, and cosine-based recall scoring.  Every evaluation excludes invalid
items loudly: the report lists each exclusion with a machine-readable
reason, and included + excluded always equals the input count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import stats
from .corpusio import tokenize
from .errors import DataError, InputError
from .reporting import dump_json, render_mapping, text_table
from .vecspace import SemanticSpace, cosine, fold_in, term_vector

VOCAB_LABELS = ("correct", "close", "distant", "unrelated")
RECALL_TASKS = ("immediate_recall", "delayed_recall", "summary")


@dataclass(frozen=True)
class AssocNormItem:
    """One stimulus with its ranked association responses.

    Responses are (term, relative frequency) pairs ordered by descending
    frequency; at least six are needed for the top-3/bottom-3 analysis.
    """

    stimulus: str
    responses: tuple[tuple[str, float], ...]

    def __post_init__(self) -> None:
        freqs = [f for _, f in self.responses]
        if any(b > a for a, b in zip(freqs, freqs[1:])):
            raise ValueError(f"{self.stimulus}: response frequencies not descending")
        if any(f < 0 for f in freqs):
            raise ValueError(f"{self.stimulus}: negative response frequency")


@dataclass(frozen=True)
class JudgmentItem:
    story: str
    word_a: str
    word_b: str
    mean_rating_by_grade: tuple[tuple[str, float], ...]  # (grade, rating on 1..5)

    def __post_init__(self) -> None:
        for grade, rating in self.mean_rating_by_grade:
            if not 1.0 <= rating <= 5.0:
                raise ValueError(
                    f"{self.story} {self.word_a}/{self.word_b}: rating {rating} "
                    f"for grade {grade} outside the 5-point scale"
                )

    def rating(self, grade: str) -> float | None:
        for g, r in self.mean_rating_by_grade:
            if g == grade:
                return r
        return None


@dataclass(frozen=True)
class VocabItem:
    word: str
    definitions: tuple[tuple[str, tuple[str, ...]], ...]  # (label, tokens)

    def __post_init__(self) -> None:
        labels = tuple(lbl for lbl, _ in self.definitions)
        if sorted(labels) != sorted(VOCAB_LABELS):
            raise ValueError(
                f"{self.word}: need exactly one definition per label "
                f"{VOCAB_LABELS}, got {labels}"
            )

    def definition(self, label: str) -> tuple[str, ...]:
        for lbl, toks in self.definitions:
            if lbl == label:
                return toks
        raise KeyError(label)


@dataclass(frozen=True)
class RecallRecord:
    text_id: str
    source_tokens: tuple[str, ...]
    protocol_tokens: tuple[str, ...]
    propositions_recalled: int
    task: str

    def __post_init__(self) -> None:
        if self.propositions_recalled < 0:
            raise ValueError("propositions_recalled must be >= 0")
        if self.task not in RECALL_TASKS:
            raise ValueError(f"unknown task {self.task!r} (valid: {RECALL_TASKS})")


@dataclass
class EvalReport:
    protocol: str
    filter_description: str | None
    items: list[dict]
    aggregates: dict
    excluded: list[dict] = field(default_factory=list)

    def to_jsonable(self) -> dict:
        return {
            "protocol": self.protocol,
            "filter": self.filter_description,
            "items": self.items,
            "aggregates": self.aggregates,
            "excluded": self.excluded,
        }

    def to_json(self) -> str:
        return dump_json(self.to_jsonable())

    def to_text(self) -> str:
        lines = [f"protocol: {self.protocol}"]
        if self.filter_description:
            lines.append(f"filter: {self.filter_description}")
        lines.append("")
        lines.append("aggregates:")
        lines.append(render_mapping(self.aggregates))
        if self.items:
            lines.append("")
            lines.append(f"items (n={len(self.items)}):")
            headers = list(self.items[0].keys())
            lines.append(text_table(headers, [[it.get(h) for h in headers] for it in self.items]))
        lines.append("")
        lines.append(f"excluded (n={len(self.excluded)}):")
        for exc in self.excluded:
            lines.append(f"  {exc['key']}: {exc['reason']}")
        return "\n".join(lines) + "\n"


def answer_entropy(item: AssocNormItem) -> float:
    """Shannon entropy (bits) of the normalized observed response
    distribution; mass not covered by the listed responses is treated as
    unobserved and excluded."""
    if not item.responses:
        raise DataError(f"{item.stimulus}: empty response list")
    total = sum(f for _, f in item.responses)
    if total > 1.0 + 1e-9:
        raise InputError(
            f"{item.stimulus}: response frequencies sum to {total:.4f} > 1"
        )
    if total == 0.0:
        raise DataError(f"{item.stimulus}: all response frequencies zero")
    return stats.shannon_entropy([f / total for _, f in item.responses if f > 0])


def _item_cosines(
    space: SemanticSpace, item: AssocNormItem
) -> tuple[list[float], list[float], list[tuple[str, float, float]]]:
    """Cosines for the three top-ranked and the three bottom-ranked
    responses, plus pooled (term, frequency, cosine) rows."""
    sv = term_vector(space, item.stimulus)
    top = item.responses[:3]
    bottom = item.responses[-3:]
    top_cos = [cosine(sv, term_vector(space, t)) for t, _ in top]
    bottom_cos = [cosine(sv, term_vector(space, t)) for t, _ in bottom]
    pooled = [
        (t, f, cosine(sv, term_vector(space, t))) for t, f in (list(top) + list(bottom))
    ]
    return top_cos, bottom_cos, pooled


def assoc_test(
    space: SemanticSpace,
    norms: Sequence[AssocNormItem],
    weight_quantile: float | None = None,
    entropy_quantile: float | None = None,
) -> EvalReport:
    """Association-norm protocol.

    Per item: cosines between the stimulus and the rank-1/2/3 responses and
    the mean cosine over the three lowest-ranked ones.  Aggregates: the four
    tier means, paired t-tests between adjacent tiers, and the Pearson
    correlation between response frequency and cosine pooled over all
    analyzed (stimulus, response) pairs.

    `weight_quantile` restricts the analysis to items whose stimulus global
    weight falls in that lowest quantile (the best-known words);
    `entropy_quantile` restricts to the items with the lowest response
    entropy (the highest-agreement norms).
    """
    if weight_quantile is not None and entropy_quantile is not None:
        raise InputError("choose either the weight filter or the entropy filter")
    excluded: list[dict] = []
    valid: list[tuple[AssocNormItem, list[float], list[float], list]] = []
    for item in norms:
        if len(item.responses) < 6:
            excluded.append(
                {"key": item.stimulus, "reason": "fewer than 6 responses"}
            )
            continue
        if item.stimulus not in space:
            excluded.append(
                {"key": item.stimulus, "reason": "stimulus out of vocabulary"}
            )
            continue
        analyzed_terms = [t for t, _ in item.responses[:3] + item.responses[-3:]]
        missing = [t for t in analyzed_terms if t not in space]
        if missing:
            excluded.append(
                {
                    "key": item.stimulus,
                    "reason": f"response out of vocabulary: {missing[0]}",
                }
            )
            continue
        try:
            top_cos, bottom_cos, pooled = _item_cosines(space, item)
        except DataError as exc:
            excluded.append({"key": item.stimulus, "reason": str(exc)})
            continue
        valid.append((item, top_cos, bottom_cos, pooled))

    filter_desc = None
    if weight_quantile is not None and valid:
        weights = [space.global_weight(it.stimulus) for it, *_ in valid]
        cut = float(np.quantile(weights, weight_quantile))
        kept = []
        for entry, w in zip(valid, weights):
            if w <= cut:
                kept.append(entry)
            else:
                excluded.append(
                    {
                        "key": entry[0].stimulus,
                        "reason": f"filtered: stimulus weight {w:.4f} above "
                        f"{weight_quantile:.0%} quantile {cut:.4f}",
                    }
                )
        valid = kept
        filter_desc = (
            f"stimulus global weight in lowest {weight_quantile:.0%} (<= {cut:.4f})"
        )
    elif entropy_quantile is not None and valid:
        entropies = [answer_entropy(it) for it, *_ in valid]
        cut = float(np.quantile(entropies, entropy_quantile))
        kept = []
        for entry, h in zip(valid, entropies):
            if h <= cut:
                kept.append(entry)
            else:
                excluded.append(
                    {
                        "key": entry[0].stimulus,
                        "reason": f"filtered: response entropy {h:.4f} above "
                        f"{entropy_quantile:.0%} quantile {cut:.4f}",
                    }
                )
        valid = kept
        filter_desc = (
            f"response entropy in lowest {entropy_quantile:.0%} (<= {cut:.4f})"
        )

    if len(valid) < 5:
        raise DataError(
            f"too few valid items for the association test: {len(valid)} "
            f"(need at least 5; {len(excluded)} excluded)"
        )

    items_out = []
    tiers = {"rank1": [], "rank2": [], "rank3": [], "bottom3": []}
    freqs: list[float] = []
    cosines: list[float] = []
    for item, top_cos, bottom_cos, pooled in valid:
        bottom_mean = sum(bottom_cos) / len(bottom_cos)
        tiers["rank1"].append(top_cos[0])
        tiers["rank2"].append(top_cos[1])
        tiers["rank3"].append(top_cos[2])
        tiers["bottom3"].append(bottom_mean)
        for _, f, c in pooled:
            freqs.append(f)
            cosines.append(c)
        items_out.append(
            {
                "stimulus": item.stimulus,
                "cos_rank1": top_cos[0],
                "cos_rank2": top_cos[1],
                "cos_rank3": top_cos[2],
                "cos_bottom3": tuple(bottom_cos),
                "bottom3_mean": bottom_mean,
            }
        )
    tier_means = {k: sum(v) / len(v) for k, v in tiers.items()}
    aggregates = {
        "n_items": len(valid),
        "tier_means": tier_means,
        "t_tests": {
            "rank1_vs_rank2": stats.paired_t_test(tiers["rank1"], tiers["rank2"]).to_jsonable(),
            "rank2_vs_rank3": stats.paired_t_test(tiers["rank2"], tiers["rank3"]).to_jsonable(),
            "rank3_vs_bottom3": stats.paired_t_test(tiers["rank3"], tiers["bottom3"]).to_jsonable(),
        },
        "frequency_cosine_correlation": stats.pearson(freqs, cosines).to_jsonable(),
    }
    return EvalReport(
        protocol="assoc",
        filter_description=filter_desc,
        items=items_out,
        aggregates=aggregates,
        excluded=excluded,
    )


def judgment_test(space: SemanticSpace, items: Sequence[JudgmentItem]) -> EvalReport:
    """Similarity-judgment protocol: per-story and overall Pearson r between
    mean child ratings and cosines, separately per grade.

    Stories keeping fewer than 3 valid pairs are excluded with a note.  The
    report carries both the pooled overall r and the mean of the per-story
    correlations.
    """
    excluded: list[dict] = []
    by_story: dict[str, list[tuple[JudgmentItem, float]]] = {}
    for item in items:
        key = f"{item.story}:{item.word_a}/{item.word_b}"
        missing = [w for w in (item.word_a, item.word_b) if w not in space]
        if missing:
            excluded.append(
                {"key": key, "reason": f"word out of vocabulary: {missing[0]}"}
            )
            continue
        try:
            cos = cosine(
                term_vector(space, item.word_a), term_vector(space, item.word_b)
            )
        except DataError as exc:
            excluded.append({"key": key, "reason": str(exc)})
            continue
        by_story.setdefault(item.story, []).append((item, cos))

    kept: dict[str, list[tuple[JudgmentItem, float]]] = {}
    for story in sorted(by_story):
        pairs = by_story[story]
        if len(pairs) < 3:
            for item, _ in pairs:
                excluded.append(
                    {
                        "key": f"{story}:{item.word_a}/{item.word_b}",
                        "reason": "story has fewer than 3 valid pairs",
                    }
                )
            continue
        kept[story] = pairs

    if not kept:
        raise DataError("no story has enough valid pairs for the judgment test")

    grades = sorted(
        {g for pairs in kept.values() for item, _ in pairs for g, _ in item.mean_rating_by_grade}
    )
    items_out = []
    for story, pairs in kept.items():
        for item, cos in pairs:
            row = {"story": story, "word_a": item.word_a, "word_b": item.word_b, "cosine": cos}
            for g in grades:
                row[f"rating_grade_{g}"] = item.rating(g)
            items_out.append(row)

    per_story: dict[str, dict] = {}
    overall: dict[str, dict] = {}
    for g in grades:
        story_rs = []
        pooled_r: list[float] = []
        pooled_c: list[float] = []
        for story, pairs in kept.items():
            ratings = [item.rating(g) for item, _ in pairs]
            coss = [c for _, c in pairs]
            rows = [(r, c) for r, c in zip(ratings, coss) if r is not None]
            if len(rows) < 3:
                continue
            r = stats.pearson([x for x, _ in rows], [y for _, y in rows])
            per_story.setdefault(story, {})[f"grade_{g}"] = r.to_jsonable()
            story_rs.append(r.r)
            pooled_r.extend(x for x, _ in rows)
            pooled_c.extend(y for _, y in rows)
        overall[f"grade_{g}"] = {
            "pooled": (
                stats.pearson(pooled_r, pooled_c).to_jsonable()
                if len(pooled_r) >= 3
                else None
            ),
            "mean_story_r": sum(story_rs) / len(story_rs) if story_rs else None,
            "n_stories": len(story_rs),
        }
    aggregates = {
        "n_pairs": len(items_out),
        "per_story": per_story,
        "overall": overall,
    }
    return EvalReport(
        protocol="judgment",
        filter_description=None,
        items=items_out,
        aggregates=aggregates,
        excluded=excluded,
    )


def vocab_test(
    space: SemanticSpace,
    items: Sequence[VocabItem],
    weight_cap: float | None = None,
) -> EvalReport:
    """Four-alternative definition choice.

    An item's answer is the definition whose fold-in vector has the highest
    cosine with the word's vector; exact ties fall back to the canonical
    label order, so the choice never depends on presentation order.  With
    `weight_cap`, the analysis is restricted to words the space has seen
    often enough (global weight below the cap).
    """
    excluded: list[dict] = []
    rows = []
    for item in items:
        if item.word not in space:
            excluded.append({"key": item.word, "reason": "word out of vocabulary"})
            continue
        if weight_cap is not None:
            w = space.global_weight(item.word)
            if w >= weight_cap:
                excluded.append(
                    {
                        "key": item.word,
                        "reason": f"filtered: weight {w:.4f} >= cap {weight_cap}",
                    }
                )
                continue
        wv = term_vector(space, item.word)
        scores: dict[str, float] = {}
        bad_reason = None
        for label in VOCAB_LABELS:
            tokens = item.definition(label)
            try:
                dv, _ = fold_in(space, tokens)
                scores[label] = cosine(wv, dv)
            except DataError:
                bad_reason = f"definition {label!r} has no in-vocabulary token"
                break
        if bad_reason:
            excluded.append({"key": item.word, "reason": bad_reason})
            continue
        chosen = max(VOCAB_LABELS, key=lambda lbl: (scores[lbl], -VOCAB_LABELS.index(lbl)))
        row = {"word": item.word, "chosen": chosen}
        for label in VOCAB_LABELS:
            row[f"cos_{label}"] = scores[label]
        rows.append(row)

    if not rows:
        raise DataError(
            f"no valid vocabulary items ({len(excluded)} excluded)"
        )
    n = len(rows)
    percent = {
        label: 100.0 * sum(1 for r in rows if r["chosen"] == label) / n
        for label in VOCAB_LABELS
    }
    aggregates = {
        "n_items": n,
        "percent_chosen": percent,
        "proportion_correct": percent["correct"] / 100.0,
    }
    filter_desc = (
        f"word global weight < {weight_cap}" if weight_cap is not None else None
    )
    return EvalReport(
        protocol="vocab",
        filter_description=filter_desc,
        items=rows,
        aggregates=aggregates,
        excluded=excluded,
    )


def recall_score(space: SemanticSpace, record: RecallRecord) -> float:
    """Cosine between the folded-in source text and the folded-in participant
    production."""
    sv, _ = fold_in(space, record.source_tokens)
    pv, _ = fold_in(space, record.protocol_tokens)
    return cosine(sv, pv)


def recall_correlation(
    space: SemanticSpace, records: Sequence[RecallRecord], min_group: int = 3
) -> EvalReport:
    """Per (text_id, task) group: Pearson r between the cosine recall score
    and the externally scored number of propositions recalled."""
    excluded: list[dict] = []
    groups: dict[tuple[str, str], list[tuple[RecallRecord, float]]] = {}
    for i, rec in enumerate(records):
        key = f"{rec.text_id}/{rec.task}#{i}"
        try:
            score = recall_score(space, rec)
        except DataError as exc:
            excluded.append({"key": key, "reason": str(exc)})
            continue
        groups.setdefault((rec.text_id, rec.task), []).append((rec, score))

    items_out = []
    group_stats = {}
    for (text_id, task) in sorted(groups):
        members = groups[(text_id, task)]
        if len(members) < min_group:
            for i, (rec, _) in enumerate(members):
                excluded.append(
                    {
                        "key": f"{text_id}/{task}#{i}",
                        "reason": f"group has fewer than {min_group} records",
                    }
                )
            continue
        scores = [s for _, s in members]
        recalled = [float(rec.propositions_recalled) for rec, _ in members]
        r = stats.pearson(scores, recalled)
        entry = {"n": r.n, "r": r.r, "p": r.p}
        if r.degenerate:
            entry["note"] = "degenerate variance"
        group_stats[f"{text_id}/{task}"] = entry
        for rec, score in members:
            items_out.append(
                {
                    "text_id": text_id,
                    "task": task,
                    "score": score,
                    "propositions_recalled": rec.propositions_recalled,
                }
            )
    if not group_stats:
        raise DataError("no recall group has enough records")
    return EvalReport(
        protocol="recall",
        filter_description=None,
        items=items_out,
        aggregates={"groups": group_stats, "n_records": len(items_out)},
        excluded=excluded,
    )


# ---------------------------------------------------------------------------
# dataset loaders (TSV formats; see README)


def _read_rows(path: str | Path, n_fields: int, what: str) -> list[list[str]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {what} {path}: {exc}") from exc
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.rstrip("\n").split("\t")
        if len(fields) != n_fields:
            raise InputError(
                f"{what} {path}:{lineno}: expected {n_fields} tab-separated "
                f"fields, got {len(fields)}"
            )
        rows.append([f.strip() for f in fields])
    if not rows:
        raise InputError(f"{what} {path}: no data rows")
    return rows


def load_assoc_norms(path: str | Path) -> list[AssocNormItem]:
    """TSV: stimulus, response, frequency.  Rows are grouped by stimulus and
    sorted by descending frequency within each group (stable)."""
    grouped: dict[str, list[tuple[str, float]]] = {}
    order: list[str] = []
    for stim, resp, freq_s in _read_rows(path, 3, "norms dataset"):
        try:
            freq = float(freq_s)
        except ValueError:
            raise InputError(f"norms dataset {path}: bad frequency {freq_s!r}") from None
        if stim not in grouped:
            grouped[stim] = []
            order.append(stim)
        grouped[stim].append((resp, freq))
    items = []
    for stim in order:
        responses = sorted(grouped[stim], key=lambda rf: -rf[1])
        items.append(AssocNormItem(stimulus=stim, responses=tuple(responses)))
    return items


def load_judgments(path: str | Path) -> list[JudgmentItem]:
    """TSV: story, word_a, word_b, grade, mean_rating."""
    grouped: dict[tuple[str, str, str], list[tuple[str, float]]] = {}
    order: list[tuple[str, str, str]] = []
    for story, wa, wb, grade, rating_s in _read_rows(path, 5, "judgments dataset"):
        try:
            rating = float(rating_s)
        except ValueError:
            raise InputError(
                f"judgments dataset {path}: bad rating {rating_s!r}"
            ) from None
        key = (story, wa, wb)
        if key not in grouped:
            grouped[key] = []
            order.append(key)
        grouped[key].append((grade, rating))
    return [
        JudgmentItem(
            story=story,
            word_a=wa,
            word_b=wb,
            mean_rating_by_grade=tuple(grouped[(story, wa, wb)]),
        )
        for story, wa, wb in order
    ]


def load_vocab_items(path: str | Path) -> list[VocabItem]:
    """TSV: word, label, definition text.  Definitions are tokenized with the
    default policy; each word needs exactly the four labels."""
    grouped: dict[str, list[tuple[str, tuple[str, ...]]]] = {}
    order: list[str] = []
    for word, label, definition in _read_rows(path, 3, "vocabulary dataset"):
        if label not in VOCAB_LABELS:
            raise InputError(
                f"vocabulary dataset {path}: unknown label {label!r} "
                f"(valid: {VOCAB_LABELS})"
            )
        tokens, _ = tokenize(definition)
        if word not in grouped:
            grouped[word] = []
            order.append(word)
        grouped[word].append((label, tuple(tokens)))
    items = []
    for word in order:
        try:
            items.append(VocabItem(word=word, definitions=tuple(grouped[word])))
        except ValueError as exc:
            raise InputError(f"vocabulary dataset {path}: {exc}") from exc
    return items


def load_recall_records(path: str | Path) -> list[RecallRecord]:
    """TSV: text_id, task, propositions_recalled, source_path, protocol_path.

    The source and protocol paths point to plain-text files (tokenized with
    the default policy) and are resolved relative to the dataset file.
    """
    base = Path(path).parent
    records = []
    for text_id, task, count_s, src, proto in _read_rows(path, 5, "recall dataset"):
        try:
            count = int(count_s)
        except ValueError:
            raise InputError(
                f"recall dataset {path}: bad propositions_recalled {count_s!r}"
            ) from None

        def read_tokens(rel: str) -> tuple[str, ...]:
            p = Path(rel)
            if not p.is_absolute():
                p = base / p
            try:
                text = p.read_text(encoding="utf-8")
            except OSError as exc:
                raise InputError(f"cannot read text file {p}: {exc}") from exc
            tokens, _ = tokenize(text)
            return tuple(tokens)

        try:
            records.append(
                RecallRecord(
                    text_id=text_id,
                    task=task,
                    propositions_recalled=count,
                    source_tokens=read_tokens(src),
                    protocol_tokens=read_tokens(proto),
                )
            )
        except ValueError as exc:
            raise InputError(f"recall dataset {path}: {exc}") from exc
    return records
