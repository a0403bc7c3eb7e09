"""Construction-integration comprehension simulator.

Each input proposition drives one cycle: recall similar items from the
episodic store, retrieve semantic associates (predication-filtered for the
predicate), assemble a node network with cosine link weights, settle
activations by spreading, select working memory, and update the episodic
store with decay and reinforcement.  The semantic space is consulted in
exactly three roles per cycle: associate retrieval, link weighting, and
episodic recall gating.

The spreading rule is power iteration with max-normalization: negative
cosines are floored to zero, the current text proposition is clamped to
activation 1 each iteration, and iteration stops when the largest activation
change falls below epsilon.  Decay is exponential per cycle; reinforcement
adds the working-memory activation (scaled by a gain) and caps at 1.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import DataError, InputError
from .reporting import dump_json
from .vecspace import SemanticSpace, Vector, fold_in, neighbors, term_vector

_DEGENERATE_NORM = 1e-12

ORIGIN_TEXT = "text"
ORIGIN_ASSOCIATE = "associate"
ORIGIN_CARRIED = "carried_over"
ORIGIN_RECALL = "episodic_recall"


@dataclass(frozen=True)
class Proposition:
    predicate: str
    args: tuple[str, ...] = ()
    source_index: int = 0

    def __post_init__(self) -> None:
        if not self.predicate:
            raise ValueError("empty predicate")

    @property
    def key(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(self.args)})"

    @property
    def tokens(self) -> tuple[str, ...]:
        return (self.predicate, *self.args)


_IDENT_CHARS = "abcdefghijklmnopqrstuvwxyz0123456789_-'"


def _scan_identifier(line: str, pos: int, lineno: int) -> tuple[str, int]:
    start = pos
    while pos < len(line) and line[pos].casefold() in _IDENT_CHARS:
        pos += 1
    if pos == start:
        raise InputError(
            f"proposition syntax error at line {lineno}, column {start + 1}: "
            f"expected identifier"
        )
    return line[start:pos].casefold(), pos


def _skip_ws(line: str, pos: int) -> int:
    while pos < len(line) and line[pos] in " \t":
        pos += 1
    return pos


def parse_propositions(text: str) -> list[Proposition]:
    """Parse the proposition micro-format, one per line:
    `predicate(arg1,arg2,...)` or a bare `predicate`.  Case-folded;
    whitespace-tolerant; blank lines and #-comments are skipped."""
    props: list[Proposition] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip()
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        pos = _skip_ws(line, 0)
        predicate, pos = _scan_identifier(line, pos, lineno)
        pos = _skip_ws(line, pos)
        args: list[str] = []
        if pos < len(line) and line[pos] == "(":
            pos = _skip_ws(line, pos + 1)
            while True:
                arg, pos = _scan_identifier(line, pos, lineno)
                args.append(arg)
                pos = _skip_ws(line, pos)
                if pos >= len(line):
                    raise InputError(
                        f"proposition syntax error at line {lineno}, column "
                        f"{pos + 1}: unclosed argument list"
                    )
                if line[pos] == ",":
                    pos = _skip_ws(line, pos + 1)
                    continue
                if line[pos] == ")":
                    pos += 1
                    break
                raise InputError(
                    f"proposition syntax error at line {lineno}, column {pos + 1}: "
                    f"expected ',' or ')'"
                )
        pos = _skip_ws(line, pos)
        if pos != len(line):
            raise InputError(
                f"proposition syntax error at line {lineno}, column {pos + 1}: "
                f"unexpected trailing characters"
            )
        props.append(
            Proposition(predicate=predicate, args=tuple(args), source_index=len(props))
        )
    return props


@dataclass(frozen=True)
class FixedCount:
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"fixed_count needs n >= 1, got {self.n}")

    def describe(self) -> str:
        return f"fixed_count({self.n})"


@dataclass(frozen=True)
class ActivationBudget:
    total: float
    proportional: bool = False  # rescale instead of greedy prefix selection

    def __post_init__(self) -> None:
        if self.total <= 0:
            raise ValueError(f"activation_budget needs total > 0, got {self.total}")

    def describe(self) -> str:
        mode = "proportional" if self.proportional else "greedy"
        return f"activation_budget({self.total}, {mode})"


@dataclass(frozen=True)
class Threshold:
    theta: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"threshold needs 0 <= theta <= 1, got {self.theta}")

    def describe(self) -> str:
        return f"threshold({self.theta})"


WMStrategy = Union[FixedCount, ActivationBudget, Threshold]


def parse_wm_strategy(spec: str) -> WMStrategy:
    """Parse `fixed:N`, `budget:T[:proportional]` or `threshold:THETA`."""
    parts = spec.split(":")
    try:
        if parts[0] == "fixed" and len(parts) == 2:
            return FixedCount(int(parts[1]))
        if parts[0] == "budget" and len(parts) in (2, 3):
            proportional = len(parts) == 3 and parts[2] == "proportional"
            if len(parts) == 3 and not proportional:
                raise ValueError(f"unknown budget variant {parts[2]!r}")
            return ActivationBudget(float(parts[1]), proportional=proportional)
        if parts[0] == "threshold" and len(parts) == 2:
            return Threshold(float(parts[1]))
    except ValueError as exc:
        raise InputError(f"bad working-memory strategy {spec!r}: {exc}") from exc
    raise InputError(
        f"bad working-memory strategy {spec!r} (expected fixed:N, "
        f"budget:T[:proportional] or threshold:THETA)"
    )


@dataclass(frozen=True)
class CIParams:
    n_associates: int = 3
    predication_threshold: float = 0.2
    min_weight: float = 0.0
    max_weight: float = 1.0
    wm_strategy: WMStrategy = FixedCount(7)
    decay_rate: float = 0.8
    reinforcement_gain: float = 1.0
    recall_threshold: float = 0.3
    recall_floor: float = 0.1
    epsilon: float = 1e-4
    max_iterations: int = 100
    predication_pool: int = 20  # predicate neighbor pool before filtering

    def __post_init__(self) -> None:
        if self.n_associates < 1:
            raise ValueError("n_associates must be >= 1")
        if not 0.0 < self.decay_rate < 1.0:
            raise ValueError("decay_rate must be in (0, 1)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.min_weight > self.max_weight:
            raise ValueError("min_weight must not exceed max_weight")
        if self.reinforcement_gain < 0:
            raise ValueError("reinforcement_gain must be >= 0")
        if self.recall_floor < 0 or self.recall_threshold < -1:
            raise ValueError("recall parameters out of range")
        if self.predication_pool < self.n_associates:
            raise ValueError("predication_pool must be >= n_associates")

    def to_jsonable(self) -> dict:
        d = dataclasses.asdict(self)
        d["wm_strategy"] = self.wm_strategy.describe()
        return d


@dataclass
class NetworkNode:
    key: str  # term string, or the proposition's textual form
    kind: str  # "term" | "proposition"
    vector: Vector
    origin: str

    def with_origin(self, origin: str) -> "NetworkNode":
        return NetworkNode(key=self.key, kind=self.kind, vector=self.vector, origin=origin)


@dataclass
class Associates:
    predicate: list[tuple[str, float]]
    by_arg: dict[str, list[tuple[str, float]]]
    skipped: list[tuple[str, str]]  # (slot term, reason)

    def to_jsonable(self) -> dict:
        return {
            "predicate": [[t, c] for t, c in self.predicate],
            "by_arg": {a: [[t, c] for t, c in lst] for a, lst in self.by_arg.items()},
            "skipped": [[t, r] for t, r in self.skipped],
        }


def _slot_reason(space: SemanticSpace, term: str, params: CIParams) -> str | None:
    """None when the term may act as a network/retrieval slot; otherwise the
    reason it is skipped."""
    if term not in space:
        return "unknown term"
    g = space.global_weight(term)
    if not params.min_weight <= g <= params.max_weight:
        return (
            f"global weight {g:.3f} outside band "
            f"[{params.min_weight}, {params.max_weight}]"
        )
    if float(np.linalg.norm(term_vector(space, term))) < _DEGENERATE_NORM:
        return "degenerate vector"
    return None


def retrieve_associates(
    space: SemanticSpace, prop: Proposition, params: CIParams
) -> Associates:
    """Associates for each argument are its nearest in-band neighbors.
    Predicate associates additionally pass the predication filter: a
    candidate must reach the predication threshold against at least one
    eligible argument.  Terms outside the weight band (too frequent or too
    rare for the space to know well) are skipped entirely."""
    skipped: list[tuple[str, str]] = []
    eligible_args: list[str] = []
    by_arg: dict[str, list[tuple[str, float]]] = {}
    for arg in prop.args:
        if arg in by_arg:
            continue
        reason = _slot_reason(space, arg, params)
        if reason is not None:
            skipped.append((arg, reason))
            continue
        eligible_args.append(arg)
        by_arg[arg] = neighbors(
            space, arg, params.n_associates,
            min_weight=params.min_weight, max_weight=params.max_weight,
        )

    predicate_assoc: list[tuple[str, float]] = []
    pred_reason = _slot_reason(space, prop.predicate, params)
    if pred_reason is not None:
        skipped.append((prop.predicate, pred_reason))
    else:
        pool = neighbors(
            space, prop.predicate, params.predication_pool,
            min_weight=params.min_weight, max_weight=params.max_weight,
        )
        if eligible_args:
            arg_vectors = [term_vector(space, a) for a in eligible_args]
            arg_norms = [float(np.linalg.norm(v)) for v in arg_vectors]
            for cand, cos_pred in pool:
                cv = term_vector(space, cand)
                cn = float(np.linalg.norm(cv))
                close = any(
                    float(np.dot(cv, av)) / (cn * an) >= params.predication_threshold
                    for av, an in zip(arg_vectors, arg_norms)
                )
                if close:
                    predicate_assoc.append((cand, cos_pred))
                    if len(predicate_assoc) >= params.n_associates:
                        break
        else:
            # no argument to predicate against: plain nearest neighbors
            predicate_assoc = pool[: params.n_associates]
    return Associates(predicate=predicate_assoc, by_arg=by_arg, skipped=skipped)


def build_network(
    nodes: Sequence[NetworkNode],
) -> tuple[list[NetworkNode], np.ndarray, list[tuple[str, str]]]:
    """Symmetric nonnegative link matrix over the nodes: weight(i, j) is the
    cosine of the node vectors floored at 0, diagonal 0.  Nodes with a
    degenerate vector are dropped and reported."""
    if not nodes:
        raise InputError("cannot build a network without nodes")
    kept: list[NetworkNode] = []
    dropped: list[tuple[str, str]] = []
    for node in nodes:
        if float(np.linalg.norm(node.vector)) < _DEGENERATE_NORM:
            dropped.append((node.key, "degenerate vector"))
        else:
            kept.append(node)
    if not kept:
        return [], np.zeros((0, 0)), dropped
    vectors = np.stack([n.vector for n in kept])
    norms = np.linalg.norm(vectors, axis=1)
    unit = vectors / norms[:, None]
    weights = np.clip(unit @ unit.T, 0.0, 1.0)
    np.fill_diagonal(weights, 0.0)
    weights = (weights + weights.T) / 2.0
    return kept, weights, dropped


@dataclass
class IntegrationResult:
    activations: np.ndarray
    iterations: int
    converged: bool


def integrate(
    weights: np.ndarray,
    initial: np.ndarray,
    epsilon: float,
    max_iterations: int,
    clamp_index: int | None = None,
) -> IntegrationResult:
    """Spread activation to a fixpoint: a <- W a, renormalized so max(a) = 1,
    with the clamped node (the current text proposition) reset to 1 every
    iteration.  Stops when the largest activation change drops below
    epsilon; if the budget runs out first the result is flagged
    unconverged."""
    n = weights.shape[0]
    if weights.shape != (n, n):
        raise InputError("weight matrix must be square")
    if n and (weights < 0).any():
        raise InputError("weight matrix must be nonnegative")
    if n and not np.allclose(weights, weights.T, atol=1e-9):
        raise InputError("weight matrix must be symmetric")
    if n and np.abs(np.diag(weights)).max() > 0:
        raise InputError("weight matrix must have a zero diagonal")
    if initial.shape != (n,):
        raise InputError("initial activation length mismatch")
    if n == 0:
        return IntegrationResult(np.zeros(0), 0, True)
    a = np.clip(np.asarray(initial, dtype=np.float64).copy(), 0.0, 1.0)
    if clamp_index is not None:
        a[clamp_index] = 1.0
    for iteration in range(1, max_iterations + 1):
        nxt = weights @ a
        peak = float(nxt.max())
        if peak > 0:
            nxt = nxt / peak
        if clamp_index is not None:
            nxt[clamp_index] = 1.0
        delta = float(np.max(np.abs(nxt - a)))
        a = nxt
        if delta < epsilon:
            return IntegrationResult(a, iteration, True)
    return IntegrationResult(a, max_iterations, False)


@dataclass
class WorkingMemory:
    items: list[tuple[NetworkNode, float]]
    strategy: WMStrategy

    @property
    def keys(self) -> list[str]:
        return [node.key for node, _ in self.items]


def select_wm(
    nodes: Sequence[NetworkNode],
    activations: np.ndarray,
    strategy: WMStrategy,
) -> WorkingMemory:
    """Select working-memory content from the settled activations.

    fixed_count keeps the top n; activation_budget greedily takes the
    descending-activation prefix whose sum stays within the budget (or, in
    the proportional variant, keeps everything rescaled to the budget);
    threshold keeps every node at or above theta.  Ties break
    lexicographically on the node key.
    """
    ranked = sorted(
        zip(nodes, activations), key=lambda na: (-na[1], na[0].key)
    )
    ranked = [(node, float(act)) for node, act in ranked]
    if isinstance(strategy, FixedCount):
        items = ranked[: strategy.n]
    elif isinstance(strategy, Threshold):
        items = [(n, a) for n, a in ranked if a >= strategy.theta]
    elif isinstance(strategy, ActivationBudget):
        if strategy.proportional:
            positive = [(n, a) for n, a in ranked if a > 0]
            total = sum(a for _, a in positive)
            if total > strategy.total and total > 0:
                scale = strategy.total / total
                items = [(n, a * scale) for n, a in positive]
            else:
                items = positive
        else:
            items = []
            running = 0.0
            for node, act in ranked:
                if running + act > strategy.total + 1e-9:
                    break
                items.append((node, act))
                running += act
    else:
        raise InputError(f"unknown working-memory strategy {strategy!r}")
    return WorkingMemory(items=items, strategy=strategy)


@dataclass
class EpisodicEntry:
    activation: float
    last_cycle: int
    occurrence_count: int
    vector: Vector
    kind: str


class EpisodicStore:
    """Node store with per-entry activation that decays over cycles and is
    reinforced on re-occurrence.  Entries are never deleted."""

    def __init__(self) -> None:
        self.entries: dict[str, EpisodicEntry] = {}

    def decayed_activation(self, key: str, cycle: int, decay_rate: float) -> float:
        entry = self.entries[key]
        return entry.activation * decay_rate ** (cycle - entry.last_cycle)

    def snapshot(self) -> dict[str, tuple[float, int, int]]:
        return {
            k: (e.activation, e.last_cycle, e.occurrence_count)
            for k, e in sorted(self.entries.items())
        }


def episodic_update(
    store: EpisodicStore, wm: WorkingMemory, cycle: int, params: CIParams
) -> EpisodicStore:
    """Decay every entry to the current cycle, reinforce entries that are in
    working memory (capped at 1), and seed new entries at their
    working-memory activation."""
    wm_by_key = {node.key: (node, act) for node, act in wm.items}
    for key, entry in store.entries.items():
        decayed = entry.activation * params.decay_rate ** (cycle - entry.last_cycle)
        if key in wm_by_key:
            _, act = wm_by_key[key]
            entry.activation = min(1.0, decayed + params.reinforcement_gain * act)
            entry.occurrence_count += 1
        else:
            entry.activation = decayed
        entry.last_cycle = cycle
    for key, (node, act) in wm_by_key.items():
        if key not in store.entries:
            store.entries[key] = EpisodicEntry(
                activation=min(1.0, act),
                last_cycle=cycle,
                occurrence_count=1,
                vector=node.vector,
                kind=node.kind,
            )
    return store


def episodic_recall(
    store: EpisodicStore,
    prop_vector: Vector,
    cycle: int,
    params: CIParams,
) -> list[tuple[str, float, float]]:
    """Entries similar enough to the current proposition (cosine at or above
    the recall threshold) whose decayed activation is still above the floor,
    ordered by descending cosine.  Returns (key, cosine, decayed activation)
    rows; after a long digression the decay leaves nothing to recall."""
    pv_norm = float(np.linalg.norm(prop_vector))
    if pv_norm < _DEGENERATE_NORM:
        return []
    rows = []
    for key in sorted(store.entries):
        entry = store.entries[key]
        decayed = store.decayed_activation(key, cycle, params.decay_rate)
        if decayed < params.recall_floor:
            continue
        en = float(np.linalg.norm(entry.vector))
        if en < _DEGENERATE_NORM:
            continue
        cos = float(np.dot(entry.vector, prop_vector) / (en * pv_norm))
        if cos >= params.recall_threshold:
            rows.append((key, cos, decayed))
    rows.sort(key=lambda r: (-r[1], r[0]))
    return rows


@dataclass
class CycleRecord:
    index: int
    proposition: str
    skipped: bool = False
    note: str | None = None
    recalled: list[tuple[str, float, float]] = field(default_factory=list)
    associates: Associates | None = None
    nodes: list[tuple[str, str, str]] = field(default_factory=list)  # key, kind, origin
    dropped_nodes: list[tuple[str, str]] = field(default_factory=list)
    activations: dict[str, float] = field(default_factory=dict)
    iterations: int = 0
    converged: bool = True
    wm: list[tuple[str, float]] = field(default_factory=list)
    episodic: dict[str, tuple[float, int, int]] = field(default_factory=dict)

    def to_jsonable(self) -> dict:
        return {
            "cycle": self.index,
            "proposition": self.proposition,
            "skipped": self.skipped,
            "note": self.note,
            "recalled": [[k, c, a] for k, c, a in self.recalled],
            "associates": self.associates.to_jsonable() if self.associates else None,
            "nodes": [[k, kind, origin] for k, kind, origin in self.nodes],
            "dropped_nodes": [[k, r] for k, r in self.dropped_nodes],
            "activations": self.activations,
            "iterations": self.iterations,
            "converged": self.converged,
            "working_memory": [[k, a] for k, a in self.wm],
            "episodic_store": {
                k: {"activation": a, "last_cycle": lc, "occurrences": oc}
                for k, (a, lc, oc) in self.episodic.items()
            },
        }


@dataclass
class ComprehensionTrace:
    params: CIParams
    cycles: list[CycleRecord]

    @property
    def all_converged(self) -> bool:
        return all(c.converged for c in self.cycles if not c.skipped)

    def to_jsonable(self) -> dict:
        return {
            "params": self.params.to_jsonable(),
            "cycles": [c.to_jsonable() for c in self.cycles],
        }

    def to_json(self) -> str:
        return dump_json(self.to_jsonable())

    def to_text(self) -> str:
        lines = []
        for rec in self.cycles:
            lines.append(f"cycle {rec.index}: {rec.proposition}")
            if rec.skipped:
                lines.append(f"  skipped: {rec.note}")
                lines.append("")
                continue
            if rec.recalled:
                recalled = ", ".join(f"{k} ({c:.3f})" for k, c, _ in rec.recalled)
                lines.append(f"  recalled from episodic memory: {recalled}")
            else:
                lines.append("  recalled from episodic memory: (none)")
            if rec.associates is not None:
                pred = ", ".join(f"{t} ({c:.3f})" for t, c in rec.associates.predicate)
                lines.append(f"  predicate associates: {pred or '(none)'}")
                for arg, lst in rec.associates.by_arg.items():
                    txt = ", ".join(f"{t} ({c:.3f})" for t, c in lst)
                    lines.append(f"  associates of {arg}: {txt or '(none)'}")
                for slot, reason in rec.associates.skipped:
                    lines.append(f"  skipped slot {slot}: {reason}")
            for key, reason in rec.dropped_nodes:
                lines.append(f"  dropped node {key}: {reason}")
            status = "converged" if rec.converged else "NOT converged"
            lines.append(f"  integration: {status} in {rec.iterations} iterations")
            if rec.note:
                lines.append(f"  note: {rec.note}")
            lines.append("  working memory:")
            for key, act in rec.wm:
                lines.append(f"    {key:<40s} {act:.3f}")
            lines.append("")
        return "\n".join(lines)


def comprehend(
    propositions: Sequence[Proposition],
    space: SemanticSpace,
    params: CIParams = CIParams(),
) -> ComprehensionTrace:
    """Run the full construction-integration loop over the propositions.

    Per cycle the network holds the current proposition, its eligible
    predicate/argument terms, their associates, the carried-over working
    memory, and any episodic recalls; duplicates keep the highest-precedence
    origin (text > carried_over > episodic_recall > associate).  A
    proposition none of whose tokens project is skipped with a note.
    """
    if not propositions:
        raise InputError("no propositions to comprehend")
    store = EpisodicStore()
    carried: list[tuple[NetworkNode, float]] = []
    records: list[CycleRecord] = []
    for cycle_no, prop in enumerate(propositions, 1):
        rec = CycleRecord(index=cycle_no, proposition=prop.key)
        try:
            prop_vec, coverage = fold_in(space, list(prop.tokens))
        except DataError as exc:
            rec.skipped = True
            rec.note = f"proposition not projectable: {exc}"
            rec.episodic = store.snapshot()
            records.append(rec)
            continue

        rec.recalled = episodic_recall(store, prop_vec, cycle_no, params)
        associates = retrieve_associates(space, prop, params)
        rec.associates = associates

        nodes: dict[str, NetworkNode] = {}
        prop_node = NetworkNode(
            key=prop.key, kind="proposition", vector=prop_vec, origin=ORIGIN_TEXT
        )
        nodes[prop_node.key] = prop_node
        skipped_slots = {term for term, _ in associates.skipped}
        for term in prop.tokens:
            if term in nodes or term in skipped_slots:
                continue
            nodes[term] = NetworkNode(
                key=term,
                kind="term",
                vector=term_vector(space, term),
                origin=ORIGIN_TEXT,
            )
        for node, _ in carried:
            if node.key not in nodes:
                nodes[node.key] = node.with_origin(ORIGIN_CARRIED)
        for key, _, _ in rec.recalled:
            if key not in nodes:
                entry = store.entries[key]
                nodes[key] = NetworkNode(
                    key=key, kind=entry.kind, vector=entry.vector, origin=ORIGIN_RECALL
                )
        for term, _ in associates.predicate:
            if term not in nodes:
                nodes[term] = NetworkNode(
                    key=term,
                    kind="term",
                    vector=term_vector(space, term),
                    origin=ORIGIN_ASSOCIATE,
                )
        for arg in associates.by_arg:
            for term, _ in associates.by_arg[arg]:
                if term not in nodes:
                    nodes[term] = NetworkNode(
                        key=term,
                        kind="term",
                        vector=term_vector(space, term),
                        origin=ORIGIN_ASSOCIATE,
                    )

        kept, weights, dropped = build_network(list(nodes.values()))
        rec.dropped_nodes = dropped
        rec.nodes = [(n.key, n.kind, n.origin) for n in kept]
        clamp_index = next(
            (i for i, n in enumerate(kept) if n.key == prop_node.key), None
        )
        if clamp_index is None:
            rec.skipped = True
            rec.note = "degenerate proposition vector"
            rec.episodic = store.snapshot()
            records.append(rec)
            continue

        result = integrate(
            weights,
            np.ones(len(kept)),
            epsilon=params.epsilon,
            max_iterations=params.max_iterations,
            clamp_index=clamp_index,
        )
        rec.iterations = result.iterations
        rec.converged = result.converged
        rec.activations = {
            n.key: float(a) for n, a in zip(kept, result.activations)
        }
        if coverage < 1.0:
            rec.note = f"proposition coverage {coverage:.2f}"

        wm = select_wm(kept, result.activations, params.wm_strategy)
        rec.wm = [(node.key, act) for node, act in wm.items]
        if not wm.items:
            rec.note = (rec.note + "; " if rec.note else "") + "working memory empty"
        episodic_update(store, wm, cycle_no, params)
        rec.episodic = store.snapshot()
        carried = wm.items
        records.append(rec)
    return ComprehensionTrace(params=params, cycles=records)
