"""Single command-line entry point: build, query, eval, stratify, trace,
comprehend.

Every run writes a `run_manifest.json` into the output directory recording
the effective parameters and the SHA-256 of each input file, so any output
can be reproduced exactly.  Exit codes: 0 success, 2 input error, 3
data/vocabulary error, 4 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import cimodel, cooctrace, corpusio, evalsuite, vecspace
from .errors import ConvergenceError, DataError, InputError
from .reporting import dump_json, render_mapping, sha256_file, text_table

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DATA = 3
EXIT_NONCONVERGENCE = 4


def _load_config(path: str | None) -> dict[str, str]:
    """`key = value` lines; keys use the flag spelling with dashes or
    underscores.  CLI flags given explicitly win over config values."""
    if path is None:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise InputError(f"config {path}:{lineno}: expected key = value")
        key, _, value = stripped.partition("=")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _merge_config(args: argparse.Namespace) -> None:
    """Fill in values the user did not pass on the command line from the
    config file (flags still beat config, config beats built-in defaults)."""
    config = _load_config(getattr(args, "config", None))
    defaults: dict = getattr(args, "defaults", {})
    for key, raw in config.items():
        if key not in defaults:
            raise InputError(f"config: unknown key {key!r}")
        default, caster = defaults[key]
        if getattr(args, key) == default:
            setattr(args, key, caster(raw))


def _write_outputs(out_dir: Path, files: dict[str, str | bytes]) -> list[str]:
    out_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for name, content in files.items():
        path = out_dir / name
        if isinstance(content, bytes):
            path.write_bytes(content)
        else:
            path.write_text(content, encoding="utf-8")
        names.append(name)
    return names


def _write_manifest(
    command: str,
    args: argparse.Namespace,
    inputs: list[str | Path],
    outputs: list[str],
    out_dir: Path,
) -> None:
    params = {
        k: v for k, v in sorted(vars(args).items()) if k not in ("func", "defaults")
    }
    manifest = {
        "command": command,
        "parameters": {k: str(v) if isinstance(v, Path) else v for k, v in params.items()},
        "inputs": {str(p): sha256_file(p) for p in inputs},
        "outputs": sorted(outputs),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "run_manifest.json").write_text(dump_json(manifest), encoding="utf-8")


def _report_files(report, fmt: str, stem: str) -> dict[str, str]:
    files = {}
    if fmt in ("json", "both"):
        files[f"{stem}.json"] = report.to_json()
    if fmt in ("text", "both"):
        files[f"{stem}.txt"] = report.to_text()
    return files


# ---------------------------------------------------------------------------
# build


def cmd_build(args: argparse.Namespace) -> int:
    corpus = corpusio.ingest(args.manifest)
    if args.lemma_map:
        lmap = corpusio.LemmaMap.from_tsv(args.lemma_map)
        corpus = corpusio.lemmatize_corpus(corpus, lmap, args.lemma_mode)
    stop_words = None
    if args.stop_words:
        stop_words = [
            w.strip()
            for w in Path(args.stop_words).read_text(encoding="utf-8").splitlines()
            if w.strip()
        ]
    space = vecspace.build_space(
        corpus,
        k=args.k,
        min_count=args.min_count,
        seed=args.seed,
        scaling=args.scaling,
        solver=args.solver,
        stop_words=stop_words,
    )
    stats = corpusio.corpus_stats(corpus)
    spectrum = space.singular_values
    energy = spectrum**2
    report = {
        "corpus": stats.to_jsonable(),
        "space": {
            "n_terms": len(space.vocab),
            "n_paragraphs": len(corpus),
            "k": space.k,
            "top_singular_values": [float(s) for s in spectrum[:10]],
            "energy_total": float(energy.sum()),
            "build_config": space.build_config,
        },
    }
    out_dir = Path(args.out)
    files: dict[str, str | bytes] = {args.space_name: vecspace.save_space(space)}
    if args.format in ("json", "both"):
        files["build_report.json"] = dump_json(report)
    if args.format in ("text", "both"):
        files["build_report.txt"] = (
            "build report\n============\n" + render_mapping(report) + "\n"
        )
    outputs = _write_outputs(out_dir, files)
    inputs = [args.manifest] + [e.path for e in corpus.manifest]
    if args.lemma_map:
        inputs.append(args.lemma_map)
    if args.stop_words:
        inputs.append(args.stop_words)
    _write_manifest("build", args, inputs, outputs, out_dir)
    print(f"space written to {out_dir / args.space_name}")
    print(f"vocabulary: {len(space.vocab)} terms, k={space.k}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# query


def cmd_query(args: argparse.Namespace) -> int:
    space = vecspace.load_space_file(args.space)
    if args.action == "cosine":
        if args.word_b is None:
            raise InputError("query cosine needs two words")
        value = vecspace.cosine(
            vecspace.term_vector(space, args.word_a),
            vecspace.term_vector(space, args.word_b),
        )
        print(f"{value:.6f}")
    elif args.action == "neighbors":
        if args.word_b is None:
            raise InputError("query neighbors needs a word and a count")
        try:
            count = int(args.word_b)
        except ValueError:
            raise InputError(f"neighbor count must be an integer, got {args.word_b!r}") from None
        rows = vecspace.neighbors(
            space,
            args.word_a,
            count,
            min_weight=args.min_weight,
            max_weight=args.max_weight,
        )
        for term, cos in rows:
            print(f"{term}\t{cos:.6f}")
    else:  # foldin
        tokens, _ = corpusio.tokenize(Path(args.word_a).read_text(encoding="utf-8"))
        vec, coverage = vecspace.fold_in(space, tokens)
        print(f"coverage\t{coverage:.6f}")
        print("\t".join(f"{x:.6f}" for x in vec))
    out_dir = Path(args.out)
    inputs = [args.space] + ([args.word_a] if args.action == "foldin" else [])
    _write_manifest("query", args, inputs, [], out_dir)
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval


def cmd_eval(args: argparse.Namespace) -> int:
    space = vecspace.load_space_file(args.space)
    if args.protocol == "assoc":
        norms = evalsuite.load_assoc_norms(args.dataset)
        report = evalsuite.assoc_test(
            space,
            norms,
            weight_quantile=args.weight_quantile,
            entropy_quantile=args.entropy_quantile,
        )
    elif args.protocol == "judgment":
        report = evalsuite.judgment_test(space, evalsuite.load_judgments(args.dataset))
    elif args.protocol == "vocab":
        report = evalsuite.vocab_test(
            space, evalsuite.load_vocab_items(args.dataset), weight_cap=args.weight_cap
        )
    else:  # recall
        records = evalsuite.load_recall_records(args.dataset)
        report = evalsuite.recall_correlation(space, records)
    out_dir = Path(args.out)
    outputs = _write_outputs(out_dir, _report_files(report, args.format, "report"))
    _write_manifest("eval", args, [args.space, args.dataset], outputs, out_dir)
    print(f"{args.protocol} report written to {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# stratify


def cmd_stratify(args: argparse.Namespace) -> int:
    corpus = corpusio.ingest(args.manifest)
    word_list = corpusio.CommonWordList.from_file(args.wordlist)
    stratified = corpusio.stratify(corpus, word_list)
    stats = corpusio.corpus_stats(stratified)
    level_rows = [
        [lvl, mean] for lvl, mean in sorted(stats.mean_readability_by_level.items())
    ]
    out_dir = Path(args.out)
    files: dict[str, str | bytes] = {}
    lines = ["level\tmean_readability"] + [f"{l}\t{m!r}" for l, m in level_rows]
    files["level_means.tsv"] = "\n".join(lines) + "\n"
    if args.format in ("json", "both"):
        files["stratify_report.json"] = dump_json(stats.to_jsonable())
    if args.format in ("text", "both"):
        files["stratify_report.txt"] = (
            text_table(["level", "mean_readability"], level_rows)
            + f"\nmonotone increasing: {stats.readability_monotone}\n"
        )
    out_dir.mkdir(parents=True, exist_ok=True)
    corpusio.save_corpus(stratified, out_dir / args.corpus_name)
    outputs = _write_outputs(out_dir, files) + [args.corpus_name]
    inputs = [args.manifest, args.wordlist] + [e.path for e in corpus.manifest]
    _write_manifest("stratify", args, inputs, outputs, out_dir)
    print(f"stratified corpus written to {out_dir / args.corpus_name}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# trace


def _parse_mode(mode: str) -> tuple[str, int | None]:
    if mode == "exact":
        return "exact", None
    if mode.startswith("stride:"):
        try:
            return "stride", int(mode.split(":", 1)[1])
        except ValueError:
            raise InputError(f"bad stride in mode {mode!r}") from None
    raise InputError(f"unknown mode {mode!r} (expected 'exact' or 'stride:N')")


def load_pairs(path: str | Path) -> list[cooctrace.WordPair]:
    pairs = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read pairs {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.rstrip("\n").split("\t")
        if len(fields) != 2:
            raise InputError(
                f"pairs {path}:{lineno}: expected 2 tab-separated fields"
            )
        try:
            pairs.append(cooctrace.WordPair(fields[0].strip(), fields[1].strip()))
        except ValueError as exc:
            raise InputError(f"pairs {path}:{lineno}: {exc}") from exc
    if not pairs:
        raise InputError(f"pairs {path}: no pairs")
    return pairs


def cmd_trace(args: argparse.Namespace) -> int:
    corpus = corpusio.load_corpus(args.corpus)
    pairs = load_pairs(args.pairs)
    mode, stride = _parse_mode(args.mode)
    ledgers = cooctrace.run_trace(
        corpus,
        pairs,
        start=args.start,
        end=args.end,
        k=args.k,
        seed=args.seed,
        scaling=args.scaling,
        mode=mode,
        stride=stride,
        checkpoint_path=args.checkpoint,
        checkpoint_every=args.checkpoint_every,
    )
    report = cooctrace.trace_report(ledgers)
    telescoping_ok = report.telescoping_max_error <= 1e-9
    out_dir = Path(args.out)
    files: dict[str, str | bytes] = {
        "trajectory.tsv": cooctrace.trajectory_tsv(ledgers),
    }
    ledger_json = dump_json(
        {lg.x + "/" + lg.y: lg.to_jsonable() for lg in ledgers.values()}
    )
    if args.format in ("json", "both"):
        files["ledger.json"] = ledger_json
        files["summary.json"] = report.to_json()
    if args.format in ("text", "both"):
        files["summary.txt"] = report.to_text()
    outputs = _write_outputs(out_dir, files)
    _write_manifest("trace", args, [args.corpus, args.pairs], outputs, out_dir)
    print(f"traced {len(pairs)} pairs over paragraphs {args.start}..{args.end}")
    print(f"telescoping check: {'PASS' if telescoping_ok else 'FAIL'}")
    if not telescoping_ok and mode == "exact":
        return EXIT_DATA
    return EXIT_OK


# ---------------------------------------------------------------------------
# comprehend


def cmd_comprehend(args: argparse.Namespace) -> int:
    space = vecspace.load_space_file(args.space)
    try:
        text = Path(args.propositions).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read propositions {args.propositions}: {exc}") from exc
    props = cimodel.parse_propositions(text)
    if not props:
        raise InputError(f"propositions {args.propositions}: no propositions")
    try:
        params = cimodel.CIParams(
            n_associates=args.n_associates,
            predication_threshold=args.predication_threshold,
            min_weight=args.min_weight,
            max_weight=args.max_weight,
            wm_strategy=cimodel.parse_wm_strategy(args.wm_strategy),
            decay_rate=args.decay_rate,
            reinforcement_gain=args.reinforcement_gain,
            recall_threshold=args.recall_threshold,
            recall_floor=args.recall_floor,
            epsilon=args.epsilon,
            max_iterations=args.max_iterations,
            predication_pool=args.predication_pool,
        )
    except ValueError as exc:
        raise InputError(f"bad comprehension parameters: {exc}") from exc
    trace = cimodel.comprehend(props, space, params)
    out_dir = Path(args.out)
    files: dict[str, str | bytes] = {}
    if args.format in ("json", "both"):
        files["trace.json"] = trace.to_json()
    if args.format in ("text", "both"):
        files["cycles.log"] = trace.to_text()
    outputs = _write_outputs(out_dir, files)
    _write_manifest("comprehend", args, [args.space, args.propositions], outputs, out_dir)
    print(f"comprehended {len(props)} propositions in {len(trace.cycles)} cycles")
    if not trace.all_converged:
        print("warning: at least one integration cycle did not converge")
        return EXIT_NONCONVERGENCE
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=".", help="output directory (default: .)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    p.add_argument(
        "--format",
        choices=("json", "text", "both"),
        default="both",
        help="report formats to write (default: both)",
    )
    p.add_argument("--config", default=None, help="key = value config file")


def _finalize(p: argparse.ArgumentParser, func) -> None:
    """Attach the handler plus a dest -> (default, caster) map used to merge
    config-file values underneath explicit flags."""
    defaults = {}
    for action in p._actions:  # noqa: SLF001 - argparse has no public accessor
        if action.dest in ("help", "command", "defaults"):
            continue
        caster = action.type if action.type is not None else str
        defaults[action.dest] = (action.default, caster)
    p.set_defaults(func=func, defaults=defaults)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semspace",
        description="Build, query, validate and trace semantic spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a semantic space from a corpus manifest")
    p.add_argument("--manifest", required=True, help="TSV: path, category, level")
    p.add_argument("--k", type=int, default=300, help="space dimensions (default: 300)")
    p.add_argument("--min-count", type=int, default=2, dest="min_count")
    p.add_argument("--scaling", choices=("sigma", "none"), default="sigma")
    p.add_argument("--solver", choices=("auto", "dense", "arpack"), default="auto")
    p.add_argument("--lemma-map", default=None, dest="lemma_map")
    p.add_argument(
        "--lemma-mode",
        choices=("none", "verbs_only", "all"),
        default="none",
        dest="lemma_mode",
    )
    p.add_argument("--stop-words", default=None, dest="stop_words")
    p.add_argument("--space-name", default="space.semspc", dest="space_name")
    _add_common(p)
    _finalize(p, cmd_build)

    p = sub.add_parser("query", help="cosine / neighbors / foldin queries")
    p.add_argument("--space", required=True)
    p.add_argument("action", choices=("cosine", "neighbors", "foldin"))
    p.add_argument("word_a", help="word (cosine/neighbors) or text file (foldin)")
    p.add_argument("word_b", nargs="?", default=None, help="word (cosine) or n (neighbors)")
    p.add_argument("--min-weight", type=float, default=0.0, dest="min_weight")
    p.add_argument("--max-weight", type=float, default=1.0, dest="max_weight")
    _add_common(p)
    _finalize(p, cmd_query)

    p = sub.add_parser("eval", help="run a validation protocol")
    p.add_argument("--space", required=True)
    p.add_argument("--protocol", required=True, choices=("assoc", "judgment", "vocab", "recall"))
    p.add_argument("--dataset", required=True)
    p.add_argument("--weight-quantile", type=float, default=None, dest="weight_quantile")
    p.add_argument("--entropy-quantile", type=float, default=None, dest="entropy_quantile")
    p.add_argument("--weight-cap", type=float, default=None, dest="weight_cap")
    _add_common(p)
    _finalize(p, cmd_eval)

    p = sub.add_parser("stratify", help="score readability and order by level")
    p.add_argument("--manifest", required=True)
    p.add_argument("--wordlist", required=True, help="newline-delimited common words")
    p.add_argument("--corpus-name", default="corpus.tsv", dest="corpus_name")
    _add_common(p)
    _finalize(p, cmd_stratify)

    p = sub.add_parser("trace", help="incremental similarity trace with gain attribution")
    p.add_argument("--corpus", required=True, help="serialized corpus file")
    p.add_argument("--pairs", required=True, help="TSV: word_x, word_y")
    p.add_argument("--start", type=int, required=True)
    p.add_argument("--end", type=int, required=True)
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--scaling", choices=("sigma", "none"), default="sigma")
    p.add_argument("--mode", default="exact", help="exact or stride:N (default: exact)")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--checkpoint-every", type=int, default=0, dest="checkpoint_every")
    _add_common(p)
    _finalize(p, cmd_trace)

    p = sub.add_parser("comprehend", help="construction-integration simulation")
    p.add_argument("--space", required=True)
    p.add_argument("--propositions", required=True, help="one proposition per line")
    p.add_argument("--n-associates", type=int, default=3, dest="n_associates")
    p.add_argument(
        "--predication-threshold", type=float, default=0.2, dest="predication_threshold"
    )
    p.add_argument("--min-weight", type=float, default=0.0, dest="min_weight")
    p.add_argument("--max-weight", type=float, default=1.0, dest="max_weight")
    p.add_argument(
        "--wm-strategy",
        default="fixed:7",
        dest="wm_strategy",
        help="fixed:N | budget:T[:proportional] | threshold:THETA (default: fixed:7)",
    )
    p.add_argument("--decay-rate", type=float, default=0.8, dest="decay_rate")
    p.add_argument(
        "--reinforcement-gain", type=float, default=1.0, dest="reinforcement_gain"
    )
    p.add_argument("--recall-threshold", type=float, default=0.3, dest="recall_threshold")
    p.add_argument("--recall-floor", type=float, default=0.1, dest="recall_floor")
    p.add_argument("--epsilon", type=float, default=1e-4)
    p.add_argument("--max-iterations", type=int, default=100, dest="max_iterations")
    p.add_argument("--predication-pool", type=int, default=20, dest="predication_pool")
    _add_common(p)
    _finalize(p, cmd_comprehend)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config(args)
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


def console_main() -> None:
    raise SystemExit(main())
