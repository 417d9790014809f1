"""Operator command-line interface.

Commands: build-index, normalize, train-mt, translate, evaluate, serve.
Exit codes: 0 success, 1 runtime error, 2 usage error.  Apart from the
serve command's listening socket, no command touches the network.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NormlexError
from .evalharness import run_evaluation
from .index import FuzzyConfig, TermIndex, UnknownLanguage, build_index, load_index, save_index
from .neuralmt import ModelConfig, load_model, parameter_checksum, read_parallel_corpus, save_model, train
from .pipeline import DisambiguationConfig, SearchLevel
from .service import Normalizer
from .terminology import Lexicon, load_lexicon, load_relations, RelationGraph
from .translator import DictionaryTranslator, NeuralTranslator, Translator

CACHE_DIR_ENV = "NORMLEX_CACHE_DIR"


class UsageError(NormlexError):
    """Bad flag combination or value; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    """Validated runtime configuration shared by lookup-style commands."""

    lexicon_path: Path
    relations_path: Path | None
    language: str | None
    fuzzy: FuzzyConfig
    disamb: DisambiguationConfig
    translator_kind: str  # none | dictionary | neural
    dict_path: Path | None
    model_path: Path | None
    seed: int
    max_level: SearchLevel

    @classmethod
    def from_args(cls, args: argparse.Namespace, need_language: bool) -> "RunConfig":
        lexicon_path = Path(args.lexicon)
        if not lexicon_path.is_file():
            raise NormlexError(f"lexicon file not found: {lexicon_path}")
        relations_path = Path(args.relations) if args.relations else None
        if relations_path and not relations_path.is_file():
            raise NormlexError(f"relations file not found: {relations_path}")
        dict_path = Path(args.dict) if getattr(args, "dict", None) else None
        model_path = Path(args.model) if getattr(args, "model", None) else None
        kind = getattr(args, "translator", "none")
        if kind == "dictionary":
            if dict_path is None:
                raise UsageError("--translator dictionary requires --dict")
            if not dict_path.is_file():
                raise NormlexError(f"dictionary file not found: {dict_path}")
        if kind == "neural":
            if model_path is None:
                raise UsageError("--translator neural requires --model")
            if not model_path.is_file():
                raise NormlexError(f"model file not found: {model_path}")
        language = getattr(args, "lang", None)
        if need_language and not language:
            raise UsageError("--lang is required")
        sem_groups = None
        if getattr(args, "sem_groups", None):
            sem_groups = frozenset(
                g.strip() for g in args.sem_groups.split(",") if g.strip()
            )
        return cls(
            lexicon_path=lexicon_path,
            relations_path=relations_path,
            language=language,
            fuzzy=FuzzyConfig(
                max_edit_per_long_token=args.fuzzy_edits,
                long_token_min_len=args.fuzzy_long_token,
            ),
            disamb=DisambiguationConfig(
                allowed_sem_groups=sem_groups,
                use_preferred_step=not getattr(args, "no_preferred_step", False),
                use_graph_step=not getattr(args, "no_graph_step", False),
            ),
            translator_kind=kind,
            dict_path=dict_path,
            model_path=model_path,
            seed=getattr(args, "seed", 0),
            max_level=SearchLevel(getattr(args, "max_level", "BTM")),
        )


def _load_lexicon_reporting(path: Path, langs: list[str] | None) -> Lexicon:
    expected = langs if langs else None
    if expected is None:
        # first pass to discover languages, second to validate against them
        seen = set()
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) == 5:
                seen.add(fields[1])
        expected = sorted(seen)
    lexicon, malformed = load_lexicon(path, expected)
    if malformed:
        print(f"warning: {len(malformed)} malformed lexicon rows skipped", file=sys.stderr)
    return lexicon


def _lexicon_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()[:16]


def _cache_path(cache_dir: Path, lexicon_path: Path, lang: str) -> Path:
    return cache_dir / f"{_lexicon_digest(lexicon_path)}.{lang}.nlx"


def _index_with_cache(lexicon_path: Path, lexicon: Lexicon, lang: str, cache_dir: Path | None) -> TermIndex:
    if cache_dir is not None:
        cached = _cache_path(cache_dir, lexicon_path, lang)
        if cached.is_file():
            return load_index(cached)
    return build_index(lexicon, lang)


def _build_translator(cfg: RunConfig) -> Translator | None:
    if cfg.translator_kind == "none":
        return None
    if cfg.translator_kind == "dictionary":
        return DictionaryTranslator.from_tsv(cfg.dict_path)
    return NeuralTranslator(load_model(cfg.model_path))


def _build_normalizer(cfg: RunConfig, cache_dir: Path | None) -> Normalizer:
    lexicon = _load_lexicon_reporting(cfg.lexicon_path, None)
    if cfg.relations_path:
        relations, _ = load_relations(cfg.relations_path, lexicon)
    else:
        relations = RelationGraph.empty()
    normalizer = Normalizer(
        lexicon=lexicon,
        relations=relations,
        translator=_build_translator(cfg),
        fuzzy=cfg.fuzzy,
        disamb=cfg.disamb,
    )
    wanted = {"en"} | ({cfg.language} if cfg.language else set())
    for lang in sorted(wanted & lexicon.languages):
        normalizer.indexes[lang] = _index_with_cache(cfg.lexicon_path, lexicon, lang, cache_dir)
    return normalizer


def _add_lookup_flags(parser: argparse.ArgumentParser, need_lang: bool) -> None:
    parser.add_argument("--lexicon", required=True, help="lexicon TSV path")
    parser.add_argument("--relations", help="relations TSV path")
    if need_lang:
        parser.add_argument("--lang", help="target language code")
    parser.add_argument(
        "--translator",
        choices=("none", "dictionary", "neural"),
        default="none",
        help="translation backend for the third search level",
    )
    parser.add_argument("--dict", help="dictionary TSV for --translator dictionary")
    parser.add_argument("--model", help="model file for --translator neural")
    parser.add_argument("--max-level", choices=("ML", "CL", "BTM"), default="BTM")
    parser.add_argument("--sem-groups", help="comma-separated semantic group filter")
    parser.add_argument("--no-preferred-step", action="store_true")
    parser.add_argument("--no-graph-step", action="store_true")
    parser.add_argument("--fuzzy-edits", type=int, default=1)
    parser.add_argument("--fuzzy-long-token", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)


def cmd_build_index(args: argparse.Namespace) -> int:
    lexicon_path = Path(args.lexicon)
    if not lexicon_path.is_file():
        raise NormlexError(f"lexicon file not found: {lexicon_path}")
    lexicon = _load_lexicon_reporting(lexicon_path, None)
    langs = args.langs.split(",") if args.langs else sorted(lexicon.languages)
    out_dir = Path(args.out) if args.out else None
    if out_dir is None and args.cache_dir:
        out_dir = Path(args.cache_dir)
    if out_dir is None:
        raise UsageError("give --out or set NORMLEX_CACHE_DIR")
    out_dir.mkdir(parents=True, exist_ok=True)
    for lang in langs:
        index = build_index(lexicon, lang)
        concepts = {e.cui for entries in index.exact_map.values() for e in entries}
        target = _cache_path(out_dir, lexicon_path, lang)
        save_index(index, target)
        print(f"{lang}: terms={index.entry_count} concepts={len(concepts)} -> {target}")
    return 0


def cmd_normalize(args: argparse.Namespace) -> int:
    cfg = RunConfig.from_args(args, need_language=True)
    cache_dir = Path(args.cache_dir) if args.cache_dir else None
    normalizer = _build_normalizer(cfg, cache_dir)
    if args.term is not None and args.infile is not None:
        raise UsageError("give either a term or --in, not both")
    if args.term is not None:
        terms = [args.term]
    elif args.infile is not None:
        terms = [
            line for line in Path(args.infile).read_text(encoding="utf-8").splitlines() if line
        ]
    else:
        raise UsageError("give a term or --in FILE")
    lines = []
    for term in terms:
        outcome = normalizer.normalize(term, cfg.language, cfg.max_level)
        lines.append(
            "\t".join(
                [
                    term,
                    outcome.level.value,
                    outcome.matched_term,
                    ",".join(outcome.candidates),
                    outcome.cui or "",
                ]
            )
        )
    output = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(output, encoding="utf-8")
    else:
        sys.stdout.write(output)
    return 0


def _train_config(args: argparse.Namespace) -> ModelConfig:
    overrides = {}
    if args.config:
        overrides.update(json.loads(Path(args.config).read_text(encoding="utf-8")))
    if args.epochs is not None:
        overrides["max_epochs"] = args.epochs
    if args.batch_size is not None:
        overrides["batch_size"] = args.batch_size
    if args.lr is not None:
        overrides["initial_lr"] = args.lr
    if args.seed is not None:
        overrides["seed"] = args.seed
    return ModelConfig.from_dict(overrides)


def cmd_train_mt(args: argparse.Namespace) -> int:
    config = _train_config(args)
    examples = read_parallel_corpus(args.train)
    if args.dev:
        dev = read_parallel_corpus(args.dev)
        training = examples
    else:
        rng = np.random.default_rng(config.seed)
        order = rng.permutation(len(examples))
        n_dev = max(1, round(args.dev_fraction * len(examples)))
        dev = [examples[i] for i in order[:n_dev]]
        training = [examples[i] for i in order[n_dev:]]
        if not training:
            raise NormlexError("dev split leaves no training examples")
    result = train(training, dev, config)
    save_model(result.model, args.out)
    log_path = Path(args.log) if args.log else Path(str(args.out) + ".losses.tsv")
    log_lines = ["epoch\ttrain_loss\tdev_loss\tlr"]
    for h in result.history:
        log_lines.append(f"{h.epoch}\t{h.train_loss!r}\t{h.dev_loss!r}\t{h.lr!r}")
    log_path.write_text("\n".join(log_lines) + "\n", encoding="utf-8")
    print(f"model -> {args.out}")
    print(f"losses -> {log_path}")
    print(f"checksum {parameter_checksum(result.model)}")
    return 0


def cmd_translate(args: argparse.Namespace) -> int:
    model_path = Path(args.model)
    if not model_path.is_file():
        raise NormlexError(f"model file not found: {model_path}")
    translator = NeuralTranslator(load_model(model_path))
    source = Path(args.infile).read_text(encoding="utf-8").splitlines() if args.infile else sys.stdin.read().splitlines()
    out_lines = [translator.translate(line) or "" for line in source]
    output = "\n".join(out_lines) + "\n"
    if args.out:
        Path(args.out).write_text(output, encoding="utf-8")
    else:
        sys.stdout.write(output)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = RunConfig.from_args(args, need_language=False)
    corpus_dir = Path(args.corpus)
    if not corpus_dir.is_dir():
        raise NormlexError(f"corpus directory not found: {corpus_dir}")
    lexicon = _load_lexicon_reporting(cfg.lexicon_path, None)
    if cfg.relations_path:
        relations, _ = load_relations(cfg.relations_path, lexicon)
    else:
        relations = RelationGraph.empty()
    report = run_evaluation(
        corpus_dir,
        lexicon,
        relations,
        _build_translator(cfg),
        fuzzy=cfg.fuzzy,
        disamb=cfg.disamb,
    )
    print(report.pretty())
    if args.out:
        Path(args.out).write_text(report.to_tsv(), encoding="utf-8")
        print(f"report -> {args.out}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .server import serve

    cfg = RunConfig.from_args(args, need_language=False)
    cache_dir = Path(args.cache_dir) if args.cache_dir else None
    normalizer = _build_normalizer(cfg, cache_dir)
    normalizer.preload(set(normalizer.lexicon.languages))
    httpd = serve(normalizer, args.host, args.port, workers=args.workers)
    host, port = httpd.server_address[:2]
    print(f"serving on http://{host}:{port} (Ctrl-C stops)")
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="normlex",
        description="Multilingual concept normalization over a TSV lexicon",
    )
    parser.add_argument(
        "--cache-dir",
        default=None,
        help=f"index cache directory (default: ${CACHE_DIR_ENV})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-index", help="build per-language index caches")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--langs", help="comma-separated subset (default: all)")
    p.add_argument("--out", help="output directory for cache files")
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("normalize", help="normalize a term or a file of terms")
    _add_lookup_flags(p, need_lang=True)
    p.add_argument("term", nargs="?", help="a single term")
    p.add_argument("--in", dest="infile", help="file with one term per line")
    p.add_argument("--out", help="write TSV here instead of stdout")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("train-mt", help="train the translation model")
    p.add_argument("--train", required=True, help="parallel corpus TSV")
    p.add_argument("--dev", help="development corpus TSV")
    p.add_argument("--dev-fraction", type=float, default=0.1)
    p.add_argument("--config", help="JSON file of model config overrides")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--log", help="per-epoch loss TSV (default: <out>.losses.tsv)")
    p.set_defaults(func=cmd_train_mt)

    p = sub.add_parser("translate", help="translate stdin lines with a model")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", help="read lines from a file instead of stdin")
    p.add_argument("--out", help="write translations here instead of stdout")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("evaluate", help="run the evaluation harness on a corpus")
    _add_lookup_flags(p, need_lang=False)
    p.add_argument("--corpus", required=True, help="corpus directory")
    p.add_argument("--out", help="write the report TSV here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("serve", help="serve POST /normalize locally")
    _add_lookup_flags(p, need_lang=False)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8646)
    p.add_argument("--workers", type=int, default=4)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.cache_dir is None:
        args.cache_dir = os.environ.get(CACHE_DIR_ENV)
    try:
        return args.func(args)
    except (UsageError, UnknownLanguage) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NormlexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
