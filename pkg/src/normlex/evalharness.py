"""Gold corpus reading, scoring, and the method-by-subcorpus report.

Corpus layout: a directory of paired ``<name>.txt`` / ``<name>.ann``
files plus a ``manifest.tsv`` with rows ``name<TAB>subcorpus<TAB>lang``.
The annotation files use a standoff subset:

    T<id><TAB><type> <start> <end>[;<start> <end>]*<TAB><surface>
    N<id><TAB>Reference T<id> CUI:<cui>

Offsets are byte offsets into the UTF-8 text.  Every text-bound line must
have at least one normalization line; multiple N lines aggregate into one
gold cui set.  Lines with other prefixes (brat attributes, notes, ...) are
ignored.

Scoring is micro-averaged over (mention, cui) pairs: a predicted pair
whose cui is in the mention's gold set counts one true positive; other
predicted pairs are false positives; gold pairs never matched are false
negatives.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import NormlexError
from .index import FuzzyConfig, TermIndex, build_index
from .pipeline import (
    DisambiguationConfig,
    Mention,
    Prediction,
    SearchLevel,
    disambiguate_document,
    search_mode_restricted,
)
from .terminology import ConceptId, Lexicon, RelationGraph
from .translator import Translator


class ParseError(NormlexError):
    """Standoff annotation line could not be parsed."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class OffsetMismatch(NormlexError):
    """Annotation surface text disagrees with its byte spans."""


class UnknownMention(NormlexError):
    """A prediction references a mention absent from the gold corpus."""


class CorpusError(NormlexError):
    """Corpus directory or manifest problem."""


@dataclass(frozen=True)
class GoldMention:
    mention: Mention
    gold_cuis: frozenset[ConceptId]


@dataclass(frozen=True)
class GoldDocument:
    doc_id: str
    text: str
    mentions: tuple[GoldMention, ...]
    subcorpus: str


@dataclass(frozen=True, slots=True)
class Metrics:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "Metrics":
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return cls(tp=tp, fp=fp, fn=fn, precision=precision, recall=recall, f1=f1)


_TBOUND_RE = re.compile(r"^T(\S+)\t(\S+) ([0-9 ;]+)\t(.*)$")
_NORM_RE = re.compile(r"^N\S*\tReference T(\S+) CUI:(\S+)\s*$")


def read_gold_standoff(
    ann_path: str | Path,
    txt_path: str | Path,
    language: str = "und",
    subcorpus: str = "",
) -> GoldDocument:
    """Parse one text/annotation pair into a gold document."""
    text = Path(txt_path).read_text(encoding="utf-8")
    text_bytes = text.encode("utf-8")
    doc_id = Path(txt_path).stem

    spans_by_tid: dict[str, tuple[tuple[int, int], ...]] = {}
    surface_by_tid: dict[str, str] = {}
    cuis_by_tid: dict[str, set[ConceptId]] = {}
    tid_order: list[str] = []

    for line_no, line in enumerate(
        Path(ann_path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip():
            continue
        if line.startswith("T"):
            match = _TBOUND_RE.match(line)
            if not match:
                raise ParseError(line_no, f"bad text-bound line: {line!r}")
            tid, _type, span_field, surface = match.groups()
            spans = []
            for piece in span_field.split(";"):
                parts = piece.split()
                if len(parts) != 2 or not all(p.isdigit() for p in parts):
                    raise ParseError(line_no, f"bad span {piece!r}")
                spans.append((int(parts[0]), int(parts[1])))
            try:
                fragments = [
                    text_bytes[start:end].decode("utf-8") for start, end in spans
                ]
            except UnicodeDecodeError as exc:
                raise OffsetMismatch(
                    f"{ann_path}:{line_no}: span not on a UTF-8 boundary: {exc}"
                ) from exc
            joined = " ".join(fragments)
            if joined != surface:
                raise OffsetMismatch(
                    f"{ann_path}:{line_no}: surface {surface!r} != span text {joined!r}"
                )
            if tid in spans_by_tid:
                raise ParseError(line_no, f"duplicate mention id T{tid}")
            spans_by_tid[tid] = tuple(spans)
            surface_by_tid[tid] = surface
            tid_order.append(tid)
        elif line.startswith("N"):
            match = _NORM_RE.match(line)
            if not match:
                raise ParseError(line_no, f"bad normalization line: {line!r}")
            tid, raw_cui = match.groups()
            if tid not in spans_by_tid:
                raise ParseError(line_no, f"normalization references unknown T{tid}")
            try:
                cui = ConceptId.parse(raw_cui)
            except ValueError:
                raise ParseError(line_no, f"bad cui {raw_cui!r}") from None
            cuis_by_tid.setdefault(tid, set()).add(cui)
        # other standoff line types are ignored

    mentions = []
    for tid in tid_order:
        if tid not in cuis_by_tid:
            raise ParseError(0, f"mention T{tid} has no normalization line")
        mentions.append(
            GoldMention(
                mention=Mention(
                    doc_id=doc_id,
                    mention_id=f"T{tid}",
                    spans=spans_by_tid[tid],
                    surface=surface_by_tid[tid],
                    language=language,
                ),
                gold_cuis=frozenset(cuis_by_tid[tid]),
            )
        )
    return GoldDocument(
        doc_id=doc_id, text=text, mentions=tuple(mentions), subcorpus=subcorpus
    )


def score(gold: Sequence[GoldDocument], preds: Iterable[Prediction]) -> Metrics:
    """Micro P/R/F1 over (mention, cui) pairs."""
    gold_sets: dict[tuple[str, str], frozenset[ConceptId]] = {}
    for doc in gold:
        for gm in doc.mentions:
            gold_sets[(doc.doc_id, gm.mention.mention_id)] = gm.gold_cuis

    tp = fp = 0
    matched: set[tuple[str, str, ConceptId]] = set()
    pred_pairs = set()
    for pred in preds:
        key = (pred.doc_id, pred.mention_id)
        if key not in gold_sets:
            raise UnknownMention(f"prediction for unknown mention {key}")
        pred_pairs.add((pred.doc_id, pred.mention_id, pred.cui))
    for doc_id, mention_id, cui in pred_pairs:
        if cui in gold_sets[(doc_id, mention_id)]:
            tp += 1
            matched.add((doc_id, mention_id, cui))
        else:
            fp += 1
    total_gold = sum(len(cuis) for cuis in gold_sets.values())
    fn = total_gold - len(matched)
    return Metrics.from_counts(tp=tp, fp=fp, fn=fn)


@dataclass(frozen=True)
class ReportRow:
    method: SearchLevel
    subcorpus: str
    metrics: Metrics
    resolved: dict[SearchLevel, int]


@dataclass(frozen=True)
class EvaluationReport:
    rows: tuple[ReportRow, ...]

    def to_tsv(self) -> str:
        lines = []
        for row in self.rows:
            m = row.metrics
            lines.append(
                "\t".join(
                    [
                        row.method.value,
                        row.subcorpus,
                        f"{m.precision:.4f}",
                        f"{m.recall:.4f}",
                        f"{m.f1:.4f}",
                        str(row.resolved.get(SearchLevel.ML, 0)),
                        str(row.resolved.get(SearchLevel.CL, 0)),
                        str(row.resolved.get(SearchLevel.BTM, 0)),
                    ]
                )
            )
        return "\n".join(lines) + "\n"

    def pretty(self) -> str:
        header = (
            f"{'method':<7}{'subcorpus':<14}{'P':>8}{'R':>8}{'F1':>8}"
            f"{'res_ML':>8}{'res_CL':>8}{'res_BTM':>9}"
        )
        lines = [header, "-" * len(header)]
        for row in self.rows:
            m = row.metrics
            lines.append(
                f"{row.method.value:<7}{row.subcorpus:<14}"
                f"{m.precision:>8.4f}{m.recall:>8.4f}{m.f1:>8.4f}"
                f"{row.resolved.get(SearchLevel.ML, 0):>8}"
                f"{row.resolved.get(SearchLevel.CL, 0):>8}"
                f"{row.resolved.get(SearchLevel.BTM, 0):>9}"
            )
        return "\n".join(lines)


@dataclass(frozen=True)
class CorpusFile:
    name: str
    subcorpus: str
    language: str


def read_manifest(corpus_dir: str | Path) -> list[CorpusFile]:
    manifest = Path(corpus_dir) / "manifest.tsv"
    if not manifest.is_file():
        raise CorpusError(f"missing manifest.tsv in corpus directory {corpus_dir}")
    entries = []
    for line_no, line in enumerate(
        manifest.read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise CorpusError(f"{manifest}:{line_no}: expected name, subcorpus, lang")
        entries.append(CorpusFile(name=fields[0], subcorpus=fields[1], language=fields[2]))
    if not entries:
        raise CorpusError(f"empty manifest in corpus directory {corpus_dir}")
    return entries


def load_corpus(corpus_dir: str | Path) -> list[GoldDocument]:
    """Read all manifest-listed documents of a corpus directory."""
    corpus_dir = Path(corpus_dir)
    docs = []
    for entry in read_manifest(corpus_dir):
        txt = corpus_dir / f"{entry.name}.txt"
        ann = corpus_dir / f"{entry.name}.ann"
        for required in (txt, ann):
            if not required.is_file():
                raise CorpusError(f"manifest names missing file {required}")
        try:
            docs.append(
                read_gold_standoff(
                    ann, txt, language=entry.language, subcorpus=entry.subcorpus
                )
            )
        except (ParseError, OffsetMismatch) as exc:
            raise CorpusError(f"{ann}: {exc}") from exc
    return docs


def run_evaluation(
    corpus_dir: str | Path,
    lexicon: Lexicon,
    relations: RelationGraph,
    translator: Translator | None,
    fuzzy: FuzzyConfig | None = None,
    disamb: DisambiguationConfig | None = None,
    english_lang: str = "en",
) -> EvaluationReport:
    """Evaluate mono-lingual, cross-lingual, and translated search depths.

    One report row per (method, subcorpus), with per-level resolution
    counts alongside the metrics.
    """
    fuzzy = fuzzy or FuzzyConfig()
    disamb = disamb or DisambiguationConfig()
    docs = load_corpus(corpus_dir)

    needed_langs = {gm.mention.language for doc in docs for gm in doc.mentions}
    needed_langs.add(english_lang)
    indexes: dict[str, TermIndex] = {lang: build_index(lexicon, lang) for lang in sorted(needed_langs)}
    english_index = indexes[english_lang]

    subcorpora = sorted({doc.subcorpus for doc in docs})
    rows = []
    for method in (SearchLevel.ML, SearchLevel.CL, SearchLevel.BTM):
        preds_by_sub: dict[str, list[Prediction]] = {s: [] for s in subcorpora}
        resolved_by_sub: dict[str, dict[SearchLevel, int]] = {
            s: {SearchLevel.ML: 0, SearchLevel.CL: 0, SearchLevel.BTM: 0}
            for s in subcorpora
        }
        for doc in docs:
            results = [
                search_mode_restricted(
                    gm.mention,
                    indexes[gm.mention.language],
                    english_index,
                    translator,
                    fuzzy,
                    max_level=method,
                )
                for gm in doc.mentions
            ]
            for result in results:
                if result.level is not SearchLevel.NONE:
                    resolved_by_sub[doc.subcorpus][result.level] += 1
            preds_by_sub[doc.subcorpus].extend(
                disambiguate_document(results, lexicon, relations, disamb)
            )
        for sub in subcorpora:
            sub_docs = [d for d in docs if d.subcorpus == sub]
            rows.append(
                ReportRow(
                    method=method,
                    subcorpus=sub,
                    metrics=score(sub_docs, preds_by_sub[sub]),
                    resolved=resolved_by_sub[sub],
                )
            )
    return EvaluationReport(rows=tuple(rows))
