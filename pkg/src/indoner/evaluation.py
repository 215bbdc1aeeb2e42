"""Entity-level exact-match scoring.

A predicted entity is correct only when its start, end and type all equal a
gold entity. Anything else counts once as a false positive and leaves the
gold entity as a false negative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from indoner.corpus import ENTITY_TYPES, EntitySpan, Sentence, tags_to_spans


@dataclass(frozen=True)
class ClassScore:
    name: str
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


@dataclass(frozen=True)
class Scores:
    per_class: dict[str, ClassScore]
    overall: ClassScore

    def __getitem__(self, name: str) -> ClassScore:
        return self.overall if name == "OVERALL" else self.per_class[name]

    def rows(self) -> list[ClassScore]:
        return [*self.per_class.values(), self.overall]


def _as_tags(seq) -> list[str]:
    return seq.tags if isinstance(seq, Sentence) else list(seq)


def _check_aligned(gold, pred):
    if len(gold) != len(pred):
        raise ValueError(f"gold has {len(gold)} sentences, prediction has {len(pred)}")
    for i, (g, p) in enumerate(zip(gold, pred)):
        if len(g) != len(p):
            raise ValueError(f"sentence {i}: gold has {len(g)} tokens, prediction has {len(p)}")


def score(gold: Sequence, pred: Sequence, entity_types: Sequence[str] = ENTITY_TYPES) -> Scores:
    """Per-class and micro-averaged overall counts.

    ``gold`` and ``pred`` are aligned lists of tag sequences (or sentences).
    Gold must be IOB-valid; predictions are segmented leniently.
    """
    _check_aligned(gold, pred)
    counts = {ent: [0, 0, 0] for ent in entity_types}
    for g, p in zip(gold, pred):
        gold_spans = set(tags_to_spans(_as_tags(g)))
        pred_spans = set(tags_to_spans(_as_tags(p), lenient=True))
        for span in pred_spans:
            counts.setdefault(span.entity, [0, 0, 0])[0 if span in gold_spans else 1] += 1
        for span in gold_spans - pred_spans:
            counts.setdefault(span.entity, [0, 0, 0])[2] += 1
    per_class = {ent: ClassScore(ent, *c) for ent, c in counts.items()}
    overall = ClassScore("OVERALL", *(sum(c[i] for c in counts.values()) for i in range(3)))
    return Scores(per_class, overall)


REPORT_COLUMNS = ("class", "tp", "fp", "fn", "precision", "recall", "f1")


def report_tsv(scores: Scores) -> str:
    lines = ["\t".join(REPORT_COLUMNS)]
    for s in scores.rows():
        lines.append(f"{s.name}\t{s.tp}\t{s.fp}\t{s.fn}\t{s.precision:.4f}\t{s.recall:.4f}\t{s.f1:.4f}")
    return "\n".join(lines) + "\n"


def report_text(scores: Scores) -> str:
    rows = [REPORT_COLUMNS] + [
        (s.name, str(s.tp), str(s.fp), str(s.fn), f"{s.precision:.4f}", f"{s.recall:.4f}", f"{s.f1:.4f}")
        for s in scores.rows()]
    widths = [max(len(r[i]) for r in rows) for i in range(len(REPORT_COLUMNS))]
    out = []
    for r in rows:
        cells = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
        out.append("  ".join(cells))
    return "\n".join(out) + "\n"


def report(scores: Scores, fmt: str = "tsv") -> str:
    if fmt == "tsv":
        return report_tsv(scores)
    if fmt == "text":
        return report_text(scores)
    raise ValueError(f"unknown report format {fmt!r}")


@dataclass(frozen=True)
class Disagreement:
    sentence: int
    side: str  # "gold" (missed) or "pred" (spurious)
    span: EntitySpan
    text: str


def diff(gold: Sequence[Sentence], pred: Sequence) -> list[Disagreement]:
    """Spans found on only one side, per sentence, with their surface text."""
    _check_aligned(gold, pred)
    out = []
    for i, (g, p) in enumerate(zip(gold, pred)):
        words = g.surfaces
        gold_spans = tags_to_spans(g.tags)
        pred_spans = tags_to_spans(_as_tags(p), lenient=True)
        gold_set, pred_set = set(gold_spans), set(pred_spans)
        for side, spans, other in (("gold", gold_spans, pred_set), ("pred", pred_spans, gold_set)):
            for span in spans:
                if span not in other:
                    out.append(Disagreement(i, side, span, " ".join(words[span.start:span.end])))
    return out
