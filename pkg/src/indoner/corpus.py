"""Annotated corpora: tagsets, CoNLL reading/writing, IOB handling, vocabularies.

A corpus file holds one token per line as ``SURFACE<TAB>POS<TAB>NETAG`` with
sentences separated by a blank line::

    joko      NNP   B-PER
    makan     VBT   O
    bakso     NNO   B-FNB
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

logger = logging.getLogger(__name__)

# INACL tagset, in the order it is usually listed.
POS_TAGS = (
    "NNO", "NNP", "PRN", "PRR", "PRI", "PRK", "ADJ", "VBI", "VBT", "VBP",
    "VBL", "VBE", "ADV", "ADK", "NEG", "CCN", "CSN", "PPO", "INT", "KUA",
    "NUM", "ART", "PAR", "UNS", "$$$", "SYM",
)

ENTITY_TYPES = ("PER", "LOC", "IND", "EVT", "FNB")

OUTSIDE = "O"

# Character alphabet fed to the C2W network. Index 27 is the catch-all.
CHARS = tuple("abcdefghijklmnopqrstuvwxyz0")
UNK_CHAR = "<UNK>"
# Stand-in used when a normalized word has to be rendered back as text.
UNK_CHAR_SYMBOL = "�"
UNK_WORD = "<UNK>"


def make_tagset(entity_types: Sequence[str] = ENTITY_TYPES) -> tuple[str, ...]:
    """Return the IOB labels ``O, B-X, I-X, ...`` for ``entity_types``.

    ``O`` always sits at index 0 so that lowest-index tie-breaking falls back
    to "no entity".
    """
    tags = [OUTSIDE]
    for ent in entity_types:
        tags.extend((f"B-{ent}", f"I-{ent}"))
    return tuple(tags)


TAGS = make_tagset()


class CorpusError(ValueError):
    """Malformed or invalid corpus input. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def split_tag(tag: str) -> tuple[str, str | None]:
    """``"B-PER" -> ("B", "PER")``, ``"O" -> ("O", None)``."""
    if tag == OUTSIDE:
        return OUTSIDE, None
    kind, sep, ent = tag.partition("-")
    if not sep or kind not in ("B", "I") or not ent:
        raise ValueError(f"not an IOB tag: {tag!r}")
    return kind, ent


@dataclass(frozen=True)
class Token:
    surface: str
    pos: str
    ne: str = OUTSIDE

    def __post_init__(self):
        if not self.surface.strip():
            raise ValueError("token surface must be non-empty")
        if any(c in self.surface for c in "\t\n\r"):
            raise ValueError(f"token surface cannot hold tabs or newlines: {self.surface!r}")
        if self.pos not in POS_TAGS:
            raise ValueError(f"unknown POS tag {self.pos!r}")
        if self.ne not in TAGS:
            raise ValueError(f"unknown NE tag {self.ne!r}")


@dataclass(frozen=True)
class Sentence:
    """An ordered, non-empty run of tokens.

    IOB validity is checked by :func:`parse_conll` for gold data, not here:
    predicted sentences from a softmax head may legitimately be invalid.
    """

    tokens: tuple[Token, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ValueError("a sentence needs at least one token")

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    @property
    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]

    @property
    def pos_tags(self) -> list[str]:
        return [t.pos for t in self.tokens]

    @property
    def tags(self) -> list[str]:
        return [t.ne for t in self.tokens]

    def with_tags(self, tags: Sequence[str]) -> "Sentence":
        if len(tags) != len(self.tokens):
            raise ValueError(f"expected {len(self.tokens)} tags, got {len(tags)}")
        return Sentence(tuple(Token(t.surface, t.pos, ne) for t, ne in zip(self.tokens, tags)))


@dataclass(frozen=True)
class EntitySpan:
    start: int
    end: int
    entity: str

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"bad span bounds [{self.start}, {self.end})")


# --------------------------------------------------------------------------
# IOB sequences
# --------------------------------------------------------------------------

def validate_iob(tags: Sequence[str]) -> list[int]:
    """Return the positions that break IOB legality (empty list means valid).

    ``I-X`` is legal only directly after ``B-X`` or ``I-X``.
    """
    violations = []
    prev_ent = None
    for t, tag in enumerate(tags):
        kind, ent = split_tag(tag)
        if kind == "I" and ent != prev_ent:
            violations.append(t)
        prev_ent = ent
    return violations


def tags_to_spans(tags: Sequence[str], lenient: bool = False) -> list[EntitySpan]:
    """Group ``B-X (I-X)*`` runs into spans.

    With ``lenient=True`` an orphan ``I-X`` opens a new ``X`` span instead of
    raising; this is how predicted (possibly invalid) output gets segmented.
    """
    if not lenient:
        bad = validate_iob(tags)
        if bad:
            raise ValueError(f"invalid IOB sequence at position {bad[0]}: {list(tags)}")
    spans = []
    start, cur = None, None
    for t, tag in enumerate(tags):
        kind, ent = split_tag(tag)
        if kind == "I" and ent == cur:
            continue
        if cur is not None:
            spans.append(EntitySpan(start, t, cur))
        start, cur = (t, ent) if kind != OUTSIDE else (None, None)
    if cur is not None:
        spans.append(EntitySpan(start, len(tags), cur))
    return spans


def spans_to_tags(spans: Iterable[EntitySpan], length: int) -> list[str]:
    tags = [OUTSIDE] * length
    for span in spans:
        if span.end > length:
            raise ValueError(f"span {span} exceeds sentence length {length}")
        if any(tag != OUTSIDE for tag in tags[span.start:span.end]):
            raise ValueError(f"overlapping span {span}")
        tags[span.start] = f"B-{span.entity}"
        for t in range(span.start + 1, span.end):
            tags[t] = f"I-{span.entity}"
    return tags


# --------------------------------------------------------------------------
# Characters and words
# --------------------------------------------------------------------------

_CHAR_INDEX = {c: i for i, c in enumerate(CHARS)}
UNK_CHAR_INDEX = len(CHARS)


def _normalize_char(ch: str) -> str | None:
    """Lowercase letter or '0', or None for the unknown character."""
    if ch.isdecimal():
        return "0"
    low = ch.lower()
    if len(low) == 1 and "a" <= low <= "z":
        return low
    return None


def normalize_chars(surface: str) -> list[int]:
    """Map each character of ``surface`` to its index in the C2W alphabet.

    Letters are lowercased, every decimal digit becomes ``0`` and anything
    else is the unknown character. One index per input character.
    """
    out = []
    for ch in surface:
        norm = _normalize_char(ch)
        out.append(UNK_CHAR_INDEX if norm is None else _CHAR_INDEX[norm])
    return out


def normalize_word(surface: str) -> str:
    """Normalized text key of a word, consistent with :func:`normalize_chars`."""
    return "".join(_normalize_char(ch) or UNK_CHAR_SYMBOL for ch in surface)


@dataclass(frozen=True)
class Vocab:
    """Index maps for words, characters, POS tags and NE tags."""

    words: dict[str, int]
    chars: dict[str, int] = field(default_factory=lambda: {
        **_CHAR_INDEX, UNK_CHAR: UNK_CHAR_INDEX})
    pos: dict[str, int] = field(default_factory=lambda: {p: i for i, p in enumerate(POS_TAGS)})
    tags: dict[str, int] = field(default_factory=lambda: {t: i for i, t in enumerate(TAGS)})

    @property
    def unk_word(self) -> int:
        return self.words[UNK_WORD]

    def word_id(self, surface: str) -> int:
        return self.words.get(normalize_word(surface), self.unk_word)

    @property
    def tag_list(self) -> list[str]:
        return sorted(self.tags, key=self.tags.__getitem__)


def build_vocab(sentences: Sequence[Sentence], pretrained_words: Iterable[str] = (),
                tags: Sequence[str] = TAGS) -> Vocab:
    """Vocabulary over normalized training words plus ``pretrained_words``.

    Pretrained words come first (in the order given), then unseen training
    words in order of appearance, then the unknown word.
    """
    if not sentences:
        raise ValueError("build_vocab needs at least one sentence")
    words: dict[str, int] = {}
    for w in pretrained_words:
        words.setdefault(normalize_word(w), len(words))
    for sent in sentences:
        for tok in sent:
            words.setdefault(normalize_word(tok.surface), len(words))
    words.setdefault(UNK_WORD, len(words))
    return Vocab(words=words, tags={t: i for i, t in enumerate(tags)})


# --------------------------------------------------------------------------
# CoNLL files
# --------------------------------------------------------------------------

def parse_conll(text: str, validate: bool = True, tagged: bool = True) -> list[Sentence]:
    """Parse the three-column CoNLL text into sentences.

    Runs of blank lines are treated as one separator. With ``validate`` set
    (the default, for gold data) an illegal IOB sequence is an error. With
    ``tagged=False`` the input is tagger input: two columns, or three with the
    NE column ignored, and every token gets ``O``.
    """
    sentences = []
    block: list[Token] = []
    block_lines: list[int] = []

    def flush():
        if not block:
            return
        if validate:
            bad = validate_iob([t.ne for t in block])
            if bad:
                i = bad[0]
                prev = block[i - 1].ne if i > 0 else "sentence start"
                raise CorpusError(
                    f"invalid IOB: {block[i].ne} cannot follow {prev}", block_lines[i])
        sentences.append(Sentence(tuple(block)))
        block.clear()
        block_lines.clear()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            flush()
            continue
        cols = line.split("\t")
        if tagged and len(cols) != 3:
            raise CorpusError(f"expected 3 tab-separated columns, got {len(cols)}: {line!r}", lineno)
        if not tagged and len(cols) not in (2, 3):
            raise CorpusError(f"expected 2 or 3 tab-separated columns, got {len(cols)}: {line!r}", lineno)
        surface, pos, ne = cols if tagged else (cols[0], cols[1], OUTSIDE)
        if not surface.strip():
            raise CorpusError("empty token surface", lineno)
        if pos not in POS_TAGS:
            raise CorpusError(f"unknown POS tag {pos!r}", lineno)
        if ne not in TAGS:
            raise CorpusError(f"unknown NE tag {ne!r}", lineno)
        block.append(Token(surface, pos, ne))
        block_lines.append(lineno)
    flush()
    return sentences


def serialize_conll(sentences: Iterable[Sentence]) -> str:
    blocks = ["".join(f"{t.surface}\t{t.pos}\t{t.ne}\n" for t in s) for s in sentences]
    return "\n".join(blocks)


def read_conll(path, validate: bool = True, tagged: bool = True) -> list[Sentence]:
    with open(path, encoding="utf-8") as f:
        return parse_conll(f.read(), validate=validate, tagged=tagged)


def write_conll(path, sentences: Iterable[Sentence]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(serialize_conll(sentences))
