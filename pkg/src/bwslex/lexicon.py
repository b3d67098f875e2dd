"""Word/emotion data model and file ingestion.

Covers the packaged nonsense-word lexicon, NRC-EIL-style intensity files,
and CMUdict-style pronunciation files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping


class Emotion(Enum):
    JOY = "joy"
    SADNESS = "sadness"
    ANGER = "anger"
    DISGUST = "disgust"
    FEAR = "fear"
    SURPRISE = "surprise"

    def __str__(self) -> str:
        return self.value


EMOTIONS: tuple[Emotion, ...] = tuple(Emotion)

# Stress-free ARPAbet inventory (the 39 standard tokens).
ARPABET = frozenset(
    """
    aa ae ah ao aw ay b ch d dh eh er ey f g hh ih iy jh k l m n ng ow oy
    p r s sh t th uh uw v w y z zh
    """.split()
)

LEXICON_HEADER = [
    "IDs", "Word", "ARPA Pron", "Real",
    "Joy", "Sadness", "Anger", "Disgust", "Fear", "Surprise",
]


class LexiconFormatError(ValueError):
    """Malformed lexicon row; carries the 1-based row number."""

    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


@dataclass(frozen=True)
class LexEntry:
    id: int
    word: str
    pron: tuple[str, ...]
    is_real: bool
    intensity: Mapping[Emotion, float]


@dataclass
class Lexicon:
    entries: list[LexEntry] = field(default_factory=list)

    def __post_init__(self):
        self.index = {e.word: e.id for e in self.entries}
        if len(self.index) != len(self.entries):
            raise ValueError("duplicate words in lexicon")
        self._by_word = {e.word: e for e in self.entries}

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def by_word(self, word: str) -> LexEntry:
        return self._by_word[word]

    def words(self, nonsense_only: bool = False) -> list[str]:
        return [e.word for e in self.entries if not (nonsense_only and e.is_real)]


@dataclass(frozen=True)
class EilEntry:
    word: str
    emotion: Emotion
    score: float


@dataclass
class EilResource:
    entries: list[EilEntry]
    skipped_emotions: int


def _parse_intensity(raw: str, row: int, column: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise LexiconFormatError(row, f"non-numeric intensity in {column}: {raw!r}") from None
    if not 0.0 <= value <= 1.0:
        raise LexiconFormatError(row, f"intensity outside [0,1] in {column}: {raw}")
    return value


def _parse_pron(raw: str, row: int) -> tuple[str, ...]:
    tokens = tuple(raw.split())
    if not tokens:
        raise LexiconFormatError(row, "empty pronunciation")
    for tok in tokens:
        if tok not in ARPABET:
            raise LexiconFormatError(row, f"unknown phoneme token {tok!r}")
    return tokens


def load_lexicon(path: str | Path) -> Lexicon:
    """Read a lexicon CSV (header `IDs,Word,ARPA Pron,Real,...`) into a Lexicon."""
    entries = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise LexiconFormatError(1, "missing header")
        if header != LEXICON_HEADER:
            raise LexiconFormatError(1, f"unexpected header {header!r}")
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(LEXICON_HEADER):
                raise LexiconFormatError(row_no, f"expected {len(LEXICON_HEADER)} columns, got {len(row)}")
            ids, word, pron_raw, real_raw = row[0], row[1], row[2], row[3]
            try:
                entry_id = int(ids)
            except ValueError:
                raise LexiconFormatError(row_no, f"non-integer id {ids!r}") from None
            if entry_id < 0:
                raise LexiconFormatError(row_no, f"negative id {entry_id}")
            if not word or not word.isascii() or not word.isalpha():
                raise LexiconFormatError(row_no, f"word must be ASCII letters, got {word!r}")
            if real_raw not in ("0", "1"):
                raise LexiconFormatError(row_no, f"Real column must be 0 or 1, got {real_raw!r}")
            intensity = {
                emo: _parse_intensity(row[4 + i], row_no, LEXICON_HEADER[4 + i])
                for i, emo in enumerate(EMOTIONS)
            }
            entries.append(LexEntry(
                id=entry_id,
                word=word.lower(),
                pron=_parse_pron(pron_raw, row_no),
                is_real=real_raw == "1",
                intensity=intensity,
            ))
    return Lexicon(entries)


def save_lexicon(lex: Lexicon, path: str | Path) -> None:
    """Write a Lexicon back to the CSV wire format (round-trips with load_lexicon)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LEXICON_HEADER)
        for e in lex.entries:
            writer.writerow([
                e.id, e.word, " ".join(e.pron), int(e.is_real),
                *(repr(e.intensity[emo]) for emo in EMOTIONS),
            ])


def load_embedded_lexicon() -> Lexicon:
    """Load the packaged 340-word nonsense/real lexicon."""
    ref = resources.files("bwslex.data") / "nonsense-words-emotion-intensities.csv"
    with resources.as_file(ref) as path:
        return load_lexicon(path)


_EMOTION_BY_NAME = {e.value: e for e in EMOTIONS}


def load_eil(path: str | Path) -> EilResource:
    """Read a 3-column TSV (word, emotion, score), keeping only the six emotions.

    Lines naming other emotions are skipped and counted; a score outside [0,1]
    or a non-numeric score is an error, not a skip.
    """
    entries: list[EilEntry] = []
    seen: set[tuple[str, Emotion]] = set()
    skipped = 0
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"line {line_no}: expected 3 tab-separated fields, got {len(parts)}")
            word, emo_raw, score_raw = parts
            emotion = _EMOTION_BY_NAME.get(emo_raw)
            if emotion is None:
                skipped += 1
                continue
            try:
                score = float(score_raw)
            except ValueError:
                raise ValueError(f"line {line_no}: non-numeric score {score_raw!r}") from None
            if not 0.0 <= score <= 1.0:
                raise ValueError(f"line {line_no}: score outside [0,1]: {score_raw}")
            key = (word, emotion)
            if key in seen:
                raise ValueError(f"line {line_no}: duplicate (word, emotion) pair {key}")
            seen.add(key)
            entries.append(EilEntry(word=word, emotion=emotion, score=score))
    return EilResource(entries=entries, skipped_emotions=skipped)


def load_cmudict(path: str | Path) -> dict[str, tuple[str, ...]]:
    """Read a CMUdict-format file into word -> stress-free lowercase phonemes.

    Alternate pronunciations (`WORD(2)`) and malformed lines are skipped;
    the first pronunciation wins.
    """
    prons: dict[str, tuple[str, ...]] = {}
    with open(path, encoding="latin-1") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith(";;;"):
                continue
            parts = line.split()
            if len(parts) < 2:
                continue
            word = parts[0]
            if "(" in word:
                continue
            phones = []
            ok = True
            for tok in parts[1:]:
                tok = tok.rstrip("012").lower()
                if tok not in ARPABET:
                    ok = False
                    break
                phones.append(tok)
            if not ok or not phones:
                continue
            key = word.lower()
            if key not in prons:
                prons[key] = tuple(phones)
    return prons


def top_k(lex: Lexicon, emotion: Emotion, k: int, nonsense_only: bool) -> list[tuple[str, float]]:
    """k highest-intensity words for one emotion, ties broken alphabetically."""
    if k < 1:
        raise ValueError("k must be >= 1")
    pool = [e for e in lex.entries if not (nonsense_only and e.is_real)]
    pool.sort(key=lambda e: (-e.intensity[emotion], e.word))
    return [(e.word, e.intensity[emotion]) for e in pool[:k]]
