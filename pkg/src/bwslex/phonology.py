"""Phoneme-position analysis: DISC conversion, Welch tests, plot data.

The central question: do words sharing a phoneme in a given position differ
in intensity between emotions? Output is plot-ready data, never images.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from . import stats
from .lexicon import ARPABET, EMOTIONS, Emotion, Lexicon

# The eight phonemes studied, in report order.
DEFAULT_PHONEMES = ("p", "t", "s", "sh", "f", "m", "l", "r")

DENSITY_GRID_POINTS = 101
SIGNIFICANCE_LEVEL = 0.05


class PositionFilter(Enum):
    FIRST = "first"
    LAST = "last"
    ANY = "any"

    def __str__(self) -> str:
        return self.value


POSITIONS: tuple[PositionFilter, ...] = tuple(PositionFilter)


class DiscTable:
    """DISC symbol -> ARPAbet token map, 42 entries, loaded from package data."""

    def __init__(self, mapping: dict[str, str]):
        if len(mapping) != 42:
            raise ValueError(f"expected 42 DISC symbols, got {len(mapping)}")
        for sym, token in mapping.items():
            if len(sym) != 1:
                raise ValueError(f"DISC symbols are single characters, got {sym!r}")
            if token not in ARPABET:
                raise ValueError(f"unknown ARPAbet token {token!r} for DISC {sym!r}")
        self.mapping = dict(mapping)

    def __len__(self) -> int:
        return len(self.mapping)

    def __getitem__(self, sym: str) -> str:
        return self.mapping[sym]

    def __contains__(self, sym: str) -> bool:
        return sym in self.mapping

    @classmethod
    def load(cls) -> "DiscTable":
        ref = resources.files("bwslex.data") / "disc_arpabet.csv"
        mapping = {}
        with ref.open(encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                mapping[row["disc"]] = row["arpabet"]
        return cls(mapping)


def disc_to_arpabet(disc: str, table: DiscTable) -> tuple[str, ...]:
    """Character-wise DISC to ARPAbet conversion, order preserved."""
    out = []
    for ch in disc:
        if ch not in table:
            raise ValueError(f"unknown DISC symbol {ch!r}")
        out.append(table[ch])
    return tuple(out)


def select_words(
    lex: Lexicon,
    phoneme: str,
    position: PositionFilter,
    nonsense_only: bool = True,
) -> set[str]:
    """Words whose pronunciation has the phoneme at the given position."""
    if phoneme not in ARPABET:
        raise ValueError(f"not an ARPAbet token: {phoneme!r}")
    out = set()
    for e in lex:
        if nonsense_only and e.is_real:
            continue
        if position is PositionFilter.FIRST:
            hit = e.pron[0] == phoneme
        elif position is PositionFilter.LAST:
            hit = e.pron[-1] == phoneme
        else:
            hit = phoneme in e.pron
        if hit:
            out.add(e.word)
    return out


@dataclass(frozen=True)
class PhonemeTestResult:
    phoneme: str
    position: PositionFilter
    emotion_a: Emotion
    emotion_b: Emotion
    welch: stats.WelchResult
    n_words: int

    @property
    def significant(self) -> bool:
        return self.welch.p_two_tailed <= SIGNIFICANCE_LEVEL


@dataclass
class PhonemeReport:
    results: list[PhonemeTestResult]
    skipped: list[tuple[str, PositionFilter, str]]


def emotion_pairs() -> list[tuple[Emotion, Emotion]]:
    """The 15 unordered emotion pairs in canonical order."""
    pairs = []
    for i, a in enumerate(EMOTIONS):
        for b in EMOTIONS[i + 1:]:
            pairs.append((a, b))
    return pairs


def phoneme_emotion_tests(
    lex: Lexicon,
    phonemes: Sequence[str] = DEFAULT_PHONEMES,
    positions: Sequence[PositionFilter] = POSITIONS,
    nonsense_only: bool = True,
) -> PhonemeReport:
    """Welch tests between emotion-intensity distributions of phoneme-sharing words.

    For each (phoneme, position) the same selected word set supplies both
    vectors of every emotion pair. Selections under 2 words, and degenerate
    (zero-variance) pairs, are recorded as skipped rather than failing.
    """
    results: list[PhonemeTestResult] = []
    skipped: list[tuple[str, PositionFilter, str]] = []
    for phoneme in phonemes:
        for position in positions:
            words = sorted(select_words(lex, phoneme, position, nonsense_only))
            if len(words) < 2:
                skipped.append((phoneme, position, f"only {len(words)} word(s) selected"))
                continue
            entries = [lex.by_word(w) for w in words]
            for ea, eb in emotion_pairs():
                va = [e.intensity[ea] for e in entries]
                vb = [e.intensity[eb] for e in entries]
                try:
                    welch = stats.welch_t(va, vb)
                except stats.DegenerateTestError:
                    skipped.append((phoneme, position, f"degenerate pair {ea}/{eb}"))
                    continue
                results.append(PhonemeTestResult(
                    phoneme=phoneme, position=position,
                    emotion_a=ea, emotion_b=eb,
                    welch=welch, n_words=len(words),
                ))
    return PhonemeReport(results=results, skipped=skipped)


def silverman_bandwidth(values: Sequence[float]) -> float:
    """Silverman's rule of thumb; 0.1 fallback for degenerate samples."""
    n = len(values)
    if n < 2:
        return 0.1
    sd = math.sqrt(stats.variance(values))
    iqr = stats.quantile(values, 0.75) - stats.quantile(values, 0.25)
    spread = min(x for x in (sd, iqr / 1.34) if x > 0) if (sd > 0 or iqr > 0) else 0.0
    if spread <= 0:
        return 0.1
    return 0.9 * spread * n ** (-0.2)


def kde_curve(values: Sequence[float], bandwidth: Optional[float] = None) -> list[tuple[float, float]]:
    """Gaussian KDE sampled at 101 evenly spaced points on [0,1]."""
    if not values:
        raise ValueError("empty sample")
    h = silverman_bandwidth(values) if bandwidth is None else bandwidth
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    n = len(values)
    norm = 1.0 / (n * h * math.sqrt(2.0 * math.pi))
    curve = []
    for i in range(DENSITY_GRID_POINTS):
        x = i / (DENSITY_GRID_POINTS - 1)
        density = norm * sum(math.exp(-0.5 * ((x - v) / h) ** 2) for v in values)
        curve.append((x, density))
    return curve


def density_data(
    lex: Lexicon,
    emotion: Emotion,
    bandwidth: Optional[float] = None,
    nonsense_only: bool = True,
) -> list[tuple[float, float]]:
    values = [e.intensity[emotion] for e in lex if not (nonsense_only and e.is_real)]
    if not values:
        raise ValueError("no words selected for density estimate")
    return kde_curve(values, bandwidth)


@dataclass(frozen=True)
class BoxplotStats:
    n: int
    lo_whisker: float
    q1: float
    median: float
    q3: float
    hi_whisker: float


def boxplot_stats(values: Sequence[float]) -> BoxplotStats:
    """Tukey boxplot summary: quartiles plus whiskers at 1.5 IQR fences."""
    if not values:
        raise ValueError("empty sample")
    q1 = stats.quantile(values, 0.25)
    median = stats.quantile(values, 0.5)
    q3 = stats.quantile(values, 0.75)
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    return BoxplotStats(
        n=len(values),
        lo_whisker=min(v for v in values if v >= lo_fence),
        q1=q1,
        median=median,
        q3=q3,
        hi_whisker=max(v for v in values if v <= hi_fence),
    )


REPORT_HEADER = ["phoneme", "position", "emotion_a", "emotion_b", "n_a_words", "t", "df", "p", "significant"]


def write_phoneme_report(report: PhonemeReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        for r in report.results:
            writer.writerow([
                r.phoneme, r.position.value, r.emotion_a.value, r.emotion_b.value,
                r.n_words, repr(r.welch.t), repr(r.welch.df),
                repr(r.welch.p_two_tailed), str(r.significant).lower(),
            ])


BOXPLOT_HEADER = ["phoneme", "position", "emotion", "n", "lo_whisker", "q1", "median", "q3", "hi_whisker"]


def write_boxplot_csv(
    lex: Lexicon,
    path: str | Path,
    phonemes: Sequence[str] = DEFAULT_PHONEMES,
    positions: Sequence[PositionFilter] = POSITIONS,
    nonsense_only: bool = True,
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BOXPLOT_HEADER)
        for phoneme in phonemes:
            for position in positions:
                words = sorted(select_words(lex, phoneme, position, nonsense_only))
                if not words:
                    continue
                entries = [lex.by_word(w) for w in words]
                for emotion in EMOTIONS:
                    box = boxplot_stats([e.intensity[emotion] for e in entries])
                    writer.writerow([
                        phoneme, position.value, emotion.value, box.n,
                        repr(box.lo_whisker), repr(box.q1), repr(box.median),
                        repr(box.q3), repr(box.hi_whisker),
                    ])


DENSITY_HEADER = ["emotion", "x", "density"]


def write_density_csv(
    lex: Lexicon,
    path: str | Path,
    bandwidth: Optional[float] = None,
    nonsense_only: bool = True,
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DENSITY_HEADER)
        for emotion in EMOTIONS:
            for x, density in density_data(lex, emotion, bandwidth, nonsense_only):
                writer.writerow([emotion.value, repr(x), repr(density)])
