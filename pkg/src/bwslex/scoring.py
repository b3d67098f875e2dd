"""Best-worst judgment aggregation, attention filtering, split-half reliability.

score(w) = (#best(w) - #worst(w)) / #judgments-on-tuples-containing-w, then
linearly mapped to [0,1] via (raw+1)/2. The denominator is the realized count,
so partially annotated studies score correctly.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional, Sequence

from . import stats
from .design import StudyDesign
from .lexicon import EMOTIONS, Emotion, LEXICON_HEADER

SHR_ITERATIONS = 100


@dataclass(frozen=True)
class Judgment:
    annotator_id: str
    tuple_id: str
    emotion: Emotion
    best: str
    worst: str
    timestamp: str  # ISO-8601 UTC

    def __post_init__(self):
        if self.best == self.worst:
            raise ValueError(f"tuple {self.tuple_id}: best and worst must differ")


@dataclass(frozen=True)
class Score:
    raw: float
    scaled: float
    n_judgments: int


@dataclass
class ScoreTable:
    scores: dict[tuple[str, Emotion], Score]

    def get(self, word: str, emotion: Emotion) -> Optional[Score]:
        return self.scores.get((word, emotion))

    def words(self, emotion: Emotion) -> list[str]:
        return [w for (w, e) in self.scores if e is emotion]


@dataclass
class FilterResult:
    kept: list[Judgment]
    discarded_annotators: set[str]
    unchecked_annotators: set[str]


@dataclass
class ShrEmotionResult:
    spearman: float
    pearson: float
    skipped_iterations: int


@dataclass
class ShrResult:
    per_emotion: dict[Emotion, ShrEmotionResult]
    iterations: int
    seed: int


def validate_judgment(j: Judgment, design: StudyDesign) -> None:
    tup = design.tuple_by_id(j.tuple_id)  # KeyError for unknown tuples
    if j.best not in tup.words:
        raise ValueError(f"tuple {j.tuple_id}: best {j.best!r} not in tuple")
    if j.worst not in tup.words:
        raise ValueError(f"tuple {j.tuple_id}: worst {j.worst!r} not in tuple")


def filter_annotators(judgments: Sequence[Judgment], design: StudyDesign) -> FilterResult:
    """Discard every judgment by annotators who fail any attention check.

    Check judgments themselves never reach scoring. Annotators who saw no
    check at all are kept but reported, so partial studies stay usable.
    """
    for j in judgments:
        validate_judgment(j, design)
    saw_check: set[str] = set()
    failed: set[str] = set()
    for j in judgments:
        tup = design.tuple_by_id(j.tuple_id)
        if not tup.is_attention_check:
            continue
        saw_check.add(j.annotator_id)
        key = tup.check_key
        if j.best != key.best_expected or j.worst != key.worst_expected:
            failed.add(j.annotator_id)
    kept = [
        j for j in judgments
        if j.annotator_id not in failed
        and not design.tuple_by_id(j.tuple_id).is_attention_check
    ]
    all_annotators = {j.annotator_id for j in judgments}
    return FilterResult(
        kept=kept,
        discarded_annotators=failed,
        unchecked_annotators=all_annotators - saw_check - failed,
    )


def aggregate(judgments: Iterable[Judgment], design: StudyDesign, emotion: Emotion) -> ScoreTable:
    """Count-based BWS aggregation for one emotion.

    Only pass pre-filtered judgments; attention-check judgments are rejected.
    """
    best: dict[str, int] = {}
    worst: dict[str, int] = {}
    seen: dict[str, int] = {}
    for j in judgments:
        if j.emotion is not emotion:
            continue
        tup = design.tuple_by_id(j.tuple_id)
        if tup.is_attention_check:
            raise ValueError(f"attention-check judgment {j.tuple_id} in aggregation input")
        if j.best not in tup.words or j.worst not in tup.words:
            raise ValueError(f"tuple {j.tuple_id}: choices outside tuple words")
        for w in tup.words:
            seen[w] = seen.get(w, 0) + 1
        best[j.best] = best.get(j.best, 0) + 1
        worst[j.worst] = worst.get(j.worst, 0) + 1
    scores: dict[tuple[str, Emotion], Score] = {}
    for w, n in seen.items():
        raw = (best.get(w, 0) - worst.get(w, 0)) / n
        scores[(w, emotion)] = Score(raw=raw, scaled=(raw + 1.0) / 2.0, n_judgments=n)
    return ScoreTable(scores)


def split_half_reliability(
    judgments: Sequence[Judgment],
    design: StudyDesign,
    emotion: Emotion,
    iterations: int = SHR_ITERATIONS,
    seed: int = 0,
) -> ShrEmotionResult:
    """Average split-half Spearman/Pearson over randomized bin assignments.

    Per tuple, 1 or 2 judgments (uniform; 1 if only one exists) go to bin A,
    the rest to bin B; each bin is aggregated and the two score vectors are
    correlated over the words present in both. Iterations with fewer than 3
    shared words are skipped; more than 50% skips is an error.
    """
    by_tuple: dict[str, list[Judgment]] = {}
    for j in judgments:
        if j.emotion is not emotion:
            continue
        if design.tuple_by_id(j.tuple_id).is_attention_check:
            raise ValueError("filter judgments before reliability analysis")
        by_tuple.setdefault(j.tuple_id, []).append(j)
    if not by_tuple:
        raise ValueError(f"no judgments for {emotion}")

    tuple_ids = sorted(by_tuple)
    spearmans: list[float] = []
    pearsons: list[float] = []
    skipped = 0
    for it in range(iterations):
        # independent stream per iteration, schedule-invariant
        rng = random.Random(f"{seed}:shr:{it}")
        bin_a: list[Judgment] = []
        bin_b: list[Judgment] = []
        for tid in tuple_ids:
            js = by_tuple[tid]
            k = len(js)
            take = 1 if k == 1 else rng.choice((1, 2))
            picked = set(rng.sample(range(k), min(take, k)))
            for idx, j in enumerate(js):
                (bin_a if idx in picked else bin_b).append(j)
        pair = bin_correlation(bin_a, bin_b, design, emotion)
        if pair is None:
            skipped += 1
            continue
        spearmans.append(pair[0])
        pearsons.append(pair[1])
    if skipped > iterations / 2:
        raise ValueError(
            f"{skipped}/{iterations} split-half iterations skipped; too few shared words"
        )
    n = len(spearmans)
    return ShrEmotionResult(
        spearman=sum(spearmans) / n,
        pearson=sum(pearsons) / n,
        skipped_iterations=skipped,
    )


def bin_correlation(
    bin_a: Sequence[Judgment],
    bin_b: Sequence[Judgment],
    design: StudyDesign,
    emotion: Emotion,
) -> Optional[tuple[float, float]]:
    """(spearman, pearson) between two aggregated bins over their shared words.

    Returns None when fewer than 3 words are shared or a bin is constant.
    """
    table_a = aggregate(bin_a, design, emotion)
    table_b = aggregate(bin_b, design, emotion)
    shared = sorted(set(table_a.words(emotion)) & set(table_b.words(emotion)))
    if len(shared) < 3:
        return None
    va = [table_a.get(w, emotion).scaled for w in shared]
    vb = [table_b.get(w, emotion).scaled for w in shared]
    try:
        return stats.spearman(va, vb), stats.pearson(va, vb)
    except stats.UndefinedCorrelationError:
        return None


def reliability_report(
    judgments: Sequence[Judgment],
    design: StudyDesign,
    emotions: Sequence[Emotion] = EMOTIONS,
    iterations: int = SHR_ITERATIONS,
    seed: int = 0,
) -> ShrResult:
    per_emotion = {
        e: split_half_reliability(judgments, design, e, iterations=iterations, seed=seed)
        for e in emotions
    }
    return ShrResult(per_emotion=per_emotion, iterations=iterations, seed=seed)


JUDGMENT_HEADER = ["annotator_id", "tuple_id", "emotion", "best", "worst", "timestamp_iso8601"]


def save_judgments(judgments: Iterable[Judgment], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(JUDGMENT_HEADER)
        for j in judgments:
            writer.writerow([j.annotator_id, j.tuple_id, j.emotion.value, j.best, j.worst, j.timestamp])


def load_judgments(path: str | Path) -> list[Judgment]:
    out: list[Judgment] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != JUDGMENT_HEADER:
            raise ValueError(f"unexpected judgment header {header!r}")
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 6:
                raise ValueError(f"row {row_no}: expected 6 columns, got {len(row)}")
            out.append(Judgment(
                annotator_id=row[0],
                tuple_id=row[1],
                emotion=Emotion(row[2]),
                best=row[3],
                worst=row[4],
                timestamp=row[5],
            ))
    return out


def export_scores_csv(
    tables: dict[Emotion, ScoreTable],
    path: str | Path,
    prons: Optional[dict[str, tuple[str, ...]]] = None,
    real_flags: Optional[dict[str, bool]] = None,
) -> None:
    """Write scaled scores in the lexicon CSV layout, one row per scored word.

    Words missing a score for some emotion get 0.5 (the raw-0 neutral point).
    Pronunciations default to a placeholder 'ah' when unknown.
    """
    words = sorted({w for table in tables.values() for w in (k[0] for k in table.scores)})
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LEXICON_HEADER)
        for idx, w in enumerate(words):
            pron = " ".join(prons.get(w, ("ah",))) if prons else "ah"
            is_real = int(real_flags.get(w, False)) if real_flags else 0
            values = []
            for emotion in EMOTIONS:
                table = tables.get(emotion)
                score = table.get(w, emotion) if table else None
                values.append(f"{score.scaled:.6f}" if score else "0.500000")
            writer.writerow([idx, w, pron, is_real, *values])


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
