"""Deterministic simulated annotators for end-to-end pipeline checks.

Each simulated annotator perceives word intensities as truth plus Gaussian
noise, picks argmax as best and argmin as worst (ties to the lowest word id),
and answers attention checks correctly unless a failure coin says otherwise.
Everything, including timestamps, is a pure function of (design, seed).
"""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone
from typing import Mapping, Optional, Sequence

from .design import StudyDesign, TupleItem
from .lexicon import EMOTIONS, Emotion, Lexicon
from .scoring import Judgment

SIM_EPOCH = datetime(2026, 1, 1, tzinfo=timezone.utc)


def truth_from_lexicon(lex: Lexicon, words: Optional[Sequence[str]] = None) -> dict[Emotion, dict[str, float]]:
    """Ground-truth intensity tables keyed by emotion, taken from a lexicon."""
    selected = list(words) if words is not None else [e.word for e in lex]
    return {
        emotion: {w: lex.by_word(w).intensity[emotion] for w in selected}
        for emotion in EMOTIONS
    }


def _sim_timestamp(counter: int) -> str:
    return (SIM_EPOCH + timedelta(seconds=counter)).strftime("%Y-%m-%dT%H:%M:%SZ")


def _judge_real_tuple(tup: TupleItem, truth: Mapping[str, float], sigma: float,
                      rng: random.Random) -> tuple[str, str]:
    perceived = {w: truth[w] + (rng.gauss(0.0, sigma) if sigma > 0 else 0.0)
                 for w in tup.words}
    best = min(tup.words, key=lambda w: (-perceived[w], w))
    worst = min((w for w in tup.words if w != best), key=lambda w: (perceived[w], w))
    return best, worst


def _judge_check_tuple(tup: TupleItem, failure_rate: float, rng: random.Random) -> tuple[str, str]:
    key = tup.check_key
    fails = rng.random() < failure_rate
    if not fails:
        return key.best_expected, key.worst_expected
    # a failing annotator picks a neutral word as best, which is always wrong
    neutral = min(w for w in tup.words
                  if w not in (key.best_expected, key.worst_expected))
    return neutral, key.worst_expected


def simulate_judgments(
    design: StudyDesign,
    truth: Mapping[Emotion, Mapping[str, float]],
    sigma: float,
    failure_rate: float = 0.0,
    seed: int = 0,
    slot_failure_rates: Optional[Sequence[float]] = None,
) -> list[Judgment]:
    """Full annotation of a design: one annotator per (emotion, slot).

    slot_failure_rates overrides failure_rate per annotator slot, so studies
    with one careless annotator out of three are expressible.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    k = design.annotators_per_tuple
    if slot_failure_rates is None:
        slot_failure_rates = [failure_rate] * k
    if len(slot_failure_rates) != k:
        raise ValueError(f"need {k} slot failure rates, got {len(slot_failure_rates)}")

    judgments: list[Judgment] = []
    counter = 0
    for emotion in design.emotions:
        for slot in range(k):
            rng = random.Random(f"{seed}:sim:{emotion.value}:{slot}")
            annotator = f"sim-{emotion.value}-{slot}"
            for tup in design.emotions[emotion]:
                if tup.is_attention_check:
                    best, worst = _judge_check_tuple(tup, slot_failure_rates[slot], rng)
                else:
                    best, worst = _judge_real_tuple(tup, truth[emotion], sigma, rng)
                judgments.append(Judgment(
                    annotator_id=annotator,
                    tuple_id=tup.tuple_id,
                    emotion=emotion,
                    best=best,
                    worst=worst,
                    timestamp=_sim_timestamp(counter),
                ))
                counter += 1
    return judgments
