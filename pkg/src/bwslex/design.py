"""BWS study design generation: constrained 4-tuples, attention checks, batching.

Per emotion the design holds exactly 2N tuples over N words, each word
appearing in exactly 8 of them, all tuples distinct as ordered sequences and
duplicate-free inside. Generation is randomized repair under a fixed seed.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .lexicon import EMOTIONS, Emotion

OCCURRENCES_PER_WORD = 8
DEFAULT_ANNOTATORS_PER_TUPLE = 3
RESTART_BUDGET = 1000


class DesignInfeasibleError(RuntimeError):
    """Repair budget exhausted; carries the seed and N that failed."""

    def __init__(self, seed: int, n_words: int):
        super().__init__(
            f"could not satisfy design constraints for N={n_words} with seed={seed} "
            f"within {RESTART_BUDGET} restarts"
        )
        self.seed = seed
        self.n_words = n_words


@dataclass(frozen=True)
class CheckKey:
    best_expected: str
    worst_expected: str


@dataclass(frozen=True)
class TupleItem:
    tuple_id: str
    emotion: Emotion
    words: tuple[str, str, str, str]
    is_attention_check: bool = False
    check_key: Optional[CheckKey] = None

    def __post_init__(self):
        if len(set(self.words)) != 4:
            raise ValueError(f"tuple {self.tuple_id}: words must be pairwise distinct")
        if self.is_attention_check != (self.check_key is not None):
            raise ValueError(f"tuple {self.tuple_id}: check_key present iff attention check")
        if self.check_key is not None:
            if self.check_key.best_expected not in self.words:
                raise ValueError(f"tuple {self.tuple_id}: best_expected not in tuple")
            if self.check_key.worst_expected not in self.words:
                raise ValueError(f"tuple {self.tuple_id}: worst_expected not in tuple")


@dataclass
class StudyDesign:
    emotions: dict[Emotion, list[TupleItem]]
    words: list[str]
    annotators_per_tuple: int
    seed: int
    _by_id: dict[str, TupleItem] = field(init=False, repr=False)

    def __post_init__(self):
        self._by_id = {}
        for tuples in self.emotions.values():
            for t in tuples:
                if t.tuple_id in self._by_id:
                    raise ValueError(f"duplicate tuple_id {t.tuple_id}")
                self._by_id[t.tuple_id] = t

    def tuple_by_id(self, tuple_id: str) -> TupleItem:
        return self._by_id[tuple_id]

    def real_tuples(self, emotion: Emotion) -> list[TupleItem]:
        return [t for t in self.emotions[emotion] if not t.is_attention_check]

    def check_tuples(self, emotion: Emotion) -> list[TupleItem]:
        return [t for t in self.emotions[emotion] if t.is_attention_check]


@dataclass(frozen=True)
class Batch:
    batch_id: str
    emotion: Emotion
    tuples: tuple[TupleItem, ...]
    required_annotators: int


def _find_dup_slot(t: list[str]) -> int:
    seen: set[str] = set()
    for slot, w in enumerate(t):
        if w in seen:
            return slot
        seen.add(w)
    return -1


def _repair_duplicates(tuples: list[list[str]], rng: random.Random, max_passes: int = 200) -> bool:
    # Swap a duplicated word out to another tuple. A swap is accepted only if
    # the incoming word is new to this tuple and the outgoing word does not
    # duplicate in the other one, so total violations strictly decrease.
    for _ in range(max_passes):
        bad = [i for i, t in enumerate(tuples) if len(set(t)) < 4]
        if not bad:
            return True
        progressed = False
        for i in bad:
            t = tuples[i]
            dup_slot = _find_dup_slot(t)
            if dup_slot < 0:
                continue
            w = t[dup_slot]
            fixed = False
            for j in rng.sample(range(len(tuples)), len(tuples)):
                if j == i:
                    continue
                u = tuples[j]
                for s in rng.sample(range(4), 4):
                    v = u[s]
                    if v in t or w in u[:s] or w in u[s + 1:]:
                        continue
                    t[dup_slot], u[s] = v, w
                    fixed = True
                    break
                if fixed:
                    break
            progressed = progressed or fixed
        if not progressed:
            return False
    return all(len(set(t)) == 4 for t in tuples)


def _repair_collisions(tuples: list[list[str]], rng: random.Random, max_passes: int = 200) -> bool:
    # Break ordered-sequence collisions, preserving within-tuple distinctness.
    # A swap is accepted only if both touched tuples end up globally unique.
    counts = Counter(tuple(t) for t in tuples)
    for _ in range(max_passes):
        colliding = [i for i, t in enumerate(tuples) if counts[tuple(t)] > 1]
        if not colliding:
            return True
        progressed = False
        for i in colliding:
            t = tuples[i]
            old_t = tuple(t)
            if counts[old_t] <= 1:
                continue
            fixed = False
            for s in rng.sample(range(4), 4):
                w = t[s]
                for j in rng.sample(range(len(tuples)), len(tuples)):
                    if j == i:
                        continue
                    u = tuples[j]
                    for s2 in rng.sample(range(4), 4):
                        v = u[s2]
                        if v in t or w in u[:s2] or w in u[s2 + 1:]:
                            continue
                        old_u = tuple(u)
                        t[s], u[s2] = v, w
                        new_t, new_u = tuple(t), tuple(u)
                        counts[old_t] -= 1
                        counts[old_u] -= 1
                        counts[new_t] += 1
                        counts[new_u] += 1
                        if counts[new_t] == 1 and counts[new_u] == 1:
                            fixed = True
                            break
                        counts[new_t] -= 1
                        counts[new_u] -= 1
                        counts[old_t] += 1
                        counts[old_u] += 1
                        t[s], u[s2] = w, v
                    if fixed:
                        break
                if fixed:
                    break
            progressed = progressed or fixed
        if not progressed:
            return False
    return not any(c > 1 for c in counts.values())


def _try_build(words: Sequence[str], rng: random.Random) -> Optional[list[list[str]]]:
    pool = list(words) * OCCURRENCES_PER_WORD
    rng.shuffle(pool)
    tuples = [pool[i:i + 4] for i in range(0, len(pool), 4)]
    if not _repair_duplicates(tuples, rng):
        return None
    if not _repair_collisions(tuples, rng):
        return None
    return tuples


def generate_design(
    words: Sequence[str],
    emotions: Iterable[Emotion] = EMOTIONS,
    seed: int = 0,
    annotators_per_tuple: int = DEFAULT_ANNOTATORS_PER_TUPLE,
) -> StudyDesign:
    """Build a design with 2N distinct 4-tuples per emotion, each word in 8."""
    words = list(words)
    n = len(words)
    if n < 5:
        raise ValueError(f"need at least 5 words, got {n}")
    if len(set(words)) != n:
        raise ValueError("word ids must be unique")
    per_emotion: dict[Emotion, list[TupleItem]] = {}
    for emotion in emotions:
        # String seeds hash deterministically across processes; tuples do not.
        rng = random.Random(f"{seed}:{emotion.value}:design")
        built = None
        for _ in range(RESTART_BUDGET):
            built = _try_build(words, rng)
            if built is not None:
                break
        if built is None:
            raise DesignInfeasibleError(seed, n)
        per_emotion[emotion] = [
            TupleItem(
                tuple_id=f"{emotion.value}-{idx:04d}",
                emotion=emotion,
                words=tuple(t),
            )
            for idx, t in enumerate(built)
        ]
    return StudyDesign(
        emotions=per_emotion,
        words=words,
        annotators_per_tuple=annotators_per_tuple,
        seed=seed,
    )


def make_attention_check(
    emotion: Emotion,
    neutral: Sequence[str],
    related: str,
    opposite: str,
    seed: int = 0,
    tuple_id: Optional[str] = None,
) -> TupleItem:
    """Check tuple: 2 neutral words, one clearly related, one clearly opposite."""
    if len(neutral) != 2:
        raise ValueError("exactly 2 neutral words required")
    words = [neutral[0], neutral[1], related, opposite]
    if len(set(words)) != 4:
        raise ValueError("attention-check words must be distinct")
    rng = random.Random(f"{seed}:{emotion.value}:check")
    rng.shuffle(words)
    return TupleItem(
        tuple_id=tuple_id or f"{emotion.value}-check",
        emotion=emotion,
        words=tuple(words),
        is_attention_check=True,
        check_key=CheckKey(best_expected=related, worst_expected=opposite),
    )


# Default attention-check vocabulary: two neutral everyday objects plus a
# clearly related and a clearly opposite real word per emotion.
DEFAULT_CHECK_WORDS: dict[Emotion, tuple[tuple[str, str], str, str]] = {
    Emotion.JOY: (("door", "elbow"), "happiness", "depression"),
    Emotion.SADNESS: (("table", "pencil"), "grief", "delight"),
    Emotion.ANGER: (("window", "spoon"), "rage", "serenity"),
    Emotion.DISGUST: (("chair", "ladder"), "nausea", "delicious"),
    Emotion.FEAR: (("carpet", "button"), "terror", "safety"),
    Emotion.SURPRISE: (("bottle", "fence"), "astonishment", "routine"),
}


def default_attention_check(emotion: Emotion, seed: int = 0, tuple_id: Optional[str] = None) -> TupleItem:
    neutral, related, opposite = DEFAULT_CHECK_WORDS[emotion]
    return make_attention_check(emotion, neutral, related, opposite, seed=seed, tuple_id=tuple_id)


def attach_default_checks(design: StudyDesign) -> StudyDesign:
    """Append one default attention-check tuple per emotion to a design."""
    emotions = {}
    for emotion, tuples in design.emotions.items():
        check = default_attention_check(emotion, seed=design.seed)
        emotions[emotion] = list(tuples) + [check]
    return StudyDesign(
        emotions=emotions,
        words=design.words,
        annotators_per_tuple=design.annotators_per_tuple,
        seed=design.seed,
    )


def batch_design(design: StudyDesign, tuples_per_batch: int) -> list[Batch]:
    """Partition each emotion's non-check tuples into batches, one check per batch."""
    if tuples_per_batch < 1:
        raise ValueError("tuples_per_batch must be >= 1")
    batches: list[Batch] = []
    for emotion in design.emotions:
        real = design.real_tuples(emotion)
        checks = design.check_tuples(emotion)
        if not checks:
            checks = [default_attention_check(emotion, seed=design.seed)]
        n_batches = (len(real) + tuples_per_batch - 1) // tuples_per_batch
        for b in range(n_batches):
            chunk = real[b * tuples_per_batch:(b + 1) * tuples_per_batch]
            check = checks[b % len(checks)]
            # insert the check at a seeded position so it is not always last
            rng = random.Random(f"{design.seed}:{emotion.value}:batch:{b}")
            position = rng.randint(0, len(chunk))
            with_check = list(chunk)
            with_check.insert(position, check)
            batches.append(Batch(
                batch_id=f"{emotion.value}-batch-{b:03d}",
                emotion=emotion,
                tuples=tuple(with_check),
                required_annotators=design.annotators_per_tuple,
            ))
    return batches


def validate_design(design: StudyDesign) -> None:
    """Raise ValueError unless the design satisfies the BWS invariants."""
    if design.annotators_per_tuple < 1:
        raise ValueError("annotators_per_tuple must be >= 1")
    n = len(design.words)
    expected = set(design.words)
    for emotion in design.emotions:
        real = design.real_tuples(emotion)
        if len(real) != 2 * n:
            raise ValueError(
                f"{emotion.value}: expected {2 * n} tuples, found {len(real)}")
        counts = Counter(w for t in real for w in t.words)
        if set(counts) != expected:
            raise ValueError(f"{emotion.value}: tuple words do not match the design words")
        bad = sorted(w for w, c in counts.items() if c != OCCURRENCES_PER_WORD)
        if bad:
            raise ValueError(
                f"{emotion.value}: {bad[0]!r} appears {counts[bad[0]]} times, "
                f"expected {OCCURRENCES_PER_WORD}")
        ordered = Counter(t.words for t in real)
        dup = sorted(k for k, c in ordered.items() if c > 1)
        if dup:
            raise ValueError(f"{emotion.value}: duplicate ordered tuple {dup[0]}")


def design_to_dict(design: StudyDesign) -> dict:
    return {
        "seed": design.seed,
        "annotators_per_tuple": design.annotators_per_tuple,
        "emotions": [
            {
                "emotion": emotion.value,
                "tuples": [
                    {
                        "tuple_id": t.tuple_id,
                        "words": list(t.words),
                        "is_attention_check": t.is_attention_check,
                        **(
                            {
                                "check_key": {
                                    "best_expected": t.check_key.best_expected,
                                    "worst_expected": t.check_key.worst_expected,
                                }
                            }
                            if t.check_key is not None
                            else {}
                        ),
                    }
                    for t in tuples
                ],
            }
            for emotion, tuples in design.emotions.items()
        ],
    }


def design_from_dict(doc: dict) -> StudyDesign:
    emotions: dict[Emotion, list[TupleItem]] = {}
    seen_words: set[str] = set()
    for block in doc["emotions"]:
        emotion = Emotion(block["emotion"])
        tuples = []
        for t in block["tuples"]:
            key = t.get("check_key")
            item = TupleItem(
                tuple_id=t["tuple_id"],
                emotion=emotion,
                words=tuple(t["words"]),
                is_attention_check=t["is_attention_check"],
                check_key=CheckKey(**key) if key else None,
            )
            tuples.append(item)
            if not item.is_attention_check:
                seen_words.update(item.words)
        emotions[emotion] = tuples
    # The wire format does not carry word order, so reload it sorted.
    return StudyDesign(
        emotions=emotions,
        words=sorted(seen_words),
        annotators_per_tuple=doc["annotators_per_tuple"],
        seed=doc["seed"],
    )


def save_design(design: StudyDesign, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(design_to_dict(design), fh, indent=2)
        fh.write("\n")


def load_design(path: str | Path) -> StudyDesign:
    with open(path, encoding="utf-8") as fh:
        return design_from_dict(json.load(fh))
