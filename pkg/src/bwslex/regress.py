"""Per-emotion intensity regression over character or phoneme n-gram counts.

Linear models trained by full-batch gradient descent, one per emotion, with
the four train/test domain combinations (nonsense/real crossed) evaluated by
Pearson r. Feature counts are scaled per feature to their training maximum
during optimization; the learned weights are folded back into raw count
space, so prediction is a plain dot product over n-gram counts.
"""

from __future__ import annotations

import csv
import json
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import stats
from .lexicon import EMOTIONS, EilEntry, Emotion, Lexicon

DEFAULT_MAX_LEN = 16
DEFAULT_LEARNING_RATE = 0.1
DEFAULT_L2 = 1e-3
DEFAULT_EPOCHS = 200

NONSENSE_TRAIN = 204
NONSENSE_TEST = 68

START_MARK = "^"
END_MARK = "$"


class InputRep(Enum):
    CHARACTERS = "characters"
    PHONEMES = "phonemes"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class FeatureSpec:
    rep: InputRep
    ngram: int
    max_len: int = DEFAULT_MAX_LEN
    boundary_markers: bool = True

    def __post_init__(self):
        if self.ngram not in (1, 2, 3):
            raise ValueError(f"ngram must be 1, 2 or 3, got {self.ngram}")
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")


def _tokens(word: str, pron: Optional[Sequence[str]], spec: FeatureSpec) -> list[str]:
    if spec.rep is InputRep.CHARACTERS:
        seq = list(word)
    else:
        if pron is None:
            raise ValueError(f"no pronunciation available for {word!r}")
        seq = list(pron)
    if not seq:
        raise ValueError(f"empty token sequence for {word!r}")
    return seq[:spec.max_len]


def featurize(word: str, pron: Optional[Sequence[str]], spec: FeatureSpec) -> dict[str, int]:
    """n-gram counts of the (truncated, optionally sentinel-wrapped) sequence."""
    seq = _tokens(word, pron, spec)
    if spec.boundary_markers:
        seq = [START_MARK, *seq, END_MARK]
    joiner = "" if spec.rep is InputRep.CHARACTERS else " "
    counts: dict[str, int] = {}
    for i in range(len(seq) - spec.ngram + 1):
        gram = joiner.join(seq[i:i + spec.ngram])
        counts[gram] = counts.get(gram, 0) + 1
    return counts


def _as_item(x) -> tuple[str, Optional[tuple[str, ...]]]:
    if isinstance(x, str):
        return x, None
    if isinstance(x, tuple):
        return x
    return x.word, x.pron  # LexEntry and friends


class NgramIntensityRegressor:
    """Linear n-gram regressor with a fit/predict/get_params estimator surface.

    X items may be plain words, (word, pron) pairs, or lexicon entries.
    Predictions are clamped to [0,1].
    """

    def __init__(self, rep="characters", ngram=2, max_len=DEFAULT_MAX_LEN,
                 boundary_markers=True, learning_rate=DEFAULT_LEARNING_RATE,
                 l2=DEFAULT_L2, epochs=DEFAULT_EPOCHS, seed=0):
        self.rep = rep
        self.ngram = ngram
        self.max_len = max_len
        self.boundary_markers = boundary_markers
        self.learning_rate = learning_rate
        self.l2 = l2
        self.epochs = epochs
        self.seed = seed

    def get_params(self, deep=True):
        return {
            "rep": self.rep, "ngram": self.ngram, "max_len": self.max_len,
            "boundary_markers": self.boundary_markers,
            "learning_rate": self.learning_rate, "l2": self.l2,
            "epochs": self.epochs, "seed": self.seed,
        }

    def set_params(self, **params):
        valid = self.get_params()
        for key, value in params.items():
            if key not in valid:
                raise ValueError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    @property
    def spec(self) -> FeatureSpec:
        return FeatureSpec(
            rep=InputRep(self.rep), ngram=self.ngram,
            max_len=self.max_len, boundary_markers=self.boundary_markers,
        )

    def fit(self, X, y):
        items = [_as_item(x) for x in X]
        targets = [float(v) for v in y]
        if len(items) != len(targets):
            raise ValueError("X and y length mismatch")
        if len(items) < 10:
            raise ValueError("need at least 10 training items")
        spec = self.spec

        # vocabulary in first-seen order over a seed-shuffled pass
        order = list(range(len(items)))
        random.Random(f"{self.seed}:vocab").shuffle(order)
        vocab: dict[str, int] = {}
        featurized = [featurize(w, p, spec) for w, p in items]
        for idx in order:
            for gram in featurized[idx]:
                if gram not in vocab:
                    vocab[gram] = len(vocab)

        n, f = len(items), len(vocab)
        X_mat = np.zeros((n, f))
        for i, counts in enumerate(featurized):
            for gram, c in counts.items():
                X_mat[i, vocab[gram]] = c
        y_vec = np.asarray(targets)

        # scale counts to [0,1] per feature so the fixed learning rate is stable
        scale = X_mat.max(axis=0)
        scale[scale == 0] = 1.0
        X_scaled = X_mat / scale

        w = np.zeros(f)
        b = float(y_vec.mean())
        lr = self.learning_rate
        for _ in range(self.epochs):
            resid = X_scaled @ w + b - y_vec
            grad_w = X_scaled.T @ resid / n + self.l2 * w
            grad_b = float(resid.mean())
            w -= lr * grad_w
            b -= lr * grad_b

        self.vocabulary_ = vocab
        self.weights_ = w / scale  # raw count space
        self.bias_ = b
        return self

    def decision_function(self, X):
        """Unclamped linear scores."""
        if not hasattr(self, "weights_"):
            raise ValueError("model is not fitted")
        spec = self.spec
        out = []
        for x in X:
            word, pron = _as_item(x)
            counts = featurize(word, pron, spec)
            score = self.bias_
            for gram, c in counts.items():
                idx = self.vocabulary_.get(gram)
                if idx is not None:
                    score += self.weights_[idx] * c
            out.append(float(score))
        return out

    def predict(self, X):
        return [min(1.0, max(0.0, s)) for s in self.decision_function(X)]


def save_model(model: NgramIntensityRegressor, emotion: Emotion, path: str | Path) -> None:
    doc = {
        "spec": {
            "rep": model.rep, "ngram": model.ngram,
            "max_len": model.max_len, "boundary_markers": model.boundary_markers,
        },
        "emotion": emotion.value,
        "vocabulary": model.vocabulary_,
        "weights": [float(v) for v in model.weights_],
        "bias": model.bias_,
        "hyper": {
            "learning_rate": model.learning_rate, "l2": model.l2,
            "epochs": model.epochs, "seed": model.seed,
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path: str | Path) -> tuple[NgramIntensityRegressor, Emotion]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    model = NgramIntensityRegressor(
        rep=doc["spec"]["rep"], ngram=doc["spec"]["ngram"],
        max_len=doc["spec"]["max_len"], boundary_markers=doc["spec"]["boundary_markers"],
        **doc["hyper"],
    )
    if len(doc["weights"]) != len(doc["vocabulary"]):
        raise ValueError("weights/vocabulary size mismatch")
    model.vocabulary_ = doc["vocabulary"]
    model.weights_ = np.asarray(doc["weights"])
    model.bias_ = doc["bias"]
    return model, Emotion(doc["emotion"])


@dataclass(frozen=True)
class EvalRow:
    r: Optional[float]
    n_train: int
    n_test: int


@dataclass
class EvalReport:
    train_domain: str
    test_domain: str
    spec: FeatureSpec
    seed: int
    per_emotion: dict[Emotion, EvalRow]
    excluded_real_words: int = 0

    @property
    def undefined_emotions(self) -> list[Emotion]:
        return [e for e, row in self.per_emotion.items() if row.r is None]

    @property
    def macro_r(self) -> Optional[float]:
        defined = [row.r for row in self.per_emotion.values() if row.r is not None]
        if not defined:
            return None
        return sum(defined) / len(defined)


def _split(items: list, n_train: int, rng: random.Random) -> tuple[list, list]:
    order = list(range(len(items)))
    rng.shuffle(order)
    train_idx = set(order[:n_train])
    train = [items[i] for i in sorted(train_idx)]
    test = [items[i] for i in sorted(set(order) - train_idx)]
    return train, test


def _nonsense_pool(lex: Lexicon, emotion: Emotion) -> list[tuple[str, Optional[tuple[str, ...]], float]]:
    return [
        (e.word, e.pron, e.intensity[emotion])
        for e in lex if not e.is_real
    ]


def _real_pool(
    eil: Sequence[EilEntry],
    emotion: Emotion,
    prons: Optional[dict[str, tuple[str, ...]]],
    need_pron: bool,
) -> tuple[list[tuple[str, Optional[tuple[str, ...]], float]], int]:
    pool = []
    excluded = 0
    for entry in eil:
        if entry.emotion is not emotion:
            continue
        pron = prons.get(entry.word) if prons else None
        if need_pron and pron is None:
            excluded += 1
            continue
        pool.append((entry.word, pron, entry.score))
    return pool, excluded


def run_experiment(
    nonsense: Lexicon,
    real: Optional[Sequence[EilEntry]],
    spec: FeatureSpec,
    train_domain: str,
    test_domain: str,
    seed: int = 0,
    prons: Optional[dict[str, tuple[str, ...]]] = None,
    hyper: Optional[dict] = None,
) -> EvalReport:
    """Train per-emotion models on one domain's train split, evaluate on another's test split."""
    for d in (train_domain, test_domain):
        if d not in ("nonsense", "real"):
            raise ValueError(f"unknown domain {d!r}")
    if ("real" in (train_domain, test_domain)) and real is None:
        raise ValueError("real-domain evaluation requires EIL entries")
    need_pron = spec.rep is InputRep.PHONEMES
    hyper = hyper or {}

    # one shuffle for the nonsense domain (same words carry all six emotions)
    rng_nonsense = random.Random(f"{seed}:split:nonsense")
    nonsense_words = [e.word for e in nonsense if not e.is_real]
    n_total = len(nonsense_words)
    n_train = NONSENSE_TRAIN if n_total == NONSENSE_TRAIN + NONSENSE_TEST else round(0.75 * n_total)
    order = list(range(n_total))
    rng_nonsense.shuffle(order)
    nonsense_train_idx = set(order[:n_train])

    per_emotion: dict[Emotion, EvalRow] = {}
    excluded_total = 0
    for emotion in EMOTIONS:
        datasets = {}
        if "nonsense" in (train_domain, test_domain):
            pool = _nonsense_pool(nonsense, emotion)
            train = [pool[i] for i in sorted(nonsense_train_idx)]
            test = [pool[i] for i in range(n_total) if i not in nonsense_train_idx]
            datasets["nonsense"] = (train, test)
        if "real" in (train_domain, test_domain):
            pool, excluded = _real_pool(real, emotion, prons, need_pron)
            excluded_total += excluded
            rng_real = random.Random(f"{seed}:split:real:{emotion.value}")
            train, test = _split(pool, round(0.75 * len(pool)), rng_real)
            datasets["real"] = (train, test)

        train_set = datasets[train_domain][0]
        test_set = datasets[test_domain][1]
        if len(train_set) < 10 or len(test_set) < 3:
            per_emotion[emotion] = EvalRow(r=None, n_train=len(train_set), n_test=len(test_set))
            continue

        model = NgramIntensityRegressor(
            rep=spec.rep.value, ngram=spec.ngram, max_len=spec.max_len,
            boundary_markers=spec.boundary_markers, seed=seed, **hyper,
        )
        model.fit([(w, p) for w, p, _ in train_set], [t for _, _, t in train_set])
        preds = model.predict([(w, p) for w, p, _ in test_set])
        gold = [t for _, _, t in test_set]
        try:
            r = stats.pearson(preds, gold)
        except stats.UndefinedCorrelationError:
            r = None
        per_emotion[emotion] = EvalRow(r=r, n_train=len(train_set), n_test=len(test_set))

    return EvalReport(
        train_domain=train_domain, test_domain=test_domain, spec=spec,
        seed=seed, per_emotion=per_emotion, excluded_real_words=excluded_total,
    )


EVAL_HEADER = ["train_domain", "test_domain", "rep", "ngram", "emotion", "r", "n_train", "n_test"]


def write_eval_reports(reports: Sequence[EvalReport], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EVAL_HEADER)
        for report in reports:
            for emotion in EMOTIONS:
                row = report.per_emotion[emotion]
                writer.writerow([
                    report.train_domain, report.test_domain,
                    report.spec.rep.value, report.spec.ngram, emotion.value,
                    "" if row.r is None else repr(row.r),
                    row.n_train, row.n_test,
                ])
