"""Command-line pipeline: design, simulated annotation, aggregation and
reliability reports, phoneme/density analyses, model training, and the
live annotation server.

Every stochastic subcommand requires an explicit --seed; nothing is ever
seeded from the clock. Invalid input exits nonzero with a one-line message.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from pathlib import Path

from .design import attach_default_checks, generate_design, load_design, save_design
from .lexicon import (
    Emotion,
    load_cmudict,
    load_eil,
    load_embedded_lexicon,
    load_lexicon,
    top_k,
)
from .regress import (
    EVAL_HEADER,
    FeatureSpec,
    InputRep,
    NgramIntensityRegressor,
    run_experiment,
    save_model,
    write_eval_reports,
)
from .phonology import (
    DEFAULT_PHONEMES,
    phoneme_emotion_tests,
    write_boxplot_csv,
    write_density_csv,
    write_phoneme_report,
)
from .scoring import (
    aggregate,
    export_scores_csv,
    filter_annotators,
    load_judgments,
    reliability_report,
    save_judgments,
)
from .simulate import simulate_judgments, truth_from_lexicon

_REP_NAMES = {"char": "characters", "phon": "phonemes"}


def _read_words(path: str) -> list[str]:
    words = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                words.append(line)
    if not words:
        raise ValueError(f"{path}: no words found")
    return words


def _parse_emotions(text: str) -> list[Emotion]:
    return [Emotion(part.strip()) for part in text.split(",") if part.strip()]


def _has_word(lex, word: str) -> bool:
    try:
        lex.by_word(word)
        return True
    except KeyError:
        return False


def cmd_design(args) -> int:
    words = _read_words(args.words)
    design = generate_design(
        words,
        emotions=_parse_emotions(args.emotions),
        seed=args.seed,
        annotators_per_tuple=args.annotators,
    )
    if not args.no_checks:
        design = attach_default_checks(design)
    save_design(design, args.out)
    return 0


def cmd_simulate(args) -> int:
    design = load_design(args.design)
    lex = load_lexicon(args.lexicon) if args.lexicon else load_embedded_lexicon()
    missing = [w for w in design.words if not _has_word(lex, w)]
    if missing:
        raise ValueError(
            f"lexicon does not cover {len(missing)} design word(s), first: {missing[0]!r}")
    truth = truth_from_lexicon(lex, design.words)
    judgments = simulate_judgments(
        design, truth, sigma=args.sigma, failure_rate=args.failure_rate, seed=args.seed)
    save_judgments(judgments, args.out)
    return 0


def cmd_aggregate(args) -> int:
    design = load_design(args.design)
    judgments = load_judgments(args.judgments)
    result = filter_annotators(judgments, design)
    tables = {
        e: aggregate([j for j in result.kept if j.emotion is e], design, e)
        for e in design.emotions
    }
    prons = real_flags = None
    if args.lexicon:
        lex = load_lexicon(args.lexicon)
        prons = {e.word: e.pron for e in lex}
        real_flags = {e.word: e.is_real for e in lex}
    export_scores_csv(tables, args.out, prons=prons, real_flags=real_flags)
    print(f"kept {len(result.kept)} judgments, "
          f"discarded {len(result.discarded_annotators)} annotator(s)", file=sys.stderr)
    return 0


def cmd_reliability(args) -> int:
    design = load_design(args.design)
    judgments = load_judgments(args.judgments)
    kept = filter_annotators(judgments, design).kept
    report = reliability_report(
        kept, design, emotions=list(design.emotions),
        iterations=args.iterations, seed=args.seed)
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["emotion", "spearman", "pearson", "skipped_iterations"])
        for emotion, row in report.per_emotion.items():
            writer.writerow([emotion.value, f"{row.spearman:.6f}",
                             f"{row.pearson:.6f}", row.skipped_iterations])
    finally:
        if args.out:
            out.close()
    return 0


def cmd_phonemes(args) -> int:
    lex = load_lexicon(args.lexicon) if args.lexicon else load_embedded_lexicon()
    phonemes = [p.strip() for p in args.phonemes.split(",") if p.strip()]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_phoneme_report(phoneme_emotion_tests(lex, phonemes), out_dir / "phoneme_tests.csv")
    write_boxplot_csv(lex, out_dir / "phoneme_boxplots.csv", phonemes)
    return 0


def cmd_density(args) -> int:
    lex = load_lexicon(args.lexicon) if args.lexicon else load_embedded_lexicon()
    write_density_csv(lex, args.out)
    return 0


def _load_domains(args, need_real: bool, need_pron: bool):
    lex = load_lexicon(args.nonsense) if args.nonsense else load_embedded_lexicon()
    eil = prons = None
    if need_real:
        if not args.eil:
            raise ValueError("--eil is required for the real-word domain")
        eil = load_eil(args.eil).entries
        if need_pron:
            if not args.cmudict:
                raise ValueError("--cmudict is required for phoneme features on real words")
            prons = load_cmudict(args.cmudict)
    return lex, eil, prons


def cmd_train(args) -> int:
    rep = _REP_NAMES[args.rep]
    need_pron = rep == "phonemes"
    lex, eil, prons = _load_domains(args, args.train_domain == "real", need_pron)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for emotion in Emotion:
        if args.train_domain == "nonsense":
            items = [(e.word, e.pron, e.intensity[emotion]) for e in lex if not e.is_real]
        else:
            items = []
            for entry in eil:
                if entry.emotion is not emotion:
                    continue
                pron = prons.get(entry.word) if prons else None
                if need_pron and pron is None:
                    continue
                items.append((entry.word, pron, entry.score))
        model = NgramIntensityRegressor(rep=rep, ngram=args.ngram, seed=args.seed)
        model.fit([(w, p) for w, p, _ in items], [y for _, _, y in items])
        path = out_dir / f"{emotion.value}-{args.rep}-{args.ngram}gram.json"
        save_model(model, emotion, path)
        print(f"{emotion.value}: {len(items)} words -> {path}", file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    rep = _REP_NAMES[args.rep]
    need_real = "real" in (args.train_domain, args.test_domain)
    lex, eil, prons = _load_domains(args, need_real, rep == "phonemes")
    spec = FeatureSpec(rep=InputRep(rep), ngram=args.ngram)
    report = run_experiment(
        lex, eil, spec, args.train_domain, args.test_domain,
        seed=args.seed, prons=prons)
    write_eval_reports([report], args.out)
    macro = report.macro_r
    print(f"macro r: {'undefined' if macro is None else f'{macro:.4f}'}", file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    listen = args.listen or os.environ.get("BWSLEX_LISTEN") or "127.0.0.1:8000"
    data_dir = args.data or os.environ.get("BWSLEX_DATA")
    if not data_dir:
        raise ValueError("--data (or BWSLEX_DATA) is required")
    host, _, port_text = listen.rpartition(":")
    host = host or "127.0.0.1"
    try:
        port = int(port_text)
    except ValueError:
        raise ValueError(f"invalid listen address {listen!r}, expected host:port")

    with open(args.design, encoding="utf-8") as fh:
        doc = json.load(fh)
    digest = hashlib.sha256(
        json.dumps(doc, sort_keys=True).encode("utf-8")).hexdigest()[:16]
    app = create_app(data_dir)
    info = app.state.store.create_study({
        "design": doc,
        "tuples_per_batch": args.tuples_per_batch,
        "idempotency_key": f"serve:{digest}",
    })
    print(f"study {info['study_id']}: {info['batches']} batches, "
          f"{info['slots']} annotator slots")
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


def cmd_top(args) -> int:
    lex = load_lexicon(args.lexicon) if args.lexicon else load_embedded_lexicon()
    for word, value in top_k(lex, Emotion(args.emotion), args.k, nonsense_only=True):
        print(f"{word} {value:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bwslex")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="generate a BWS study design")
    p.add_argument("--words", required=True, help="text file, one word per line")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--emotions", default="joy,sadness,anger,disgust,fear,surprise")
    p.add_argument("--annotators", type=int, default=3)
    p.add_argument("--no-checks", action="store_true",
                   help="skip the default attention-check tuples")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("simulate", help="simulated annotators over a design")
    p.add_argument("--design", required=True)
    p.add_argument("--lexicon", help="lexicon CSV supplying ground truth, defaults to embedded")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--failure-rate", type=float, default=0.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("aggregate", help="filter judgments and score words")
    p.add_argument("--design", required=True)
    p.add_argument("--judgments", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lexicon", help="optional lexicon for pronunciation/Real columns")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("reliability", help="split-half reliability report")
    p.add_argument("--design", required=True)
    p.add_argument("--judgments", required=True)
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_reliability)

    p = sub.add_parser("phonemes", help="per-phoneme emotion comparison report")
    p.add_argument("--lexicon", help="defaults to the embedded lexicon")
    p.add_argument("--phonemes", default=",".join(DEFAULT_PHONEMES))
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_phonemes)

    p = sub.add_parser("density", help="intensity density curves per emotion")
    p.add_argument("--lexicon", help="defaults to the embedded lexicon")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_density)

    for name, handler in (("train", cmd_train), ("eval", cmd_eval)):
        p = sub.add_parser(name, help=f"{name} n-gram intensity models")
        p.add_argument("--nonsense", help="nonsense lexicon CSV, defaults to embedded")
        p.add_argument("--eil", help="real-word intensity lexicon TSV")
        p.add_argument("--cmudict", help="pronouncing dictionary file")
        p.add_argument("--rep", choices=sorted(_REP_NAMES), required=True)
        p.add_argument("--ngram", type=int, choices=(1, 2, 3), required=True)
        p.add_argument("--train-domain", choices=("nonsense", "real"), required=True)
        p.add_argument("--seed", type=int, required=True)
        if name == "train":
            p.add_argument("--out-dir", required=True)
        else:
            p.add_argument("--test-domain", choices=("nonsense", "real"), required=True)
            p.add_argument("--out", required=True)
        p.set_defaults(func=handler)

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("--design", required=True)
    p.add_argument("--listen", help="host:port, default 127.0.0.1:8000")
    p.add_argument("--data", help="data directory for study logs")
    p.add_argument("--tuples-per-batch", type=int, default=20)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("top", help="highest-intensity words for an emotion")
    p.add_argument("--lexicon", help="defaults to the embedded lexicon")
    p.add_argument("--emotion", required=True)
    p.add_argument("--k", type=int, default=10)
    p.set_defaults(func=cmd_top)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
