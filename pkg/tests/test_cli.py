"""CLI tests: subcommand wiring, exit discipline, pipeline determinism."""

import csv

import pytest

from bwslex.cli import main
from bwslex.lexicon import Emotion, load_embedded_lexicon, save_lexicon
from bwslex.regress import load_model


@pytest.fixture(scope="module")
def lexicon_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("lex") / "lexicon.csv"
    save_lexicon(load_embedded_lexicon(), path)
    return path


@pytest.fixture(scope="module")
def words_file(tmp_path_factory):
    lex = load_embedded_lexicon()
    words = [e.word for e in lex if not e.is_real][:8]
    path = tmp_path_factory.mktemp("words") / "words.txt"
    path.write_text("\n".join(words) + "\n", encoding="utf-8")
    return path


def run_pipeline(tmp_path, lexicon_csv, words_file):
    tmp_path.mkdir(parents=True, exist_ok=True)
    design = tmp_path / "design.json"
    judgments = tmp_path / "judgments.csv"
    scores = tmp_path / "scores.csv"
    shr = tmp_path / "reliability.csv"
    assert main(["design", "--words", str(words_file), "--seed", "5",
                 "--out", str(design)]) == 0
    assert main(["simulate", "--design", str(design), "--lexicon", str(lexicon_csv),
                 "--sigma", "0.02", "--seed", "9", "--out", str(judgments)]) == 0
    assert main(["aggregate", "--design", str(design), "--judgments", str(judgments),
                 "--lexicon", str(lexicon_csv), "--out", str(scores)]) == 0
    assert main(["reliability", "--design", str(design), "--judgments", str(judgments),
                 "--seed", "3", "--out", str(shr)]) == 0
    return {p.name: p.read_bytes() for p in (design, judgments, scores, shr)}


def test_pipeline_reliability_and_determinism(tmp_path, lexicon_csv, words_file):
    first = run_pipeline(tmp_path / "a", lexicon_csv, words_file)

    rows = list(csv.DictReader((tmp_path / "a" / "reliability.csv").open()))
    assert {r["emotion"] for r in rows} == {e.value for e in Emotion}
    for r in rows:
        assert float(r["spearman"]) >= 0.85, r

    second = run_pipeline(tmp_path / "b", lexicon_csv, words_file)
    assert first == second  # byte-identical reruns under fixed seeds


def test_design_rejects_too_few_words(tmp_path, capsys):
    words = tmp_path / "w.txt"
    words.write_text("ab\ncd\nef\ngh\n", encoding="utf-8")
    code = main(["design", "--words", str(words), "--seed", "1",
                 "--out", str(tmp_path / "d.json")])
    assert code != 0
    err = capsys.readouterr().err
    assert err.startswith("error:")
    assert len(err.strip().splitlines()) == 1
    assert "at least 5 words" in err


def test_seed_is_mandatory_for_stochastic_commands(tmp_path, words_file):
    with pytest.raises(SystemExit) as exc:
        main(["design", "--words", str(words_file), "--out", str(tmp_path / "d.json")])
    assert exc.value.code == 2


def test_top_matches_fixture(capsys):
    assert main(["top", "--emotion", "fear", "--k", "1"]) == 0
    assert capsys.readouterr().out == "phrouth 1.0000\n"

    assert main(["top", "--emotion", "joy", "--k", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "juy 0.9583"
    assert len(lines) == 2


def test_top_rejects_unknown_emotion(capsys):
    assert main(["top", "--emotion", "boredom"]) != 0
    assert "error:" in capsys.readouterr().err


def test_phoneme_and_density_reports(tmp_path):
    out_dir = tmp_path / "reports"
    assert main(["phonemes", "--out-dir", str(out_dir), "--phonemes", "m,p"]) == 0
    tests_csv = list(csv.reader((out_dir / "phoneme_tests.csv").open()))
    assert tests_csv[0][:3] == ["phoneme", "position", "emotion_a"]
    assert len(tests_csv) > 1
    box_csv = list(csv.reader((out_dir / "phoneme_boxplots.csv").open()))
    assert box_csv[0][0] == "phoneme"

    density = tmp_path / "density.csv"
    assert main(["density", "--out", str(density)]) == 0
    rows = list(csv.reader(density.open()))
    assert rows[0] == ["emotion", "x", "density"]
    assert len(rows) == 1 + 6 * 101


def test_eval_and_train_commands(tmp_path):
    report = tmp_path / "eval.csv"
    assert main(["eval", "--rep", "char", "--ngram", "1",
                 "--train-domain", "nonsense", "--test-domain", "nonsense",
                 "--seed", "2", "--out", str(report)]) == 0
    rows = list(csv.DictReader(report.open()))
    assert len(rows) == 6
    assert {r["train_domain"] for r in rows} == {"nonsense"}
    for r in rows:
        assert r["n_train"] == "204" and r["n_test"] == "68"

    models = tmp_path / "models"
    assert main(["train", "--rep", "char", "--ngram", "1",
                 "--train-domain", "nonsense", "--seed", "2",
                 "--out-dir", str(models)]) == 0
    files = sorted(models.glob("*.json"))
    assert len(files) == 6
    model, emotion = load_model(files[0])
    assert emotion is Emotion.ANGER
    assert model.predict(["maut"]) is not None


def test_eval_requires_eil_for_real_domain(tmp_path, capsys):
    code = main(["eval", "--rep", "char", "--ngram", "2",
                 "--train-domain", "real", "--test-domain", "nonsense",
                 "--seed", "2", "--out", str(tmp_path / "r.csv")])
    assert code != 0
    assert "--eil is required" in capsys.readouterr().err


def test_serve_validates_arguments(tmp_path, capsys):
    design = tmp_path / "design.json"
    words = tmp_path / "w.txt"
    words.write_text("alpha\nbeta\ngamma\ndelta\nepsil\n", encoding="utf-8")
    assert main(["design", "--words", str(words), "--seed", "1",
                 "--out", str(design)]) == 0

    code = main(["serve", "--design", str(design), "--listen", "nowhere"])
    assert code != 0
    err = capsys.readouterr().err
    assert "--data" in err or "invalid listen" in err

    code = main(["serve", "--design", str(design), "--data", str(tmp_path / "d"),
                 "--listen", "badport"])
    assert code != 0
    assert "invalid listen" in capsys.readouterr().err
