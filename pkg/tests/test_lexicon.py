"""Lexicon data model and file-format tests."""

import pytest

from bwslex.lexicon import (
    EMOTIONS,
    Emotion,
    LexiconFormatError,
    load_cmudict,
    load_eil,
    load_embedded_lexicon,
    load_lexicon,
    save_lexicon,
    top_k,
)

HEADER = "IDs,Word,ARPA Pron,Real,Joy,Sadness,Anger,Disgust,Fear,Surprise"


def write_lexicon(tmp_path, rows, name="lex.csv"):
    path = tmp_path / name
    path.write_text("\n".join([HEADER, *rows]) + "\n")
    return path


def test_emotion_order_is_fixed():
    assert [e.value for e in EMOTIONS] == [
        "joy", "sadness", "anger", "disgust", "fear", "surprise",
    ]


def test_load_lexicon_known_rows(tmp_path):
    path = write_lexicon(tmp_path, [
        "0,afraid,ah f r ey d,1,0.3125,0.8333,0.3333,0.1875,0.6875,0.3333",
        "5,bange,b ae n jh,0,0.375,0.4375,0.6458,0.6042,0.7917,0.75",
    ])
    lex = load_lexicon(path)
    assert len(lex) == 2
    afraid = lex.by_word("afraid")
    assert afraid.is_real
    assert afraid.pron == ("ah", "f", "r", "ey", "d")
    assert afraid.intensity[Emotion.SADNESS] == pytest.approx(0.8333)
    bange = lex.by_word("bange")
    assert not bange.is_real
    assert bange.intensity[Emotion.FEAR] == pytest.approx(0.7917)


def test_load_lexicon_rejects_out_of_range(tmp_path):
    path = write_lexicon(tmp_path, [
        "0,aaa,ah,0,1.2,0.1,0.1,0.1,0.1,0.1",
    ])
    with pytest.raises(LexiconFormatError) as exc:
        load_lexicon(path)
    assert exc.value.row == 2


def test_load_lexicon_rejects_bad_shape(tmp_path):
    path = write_lexicon(tmp_path, ["0,aaa,ah,0,0.5,0.5"])
    with pytest.raises(LexiconFormatError, match="columns"):
        load_lexicon(path)

    path = write_lexicon(tmp_path, [
        "0,aaa,qx zz,0,0.5,0.5,0.5,0.5,0.5,0.5",
    ], name="badphone.csv")
    with pytest.raises(LexiconFormatError, match="phoneme"):
        load_lexicon(path)

    path = write_lexicon(tmp_path, [
        "0,,ah,0,0.5,0.5,0.5,0.5,0.5,0.5",
    ], name="noword.csv")
    with pytest.raises(LexiconFormatError):
        load_lexicon(path)


def test_round_trip(tmp_path):
    lex = load_embedded_lexicon()
    out = tmp_path / "roundtrip.csv"
    save_lexicon(lex, out)
    again = load_lexicon(out)
    assert again.entries == lex.entries


def test_embedded_fixture_counts():
    lex = load_embedded_lexicon()
    assert len(lex) == 340
    real = sum(1 for e in lex if e.is_real)
    assert real == 68
    assert len(lex) - real == 272
    for e in lex:
        for emo in EMOTIONS:
            assert 0.0 <= e.intensity[emo] <= 1.0


def test_top_k_known_values():
    lex = load_embedded_lexicon()
    assert top_k(lex, Emotion.FEAR, 1, nonsense_only=True) == [("phrouth", 1.0)]
    joy2 = top_k(lex, Emotion.JOY, 2, nonsense_only=True)
    assert [w for w, _ in joy2] == ["juy", "flike"]
    assert joy2[0][1] == pytest.approx(0.958, abs=5e-4)
    assert joy2[1][1] == pytest.approx(0.938, abs=5e-4)


def test_top_k_alphabetical_ties(tmp_path):
    rows = [
        f"{i},{w},ah,0,0.5,0.5,0.5,0.5,0.5,0.5"
        for i, w in enumerate(["zeta", "alpha", "mid"])
    ]
    lex = load_lexicon(write_lexicon(tmp_path, rows))
    assert [w for w, _ in top_k(lex, Emotion.JOY, 3, False)] == ["alpha", "mid", "zeta"]
    with pytest.raises(ValueError):
        top_k(lex, Emotion.JOY, 0, False)


def test_load_eil(tmp_path):
    path = tmp_path / "eil.tsv"
    path.write_text(
        "outraged\tanger\t0.964\n"
        "calm\tanticipation\t0.3\n"
        "happy\tjoy\t0.9\n"
    )
    res = load_eil(path)
    assert len(res.entries) == 2
    assert res.skipped_emotions == 1
    assert res.entries[0].word == "outraged"
    assert res.entries[0].emotion is Emotion.ANGER
    assert res.entries[0].score == pytest.approx(0.964)


def test_load_eil_empty_and_errors(tmp_path):
    empty = tmp_path / "empty.tsv"
    empty.write_text("")
    assert load_eil(empty).entries == []

    bad_score = tmp_path / "bad.tsv"
    bad_score.write_text("word\tjoy\tnotanumber\n")
    with pytest.raises(ValueError, match="non-numeric"):
        load_eil(bad_score)

    out_of_range = tmp_path / "range.tsv"
    out_of_range.write_text("word\tjoy\t1.5\n")
    with pytest.raises(ValueError, match="outside"):
        load_eil(out_of_range)

    dup = tmp_path / "dup.tsv"
    dup.write_text("word\tjoy\t0.5\nword\tjoy\t0.6\n")
    with pytest.raises(ValueError, match="duplicate"):
        load_eil(dup)


def test_load_cmudict(tmp_path):
    path = tmp_path / "cmudict.txt"
    path.write_text(
        ";;; comment line\n"
        "AFRAID  AH0 F R EY1 D\n"
        "HOUSES  HH AW1 Z AH0 Z\n"
        "HOUSES(2)  HH AW1 Z IH0 Z\n"
        "BROKEN-LINE\n"
    )
    prons = load_cmudict(path)
    assert prons["afraid"] == ("ah", "f", "r", "ey", "d")
    assert prons["houses"] == ("hh", "aw", "z", "ah", "z")
    assert len(prons) == 2
