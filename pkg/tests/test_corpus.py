import subprocess
import unicodedata

import pytest
import regex
from hypothesis import given, strategies as st

from corpusforge.corpus import (LANGUAGES, CorpusError, CorpusStats, IngestError,
                                LanguageTag, PairKind, ParallelPair, Source, SourceKind, count_tokens,
                                ingest, ingest_parallel, make_doc_id, parse_corpus_filename, pretokenize,
                                split_doc_id, write_shard)

from conftest import make_doc


# -- tags and records -------------------------------------------------------

def test_seventeen_languages():
    assert len(LANGUAGES) == 17 and len(set(LANGUAGES)) == 17


@pytest.mark.parametrize("text", ["xx", "HI", "hindi", "", "en-tr"])
def test_bad_language_tags_rejected(text):
    with pytest.raises(CorpusError):
        LanguageTag.parse(text)


def test_tag_round_trip():
    for code in LANGUAGES:
        tag = LanguageTag.parse(code)
        assert LanguageTag.parse(str(tag)) == tag
        if code != "en":
            tr = tag.as_transliterated()
            assert str(tr) == f"{code}-tr"
            assert tr.native() == tag


def test_doc_ids_pack_shard_and_line():
    assert make_doc_id(0, 2) == 2
    assert split_doc_id(make_doc_id(7, 11)) == (7, 11)
    with pytest.raises(CorpusError):
        make_doc_id(-1, 0)


def test_document_text_must_be_normalized():
    with pytest.raises(CorpusError):
        make_doc("   ")
    with pytest.raises(CorpusError):
        make_doc(" padded ")
    with pytest.raises(CorpusError):
        make_doc("\u0928\u093c")  # NA + NUKTA composes to NNNA under NFC


def test_parallel_pair_invariants():
    src = make_doc("नमस्ते")
    with pytest.raises(CorpusError):
        ParallelPair(src, make_doc("hello", "bn"), PairKind.TRANSLATED)
    ParallelPair(src, make_doc("hello", "en"), PairKind.TRANSLATED)
    with pytest.raises(CorpusError):
        ParallelPair(src, make_doc("नमस्ते", "hi-tr"), PairKind.TRANSLITERATED)
    with pytest.raises(CorpusError):
        ParallelPair(src, make_doc("namaste", "hi"), PairKind.TRANSLITERATED)
    ParallelPair(src, make_doc("namaste.", "hi-tr"), PairKind.TRANSLITERATED)


def test_filename_pattern():
    assert parse_corpus_filename("x/hi.wikipedia.txt") == (LanguageTag("hi"), SourceKind(Source.WIKIPEDIA))
    lang, source = parse_corpus_filename("bn-tr.crawl.shard")
    assert lang == LanguageTag("bn", True) and source.kind is Source.CRAWL
    with pytest.raises(CorpusError):
        parse_corpus_filename("hindi.txt")


# -- ingest -----------------------------------------------------------------

def test_ingest_three_lines(tmp_path):
    p = tmp_path / "hi.wikipedia.txt"
    p.write_text("एक\nदो\nतीन\n", encoding="utf-8")
    docs = list(ingest(p))
    assert [d.id for d in docs] == [0, 1, 2]
    assert all(d.lang == LanguageTag("hi") for d in docs)


def test_whitespace_only_line_gives_nothing(tmp_path):
    p = tmp_path / "hi.wikipedia.txt"
    p.write_text(" \t \n", encoding="utf-8")
    assert list(ingest(p)) == []


def test_empty_file_is_empty_stream(tmp_path):
    p = tmp_path / "hi.wikipedia.txt"
    p.write_bytes(b"")
    assert list(ingest(p)) == []


def test_blank_lines_keep_physical_ids(tmp_path):
    p = tmp_path / "en.crawl.txt"
    p.write_text("a\n\nb\n", encoding="utf-8")
    assert [(d.id, d.text) for d in ingest(p, shard=3)] == [(make_doc_id(3, 0), "a"), (make_doc_id(3, 2), "b")]


def test_ingest_composes_to_nfc(tmp_path):
    decomposed = "\u0915\u0928\u093c\u093e"  # KA, NA + NUKTA, AA
    p = tmp_path / "hi.wikipedia.txt"
    p.write_text(decomposed + "\n", encoding="utf-8")
    (doc,) = ingest(p)
    assert doc.text == unicodedata.normalize("NFC", decomposed)
    assert doc.text.encode() == "\u0915\u0929\u093e".encode()
    # KA + NUKTA is a composition exclusion and must stay decomposed
    p.write_text("\u0958\n", encoding="utf-8")
    (doc,) = ingest(p)
    assert doc.text == "\u0915\u093c"


def test_case_and_marks_preserved(tmp_path):
    p = tmp_path / "en.wikipedia.txt"
    p.write_text("Café NAÏVE\n", encoding="utf-8")
    (doc,) = ingest(p)
    assert doc.text == "Café NAÏVE"


def test_bad_utf8_abort_names_line(tmp_path):
    p = tmp_path / "hi.wikipedia.txt"
    p.write_bytes("ठीक\n".encode() + b"\xff\xfe\n" + "फिर\n".encode())
    with pytest.raises(IngestError) as err:
        list(ingest(p))
    assert err.value.line_no == 2


def test_bad_utf8_skip(tmp_path):
    p = tmp_path / "hi.wikipedia.txt"
    p.write_bytes("ठीक\n".encode() + b"\xff\xfe\n" + "फिर\n".encode())
    assert [d.id for d in ingest(p, on_error="skip")] == [0, 2]


def test_ingest_is_idempotent(mini_dir):
    path = mini_dir / "hi.wikipedia.txt"
    assert list(ingest(path)) == list(ingest(path))


def test_parallel_source_rejected_for_monolingual(tmp_path):
    p = tmp_path / "hi.wikipedia.txt"
    p.write_text("x\n")
    with pytest.raises(CorpusError):
        list(ingest(p, source=Source.PARALLEL_TRANSLATION))


def test_shard_round_trip(tmp_path, mini_dir):
    docs = list(ingest(mini_dir / "bn.wikipedia.txt"))
    path = tmp_path / "bn.wikipedia.shard"
    assert write_shard(docs, path) == len(docs)
    back = list(ingest(path))
    assert [d.text for d in back] == [d.text for d in docs]
    assert all(d.lang == LanguageTag("bn") for d in back)


def test_shard_truncation_and_tag_mismatch(tmp_path):
    path = tmp_path / "x.shard"
    write_shard([make_doc("नमस्ते")], path)
    data = path.read_bytes()
    with pytest.raises(IngestError):
        list(ingest(path, LanguageTag("bn")))
    for broken in (data[:-2], data + data[:2], data + data[:6]):
        path.write_bytes(broken)
        with pytest.raises(IngestError, match="byte"):
            list(ingest(path))


def test_ingest_parallel(mini_dir):
    pairs = list(ingest_parallel(mini_dir / "hi.parallel_translation.tsv", LanguageTag("hi")))
    assert len(pairs) == 10
    assert all(p.tgt.lang == LanguageTag("en") and p.kind is PairKind.TRANSLATED for p in pairs)


# -- pretokenize ------------------------------------------------------------

def test_pretokenize_examples():
    assert pretokenize("") == []
    assert pretokenize("namaste duniya") == ["namaste", "duniya"]
    assert pretokenize("क्या?") == ["क्या", "?"]
    assert pretokenize("a,,b") == ["a", ",", ",", "b"]
    assert pretokenize("९०% x y") == ["९०", "%", "x", "y"]


def test_question_mark_is_po_and_conjunct_has_no_punctuation():
    assert unicodedata.category("?") == "Po"
    assert not any(unicodedata.category(c).startswith("P") for c in "क्या")


@given(st.text())
def test_pretokenize_never_yields_empty_words(text):
    assert all(pretokenize(text))


@given(st.text())
def test_pretokenize_keeps_non_space_characters(text):
    assert sorted("".join(pretokenize(text))) == sorted(c for c in text if not c.isspace())


@given(st.lists(st.text(alphabet=st.characters(blacklist_categories=("Zs", "Zl", "Zp", "Cc", "Pc", "Pd",
                                                                     "Ps", "Pe", "Pi", "Pf", "Po")),
                        min_size=1)))
def test_rejoin_is_fixed_point_without_punctuation(words):
    words = [w for w in words if w.split() == [w]]
    once = pretokenize(" ".join(words))
    assert pretokenize(" ".join(once)) == once


# -- counting ---------------------------------------------------------------

_ORACLE_WORD = regex.compile(r"\p{P}|[^\s\p{P}]+")


def _oracle_words(text):
    return len(_ORACLE_WORD.findall(text))


def test_count_empty_and_simple():
    assert count_tokens([]) == CorpusStats()
    stats = count_tokens([make_doc("a b c d e", "en", 0), make_doc("f g h i j", "en", 1)])
    assert stats.words(LanguageTag("en"), Source.WIKIPEDIA) == 10


def test_mini_corpus_counts_match_independent_oracle(mini_dir):
    for path in sorted(mini_dir.glob("*.txt")):
        stats = count_tokens(ingest(path))
        (lang, source), = stats.counts
        c = stats.counts[(lang, source)]
        lines = subprocess.run(["grep", "-cv", r"^[[:space:]]*$", str(path)],
                               capture_output=True, text=True).stdout
        assert c.docs == int(lines)
        texts = [unicodedata.normalize("NFC", ln).strip() for ln in path.read_text("utf-8").splitlines()]
        assert c.words == sum(_oracle_words(t) for t in texts)
        assert c.chars == sum(len(t) for t in texts)
        assert c.words >= c.docs


@given(st.lists(st.sampled_from(["एक दो", "a, b", "x", "তিন চার পাঁচ"]), max_size=12), st.randoms())
def test_counting_is_order_free_and_additive(texts, rnd):
    docs = [make_doc(t, "en", i) for i, t in enumerate(texts)]
    shuffled = list(docs)
    rnd.shuffle(shuffled)
    assert count_tokens(docs) == count_tokens(shuffled)
    cut = len(docs) // 2
    assert count_tokens(docs) == count_tokens(docs[:cut]) + count_tokens(docs[cut:])


def test_stats_csv_header():
    assert count_tokens([]).to_csv() == "lang,source,docs,words,chars\n"
