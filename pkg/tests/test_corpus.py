import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adhoc_rae import corpus
from adhoc_rae.errors import DataError, EmptyVocabularyError


def brute_tfidf(docs, min_df):
    """Dense reference: plain loops, no shared code with the module."""
    n = len(docs)
    terms = sorted({t for d in docs for t in d})
    df = {t: sum(1 for d in docs if t in d) for t in terms}
    kept = [t for t in terms if df[t] >= min_df]
    counts = [[sum(1 for w in d if w == t) for t in kept] for d in docs]
    weights = [[c * math.log(n / df[t]) for c, t in zip(row, kept)] for row in counts]
    return kept, counts, weights


# -- tokenize ---------------------------------------------------------------------


def test_tokenize_example():
    assert corpus.tokenize("Company Ltd. placing of shares", {"of"}) == ["company", "ltd", "placing", "shares"]


def test_tokenize_empty():
    assert corpus.tokenize("") == []


def test_tokenize_drops_tokens_with_digits():
    assert corpus.tokenize("Q3 2011 loss of 4,000 EUR", {"of"}) == ["loss", "eur"]


def test_tokenize_punctuation_separates():
    assert corpus.tokenize("profit-warning/update_now") == ["profit", "warning", "update", "now"]


def test_bundled_stopwords():
    stop = corpus.load_stopwords()
    assert 150 <= len(stop) <= 190
    assert {"of", "the", "and"} <= stop
    assert corpus.tokenize("The results of the year", stop) == ["results", "year"]


def test_stopword_file(tmp_path):
    p = tmp_path / "stop.txt"
    p.write_text("# comment\nfoo\n\nBar\n")
    assert corpus.load_stopwords(p) == {"foo", "bar"}


letters = st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=8)


@given(st.lists(letters, max_size=12))
def test_tokenize_idempotent_on_letter_tokens(tokens):
    assert corpus.tokenize(" ".join(tokens)) == tokens


@given(st.text(max_size=60))
def test_tokens_are_clean(text):
    stop = {"the", "of"}
    for tok in corpus.tokenize(text, stop):
        assert tok == tok.lower()
        assert tok not in stop
        assert not any(c.isdigit() or c.isspace() for c in tok)
        assert tok.isalnum()


# -- vocabulary -------------------------------------------------------------------------


def test_vocabulary_min_df():
    v = corpus.build_vocabulary([["a", "b"], ["b", "c"]], min_df=2)
    assert v.terms == ("b",)
    assert v.df("b") == 2
    assert v.n_docs == 2
    assert v.index_of == {"b": 0}


def test_vocabulary_single_document():
    assert corpus.build_vocabulary([["a"]], min_df=1).terms == ("a",)


def test_vocabulary_empty_error_names_min_df():
    with pytest.raises(EmptyVocabularyError, match="min_df=3"):
        corpus.build_vocabulary([["a"], ["b"]], min_df=3)


docs_strategy = st.lists(st.lists(st.sampled_from("abcdefghij"), max_size=6), min_size=1, max_size=5).filter(
    lambda ds: any(ds)
)


@given(docs_strategy, st.integers(1, 4), st.integers(0, 3))
def test_vocabulary_monotone_in_min_df(docs, lo, extra):
    try:
        small = set(corpus.build_vocabulary(docs, lo + extra).terms)
    except EmptyVocabularyError:
        small = set()
    try:
        big = set(corpus.build_vocabulary(docs, lo).terms)
    except EmptyVocabularyError:
        big = set()
    assert small <= big


@given(docs_strategy, st.integers(1, 3))
def test_vocabulary_invariants(docs, min_df):
    try:
        v = corpus.build_vocabulary(docs, min_df)
    except EmptyVocabularyError:
        return
    assert list(v.terms) == sorted(v.terms)
    assert [v.index_of[t] for t in v.terms] == list(range(len(v)))
    assert all(min_df <= df <= v.n_docs for df in v.doc_freq)


# -- matrices -------------------------------------------------------------------------------


def test_count_matrix_examples():
    vocab = corpus.build_vocabulary([["b", "c"]], 1)
    m = corpus.count_matrix([["b", "b", "c"], [], ["z"]], vocab)
    assert m.weighting == corpus.RAW_COUNTS
    assert m.rows == (((0, 2.0), (1, 1.0)), (), ())


def test_tfidf_known_value():
    vocab = corpus.build_vocabulary([["a", "a"], ["b"]], 1)
    w = corpus.tfidf_transform(corpus.count_matrix([["a", "a"], ["b"]], vocab))
    assert w.weighting == corpus.TFIDF
    assert w.rows[0] == ((0, pytest.approx(2 * math.log(2), abs=1e-15)),)
    assert abs(w.rows[0][0][1] - 1.3863) < 1e-4


def test_tfidf_zero_for_ubiquitous_terms():
    docs = [["x", "a"], ["x"], ["x", "b", "x"]]
    vocab = corpus.build_vocabulary(docs, 1)
    w = corpus.tfidf_transform(corpus.count_matrix(docs, vocab))
    j = vocab.index_of["x"]
    for row in w.rows:
        assert dict(row)[j] == 0.0


def test_tfidf_is_pure_and_rejects_corrupt_vocab():
    docs = [["a", "b"], ["a"]]
    vocab = corpus.build_vocabulary(docs, 1)
    raw = corpus.count_matrix(docs, vocab)
    before = raw.rows
    corpus.tfidf_transform(raw)
    assert raw.rows == before and raw.weighting == corpus.RAW_COUNTS
    bad = corpus.Vocabulary(("a", "b"), (2, 0), 2)
    with pytest.raises(DataError, match="doc_freq 0"):
        corpus.tfidf_transform(corpus.count_matrix(docs, bad))
    with pytest.raises(ValueError):
        corpus.tfidf_transform(corpus.tfidf_transform(raw))


def test_tfidf_empty_row():
    vocab = corpus.build_vocabulary([["a"]], 1)
    assert corpus.tfidf_transform(corpus.count_matrix([[]], vocab)).rows == ((),)


@settings(max_examples=200)
@given(st.lists(st.lists(st.sampled_from("abcdefghij"), max_size=7), min_size=1, max_size=5).filter(any),
       st.integers(1, 2))
def test_oracle_equivalence(docs, min_df):
    try:
        vocab = corpus.build_vocabulary(docs, min_df)
    except EmptyVocabularyError:
        return
    kept, counts, weights = brute_tfidf(docs, min_df)
    assert list(vocab.terms) == kept
    raw = corpus.count_matrix(docs, vocab).to_dense()
    tfidf = corpus.tfidf_transform(corpus.count_matrix(docs, vocab)).to_dense()
    for d in range(len(docs)):
        for j in range(len(kept)):
            assert raw[d, j] == counts[d][j]
            assert abs(tfidf[d, j] - weights[d][j]) <= 1e-12


# -- files ---------------------------------------------------------------------------------


def test_headline_roundtrip_and_validation(tmp_path):
    import datetime as dt

    hs = [corpus.Headline("a", dt.date(2010, 1, 4), "DE0000000001", "Some Title")]
    p = tmp_path / "h.jsonl"
    corpus.write_headlines(hs, p)
    assert corpus.read_headlines(p) == hs
    p.write_text(p.read_text() * 2)
    with pytest.raises(DataError, match="duplicate"):
        corpus.read_headlines(p)
    p.write_text('{"id": "x", "date": "2010-13-01", "isin": "DE0000000001", "title": "t"}\n')
    with pytest.raises(DataError):
        corpus.read_headlines(p)
    p.write_text('{"id": "x", "date": "2010-01-01", "isin": "DE0000000001", "title": "   "}\n')
    with pytest.raises(DataError, match="empty title"):
        corpus.read_headlines(p)


def test_triplet_roundtrip(tmp_path):
    docs = [["a", "b", "b"], ["c"], ["a"]]
    vocab = corpus.build_vocabulary(docs, 1)
    m = corpus.tfidf_transform(corpus.count_matrix(docs, vocab))
    p = tmp_path / "dtm.csv"
    corpus.write_triplets(m, ["d1", "d2", "d3"], p)
    ids, rows = corpus.read_triplets(p, vocab.terms)
    assert ids == ["d1", "d2", "d3"]
    assert rows == [dict(r) for r in m.rows]
