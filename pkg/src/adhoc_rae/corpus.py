"""Headline ingestion, tokenization and document-term matrices."""

from __future__ import annotations

import datetime as dt
import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DataError, EmptyVocabularyError

RAW_COUNTS = "raw_counts"
TFIDF = "tfidf"

# runs of unicode letters/digits; everything else separates
_CANDIDATE = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class Headline:
    id: str
    timestamp: dt.date
    isin: str
    title: str

    def __post_init__(self):
        if not self.title or not self.title.strip():
            raise DataError(f"headline {self.id!r} has an empty title")
        if len(self.isin) != 12:
            raise DataError(f"headline {self.id!r}: ISIN {self.isin!r} is not 12 characters")


@dataclass(frozen=True)
class TokenSequence:
    headline_id: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    doc_freq: tuple[int, ...]
    n_docs: int
    index_of: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index_of", {t: i for i, t in enumerate(self.terms)})

    def __len__(self):
        return len(self.terms)

    def df(self, term: str) -> int:
        return self.doc_freq[self.index_of[term]]


@dataclass(frozen=True)
class DocumentTermMatrix:
    """Sparse rows of ``(column, weight)`` pairs, columns ascending."""

    rows: tuple[tuple[tuple[int, float], ...], ...]
    vocab: Vocabulary
    weighting: str = RAW_COUNTS

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.vocab)

    def to_dense(self):
        import numpy as np

        out = np.zeros(self.shape)
        for d, row in enumerate(self.rows):
            for j, w in row:
                out[d, j] = w
        return out

    def to_csr(self):
        import numpy as np
        from scipy import sparse

        indptr = [0]
        indices, data = [], []
        for row in self.rows:
            for j, w in row:
                indices.append(j)
                data.append(w)
            indptr.append(len(indices))
        return sparse.csr_matrix(
            (np.asarray(data, dtype=float), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
            shape=self.shape,
        )


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """One term per line; blank lines and ``#`` comments are skipped.

    Without a path the bundled English list is returned.
    """
    if path is None:
        text = resources.files("adhoc_rae").joinpath("data/stopwords_en.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    words = (line.strip().lower() for line in text.splitlines())
    return frozenset(w for w in words if w and not w.startswith("#"))


def tokenize(title: str, stopwords: Iterable[str] = frozenset()) -> list[str]:
    """Lowercase, split on anything that is not a letter or digit, then drop
    tokens holding a digit and stopwords. Order is kept.

    >>> tokenize("Company Ltd. placing of shares", {"of"})
    ['company', 'ltd', 'placing', 'shares']
    """
    stop = stopwords if isinstance(stopwords, (set, frozenset)) else set(stopwords)
    out = []
    for tok in _CANDIDATE.findall(title.lower()):
        if any(ch.isdigit() for ch in tok) or tok in stop:
            continue
        out.append(tok)
    return out


def tokenize_headline(headline: Headline, stopwords: Iterable[str] = frozenset()) -> TokenSequence:
    return TokenSequence(headline.id, tuple(tokenize(headline.title, stopwords)))


def build_vocabulary(token_sequences: Sequence[Sequence[str]], min_df: int = 3) -> Vocabulary:
    """Keep the terms occurring in at least ``min_df`` documents, sorted."""
    if min_df < 1:
        raise ValueError(f"min_df must be >= 1, got {min_df}")
    docs = [_tokens_of(s) for s in token_sequences]
    if not any(docs):
        raise EmptyVocabularyError("no tokens in any document")
    df = Counter()
    for toks in docs:
        df.update(set(toks))
    terms = sorted(t for t, c in df.items() if c >= min_df)
    if not terms:
        raise EmptyVocabularyError(f"empty vocabulary: no term reaches min_df={min_df}")
    return Vocabulary(tuple(terms), tuple(df[t] for t in terms), len(docs))


def count_matrix(token_sequences: Sequence[Sequence[str]], vocab: Vocabulary) -> DocumentTermMatrix:
    rows = []
    index_of = vocab.index_of
    for s in token_sequences:
        counts = Counter(index_of[t] for t in _tokens_of(s) if t in index_of)
        rows.append(tuple((j, float(counts[j])) for j in sorted(counts)))
    return DocumentTermMatrix(tuple(rows), vocab, RAW_COUNTS)


def tfidf_transform(dtm: DocumentTermMatrix) -> DocumentTermMatrix:
    """Weight counts by ``tf * ln(N / df)``; no smoothing, no row norm."""
    if dtm.weighting != RAW_COUNTS:
        raise ValueError(f"expected a raw-count matrix, got weighting={dtm.weighting!r}")
    vocab = dtm.vocab
    n = vocab.n_docs
    idf = []
    for term, df in zip(vocab.terms, vocab.doc_freq):
        idf.append(math.log(n / df) if df > 0 else None)
    rows = []
    for row in dtm.rows:
        out = []
        for j, tf in row:
            if idf[j] is None:
                raise DataError(f"corrupted vocabulary: term {vocab.terms[j]!r} has doc_freq 0")
            out.append((j, tf * idf[j]))
        rows.append(tuple(out))
    return DocumentTermMatrix(tuple(rows), vocab, TFIDF)


def _tokens_of(s) -> Sequence[str]:
    return s.tokens if isinstance(s, TokenSequence) else s


# -- file formats -----------------------------------------------------------


def read_headlines(path: str | Path) -> list[Headline]:
    """Read the JSON-lines headline corpus (``id``, ``date``, ``isin``, ``title``)."""
    out = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                hid = str(rec["id"])
                day = dt.date.fromisoformat(rec["date"])
                h = Headline(hid, day, rec["isin"], rec["title"])
            except (KeyError, ValueError, TypeError) as exc:
                raise DataError(f"{path}:{lineno}: bad headline record ({exc})") from exc
            if hid in seen:
                raise DataError(f"{path}:{lineno}: duplicate headline id {hid!r}")
            seen.add(hid)
            out.append(h)
    return out


def write_headlines(headlines: Iterable[Headline], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for h in headlines:
            rec = {"id": h.id, "date": h.timestamp.isoformat(), "isin": h.isin, "title": h.title}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def write_triplets(dtm: DocumentTermMatrix, doc_ids: Sequence[str], path: str | Path) -> None:
    """Debug export: one ``doc_id,term,weight`` line per nonzero entry."""
    if len(doc_ids) != len(dtm.rows):
        raise ValueError("one doc id per matrix row required")
    terms = dtm.vocab.terms
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("doc_id,term,weight\n")
        for doc_id, row in zip(doc_ids, dtm.rows):
            for j, w in row:
                fh.write(f"{doc_id},{terms[j]},{w!r}\n")


def read_triplets(path: str | Path, terms: Sequence[str]) -> tuple[list[str], list[dict[int, float]]]:
    """Read a triplet file back into sparse rows keyed by column index.

    Terms absent from ``terms`` are dropped. Document order follows first
    appearance in the file.
    """
    index_of = {t: i for i, t in enumerate(terms)}
    rows: dict[str, dict[int, float]] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "doc_id,term,weight":
            raise DataError(f"{path}: unexpected triplet header {header!r}")
        for lineno, line in enumerate(fh, 2):
            line = line.strip()
            if not line:
                continue
            try:
                doc_id, term, weight = line.split(",")
                w = float(weight)
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad triplet {line!r}") from exc
            row = rows.setdefault(doc_id, {})
            if term in index_of:
                row[index_of[term]] = w
    ids = list(rows)
    return ids, [rows[i] for i in ids]
