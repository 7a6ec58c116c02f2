"""TF-IDF vectorization and cosine-similarity machinery for the classifier.

Weighting is pinned to raw term count times ln(n_docs / df), L2-normalized,
with no document-frequency smoothing: a lemma present in every document
gets weight zero, so a document can legitimately vectorize to the zero
vector (and the similarity gate treats it as matching nothing).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .textprep import Document

OTHER_LABEL = "other"


class EmptyCorpus(ValueError):
    pass


class EmptySeedSet(ValueError):
    pass


@dataclass(frozen=True)
class SparseVector:
    """Sparse non-negative vector; zero entries are never stored."""

    entries: dict[int, float] = field(default_factory=dict)

    def norm(self) -> float:
        return math.sqrt(sum(w * w for w in self.entries.values()))

    def dot(self, other: "SparseVector") -> float:
        a, b = self.entries, other.entries
        if len(b) < len(a):
            a, b = b, a
        return sum(w * b[i] for i, w in a.items() if i in b)

    def is_zero(self) -> bool:
        return not self.entries


@dataclass(frozen=True)
class TfIdfModel:
    vocabulary: dict[str, int]
    doc_frequency: list[int]
    n_docs: int


def fit_tfidf(corpus: Sequence[Document]) -> TfIdfModel:
    """Build vocabulary and document frequencies over a corpus.

    Vocabulary indices are assigned in sorted lemma order so two fits over
    the same corpus (in any order) produce identical models.
    """
    if not corpus:
        raise EmptyCorpus("corpus is empty")
    if all(not doc.tokens for doc in corpus):
        raise EmptyCorpus("corpus has no non-empty documents")
    df_by_lemma: Counter[str] = Counter()
    for doc in corpus:
        df_by_lemma.update(set(doc.tokens))
    vocabulary = {lemma: idx for idx, lemma in enumerate(sorted(df_by_lemma))}
    doc_frequency = [0] * len(vocabulary)
    for lemma, count in df_by_lemma.items():
        doc_frequency[vocabulary[lemma]] = count
    return TfIdfModel(vocabulary=vocabulary, doc_frequency=doc_frequency, n_docs=len(corpus))


def vectorize(model: TfIdfModel, doc: Document) -> SparseVector:
    """tf * ln(n/df) weights, L2-normalized; OOV lemmas are ignored."""
    counts: Counter[int] = Counter()
    for token in doc.tokens:
        idx = model.vocabulary.get(token)
        if idx is not None:
            counts[idx] += 1
    entries: dict[int, float] = {}
    for idx, tf in counts.items():
        idf = math.log(model.n_docs / model.doc_frequency[idx])
        if idf > 0.0:
            entries[idx] = tf * idf
    norm = math.sqrt(sum(w * w for w in entries.values()))
    if norm == 0.0:
        return SparseVector({})
    return SparseVector({i: w / norm for i, w in entries.items()})


def cosine_similarity(u: SparseVector, v: SparseVector) -> float:
    nu, nv = u.norm(), v.norm()
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return u.dot(v) / (nu * nv)


def mean_seed_similarity(vec: SparseVector, seed_set: Sequence[SparseVector]) -> float:
    if not seed_set:
        raise EmptySeedSet("seed set is empty")
    return sum(cosine_similarity(vec, s) for s in seed_set) / len(seed_set)


def detect_other(
    doc_vec: SparseVector,
    seeds: Mapping[str, Sequence[SparseVector]],
    threshold: float = 0.04,
) -> bool:
    """True when the document resembles none of the named seed sets.

    Fires iff the best mean seed similarity across all named (non-other)
    labels is below the threshold; a zero vector therefore always fires.
    """
    best = 0.0
    for label, seed_set in seeds.items():
        if label == OTHER_LABEL:
            continue
        sim = mean_seed_similarity(doc_vec, seed_set)
        if sim > best:
            best = sim
            if best >= threshold:
                return False
    return best < threshold


def top_terms(
    docs: Iterable[Document],
    n: int,
    scope: str = "full",
) -> list[tuple[str, int]]:
    """Most frequent terms, ties broken lexicographically.

    scope "titles_only" restricts counting to each document's title
    tokens (tokens before the boundary index).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if scope not in ("full", "titles_only"):
        raise ValueError(f"unknown scope: {scope}")
    counts: Counter[str] = Counter()
    for doc in docs:
        tokens = doc.tokens[: doc.boundary] if scope == "titles_only" else doc.tokens
        counts.update(tokens)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:n]
