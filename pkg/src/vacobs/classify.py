"""Seed-guided sector classification.

Seeds are mined from a labelled window of ads by title phrase matching,
an "other" class is mined from documents dissimilar to every named seed
set, and a decision tree is trained over TF-IDF vectors. At inference a
similarity gate routes vocabulary-disjoint documents straight to "other"
before the tree is consulted.
"""

from __future__ import annotations

import json
import random
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .ingest import JobAd
from .textprep import Document, LemmaTable, build_document, clean_text
from .tfidf import (
    OTHER_LABEL,
    SparseVector,
    TfIdfModel,
    detect_other,
    fit_tfidf,
    vectorize,
)
from .tree import DecisionTree, DegenerateTraining, TreeParams, train_tree

# The 48 named sector labels plus "other" for everything else.
NAMED_LABELS: tuple[str, ...] = (
    "account", "accountant", "administrator", "assistant",
    "business", "buyer", "care", "charity",
    "cleaner", "construction", "customer", "data",
    "delivery", "electrician", "finance", "garage",
    "graduate", "hgv", "hotel", "hr",
    "itsupportengineer", "kitchen", "machine", "marketing",
    "nurse", "nursery", "physio", "plumber",
    "prison", "production", "productionmanager", "project",
    "property", "receptionist", "recruitment", "retail",
    "sale", "security", "server", "software",
    "solicitor", "storemanager", "support", "surveyor",
    "teacher", "vehicle", "warehouse", "welsh",
)
ALL_LABELS: tuple[str, ...] = NAMED_LABELS + (OTHER_LABEL,)

DEFAULT_SIMILARITY_THRESHOLD = 0.04
MODEL_FORMAT = "vacobs-classifier"
MODEL_VERSION = 1


class InvalidSeedCorpus(ValueError):
    pass


@dataclass
class SeedCorpus:
    """Exemplar documents per label; every label appears exactly once."""

    seed_sets: dict[str, list[Document]]

    def validate(self) -> None:
        expected = set(ALL_LABELS)
        got = set(self.seed_sets)
        if got != expected:
            missing = sorted(expected - got)
            extra = sorted(got - expected)
            raise InvalidSeedCorpus(f"label set mismatch: missing={missing} extra={extra}")
        for label in NAMED_LABELS:
            if not self.seed_sets[label]:
                raise InvalidSeedCorpus(f"named seed set {label!r} is empty")
        seen: dict[int, str] = {}
        for label, docs in self.seed_sets.items():
            for doc in docs:
                if doc.ad_id in seen and seen[doc.ad_id] != label:
                    raise InvalidSeedCorpus(
                        f"document {doc.ad_id} assigned to both {seen[doc.ad_id]!r} and {label!r}"
                    )
                seen[doc.ad_id] = label

    def items_sorted(self) -> list[tuple[Document, str]]:
        pairs: list[tuple[Document, str]] = []
        for label in sorted(self.seed_sets):
            pairs.extend((doc, label) for doc in self.seed_sets[label])
        return pairs


def load_seed_phrases(path: str | Path) -> dict[str, list[str]]:
    """Seeds file: JSON object mapping each named label to title phrases."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError("seeds file must be a JSON object of label -> phrase list")
    return {str(k): [str(p) for p in v] for k, v in data.items()}


def _phrase_pattern(phrase: str) -> re.Pattern:
    return re.compile(rf"\b{re.escape(clean_text(phrase))}\b")


def build_seed_corpus(
    ads: Sequence[JobAd],
    table: LemmaTable,
    seed_phrases: Mapping[str, Sequence[str]],
    *,
    threshold: float = DEFAULT_SIMILARITY_THRESHOLD,
) -> SeedCorpus:
    """Mine a seed corpus from a labelled-window fixture of ads.

    An ad joins a named seed set when its title contains one of the
    label's phrases as a whole-word match; ads matching phrases from
    two different labels are not definitive and are skipped. Unmatched
    ads whose best mean seed similarity falls below the threshold form
    the "other" set.
    """
    unknown = sorted(set(seed_phrases) - set(NAMED_LABELS))
    if unknown:
        raise InvalidSeedCorpus(f"seeds file names unknown labels: {unknown}")
    patterns = {
        label: [_phrase_pattern(p) for p in phrases]
        for label, phrases in seed_phrases.items()
    }

    documents = {ad.ad_id: build_document(ad, table) for ad in ads}
    seed_sets: dict[str, list[Document]] = {label: [] for label in ALL_LABELS}
    unmatched: list[Document] = []
    for ad in ads:
        title = clean_text(ad.title)
        hits = [
            label
            for label, pats in patterns.items()
            if any(p.search(title) for p in pats)
        ]
        if len(hits) == 1:
            seed_sets[hits[0]].append(documents[ad.ad_id])
        elif not hits:
            unmatched.append(documents[ad.ad_id])
        # ambiguous titles are not definitive exemplars: skipped

    empty = [label for label in NAMED_LABELS if not seed_sets[label]]
    if empty:
        raise InvalidSeedCorpus(f"no seed ads matched for labels: {empty}")

    model = fit_tfidf([doc for docs in seed_sets.values() for doc in docs] + unmatched)
    seed_vectors = {
        label: [vectorize(model, doc) for doc in seed_sets[label]]
        for label in NAMED_LABELS
    }
    for doc in unmatched:
        if detect_other(vectorize(model, doc), seed_vectors, threshold):
            seed_sets[OTHER_LABEL].append(doc)

    corpus = SeedCorpus(seed_sets=seed_sets)
    corpus.validate()
    return corpus


# --- metrics ---------------------------------------------------------------


@dataclass(frozen=True)
class EvalMetrics:
    subset_accuracy: float
    balanced_accuracy: float
    cohens_kappa: float
    confusion: dict[tuple[str, str], int]


def compute_metrics(pairs: Sequence[tuple[str, str]]) -> EvalMetrics:
    """Subset accuracy, balanced accuracy and Cohen's kappa from
    (true, predicted) pairs."""
    if not pairs:
        raise ValueError("no evaluation pairs")
    confusion: Counter[tuple[str, str]] = Counter(pairs)
    total = len(pairs)
    correct = sum(c for (t, p), c in confusion.items() if t == p)
    subset = correct / total

    true_marginals: Counter[str] = Counter(t for t, _ in pairs)
    pred_marginals: Counter[str] = Counter(p for _, p in pairs)
    recalls = [
        confusion.get((label, label), 0) / count
        for label, count in true_marginals.items()
    ]
    balanced = sum(recalls) / len(recalls)

    p_e = sum(
        true_marginals[label] * pred_marginals.get(label, 0)
        for label in true_marginals
    ) / (total * total)
    kappa = 0.0 if p_e == 1.0 else (subset - p_e) / (1.0 - p_e)

    return EvalMetrics(
        subset_accuracy=subset,
        balanced_accuracy=balanced,
        cohens_kappa=kappa,
        confusion=dict(sorted(confusion.items())),
    )


# --- training and inference --------------------------------------------------


def stratified_split(
    corpus: SeedCorpus,
    *,
    test_fraction: float = 0.2,
    rng_seed: int = 0,
) -> tuple[list[tuple[Document, str]], list[tuple[Document, str]]]:
    """Per-label shuffle-and-hold-out split, reproducible from rng_seed."""
    rng = random.Random(rng_seed)
    train: list[tuple[Document, str]] = []
    test: list[tuple[Document, str]] = []
    for label in sorted(corpus.seed_sets):
        docs = list(corpus.seed_sets[label])
        rng.shuffle(docs)
        if len(docs) < 2:
            n_test = 0
        else:
            n_test = min(len(docs) - 1, max(1, round(len(docs) * test_fraction)))
        test.extend((doc, label) for doc in docs[:n_test])
        train.extend((doc, label) for doc in docs[n_test:])
    return train, test


def classify_document(
    tree: DecisionTree,
    model: TfIdfModel,
    seeds: Mapping[str, Sequence[SparseVector]],
    doc: Document,
    *,
    threshold: float = DEFAULT_SIMILARITY_THRESHOLD,
) -> str:
    """Label one document: the similarity gate wins, then the tree."""
    vec = vectorize(model, doc)
    if detect_other(vec, seeds, threshold):
        return OTHER_LABEL
    return tree.predict(vec)


def evaluate(
    tree: DecisionTree,
    model: TfIdfModel,
    seeds: Mapping[str, Sequence[SparseVector]],
    test: Sequence[tuple[Document, str]],
    *,
    threshold: float = DEFAULT_SIMILARITY_THRESHOLD,
) -> EvalMetrics:
    if not test:
        raise ValueError("test set is empty")
    pairs = [
        (label, classify_document(tree, model, seeds, doc, threshold=threshold))
        for doc, label in test
    ]
    return compute_metrics(pairs)


@dataclass
class ClassifierBundle:
    """Everything needed to classify without retraining."""

    model: TfIdfModel
    tree: DecisionTree
    seed_vectors: dict[str, list[SparseVector]]
    threshold: float = DEFAULT_SIMILARITY_THRESHOLD
    rng_seed: int = 0

    def classify(self, doc: Document) -> str:
        return classify_document(
            self.tree, self.model, self.seed_vectors, doc, threshold=self.threshold
        )

    def save(self, path: str | Path) -> None:
        payload = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "rng_seed": self.rng_seed,
            "threshold": self.threshold,
            "hyperparameters": self.tree.params.to_dict(),
            "tfidf": {
                "vocabulary": self.model.vocabulary,
                "doc_frequency": self.model.doc_frequency,
                "n_docs": self.model.n_docs,
            },
            "seed_vectors": {
                label: [sorted(v.entries.items()) for v in vectors]
                for label, vectors in self.seed_vectors.items()
            },
            "tree": self.tree.to_dict(),
        }
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "ClassifierBundle":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if data.get("format") != MODEL_FORMAT:
            raise ValueError(f"{path} is not a classifier artifact")
        if data.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported artifact version {data.get('version')}")
        tfidf = data["tfidf"]
        model = TfIdfModel(
            vocabulary={k: int(v) for k, v in tfidf["vocabulary"].items()},
            doc_frequency=[int(v) for v in tfidf["doc_frequency"]],
            n_docs=int(tfidf["n_docs"]),
        )
        seed_vectors = {
            label: [SparseVector({int(d): float(w) for d, w in entries}) for entries in vectors]
            for label, vectors in data["seed_vectors"].items()
        }
        return cls(
            model=model,
            tree=DecisionTree.from_dict(data["tree"]),
            seed_vectors=seed_vectors,
            threshold=float(data["threshold"]),
            rng_seed=int(data["rng_seed"]),
        )


def train_classifier(
    corpus: SeedCorpus,
    *,
    params: TreeParams = TreeParams(),
    threshold: float = DEFAULT_SIMILARITY_THRESHOLD,
    rng_seed: int = 0,
    test_fraction: float = 0.2,
) -> tuple[ClassifierBundle, EvalMetrics]:
    """Fit TF-IDF over the seed corpus, train the tree on a stratified
    80/20 split and evaluate on the held-out fifth."""
    corpus.validate()
    all_docs = [doc for doc, _ in corpus.items_sorted()]
    model = fit_tfidf(all_docs)
    seed_vectors = {
        label: [vectorize(model, doc) for doc in corpus.seed_sets[label]]
        for label in NAMED_LABELS
    }
    train, test = stratified_split(corpus, test_fraction=test_fraction, rng_seed=rng_seed)
    samples = [(vectorize(model, doc), label) for doc, label in train]
    tree = train_tree(samples, params, n_features=len(model.vocabulary))
    bundle = ClassifierBundle(
        model=model,
        tree=tree,
        seed_vectors=seed_vectors,
        threshold=threshold,
        rng_seed=rng_seed,
    )
    metrics = evaluate(tree, model, seed_vectors, test, threshold=threshold)
    return bundle, metrics
