"""Shared fixture builders: synthetic seed corpora and replayable ad files."""

from __future__ import annotations

import itertools
import json
import random


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        outcome = "PASS" if report.passed else "FAIL"
        print(f"\nACCEPTANCE {outcome}: {name}")

from vacobs.classify import ALL_LABELS, NAMED_LABELS, SeedCorpus
from vacobs.textprep import Document
from vacobs.tfidf import OTHER_LABEL

# Title phrases per label used to build fixture ads; every phrase matches
# exactly one label under whole-word matching so generated titles are
# never ambiguous.
FIXTURE_PHRASES: dict[str, list[str]] = {
    "account": ["account manager", "account executive"],
    "accountant": ["accountant"],
    "administrator": ["administrator"],
    "assistant": ["personal assistant", "office assistant"],
    "business": ["business analyst", "business development manager"],
    "buyer": ["buyer"],
    "care": ["care assistant", "care worker"],
    "charity": ["charity fundraiser"],
    "cleaner": ["cleaner", "cleaning operative"],
    "construction": ["construction labourer", "groundworker"],
    "customer": ["customer service advisor", "call centre agent"],
    "data": ["data analyst", "data engineer"],
    "delivery": ["delivery driver", "courier"],
    "electrician": ["electrician"],
    "finance": ["finance officer", "purchase ledger clerk", "credit controller"],
    "garage": ["mechanic", "mot tester"],
    "graduate": ["graduate scheme", "graduate trainee"],
    "hgv": ["hgv driver", "lgv driver"],
    "hotel": ["hotel staff", "hotel manager"],
    "hr": ["hr advisor", "human resources officer"],
    "itsupportengineer": ["it support engineer", "service desk analyst"],
    "kitchen": ["kitchen porter", "sous chef"],
    "machine": ["machine operator", "cnc machinist"],
    "marketing": ["marketing executive", "digital marketing specialist"],
    "nurse": ["staff nurse", "registered nurse"],
    "nursery": ["nursery practitioner", "early years educator"],
    "physio": ["physiotherapist"],
    "plumber": ["plumber", "gas engineer"],
    "prison": ["prison officer"],
    "production": ["production operative", "assembly operative"],
    "productionmanager": ["production manager", "production supervisor"],
    "project": ["project manager", "project coordinator"],
    "property": ["estate agent", "lettings negotiator"],
    "receptionist": ["receptionist", "front of house coordinator"],
    "recruitment": ["recruitment consultant", "talent acquisition partner"],
    "retail": ["order picker", "shop supervisor", "retail assistant", "picker packer"],
    "sale": ["sales executive", "telesales agent"],
    "security": ["security officer", "door supervisor"],
    "server": ["waiter", "bartender"],
    "software": ["software developer", "software engineer"],
    "solicitor": ["solicitor", "paralegal"],
    "storemanager": ["store manager", "branch manager"],
    "support": ["support worker", "residential support worker"],
    "surveyor": ["quantity surveyor", "building surveyor"],
    "teacher": ["supply teacher", "teaching assistant"],
    "vehicle": ["vehicle technician", "vehicle inspector"],
    "warehouse": ["warehouse operative", "forklift driver"],
    "welsh": ["welsh speaking advisor", "welsh speaker"],
}

assert set(FIXTURE_PHRASES) == set(NAMED_LABELS)

FIXTURE_LOCATIONS = [
    "Exeter",
    "Devon",
    "Leeds",
    "Manchester",
    "Bristol",
    "Cornwall",
    "Kent",
    "Blackburn with Darwen",
    "London",
]


def synthetic_class_doc(
    label: str,
    rng: random.Random,
    *,
    ad_id: int = 0,
    vocab_per_class: int = 24,
    shared_vocab: int = 10,
    doc_len: int = 14,
    exclusive_fraction: float = 0.75,
    n_heads: int = 3,
    head_prob: float = 0.85,
) -> Document:
    """One document drawn from a named class's synthetic distribution."""
    exclusive = [f"{label}term{i}" for i in range(vocab_per_class)]
    heads, tail = exclusive[:n_heads], exclusive[n_heads:]
    shared = [f"common{i}" for i in range(shared_vocab)]
    tokens = [h for h in heads if rng.random() < head_prob]
    while len(tokens) < doc_len:
        tokens.append(rng.choice(tail if rng.random() < exclusive_fraction else shared))
    return Document(ad_id=ad_id, tokens=tuple(tokens), boundary=min(3, len(tokens)))


def synthetic_seed_corpus(
    docs_per_class: int = 8,
    vocab_per_class: int = 24,
    shared_vocab: int = 10,
    doc_len: int = 14,
    rng_seed: int = 0,
    exclusive_fraction: float = 0.75,
    n_heads: int = 3,
    head_prob: float = 0.85,
) -> SeedCorpus:
    """Generated corpus over the full label set.

    Each named class has a few "head" terms present in most of its
    documents (the job-title words of real ads) plus a tail of exclusive
    vocabulary and a small shared pool. Pairwise vocabulary overlap
    between classes is shared_vocab / (vocab_per_class + shared_vocab).
    The "other" class is vocabulary-disjoint from everything.
    """
    rng = random.Random(rng_seed)
    next_id = itertools.count(1)
    seed_sets: dict[str, list[Document]] = {}
    for label in NAMED_LABELS:
        seed_sets[label] = [
            synthetic_class_doc(
                label,
                rng,
                ad_id=next(next_id),
                vocab_per_class=vocab_per_class,
                shared_vocab=shared_vocab,
                doc_len=doc_len,
                exclusive_fraction=exclusive_fraction,
                n_heads=n_heads,
                head_prob=head_prob,
            )
            for _ in range(docs_per_class)
        ]
    other_docs = []
    for d in range(docs_per_class):
        tokens = tuple(f"junk{d}w{i}" for i in range(doc_len))
        other_docs.append(Document(ad_id=next(next_id), tokens=tokens, boundary=3))
    seed_sets[OTHER_LABEL] = other_docs
    return SeedCorpus(seed_sets=seed_sets)


_DECORATIONS = ["", "senior", "junior", "trainee", "experienced", "weekend", "immediate start"]


def fixture_ad(
    ad_id: int,
    label: str,
    rng: random.Random,
    *,
    date: str,
    employer: str | None = None,
    location: str | None = None,
) -> dict:
    phrase = rng.choice(FIXTURE_PHRASES[label])
    decoration = rng.choice(_DECORATIONS)
    title = f"{decoration} {phrase}".strip().title()
    min_salary = rng.choice([None, 18000, 21000, 25000, 32000, 45000])
    max_salary = None if min_salary is None else min_salary + rng.choice([0, 2000, 5000])
    contract = rng.choice(["temporary", "permanent", "contract"])
    mode = rng.choice(["full", "part", "both"])
    return {
        "jobId": ad_id,
        "jobTitle": title,
        "jobDescription": f"We are hiring a {phrase} to join our {label} team. "
        f"Duties include {phrase} tasks and occasional travel.",
        "employerName": employer if employer is not None else f"{label.title()} Recruitment Ltd",
        "locationName": location if location is not None else rng.choice(FIXTURE_LOCATIONS),
        "date": date,
        "minimumSalary": min_salary,
        "maximumSalary": max_salary,
        "currency": "GBP",
        "fullTime": mode in ("full", "both"),
        "partTime": mode in ("part", "both"),
        "temporary": contract == "temporary",
        "permanent": contract == "permanent",
        "contract": contract == "contract",
    }


def null_fixture_record(ad_id: int) -> dict:
    return {
        "jobId": ad_id,
        "jobTitle": None,
        "jobDescription": None,
        "employerName": None,
        "locationName": None,
        "date": None,
        "minimumSalary": None,
        "maximumSalary": None,
        "currency": None,
        "fullTime": None,
        "partTime": None,
        "temporary": None,
        "permanent": None,
        "contract": None,
    }


def write_ndjson(path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
