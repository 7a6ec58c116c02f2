"""Text cleaning, tokenization and table-driven lemmatization for job ads.

An ad's title and description are cleaned of HTML, lower-cased, tokenized
into letter/digit runs and lemmatized against a bundled exceptions +
suffix-rule table. The table file format is open so a richer exception
list can be dropped in without code changes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING, Iterable

if TYPE_CHECKING:
    from .ingest import JobAd

MAX_TOKENS_PER_DOCUMENT = 10_000

# A suffix rule only fires when it leaves at least this many stem characters.
_MIN_STEM = 2

_NAMED_ENTITIES = {
    "&amp;": "&",
    "&lt;": "<",
    "&gt;": ">",
    "&quot;": '"',
    "&#39;": "'",
}
_ENTITY_RE = re.compile(r"&(?:amp|lt|gt|quot|#\d+|#[xX][0-9a-fA-F]+);")
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_SPACE_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class Document:
    """Lemma sequence for one ad; tokens[:boundary] derive from the title."""

    ad_id: int
    tokens: tuple[str, ...]
    boundary: int = 0


@dataclass(frozen=True)
class LemmaTable:
    exceptions: dict[str, str]
    suffix_rules: tuple[tuple[str, str], ...]


def _decode_entity(match: re.Match) -> str:
    text = match.group(0)
    if text in _NAMED_ENTITIES:
        return _NAMED_ENTITIES[text]
    body = text[2:-1]
    try:
        code = int(body[1:], 16) if body[0] in "xX" else int(body)
        return chr(code)
    except (ValueError, OverflowError):
        return " "


def _strip_tags(text: str) -> str:
    out: list[str] = []
    in_tag = False
    for ch in text:
        if in_tag:
            if ch == ">":
                in_tag = False
                out.append(" ")
        elif ch == "<":
            in_tag = True
        else:
            out.append(ch)
    return "".join(out)


def clean_text(raw: str) -> str:
    """Lowercase, strip HTML tags, decode entities, normalize whitespace.

    Idempotent: entities are decoded to a fixed point and any markup
    characters they reintroduce are dropped, so a second pass is a no-op.
    """
    text = _strip_tags(raw)
    while True:
        decoded = _ENTITY_RE.sub(_decode_entity, text)
        if decoded == text:
            break
        text = decoded
    text = text.lower()
    text = "".join(" " if ch in "<>" or ord(ch) < 32 or ord(ch) == 127 else ch for ch in text)
    return _SPACE_RE.sub(" ", text).strip()


def tokenize(text: str) -> list[str]:
    """Split cleaned text into maximal letter/digit runs."""
    return _TOKEN_RE.findall(text)


def lemmatize(token: str, table: LemmaTable) -> str:
    """Reduce a lowercase token to its lemma.

    The exceptions map wins outright; otherwise the first matching suffix
    rule is applied and the result re-examined until no rule fires, so the
    output is always a fixed point of the table.
    """
    current = token
    for _ in range(10):
        hit = table.exceptions.get(current)
        if hit is not None:
            return hit
        for pattern, replacement in table.suffix_rules:
            if not current.endswith(pattern):
                continue
            if replacement == pattern:
                return current  # guard rule: token is already stable
            if len(current) - len(pattern) >= _MIN_STEM:
                candidate = current[: len(current) - len(pattern)] + replacement
                break
        else:
            return current
        if candidate == current:
            return current
        current = candidate
    return current


def lemmatize_all(tokens: Iterable[str], table: LemmaTable) -> list[str]:
    return [lemmatize(t, table) for t in tokens]


def build_document(ad: "JobAd", table: LemmaTable) -> Document:
    """Clean, tokenize and lemmatize an ad's title followed by its description."""
    title_tokens = lemmatize_all(tokenize(clean_text(ad.title)), table)
    desc_tokens = lemmatize_all(tokenize(clean_text(ad.description)), table)
    tokens = tuple((title_tokens + desc_tokens)[:MAX_TOKENS_PER_DOCUMENT])
    return Document(ad_id=ad.ad_id, tokens=tokens, boundary=min(len(title_tokens), len(tokens)))


def load_lemma_table(path: str | Path) -> LemmaTable:
    """Parse a two-section table file.

    Format: an ``[exceptions]`` section of ``form<TAB>lemma`` lines and a
    ``[suffix_rules]`` section of ``pattern<TAB>replacement`` lines. A
    replacement of ``-`` (or an empty field) means "strip the suffix",
    so the file survives editors that trim trailing whitespace. Blank
    lines and ``#`` comments are skipped.
    """
    return _parse_lemma_table(Path(path).read_text(encoding="utf-8"))


def _parse_lemma_table(text: str) -> LemmaTable:
    exceptions: dict[str, str] = {}
    rules: list[tuple[str, str]] = []
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if line.strip() in ("[exceptions]", "[suffix_rules]"):
            section = line.strip()
            continue
        if section is None:
            raise ValueError(f"line {lineno}: entry before any section header")
        parts = line.split("\t")
        if len(parts) == 1 and section == "[suffix_rules]":
            parts = [parts[0], ""]
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected two tab-separated fields")
        key, value = parts[0].strip(), parts[1].strip()
        if value == "-":
            value = ""
        if section == "[exceptions]":
            exceptions[key] = value
        else:
            rules.append((key, value))
    return LemmaTable(exceptions=exceptions, suffix_rules=tuple(rules))


def default_lemma_table() -> LemmaTable:
    """The lemma table bundled with the package."""
    text = resources.files("vacobs.data").joinpath("lemma_table.txt").read_text("utf-8")
    return _parse_lemma_table(text)
