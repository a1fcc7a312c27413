"""Query expansion from a domain synonym dictionary."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO

from flowtriage.text import tokenize

DEFAULT_THESAURUS: dict[str, tuple[str, ...]] = {
    "dos": ("denial of service", "resource exhaustion", "flooding"),
    "ddos": ("distributed denial of service", "botnet flood", "amplification attack"),
    "benign": ("normal traffic", "legitimate activity"),
    "flood": ("volumetric attack", "traffic surge"),
    "scan": ("reconnaissance", "probing"),
}


@dataclass(frozen=True)
class ExpansionThesaurus:
    """Lowercased single-token terms mapped to synonym phrases."""

    entries: dict[str, tuple[str, ...]]

    def __post_init__(self) -> None:
        normalized: dict[str, tuple[str, ...]] = {}
        for term, synonyms in self.entries.items():
            key = term.strip().lower()
            toks = tokenize(key)
            if len(toks) != 1:
                raise ValueError(f"thesaurus terms must be single tokens, got {term!r}")
            key = toks[0]
            syns = tuple(s.strip().lower() for s in synonyms)
            if key in syns:
                raise ValueError(f"term {term!r} maps to itself")
            normalized[key] = syns
        object.__setattr__(self, "entries", normalized)

    @classmethod
    def default(cls) -> "ExpansionThesaurus":
        return cls(entries=dict(DEFAULT_THESAURUS))

    @classmethod
    def load(cls, source: str | Path | IO[str]) -> "ExpansionThesaurus":
        if isinstance(source, (str, Path)):
            doc = json.loads(Path(source).read_text(encoding="utf-8"))
        else:
            doc = json.load(source)
        return cls(entries={term: tuple(syns) for term, syns in doc.items()})


def expand_query(query: str, thesaurus: ExpansionThesaurus | None = None) -> str:
    """Append synonyms of matched query terms, once each, after the original.

    The original text is preserved verbatim; a synonym already appended (by
    this or another matched term) is not appended again.
    """
    thesaurus = thesaurus or ExpansionThesaurus.default()
    appended: list[str] = []
    seen: set[str] = set()
    for token in tokenize(query):
        for synonym in thesaurus.entries.get(token, ()):
            if synonym not in seen:
                seen.add(synonym)
                appended.append(synonym)
    if not appended:
        return query
    return query + " " + " ".join(appended)
