"""Knowledge base construction: chunking, relevance tagging, persistence.

Documents are segmented by a sliding token window with a configurable
overlap; window starts snap backward to a nearby sentence boundary when one
exists, approximating semantically coherent chunk edges. Chunks carry a
traffic-relevance label, the source citation label, and a section id.
"""
from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, Iterable

from flowtriage.text import sentence_start_indices, tokenize

KB_FORMAT_VERSION = "kb/1"
SOURCE_KINDS = ("NIST-SP", "MITRE-ATTACK", "CIS", "playbook", "signature-db")
RELEVANCE_LABELS = ("Benign", "DoS", "DDoS", "general")

# Section marker lines in ingested plain text: "# Detection and Analysis".
_SECTION_LINE_RE = re.compile(r"^\s*#+\s*(.+?)\s*$")

# Default keyword table for relevance tagging; a chunk takes the label with
# the most keyword hits, "general" on no hits or a tie between classes.
DEFAULT_RELEVANCE_RULES: dict[str, str] = {
    "ddos": "DDoS",
    "distributed": "DDoS",
    "botnet": "DDoS",
    "amplification": "DDoS",
    "reflection": "DDoS",
    "upstream": "DDoS",
    "dos": "DoS",
    "flood": "DoS",
    "flooding": "DoS",
    "syn": "DoS",
    "exhaustion": "DoS",
    "benign": "Benign",
    "normal": "Benign",
    "baseline": "Benign",
    "legitimate": "Benign",
}


class KBFormatError(ValueError):
    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


@dataclass(frozen=True)
class SourceDocument:
    doc_id: str
    title: str
    source_kind: str
    citation_label: str
    body: str
    section_markers: tuple[tuple[int, str], ...] = ()  # (token offset, section id)

    def __post_init__(self) -> None:
        if not self.body:
            raise ValueError(f"document {self.doc_id!r} has an empty body")
        if self.source_kind not in SOURCE_KINDS:
            raise ValueError(f"unknown source kind {self.source_kind!r}")


@dataclass(frozen=True)
class Chunk:
    chunk_id: str
    doc_id: str
    text: str
    token_span: tuple[int, int]
    relevance_label: str
    citation_label: str
    section_id: str
    snapped: bool = False

    def __post_init__(self) -> None:
        start, end = self.token_span
        if end <= start:
            raise ValueError(f"chunk {self.chunk_id!r} has empty span {self.token_span}")
        if self.relevance_label not in RELEVANCE_LABELS:
            raise ValueError(f"unknown relevance label {self.relevance_label!r}")
        if not self.citation_label:
            raise ValueError(f"chunk {self.chunk_id!r} missing citation label")

    @property
    def token_count(self) -> int:
        return self.token_span[1] - self.token_span[0]

    def to_dict(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "doc_id": self.doc_id,
            "span": list(self.token_span),
            "relevance_label": self.relevance_label,
            "citation_label": self.citation_label,
            "section_id": self.section_id,
            "snapped": self.snapped,
            "text": self.text,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Chunk":
        return cls(
            chunk_id=data["chunk_id"],
            doc_id=data["doc_id"],
            text=data["text"],
            token_span=(data["span"][0], data["span"][1]),
            relevance_label=data["relevance_label"],
            citation_label=data["citation_label"],
            section_id=data["section_id"],
            snapped=bool(data.get("snapped", False)),
        )


@dataclass(frozen=True)
class CorpusStats:
    document_frequencies: dict[str, int]
    avg_chunk_tokens: float
    n_chunks: int

    def to_dict(self) -> dict:
        return {
            "document_frequencies": dict(sorted(self.document_frequencies.items())),
            "avg_chunk_tokens": self.avg_chunk_tokens,
            "n_chunks": self.n_chunks,
        }


@dataclass
class KnowledgeBase:
    chunks: list[Chunk]
    corpus_stats: CorpusStats
    version: str = KB_FORMAT_VERSION

    def __len__(self) -> int:
        return len(self.chunks)

    def by_id(self, chunk_id: str) -> Chunk:
        try:
            return self._index[chunk_id]
        except AttributeError:
            self._index = {c.chunk_id: c for c in self.chunks}
            return self._index[chunk_id]

    @classmethod
    def from_chunks(cls, chunks: list[Chunk]) -> "KnowledgeBase":
        return cls(chunks=list(chunks), corpus_stats=compute_corpus_stats(chunks))


def compute_corpus_stats(chunks: Iterable[Chunk]) -> CorpusStats:
    df: Counter[str] = Counter()
    lengths = []
    for chunk in chunks:
        tokens = tokenize(chunk.text)
        lengths.append(len(tokens))
        df.update(set(tokens))
    n = len(lengths)
    avg = sum(lengths) / n if n else 0.0
    return CorpusStats(document_frequencies=dict(df), avg_chunk_tokens=avg, n_chunks=n)


def label_relevance(text: str, rules: dict[str, str] | None = None) -> str:
    """Pick the traffic class whose rule keywords hit the text most often."""
    rules = DEFAULT_RELEVANCE_RULES if rules is None else rules
    tokens = tokenize(text)
    joined = " ".join(tokens)
    hits: Counter[str] = Counter()
    for term, label in rules.items():
        term_tokens = tokenize(term)
        if len(term_tokens) == 1:
            hits[label] += tokens.count(term_tokens[0])
        elif term_tokens:
            hits[label] += joined.count(" ".join(term_tokens))
    if not hits or not any(hits.values()):
        return "general"
    top = hits.most_common()
    if len(top) > 1 and top[0][1] == top[1][1]:
        return "general"
    return top[0][0]


def chunk_document(
    doc: SourceDocument,
    chunk_size: int = 500,
    overlap: int = 200,
    *,
    snap_sentences: bool = True,
    snap_lookback: int = 50,
    relevance_rules: dict[str, str] | None = None,
) -> list[Chunk]:
    """Split one document into overlapping token-window chunks.

    Windows advance by (chunk_size - overlap) tokens. With snapping enabled
    a window start moves backward to the nearest sentence boundary within
    `snap_lookback` tokens; the chunk is then flagged as snapped. Each chunk
    inherits the section id active at its start offset.
    """
    if overlap < 0:
        raise ValueError("overlap must be nonnegative")
    if chunk_size <= overlap:
        raise ValueError(f"chunk_size ({chunk_size}) must exceed overlap ({overlap})")

    tokens = tokenize(doc.body)
    if not tokens:
        return []
    starts = sentence_start_indices(doc.body) if snap_sentences else set()

    stride = chunk_size - overlap
    chunks: list[Chunk] = []
    nominal = 0
    index = 0
    while True:
        end = min(nominal + chunk_size, len(tokens))
        begin = nominal
        snapped = False
        if snap_sentences and begin > 0 and begin not in starts:
            for back in range(1, snap_lookback + 1):
                if begin - back < 0:
                    break
                if (begin - back) in starts:
                    begin -= back
                    snapped = True
                    break
        chunks.append(
            Chunk(
                chunk_id=f"{doc.doc_id}:{index:04d}",
                doc_id=doc.doc_id,
                text=" ".join(tokens[begin:end]),
                token_span=(begin, end),
                relevance_label=label_relevance(" ".join(tokens[begin:end]), relevance_rules),
                citation_label=doc.citation_label,
                section_id=_section_at(doc.section_markers, begin),
                snapped=snapped,
            )
        )
        if end >= len(tokens):
            break
        nominal += stride
        index += 1
    return chunks


def _section_at(markers: tuple[tuple[int, str], ...], offset: int) -> str:
    section = ""
    for marker_offset, section_id in markers:
        if marker_offset <= offset:
            section = section_id
        else:
            break
    return section


def parse_document_text(
    raw: str,
    doc_id: str,
    title: str,
    source_kind: str,
    citation_label: str,
) -> SourceDocument:
    """Build a document from plain text with optional '#' section marker lines.

    Marker lines name the section for all following text and are removed
    from the body; offsets are recorded in token indices.
    """
    body_parts: list[str] = []
    markers: list[tuple[int, str]] = []
    token_count = 0
    for line in raw.splitlines():
        m = _SECTION_LINE_RE.match(line)
        if m and line.lstrip().startswith("#"):
            section_id = re.sub(r"[^a-z0-9]+", "-", m.group(1).lower()).strip("-")
            markers.append((token_count, section_id))
        else:
            body_parts.append(line)
            token_count += len(tokenize(line))
    return SourceDocument(
        doc_id=doc_id,
        title=title,
        source_kind=source_kind,
        citation_label=citation_label,
        body="\n".join(body_parts),
        section_markers=tuple(markers),
    )


def persist_kb(kb: KnowledgeBase, sink: str | Path | IO[str]) -> None:
    """Write the KB as line-delimited JSON: one header line, one chunk per line."""
    header = {"version": kb.version, "corpus_stats": kb.corpus_stats.to_dict()}
    lines = [json.dumps(header, sort_keys=True)]
    lines.extend(json.dumps(c.to_dict(), sort_keys=True) for c in kb.chunks)
    payload = "\n".join(lines) + "\n"
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(payload, encoding="utf-8")
    else:
        sink.write(payload)


def load_kb(source: str | Path | IO[str]) -> KnowledgeBase:
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    lines = text.splitlines()
    if not lines:
        raise KBFormatError("empty knowledge base file")

    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise KBFormatError(f"corrupt header: {exc}", line_number=1) from None
    version = header.get("version")
    if version != KB_FORMAT_VERSION:
        raise KBFormatError(
            f"knowledge base version {version!r} not supported (expected {KB_FORMAT_VERSION!r})"
        )

    chunks: list[Chunk] = []
    for line_number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            chunks.append(Chunk.from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, IndexError, TypeError, ValueError) as exc:
            raise KBFormatError(f"corrupt chunk record: {exc}", line_number=line_number) from None

    stats_doc = header.get("corpus_stats", {})
    stats = CorpusStats(
        document_frequencies=dict(stats_doc.get("document_frequencies", {})),
        avg_chunk_tokens=float(stats_doc.get("avg_chunk_tokens", 0.0)),
        n_chunks=int(stats_doc.get("n_chunks", len(chunks))),
    )
    return KnowledgeBase(chunks=chunks, corpus_stats=stats, version=version)


def build_kb(
    docs: Iterable[SourceDocument],
    chunk_size: int = 500,
    overlap: int = 200,
    *,
    snap_sentences: bool = True,
    relevance_rules: dict[str, str] | None = None,
) -> KnowledgeBase:
    chunks: list[Chunk] = []
    for doc in docs:
        chunks.extend(
            chunk_document(
                doc,
                chunk_size,
                overlap,
                snap_sentences=snap_sentences,
                relevance_rules=relevance_rules,
            )
        )
    return KnowledgeBase.from_chunks(chunks)
