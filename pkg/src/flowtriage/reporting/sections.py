"""Parsing and rendering of the five-section incident response report."""
from __future__ import annotations

import re
from dataclasses import dataclass

SECTION_NAMES = (
    "Rationale",
    "Key Indicators",
    "Confidence Assessment",
    "Threat Assessment",
    "Recommendations",
)

_FIELDS = (
    "rationale",
    "key_indicators",
    "confidence_assessment",
    "threat_assessment",
    "recommendations",
)

# A heading may be numbered ("1. Rationale"), markdown-prefixed, bolded, or
# bare, in any letter case, alone on its line, with an optional colon.
_HEADING_RE = re.compile(
    r"^[ \t]*(?:#{1,6}[ \t]*)?(?:\d+[.):][ \t]*)?(?:\*\*)?"
    r"(rationale|key indicators|confidence assessment|threat assessment|recommendations)"
    r"(?:\*\*)?[ \t]*:?[ \t]*$",
    re.IGNORECASE | re.MULTILINE,
)

_NIST_RE = re.compile(r"NIST\s+SP\s*800-\d+[A-Z]?(?:\s+Rev\.?\s*\d+)?", re.IGNORECASE)
_MITRE_RE = re.compile(r"\bT\d{4}(?:\.\d{3})?\b")


class ReportParseError(ValueError):
    def __init__(self, message: str, missing: list[str] | None = None):
        super().__init__(message)
        self.missing = missing or []


@dataclass(frozen=True)
class ReportSections:
    rationale: str
    key_indicators: str
    confidence_assessment: str
    threat_assessment: str
    recommendations: str
    word_count: int
    citations: tuple[str, ...]

    def bodies(self) -> dict[str, str]:
        return {name: getattr(self, f) for name, f in zip(SECTION_NAMES, _FIELDS)}

    def to_dict(self) -> dict:
        return {
            "sections": self.bodies(),
            "word_count": self.word_count,
            "citations": list(self.citations),
        }


def extract_citations(text: str) -> tuple[str, ...]:
    """NIST SP and MITRE technique references, deduplicated, in order."""
    found: list[str] = []
    hits = sorted(
        [(m.start(), m.group()) for m in _NIST_RE.finditer(text)]
        + [(m.start(), m.group()) for m in _MITRE_RE.finditer(text)]
    )
    seen: set[str] = set()
    for _, cite in hits:
        normalized = re.sub(r"\s+", " ", cite)
        if normalized not in seen:
            seen.add(normalized)
            found.append(normalized)
    return tuple(found)


def parse_report(raw: str) -> ReportSections:
    """Split raw generator output on the five canonical headings.

    Text before the first heading is ignored. A missing heading is a
    structured error naming every absent section; a repeated heading is an
    error as well.
    """
    matches = list(_HEADING_RE.finditer(raw))
    seen: dict[str, int] = {}
    spans: list[tuple[str, int, int]] = []  # (canonical name, body start, heading start)
    for m in matches:
        name = _canonical(m.group(1))
        if name in seen:
            raise ReportParseError(f"duplicate section heading: {name}")
        seen[name] = m.start()
        spans.append((name, m.end(), m.start()))

    missing = [name for name in SECTION_NAMES if name not in seen]
    if missing:
        raise ReportParseError(
            f"report is missing sections: {', '.join(missing)}", missing=missing
        )

    bodies: dict[str, str] = {}
    for i, (name, body_start, _) in enumerate(spans):
        body_end = spans[i + 1][2] if i + 1 < len(spans) else len(raw)
        bodies[name] = raw[body_start:body_end].strip()

    word_count = sum(len(body.split()) for body in bodies.values())
    return ReportSections(
        rationale=bodies["Rationale"],
        key_indicators=bodies["Key Indicators"],
        confidence_assessment=bodies["Confidence Assessment"],
        threat_assessment=bodies["Threat Assessment"],
        recommendations=bodies["Recommendations"],
        word_count=word_count,
        citations=extract_citations(raw),
    )


def _canonical(heading: str) -> str:
    lowered = heading.strip().lower()
    for name in SECTION_NAMES:
        if name.lower() == lowered:
            return name
    raise ReportParseError(f"unrecognized heading {heading!r}")


def render_report(sections: ReportSections) -> str:
    """Canonical renderer: numbered headings, stripped bodies.

    parse_report(render_report(s)) reproduces s for sections whose bodies
    are whitespace-stripped and contain no heading-shaped lines.
    """
    parts = []
    for i, (name, f) in enumerate(zip(SECTION_NAMES, _FIELDS), start=1):
        parts.append(f"{i}. {name}\n{getattr(sections, f)}")
    return "\n\n".join(parts) + "\n"


def sections_from_bodies(bodies: dict[str, str]) -> ReportSections:
    """Build a ReportSections value from per-section body text."""
    stripped = {name: bodies[name].strip() for name in SECTION_NAMES}
    joined = "\n".join(stripped.values())
    return ReportSections(
        rationale=stripped["Rationale"],
        key_indicators=stripped["Key Indicators"],
        confidence_assessment=stripped["Confidence Assessment"],
        threat_assessment=stripped["Threat Assessment"],
        recommendations=stripped["Recommendations"],
        word_count=sum(len(b.split()) for b in stripped.values()),
        citations=extract_citations(joined),
    )
