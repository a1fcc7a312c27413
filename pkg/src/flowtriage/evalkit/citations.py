"""Knowledge-grounding statistics over parsed reports."""
from __future__ import annotations

from dataclasses import dataclass

from flowtriage.reporting.sections import ReportSections


@dataclass(frozen=True)
class CitationStats:
    nist_rate: float
    mitre_rate: float
    mean_citations: float
    n_reports: int

    def to_dict(self) -> dict:
        return {
            "nist_citation_rate": self.nist_rate,
            "mitre_citation_rate": self.mitre_rate,
            "mean_citations_per_report": self.mean_citations,
            "n_reports": self.n_reports,
        }


def citation_stats(reports: list[ReportSections]) -> CitationStats:
    """Fraction of reports citing each source family plus mean citation count."""
    if not reports:
        raise ValueError("cannot compute citation statistics over zero reports")
    nist_hits = mitre_hits = 0
    total = 0
    for report in reports:
        has_nist = any(c.upper().startswith("NIST") for c in report.citations)
        has_mitre = any(c.startswith("T") for c in report.citations)
        nist_hits += has_nist
        mitre_hits += has_mitre
        total += len(report.citations)
    n = len(reports)
    return CitationStats(
        nist_rate=nist_hits / n,
        mitre_rate=mitre_hits / n,
        mean_citations=total / n,
        n_reports=n,
    )
