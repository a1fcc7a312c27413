from flowtriage.reporting.prompt import (
    DetectionContext,
    PromptDocument,
    PromptError,
    build_prompt,
    build_retrieval_query,
)
from flowtriage.reporting.generation import (
    AuditLog,
    EchoClient,
    GeneratedReport,
    GenerationClient,
    GenerationError,
    GenerationLimits,
    HttpGenerationClient,
    SectionTemplateClient,
    generate_report,
)
from flowtriage.reporting.sections import (
    ReportParseError,
    ReportSections,
    SECTION_NAMES,
    extract_citations,
    parse_report,
    render_report,
)

__all__ = [
    "AuditLog",
    "DetectionContext",
    "EchoClient",
    "GeneratedReport",
    "GenerationClient",
    "GenerationError",
    "GenerationLimits",
    "HttpGenerationClient",
    "PromptDocument",
    "PromptError",
    "ReportParseError",
    "ReportSections",
    "SECTION_NAMES",
    "SectionTemplateClient",
    "build_prompt",
    "build_retrieval_query",
    "extract_citations",
    "generate_report",
    "parse_report",
    "render_report",
]
