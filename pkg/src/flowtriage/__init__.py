"""Flow triage toolkit: classify network flows, attribute the decision,
retrieve grounded mitigation guidance, and generate structured reports."""

__version__ = "0.1.0"

from flowtriage.flows.types import ClassLabel

__all__ = ["ClassLabel", "__version__"]
