from flowtriage.pipeline.config import ConfigError, PipelineConfig
from flowtriage.pipeline.runtime import PipelineRuntime
from flowtriage.pipeline.run import FlowOutcome, run_pipeline, write_outcomes

__all__ = [
    "ConfigError",
    "FlowOutcome",
    "PipelineConfig",
    "PipelineRuntime",
    "run_pipeline",
    "write_outcomes",
]
