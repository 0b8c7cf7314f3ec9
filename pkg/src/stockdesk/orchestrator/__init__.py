"""Query-to-report orchestration."""

from .backend import (
    BackendConfig,
    BackendConfigError,
    BackendError,
    BackendUnavailableError,
    request_payload,
    synthesize_llm,
)
from .pipeline import AnalyzeRequest, AnalyzeResponse, PipelineError, analyze
from .planning import (
    AmbiguityError,
    AnalysisPlan,
    BackgroundDoc,
    PlanError,
    ResolutionError,
    UnresolvedInstrumentError,
    assemble_background,
    plan_analysis,
    resolve_instrument,
)
from .prompt import FewShot, PromptDocument, build_prompt, load_fewshots
from .synthesis import SynthesisError, synthesize_template

__all__ = [
    "AmbiguityError", "AnalysisPlan", "AnalyzeRequest", "AnalyzeResponse", "BackendConfig",
    "BackendConfigError", "BackendError", "BackendUnavailableError", "BackgroundDoc", "FewShot",
    "PipelineError", "PlanError", "PromptDocument", "ResolutionError", "SynthesisError",
    "UnresolvedInstrumentError", "analyze", "assemble_background", "build_prompt", "load_fewshots",
    "plan_analysis", "request_payload", "resolve_instrument", "synthesize_llm", "synthesize_template",
]
