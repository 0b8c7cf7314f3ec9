"""Tool-augmented single-stock analysis reports and their rubric scoring."""

from .orchestrator import AnalyzeRequest, AnalyzeResponse, analyze
from .report import Report

__version__ = "0.1.0"

__all__ = ["AnalyzeRequest", "AnalyzeResponse", "Report", "__version__", "analyze"]
