"""Report rubric scoring, aggregation and inter-group agreement."""

from .aggregate import (
    SCORE_DIMENSIONS,
    DimensionScores,
    ModelSummary,
    ScoreRow,
    aggregate_scores,
    format_summary_table,
    load_expert_query_scores,
    load_table2_fixture,
    rank_models,
    read_score_table,
    read_scores,
    write_scores,
    write_summary,
)
from .agreement import (
    AgreementTable,
    RankVector,
    UndefinedCorrelationError,
    competition_ranks,
    group_agreement,
    kendall_tau,
)
from .linters import (
    DIMENSIONS,
    PhraseScan,
    Violation,
    count_data_dimensions,
    default_lexicon,
    detect_forbidden_phrases,
    dimensions_with_data,
    polarity,
)
from .rubric import (
    JudgeInput,
    Provenance,
    RubricError,
    RubricScore,
    ScoreMode,
    StructureCheck,
    check_structure,
    data_score,
    detect_contradictions,
    heuristic_judge,
    score_report,
)

__all__ = [
    "SCORE_DIMENSIONS", "DimensionScores", "ModelSummary", "ScoreRow", "aggregate_scores",
    "format_summary_table", "load_expert_query_scores", "load_table2_fixture", "rank_models",
    "read_score_table", "read_scores", "write_scores", "write_summary",
    "AgreementTable", "RankVector", "UndefinedCorrelationError", "competition_ranks",
    "group_agreement", "kendall_tau",
    "DIMENSIONS", "PhraseScan", "Violation", "count_data_dimensions", "default_lexicon",
    "detect_forbidden_phrases", "dimensions_with_data", "polarity",
    "JudgeInput", "Provenance", "RubricError", "RubricScore", "ScoreMode", "StructureCheck",
    "check_structure", "data_score", "detect_contradictions", "heuristic_judge", "score_report",
]
