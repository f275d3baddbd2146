from .metrics import (
    AlarmEvent,
    Confusion,
    EventCounts,
    alarms_from_labels,
    confusion,
    event_counts,
    event_scores,
    window_metrics,
)
from .scenario import (
    REFERENCE_TABLE,
    REPORT_COLUMNS,
    EvalReport,
    ReportRow,
    ScenarioConfig,
    compute_corpus_features,
    run_scenario,
)
from .splits import Fold, RecordingInfo, SkipEntry, SplitPlan, make_split

__all__ = [
    "AlarmEvent", "Confusion", "EvalReport", "EventCounts", "Fold", "REFERENCE_TABLE", "REPORT_COLUMNS",
    "RecordingInfo", "ReportRow", "ScenarioConfig", "SkipEntry", "SplitPlan", "alarms_from_labels",
    "compute_corpus_features", "confusion", "event_counts", "event_scores", "make_split", "run_scenario",
    "window_metrics",
]
