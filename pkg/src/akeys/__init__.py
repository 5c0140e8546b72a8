"""Agentic keyframe search for caption-based video question answering."""

from .captions import AccessLog, CaptionRecord, CaptionStore, load_captions, read_visible
from .evaluators import AgentVerdict, CostVariant, LlmEvaluator, MockEvaluator
from .search import SearchConfig, SearchResult, check_termination, run_search, select_and_expand
from .segment_tree import SegmentTree, VideoSegment, uniform_segment
from .tasks import QATask

__all__ = [
    "AccessLog", "AgentVerdict", "CaptionRecord", "CaptionStore", "CostVariant", "LlmEvaluator",
    "MockEvaluator", "QATask", "SearchConfig", "SearchResult", "SegmentTree", "VideoSegment",
    "check_termination", "load_captions", "read_visible", "run_search", "select_and_expand",
    "uniform_segment",
]
