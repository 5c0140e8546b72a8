"""The agentic keyframe search loop.

Each iteration reads the visible frames, predicts an answer, asks two
independent confidence estimators, and stops once both reach the threshold.
Otherwise the agent scores the expandable leaves and the best ``B`` of them
are split in half (or all of them, for breadth-first search).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

from .captions import AccessLog, CaptionStore, read_visible
from .evaluators import (
    FAILED_CONFIDENCE,
    UNIFORM_PRIORITY,
    AgentVerdict,
    CostVariant,
    Evaluator,
    EvaluatorFailure,
)
from .segment_tree import SegmentTree, uniform_segment
from .tasks import QATask

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


class NoExpandableLeaves(Exception):
    pass


@dataclass(frozen=True)
class SearchConfig:
    M: int = 4
    B: int = 2
    C: int = 8
    T: int = 10
    variant: CostVariant = CostVariant.ASTAR
    fps: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.variant, str) and not isinstance(self.variant, CostVariant):
            object.__setattr__(self, "variant", CostVariant.parse(self.variant))
        if self.M < 1:
            raise ConfigError(f"M must be >= 1, got {self.M}")
        if self.B < 1:
            raise ConfigError(f"beam size must be >= 1, got {self.B}")
        if not 1 <= self.C <= 10:
            raise ConfigError(f"confidence threshold must be in 1..10, got {self.C}")
        if self.T < 1:
            raise ConfigError(f"max iterations must be >= 1, got {self.T}")
        if self.fps <= 0:
            raise ConfigError(f"fps must be positive, got {self.fps}")

    def to_dict(self) -> dict:
        return {"M": self.M, "B": self.B, "C": self.C, "T": self.T,
                "variant": self.variant.value, "fps": self.fps, "seed": self.seed}


@dataclass
class IterationRecord:
    t: int
    visible: List[int]
    answer: Optional[AgentVerdict] = None
    self_eval: Optional[AgentVerdict] = None
    summary: Optional[AgentVerdict] = None
    c1: int = FAILED_CONFIDENCE
    c2: int = FAILED_CONFIDENCE
    cost: Optional[AgentVerdict] = None
    priorities: Optional[Dict[int, float]] = None
    expanded: List[int] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)

    @property
    def verdicts(self) -> List[AgentVerdict]:
        return [v for v in (self.answer, self.self_eval, self.summary, self.cost) if v is not None]

    def to_dict(self) -> dict:
        def dump(v):
            return None if v is None else v.to_dict()
        return {
            "t": self.t,
            "visible": self.visible,
            "answer": dump(self.answer),
            "self_eval": dump(self.self_eval),
            "summary": dump(self.summary),
            "c1": self.c1,
            "c2": self.c2,
            "cost": dump(self.cost),
            "priorities": None if self.priorities is None
            else {str(k): v for k, v in sorted(self.priorities.items())},
            "expanded": self.expanded,
            "failures": self.failures,
        }


@dataclass
class SearchResult:
    answer: Optional[int]
    keyframes: List[int]
    visible_count: int
    iterations: int
    terminated_by: str  # "confidence" | "iteration_cap" | "saturated"
    trace: List[IterationRecord]
    tree: SegmentTree
    access_log: AccessLog
    config: SearchConfig
    task: QATask

    @property
    def agent_queries(self) -> int:
        return sum(len(v.transcript) for rec in self.trace for v in rec.verdicts)

    def to_dict(self) -> dict:
        return {
            "task": self.task.to_dict(),
            "config": self.config.to_dict(),
            "answer": self.answer,
            "keyframes": self.keyframes,
            "visible_count": self.visible_count,
            "iterations": self.iterations,
            "terminated_by": self.terminated_by,
            "agent_queries": self.agent_queries,
            "tree": self.tree.to_dict(),
            "trace": [r.to_dict() for r in self.trace],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"


def check_termination(c1: int, c2: int, C: int) -> bool:
    return c1 >= C and c2 >= C


def select_and_expand(tree: SegmentTree, priorities: Optional[Mapping[int, float]], B: int,
                      variant: CostVariant) -> List[int]:
    """Split the chosen leaves; returns the ids that were expanded.

    Ties on score go to the earliest-starting leaf.
    """
    candidates = tree.expandable_leaves()
    if not candidates:
        raise NoExpandableLeaves("every leaf spans fewer than 2 frames")
    if variant is CostVariant.BFS:
        chosen = candidates
    else:
        if priorities is None or any(i not in priorities for i in candidates):
            raise ValueError("priorities must cover every expandable leaf")
        ranked = sorted(candidates, key=lambda i: (-priorities[i], tree.nodes[i].start))
        chosen = ranked[:B]
    for seg_id in chosen:
        tree.expand(seg_id)
    return list(chosen)


def run_search(task: QATask, store: CaptionStore, config: SearchConfig,
               evaluator: Evaluator) -> SearchResult:
    store.check_fps(config.fps)
    tree = uniform_segment(store.n_frames, config.M)
    access = AccessLog()
    trace: List[IterationRecord] = []
    answer: Optional[int] = None
    terminated_by = "iteration_cap"

    for t in range(1, config.T + 1):
        frames = tree.visible_frames()
        visible = read_visible(store, frames, access)
        rec = IterationRecord(t, frames)
        trace.append(rec)

        try:
            rec.answer = evaluator.predict_answer(task, visible)
            answer = rec.answer.answer
        except EvaluatorFailure as exc:
            rec.answer = AgentVerdict("answer", answer=answer, rationale="carried over",
                                      transcript=exc.transcript)
            rec.failures.append(f"answer: {exc}")

        if rec.answer.answer is not None:
            try:
                rec.self_eval = evaluator.confidence_self_eval(task, visible, rec.answer)
                rec.c1 = rec.self_eval.confidence
            except EvaluatorFailure as exc:
                rec.self_eval = AgentVerdict("confidence", confidence=FAILED_CONFIDENCE,
                                             transcript=exc.transcript)
                rec.failures.append(f"self_eval: {exc}")
        try:
            rec.summary = evaluator.confidence_summarize(task, visible)
            rec.c2 = rec.summary.confidence
        except EvaluatorFailure as exc:
            rec.summary = AgentVerdict("confidence", confidence=FAILED_CONFIDENCE,
                                       transcript=exc.transcript)
            rec.failures.append(f"summarize: {exc}")

        # a failed prediction carries an old answer; never stop on it
        if not rec.failures and check_termination(rec.c1, rec.c2, config.C):
            terminated_by = "confidence"
            break
        if t == config.T:
            # an expansion now could never be read, so skip it
            break

        candidates = tree.expandable_leaves()
        if not candidates:
            terminated_by = "saturated"
            break
        if config.variant is not CostVariant.BFS:
            segs = [tree.nodes[i] for i in candidates]
            try:
                rec.cost = evaluator.evaluate_cost(config.variant, task, visible, segs, config.B)
                rec.priorities = dict(rec.cost.priorities)
            except EvaluatorFailure as exc:
                rec.cost = AgentVerdict("cost", transcript=exc.transcript)
                rec.priorities = {i: UNIFORM_PRIORITY for i in candidates}
                rec.failures.append(f"cost: {exc}")
        rec.expanded = select_and_expand(tree, rec.priorities, config.B, config.variant)
        log.debug("t=%d expanded %s", t, rec.expanded)

    keyframes = tree.visible_frames()
    return SearchResult(
        answer=answer,
        keyframes=keyframes,
        visible_count=len(keyframes),
        iterations=len(trace),
        terminated_by=terminated_by,
        trace=trace,
        tree=tree,
        access_log=access,
        config=config,
        task=task,
    )
