"""Language-agent evaluators called by the search loop.

Both evaluators render the same prompts and parse the same structured replies.
They differ only in where the raw reply comes from: :class:`LlmEvaluator`
asks a chat-completions endpoint, :class:`MockEvaluator` answers from a
:class:`~akeys.synthetic.SyntheticWorld` so whole searches can be checked
against a known ground truth.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple

from .captions import CaptionRecord
from .llm_client import LlmClient, LlmError
from .prompts import (
    MAX_ATTEMPTS,
    REASK_SUFFIX,
    PromptCatalog,
    StructuredParseError,
    default_catalog,
    format_candidates,
    format_captions,
    format_options,
    parse_structured,
)
from .segment_tree import VideoSegment
from .synthetic import SyntheticWorld
from .tasks import LETTERS, QATask

FAILED_CONFIDENCE = 1
UNIFORM_PRIORITY = 0.5


class CostVariant(str, enum.Enum):
    BFS = "bfs"
    GBFS = "gbfs"
    DIJKSTRA = "dijkstra"
    ASTAR = "astar"

    @classmethod
    def parse(cls, name: str) -> "CostVariant":
        try:
            return cls(name.lower())
        except ValueError:
            valid = ", ".join(v.value for v in cls)
            raise ValueError(f"unknown algorithm {name!r}; valid variants: {valid}") from None


class EvaluatorFailure(Exception):
    def __init__(self, message: str, transcript: Optional[List[Tuple[str, str]]] = None):
        super().__init__(message)
        self.transcript = transcript or []


class ParseExhausted(EvaluatorFailure):
    pass


@dataclass
class AgentVerdict:
    kind: str  # "answer" | "confidence" | "cost"
    answer: Optional[int] = None
    rationale: str = ""
    confidence: Optional[int] = None
    priorities: Optional[Dict[int, float]] = None
    transcript: List[Tuple[str, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "answer": self.answer,
            "rationale": self.rationale,
            "confidence": self.confidence,
            "priorities": None if self.priorities is None
            else {str(k): v for k, v in sorted(self.priorities.items())},
            "transcript": [{"prompt": p, "response": r} for p, r in self.transcript],
        }


class Evaluator:
    """Prompted evaluator; subclasses implement :meth:`respond`.

    ``astar_mode="split"`` issues separate missing-information and
    scene-change queries and keeps the smaller score per segment;
    ``"joint"`` asks a single combined question.
    """

    def __init__(self, catalog: Optional[PromptCatalog] = None, astar_mode: str = "split"):
        if astar_mode not in ("split", "joint"):
            raise ValueError(f"astar_mode must be 'split' or 'joint', got {astar_mode!r}")
        self.catalog = catalog or default_catalog()
        self.astar_mode = astar_mode
        self.queries = 0

    def respond(self, template_id: str, prompt: str, context: Mapping[str, object]) -> str:
        raise NotImplementedError

    def _ask(self, template_id: str, context: Dict[str, object], required: Set[str]):
        prompt = self.catalog.render(template_id, context)
        transcript: List[Tuple[str, str]] = []
        for attempt in range(MAX_ATTEMPTS):
            text = prompt if attempt == 0 else prompt + REASK_SUFFIX
            self.queries += 1
            try:
                raw = self.respond(template_id, text, context)
            except LlmError as exc:
                raise EvaluatorFailure(f"{template_id}: {exc}", transcript) from exc
            transcript.append((text, raw))
            try:
                fields = parse_structured(raw)
            except StructuredParseError:
                continue
            if required <= fields.keys():
                return fields, transcript
        raise ParseExhausted(f"{template_id}: no parsable reply after {MAX_ATTEMPTS} attempts", transcript)

    @staticmethod
    def _task_context(task: QATask, visible: Sequence[CaptionRecord]) -> Dict[str, object]:
        if not visible:
            raise ValueError("no visible frames to reason about")
        return {
            "question": task.question,
            "options": format_options(task.options),
            "captions": format_captions(visible),
            "_task": task,
            "_visible": list(visible),
        }

    def predict_answer(self, task: QATask, visible: Sequence[CaptionRecord]) -> AgentVerdict:
        ctx = self._task_context(task, visible)
        fields, tr = self._ask("answer", ctx, {"answer"})
        return AgentVerdict("answer", answer=fields["answer"],
                            rationale=fields.get("rationale", ""), transcript=tr)

    def confidence_self_eval(self, task: QATask, visible: Sequence[CaptionRecord],
                             prior: AgentVerdict) -> AgentVerdict:
        if prior.kind != "answer" or prior.answer is None:
            raise ValueError("self-evaluation needs an answer verdict")
        ctx = self._task_context(task, visible)
        ctx.update(prior_letter=LETTERS[prior.answer], prior_rationale=prior.rationale or "(none)",
                   _prior=prior)
        fields, tr = self._ask("self_eval", ctx, {"confidence"})
        return AgentVerdict("confidence", answer=prior.answer, confidence=fields["confidence"],
                            transcript=tr)

    def confidence_summarize(self, task: QATask, visible: Sequence[CaptionRecord]) -> AgentVerdict:
        ctx = self._task_context(task, visible)
        ctx["fewshot"] = self.catalog.fewshot_block()
        fields, tr = self._ask("summarize", ctx, {"answer", "confidence"})
        return AgentVerdict("confidence", answer=fields["answer"], confidence=fields["confidence"],
                            rationale=fields.get("summary", ""), transcript=tr)

    def _select(self, template_id: str, ctx: Dict[str, object],
                candidates: Sequence[VideoSegment]) -> Tuple[Dict[int, float], List[Tuple[str, str]]]:
        fields, tr = self._ask(template_id, ctx, {"segments"})
        chosen = set(fields["segments"])
        return {s.id: 1.0 if s.id in chosen else 0.0 for s in candidates}, tr

    def evaluate_cost(self, variant: CostVariant, task: QATask, visible: Sequence[CaptionRecord],
                      candidates: Sequence[VideoSegment], beam: int = 2) -> AgentVerdict:
        if variant is CostVariant.BFS:
            raise ValueError("breadth-first search does not use a cost function")
        if not candidates:
            raise ValueError("no candidate segments")
        blind = {
            "captions": format_captions(visible),
            "candidates": format_candidates(candidates),
            "beam": beam,
            "_visible": list(visible),
            "_candidates": list(candidates),
        }
        if variant is CostVariant.DIJKSTRA:
            # the question and options never enter this context
            scores, tr = self._select("cost_dijkstra", blind, candidates)
            return AgentVerdict("cost", priorities=scores, transcript=tr)

        informed = dict(blind, **self._task_context(task, visible))
        if variant is CostVariant.GBFS:
            scores, tr = self._select("cost_gbfs", informed, candidates)
        elif self.astar_mode == "joint":
            scores, tr = self._select("cost_astar", informed, candidates)
        else:
            h, tr_h = self._select("cost_gbfs", informed, candidates)
            g, tr_g = self._select("cost_dijkstra", blind, candidates)
            scores = {k: min(h[k], g[k]) for k in h}
            tr = tr_h + tr_g
        return AgentVerdict("cost", priorities=scores, transcript=tr)


class LlmEvaluator(Evaluator):
    def __init__(self, client: LlmClient, catalog: Optional[PromptCatalog] = None,
                 astar_mode: str = "split"):
        super().__init__(catalog, astar_mode)
        self.client = client

    def respond(self, template_id, prompt, context):
        return self.client.complete(self.catalog.system, prompt)


_SCENE_RE = re.compile(r"^Scene (.+?):")
_KEY_RE = re.compile(r"Key event: the camera wearer (.+?)\.")


def scene_label(caption: str) -> Optional[str]:
    m = _SCENE_RE.match(caption)
    return m.group(1) if m else None


def key_action(caption: str) -> Optional[str]:
    m = _KEY_RE.search(caption)
    return m.group(1) if m else None


class MockEvaluator(Evaluator):
    """Deterministic stand-in for the language agent.

    Rules, applied to the captions it is shown:

    * answer: the option named by any visible key-event caption, otherwise a
      fixed distractor derived from the world seed;
    * confidence (both estimators): 10 once the key event is corroborated by
      ``min(2, key length)`` visible key frames, 6 on a single glimpse, 2 with
      no key evidence;
    * scene change (g): 1.0 if a segment's endpoint captions name different
      scenes;
    * missing information (h): 1.0 if a key frame lies strictly inside the
      segment. This is the only rule that consults the world directly.

    ``confidence_cap``/``confidence_floor`` clamp every confidence score.
    """

    def __init__(self, world: SyntheticWorld, catalog: Optional[PromptCatalog] = None,
                 astar_mode: str = "split", confidence_cap: Optional[int] = None,
                 confidence_floor: Optional[int] = None):
        super().__init__(catalog, astar_mode)
        self.world = world
        self.confidence_cap = confidence_cap
        self.confidence_floor = confidence_floor

    def _evidence(self, visible: Sequence[CaptionRecord]) -> List[Tuple[int, str]]:
        return [(r.frame, a) for r in visible if (a := key_action(r.caption)) is not None]

    def _answer(self, task: QATask, visible) -> Tuple[int, str]:
        ev = self._evidence(visible)
        for frame, action in ev:
            if action in task.options:
                return task.options.index(action), f"frame {frame} shows the camera wearer {action}"
        return self.world.distractor, "no visible frame shows the decisive event; guessing"

    def _confidence(self, visible) -> int:
        seen = len(self._evidence(visible))
        need = min(2, self.world.key_interval[1] - self.world.key_interval[0] + 1)
        c = 10 if seen >= need else 6 if seen else 2
        if self.confidence_floor is not None:
            c = max(c, self.confidence_floor)
        if self.confidence_cap is not None:
            c = min(c, self.confidence_cap)
        return c

    def _scene_change(self, seg: VideoSegment, visible) -> bool:
        by_frame = {r.frame: r.caption for r in visible}
        return scene_label(by_frame[seg.start]) != scene_label(by_frame[seg.end])

    def _hides_key(self, seg: VideoSegment) -> bool:
        return seg.contains_interior(*self.world.key_interval)

    def respond(self, template_id, prompt, context):
        visible = context["_visible"]
        if template_id == "answer":
            idx, why = self._answer(context["_task"], visible)
            reply = {"answer": LETTERS[idx], "rationale": why}
        elif template_id == "self_eval":
            reply = {"confidence": self._confidence(visible)}
        elif template_id == "summarize":
            labels: List[str] = []
            for r in visible:
                lab = scene_label(r.caption)
                if lab and (not labels or labels[-1] != lab):
                    labels.append(lab)
            idx, _ = self._answer(context["_task"], visible)
            reply = {"summary": " then ".join(labels), "answer": LETTERS[idx],
                     "confidence": self._confidence(visible)}
        elif template_id in ("cost_gbfs", "cost_dijkstra", "cost_astar"):
            chosen = []
            for seg in context["_candidates"]:
                h = self._hides_key(seg)
                g = self._scene_change(seg, visible)
                hit = {"cost_gbfs": h, "cost_dijkstra": g, "cost_astar": h and g}[template_id]
                if hit:
                    chosen.append(seg.id)
            reply = {"segments": chosen}
        else:
            raise ValueError(f"mock has no rule for template {template_id!r}")
        return json.dumps(reply, sort_keys=True)
