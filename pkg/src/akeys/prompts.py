"""Prompt templates and structured-output parsing for the language agent."""

from __future__ import annotations

import json
import re
from pathlib import Path
from string import Template
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Union

from .captions import CaptionRecord
from .segment_tree import VideoSegment
from .tasks import LETTERS

TEMPLATE_IDS = ("answer", "self_eval", "summarize", "cost_gbfs", "cost_dijkstra", "cost_astar")
DEFAULT_TEMPLATE_DIR = Path(__file__).with_name("templates")
MAX_ATTEMPTS = 3

REASK_SUFFIX = (
    "\n\nYour previous reply could not be parsed. Reply again and make sure it contains "
    "exactly one JSON object with the requested fields."
)


class PromptError(Exception):
    pass


class UnknownTemplate(PromptError):
    pass


class MissingPlaceholder(PromptError):
    pass


class StructuredParseError(ValueError):
    pass


class PromptCatalog:
    """Template texts plus few-shot exemplars, loaded from one directory."""

    def __init__(self, directory: Union[str, Path, None] = None,
                 fewshot_paths: Optional[Sequence[Union[str, Path]]] = None):
        self.directory = Path(directory) if directory else DEFAULT_TEMPLATE_DIR
        self.templates: Dict[str, str] = {}
        for tid in TEMPLATE_IDS:
            path = self.directory / f"{tid}.txt"
            if path.exists():
                self.templates[tid] = path.read_text(encoding="utf-8")
        system = self.directory / "system.txt"
        if not system.exists():
            system = DEFAULT_TEMPLATE_DIR / "system.txt"
        self.system = system.read_text(encoding="utf-8").strip()
        if fewshot_paths is None:
            fewshot_paths = sorted(self.directory.glob("fewshot_*.txt"))
        self.fewshot = [Path(p).read_text(encoding="utf-8").strip() for p in fewshot_paths]

    def render(self, template_id: str, context: Mapping[str, object]) -> str:
        if template_id not in self.templates:
            raise UnknownTemplate(template_id)
        try:
            return Template(self.templates[template_id]).substitute(context)
        except KeyError as exc:
            raise MissingPlaceholder(f"template {template_id!r} needs {exc.args[0]!r}") from None

    def fewshot_block(self) -> str:
        return "\n\n".join(f"Example {i}:\n{text}" for i, text in enumerate(self.fewshot, 1))


_default_catalog: Optional[PromptCatalog] = None


def default_catalog() -> PromptCatalog:
    global _default_catalog
    if _default_catalog is None:
        _default_catalog = PromptCatalog()
    return _default_catalog


def build_prompt(template_id: str, context: Mapping[str, object],
                 catalog: Optional[PromptCatalog] = None) -> str:
    return (catalog or default_catalog()).render(template_id, context)


def format_captions(records: Iterable[CaptionRecord]) -> str:
    return "\n".join(f"[t={r.t:g}s] frame {r.frame}: {r.caption}" for r in records)


def format_options(options: Sequence[str]) -> str:
    return "\n".join(f"{LETTERS[i]}. {opt}" for i, opt in enumerate(options))


def format_candidates(candidates: Iterable[VideoSegment]) -> str:
    return "\n".join(
        f"Segment {s.id}: frames {s.start} to {s.end} ({s.end - s.start - 1} unseen frames)"
        for s in candidates
    )


def _json_objects(text: str):
    decoder = json.JSONDecoder()
    pos = text.find("{")
    while pos != -1:
        try:
            obj, end = decoder.raw_decode(text, pos)
        except json.JSONDecodeError:
            pos = text.find("{", pos + 1)
            continue
        yield obj
        # nested objects belong to the one just decoded
        pos = text.find("{", end)


def _answer_index(value) -> int:
    if isinstance(value, bool):
        raise StructuredParseError("answer must be a letter")
    if isinstance(value, int) and 0 <= value <= 4:
        return value
    if isinstance(value, str):
        s = value.strip().strip("().").upper()
        if len(s) == 1 and s in LETTERS:
            return LETTERS.index(s)
        m = re.match(r"^(?:OPTION\s+)?([A-E])\b", s)
        if m:
            return LETTERS.index(m.group(1))
    raise StructuredParseError(f"unrecognised answer {value!r}")


def _confidence(value) -> int:
    if isinstance(value, bool):
        raise StructuredParseError("confidence must be a number")
    try:
        c = float(value)
    except (TypeError, ValueError):
        raise StructuredParseError(f"unrecognised confidence {value!r}") from None
    if c != c:
        raise StructuredParseError("confidence is NaN")
    return int(min(10, max(1, round(c))))


def _segments(value) -> List[int]:
    if isinstance(value, (int, str)) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, list):
        raise StructuredParseError(f"unrecognised segment list {value!r}")
    ids = []
    for v in value:
        try:
            ids.append(int(v))
        except (TypeError, ValueError):
            raise StructuredParseError(f"unrecognised segment id {v!r}") from None
    return ids


def _normalise(obj: dict) -> dict:
    out = {}
    if "answer" in obj:
        out["answer"] = _answer_index(obj["answer"])
    if "confidence" in obj:
        out["confidence"] = _confidence(obj["confidence"])
    if "segments" in obj:
        out["segments"] = _segments(obj["segments"])
    for key in ("rationale", "summary"):
        if isinstance(obj.get(key), str):
            out[key] = obj[key]
    return out


def parse_structured(raw: str) -> dict:
    """Extract the JSON object embedded in ``raw`` and normalise known fields.

    Models often echo the requested format before answering, so the last
    object that normalises cleanly wins. The result may contain ``answer``
    (0-based index), ``confidence`` (int clamped to 1..10), ``segments``,
    ``rationale`` and ``summary``.
    """
    found = None
    for obj in _json_objects(raw):
        try:
            found = _normalise(obj)
        except StructuredParseError:
            continue
    if found is None:
        raise StructuredParseError("no usable JSON object in response")
    return found
