"""Per-frame captions and the visibility gate.

Captions for every sampled frame are loaded up front, but a search may only
read the frames that are currently visible. Every read goes through
:func:`read_visible`, which records it in the search's :class:`AccessLog`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Protocol, Sequence, Union

DEFAULT_FPS = 1.0


class CaptionError(Exception):
    """Problem with caption data (missing, duplicated or unparsable records)."""


class MissingFrame(CaptionError):
    def __init__(self, frame: int):
        super().__init__(f"MissingFrame({frame})")
        self.frame = frame


class DuplicateFrame(CaptionError):
    def __init__(self, frame: int):
        super().__init__(f"DuplicateFrame({frame})")
        self.frame = frame


class ParseError(CaptionError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line


class FpsMismatch(CaptionError):
    pass


@dataclass(frozen=True)
class CaptionRecord:
    frame: int
    t: float
    caption: str

    def to_dict(self) -> dict:
        return {"frame": self.frame, "t": self.t, "caption": self.caption}


class CaptionStore:
    """Immutable frame -> caption mapping covering frames ``0..n_frames-1``."""

    def __init__(self, records: Iterable[CaptionRecord]):
        by_frame: Dict[int, CaptionRecord] = {}
        for rec in records:
            if rec.frame in by_frame:
                raise DuplicateFrame(rec.frame)
            by_frame[rec.frame] = rec
        for i in range(len(by_frame)):
            if i not in by_frame:
                raise MissingFrame(i)
        self._records = by_frame

    def __len__(self) -> int:
        return len(self._records)

    @property
    def n_frames(self) -> int:
        return len(self._records)

    def __contains__(self, frame: int) -> bool:
        return frame in self._records

    def get(self, frame: int) -> CaptionRecord:
        try:
            return self._records[frame]
        except KeyError:
            raise MissingFrame(frame) from None

    def check_fps(self, fps: float, tol: float = 1e-9) -> None:
        for rec in self._records.values():
            if abs(rec.t - rec.frame / fps) > tol:
                raise FpsMismatch(
                    f"frame {rec.frame} has t={rec.t}, expected {rec.frame / fps} at fps={fps}"
                )


@dataclass
class AccessLog:
    """Frames actually read by one search. Single writer."""

    read_frames: List[int] = field(default_factory=list)

    def record(self, frames: Iterable[int]) -> None:
        seen = set(self.read_frames)
        for f in frames:
            if f not in seen:
                seen.add(f)
                self.read_frames.append(f)
        self.read_frames.sort()


def read_visible(store: CaptionStore, frames: Sequence[int], log: AccessLog) -> List[CaptionRecord]:
    """Return captions for ``frames`` in frame order and log the access."""
    ordered = sorted(set(frames))
    records = [store.get(f) for f in ordered]
    log.record(ordered)
    return records


def parse_caption_line(line: str, lineno: int) -> CaptionRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(lineno, f"invalid JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise ParseError(lineno, "record is not an object")
    frame, t, caption = obj.get("frame"), obj.get("t"), obj.get("caption")
    if not isinstance(frame, int) or isinstance(frame, bool) or frame < 0:
        raise ParseError(lineno, "'frame' must be a non-negative integer")
    if not isinstance(t, (int, float)) or isinstance(t, bool):
        raise ParseError(lineno, "'t' must be a number")
    if not isinstance(caption, str) or not caption:
        raise ParseError(lineno, "'caption' must be a non-empty string")
    return CaptionRecord(frame, float(t), caption)


def load_captions(path: Union[str, Path]) -> CaptionStore:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            records.append(parse_caption_line(line, lineno))
    return CaptionStore(records)


def dump_captions(records: Iterable[CaptionRecord]) -> str:
    return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in records)


def write_captions(path: Union[str, Path], records: Iterable[CaptionRecord]) -> None:
    Path(path).write_text(dump_captions(records), encoding="utf-8")


class Captioner(Protocol):
    """Extension point for producing captions on demand.

    A lazy captioner would be invoked once per newly visible frame instead of
    pre-extracting the whole video. Nothing in this package calls it yet.
    """

    def caption(self, video_id: str, frame: int, t: float) -> str: ...
