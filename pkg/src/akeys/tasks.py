from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

LETTERS = "ABCDE"


class TaskError(ValueError):
    pass


@dataclass(frozen=True)
class QATask:
    video_id: str
    question: str
    options: Tuple[str, ...]
    gold: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "options", tuple(self.options))
        if len(self.options) != 5:
            raise TaskError(f"expected 5 options, got {len(self.options)}")
        if self.gold is not None and not 0 <= self.gold <= 4:
            raise TaskError(f"gold answer index {self.gold} outside 0..4")

    @classmethod
    def from_options(cls, video_id: str, question: str, options: Sequence[str], gold=None):
        return cls(video_id, question, tuple(options), gold)

    def to_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "question": self.question,
            "options": list(self.options),
            "gold": self.gold,
        }
