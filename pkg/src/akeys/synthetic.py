"""Scripted caption corpora with a known answer-critical interval.

Each world is a sequence of scenes. One short key interval carries text that
names the correct option; every other frame only names its scene. When there
are at least two scenes and the key interval is longer than one frame, the key
interval straddles a scene boundary, so the key event coincides with a visible
change of scene.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .captions import CaptionRecord, dump_captions
from .tasks import QATask

SCENE_LABELS = [
    "kitchen", "hallway", "garage", "garden", "living room", "workshop",
    "office", "bathroom", "bedroom", "porch", "laundry room", "staircase",
    "dining room", "balcony", "basement", "attic",
]

ACTIONS = [
    "opens the red drawer", "waters the potted fern", "folds a blue towel",
    "tightens a loose bolt", "pours milk into a mug", "locks the back door",
    "sweeps sawdust into a pile", "plugs in a desk lamp", "ties a shoelace",
    "peels an orange", "stacks three cardboard boxes", "wipes a mirror",
    "hangs a jacket on a hook", "feeds the goldfish", "sharpens a pencil",
    "unrolls a yoga mat", "rinses a paintbrush", "winds a wall clock",
]

QUESTION = "Which action is carried out during the decisive moment of the recording?"


class InvalidParams(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticWorld:
    n_frames: int
    scenes: Tuple[Tuple[int, int, str], ...]
    key_interval: Tuple[int, int]
    gold_answer: int
    seed: int

    def scene_of(self, frame: int) -> str:
        for lo, hi, label in self.scenes:
            if lo <= frame <= hi:
                return label
        raise IndexError(frame)

    def is_key(self, frame: int) -> bool:
        return self.key_interval[0] <= frame <= self.key_interval[1]

    @property
    def key_frames(self) -> range:
        return range(self.key_interval[0], self.key_interval[1] + 1)

    @property
    def distractor(self) -> int:
        return (self.gold_answer + 1 + self.seed % 4) % 5

    def to_dict(self) -> dict:
        return {
            "n_frames": self.n_frames,
            "scenes": [list(s) for s in self.scenes],
            "key_interval": list(self.key_interval),
            "gold_answer": self.gold_answer,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticWorld":
        return cls(
            n_frames=int(d["n_frames"]),
            scenes=tuple((int(a), int(b), str(c)) for a, b, c in d["scenes"]),
            key_interval=(int(d["key_interval"][0]), int(d["key_interval"][1])),
            gold_answer=int(d["gold_answer"]),
            seed=int(d["seed"]),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"


@dataclass(frozen=True)
class SyntheticParams:
    n_frames: int = 180
    n_scenes: int = 6
    key_len: int = 5
    key_start: Optional[int] = None
    fps: float = 1.0

    def validate(self) -> None:
        if self.n_frames < 10:
            raise InvalidParams(f"n_frames must be >= 10, got {self.n_frames}")
        if not 1 <= self.n_scenes <= self.n_frames / 2:
            raise InvalidParams(f"n_scenes must be in 1..{self.n_frames // 2}, got {self.n_scenes}")
        if not 1 <= self.key_len <= self.n_frames:
            raise InvalidParams(f"key_len must be in 1..{self.n_frames}, got {self.key_len}")
        if self.key_start is not None and not 0 <= self.key_start <= self.n_frames - self.key_len:
            raise InvalidParams(f"key interval starting at {self.key_start} does not fit the video")
        if self.fps <= 0:
            raise InvalidParams("fps must be positive")


def key_caption(action: str) -> str:
    return f"Key event: the camera wearer {action}."


def scene_caption(label: str) -> str:
    return f"Scene {label}: ambient activity."


def _scene_cuts(rng: random.Random, n: int, n_scenes: int, ks: int, ke: int) -> List[int]:
    """Frames at which a new scene starts (excluding 0)."""
    if n_scenes == 1:
        return []
    if ke == ks:
        return sorted(rng.sample(range(1, n), n_scenes - 1))
    b = rng.randint(ks + 1, ke)
    lo = max(1, n_scenes - (n - b))
    hi = min(b, n_scenes - 1)
    k_left = rng.randint(lo, hi)
    k_right = n_scenes - k_left
    left = rng.sample(range(1, b), k_left - 1)
    right = rng.sample(range(b + 1, n), k_right - 1)
    return sorted(left + [b] + right)


def build_world(params: SyntheticParams, seed: int) -> Tuple[SyntheticWorld, Tuple[str, ...]]:
    params.validate()
    rng = random.Random(seed)
    n = params.n_frames
    ks = params.key_start if params.key_start is not None else rng.randint(0, n - params.key_len)
    ke = ks + params.key_len - 1

    cuts = _scene_cuts(rng, n, params.n_scenes, ks, ke)
    labels = rng.sample(SCENE_LABELS, min(params.n_scenes, len(SCENE_LABELS)))
    labels += [f"area {i}" for i in range(len(labels), params.n_scenes)]
    starts = [0] + cuts
    ends = [c - 1 for c in cuts] + [n - 1]
    scenes = tuple(zip(starts, ends, labels))

    options = tuple(rng.sample(ACTIONS, 5))
    gold = rng.randrange(5)
    return SyntheticWorld(n, scenes, (ks, ke), gold, seed), options


def world_captions(world: SyntheticWorld, options, fps: float = 1.0) -> List[CaptionRecord]:
    key_text = key_caption(options[world.gold_answer])
    records = []
    for lo, hi, label in world.scenes:
        for f in range(lo, hi + 1):
            text = scene_caption(label)
            if world.is_key(f):
                text = f"{text} {key_text}"
            records.append(CaptionRecord(f, f / fps, text))
    return records


def generate_synthetic(params: SyntheticParams, seed: int, video_id: Optional[str] = None):
    """Build one world; returns (caption file text, QATask, SyntheticWorld)."""
    world, options = build_world(params, seed)
    vid = video_id or f"syn-{seed}"
    task = QATask(vid, QUESTION, options, world.gold_answer)
    text = dump_captions(world_captions(world, options, params.fps))
    return text, task, world
