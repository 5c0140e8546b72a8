"""Dataset manifests, corpus generation and benchmark reports."""

from __future__ import annotations

import csv
import io
import json
import random
import shutil
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Sequence

from .captions import CaptionError, load_captions
from .search import SearchConfig, SearchResult, run_search
from .synthetic import SyntheticParams, SyntheticWorld, generate_synthetic
from .tasks import QATask, TaskError

REPORT_COLUMNS = ["id", "predicted", "correct", "visible_frames", "iterations",
                  "llm_calls", "terminated_by", "error"]


class ManifestError(ValueError):
    pass


class OutDirNotEmpty(FileExistsError):
    pass


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    captions_path: Path
    question: str
    options: tuple
    answer: Optional[int] = None
    world_path: Optional[Path] = None

    @property
    def task(self) -> QATask:
        return QATask(self.id, self.question, self.options, self.answer)

    def load_world(self) -> SyntheticWorld:
        if self.world_path is None:
            raise ManifestError(f"{self.id}: mock evaluator needs a world_path")
        return SyntheticWorld.from_dict(json.loads(self.world_path.read_text(encoding="utf-8")))


def load_manifest(path) -> List[ManifestEntry]:
    path = Path(path)
    base = path.parent
    entries: List[ManifestEntry] = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                eid = str(obj["id"])
                caps = base / obj["captions_path"]
                world = base / obj["world_path"] if obj.get("world_path") else None
                entry = ManifestEntry(eid, caps, obj["question"], tuple(obj["options"]),
                                      obj.get("answer"), world)
                entry.task  # validates option count and answer range
            except (json.JSONDecodeError, KeyError, TypeError, TaskError) as exc:
                raise ManifestError(f"{path}:{lineno}: bad manifest entry ({exc})") from None
            if eid in seen:
                raise ManifestError(f"{path}:{lineno}: duplicate id {eid!r}")
            if not caps.is_file():
                raise ManifestError(f"{path}:{lineno}: captions file not found: {caps}")
            seen.add(eid)
            entries.append(entry)
    return entries


@dataclass
class ReportRow:
    id: str
    predicted: Optional[int]
    gold: Optional[int]
    visible_frames: Optional[int]
    iterations: Optional[int]
    llm_calls: int
    terminated_by: str
    error: str = ""

    @property
    def correct(self) -> Optional[bool]:
        if self.gold is None:
            return None
        return self.predicted == self.gold

    def as_csv(self) -> List[str]:
        def cell(v):
            return "" if v is None else str(v)
        correct = "" if self.correct is None else str(int(self.correct))
        predicted = "none" if self.predicted is None else str(self.predicted)
        return [self.id, predicted, correct, cell(self.visible_frames), cell(self.iterations),
                str(self.llm_calls), self.terminated_by, self.error]


@dataclass
class BenchReport:
    rows: List[ReportRow]

    @property
    def accuracy(self) -> Optional[float]:
        graded = [r.correct for r in self.rows if r.correct is not None]
        return sum(graded) / len(graded) if graded else None

    @property
    def mean_visible_frames(self) -> Optional[float]:
        vals = [r.visible_frames for r in self.rows if r.visible_frames is not None]
        return statistics.fmean(vals) if vals else None

    @property
    def total_llm_calls(self) -> int:
        return sum(r.llm_calls for r in self.rows)

    def summary(self) -> dict:
        out = {"tasks": len(self.rows),
               "failed": sum(1 for r in self.rows if r.error),
               "mean_visible_frames": self.mean_visible_frames,
               "total_llm_calls": self.total_llm_calls}
        if self.accuracy is not None:
            out["accuracy"] = self.accuracy
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for r in self.rows:
            writer.writerow(r.as_csv())
        return buf.getvalue()

    def write(self, out_path) -> Path:
        out_path = Path(out_path)
        out_path.write_text(self.to_csv(), encoding="utf-8")
        summary_path = out_path.with_name(out_path.name + ".summary.json")
        summary_path.write_text(json.dumps(self.summary(), sort_keys=True, indent=1) + "\n",
                                encoding="utf-8")
        return summary_path


EvaluatorFactory = Callable[[ManifestEntry], object]


def run_entry(entry: ManifestEntry, config: SearchConfig,
              make_evaluator: EvaluatorFactory) -> ReportRow:
    try:
        store = load_captions(entry.captions_path)
        evaluator = make_evaluator(entry)
        result: SearchResult = run_search(entry.task, store, config, evaluator)
    except (CaptionError, ManifestError, OSError, ValueError) as exc:
        return ReportRow(entry.id, None, entry.answer, None, None, 0, "error",
                         f"{type(exc).__name__}: {exc}")
    return ReportRow(entry.id, result.answer, entry.answer, result.visible_count,
                     result.iterations, result.agent_queries, result.terminated_by)


def run_bench(entries: Sequence[ManifestEntry], config: SearchConfig,
              make_evaluator: EvaluatorFactory, parallel: int = 1) -> BenchReport:
    """One search per entry; rows come back sorted by id whatever ``parallel`` is."""
    if parallel <= 1:
        rows = [run_entry(e, config, make_evaluator) for e in entries]
    else:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            rows = list(pool.map(lambda e: run_entry(e, config, make_evaluator), entries))
    return BenchReport(sorted(rows, key=lambda r: r.id))


def generate_corpus(out_dir, count: int, params: SyntheticParams, seed: int,
                    force: bool = False) -> Path:
    """Write ``count`` synthetic tasks plus a manifest under ``out_dir``."""
    params.validate()
    out = Path(out_dir)
    if out.exists() and any(out.iterdir()):
        if not force:
            raise OutDirNotEmpty(f"{out} is not empty (use --force to overwrite)")
        for sub in ("captions", "worlds"):
            shutil.rmtree(out / sub, ignore_errors=True)
        (out / "manifest.jsonl").unlink(missing_ok=True)
    (out / "captions").mkdir(parents=True, exist_ok=True)
    (out / "worlds").mkdir(exist_ok=True)

    rng = random.Random(seed)
    lines = []
    for i in range(count):
        task_seed = rng.randrange(2**31)
        tid = f"syn-{i:04d}"
        text, task, world = generate_synthetic(params, task_seed, video_id=tid)
        (out / "captions" / f"{tid}.jsonl").write_text(text, encoding="utf-8")
        (out / "worlds" / f"{tid}.json").write_text(world.dumps(), encoding="utf-8")
        lines.append(json.dumps({
            "id": tid,
            "captions_path": f"captions/{tid}.jsonl",
            "world_path": f"worlds/{tid}.json",
            "question": task.question,
            "options": list(task.options),
            "answer": task.gold,
        }, sort_keys=True))
    manifest = out / "manifest.jsonl"
    manifest.write_text("\n".join(lines) + "\n" if lines else "", encoding="utf-8")
    return manifest
