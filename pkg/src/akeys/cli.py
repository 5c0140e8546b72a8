"""Command line entry point: ``akeys run | bench | gen``.

Settings resolve as flag, then ``AKEYS_*`` environment variable, then the
built-in default. Errors go to stderr as one line starting with a code
(``E_CONFIG`` exits 2, ``E_DATA`` exits 3).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from .bench import ManifestError, OutDirNotEmpty, generate_corpus, load_manifest, run_bench
from .captions import CaptionError, load_captions
from .dot import export_dot
from .evaluators import CostVariant, LlmEvaluator, MockEvaluator
from .llm_client import DEFAULT_KEY_ENV, LlmClient, LlmConfig
from .search import ConfigError, SearchConfig, run_search
from .segment_tree import TreeError
from .synthetic import InvalidParams, SyntheticParams, SyntheticWorld
from .tasks import LETTERS, QATask, TaskError

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3

# flag dest -> (env var, type, default)
SETTINGS = {
    "algorithm": ("AKEYS_ALGORITHM", str, "astar"),
    "M": ("AKEYS_M", int, 4),
    "beam": ("AKEYS_BEAM", int, 2),
    "threshold": ("AKEYS_THRESHOLD", int, 8),
    "max_iter": ("AKEYS_MAX_ITER", int, 10),
    "fps": ("AKEYS_FPS", float, 1.0),
    "seed": ("AKEYS_SEED", int, 0),
    "evaluator": ("AKEYS_EVALUATOR", str, "mock"),
    "endpoint": ("AKEYS_ENDPOINT", str, None),
    "model": ("AKEYS_MODEL", str, None),
    "timeout": ("AKEYS_TIMEOUT", float, 60.0),
    "max_retries": ("AKEYS_MAX_RETRIES", int, 3),
    "astar_mode": ("AKEYS_ASTAR_MODE", str, "split"),
}


class CliError(Exception):
    def __init__(self, code: str, message: str, exit_code: int):
        super().__init__(message)
        self.code = code
        self.exit_code = exit_code


def config_error(msg: str) -> CliError:
    return CliError("E_CONFIG", msg, EXIT_CONFIG)


def data_error(msg: str) -> CliError:
    return CliError("E_DATA", msg, EXIT_DATA)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise config_error(message)


def resolve(args: argparse.Namespace, name: str):
    env, typ, default = SETTINGS[name]
    value = getattr(args, name, None)
    if value is not None:
        return value
    raw = os.environ.get(env)
    if raw is None:
        return default
    try:
        return typ(raw)
    except ValueError:
        raise config_error(f"{env}={raw!r} is not a valid {typ.__name__}") from None


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algorithm", help="bfs | gbfs | dijkstra | astar")
    p.add_argument("--M", type=int, dest="M", help="initial uniform segments")
    p.add_argument("--beam", type=int, help="nodes expanded per iteration")
    p.add_argument("--threshold", type=int, help="confidence threshold C (1-10)")
    p.add_argument("--max-iter", type=int, dest="max_iter", help="iteration cap T")
    p.add_argument("--fps", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--evaluator", help="mock | llm")
    p.add_argument("--endpoint", help="chat-completions base URL (llm evaluator)")
    p.add_argument("--model", help="model name (llm evaluator)")
    p.add_argument("--timeout", type=float)
    p.add_argument("--max-retries", type=int, dest="max_retries")
    p.add_argument("--astar-mode", dest="astar_mode", help="split | joint")
    p.add_argument("--api-key-env", default=DEFAULT_KEY_ENV,
                   help="environment variable holding the API key")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="akeys", description="Agentic keyframe search over video captions.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="search one question")
    run.add_argument("--captions", required=True, type=Path)
    run.add_argument("--question", required=True)
    run.add_argument("--options", required=True, help="five comma-separated options")
    run.add_argument("--world", type=Path, help="ground-truth sidecar (mock evaluator)")
    run.add_argument("--export-dot", type=Path, dest="export_dot")
    run.add_argument("--export-trace", type=Path, dest="export_trace")
    _add_search_flags(run)

    bench = sub.add_parser("bench", help="run every task in a manifest")
    bench.add_argument("--manifest", required=True, type=Path)
    bench.add_argument("--out", required=True, type=Path, help="CSV report path")
    bench.add_argument("--parallel", type=int, default=1)
    _add_search_flags(bench)

    gen = sub.add_parser("gen", help="write a synthetic corpus")
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--frames", type=int, default=180)
    gen.add_argument("--scenes", type=int, default=6)
    gen.add_argument("--key-len", type=int, dest="key_len", default=5)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--fps", type=float, default=1.0)
    gen.add_argument("--out", required=True, type=Path)
    gen.add_argument("--force", action="store_true")
    return parser


def search_config(args) -> SearchConfig:
    try:
        variant = CostVariant.parse(resolve(args, "algorithm"))
        return SearchConfig(M=resolve(args, "M"), B=resolve(args, "beam"),
                            C=resolve(args, "threshold"), T=resolve(args, "max_iter"),
                            variant=variant, fps=resolve(args, "fps"), seed=resolve(args, "seed"))
    except ValueError as exc:
        raise config_error(str(exc)) from None


def llm_client(args) -> LlmClient:
    endpoint, model = resolve(args, "endpoint"), resolve(args, "model")
    if not endpoint or not model:
        raise config_error("the llm evaluator needs --endpoint and --model (or AKEYS_ENDPOINT/AKEYS_MODEL)")
    try:
        cfg = LlmConfig(endpoint=endpoint, model=model, api_key_env=args.api_key_env,
                        timeout=resolve(args, "timeout"), max_retries=resolve(args, "max_retries"))
    except ValueError as exc:
        raise config_error(str(exc)) from None
    return LlmClient(cfg)


def evaluator_kind(args) -> str:
    kind = resolve(args, "evaluator")
    if kind not in ("mock", "llm"):
        raise config_error(f"unknown evaluator {kind!r}; valid: mock, llm")
    return kind


def parse_options(text: str) -> List[str]:
    opts = [o.strip() for o in text.split(",")]
    if len(opts) != 5 or not all(opts):
        raise config_error(f"--options needs exactly 5 non-empty comma-separated options, got {len(opts)}")
    return opts


def load_world(path: Path) -> SyntheticWorld:
    try:
        return SyntheticWorld.from_dict(json.loads(path.read_text(encoding="utf-8")))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise data_error(f"cannot read world file {path}: {exc}") from None


def cmd_run(args) -> int:
    config = search_config(args)
    kind = evaluator_kind(args)
    task = QATask(Path(args.captions).stem, args.question, tuple(parse_options(args.options)))
    astar_mode = resolve(args, "astar_mode")
    world = None
    if kind == "mock":
        if args.world is None:
            raise config_error("the mock evaluator needs --world")
        world = load_world(args.world)
    try:
        store = load_captions(args.captions)
    except OSError as exc:
        raise data_error(f"cannot read captions: {exc}") from None
    except CaptionError as exc:
        raise data_error(f"{type(exc).__name__}: {exc}") from None

    try:
        if kind == "mock":
            evaluator = MockEvaluator(world, astar_mode=astar_mode)
            result = run_search(task, store, config, evaluator)
        else:
            with llm_client(args) as client:
                result = run_search(task, store, config, LlmEvaluator(client, astar_mode=astar_mode))
    except CaptionError as exc:
        raise data_error(f"{type(exc).__name__}: {exc}") from None
    except TreeError as exc:
        raise data_error(f"{type(exc).__name__}: {exc}") from None
    except ValueError as exc:
        raise config_error(str(exc)) from None

    ans = "none" if result.answer is None else f"{result.answer} ({LETTERS[result.answer]})"
    print(f"answer: {ans}")
    print("keyframes: " + " ".join(map(str, result.keyframes)))
    print(f"visible_count: {result.visible_count}")
    print(f"iterations: {result.iterations}")
    print(f"terminated_by: {result.terminated_by}")
    if args.export_dot:
        key = world.key_interval if world is not None else None
        args.export_dot.write_text(export_dot(result, key), encoding="utf-8")
    if args.export_trace:
        args.export_trace.write_text(result.dumps(), encoding="utf-8")
    return EXIT_OK


def cmd_bench(args) -> int:
    config = search_config(args)
    kind = evaluator_kind(args)
    astar_mode = resolve(args, "astar_mode")
    if args.parallel < 1:
        raise config_error("--parallel must be >= 1")
    try:
        entries = load_manifest(args.manifest)
    except OSError as exc:
        raise data_error(f"cannot read manifest: {exc}") from None
    except ManifestError as exc:
        raise data_error(str(exc)) from None

    if kind == "mock":
        report = run_bench(entries, config,
                           lambda e: MockEvaluator(e.load_world(), astar_mode=astar_mode),
                           args.parallel)
    else:
        with llm_client(args) as client:
            report = run_bench(entries, config,
                               lambda e: LlmEvaluator(client, astar_mode=astar_mode),
                               args.parallel)
    report.write(args.out)
    for key, value in sorted(report.summary().items()):
        print(f"{key}: {value}")
    return EXIT_OK


def cmd_gen(args) -> int:
    params = SyntheticParams(n_frames=args.frames, n_scenes=args.scenes, key_len=args.key_len,
                             fps=args.fps)
    if args.count < 0:
        raise config_error("--count must be >= 0")
    try:
        manifest = generate_corpus(args.out, args.count, params, args.seed, force=args.force)
    except InvalidParams as exc:
        raise config_error(f"InvalidParams: {exc}") from None
    except OutDirNotEmpty as exc:
        raise config_error(f"OutDirNotEmpty: {exc}") from None
    print(f"wrote {args.count} tasks; manifest: {manifest}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "bench": cmd_bench, "gen": cmd_gen}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return exc.exit_code
    except TaskError as exc:
        print(f"E_CONFIG: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
