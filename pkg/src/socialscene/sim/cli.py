"""Command line entry point (installed as ``sse``).

Subcommands: run a scenario to a JSONL log, recompute metrics from a log,
render one tick as SVG, replay a match-candidate file through the
association solver, estimate DOA from a stereo wav, and print the plan at a
given tick. Exit codes: 0 success, 2 schema/parse errors, 3 when a run hit a
no-feasible-plan stop.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from ..association import MatchCandidate, RelationGraph, solve_partition, submit_match
from ..doa import DegenerateSignal, MicPairGeometry, OutOfRange, gcc_phat, tdoa_to_doa
from ..scene import body_id, face_id, person_id, voice_id
from .engine import Engine, dumps_canonical, read_jsonl, write_jsonl
from .metrics import compute_metrics
from .render import field_from_entry, render_svg
from .scenario import ParseError, SchemaError, load_scenario

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_NO_PLAN = 3

_ID_MAKERS = {"face": face_id, "body": body_id, "voice": voice_id, "person": person_id}


def _cmd_run(args) -> int:
    script = load_scenario(args.scenario)
    engine = Engine(script, seed=args.seed)
    entries = engine.run()
    os.makedirs(args.out, exist_ok=True)
    log_path = os.path.join(args.out, f"{script.name}.jsonl")
    write_jsonl(log_path, engine.header(), entries)
    metrics = compute_metrics(entries, script.raw)
    print(json.dumps({"log": log_path, "metrics": metrics}, indent=2, sort_keys=True))
    return EXIT_NO_PLAN if engine.stop_events else EXIT_OK


def _cmd_metrics(args) -> int:
    header, entries = read_jsonl(args.log)
    metrics = compute_metrics(entries, header["scenario"])
    print(json.dumps(metrics, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_render(args) -> int:
    header, entries = read_jsonl(args.log)
    matches = [e for e in entries if e["tick"] == args.tick]
    if not matches:
        print(f"no tick {args.tick} in {args.log}", file=sys.stderr)
        return EXIT_SCHEMA
    entry = matches[0]
    svg = render_svg(entry, field_from_entry(header, entry))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(svg)
    else:
        print(svg)
    return EXIT_OK


def _cmd_assoc_replay(args) -> int:
    graph = RelationGraph()
    try:
        with open(args.file, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                record = json.loads(line)
                try:
                    a = _ID_MAKERS[record["kindA"]](record["a"])
                    b = _ID_MAKERS[record["kindB"]](record["b"])
                    cand = MatchCandidate(
                        a=a, b=b,
                        likelihood=float(record["likelihood"]),
                        time=float(record["t"]),
                    )
                except (KeyError, ValueError) as exc:
                    print(f"line {lineno}: {exc}", file=sys.stderr)
                    return EXIT_SCHEMA
                graph = submit_match(graph, cand)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot replay {args.file}: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    result = solve_partition(graph)
    print(json.dumps(result.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_doa(args) -> int:
    from scipy.io import wavfile

    try:
        rate, data = wavfile.read(args.wav)
    except (OSError, ValueError) as exc:
        print(f"cannot read {args.wav}: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    if data.ndim != 2 or data.shape[1] != 2:
        print("expected a stereo wav file", file=sys.stderr)
        return EXIT_SCHEMA
    stereo = data.astype(np.float64)
    if np.issubdtype(data.dtype, np.integer):
        stereo /= float(np.iinfo(data.dtype).max)
    geom = MicPairGeometry(spacing=args.spacing, sample_rate=float(rate))
    print("t,tau,theta,reliable")
    for start in range(0, stereo.shape[0] - args.frame + 1, args.hop):
        block = stereo[start : start + args.frame]
        t = start / rate
        try:
            estimate = gcc_phat(block[:, 0], block[:, 1], geom)
            theta = tdoa_to_doa(estimate.tau, geom)
            reliable = 1 if estimate.reliable else 0
            print(f"{t:.4f},{estimate.tau:.6e},{theta:.4f},{reliable}")
        except (DegenerateSignal, OutOfRange):
            print(f"{t:.4f},nan,nan,0")
    return EXIT_OK


def _cmd_playground(args) -> int:
    from .playground import serve

    script = load_scenario(args.scenario)
    serve(script, host=args.host, port=args.port)
    return EXIT_OK


def _cmd_plan(args) -> int:
    script = load_scenario(args.scenario)
    engine = Engine(script, seed=args.seed)
    steps = max(1, int(round(script.duration / 0.1)))
    if args.tick >= steps:
        print(f"tick {args.tick} beyond scenario duration", file=sys.stderr)
        return EXIT_SCHEMA
    entry = None
    for _ in range(args.tick + 1):
        entry = engine.tick_once()
    print(dumps_canonical({"tick": entry["tick"], "plan": entry["plan"]}))
    if entry["plan"] and entry["plan"].get("stopped"):
        return EXIT_NO_PLAN
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sse", description="Social scene engine simulator"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario and write a JSONL log")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("metrics", help="recompute metrics from a log")
    p.add_argument("log")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("render", help="render one tick as SVG")
    p.add_argument("log")
    p.add_argument("--tick", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("assoc", help="association tools")
    assoc_sub = p.add_subparsers(dest="assoc_command", required=True)
    rp = assoc_sub.add_parser("replay", help="replay match candidates, print partition")
    rp.add_argument("file")
    rp.set_defaults(func=_cmd_assoc_replay)

    p = sub.add_parser("doa", help="per-frame DOA from a stereo wav")
    p.add_argument("--wav", required=True)
    p.add_argument("--spacing", type=float, default=0.1)
    p.add_argument("--frame", type=int, default=1024)
    p.add_argument("--hop", type=int, default=512)
    p.set_defaults(func=_cmd_doa)

    p = sub.add_parser("playground", help="serve the interactive tuning playground")
    p.add_argument("scenario")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_playground)

    p = sub.add_parser("plan", help="print the plan summary at one tick")
    p.add_argument("--scenario", required=True)
    p.add_argument("--tick", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_plan)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
