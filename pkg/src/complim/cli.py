"""Command line entry point: ``complim <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .embeddings import EmbeddingError
from .envelope import bratteli, diagram_to_dict, envelope_report, to_dot
from .gallery import IMAGE_LABELS, parse_example, build_example
from .suite import run_suite
from .system import (
    SpecFormatError,
    SystemSpec,
    classify_index_set,
    compact_classification,
    compose_range,
    load_spec,
    representation_window,
)


def _emit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2, sort_keys=True, default=str))
        return
    for key in sorted(payload):
        val = payload[key]
        if isinstance(val, (dict, list)):
            val = json.dumps(val, sort_keys=True, default=str)
        print(f"{key}: {val}")


def cmd_validate(spec: SystemSpec, args) -> dict:
    levels = spec.last_level or args.levels
    return {
        "valid": True,
        "dims": spec.dims(levels),
        "steps": [str(spec.step(k)) for k in range(1, levels)],
        "tail": spec.tail.to_dict() if spec.tail else None,
    }


def cmd_compose(spec: SystemSpec, args) -> dict:
    emb = compose_range(spec, args.from_level, args.to_level)
    return {
        "from": args.from_level,
        "to": args.to_level,
        "source_dim": emb.source_dim,
        "target_dim": emb.target_dim,
        "blocks": [list(p) for p in emb.pairs()],
        "distinguished": emb.distinguished,
        "identity_blocks": emb.identity_count(),
    }


def cmd_repr(spec: SystemSpec, args) -> dict:
    win = representation_window(spec, args.level, args.depth)
    blocks = [
        {"interval": [q.start, q.end], "offset": off, "identity": q.is_identity}
        for q, off in win.blocks
    ]
    if args.window:
        a, b = args.window
        blocks = [x for x in blocks if x["offset"] <= b and x["offset"] + x["interval"][1] - x["interval"][0] > a]
    return {
        "level": win.level,
        "depth": win.depth,
        "anchor": win.anchor,
        "window": [win.lo, win.hi],
        "distinguished": win.distinguished_position,
        "blocks": blocks,
        "index_set": str(classify_index_set(spec, args.depth)) if spec.tail else "undetermined",
    }


def cmd_bratteli(spec: SystemSpec, args) -> dict:
    depth = args.depth or args.levels + 2
    diag = bratteli(spec, args.levels, depth)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(to_dot(diag))
    out = diagram_to_dict(diag)
    out["depth"] = depth
    return out


def cmd_envelope(spec: SystemSpec, args) -> dict:
    return envelope_report(spec, args.levels, args.depth or args.levels + 2)


def cmd_compacts(spec: SystemSpec, args) -> dict:
    c = compact_classification(spec, args.probe)
    return {"classification": str(c), "certificate": c.certificate, "identity_counts": list(c.series)}


def cmd_spec(spec: SystemSpec, args) -> dict:
    return spec.to_dict()


COMMANDS = {
    "validate": cmd_validate,
    "compose": cmd_compose,
    "repr": cmd_repr,
    "bratteli": cmd_bratteli,
    "envelope": cmd_envelope,
    "compacts": cmd_compacts,
    "spec": cmd_spec,
}


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_command(sub, name: str, with_spec: bool) -> None:
    p = sub.add_parser(name)
    if with_spec:
        p.add_argument("spec", help="path to a JSON system spec")
    if name == "validate":
        p.add_argument("--levels", type=int, default=4, help="levels to list for infinite systems")
    elif name == "compose":
        p.add_argument("--from", dest="from_level", type=int, required=True)
        p.add_argument("--to", dest="to_level", type=int, required=True)
    elif name == "repr":
        p.add_argument("--level", type=int, required=True)
        p.add_argument("--depth", type=int, required=True)
        p.add_argument("--window", type=int, nargs=2, metavar=("A", "B"))
    elif name == "bratteli":
        p.add_argument("--levels", type=int, required=True)
        p.add_argument("--depth", type=int)
        p.add_argument("--dot", help="write Graphviz source here")
    elif name == "envelope":
        p.add_argument("--levels", type=int, required=True)
        p.add_argument("--depth", type=int)
    elif name == "compacts":
        p.add_argument("--probe", type=int, default=12)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="complim", description=__doc__)
    parser.add_argument("--format", choices=("json", "text"), default="json")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        if name != "spec":
            _add_command(sub, name, with_spec=True)
    ex = sub.add_parser("example", help="run a command on a built-in example, e.g. 'A(2,1)'")
    ex.add_argument("tag")
    ex.add_argument("--growth", type=_int_list, default=(1,), help="tail block counts, e.g. 1,3")
    exsub = ex.add_subparsers(dest="example_command", required=True)
    for name in COMMANDS:
        _add_command(exsub, name, with_spec=False)
    ver = sub.add_parser("verify")
    ver.add_argument("--scope", nargs="+", default=["all"], help="'all' or example tags")
    ver.add_argument("--depth", type=int)
    ver.add_argument("--trials", type=int)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            scope = "all" if args.scope == ["all"] else [parse_example(t) for t in args.scope]
            status, report = run_suite(scope, args.depth, args.trials)
            _emit(report, args.format)
            return status
        if args.command == "example":
            eid = parse_example(args.tag, tuple(args.growth))
            spec = build_example(eid)
            out = COMMANDS[args.example_command](spec, args)
            out.setdefault("example", str(eid))
            out.setdefault("image", IMAGE_LABELS[eid.tag])
            out.setdefault("envelope_label", spec.label)
        else:
            spec = load_spec(args.spec)
            out = COMMANDS[args.command](spec, args)
    except (SpecFormatError, EmbeddingError, ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(out, args.format)
    return 0


if __name__ == "__main__":
    sys.exit(main())
