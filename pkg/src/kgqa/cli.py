"""Command-line entry point.

Subcommands: ask (one question), eval (batch with reports), kg (retrieval
primitives), cache (stats/clear). Results go to stdout, diagnostics to
stderr; exit code 0 on success, 1 on pipeline errors, 2 on config errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
import time
from pathlib import Path

from . import evaluate as eval_mod
from .config import ConfigError, RunConfig, resolve_config
from .kg import EmptyQuery, KgBackend, ParseError, RemoteUnavailable
from .llm import ResponseCache
from .pipeline import (build_kg_backend, build_llm_backend, build_llm_client,
                       run_question)
from .prompts import load_templates

log = logging.getLogger(__name__)


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="flat key = value config file")
    g = parser.add_argument_group("run configuration")
    g.add_argument("--llm", choices=("scripted", "http"))
    g.add_argument("--script", help="scripted-backend JSONL file")
    g.add_argument("--endpoint", help="chat-completion endpoint URL")
    g.add_argument("--model", help="model name for the http backend")
    g.add_argument("--kg", choices=("local", "remote", "none"))
    g.add_argument("--kg-path", dest="kg_path", help="local graph file")
    g.add_argument("--kg-format", dest="kg_format",
                   choices=("tsv-triples", "n-triples-subset"))
    g.add_argument("--kg-endpoint", dest="kg_endpoint", help="SPARQL endpoint URL")
    g.add_argument("--method", choices=("pdrr", "pdr", "io", "cot"))
    g.add_argument("--type-source", dest="type_source",
                   choices=("predicted", "gold"))
    g.add_argument("--width", type=int, help="beam width (bridges kept per hop)")
    g.add_argument("--relation-keep", dest="relation_keep", type=int)
    g.add_argument("--rendering", choices=("triples", "sentences"))
    g.add_argument("--template-dir", dest="template_dir")
    g.add_argument("--cache-path", dest="cache_path")
    g.add_argument("--trace-dir", dest="trace_dir")
    g.add_argument("--workers", type=int)
    g.add_argument("--timeout-s", dest="timeout_s", type=float)


_CONFIG_KEYS = ("llm", "script", "endpoint", "model", "kg", "kg_path",
                "kg_format", "kg_endpoint", "method", "type_source", "width",
                "relation_keep", "rendering", "template_dir", "cache_path",
                "trace_dir", "workers", "timeout_s")


def _config_from_args(args) -> RunConfig:
    flags = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
    return resolve_config(flags, config_file=args.config)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgqa",
        description="Plan-guided question answering over knowledge graphs")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    ask = sub.add_parser("ask", help="answer one question end to end")
    ask.add_argument("question")
    _add_config_flags(ask)

    ev = sub.add_parser("eval", help="evaluate a dataset and write reports")
    ev.add_argument("dataset")
    ev.add_argument("--format", default="generic-jsonl",
                    choices=("cwq", "webqsp", "generic-jsonl"))
    ev.add_argument("--out-dir", dest="out_dir", default="",
                    help="report/trace output directory (defaults to trace dir)")
    _add_config_flags(ev)

    kg = sub.add_parser("kg", help="run retrieval primitives directly")
    kg_sub = kg.add_subparsers(dest="kg_command", required=True)
    for name, extra in (("match", ["text"]),
                        ("relations", ["entity"]),
                        ("neighbors", ["entity", "relation"])):
        p = kg_sub.add_parser(name)
        for arg in extra:
            p.add_argument(arg)
        if name == "relations":
            p.add_argument("--direction", choices=("head", "tail"),
                           default="head",
                           help="head: entity as subject; tail: as object")
        if name == "neighbors":
            p.add_argument("--direction", choices=("head", "tail"),
                           default="head",
                           help="head: list tails; tail: list heads")
        _add_config_flags(p)

    cache = sub.add_parser("cache", help="response-cache maintenance")
    cache_sub = cache.add_subparsers(dest="cache_command", required=True)
    for name in ("stats", "clear"):
        p = cache_sub.add_parser(name)
        _add_config_flags(p)
    return parser


def _cmd_ask(args) -> int:
    cfg = _config_from_args(args)
    kg = build_kg_backend(cfg)
    llm = build_llm_client(cfg)
    templates = load_templates(cfg.template_dir or None)
    result = run_question(args.question, cfg, kg, llm, templates=templates)
    trace_dir = Path(cfg.trace_dir or "kgqa-traces")
    trace_dir.mkdir(parents=True, exist_ok=True)
    stamp = time.strftime("%Y%m%d-%H%M%S")
    safe = re.sub(r"[^A-Za-z0-9]+", "-", args.question.lower()).strip("-")[:60]
    trace_path = trace_dir / f"ask-{stamp}-{safe or 'question'}.json"
    trace_path.write_text(
        json.dumps(result.trace, indent=2, sort_keys=True, ensure_ascii=False)
        + "\n", encoding="utf-8")
    print(f"trace: {trace_path}", file=sys.stderr)
    if not result.ok:
        print(f"error: {result.error}", file=sys.stderr)
        return 1
    print(result.answer.final)
    return 0


def _cmd_eval(args) -> int:
    cfg = _config_from_args(args)
    records = eval_mod.load_dataset(args.dataset, format=args.format)
    kg = build_kg_backend(cfg) if cfg.method == "pdrr" else None
    backend = build_llm_backend(cfg)
    cache = ResponseCache(cfg.cache_path) if cfg.cache_path else None
    templates = load_templates(cfg.template_dir or None)
    start = time.perf_counter()
    report, run_records = eval_mod.evaluate(records, cfg, kg, backend, cache,
                                            templates=templates)
    wall_s = time.perf_counter() - start
    out_dir = args.out_dir or cfg.trace_dir or "kgqa-traces/eval"
    meta = {
        "backend_llm_calls": backend.calls,
        "backend_token_usage": backend.token_usage,
        "cache_hits": cache.hits if cache else 0,
        "kg_calls": kg.calls if kg else 0,
        "wall_s": round(wall_s, 3),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    out = eval_mod.write_outputs(report, run_records, out_dir, meta=meta)
    print(report.text_table(), end="")
    print(f"outputs: {out}", file=sys.stderr)
    return 0


def _cmd_kg(args) -> int:
    cfg = _config_from_args(args)
    kg = build_kg_backend(cfg)
    if kg is None:
        raise ConfigError("kg subcommand requires a kg backend")
    if args.kg_command == "match":
        for eid, label in kg.entity_match(args.text):
            print(f"{eid}\t{label}")
    elif args.kg_command == "relations":
        rels = (kg.head_relation_search(args.entity) if args.direction == "head"
                else kg.tail_relation_search(args.entity))
        for rel in rels:
            print(rel)
    else:
        ids = (kg.tail_entity_search(args.entity, args.relation)
               if args.direction == "head"
               else kg.head_entity_search(args.entity, args.relation))
        for eid in ids:
            print(f"{eid}\t{kg.display_label(eid)}")
    return 0


def _cmd_cache(args) -> int:
    cfg = _config_from_args(args)
    if not cfg.cache_path:
        raise ConfigError("cache subcommand requires --cache-path")
    cache = ResponseCache(cfg.cache_path)
    if args.cache_command == "stats":
        print(f"entries\t{len(cache)}")
        print(f"path\t{cfg.cache_path}")
    else:
        n = len(cache)
        cache.clear()
        print(f"cleared\t{n}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "ask":
            return _cmd_ask(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "kg":
            return _cmd_kg(args)
        return _cmd_cache(args)
    except (ConfigError, FileNotFoundError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (ParseError, eval_mod.FormatError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return 2
    except (EmptyQuery, RemoteUnavailable) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
