"""Dataset loading, Hits@1 scoring, and batch evaluation with reports.

Answer matching is deliberately isolated in ``normalize_answer`` /
``hits_at_1`` (case-insensitive, punctuation-stripped, containment in
either direction) so the rule can be swapped without touching the harness.
"""

from __future__ import annotations

import json
import logging
import re
import string
import time
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from dataclasses import dataclass, field
from pathlib import Path

from .config import RunConfig
from .llm import LlmClient
from .pipeline import run_question

log = logging.getLogger(__name__)

QTYPE_LABELS = ("composition", "conjunction", "comparative", "superlative")
UNTYPED = "untyped"


class FormatError(ValueError):
    def __init__(self, where, reason: str):
        super().__init__(f"{where}: {reason}")
        self.where = where
        self.reason = reason


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    question: str
    gold: tuple[tuple[str, ...], ...]  # one alias group per gold entity
    qtype_label: str | None = None


def _gold_from_cwq(obj, where) -> tuple[tuple[str, ...], ...]:
    answers = obj.get("answer")
    if not answers or not isinstance(answers, list):
        raise FormatError(where, "missing or empty answer list")
    groups = []
    for ans in answers:
        if isinstance(ans, str):
            aliases = [ans]
        else:
            aliases = [ans.get("answer", "")] + list(ans.get("aliases", []))
        aliases = [a for a in aliases if isinstance(a, str) and a.strip()]
        if aliases:
            groups.append(tuple(aliases))
    if not groups:
        raise FormatError(where, "no usable gold answers")
    return tuple(groups)


def _record_from_cwq(obj, where) -> DatasetRecord:
    if "question" not in obj or not str(obj["question"]).strip():
        raise FormatError(where, "missing question")
    label = obj.get("compositionality_type")
    if label is not None and label not in QTYPE_LABELS:
        raise FormatError(where, f"unknown compositionality_type {label!r}")
    return DatasetRecord(
        id=str(obj.get("ID", obj.get("id", where))),
        question=str(obj["question"]),
        gold=_gold_from_cwq(obj, where),
        qtype_label=label,
    )


def _record_from_webqsp(obj, where) -> DatasetRecord:
    question = obj.get("RawQuestion") or obj.get("ProcessedQuestion")
    if not question:
        raise FormatError(where, "missing RawQuestion")
    groups = []
    for parse in obj.get("Parses", []):
        for ans in parse.get("Answers", []):
            aliases = [ans.get("EntityName") or "", ans.get("AnswerArgument") or ""]
            aliases = [a for a in aliases if a.strip()]
            if aliases:
                groups.append(tuple(aliases))
    if not groups:
        raise FormatError(where, "no usable gold answers")
    return DatasetRecord(id=str(obj.get("QuestionId", where)),
                         question=str(question), gold=tuple(groups))


def _record_from_generic(obj, where) -> DatasetRecord:
    if "question" not in obj or not str(obj["question"]).strip():
        raise FormatError(where, "missing question")
    answers = obj.get("answers")
    if not answers or not isinstance(answers, list):
        raise FormatError(where, "missing answers")
    groups = []
    for group in answers:
        if isinstance(group, str):
            group = [group]
        aliases = tuple(a for a in group if isinstance(a, str) and a.strip())
        if aliases:
            groups.append(aliases)
    if not groups:
        raise FormatError(where, "no usable gold answers")
    label = obj.get("qtype_label")
    if label is not None and label not in QTYPE_LABELS:
        raise FormatError(where, f"unknown qtype_label {label!r}")
    return DatasetRecord(id=str(obj.get("id", where)), question=str(obj["question"]),
                         gold=tuple(groups), qtype_label=label)


_PARSERS = {"cwq": _record_from_cwq, "webqsp": _record_from_webqsp,
            "generic-jsonl": _record_from_generic}


def load_dataset(path, format: str = "generic-jsonl") -> list[DatasetRecord]:
    """Load JSONL (or a JSON array) of records in the named mapping."""
    if format not in _PARSERS:
        raise ValueError(f"unknown dataset format: {format}")
    parser = _PARSERS[format]
    text = Path(path).read_text(encoding="utf-8")
    records = []
    if text.lstrip().startswith("["):
        try:
            objs = json.loads(text)
        except json.JSONDecodeError as e:
            raise FormatError(path, f"invalid JSON: {e}") from e
        for i, obj in enumerate(objs, start=1):
            records.append(parser(obj, f"{path}[{i}]"))
    else:
        for line_no, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise FormatError(f"{path}:{line_no}", f"invalid JSON: {e}") from e
            records.append(parser(obj, f"{path}:{line_no}"))
    return records


_PUNCT_TABLE = str.maketrans({c: " " for c in string.punctuation})


def normalize_answer(text: str) -> str:
    return " ".join(text.lower().translate(_PUNCT_TABLE).split())


def hits_at_1(predicted: list[str] | tuple[str, ...],
              gold: tuple[tuple[str, ...], ...]) -> bool:
    """True iff the top-ranked prediction matches any gold alias.

    Matching rule: after normalization, one string contains the other.
    """
    if not predicted:
        raise ValueError("predicted answer list is empty")
    p = normalize_answer(predicted[0])
    if not p:
        return False
    for group in gold:
        for alias in group:
            g = normalize_answer(alias)
            if g and (p in g or g in p):
                return True
    return False


@dataclass
class RunRecord:
    id: str
    question: str
    qtype_label: str | None
    hit: bool
    predicted: list[str]
    error: str = ""
    wall_ms: float = 0.0
    llm_calls: int = 0
    llm_cached: int = 0
    kg_calls: int = 0
    trace: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "id": self.id, "question": self.question,
            "qtype_label": self.qtype_label, "hit": self.hit,
            "predicted": self.predicted, "error": self.error,
            "wall_ms": round(self.wall_ms, 3),
            "llm_calls": self.llm_calls, "llm_cached": self.llm_cached,
            "kg_calls": self.kg_calls, "trace": self.trace,
        }


@dataclass
class EvalReport:
    method: str
    type_source: str
    rendering: str
    width: int
    config_digest: str
    total: int
    hits: int
    per_type: dict
    multi_answer_split: str = ", "

    @property
    def overall(self) -> float:
        return self.hits / self.total if self.total else 0.0

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "type_source": self.type_source,
            "rendering": self.rendering,
            "width": self.width,
            "config_digest": self.config_digest,
            "total": self.total,
            "hits": self.hits,
            "hits_at_1": round(self.overall, 6),
            "per_type": self.per_type,
            "notes": {
                "multi_answer_split": self.multi_answer_split,
                "scoring": "top-1 containment match over normalized strings",
            },
        }

    def text_table(self) -> str:
        columns = ["All", "Composition", "Conjunction", "Comparative",
                   "Superlative"]
        keys = ["all"] + list(QTYPE_LABELS)
        if self.per_type.get(UNTYPED, {}).get("count"):
            columns.append("Untyped")
            keys.append(UNTYPED)
        stats = {"all": {"count": self.total, "hits": self.hits}}
        stats.update(self.per_type)

        def pct(key: str) -> str:
            s = stats.get(key, {"count": 0, "hits": 0})
            return f"{100.0 * s['hits'] / s['count']:.1f}" if s["count"] else "-"

        def row(name: str, cells: list[str]) -> str:
            return f"{name:<10}" + "".join(f"{c:>13}" for c in cells)

        lines = [
            row("", columns),
            row("Hits@1", [pct(k) for k in keys]),
            row("n", [str(stats.get(k, {}).get("count", 0)) for k in keys]),
            f"method={self.method} type_source={self.type_source} "
            f"width={self.width} rendering={self.rendering}",
            f"config={self.config_digest[:16]}",
        ]
        return "\n".join(lines) + "\n"


def _score_result(record: DatasetRecord, result) -> tuple[bool, list[str]]:
    if result.answer is None:
        return False, []
    predicted = list(result.answer.ranked)
    return hits_at_1(predicted, record.gold) if predicted else False, predicted


def evaluate(records: list[DatasetRecord], cfg: RunConfig, kg, backend,
             cache, templates=None) -> tuple[EvalReport, list[RunRecord]]:
    """Run the configured method over a dataset.

    Record failures and timeouts count as misses with an error class; the
    run itself never aborts on a single question.
    """
    if not records:
        raise ValueError("dataset is empty")

    def run_one(record: DatasetRecord) -> RunRecord:
        llm = LlmClient(backend, cache, temperature=cfg.temperature,
                        max_tokens_intermediate=cfg.max_tokens_intermediate,
                        max_tokens_final=cfg.max_tokens_final)
        start = time.perf_counter()
        result = run_question(record.question, cfg, kg, llm,
                              templates=templates,
                              qtype_label=record.qtype_label)
        wall_ms = (time.perf_counter() - start) * 1000.0
        hit, predicted = _score_result(record, result)
        return RunRecord(
            id=record.id, question=record.question,
            qtype_label=record.qtype_label, hit=hit, predicted=predicted,
            error=result.error, wall_ms=wall_ms,
            llm_calls=result.trace.get("llm_calls", 0),
            llm_cached=result.trace.get("llm_cached", 0),
            kg_calls=result.trace.get("kg_calls", 0),
            trace=result.trace)

    def miss(record: DatasetRecord, error: str, wall_ms: float = 0.0) -> RunRecord:
        return RunRecord(id=record.id, question=record.question,
                         qtype_label=record.qtype_label, hit=False,
                         predicted=[], error=error, wall_ms=wall_ms)

    run_records: list[RunRecord] = []
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [(pool.submit(run_one, r), r) for r in records]
            for future, record in futures:
                try:
                    run_records.append(future.result(timeout=cfg.timeout_s))
                except (FutureTimeout, TimeoutError):
                    run_records.append(miss(record, "Timeout"))
                except Exception as e:  # noqa: BLE001 - recorded, not raised
                    log.exception("record %s failed", record.id)
                    run_records.append(miss(record, type(e).__name__))
    else:
        for record in records:
            start = time.perf_counter()
            try:
                rr = run_one(record)
                if rr.wall_ms > cfg.timeout_s * 1000.0:
                    rr.hit = False
                    rr.error = "Timeout"
                run_records.append(rr)
            except Exception as e:  # noqa: BLE001 - recorded, not raised
                log.exception("record %s failed", record.id)
                run_records.append(miss(record, type(e).__name__,
                                        (time.perf_counter() - start) * 1000.0))

    per_type: dict = {}
    for rr in run_records:
        bucket = rr.qtype_label or UNTYPED
        stats = per_type.setdefault(bucket, {"count": 0, "hits": 0})
        stats["count"] += 1
        stats["hits"] += int(rr.hit)
    for stats in per_type.values():
        stats["hits_at_1"] = round(stats["hits"] / stats["count"], 6)
    report = EvalReport(
        method=cfg.method, type_source=cfg.type_source, rendering=cfg.rendering,
        width=cfg.width, config_digest=cfg.digest(), total=len(run_records),
        hits=sum(int(r.hit) for r in run_records),
        per_type=dict(sorted(per_type.items())))
    return report, run_records


def write_outputs(report: EvalReport, run_records: list[RunRecord],
                  out_dir, meta: dict | None = None) -> Path:
    """Persist report.json, report.txt, run_meta.json, and per-record traces."""
    out = Path(out_dir)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    report_json = json.dumps(report.to_json(), indent=2, sort_keys=True,
                             ensure_ascii=False) + "\n"
    (out / "report.json").write_text(report_json, encoding="utf-8")
    (out / "report.txt").write_text(report.text_table(), encoding="utf-8")
    if meta is not None:
        (out / "run_meta.json").write_text(
            json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    for rr in run_records:
        safe = re.sub(r"[^A-Za-z0-9._-]", "_", rr.id) or "record"
        (out / "traces" / f"{safe}.json").write_text(
            json.dumps(rr.to_json(), indent=2, sort_keys=True,
                       ensure_ascii=False) + "\n",
            encoding="utf-8")
    return out
