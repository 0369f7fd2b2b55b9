"""End-to-end orchestration of one question through the selected method.

The full method plans, retrieves, and answers; on a grounding dead end it
falls back to answering from the plan and model knowledge alone, and the
trace records that. Baseline methods (plan-only, direct, chain-of-thought)
reuse the same entry point so the evaluation harness treats them uniformly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from . import answer as answer_mod
from . import plan as plan_mod
from . import reason as reason_mod
from .config import RunConfig
from .kg import KgBackend, LocalKg, RemoteKg, load_graph_path
from .llm import HttpChatBackend, LlmClient, ResponseCache, ScriptedBackend
from .prompts import load_templates
from .reason import BeamConfig

log = logging.getLogger(__name__)


class PipelineError(RuntimeError):
    """Question-level failure; carries the error class for run records."""

    def __init__(self, error_class: str, message: str):
        super().__init__(message)
        self.error_class = error_class


@dataclass
class PipelineResult:
    answer: answer_mod.Answer | None
    trace: dict
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.answer is not None


def build_kg_backend(cfg: RunConfig) -> KgBackend | None:
    if cfg.kg == "none":
        return None
    if cfg.kg == "local":
        graph = load_graph_path(cfg.kg_path, format=cfg.kg_format)
        return LocalKg(graph, result_cap=cfg.result_cap)
    return RemoteKg(cfg.kg_endpoint, result_cap=cfg.result_cap)


def build_llm_backend(cfg: RunConfig):
    if cfg.llm == "scripted":
        return ScriptedBackend.from_path(cfg.script)
    return HttpChatBackend(cfg.endpoint, cfg.model, api_key_env=cfg.api_key_env)


def build_llm_client(cfg: RunConfig, backend=None,
                     cache: ResponseCache | None = None) -> LlmClient:
    backend = backend or build_llm_backend(cfg)
    if cache is None and cfg.cache_path:
        cache = ResponseCache(cfg.cache_path)
    return LlmClient(backend, cache,
                     temperature=cfg.temperature,
                     max_tokens_intermediate=cfg.max_tokens_intermediate,
                     max_tokens_final=cfg.max_tokens_final)


def _decide_qtype(question: str, cfg: RunConfig, llm: LlmClient, templates,
                  qtype_label: str | None) -> tuple[plan_mod.QuestionType, str]:
    if cfg.type_source == "gold" and qtype_label:
        return plan_mod.gold_question_type(qtype_label), "gold"
    qtype, how = plan_mod.predict_question_type_with_default(
        question, llm, templates)
    return qtype, how


def run_question(question: str, cfg: RunConfig, kg: KgBackend | None,
                 llm: LlmClient, templates: dict | None = None,
                 qtype_label: str | None = None) -> PipelineResult:
    """Run one question through the configured method; never raises.

    On failure the result carries the error class and whatever trace was
    accumulated, so batch evaluation can record the miss and continue.
    """
    templates = templates or load_templates(cfg.template_dir or None)
    trace: dict = {"question": question, "method": cfg.method,
                   "type_source": cfg.type_source, "fallback": ""}
    calls_before = len(llm.call_log)
    kg_calls_before = kg.calls if kg is not None else 0
    try:
        result = _run(question, cfg, kg, llm, templates, qtype_label, trace)
    except PipelineError as e:
        trace["error"] = e.error_class
        trace["error_message"] = str(e)
        result = PipelineResult(None, trace, error=e.error_class)
    calls = llm.call_log[calls_before:]
    trace["llm_calls"] = len(calls)
    trace["llm_cached"] = sum(1 for c in calls if c.cached)
    trace["llm_call_ids"] = [c.call_id for c in calls]
    trace["kg_calls"] = (kg.calls - kg_calls_before) if kg is not None else 0
    return result


def _run(question: str, cfg: RunConfig, kg, llm, templates,
         qtype_label, trace) -> PipelineResult:
    if cfg.method == "io":
        ans = _answer(lambda: answer_mod.answer_io(question, llm, templates=templates))
        trace["answer"] = ans.to_json()
        return PipelineResult(ans, trace)
    if cfg.method == "cot":
        ans = _answer(lambda: answer_mod.answer_cot(question, llm, templates=templates))
        trace["answer"] = ans.to_json()
        return PipelineResult(ans, trace)

    qtype, how = _decide_qtype(question, cfg, llm, templates, qtype_label)
    trace["qtype"] = qtype.value
    trace["qtype_how"] = how
    try:
        plan = plan_mod.decompose_question(question, qtype, llm, templates)
    except plan_mod.UnparseableDecomposition as e:
        raise PipelineError("UnparseableDecomposition", str(e)) from e
    except plan_mod.InvalidPlan as e:
        raise PipelineError("InvalidPlan", e.reason) from e
    trace["plan"] = plan.to_json()

    if cfg.method == "pdr":
        ans = _answer(lambda: answer_mod.answer_pdr(question, plan, llm,
                                                    templates=templates))
        trace["answer"] = ans.to_json()
        return PipelineResult(ans, trace)

    if kg is None:
        raise PipelineError("NoKgBackend", "pdrr requires a KG backend")
    beam = BeamConfig(width=cfg.width, relation_keep=cfg.relation_keep,
                      candidate_cap=cfg.candidate_cap)
    reasoning_trace: dict = {}
    trace["reasoning"] = reasoning_trace
    try:
        if qtype is plan_mod.QuestionType.CHAIN:
            chains = reason_mod.chain_reason(question, plan, kg, llm, beam,
                                             templates=templates,
                                             trace=reasoning_trace)
            best = reason_mod.select_best_chain(question, chains, llm,
                                                templates=templates,
                                                trace=reasoning_trace)
            ans = _answer(lambda: answer_mod.answer_chain(
                question, plan, best, llm, rendering=cfg.rendering,
                templates=templates))
        else:
            sets = reason_mod.parallel_reason(question, plan, kg, llm, beam,
                                              templates=templates,
                                              workers=max(1, cfg.workers),
                                              trace=reasoning_trace)
            if not any(s.triples for s in sets):
                raise reason_mod.DeadEnd(0)
            ans = _answer(lambda: answer_mod.answer_parallel(
                question, plan, sets, llm, rendering=cfg.rendering,
                templates=templates))
    except (reason_mod.EntityNotFound, reason_mod.DeadEnd) as e:
        # No grounded evidence; answer from the plan and model knowledge.
        trace["fallback"] = "pdr"
        trace["fallback_cause"] = type(e).__name__
        ans = _answer(lambda: answer_mod.answer_pdr(question, plan, llm,
                                                    templates=templates,
                                                    as_fallback=True))
    trace["answer"] = ans.to_json()
    return PipelineResult(ans, trace)


def _answer(thunk) -> answer_mod.Answer:
    try:
        return thunk()
    except answer_mod.UnparseableAnswer as e:
        raise PipelineError("UnparseableAnswer", str(e)) from e
