"""Final answer generation, plus the retrieval-free baselines.

Answers are extracted from the last top-level ``{...}`` group of the
model response; comma-separated answers inside the braces become a ranked
list whose first element feeds Hits@1.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .llm import LlmClient, render
from .plan import DecompositionPlan, QuestionType
from .prompts import load_templates
from .reason import GroundedTriple, ReasoningChain, ReasoningTripleSet

RENDER_TRIPLES = "triples"
RENDER_SENTENCES = "sentences"


class UnparseableAnswer(ValueError):
    """Response carried no brace-wrapped final answer, even after a retry."""


@dataclass(frozen=True)
class Answer:
    final: str
    ranked: tuple[str, ...]
    rationale: str
    mode: str = RENDER_TRIPLES
    fallback_used: bool = False
    evidence: tuple[tuple[str, str, str], ...] = ()

    def to_json(self) -> dict:
        return {
            "final": self.final,
            "ranked_answers": list(self.ranked),
            "rationale": self.rationale,
            "mode": self.mode,
            "fallback_used": self.fallback_used,
            "evidence": [list(t) for t in self.evidence],
        }


_BRACE_GROUP = re.compile(r"\{([^{}]*)\}")


def extract_final_answer(response: str) -> tuple[str, tuple[str, ...]]:
    """Last top-level brace group, trimmed, split into a ranked list."""
    groups = _BRACE_GROUP.findall(response)
    if not groups:
        raise UnparseableAnswer(f"no brace group in response: {response[-200:]!r}")
    final = groups[-1].strip()
    if not final:
        raise UnparseableAnswer("final brace group is empty")
    ranked = tuple(part.strip() for part in final.split(", ") if part.strip())
    return final, ranked or (final,)


def _render_triples(triples, mode: str) -> str:
    if mode == RENDER_TRIPLES:
        return ", ".join(t.render() for t in triples)
    if mode == RENDER_SENTENCES:
        return " ".join(
            f"{t.head_label} {t.relation} {t.tail_label}." for t in triples)
    raise ValueError(f"unknown rendering mode: {mode}")


def render_chain_evidence(chain: ReasoningChain, mode: str) -> str:
    return _render_triples(chain.triples(), mode)


def render_parallel_evidence(sets: list[ReasoningTripleSet], mode: str) -> str:
    if mode == RENDER_TRIPLES:
        return "{" + ", ".join(s.render() for s in sets) + "}"
    if mode == RENDER_SENTENCES:
        parts = []
        for s in sets:
            parts.append(_render_triples(s.triples, mode) if s.triples else "(none)")
        return " | ".join(parts)
    raise ValueError(f"unknown rendering mode: {mode}")


def _evidence_keys(triples) -> tuple[tuple[str, str, str], ...]:
    return tuple((t.head_label, t.relation, t.tail_label) for t in triples)


def _ask(prompt: str, llm: LlmClient) -> tuple[str, str, tuple[str, ...]]:
    """One completion with a single retry past the cache on a parse miss."""
    response = llm.complete(prompt, final=True)
    try:
        final, ranked = extract_final_answer(response)
        return response, final, ranked
    except UnparseableAnswer:
        response = llm.complete(prompt, final=True, bypass_cache=True)
        final, ranked = extract_final_answer(response)
        return response, final, ranked


def answer_chain(question: str, plan: DecompositionPlan, best_chain: ReasoningChain,
                 llm: LlmClient, *, rendering: str = RENDER_TRIPLES,
                 templates: dict | None = None) -> Answer:
    if not best_chain.steps:
        raise ValueError("best_chain has no steps")
    templates = templates or load_templates()
    prompt = render(templates["answer_chain"], {
        "question": question,
        "decomposition_triples": plan.render_triples(),
        "reasoning_chain": render_chain_evidence(best_chain, rendering),
    })
    rationale, final, ranked = _ask(prompt, llm)
    return Answer(final, ranked, rationale, mode=rendering,
                  evidence=_evidence_keys(best_chain.triples()))


def answer_parallel(question: str, plan: DecompositionPlan,
                    triple_sets: list[ReasoningTripleSet], llm: LlmClient, *,
                    rendering: str = RENDER_TRIPLES,
                    templates: dict | None = None) -> Answer:
    if not any(s.triples for s in triple_sets):
        raise ValueError("every branch is empty")
    templates = templates or load_templates()
    prompt = render(templates["answer_parallel"], {
        "question": question,
        "decomposition_triples": plan.render_triples(),
        "retrieved_triples": render_parallel_evidence(triple_sets, rendering),
    })
    rationale, final, ranked = _ask(prompt, llm)
    evidence = _evidence_keys(t for s in triple_sets for t in s.triples)
    # An empty branch means the model had to fill the gap from its own
    # knowledge, which the trace flags.
    fallback = any(not s.triples and not s.constraint for s in triple_sets)
    return Answer(final, ranked, rationale, mode=rendering,
                  fallback_used=fallback, evidence=evidence)


def answer_io(question: str, llm: LlmClient, *,
              templates: dict | None = None) -> Answer:
    templates = templates or load_templates()
    prompt = render(templates["answer_io"], {"question": question})
    rationale, final, ranked = _ask(prompt, llm)
    return Answer(final, ranked, rationale, mode="none")


def answer_cot(question: str, llm: LlmClient, *,
               templates: dict | None = None) -> Answer:
    templates = templates or load_templates()
    prompt = render(templates["answer_cot"], {"question": question})
    rationale, final, ranked = _ask(prompt, llm)
    return Answer(final, ranked, rationale, mode="none")


def answer_pdr(question: str, plan: DecompositionPlan, llm: LlmClient, *,
               templates: dict | None = None, as_fallback: bool = False) -> Answer:
    """Answer from the plan and model knowledge alone (no KG evidence)."""
    templates = templates or load_templates()
    name = "pdr_chain" if plan.qtype is QuestionType.CHAIN else "pdr_parallel"
    prompt = render(templates[name], {
        "question": question,
        "decomposition_triples": "{" + plan.render_triples() + "}",
    })
    rationale, final, ranked = _ask(prompt, llm)
    return Answer(final, ranked, rationale, mode="none", fallback_used=as_fallback)
