"""Grounding decomposition triples against the KG.

Chain plans are completed hop by hop with a beam over bridge entities:
relations around the anchor are scored by the LLM against the current
decomposition triple, candidate triples are searched and scored the same
way, and the top-``width`` bindings survive to the next hop. Parallel
plans ground each decomposition triple independently and keep every
retrieved triple. Label-less (compound-value) entities are expanded one
extra hop so chains land on named entities.
"""

from __future__ import annotations

import logging
import re
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from .kg import KgBackend, tokenize
from .llm import LlmClient, render
from .plan import DecompositionPlan, DecompositionTriple, QuestionType, Term
from .prompts import load_templates

log = logging.getLogger(__name__)


class EntityNotFound(LookupError):
    """Fuzzy match produced no entity for a bound anchor term."""


class NoCandidates(ValueError):
    """A prune operation was called with nothing to score."""


class DeadEnd(RuntimeError):
    """A chain hop produced zero candidates across the whole beam."""

    def __init__(self, hop: int):
        super().__init__(f"no candidates survive hop {hop + 1}")
        self.hop = hop


@dataclass(frozen=True)
class BeamConfig:
    width: int = 2
    relation_keep: int = 5
    candidate_cap: int = 60

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("beam width must be >= 1")


@dataclass(frozen=True)
class ScoredRelation:
    relation: str
    score: float


@dataclass(frozen=True)
class GroundedTriple:
    head: str
    relation: str
    tail: str
    head_label: str
    tail_label: str

    def render(self) -> str:
        return f"{{{self.head_label}, {self.relation}, {self.tail_label}}}"

    def render_bare(self) -> str:
        return f"{self.head_label}, {self.relation}, {self.tail_label}"

    def key(self) -> tuple[str, str, str]:
        return (self.head, self.relation, self.tail)


@dataclass(frozen=True)
class ScoredTriple:
    """A candidate completion of one decomposition triple.

    `binding` is the entity bound to the triple's open side; when the open
    side is a compound-value node, `expansion` carries the extra hop and
    the binding moves to the expansion's far end.
    """

    triple: GroundedTriple
    score: float
    binding: str
    binding_label: str
    expansion: GroundedTriple | None = None

    def triples(self) -> tuple[GroundedTriple, ...]:
        if self.expansion is None:
            return (self.triple,)
        return (self.triple, self.expansion)

    def render_bare(self) -> str:
        return ", ".join(t.render_bare() for t in self.triples())

    def sort_key(self) -> tuple:
        return (-self.score, self.triple.head, self.triple.tail, self.binding)


@dataclass(frozen=True)
class ReasoningChain:
    steps: tuple[ScoredTriple, ...]
    bridge_bindings: tuple[tuple[str, str], ...]  # (placeholder, entity id)
    cumulative_score: float

    def triples(self) -> tuple[GroundedTriple, ...]:
        return tuple(t for step in self.steps for t in step.triples())

    def render(self) -> str:
        return ", ".join(t.render() for t in self.triples())

    def to_json(self) -> dict:
        return {
            "triples": [t.render_bare() for t in self.triples()],
            "bridge_bindings": dict(self.bridge_bindings),
            "cumulative_score": self.cumulative_score,
        }


@dataclass(frozen=True)
class ReasoningTripleSet:
    branch_index: int
    triples: tuple[GroundedTriple, ...]
    constraint: bool = False
    error: str = ""

    def render(self) -> str:
        return "{" + ", ".join(t.render() for t in self.triples) + "}"

    def to_json(self) -> dict:
        return {
            "branch_index": self.branch_index,
            "triples": [t.render_bare() for t in self.triples],
            "constraint": self.constraint,
            "error": self.error,
        }


@dataclass
class PruneResult:
    """Full normalized score vector plus how it was obtained."""

    scored: list
    uniform_fallback: bool = False
    inherited_fallback: bool = False
    capped: bool = False


def ground_anchor(text: str, kg: KgBackend) -> str:
    """First fuzzy-match hit for a bound term, under the match ordering."""
    matches = kg.entity_match(text)
    if not matches:
        raise EntityNotFound(text)
    return matches[0][0]


_SCORE_GROUP = re.compile(
    r"\{([^{}]*?)\s*\(Score:\s*([-+]?[0-9]*\.?[0-9]+)\s*\)\s*\.?\s*\}")
_SCORE_LINE = re.compile(
    r"^\s*\d+\.\s*(.+?)\s*\(Score:\s*([-+]?[0-9]*\.?[0-9]+)\s*\)",
    re.MULTILINE)


def parse_scored_items(response: str) -> list[tuple[str, float]]:
    """(item text, score) pairs from a scoring response.

    Brace-wrapped ``{item (Score: x)}`` groups are preferred; numbered
    lines without braces are a fallback, matching how models actually
    deviate from the requested format.
    """
    pairs = []
    for m in _SCORE_GROUP.finditer(response):
        text = m.group(1).strip().rstrip(".")
        try:
            pairs.append((text, float(m.group(2))))
        except ValueError:
            continue
    if pairs:
        return pairs
    for m in _SCORE_LINE.finditer(response):
        text = m.group(1).strip().rstrip(".").strip("{").strip()
        try:
            pairs.append((text, float(m.group(2))))
        except ValueError:
            continue
    return pairs


def _normalize_match_text(text: str) -> str:
    return " ".join(text.lower().replace("{", " ").replace("}", " ").split()).rstrip(".")


def _normalize_scores(raw: dict, names: list[str]) -> dict[str, float]:
    """Clamp to [0, inf), then scale so the vector sums to one."""
    clamped = {n: max(raw.get(n, 0.0), 0.0) for n in names}
    total = sum(clamped.values())
    if total <= 0:
        return {n: 1.0 / len(names) for n in names}
    return {n: v / total for n, v in clamped.items()}


def _cap_relations(relations: list[str], phrase: str, cap: int) -> tuple[list[str], bool]:
    if len(relations) <= cap:
        return relations, False
    phrase_tokens = set(tokenize(phrase))

    def overlap(rel: str) -> int:
        return len(set(tokenize(rel)) & phrase_tokens)

    kept = sorted(relations, key=lambda r: (-overlap(r), r))[:cap]
    return sorted(kept), True


def score_relations(decomp: DecompositionTriple, candidates, llm: LlmClient,
                    *, bindings: dict[Term, str] | None = None,
                    candidate_cap: int = 60,
                    templates: dict | None = None) -> PruneResult:
    """LLM-score candidate relations against one decomposition triple.

    Returns the full normalized vector (sums to 1, sorted by score then
    name). Unparseable responses fall back to uniform scores so the
    pipeline never stalls on a malformed reply.
    """
    names = sorted(set(candidates))
    if not names:
        raise NoCandidates("no relations to score")
    names, capped = _cap_relations(names, decomp.relation, candidate_cap)
    if len(names) == 1:
        return PruneResult([ScoredRelation(names[0], 1.0)], capped=capped)
    templates = templates or load_templates()
    relations_text = "{" + "\n".join(
        f"{i}. {name}" for i, name in enumerate(names, start=1)) + "}"
    prompt = render(templates["relation_prune"], {
        "triple": decomp.render(bindings),
        "relations_text": relations_text,
    })
    response = llm.complete(prompt)
    by_name = {}
    for text, score in parse_scored_items(response):
        name = text.strip()
        if name in by_name:
            continue
        if name in names:
            by_name[name] = score
    uniform = not by_name
    normalized = _normalize_scores(by_name, names)
    scored = [ScoredRelation(n, normalized[n]) for n in names]
    scored.sort(key=lambda r: (-r.score, r.relation))
    return PruneResult(scored, uniform_fallback=uniform, capped=capped)


def prune_relations(decomp: DecompositionTriple, candidates, llm: LlmClient,
                    keep: int = 5, *, bindings: dict[Term, str] | None = None,
                    candidate_cap: int = 60,
                    templates: dict | None = None) -> list[ScoredRelation]:
    """Top `keep` positively scored relations (zero-scored ones are out)."""
    result = score_relations(decomp, candidates, llm, bindings=bindings,
                             candidate_cap=candidate_cap, templates=templates)
    return [r for r in result.scored[:keep] if r.score > 0]


ANCHOR_IS_HEAD = "anchor-is-head"
ANCHOR_IS_TAIL = "anchor-is-tail"


def search_candidate_triples(anchor: str, relations: list[ScoredRelation],
                             direction: str, kg: KgBackend, *,
                             decomp: DecompositionTriple | None = None,
                             bindings: dict[Term, str] | None = None,
                             llm: LlmClient | None = None,
                             candidate_cap: int = 60,
                             templates: dict | None = None) -> list[ScoredTriple]:
    """All completions of the open side, one ScoredTriple per entity found.

    Candidates inherit their relation's score. When the open side is a
    label-less compound-value node and an LLM is available, the node's
    outgoing relations are pruned against the same decomposition triple
    and each far entity of the best continuation becomes its own
    candidate pair.
    """
    if direction not in (ANCHOR_IS_HEAD, ANCHOR_IS_TAIL):
        raise ValueError(f"bad direction: {direction}")
    anchor_label = kg.display_label(anchor)
    out: list[ScoredTriple] = []
    for scored_rel in relations:
        rel = scored_rel.relation
        if direction == ANCHOR_IS_HEAD:
            open_ids = kg.tail_entity_search(anchor, rel)
        else:
            open_ids = kg.head_entity_search(anchor, rel)
        for open_id in open_ids:
            open_label = kg.entity_label(open_id)
            if direction == ANCHOR_IS_HEAD:
                base = GroundedTriple(anchor, rel, open_id, anchor_label,
                                      open_label or "UnName_Entity")
            else:
                base = GroundedTriple(open_id, rel, anchor,
                                      open_label or "UnName_Entity", anchor_label)
            if open_label is None and llm is not None and decomp is not None:
                out.extend(_expand_cvt(base, open_id, anchor, scored_rel.score,
                                       kg, decomp, bindings, llm,
                                       candidate_cap, templates))
            else:
                out.append(ScoredTriple(base, scored_rel.score, open_id,
                                        open_label or "UnName_Entity"))
    return out


def _expand_cvt(base: GroundedTriple, cvt: str, anchor: str, score: float,
                kg: KgBackend, decomp: DecompositionTriple,
                bindings, llm: LlmClient, candidate_cap: int,
                templates) -> list[ScoredTriple]:
    out_rels = [r for r in kg.head_relation_search(cvt) if r != base.relation]
    unexpanded = ScoredTriple(base, score, cvt, "UnName_Entity")
    if not out_rels:
        return [unexpanded]
    best = prune_relations(decomp, out_rels, llm, keep=1, bindings=bindings,
                           candidate_cap=candidate_cap, templates=templates)[0]
    fars = [f for f in kg.tail_entity_search(cvt, best.relation) if f != anchor]
    if not fars:
        return [unexpanded]
    expanded = []
    for far in fars:
        expansion = GroundedTriple(cvt, best.relation, far, "UnName_Entity",
                                   kg.display_label(far))
        expanded.append(ScoredTriple(base, score, far, kg.display_label(far),
                                     expansion=expansion))
    return expanded


def score_triples(decomp: DecompositionTriple, candidates: list[ScoredTriple],
                  llm: LlmClient, *, bindings: dict[Term, str] | None = None,
                  templates: dict | None = None) -> PruneResult:
    """LLM-score candidate triples against the decomposition triple.

    Unmentioned candidates score 0; an unparseable response falls back to
    the scores inherited from relation pruning. The returned vector is
    normalized to sum 1 and sorted.
    """
    if not candidates:
        raise NoCandidates("no triples to score")
    if len(candidates) == 1:
        only = replace(candidates[0], score=1.0)
        return PruneResult([only])
    templates = templates or load_templates()
    triples_text = "{" + "\n".join(
        f"{i}. {c.render_bare()}" for i, c in enumerate(candidates, start=1)) + "}"
    prompt = render(templates["triple_prune"], {
        "filter_triple": decomp.render(bindings),
        "triples_text": triples_text,
    })
    response = llm.complete(prompt)
    by_text = {}
    for text, score in parse_scored_items(response):
        by_text.setdefault(_normalize_match_text(text), score)
    raw = {}
    matched_any = False
    for i, cand in enumerate(candidates):
        key = _normalize_match_text(cand.render_bare())
        if key in by_text:
            raw[i] = by_text[key]
            matched_any = True
    inherited = not matched_any
    if inherited:
        raw = {i: c.score for i, c in enumerate(candidates)}
    names = list(range(len(candidates)))
    normalized = _normalize_scores(raw, names)
    rescored = [replace(c, score=normalized[i]) for i, c in enumerate(candidates)]
    rescored.sort(key=ScoredTriple.sort_key)
    return PruneResult(rescored, inherited_fallback=inherited,
                       uniform_fallback=inherited and all(
                           c.score == 0 for c in candidates))


def prune_triples(decomp: DecompositionTriple, candidates: list[ScoredTriple],
                  llm: LlmClient, k: int = 2, *,
                  bindings: dict[Term, str] | None = None,
                  templates: dict | None = None) -> list[ScoredTriple]:
    if k < 1:
        raise ValueError("k must be >= 1")
    result = score_triples(decomp, candidates, llm, bindings=bindings,
                           templates=templates)
    return result.scored[:k]


def _triple_roles(triple: DecompositionTriple,
                  bound: dict[Term, tuple[str, str]]):
    """Split a decomposition triple into (anchor term, open placeholder).

    `bound` maps placeholders already resolved by earlier hops to
    (entity id, label). Returns (anchor_term, new_placeholder, direction)
    where new_placeholder is None for a verification triple.
    """
    def is_open(term: Term) -> bool:
        return term.is_placeholder and term not in bound

    head_open, tail_open = is_open(triple.head), is_open(triple.tail)
    if head_open and tail_open:
        return None, None, None
    if tail_open:
        return triple.head, triple.tail, ANCHOR_IS_HEAD
    if head_open:
        return triple.tail, triple.head, ANCHOR_IS_TAIL
    return None, None, "verify"


@dataclass
class _Partial:
    steps: tuple[ScoredTriple, ...] = ()
    bound: dict = field(default_factory=dict)
    score: float = 1.0

    def sort_key(self):
        return (-self.score, tuple(sorted(v[0] for v in self.bound.values())))


def _display_bindings(bound: dict) -> dict[Term, str]:
    return {term: label for term, (_, label) in bound.items()}


def chain_reason(question: str, plan: DecompositionPlan, kg: KgBackend,
                 llm: LlmClient, config: BeamConfig = BeamConfig(), *,
                 templates: dict | None = None,
                 trace: dict | None = None) -> list[ReasoningChain]:
    """Beam-complete a chain plan; returns all completed chains, best first.

    Raises EntityNotFound if the first anchor cannot be grounded and
    DeadEnd(hop) when some hop eliminates every beam item; callers fall
    back to answering from the plan alone.
    """
    if plan.qtype is not QuestionType.CHAIN:
        raise ValueError("chain_reason requires a chain plan")
    templates = templates or load_templates()
    hops_trace = [] if trace is None else trace.setdefault("hops", [])
    beam = [_Partial()]
    last = len(plan.triples) - 1
    for hop, decomp in enumerate(plan.triples):
        children: list[_Partial] = []
        hop_trace = {"hop": hop + 1, "decomp_triple": decomp.render(), "items": []}
        for partial in beam:
            anchor_term, open_term, direction = _triple_roles(decomp, partial.bound)
            if direction is None:
                continue  # two unresolved placeholders; nothing to ground from
            if direction == "verify":
                children.append(_verify_step(decomp, partial, kg, llm, config,
                                             templates, hop_trace))
                continue
            if anchor_term.is_placeholder:
                anchor_id, anchor_label = partial.bound[anchor_term]
            else:
                anchor_id = ground_anchor(anchor_term.text, kg)
                anchor_label = kg.display_label(anchor_id)
            display = _display_bindings(partial.bound)
            if direction == ANCHOR_IS_HEAD:
                rels = kg.head_relation_search(anchor_id)
            else:
                rels = kg.tail_relation_search(anchor_id)
            item_trace = {"anchor": anchor_id, "anchor_label": anchor_label,
                          "direction": direction, "relations_found": len(rels)}
            if not rels:
                hop_trace["items"].append(item_trace)
                continue
            kept_rels = prune_relations(decomp, rels, llm,
                                        keep=config.relation_keep,
                                        bindings=display,
                                        candidate_cap=config.candidate_cap,
                                        templates=templates)
            candidates = search_candidate_triples(
                anchor_id, kept_rels, direction, kg, decomp=decomp,
                bindings=display, llm=llm, candidate_cap=config.candidate_cap,
                templates=templates)
            item_trace["relations_kept"] = [
                {"relation": r.relation, "score": round(r.score, 6)}
                for r in kept_rels]
            item_trace["candidates"] = len(candidates)
            if not candidates:
                hop_trace["items"].append(item_trace)
                continue
            kept = prune_triples(decomp, candidates, llm, k=config.width,
                                 bindings=display, templates=templates)
            item_trace["kept"] = [
                {"triple": c.render_bare(), "score": round(c.score, 6),
                 "binding": c.binding} for c in kept]
            hop_trace["items"].append(item_trace)
            for cand in kept:
                bound = dict(partial.bound)
                bound[open_term] = (cand.binding, cand.binding_label)
                children.append(_Partial(partial.steps + (cand,), bound,
                                         partial.score * cand.score))
        hops_trace.append(hop_trace)
        if not children:
            raise DeadEnd(hop)
        children.sort(key=_Partial.sort_key)
        beam = children if hop == last else children[:config.width]
    chains = [
        ReasoningChain(
            steps=p.steps,
            bridge_bindings=tuple(sorted(
                (term.render(), eid) for term, (eid, _) in p.bound.items()
                if term.is_placeholder)),
            cumulative_score=p.score,
        )
        for p in beam
    ]
    return chains


def _verify_step(decomp: DecompositionTriple, partial: _Partial, kg: KgBackend,
                 llm: LlmClient, config: BeamConfig, templates,
                 hop_trace: dict) -> _Partial:
    """Ground a both-bound final triple as confirmation, if the KG has it.

    The chain survives either way; a connecting triple is attached as an
    extra step but does not change the cumulative score.
    """
    bridge_term = decomp.head if decomp.head.is_placeholder else decomp.tail
    other_term = decomp.tail if bridge_term is decomp.head else decomp.head
    bridge_id, bridge_label = partial.bound[bridge_term]
    item_trace = {"verify": decomp.render(_display_bindings(partial.bound)),
                  "bridge": bridge_id}
    try:
        other_id = ground_anchor(other_term.text, kg)
    except EntityNotFound:
        item_trace["result"] = "other entity not found"
        hop_trace["items"].append(item_trace)
        return partial
    rels = sorted(set(kg.head_relation_search(bridge_id))
                  | set(kg.tail_relation_search(bridge_id)))
    connecting: list[tuple[float, GroundedTriple]] = []
    if rels:
        display = _display_bindings(partial.bound)
        kept = prune_relations(decomp, rels, llm, keep=config.relation_keep,
                               bindings=display,
                               candidate_cap=config.candidate_cap,
                               templates=templates)
        other_label = kg.display_label(other_id)
        for scored_rel in kept:
            rel = scored_rel.relation
            if other_id in kg.tail_entity_search(bridge_id, rel):
                connecting.append((scored_rel.score, GroundedTriple(
                    bridge_id, rel, other_id, bridge_label, other_label)))
            if other_id in kg.head_entity_search(bridge_id, rel):
                connecting.append((scored_rel.score, GroundedTriple(
                    other_id, rel, bridge_id, other_label, bridge_label)))
    if not connecting:
        item_trace["result"] = "unverified"
        hop_trace["items"].append(item_trace)
        return partial
    connecting.sort(key=lambda pair: (-pair[0], pair[1].key()))
    score, triple = connecting[0]
    item_trace["result"] = triple.render_bare()
    hop_trace["items"].append(item_trace)
    step = ScoredTriple(triple, score, bridge_id, bridge_label)
    return _Partial(partial.steps + (step,), dict(partial.bound), partial.score)


_CHAIN_CHOICE = re.compile(r"chain\s*(\d+)", re.IGNORECASE)


def select_best_chain(question: str, chains: list[ReasoningChain],
                      llm: LlmClient, *, templates: dict | None = None,
                      trace: dict | None = None) -> ReasoningChain:
    """Ask the LLM to pick one completed chain; fall back to the top score."""
    if not chains:
        raise ValueError("no chains to select from")
    if len(chains) == 1:
        if trace is not None:
            trace["selection"] = {"mode": "single", "chosen": 1}
        return chains[0]
    templates = templates or load_templates()
    rendered = "\n".join(
        f"chain {i}: {chain.render()}" for i, chain in enumerate(chains, start=1))
    prompt = render(templates["select_chain"],
                    {"reasoning_chains": rendered, "question": question})
    response = llm.complete(prompt)
    m = _CHAIN_CHOICE.search(response)
    if m and 1 <= int(m.group(1)) <= len(chains):
        chosen = int(m.group(1))
        if trace is not None:
            trace["selection"] = {"mode": "llm", "chosen": chosen}
        return chains[chosen - 1]
    best = max(range(len(chains)), key=lambda i: (chains[i].cumulative_score, -i))
    if trace is not None:
        trace["selection"] = {"mode": "fallback-top-score", "chosen": best + 1}
    return chains[best]


def _parallel_branch(index: int, decomp: DecompositionTriple, kg: KgBackend,
                     llm: LlmClient, config: BeamConfig,
                     templates) -> ReasoningTripleSet:
    placeholders = decomp.placeholders
    if not placeholders:
        return ReasoningTripleSet(index, (), constraint=True)
    if len(placeholders) == 2:
        return ReasoningTripleSet(index, (), error="no bound anchor")
    if decomp.tail.is_placeholder:
        anchor_term, direction = decomp.head, ANCHOR_IS_HEAD
    else:
        anchor_term, direction = decomp.tail, ANCHOR_IS_TAIL
    try:
        anchor_id = ground_anchor(anchor_term.text, kg)
    except EntityNotFound:
        return ReasoningTripleSet(index, (), error="entity-not-found")
    rels = (kg.head_relation_search(anchor_id) if direction == ANCHOR_IS_HEAD
            else kg.tail_relation_search(anchor_id))
    if not rels:
        return ReasoningTripleSet(index, (), error="no-relations")
    kept_rels = prune_relations(decomp, rels, llm, keep=config.relation_keep,
                                candidate_cap=config.candidate_cap,
                                templates=templates)
    candidates = search_candidate_triples(
        anchor_id, kept_rels, direction, kg, decomp=decomp, llm=llm,
        candidate_cap=config.candidate_cap, templates=templates)
    triples = tuple(t for cand in candidates for t in cand.triples())
    return ReasoningTripleSet(index, triples)


def parallel_reason(question: str, plan: DecompositionPlan, kg: KgBackend,
                    llm: LlmClient, config: BeamConfig = BeamConfig(), *,
                    templates: dict | None = None, workers: int = 1,
                    trace: dict | None = None) -> list[ReasoningTripleSet]:
    """Ground every decomposition triple independently; no triple pruning.

    Branches may run concurrently; results always come back in plan
    order. A branch whose anchor cannot be grounded yields an empty set
    instead of failing the question.
    """
    if plan.qtype is not QuestionType.PARALLEL:
        raise ValueError("parallel_reason requires a parallel plan")
    templates = templates or load_templates()

    def run(indexed) -> ReasoningTripleSet:
        index, decomp = indexed
        return _parallel_branch(index, decomp, kg, llm, config, templates)

    indexed = list(enumerate(plan.triples))
    if workers > 1 and len(indexed) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, indexed))
    else:
        results = [run(item) for item in indexed]
    results.sort(key=lambda s: s.branch_index)
    if trace is not None:
        trace["branches"] = [s.to_json() for s in results]
    return results


def triple_in_backend(triple: GroundedTriple, kg: KgBackend) -> bool:
    """Membership check used by groundedness assertions."""
    return triple.tail in kg.tail_entity_search(triple.head, triple.relation)
