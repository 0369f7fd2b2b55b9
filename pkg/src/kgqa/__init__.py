"""Plan-guided question answering over knowledge graphs."""

__version__ = "0.1.0"

from .config import RunConfig
from .kg import KnowledgeGraph, LocalKg, RemoteKg, Triple, load_graph
from .llm import LlmClient, ResponseCache, ScriptedBackend
from .plan import DecompositionPlan, QuestionType
from .reason import BeamConfig, ReasoningChain, ReasoningTripleSet

__all__ = [
    "BeamConfig",
    "DecompositionPlan",
    "KnowledgeGraph",
    "LlmClient",
    "LocalKg",
    "QuestionType",
    "ReasoningChain",
    "ReasoningTripleSet",
    "RemoteKg",
    "ResponseCache",
    "RunConfig",
    "ScriptedBackend",
    "Triple",
    "load_graph",
]
