from .generators import (
    GENERATOR_KINDS,
    CandidateGenerator,
    CandidateProposal,
    GeneratorSpec,
    LlmGenerator,
    ScriptedMockGenerator,
    UniformRandomGenerator,
    fallback_proposals,
    generate,
    make_generator,
    select_top_b,
    validate_and_retry,
)
from .parsing import UnparseableResponse, parse_json_candidates, parse_predictions, render_candidates
from .prompts import (
    build_combined_prompt,
    build_generation_prompt,
    build_prediction_prompt,
    context_examples,
)

__all__ = [
    "GENERATOR_KINDS",
    "CandidateGenerator",
    "CandidateProposal",
    "GeneratorSpec",
    "LlmGenerator",
    "ScriptedMockGenerator",
    "UniformRandomGenerator",
    "UnparseableResponse",
    "build_combined_prompt",
    "build_generation_prompt",
    "build_prediction_prompt",
    "context_examples",
    "fallback_proposals",
    "generate",
    "make_generator",
    "parse_json_candidates",
    "parse_predictions",
    "render_candidates",
    "select_top_b",
    "validate_and_retry",
]
