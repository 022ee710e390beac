from .acquisition import acquisition, expected_improvement
from .evaluation import evaluate_pipeline, length_penalty
from .optimizer import SearchResult, propose, run_autocp
from .space import SearchSpace

__all__ = [
    "SearchResult",
    "SearchSpace",
    "acquisition",
    "evaluate_pipeline",
    "expected_improvement",
    "length_penalty",
    "propose",
    "run_autocp",
]
