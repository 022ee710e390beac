import time
from typing import Any, Dict, List, Optional

from loguru import logger

from autocp.models.response_models import EvaluationRecord
from autocp.utils.callbacks import SearchCallbacks, SearchEvent


class SearchSummaryObserver:
    """
    Collects evaluation records during a search and logs a summary when it completes:
    - number of evaluations and how many were flagged
    - best mean length per model family
    - total evaluation time and search duration

    Attaching chains onto the callbacks already registered, so defaults and
    user callbacks keep firing.
    """

    def __init__(self):
        self._records: List[EvaluationRecord] = []
        self._search_start_time: Optional[float] = None
        self._search_duration: Optional[float] = None
        self._summary_logged: bool = False

    def attach(self, callbacks: SearchCallbacks) -> SearchCallbacks:
        handlers = {
            SearchEvent.SEARCH_STARTED: self._on_search_started,
            SearchEvent.EVALUATION: self._on_evaluation,
            SearchEvent.SEARCH_COMPLETED: self._on_search_completed,
        }
        for event, handler in handlers.items():
            previous = callbacks.get_callback(event) if callbacks.has_callback(event) else None
            callbacks.register_callback(event, self._chain(previous, handler))
        return callbacks

    @staticmethod
    def _chain(previous, handler):
        def callback(data: Dict[str, Any]):
            if previous is not None:
                previous(data)
            handler(data)

        return callback

    def _on_search_started(self, data: Dict[str, Any]):
        self._records.clear()
        self._summary_logged = False
        self._search_start_time = time.monotonic()

    def _on_evaluation(self, data: Dict[str, Any]):
        self._records.append(data["record"])

    def _on_search_completed(self, data: Dict[str, Any]):
        if self._search_start_time is not None:
            self._search_duration = time.monotonic() - self._search_start_time
        self.log_summary()

    def get_summary(self) -> Dict[str, Any]:
        """
        Summary of the collected records as a JSON-compatible dictionary.

        Returns:
            Dictionary containing:
            - evaluations: Number of evaluated pipelines
            - flagged: Number of penalty-flagged evaluations
            - best_length_per_model: Best unflagged mean length per model family
            - total_evaluation_seconds: Sum of evaluation wall times
            - search_duration: Seconds between search start and completion
        """
        best: Dict[str, float] = {}
        for record in self._records:
            if record.flagged:
                continue
            model = record.spec.model_id.value
            best[model] = min(best.get(model, float("inf")), record.mean_length)
        return {
            "evaluations": len(self._records),
            "flagged": sum(record.flagged for record in self._records),
            "best_length_per_model": best,
            "total_evaluation_seconds": round(sum(record.wall_seconds for record in self._records), 3),
            "search_duration": self._search_duration,
        }

    def log_summary(self):
        if self._summary_logged:
            return
        summary = self.get_summary()
        logger.info("=== Search Summary ===")
        logger.info(f"Evaluations: {summary['evaluations']} ({summary['flagged']} flagged)")
        for model, length in sorted(summary["best_length_per_model"].items()):
            logger.info(f"Best length [{model}]: {length:.4f}")
        logger.info(f"Total evaluation time: {summary['total_evaluation_seconds']:.3f}s")
        if summary["search_duration"] is not None:
            logger.info(f"Search duration: {summary['search_duration']:.3f}s")
        self._summary_logged = True
