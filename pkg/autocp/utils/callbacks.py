from enum import Enum
from typing import Any, Callable, Dict

from loguru import logger


class SearchEvent(Enum):
    """Enum defining all events a pipeline search emits"""

    SEARCH_STARTED = "on_search_started"
    EVALUATION = "on_evaluation"
    ITERATION = "on_iteration"
    SEARCH_COMPLETED = "on_search_completed"


class SearchCallbacks:
    """
    Registry of search callbacks, one per event.
    Defaults log at debug level; register a callable to replace one.
    """

    def __init__(self):
        self._callbacks: Dict[SearchEvent, Callable] = {}
        self._register_default_callbacks()

    def _register_default_callbacks(self):
        self.register_callback(SearchEvent.SEARCH_STARTED, self._default_search_started)
        self.register_callback(SearchEvent.EVALUATION, self._default_evaluation)
        self.register_callback(SearchEvent.ITERATION, self._default_iteration)
        self.register_callback(SearchEvent.SEARCH_COMPLETED, self._default_search_completed)

    def register_callback(self, event: SearchEvent, callback: Callable):
        """
        Register a callback function for a specific event.
        Args:
            event: The event to register the callback for
            callback: Callable taking the event's data dictionary
        """
        self._callbacks[event] = callback

    def get_callback(self, event: SearchEvent) -> Callable:
        """
        Raises:
            KeyError: If no callback is registered for the event
        """
        return self._callbacks[event]

    def has_callback(self, event: SearchEvent) -> bool:
        return event in self._callbacks

    def emit(self, event: SearchEvent, data: Dict[str, Any]):
        if self.has_callback(event):
            self._callbacks[event](data)

    def _default_search_started(self, data: Dict[str, Any]):
        logger.debug(f"Search started over models {data.get('models')} with budget {data.get('budget')}")

    def _default_evaluation(self, data: Dict[str, Any]):
        record = data["record"]
        logger.debug(f"Evaluation {data.get('index')}: {record.spec.label()} -> {record.mean_length:.4f}")

    def _default_iteration(self, data: Dict[str, Any]):
        logger.debug(f"Iteration {data.get('iteration')}: best length {data.get('best_length'):.4f}")

    def _default_search_completed(self, data: Dict[str, Any]):
        best = data["best"]
        logger.debug(f"Search completed: {best.spec.label()} with length {best.mean_length:.4f}")
