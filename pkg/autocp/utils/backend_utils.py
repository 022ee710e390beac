"""
Learner backends that live behind optional extras.

A family listed in ``OPTIONAL_BACKENDS`` needs a third-party package the core
install does not pull in. ``missing_backends`` answers without importing it,
so a search can reject such a family before any evaluation runs.
"""

from importlib import import_module
from importlib.util import find_spec
from typing import Dict, Iterable, List, NamedTuple

from loguru import logger

from autocp.exceptions import BackendUnavailableError


class OptionalBackend(NamedTuple):
    package: str
    extra: str
    module_path: str
    class_name: str


OPTIONAL_BACKENDS: Dict[str, OptionalBackend] = {
    "mlp": OptionalBackend(package="torch", extra="mlp", module_path="autocp.learners.mlp", class_name="MLPLearner"),
}


def install_hint(family: str) -> str:
    backend = OPTIONAL_BACKENDS[family]
    return f"the {family} learner needs '{backend.package}'. Install with: pip install autocp[{backend.extra}]"


def _family_name(family) -> str:
    return str(getattr(family, "value", family))


def backend_available(family: str) -> bool:
    backend = OPTIONAL_BACKENDS.get(_family_name(family))
    return backend is None or find_spec(backend.package) is not None


def missing_backends(families: Iterable[str]) -> List[str]:
    """Families among ``families`` whose optional package is not installed."""
    return [_family_name(f) for f in families if not backend_available(f)]


def import_backend(family: str):
    """
    Import the learner class of a family that lives behind an optional extra.

    Args:
        family: Model family with an entry in ``OPTIONAL_BACKENDS``

    Returns:
        The learner class

    Raises:
        BackendUnavailableError: If the family's package (or one it needs) is not installed
        AttributeError: If the backend module does not define the learner class
    """
    family = _family_name(family)
    backend = OPTIONAL_BACKENDS[family]
    try:
        module = import_module(backend.module_path)
    except ImportError as e:
        missing = getattr(e, "name", None) or backend.package
        message = f"Cannot import {backend.module_path} (missing module '{missing}'): {install_hint(family)}"
        logger.error(message)
        raise BackendUnavailableError(message) from e

    learner_class = getattr(module, backend.class_name, None)
    if learner_class is None:
        raise AttributeError(f"{backend.module_path} does not define {backend.class_name}")
    return learner_class
