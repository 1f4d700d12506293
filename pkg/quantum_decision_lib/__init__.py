"""
Quantum probability models of decisions under ambiguity, with the
classical baselines they are compared against.
"""

__version__ = "0.1.0"

from .config import RunConfig  # noqa: E402
from .exceptions import InputError, QduError, SearchError  # noqa: E402
from .experiment_spec import ExperimentSpec  # noqa: E402
from .report import Report  # noqa: E402
from .runner import ExperimentRunner  # noqa: E402

__all__ = [
    "ExperimentRunner",
    "ExperimentSpec",
    "RunConfig",
    "Report",
    "QduError",
    "InputError",
    "SearchError",
]
