"""Matching rates and flexibility allocation in 2-type bipartite random graphs."""

from ._core import *  # noqa: F401,F403
from ._core import NumericError, ParameterError, run_cli

__all__ = [name for name in dir() if not name.startswith("_")]
