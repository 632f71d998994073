"""Factor Ornstein-Uhlenbeck state-space models: simulation, Kalman-filter
likelihood, maximum-likelihood fitting, canonical forms and dimension
selection."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

__version__ = "0.1.0"
