"""Variable-exponent p(x)-Laplacian eigenpair solvers."""

from ._vexspec import *  # noqa: F401,F403
from ._vexspec import __doc__  # noqa: F401

__version__ = "0.1.0"
