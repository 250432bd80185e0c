"""Memory-robust p-values for Clauser-Horne Bell-test trial data."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
