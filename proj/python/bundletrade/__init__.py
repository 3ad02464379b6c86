"""Online bundle trading with inventory-based exponential prices."""

from ._bundletrade import *  # noqa: F401,F403
from ._bundletrade import __version__  # noqa: F401
