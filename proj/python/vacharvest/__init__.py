"""Entanglement harvesting with hydrogenlike detectors."""

from ._vacharvest import *  # noqa: F401,F403
from ._vacharvest import __version__  # noqa: F401
