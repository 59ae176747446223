"""Discrete-time preview, H-infinity and regret-optimal control."""

from ._previewctl import *  # noqa: F401,F403
from ._previewctl import __version__  # noqa: F401
