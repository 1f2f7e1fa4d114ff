"""Motion-primitive segmentation and library learning for driving trajectories."""

from mpseg._core import *  # noqa: F401,F403
from mpseg._core import __doc__  # noqa: F401

__version__ = "0.1.0"
