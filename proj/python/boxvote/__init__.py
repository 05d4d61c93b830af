"""Instance segmentation from 3D box supervision.

Weak labels from box annotations, simulated per-point box votes, vote
clustering, back-projection to instance masks, and benchmark evaluation.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
