"""Segregation dynamics as a hidden Markov bridge.

Thin wrapper over the C++ core: bridge processes over a discrete state grid,
graph conductance / algebraic connectivity of the company-customer family,
noise calibration, the bridge/HMM filters, EM fitting, and the retweet
polarization pipeline.
"""

from ._bridgenet import *  # noqa: F401,F403
from ._bridgenet import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
