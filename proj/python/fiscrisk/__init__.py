"""Survival analysis of fiscal crises with economic complexity covariates.

Thin Python layer over the C++ core: spell construction from country-year
panels, ECI scores from bipartite activity matrices, Cox proportional-hazards
fits with Breslow/Efron/exact tie handling, the ten-model AIC ladder, and
simulation experiments with known ground truth.
"""

from ._fiscrisk import *  # noqa: F401,F403
from ._fiscrisk import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
__doc__ = __doc__ or _core_doc
__version__ = "0.1.0"
