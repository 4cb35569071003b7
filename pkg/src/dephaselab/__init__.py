"""Dephasing with minimal sources of randomness.

Subpackages:

* :mod:`dephaselab.qcore` - dense linear algebra and quantum primitives
* :mod:`dephaselab.weylops` - clock/shift matrices, Weyl operator bases, MUBs
* :mod:`dephaselab.dephaser` - exact and approximate pinching constructions
* :mod:`dephaselab.recurrence` - stroboscopic maps and time robustness
* :mod:`dephaselab.pqc` - entanglement-keyed private quantum channel
* :mod:`dephaselab.expander` - phase-space expander mixing
* :mod:`dephaselab.bounds` - dimension lower bounds for noise sources
* :mod:`dephaselab.cli` - reproducible experiment commands
"""

from .tolerances import TOL, Tolerances

__version__ = "0.1.0"

__all__ = ["TOL", "Tolerances", "__version__"]
