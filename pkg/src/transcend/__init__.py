"""Numerical laboratory for a family of transcendental entire functions
f = F_0 * prod F_k built from an iterated seed polynomial and a ladder of
radii R_k.

Modules:

* ``extrange``: log-polar complex numbers, modulus intervals, huge counts
* ``seedpoly``: the seed polynomial and the head factor F_0
* ``builder``: the radius ladder and truncated evaluation of f
* ``chebgeom``: the map H_m(z) = z^m (2 - z^m) and its level curves
* ``checks``: the inequality and mapping checks, order-of-growth estimates
* ``dynamics``: orbit classification, rendering, box counting, Whitney sums
* ``cli``: command-line front end
"""

from .builder import Construction, Level, SequenceRule, build, epsilon_k, f_eval
from .extrange import BigCount, LogComplex, ModInterval
from .seedpoly import HeadParams, PolySpec, make_head

__all__ = [
    "BigCount", "LogComplex", "ModInterval", "PolySpec", "HeadParams", "make_head",
    "SequenceRule", "Level", "Construction", "build", "f_eval", "epsilon_k",
]
__version__ = "0.1.0"
