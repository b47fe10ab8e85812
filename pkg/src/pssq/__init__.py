"""Counting values of floor(n^c) of the form s * (square)."""

from .errors import *  # noqa: F401,F403
from .exact_power import (CExponent, as_cexponent, integer_kth_root, interval_contains_integer,
                          power_floor)
from .arith import SquarefreeDecomposition, factorize, mobius, squarefree_part
from .counting import (CountResult, count_averaged, count_direct, count_dyadic, count_inverse,
                       distinct_squarefree_parts, trivial_bound)

__version__ = "0.1.0"
