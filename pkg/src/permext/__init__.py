"""Permutation arrays with large Hamming distance: constructions and verification.

Submodules:

* :mod:`permext.perm` - permutation arrays and distance verification
* :mod:`permext.field` - GF(q) tables
* :mod:`permext.groups` - AGL(1,q), PGL(2,q), PGammaL(2,q) and block splits
* :mod:`permext.mols` - Latin squares and the Kronecker constructions
* :mod:`permext.extension` - partition systems and extension operators
* :mod:`permext.search` - greedy / ILP partition search, coset search
* :mod:`permext.ledger` - PA files, bound ledger, published data
"""

from ._accel import backend_name, set_threads
from .perm import (
    DistanceReport,
    PermutationArray,
    compose,
    coset,
    coset_min_distance,
    cross_distance,
    group_min_distance,
    hamming_distance,
    inverse,
    min_distance,
    verify_pa,
)

__version__ = "0.1.0"

__all__ = [
    "DistanceReport",
    "PermutationArray",
    "backend_name",
    "compose",
    "coset",
    "coset_min_distance",
    "cross_distance",
    "group_min_distance",
    "hamming_distance",
    "inverse",
    "min_distance",
    "set_threads",
    "verify_pa",
]
