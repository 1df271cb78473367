"""Exact combinatorics of annular noncrossing permutations, second-order
free cumulants, orthogonal Weingarten calculus and matrix/vertex cumulants
of orthogonally invariant random matrices, with a Monte Carlo cross-check."""

from .combinatorics import Permutation, SetPartition, tau_shape
from .noncrossing import AnnulusShape, annular_noncrossing, disc_noncrossing, noncrossing_perms
from .premaps import Premap
from .weingarten import gamma, wg_context, wg_normalized

__all__ = [
    "AnnulusShape",
    "Permutation",
    "Premap",
    "SetPartition",
    "annular_noncrossing",
    "disc_noncrossing",
    "gamma",
    "noncrossing_perms",
    "tau_shape",
    "wg_context",
    "wg_normalized",
]
