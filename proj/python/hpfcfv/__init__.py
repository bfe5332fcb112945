"""Hybrid-pressure face-centred finite volumes for 2D Stokes and Navier-Stokes."""

from ._core import *  # noqa: F401,F403
from ._core import stokes_matrix as _stokes_triplets


def stokes_matrix(discretization):
    """Condensed Stokes matrix as a scipy.sparse CSR matrix."""
    from scipy.sparse import coo_matrix

    values, rows, cols, shape = _stokes_triplets(discretization)
    return coo_matrix((values, (rows, cols)), shape=shape).tocsr()
