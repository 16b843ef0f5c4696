"""Small dense tensors over R^3.

Vectors, matrices and third-order tensors are plain numpy arrays of shape
``(3,)``, ``(3, 3)`` and ``(3, 3, 3)``. Every function also accepts a leading
batch of points (e.g. ``(n, 3)`` vectors) so the same code serves pointwise
checks and quadrature loops.
"""

import numpy as np

# Fixed lookup table: EPS[i, j, k] = epsilon_ijk.
EPS = np.zeros((3, 3, 3))
EPS[0, 1, 2] = EPS[1, 2, 0] = EPS[2, 0, 1] = 1.0
EPS[0, 2, 1] = EPS[2, 1, 0] = EPS[1, 0, 2] = -1.0
EPS.setflags(write=False)

IDENTITY = np.eye(3)
IDENTITY.setflags(write=False)

SKEW_RTOL = 1e-12
UNIT_TOL = 1e-10


class TensorError(ValueError):
    """Raised when a tensor argument violates an operation precondition."""


def anti(v):
    """Skew matrix with ``anti(v) @ w == cross(v, w)``, i.e. ``-eps_ijk v_k``."""
    v = np.asarray(v, dtype=float)
    return -np.einsum("ijk,...k->...ij", EPS, v)


def axl(A, rtol=SKEW_RTOL):
    """Axial vector of a skew matrix; inverse of :func:`anti`."""
    A = np.asarray(A, dtype=float)
    sym = 0.5 * (A + np.swapaxes(A, -1, -2))
    scale = np.linalg.norm(A, axis=(-2, -1))
    bad = np.linalg.norm(sym, axis=(-2, -1)) > rtol * np.maximum(scale, 1e-300)
    if np.any(bad & (scale > 0)):
        raise TensorError("axl() needs a skew-symmetric matrix")
    return -0.5 * np.einsum("ijk,...ij->...k", EPS, A)


def sym(A):
    A = np.asarray(A, dtype=float)
    return 0.5 * (A + np.swapaxes(A, -1, -2))


def skw(A):
    A = np.asarray(A, dtype=float)
    return 0.5 * (A - np.swapaxes(A, -1, -2))


def trace(A):
    return np.trace(np.asarray(A, dtype=float), axis1=-2, axis2=-1)


def decompose(A):
    """Split ``A`` into ``(sym A, skw A, tr A)``."""
    return sym(A), skw(A), trace(A)


def tangential_projector(n, tol=UNIT_TOL):
    """``1 - n (x) n`` for a unit normal ``n``."""
    n = np.asarray(n, dtype=float)
    if np.any(np.abs(np.linalg.norm(n, axis=-1) - 1.0) > tol):
        raise TensorError("tangential_projector() needs a unit normal")
    return IDENTITY - np.einsum("...i,...j->...ij", n, n)


def double_contract(C, B):
    """Footnote convention ``(C:B)_i = C_ijp B_pj``."""
    return np.einsum("...ijp,...pj->...i", C, B)


def inner(A, B):
    """Full scalar product ``<A, B>`` over the trailing matrix axes."""
    return np.einsum("...ij,...ij->...", A, B)


def matvec(A, v):
    return np.einsum("...ij,...j->...i", A, v)


def dot(v, w):
    return np.einsum("...i,...i->...", v, w)


def outer(v, w):
    return np.einsum("...i,...j->...ij", v, w)
