"""Input validation helpers shared by the estimator and the CLI."""

import numbers

import numpy as np
from sklearn.utils.validation import check_array

from .constitutive import MaterialParams
from .poly_fields import DEGREE_CAP, PolyField


def check_points(X):
    """Return ``X`` as a finite float array of shape ``(n, 3)``."""
    X = check_array(np.atleast_2d(X), dtype=np.float64, ensure_all_finite=True)
    if X.shape[1] != 3:
        raise ValueError(f"points must have 3 coordinates, got {X.shape[1]}")
    return X


def check_degree(degree, name="degree"):
    if not isinstance(degree, numbers.Integral) or isinstance(degree, bool):
        raise TypeError(f"{name} must be an integer")
    if not 0 <= degree <= DEGREE_CAP:
        raise ValueError(f"{name} must lie in [0, {DEGREE_CAP}], got {degree}")
    return int(degree)


def check_vector_field(u, name="field"):
    if not isinstance(u, PolyField) or u.shape != (3,):
        raise TypeError(f"{name} must be a vector PolyField")
    return u


def check_material(params, require_curvature=True):
    if not isinstance(params, MaterialParams):
        raise TypeError("expected MaterialParams")
    return params.validate(require_curvature=require_curvature)
