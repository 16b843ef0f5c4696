"""Energies, stresses and the equilibrium residual of the couple stress model."""

from dataclasses import dataclass

import numpy as np

from . import tensor_algebra as ta
from .poly_fields import (
    PolyField,
    contract_fields,
    curl_vector,
    div_matrix,
    grad_vector,
)


class ParameterError(ValueError):
    """Material coefficients outside the admissible (coercive) range."""


@dataclass(frozen=True)
class MaterialParams:
    """Isotropic coefficients ``mu``, ``lam`` (Lame) and curvature moduli."""

    mu: float = 1.0
    lam: float = 0.0
    alpha1: float = 1.0
    alpha2: float = 1.0

    def __post_init__(self):
        for name in ("mu", "lam", "alpha1", "alpha2"):
            if not np.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")

    def validate(self, require_curvature=True):
        """Raise unless the total energy is coercive modulo rigid motions.

        Construction only checks finiteness so that degenerate settings (for
        instance the classical limit ``alpha1 = alpha2 = 0``) remain usable
        for pointwise formulas; solvers call this before assembling.
        """
        if self.mu <= 0:
            raise ParameterError("mu must be positive")
        if 3 * self.lam + 2 * self.mu <= 0:
            raise ParameterError("3*lambda + 2*mu must be positive")
        if self.alpha1 < 0 or self.alpha2 < 0:
            raise ParameterError("alpha1 and alpha2 must be non-negative")
        if require_curvature and self.alpha1 + self.alpha2 <= 0:
            raise ParameterError("alpha1 + alpha2 must be positive")
        return self

    @classmethod
    def from_mapping(cls, data):
        """Build from plain keys ``mu, lambda, alpha1, alpha2``."""
        known = {"mu", "lambda", "alpha1", "alpha2"}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown material keys: {sorted(unknown)}")
        return cls(
            mu=float(data.get("mu", 1.0)),
            lam=float(data.get("lambda", 0.0)),
            alpha1=float(data.get("alpha1", 1.0)),
            alpha2=float(data.get("alpha2", 1.0)),
        )

    def as_dict(self):
        return {"mu": self.mu, "lambda": self.lam,
                "alpha1": self.alpha1, "alpha2": self.alpha2}


def strain(u):
    return grad_vector(u).pointwise(ta.sym)


def curvature(u):
    """``grad curl u``; trace-free because ``div curl u = 0``."""
    return grad_vector(curl_vector(u))


def cauchy_stress(params, u):
    """``2 mu sym grad u + lambda tr(grad u) 1``."""
    G = grad_vector(u)
    lam, mu = params.lam, params.mu
    return G.pointwise(lambda g: 2 * mu * ta.sym(g)
                       + lam * ta.trace(g)[..., None, None] * ta.IDENTITY)


def couple_stress_from_curvature(params, K):
    a1, a2 = params.alpha1, params.alpha2
    return K.pointwise(lambda k: a1 * ta.sym(k) + a2 * ta.skw(k))


def couple_stress(params, u):
    """``alpha1 sym(grad curl u) + alpha2 skw(grad curl u)``."""
    return couple_stress_from_curvature(params, curvature(u))


def total_force_stress(params, u):
    """``sigma - 1/2 anti(Div m)``, the stress entering force equilibrium."""
    div_m = div_matrix(couple_stress(params, u))
    return cauchy_stress(params, u) - 0.5 * div_m.pointwise(ta.anti)


def energy_density(params, u):
    """Stored energy per unit volume as a scalar polynomial."""
    E = strain(u)
    K = curvature(u)
    trE = E.pointwise(ta.trace)
    Ks, Kw = K.pointwise(ta.sym), K.pointwise(ta.skw)
    return (params.mu * contract_fields(E, E)
            + 0.5 * params.lam * trE * trE
            + 0.25 * params.alpha1 * contract_fields(Ks, Ks)
            + 0.25 * params.alpha2 * contract_fields(Kw, Kw))


def el_residual(params, u, f):
    """``Div(sigma - 1/2 anti(Div m)) + f``."""
    return div_matrix(total_force_stress(params, u)) + f


def manufactured_body_force(params, u):
    """The body force that makes ``u`` an equilibrium state."""
    return -div_matrix(total_force_stress(params, u))


def internal_work_density(params, u, du):
    """``<sigma(u), grad du> + 1/2 <m(u), grad curl du>`` as a polynomial."""
    return (contract_fields(cauchy_stress(params, u), grad_vector(du))
            + 0.5 * contract_fields(couple_stress(params, u), curvature(du)))


def rigid_motion(a, omega):
    """``a + anti(omega) x`` as a vector field."""
    a = np.asarray(a, dtype=float)
    W = ta.anti(omega)
    coef = PolyField.constant(a).coef.copy()
    for i in range(3):
        coef[i, 1, 0, 0] += W[i, 0]
        coef[i, 0, 1, 0] += W[i, 1]
        coef[i, 0, 0, 1] += W[i, 2]
    return PolyField(coef)
