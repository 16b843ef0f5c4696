"""Randomised operator identities; each function returns the worst error seen."""

import numpy as np

from . import tensor_algebra as ta
from .constitutive import MaterialParams, couple_stress
from .poly_fields import curl_vector, div_vector, grad_vector, random_field


def curl_of_grad(rng, cases=200, degree=5):
    worst = 0.0
    for _ in range(cases):
        phi = random_field(rng, (), degree)
        worst = max(worst, curl_vector(phi.grad()).max_abs_coef())
    return worst


def div_of_curl(rng, cases=200, degree=5):
    worst = 0.0
    for _ in range(cases):
        v = random_field(rng, (3,), degree)
        worst = max(worst, div_vector(curl_vector(v)).max_abs_coef())
    return worst


def skew_gradient(rng, cases=200, degree=5):
    """``skw grad u - 1/2 anti(curl u)`` coefficientwise."""
    worst = 0.0
    for _ in range(cases):
        u = random_field(rng, (3,), degree)
        lhs = grad_vector(u).pointwise(ta.skw)
        rhs = 0.5 * curl_vector(u).pointwise(ta.anti)
        worst = max(worst, (lhs - rhs).max_abs_coef())
    return worst


def anti_axl_roundtrip(rng, cases=200):
    worst = 0.0
    for _ in range(cases):
        v = rng.uniform(-1, 1, 3)
        w = rng.uniform(-1, 1, 3)
        worst = max(worst,
                    np.max(np.abs(ta.axl(ta.anti(v)) - v)),
                    np.max(np.abs(ta.anti(v) @ w - np.cross(v, w))))
    return float(worst)


def naive_double_contract(C, B):
    out = np.zeros(3)
    for i in range(3):
        for j in range(3):
            for p in range(3):
                out[i] += C[i, j, p] * B[p, j]
    return out


def contraction(rng, cases=200):
    """Relative error of the footnote contraction against a triple loop."""
    worst = 0.0
    for _ in range(cases):
        C = rng.uniform(-1, 1, (3, 3, 3))
        B = rng.uniform(-1, 1, (3, 3))
        ref = naive_double_contract(C, B)
        err = np.max(np.abs(ta.double_contract(C, B) - ref)) / max(np.max(np.abs(ref)), 1e-300)
        worst = max(worst, err)
    return float(worst)


def trace_free_couple_stress(rng, cases=50, degree=5):
    worst = 0.0
    for _ in range(cases):
        params = MaterialParams(1.0, 0.0, *rng.uniform(0.1, 2.0, 2))
        m = couple_stress(params, random_field(rng, (3,), degree))
        worst = max(worst, m.pointwise(ta.trace).max_abs_coef())
    return worst


SUITE = {
    "curl_grad": curl_of_grad,
    "div_curl": div_of_curl,
    "skw_grad_curl": skew_gradient,
    "anti_axl": anti_axl_roundtrip,
    "contraction": contraction,
}
