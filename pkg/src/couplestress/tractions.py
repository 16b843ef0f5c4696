"""Boundary tractions of the couple stress model.

Two traction sets are evaluated pointwise on domain patches:

* the classical ("MT") set: force traction
  ``(sigma - 1/2 anti(Div m)) n - 1/2 n x grad<n, sym(m) n>`` and moment
  quantity ``P m n``;
* the corrected set: the same force traction plus the surface term
  ``-1/2 grad[anti(P m n) P] : P`` and the rotated moment quantity
  ``P anti(P m n) n``, together with the edge line force
  ``anti(P m n) nu`` summed over the two sides of an edge.

``P = 1 - n (x) n`` and all gradients act on ambient extensions built from the
patch's normal field; only tangential derivatives survive the contractions.
"""

import numpy as np

from . import tensor_algebra as ta
from .constitutive import couple_stress, total_force_stress
from .geometry import GeometryError
from .poly_fields import grad_matrix

MT = "MT"
CORRECTED = "corrected"


class BoundaryKinematics:
    """Normal, projector and their ambient derivatives at a batch of points."""

    def __init__(self, patch, points):
        x = np.atleast_2d(np.asarray(points, dtype=float))
        self.points = x
        self.n = patch.normal_field.value(x)
        self.dn = patch.normal_field.gradient(x)  # [q, l, k] = n_l,k
        self.P = ta.IDENTITY - ta.outer(self.n, self.n)
        # dP[q, a, b, k] = d P_ab / d x_k
        self.dP = -(np.einsum("qak,qb->qabk", self.dn, self.n)
                    + np.einsum("qa,qbk->qabk", self.n, self.dn))


class StressState:
    """Stress fields of one displacement, shared by all traction evaluators."""

    def __init__(self, params, u):
        self.params = params
        self.u = u
        self.m = couple_stress(params, u)
        self.grad_m = grad_matrix(self.m)
        self.tau = total_force_stress(params, u)

    def _fields(self, x):
        return self.tau(x), self.m(x), self.grad_m(x)

    # building blocks ----------------------------------------------------
    def surface_terms(self, patch, points):
        """Every pointwise boundary quantity on ``patch`` as a dict of arrays."""
        kin = BoundaryKinematics(patch, points)
        n, dn, P, dP = kin.n, kin.dn, kin.P, kin.dP
        tau, m, gm = self._fields(kin.points)

        mn = ta.matvec(m, n)
        w = ta.matvec(P, mn)
        phi = ta.dot(n, mn)
        grad_phi = (np.einsum("qak,qab,qb->qk", dn, m + np.swapaxes(m, 1, 2), n)
                    + np.einsum("qa,qabk,qb->qk", n, gm, n))
        sgrad_phi = ta.matvec(P, grad_phi)
        force = ta.matvec(tau, n)
        curv_term = -0.5 * np.cross(n, sgrad_phi)

        dw = (np.einsum("qabk,qb->qak", dP, mn)
              + np.einsum("qab,qbck,qc->qak", P, gm, n)
              + np.einsum("qab,qbc,qck->qak", P, m, dn))
        A = ta.anti(w)
        dA = ta.anti(np.swapaxes(dw, 1, 2))  # [q, k, i, l]
        dB = (np.einsum("qkil,qlj->qijk", dA, P)
              + np.einsum("qil,qljk->qijk", A, dP))
        missing = -0.5 * ta.double_contract(dB, P)

        return {
            "points": kin.points,
            "n": n,
            "P": P,
            "phi": phi,
            "grad_phi": grad_phi,
            "force": force,
            "curvature_term": curv_term,
            "traction_mt": force + curv_term,
            "missing_term": missing,
            "traction_corrected": force + curv_term + missing,
            "moment_mt": w,
            "moment_corrected": ta.matvec(P, ta.matvec(A, n)),
        }

    def edge_terms(self, domain, edge, points=None):
        """Per-side and summed edge line forces along ``edge``.

        ``jump`` is ``sum_s anti(P m n)_s nu_s`` with each side's own outward
        co-normal; for a smooth interface (``nu_minus = -nu_plus``) this is
        the difference ``(anti[..]^+ - anti[..]^-) nu_plus``. ``normal_jump``
        is ``sum_s <n, m n>_s n_s x nu_s``, the edge remainder of the
        ``n x grad<n, sym(m) n>`` term on a non-smooth boundary.
        """
        if isinstance(edge, str):
            edge = domain.edge(edge)
        for side in (edge.plus, edge.minus):
            if side not in domain.patches:
                raise GeometryError(f"edge {edge.name!r} references unregistered patch {side!r}")
        x = edge.points if points is None else np.atleast_2d(np.asarray(points, float))
        _, m, _ = self._fields(x)
        out = {"points": x, "sides": {}}
        jump = np.zeros_like(x)
        normal_jump = np.zeros_like(x)
        for side in (edge.plus, edge.minus):
            patch = domain.patches[side]
            n = patch.normal_field.value(x)
            P = ta.IDENTITY - ta.outer(n, n)
            nu = edge.conormal(side, x)
            mn = ta.matvec(m, n)
            w = ta.matvec(P, mn)
            val = ta.matvec(ta.anti(w), nu)
            nval = ta.dot(n, mn)[:, None] * np.cross(n, nu)
            out["sides"][side] = {"n": n, "nu": nu, "anti_w_nu": val, "normal_part": nval}
            jump += val
            normal_jump += nval
        out["jump"] = jump
        out["normal_jump"] = normal_jump
        out["line_force"] = jump + normal_jump
        return out


def _single(points, arr):
    return arr[0] if np.ndim(points) == 1 else arr


def traction_mt(params, u, patch, point):
    terms = StressState(params, u).surface_terms(patch, point)
    return _single(point, terms["traction_mt"])


def moment_mt(params, u, patch, point):
    terms = StressState(params, u).surface_terms(patch, point)
    return _single(point, terms["moment_mt"])


def missing_term(params, u, patch, point):
    terms = StressState(params, u).surface_terms(patch, point)
    return _single(point, terms["missing_term"])


def traction_corrected(params, u, patch, point):
    terms = StressState(params, u).surface_terms(patch, point)
    return _single(point, terms["traction_corrected"])


def moment_corrected(params, u, patch, point):
    terms = StressState(params, u).surface_terms(patch, point)
    return _single(point, terms["moment_corrected"])


def edge_jump(params, u, domain, edge, point=None):
    terms = StressState(params, u).edge_terms(domain, edge, point)
    return terms["jump"] if point is None else _single(point, terms["jump"])


def sample_tractions(params, u, domain, patches=None):
    """Per-node rows ``(patch, flavor, point, n, t, g)`` for CSV export."""
    state = StressState(params, u)
    rows = []
    for name in (domain.patches if patches is None else patches):
        patch = domain.patch(name)
        terms = state.surface_terms(patch, patch.points)
        for flavor, tkey, gkey in ((MT, "traction_mt", "moment_mt"),
                                   (CORRECTED, "traction_corrected", "moment_corrected")):
            for q in range(len(patch.points)):
                rows.append({
                    "patch": name,
                    "flavor": flavor,
                    "point": terms["points"][q],
                    "n": terms["n"][q],
                    "t": terms[tkey][q],
                    "g": terms[gkey][q],
                })
    return rows
