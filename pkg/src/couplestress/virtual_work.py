"""Virtual-power bookkeeping for the couple stress model.

For smooth ``u`` and a variation ``du`` integration by parts gives

    I(u, du) + int_Omega <Div tau, du> dV
        = int_dOmega [<tau n, du> + 1/2 <m n, curl du>] dS

with ``I = int <sigma, grad du> + 1/2 <m, grad curl du>``. The two traction
sets redistribute the right-hand side differently:

* MT form: ``int <t_MT, du> + 1/2 <P m n, P curl du>``. Exact on closed
  smooth surfaces only.
* corrected form: ``int <t_corr, du> + 1/2 <P anti(P m n) n, P (grad du) n>``
  plus ``1/2 int <line force, du> ds`` over edges. Exact on the box as well.

The 1/2 weights on the moment and edge pairings are fixed constants; see
:func:`calibrate_pairing` for the least-squares check that recovers them.
"""

from dataclasses import asdict, dataclass, field
import warnings

import numpy as np

from . import tensor_algebra as ta
from .constitutive import cauchy_stress, couple_stress, curvature, total_force_stress
from .geometry import integrate_volume, make_domain
from .poly_fields import curl_vector, div_matrix, grad_vector
from .tractions import StressState

MOMENT_PAIRING = 0.5
EDGE_PAIRING = 0.5


class SmoothBoundaryWarning(UserWarning):
    """The MT form was evaluated on a boundary with geometric edges."""


def internal_work(params, u, du, domain):
    sig = cauchy_stress(params, u)(domain.volume_points)
    m = couple_stress(params, u)(domain.volume_points)
    g = grad_vector(du)(domain.volume_points)
    k = curvature(du)(domain.volume_points)
    dens = ta.inner(sig, g) + 0.5 * ta.inner(m, k)
    return float(domain.volume_weights @ dens)


def divergence_work(params, u, du, domain):
    """``int <Div tau(u), du> dV``."""
    div_tau = div_matrix(total_force_stress(params, u))
    return float(integrate_volume(
        domain, lambda x: ta.dot(div_tau(x), du(x))))


def load_work(f, du, domain):
    return float(integrate_volume(domain, lambda x: ta.dot(f(x), du(x))))


def _neumann(domain, patches):
    return domain.neumann if patches is None else tuple(patches)


def _variation_on(du, patch):
    x = patch.points
    n = patch.normals
    P = ta.tangential_projector(n)
    G = grad_vector(du)(x)
    return {
        "du": du(x),
        "P_curl": ta.matvec(P, curl_vector(du)(x)),
        "P_normal_derivative": ta.matvec(P, ta.matvec(G, n)),
    }


def surface_parts(params, u, du, domain, patches=None, state=None):
    """Every boundary integral of both forms, keyed by name."""
    state = state or StressState(params, u)
    parts = dict.fromkeys(
        ("force", "curvature", "missing", "moment_mt", "moment_corrected",
         "edge_jump", "edge_normal", "raw"), 0.0)
    neumann = _neumann(domain, patches)
    for name in neumann:
        patch = domain.patch(name)
        t = state.surface_terms(patch, patch.points)
        v = _variation_on(du, patch)
        w = patch.weights
        parts["force"] += w @ ta.dot(t["force"], v["du"])
        parts["curvature"] += w @ ta.dot(t["curvature_term"], v["du"])
        parts["missing"] += w @ ta.dot(t["missing_term"], v["du"])
        parts["moment_mt"] += MOMENT_PAIRING * (w @ ta.dot(t["moment_mt"], v["P_curl"]))
        parts["moment_corrected"] += MOMENT_PAIRING * (
            w @ ta.dot(t["moment_corrected"], v["P_normal_derivative"]))
        m = state.m(patch.points)
        parts["raw"] += w @ (ta.dot(t["force"], v["du"]) + 0.5 * ta.dot(
            ta.matvec(m, t["n"]), curl_vector(du)(patch.points)))
    for ename, edge in domain.edges.items():
        sides = [s for s in (edge.plus, edge.minus) if s in neumann]
        if not sides:
            continue
        terms = state.edge_terms(domain, edge)
        dux = du(edge.points)
        for s in sides:
            side = terms["sides"][s]
            parts["edge_jump"] += EDGE_PAIRING * (edge.weights @ ta.dot(side["anti_w_nu"], dux))
            parts["edge_normal"] += EDGE_PAIRING * (edge.weights @ ta.dot(side["normal_part"], dux))
    return {k: float(v) for k, v in parts.items()}


def surface_work_mt(params, u, du, domain, patches=None):
    """``int [<t_MT, du> + 1/2 <P m n, P curl du>] dS`` over the Neumann part."""
    if any(not p.curved for p in domain.patches.values()):
        warnings.warn("MT surface work on a boundary with edges: edge contributions "
                      "are not part of this form", SmoothBoundaryWarning, stacklevel=2)
    p = surface_parts(params, u, du, domain, patches)
    return p["force"] + p["curvature"] + p["moment_mt"]


def surface_work_corrected(params, u, du, domain, patches=None):
    p = surface_parts(params, u, du, domain, patches)
    return _corrected(p)


def _corrected(p):
    return (p["force"] + p["curvature"] + p["missing"] + p["moment_corrected"]
            + p["edge_jump"] + p["edge_normal"])


def _mt(p):
    return p["force"] + p["curvature"] + p["moment_mt"]


def _mt_corrected_style(p):
    return p["force"] + p["curvature"] + p["moment_corrected"]


@dataclass
class BalanceReport:
    domain: str
    order: int
    internal: float
    divergence: float
    load: float
    volume: float
    surface: dict
    surface_corrected: float
    surface_mt: float
    surface_mt_corrected_style: float
    missing_work: float
    edge_work: float
    residual_corrected: float
    residual_mt: float
    discrepancy: float
    mt_reliable: bool
    quadrature_error: dict = field(default_factory=dict)

    def scale(self):
        return max(1.0, abs(self.internal))

    def as_dict(self):
        return asdict(self)


def balance_report(params, u, du, domain, f=None, patches=None, refine=0):
    """Assemble every integral of the virtual-power identity.

    ``f=None`` uses the manufactured body force ``-Div tau(u)`` so the volume
    term ``int <Div tau + f, du>`` vanishes. ``refine > 0`` repeats the
    assembly at ``order + refine`` and records the differences as quadrature
    error estimates.
    """
    I = internal_work(params, u, du, domain)
    D = divergence_work(params, u, du, domain)
    L = -D if f is None else load_work(f, du, domain)
    parts = surface_parts(params, u, du, domain, patches)
    corr, mt, mt_cs = _corrected(parts), _mt(parts), _mt_corrected_style(parts)
    lhs = I + D
    report = BalanceReport(
        domain=domain.kind,
        order=domain.order,
        internal=I,
        divergence=D,
        load=L,
        volume=D + L,
        surface=parts,
        surface_corrected=corr,
        surface_mt=mt,
        surface_mt_corrected_style=mt_cs,
        missing_work=parts["missing"],
        edge_work=parts["edge_jump"] + parts["edge_normal"],
        residual_corrected=abs(lhs - corr),
        residual_mt=abs(lhs - mt),
        discrepancy=corr - mt_cs,
        mt_reliable=all(p.curved for p in domain.patches.values()),
    )
    if refine:
        fine = make_domain(domain.kind, domain.size, domain.order + refine,
                           dirichlet=_dirichlet_spec(domain), field_degree=None,
                           cap=_cap_angle(domain))
        other = balance_report(params, u, du, fine, f=f, patches=patches)
        report.quadrature_error = {
            "internal": abs(other.internal - I),
            "surface_corrected": abs(other.surface_corrected - corr),
            "surface_mt": abs(other.surface_mt - mt),
        }
    return report


def _dirichlet_spec(domain):
    out = []
    for name in domain.dirichlet:
        if name == "cap":
            out.append(f"cap:{_cap_angle(domain)!r}")
        else:
            out.append(name)
    return out


def _cap_angle(domain):
    if "cap" not in domain.patches:
        return None
    c0 = domain.patches["cap"].param_box[0][0]
    return float(np.arccos(c0))


def calibrate_pairing(params, pairs, domain, patches=None):
    """Least-squares weights ``(moment, edge)`` closing the identity.

    Each ``(u, du)`` pair contributes the equation
    ``I + int<Div tau, du> - int<t_corr, du> = a * M + b * E`` where ``M`` and
    ``E`` are the unit-weight corrected moment and edge integrals.
    """
    rows, rhs = [], []
    for u, du in pairs:
        p = surface_parts(params, u, du, domain, patches)
        lhs = internal_work(params, u, du, domain) + divergence_work(params, u, du, domain)
        rhs.append(lhs - p["force"] - p["curvature"] - p["missing"])
        rows.append([p["moment_corrected"] / MOMENT_PAIRING,
                     (p["edge_jump"] + p["edge_normal"]) / EDGE_PAIRING])
    sol, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    return float(sol[0]), float(sol[1])


def geometric_bc_equivalence(n, grad_u):
    """Tangent-plane map between ``P (grad u) n`` and ``P curl u``.

    With ``grad u`` split into its tangential part ``grad u P`` (fixed by the
    boundary values of ``u``) and its normal derivative ``a = (grad u) n``,
    ``P curl u = L [P a] + offset``. Returns ``(L, offset, basis, invertible,
    cond)`` with ``L`` a 2x2 matrix in the tangent basis ``basis`` (rows
    ``e1, e2``). ``L`` is probed numerically rather than written down.
    """
    n = np.asarray(n, dtype=float)
    P = ta.tangential_projector(n)
    G = np.asarray(grad_u, dtype=float)
    e1 = P @ (np.eye(3)[np.argmin(np.abs(n))])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    basis = np.stack([e1, e2])
    G_tan = G @ P

    def tangential_curl(a):
        full = G_tan + np.outer(a, n)
        return basis @ (P @ ta.axl(2 * ta.skw(full)))

    offset = tangential_curl(np.zeros(3))
    L = np.column_stack([tangential_curl(e) - offset for e in basis])
    s = np.linalg.svd(L, compute_uv=False)
    invertible = bool(s[-1] > 1e-12 * max(s[0], 1e-300))
    cond = float(s[0] / s[-1]) if invertible else float("inf")
    return L, offset, basis, invertible, cond


def constraint_jet_matrix(n):
    """Rows mapping the local jet ``(u, grad u)`` to ``(u, P curl u)``.

    Columns are ``u`` (3) followed by ``grad u`` flattened row-major (9).
    """
    n = np.asarray(n, dtype=float)
    P = ta.tangential_projector(n)
    C = np.zeros((6, 12))
    C[:3, :3] = np.eye(3)
    # (curl u)_i = eps_ijk u_k,j = eps_ijk G[k, j]
    curl_rows = np.einsum("ijk->ikj", ta.EPS).reshape(3, 9)
    C[3:, 3:] = P @ curl_rows
    return C
