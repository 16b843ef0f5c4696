"""Ritz (energy minimisation) solver on polynomial trial spaces.

The trial space is all vector polynomials of total degree <= ``degree``.
Essential conditions (``u`` and ``P curl u`` on the Dirichlet patches) are
collocated at boundary quadrature nodes; the resulting redundant rows are
reduced to an orthonormal set by a thresholded SVD before the saddle-point
system is factorised.
"""

from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import linalg
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import tensor_algebra as ta
from ._validation import check_degree, check_material, check_points, check_vector_field
from .constitutive import MaterialParams, manufactured_body_force
from .poly_fields import N, PolyField, curl_vector, monomials
from .tractions import StressState


class SingularSystemError(RuntimeError):
    """The constrained energy has a kernel; ``kernel_dim`` says how large."""

    def __init__(self, message, kernel_dim=0):
        super().__init__(message)
        self.kernel_dim = kernel_dim


class IndefiniteFormError(RuntimeError):
    """The assembled energy form has negative eigenvalues."""


class IllConditionedError(RuntimeError):
    pass


# basis -------------------------------------------------------------------
@dataclass(frozen=True)
class BasisSpec:
    degree: int

    @property
    def exponents(self):
        return monomials(self.degree)

    @property
    def n_scalar(self):
        return len(self.exponents)

    @property
    def size(self):
        return 3 * self.n_scalar

    def field(self, coef):
        """Vector field with coefficients ordered component-major."""
        coef = np.asarray(coef, dtype=float).reshape(3, self.n_scalar)
        arr = np.zeros((3, N, N, N))
        for m, (a, b, c) in enumerate(self.exponents):
            arr[:, a, b, c] = coef[:, m]
        return PolyField(arr)

    def coefficients(self, u):
        """Inverse of :meth:`field` for fields inside the trial space."""
        out = np.array([[u.coef[i][e] for e in self.exponents] for i in range(3)])
        if abs(u.max_abs_coef()) and u.degree > self.degree:
            raise ValueError("field is outside the trial space")
        return out.ravel()

    def jets(self, x):
        """Values, gradients and hessians of the scalar monomials at ``x``.

        Shapes ``(s, q)``, ``(s, q, 3)`` and ``(s, q, 3, 3)``.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        vals, grads, hess = [], [], []
        for a, b, c in self.exponents:
            mono = PolyField.from_terms({(a, b, c): 1.0})
            g = mono.grad()
            vals.append(mono(x))
            grads.append(g(x))
            hess.append(g.grad()(x))
        return np.array(vals), np.array(grads), np.array(hess)

    def kinematics(self, x):
        """Per basis function: value, gradient and ``grad curl`` at ``x``."""
        v, g, h = self.jets(x)
        s, q = v.shape
        vals = np.zeros((3, s, q, 3))
        G = np.zeros((3, s, q, 3, 3))
        K = np.zeros((3, s, q, 3, 3))
        for i in range(3):
            vals[i, :, :, i] = v
            G[i, :, :, i, :] = g
            # curl(s e_i)_a = eps_abi s_,b  =>  (grad curl)_ad = eps_abi s_,bd
            K[i] = np.einsum("ab,sqbd->sqad", ta.EPS[:, :, i], h)
        n = 3 * s
        return vals.reshape(n, q, 3), G.reshape(n, q, 3, 3), K.reshape(n, q, 3, 3)


# loads and constraints ------------------------------------------------------
@dataclass
class Loads:
    """External data; each callable gets ``(owner, points)`` and returns ``(q, 3)``.

    ``traction`` and ``moment`` are surface densities on Neumann patches, the
    moment being the rotated quantity ``P anti(P m n) n`` paired with
    ``1/2 P (grad du) n``. ``edge_force`` is the total line force on an edge
    (summed over its Neumann sides), paired with ``1/2 du``.
    """

    body_force: Optional[Callable] = None
    traction: Optional[Callable] = None
    moment: Optional[Callable] = None
    edge_force: Optional[Callable] = None


@dataclass
class Constraints:
    """Dirichlet data on ``patches`` plus an optional rigid-motion gauge.

    With ``gauge=True`` the mean displacement and the mean rotation over the
    volume are fixed to those of ``gauge_reference`` (zero if omitted).
    """

    patches: tuple = ()
    displacement: Optional[PolyField] = None
    gauge: bool = False
    gauge_reference: Optional[PolyField] = None


def manufactured_loads(params, u_star, domain, flavor="corrected"):
    """Loads reproducing ``u_star``: body force, tractions, moments, edges.

    ``flavor="mt"`` feeds the classical force traction (no missing
    term) and leaves the moment and edge data unchanged.
    """
    if flavor not in ("corrected", "mt"):
        raise ValueError(f"unknown traction flavor {flavor!r}")
    state = StressState(params, u_star)
    f = manufactured_body_force(params, u_star)
    tkey = "traction_corrected" if flavor == "corrected" else "traction_mt"
    neumann = set(domain.neumann)

    def traction(patch, x):
        return state.surface_terms(patch, x)[tkey]

    def moment(patch, x):
        return state.surface_terms(patch, x)["moment_corrected"]

    def edge_force(edge, x):
        terms = state.edge_terms(domain, edge, x)
        out = np.zeros_like(np.atleast_2d(x))
        for side, vals in terms["sides"].items():
            if side in neumann:
                out += vals["anti_w_nu"] + vals["normal_part"]
        return out

    return Loads(body_force=lambda x: f(x), traction=traction, moment=moment,
                 edge_force=edge_force)


# assembly ----------------------------------------------------------------------
@dataclass
class Assembled:
    params: MaterialParams
    basis: BasisSpec
    domain: object
    K: np.ndarray
    F: np.ndarray


def _material_blocks(params, G, K):
    sym_g = 0.5 * (G + np.swapaxes(G, -1, -2))
    tr = np.trace(G, axis1=-2, axis2=-1)
    sig = 2 * params.mu * sym_g + params.lam * tr[..., None, None] * ta.IDENTITY
    m = params.alpha1 * 0.5 * (K + np.swapaxes(K, -1, -2)) + params.alpha2 * 0.5 * (K - np.swapaxes(K, -1, -2))
    return sig, m


def stiffness(params, basis, domain):
    """Matrix of the internal-work bilinear form on the basis."""
    _, G, K = basis.kinematics(domain.volume_points)
    sig, m = _material_blocks(params, G, K)
    w = domain.volume_weights
    A = np.einsum("aqij,bqij,q->ab", sig, G, w) + 0.5 * np.einsum("aqij,bqij,q->ab", m, K, w)
    return 0.5 * (A + A.T)


def load_vector(basis, domain, loads):
    F = np.zeros(basis.size)
    if loads is None:
        return F
    if loads.body_force is not None:
        vals, _, _ = basis.kinematics(domain.volume_points)
        F += np.einsum("aqi,qi,q->a", vals, loads.body_force(domain.volume_points),
                       domain.volume_weights)
    for name in domain.neumann:
        patch = domain.patch(name)
        x, w = patch.points, patch.weights
        if loads.traction is None and loads.moment is None:
            break
        vals, G, _ = basis.kinematics(x)
        if loads.traction is not None:
            F += np.einsum("aqi,qi,q->a", vals, loads.traction(patch, x), w)
        if loads.moment is not None:
            n = patch.normals
            Pdn = np.einsum("qij,aqjk,qk->aqi", ta.tangential_projector(n), G, n)
            F += 0.5 * np.einsum("aqi,qi,q->a", Pdn, loads.moment(patch, x), w)
    if loads.edge_force is not None:
        neumann = set(domain.neumann)
        for edge in domain.edges.values():
            if edge.plus not in neumann and edge.minus not in neumann:
                continue
            vals, _, _ = basis.kinematics(edge.points)
            F += 0.5 * np.einsum("aqi,qi,q->a", vals, loads.edge_force(edge, edge.points),
                                 edge.weights)
    return F


def assemble(params, basis, domain, loads=None, check=True):
    """Quadratic form ``(K, F)`` of the total potential ``1/2 c.K.c - F.c``."""
    check_material(params, require_curvature=False)
    domain.check_order(basis.degree)
    K = stiffness(params, basis, domain)
    if check:
        ev = np.linalg.eigvalsh(K)
        if ev[0] < -1e-10 * max(ev[-1], 1.0):
            raise IndefiniteFormError(f"energy form is indefinite (min eigenvalue {ev[0]:.3e})")
    return Assembled(params, basis, domain, K, load_vector(basis, domain, loads))


def dirichlet_rows(basis, points, normals):
    """Per-point constraint rows: 3 for ``u`` and 3 for ``P curl u``.

    Returns ``(q, 6, size)``; the ``P curl u`` block has rank 2 per point.
    """
    vals, G, _ = basis.kinematics(points)
    P = ta.tangential_projector(normals)
    curl = np.einsum("ijk,aqkj->aqi", ta.EPS, G)
    rows = np.concatenate([vals, np.einsum("qij,aqj->aqi", P, curl)], axis=2)
    return np.transpose(rows, (1, 2, 0))


def _tangent_basis(n):
    ref = np.eye(3)[np.argmin(np.abs(n), axis=-1)]
    t1 = ref - ta.dot(ref, n)[:, None] * n
    t1 /= np.linalg.norm(t1, axis=-1, keepdims=True)
    return t1, np.cross(n, t1)


def constraint_system(basis, domain, constraints):
    """Stacked collocation rows ``C`` and targets ``d``."""
    rows, rhs = [], []
    if constraints is None:
        return np.zeros((0, basis.size)), np.zeros(0)
    u0 = constraints.displacement
    for name in constraints.patches:
        patch = domain.patch(name)
        x, n = patch.points, patch.normals
        vals, G, _ = basis.kinematics(x)
        curl = np.einsum("ijk,aqkj->aqi", ta.EPS, G)
        t1, t2 = _tangent_basis(n)
        target_u = u0(x) if u0 is not None else np.zeros_like(x)
        target_c = curl_vector(u0)(x) if u0 is not None else np.zeros_like(x)
        for k in range(3):
            rows.append(vals[:, :, k].T)
            rhs.append(target_u[:, k])
        for t in (t1, t2):
            rows.append(np.einsum("aqi,qi->qa", curl, t))
            rhs.append(ta.dot(target_c, t))
    if constraints.gauge:
        vals, G, _ = basis.kinematics(domain.volume_points)
        w = domain.volume_weights
        curl = np.einsum("ijk,aqkj->aqi", ta.EPS, G)
        ref = constraints.gauge_reference
        x = domain.volume_points
        mean_u = w @ ref(x) if ref is not None else np.zeros(3)
        mean_c = w @ curl_vector(ref)(x) if ref is not None else np.zeros(3)
        rows.append(np.einsum("aqi,q->ia", vals, w))
        rhs.append(mean_u)
        rows.append(np.einsum("aqi,q->ia", curl, w))
        rhs.append(mean_c)
    if not rows:
        return np.zeros((0, basis.size)), np.zeros(0)
    return np.vstack(rows), np.concatenate(rhs)


@dataclass
class SolveReport:
    coefficients: np.ndarray
    energy: float
    constraint_residual: float
    optimality_residual: float
    condition: float
    constraint_rank: int
    traction_errors: dict = field(default_factory=dict)

    def as_dict(self):
        out = asdict(self)
        out["coefficients"] = self.coefficients.tolist()
        return out


def solve_equilibrium(assembled, constraints=None, rank_tol=1e-10, max_cond=1e13):
    """Minimise ``1/2 c.K.c - F.c`` subject to the collocated constraints."""
    K, F = assembled.K, assembled.F
    C, d = constraint_system(assembled.basis, assembled.domain, constraints)
    n = K.shape[0]
    if C.shape[0]:
        U, s, Vt = np.linalg.svd(C, full_matrices=True)
        r = int(np.sum(s > rank_tol * s[0])) if s.size and s[0] > 0 else 0
    else:
        U, s, Vt, r = None, np.zeros(0), np.eye(n), 0
    Cr = Vt[:r]
    dr = (U[:, :r].T @ d) / s[:r] if r else np.zeros(0)
    Z = Vt[r:].T

    Kz = Z.T @ K @ Z
    ev = np.linalg.eigvalsh(Kz) if Kz.size else np.zeros(0)
    top = max(float(ev[-1]) if ev.size else 0.0, 1e-300)
    kernel = int(np.sum(ev <= 1e-10 * top))
    if kernel:
        raise SingularSystemError(
            f"constrained energy has a {kernel}-dimensional kernel; "
            "add Dirichlet patches or enable the rigid-motion gauge", kernel_dim=kernel)
    cond = float(ev[-1] / ev[0]) if ev.size else 1.0
    if cond > max_cond:
        raise IllConditionedError(f"condition estimate {cond:.3e} exceeds {max_cond:.1e}")

    kkt = np.zeros((n + r, n + r))
    kkt[:n, :n] = K
    kkt[:n, n:] = Cr.T
    kkt[n:, :n] = Cr
    sol = linalg.solve(kkt, np.concatenate([F, dr]), assume_a="sym")
    c, lam = sol[:n], sol[n:]

    grad = K @ c - F
    scale = max(np.linalg.norm(F), np.linalg.norm(K @ c), 1e-300)
    opt = float(np.linalg.norm(Z.T @ grad) / scale)
    cres = float(np.max(np.abs(C @ c - d))) if C.shape[0] else 0.0
    return SolveReport(
        coefficients=c,
        energy=float(0.5 * c @ K @ c - F @ c),
        constraint_residual=cres,
        optimality_residual=opt,
        condition=cond,
        constraint_rank=r,
    )


# estimator ------------------------------------------------------------------
class CoupleStressRitz(BaseEstimator):
    """Ritz solver for the couple stress model with an estimator interface.

    ``fit(domain, loads, constraints)`` assembles and solves;
    ``predict(X)`` evaluates the displacement at points ``X`` of shape
    ``(n, 3)``.
    """

    def __init__(self, mu=1.0, lam=0.0, alpha1=1.0, alpha2=1.0, degree=3,
                 rank_tol=1e-10, max_cond=1e13):
        self.mu = mu
        self.lam = lam
        self.alpha1 = alpha1
        self.alpha2 = alpha2
        self.degree = degree
        self.rank_tol = rank_tol
        self.max_cond = max_cond

    def material(self):
        return MaterialParams(self.mu, self.lam, self.alpha1, self.alpha2)

    def fit(self, domain, loads=None, constraints=None):
        params = check_material(self.material(), require_curvature=False)
        basis = BasisSpec(check_degree(self.degree))
        self.assembled_ = assemble(params, basis, domain, loads)
        self.report_ = solve_equilibrium(self.assembled_, constraints,
                                         self.rank_tol, self.max_cond)
        self.coef_ = self.report_.coefficients
        self.field_ = basis.field(self.coef_)
        self.domain_ = domain
        return self

    def predict(self, X):
        check_is_fitted(self, "field_")
        return self.field_(check_points(X))

    def score(self, X, y):
        """Negative root-mean-square displacement error (higher is better)."""
        y = check_points(y)
        return -float(np.sqrt(np.mean((self.predict(X) - y) ** 2)))

    def traction_roundtrip(self, u_star, flavor="corrected"):
        """Max deviation of the recovered tractions from those of ``u_star``."""
        check_is_fitted(self, "field_")
        u_star = check_vector_field(u_star, "u_star")
        params = self.material()
        mine, ref = StressState(params, self.field_), StressState(params, u_star)
        tkey = "traction_corrected" if flavor == "corrected" else "traction_mt"
        errs = {}
        for name in self.domain_.neumann:
            patch = self.domain_.patch(name)
            a = mine.surface_terms(patch, patch.points)
            b = ref.surface_terms(patch, patch.points)
            errs[name] = float(max(np.max(np.abs(a[tkey] - b[tkey])),
                                   np.max(np.abs(a["moment_corrected"] - b["moment_corrected"]))))
        self.report_.traction_errors = errs
        return errs


# patch test --------------------------------------------------------------------
@dataclass
class PatchTestResult:
    passed: bool
    max_error: float
    traction_error: float
    missing_term: float
    tol: float

    def as_dict(self):
        return asdict(self)


def linear_field(A):
    """``u(x) = A x`` as a vector field."""
    A = np.asarray(A, dtype=float)
    arr = np.zeros((3, N, N, N))
    arr[:, 1, 0, 0], arr[:, 0, 1, 0], arr[:, 0, 0, 1] = A[:, 0], A[:, 1], A[:, 2]
    return PolyField(arr)


def patch_test(params, domain, A, degree=2, tol=1e-9):
    """Constant-stress patch test: pure traction loading by ``sigma(A x) n``.

    Rigid motions are fixed by the volume gauge matched to ``A x`` so the
    comparison is direct. Also checks the recovered traction equals
    ``sigma n`` and that the missing term vanishes.
    """
    A = np.asarray(A, dtype=float)
    if not np.allclose(A, A.T, atol=1e-14):
        raise ValueError("patch test needs a symmetric A")
    u_star = linear_field(A)
    est = CoupleStressRitz(params.mu, params.lam, params.alpha1, params.alpha2, degree=degree)
    est.fit(domain, manufactured_loads(params, u_star, domain),
            Constraints(gauge=True, gauge_reference=u_star))
    x = domain.volume_points
    err = float(np.max(np.abs(est.predict(x) - u_star(x))))
    sig = 2 * params.mu * A + params.lam * np.trace(A) * np.eye(3)
    state = StressState(params, est.field_)
    t_err, miss = 0.0, 0.0
    for patch in domain.patches.values():
        terms = state.surface_terms(patch, patch.points)
        t_err = max(t_err, float(np.max(np.abs(terms["traction_corrected"]
                                               - patch.normals @ sig.T))))
        miss = max(miss, float(np.max(np.abs(terms["missing_term"]))))
    passed = err < tol and t_err < tol and miss < tol
    return PatchTestResult(passed, err, t_err, miss, tol)
