"""Independent reference computations for the test-suite.

Everything here goes through sympy (symbolic differentiation of explicit
expressions) or plain finite differences, never through the package's
einsum assembly.
"""

import numpy as np
import sympy as sp

X, Y, Z = sp.symbols("x y z")
COORDS = (X, Y, Z)


def to_sympy(field):
    """PolyField (scalar or vector) -> sympy expression / column Matrix."""
    if field.shape == ():
        return sum(c * X**a * Y**b * Z**e for (a, b, e), c in field.terms().items()) + 0
    return sp.Matrix([to_sympy(field[i]) for i in range(field.shape[0])])


def grad(v):
    return sp.Matrix(3, 3, lambda i, k: sp.diff(v[i], COORDS[k]))


def curl(v):
    return sp.Matrix([sum(sp.LeviCivita(i, j, k) * sp.diff(v[k], COORDS[j])
                          for j in range(3) for k in range(3)) for i in range(3)])


def div(A):
    return sp.Matrix([sum(sp.diff(A[i, j], COORDS[j]) for j in range(3)) for i in range(3)])


def anti(v):
    return sp.Matrix(3, 3, lambda i, j: -sum(sp.LeviCivita(i, j, k) * v[k] for k in range(3)))


def sym(A):
    return (A + A.T) / 2


def skw(A):
    return (A - A.T) / 2


def stresses(params, u):
    G = grad(u)
    sigma = 2 * params.mu * sym(G) + params.lam * G.trace() * sp.eye(3)
    K = grad(curl(u))
    m = params.alpha1 * sym(K) + params.alpha2 * skw(K)
    tau = sigma - anti(div(m)) / 2
    return sigma, m, tau


def _num(expr, point):
    sub = dict(zip(COORDS, map(float, point)))
    return np.array(sp.Matrix(expr).subs(sub).evalf(), dtype=float).reshape(np.shape(expr))


def boundary_oracle(params, u_field, n_expr, point):
    """Traction quantities at ``point`` for the normal field ``n_expr``.

    ``n_expr`` is a sympy column Matrix of expressions in x, y, z (constant on
    flat faces, ``x/|x|`` on the sphere).
    """
    u = to_sympy(u_field)
    _, m, tau = stresses(params, u)
    n = n_expr
    P = sp.eye(3) - n * n.T
    mn = m * n
    w = P * mn
    phi = (n.T * mn)[0, 0]
    grad_phi = sp.Matrix([sp.diff(phi, c) for c in COORDS])
    curv = -(n.cross(P * grad_phi)) / 2
    B = anti(w) * P
    missing = sp.Matrix([
        -sum(sp.diff(B[i, j], COORDS[k]) * P[k, j] for j in range(3) for k in range(3)) / 2
        for i in range(3)
    ])
    force = tau * n
    out = {
        "force": force,
        "traction_mt": force + curv,
        "missing_term": missing,
        "traction_corrected": force + curv + missing,
        "moment_mt": w,
        "moment_corrected": P * anti(w) * n,
    }
    return {k: _num(v, point).ravel() for k, v in out.items()}


def edge_side_oracle(params, u_field, n_const, nu_const, point):
    """``anti(P m n) nu`` for one side of a box edge."""
    u = to_sympy(u_field)
    _, m, _ = stresses(params, u)
    n = sp.Matrix(n_const)
    P = sp.eye(3) - n * n.T
    return _num(anti(P * m * n) * sp.Matrix(nu_const), point).ravel()


def central_gradient(f, x, h=1e-5):
    """Central differences of ``f: R^3 -> array`` stacked on a trailing axis."""
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * h))
    return np.stack(cols, axis=-1)
