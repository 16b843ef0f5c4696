"""Box and ball domains with boundary patches, edges and quadrature rules.

``order`` is the polynomial degree integrated exactly: a box face or volume
integrand that is a polynomial of total degree <= ``order`` in the ambient
coordinates is integrated exactly, and the same holds on the sphere (where
the integrand is restricted to the surface).
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import tensor_algebra as ta

FACE_NAMES = ("x0", "x1", "y0", "y1", "z0", "z1")


class GeometryError(ValueError):
    """Malformed domain request or inconsistent geometry."""


# normal fields ----------------------------------------------------------
class ConstantNormal:
    """Flat face: the normal extends as a constant."""

    def __init__(self, n):
        self.n = np.asarray(n, dtype=float)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.n, x.shape).copy()

    def gradient(self, x):
        """``d n_l / d x_k`` stored as ``[..., l, k]``."""
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (3, 3))


class RadialNormal:
    """Sphere: ``n(x) = (x - c) / |x - c|``, unit everywhere off the centre."""

    def __init__(self, center=(0.0, 0.0, 0.0)):
        self.center = np.asarray(center, dtype=float)

    def value(self, x):
        d = np.asarray(x, dtype=float) - self.center
        return d / np.linalg.norm(d, axis=-1, keepdims=True)

    def gradient(self, x):
        d = np.asarray(x, dtype=float) - self.center
        r = np.linalg.norm(d, axis=-1)[..., None, None]
        n = d / r[..., 0]
        return (ta.IDENTITY - ta.outer(n, n)) / r


class ScaledPositionNormal:
    """Sphere: ``n(x) = (x - c) / R``; unit only on the surface itself.

    A second, deliberately different extension used to show that tangential
    quantities do not depend on how the normal is continued off the surface.
    """

    def __init__(self, radius, center=(0.0, 0.0, 0.0)):
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=float)

    def value(self, x):
        return (np.asarray(x, dtype=float) - self.center) / self.radius

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(ta.IDENTITY / self.radius, x.shape[:-1] + (3, 3)).copy()


# patches, edges, domains -----------------------------------------------
@dataclass(frozen=True)
class SurfacePatch:
    name: str
    param: Callable  # (s, t) -> points, over param_box
    param_box: tuple  # ((s0, s1), (t0, t1))
    normal_field: object
    points: np.ndarray
    weights: np.ndarray
    curved: bool = False

    @property
    def normals(self):
        return self.normal_field.value(self.points)

    @property
    def area(self):
        return float(self.weights.sum())

    def normal(self, x):
        return self.normal_field.value(x)

    def with_normal_field(self, normal_field):
        """Same patch and nodes, different off-surface normal extension."""
        return SurfacePatch(self.name, self.param, self.param_box, normal_field,
                            self.points, self.weights, self.curved)


@dataclass(frozen=True)
class EdgeCurve:
    """Curve shared by two patches.

    ``frame(x)`` returns ``(tangent, nu_plus, nu_minus)`` at edge points; each
    co-normal is tangent to its own patch, orthogonal to the edge and points
    out of that patch.
    """

    name: str
    plus: str
    minus: str
    points: np.ndarray
    weights: np.ndarray
    frame: Callable

    @property
    def length(self):
        return float(self.weights.sum())

    @property
    def tangents(self):
        return self.frame(self.points)[0]

    def conormal(self, side, x):
        t, nu_p, nu_m = self.frame(np.asarray(x, dtype=float))
        if side == self.plus:
            return nu_p
        if side == self.minus:
            return nu_m
        raise GeometryError(f"patch {side!r} is not adjacent to edge {self.name!r}")


@dataclass(frozen=True)
class DomainGeometry:
    kind: str
    size: tuple
    order: int
    volume_points: np.ndarray
    volume_weights: np.ndarray
    patches: dict
    edges: dict
    dirichlet: frozenset = field(default_factory=frozenset)

    @property
    def volume(self):
        return float(self.volume_weights.sum())

    @property
    def area(self):
        return sum(p.area for p in self.patches.values())

    @property
    def neumann(self):
        return tuple(n for n in self.patches if n not in self.dirichlet)

    def patch(self, name):
        try:
            return self.patches[name]
        except KeyError:
            raise GeometryError(f"no patch named {name!r}") from None

    def edge(self, name):
        try:
            return self.edges[name]
        except KeyError:
            raise GeometryError(f"no edge named {name!r}") from None

    def partition_edges(self):
        """Edges of the Dirichlet region: one side in Gamma, the other not."""
        return tuple(
            name for name, e in self.edges.items()
            if (e.plus in self.dirichlet) != (e.minus in self.dirichlet)
        )

    def check_order(self, field_degree):
        need = required_order(self.kind, field_degree)
        if self.order < need:
            raise GeometryError(
                f"quadrature order {self.order} too low for degree-{field_degree} "
                f"fields on a {self.kind} (need >= {need})"
            )


def required_order(kind, field_degree):
    """Order needed to integrate products of two degree-``field_degree`` fields.

    On the sphere the normal and projector add polynomial degree to every
    boundary integrand, hence the larger margin.
    """
    return 2 * field_degree + (2 if kind == "box" else 8)


def gauss_legendre(n, a, b):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def _gl_points(order):
    return order // 2 + 1


def make_domain(kind, size=1.0, order=8, dirichlet=(), field_degree=3, cap=None):
    """Build a box ``[0, Lx] x [0, Ly] x [0, Lz]`` or a ball centred at 0.

    ``dirichlet`` lists patch names making up Gamma: face names
    ``x0 .. z1`` for the box, ``"cap:<theta>"`` or ``"sphere"`` for the ball.
    A ball cap (from ``dirichlet`` or ``cap``) splits the sphere into patches
    ``cap`` and ``sphere`` joined by the circle edge ``rim``.
    """
    order = int(order)
    if order < 1:
        raise GeometryError("quadrature order must be positive")
    dirichlet = list(dirichlet)
    if kind == "box":
        dom = _make_box(size, order, dirichlet)
    elif kind == "ball":
        dom = _make_ball(size, order, dirichlet, cap)
    else:
        raise GeometryError(f"unknown domain kind {kind!r}")
    if field_degree is not None:
        dom.check_order(field_degree)
    return dom


def _make_box(size, order, dirichlet):
    L = np.broadcast_to(np.asarray(size, dtype=float), (3,)).copy()
    if np.any(L <= 0):
        raise GeometryError("box extents must be positive")
    n = _gl_points(order)
    rules = [gauss_legendre(n, 0.0, L[k]) for k in range(3)]
    X, Y, Z = np.meshgrid(*(r[0] for r in rules), indexing="ij")
    W = np.einsum("i,j,k->ijk", *(r[1] for r in rules))
    vpts = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)

    patches = {}
    for axis in range(3):
        a, b = [k for k in range(3) if k != axis]
        for side in (0, 1):
            name = FACE_NAMES[2 * axis + side]
            nvec = np.zeros(3)
            nvec[axis] = 1.0 if side else -1.0
            S, T = np.meshgrid(rules[a][0], rules[b][0], indexing="ij")
            wts = np.outer(rules[a][1], rules[b][1]).ravel()
            level = side * L[axis]
            param = _face_param(axis, a, b, level)
            patches[name] = SurfacePatch(
                name, param, ((0.0, L[a]), (0.0, L[b])), ConstantNormal(nvec),
                param(S.ravel(), T.ravel()), wts,
            )

    edges = {}
    for i in range(3):
        for j in range(i + 1, 3):
            k = 3 - i - j
            tk, wk = rules[k]
            for si in (0, 1):
                for sj in (0, 1):
                    fi, fj = FACE_NAMES[2 * i + si], FACE_NAMES[2 * j + sj]
                    pts = np.zeros((n, 3))
                    pts[:, i] = si * L[i]
                    pts[:, j] = sj * L[j]
                    pts[:, k] = tk
                    name = f"{fi}|{fj}"
                    frame = _box_edge_frame(i, j, k, si, sj)
                    edges[name] = EdgeCurve(name, fi, fj, pts, wk.copy(), frame)

    bad = [d for d in dirichlet if d not in patches]
    if bad:
        raise GeometryError(f"unknown box patches {bad}; use {list(FACE_NAMES)}")
    return DomainGeometry("box", tuple(L), order, vpts, W.ravel(), patches, edges,
                          frozenset(dirichlet))


def _box_edge_frame(i, j, k, si, sj):
    tang = np.zeros(3)
    tang[k] = 1.0
    # out of the face normal to e_i means along +-e_j, and vice versa
    nu_i = np.zeros(3)
    nu_i[j] = 1.0 if sj else -1.0
    nu_j = np.zeros(3)
    nu_j[i] = 1.0 if si else -1.0

    def frame(x):
        shape = np.shape(x)
        return tuple(np.broadcast_to(v, shape).copy() for v in (tang, nu_i, nu_j))
    return frame


def _face_param(axis, a, b, level):
    def param(s, t):
        s, t = np.broadcast_arrays(np.asarray(s, float), np.asarray(t, float))
        out = np.empty(s.shape + (3,))
        out[..., axis] = level
        out[..., a] = s
        out[..., b] = t
        return out
    return param


def _sphere_param(R):
    def param(c, phi):
        c, phi = np.broadcast_arrays(np.asarray(c, float), np.asarray(phi, float))
        s = np.sqrt(np.clip(1.0 - c * c, 0.0, None))
        return R * np.stack([s * np.cos(phi), s * np.sin(phi), c], axis=-1)
    return param


def _sphere_band(name, R, c0, c1, order):
    """Patch ``c0 <= cos(theta) <= c1``; dS = R^2 dc dphi."""
    nt, nphi = _gl_points(order), order + 1
    c, wc = gauss_legendre(nt, c0, c1)
    phi = 2 * np.pi * np.arange(nphi) / nphi
    C, PHI = np.meshgrid(c, phi, indexing="ij")
    wts = (np.outer(wc, np.full(nphi, 2 * np.pi / nphi)) * R * R).ravel()
    param = _sphere_param(R)
    return SurfacePatch(name, param, ((c0, c1), (0.0, 2 * np.pi)), RadialNormal(),
                        param(C.ravel(), PHI.ravel()), wts, curved=True)


def _make_ball(size, order, dirichlet, cap):
    R = float(np.asarray(size, dtype=float).ravel()[0])
    if R <= 0:
        raise GeometryError("ball radius must be positive")
    gamma = []
    for d in dirichlet:
        if d.startswith("cap:"):
            theta = float(d.split(":", 1)[1])
            if cap is not None and not np.isclose(cap, theta):
                raise GeometryError("conflicting cap angles")
            cap = theta
            gamma.append("cap")
        elif d in ("sphere", "cap"):
            gamma.append(d)
        else:
            raise GeometryError(f"unknown ball patch {d!r}; use 'cap:<theta>' or 'sphere'")

    nr, nt, nphi = (order + 2) // 2 + 1, _gl_points(order), order + 1
    r, wr = gauss_legendre(nr, 0.0, R)
    c, wc = gauss_legendre(nt, -1.0, 1.0)
    phi = 2 * np.pi * np.arange(nphi) / nphi
    Rr, C, PHI = np.meshgrid(r, c, phi, indexing="ij")
    s = np.sqrt(1.0 - C * C)
    vpts = np.stack([Rr * s * np.cos(PHI), Rr * s * np.sin(PHI), Rr * C], axis=-1).reshape(-1, 3)
    vw = np.einsum("i,j,k->ijk", wr * r * r, wc, np.full(nphi, 2 * np.pi / nphi)).ravel()

    patches, edges = {}, {}
    if cap is None:
        if "cap" in gamma:
            raise GeometryError("Dirichlet 'cap' needs a cap angle")
        patches["sphere"] = _sphere_band("sphere", R, -1.0, 1.0, order)
    else:
        if not 0.0 < cap < np.pi:
            raise GeometryError("cap angle must lie in (0, pi)")
        c0 = np.cos(cap)
        patches["cap"] = _sphere_band("cap", R, c0, 1.0, order)
        patches["sphere"] = _sphere_band("sphere", R, -1.0, c0, order)
        edges["rim"] = _rim(R, cap, order)
    return DomainGeometry("ball", (R,), order, vpts, vw, patches, edges, frozenset(gamma))


def _rim(R, theta, order):
    m = order + 1
    phi = 2 * np.pi * np.arange(m) / m
    st, ct = np.sin(theta), np.cos(theta)
    pts = R * np.stack([st * np.cos(phi), st * np.sin(phi), np.full(m, ct)], axis=1)
    wts = np.full(m, 2 * np.pi * R * st / m)

    def frame(x):
        x = np.asarray(x, dtype=float)
        ph = np.arctan2(x[..., 1], x[..., 0])
        e_phi = np.stack([-np.sin(ph), np.cos(ph), np.zeros_like(ph)], axis=-1)
        e_theta = np.stack([ct * np.cos(ph), ct * np.sin(ph), np.full_like(ph, -st)], axis=-1)
        return e_phi, e_theta, -e_theta

    return EdgeCurve("rim", "cap", "sphere", pts, wts, frame)


# integration --------------------------------------------------------------
def _resolve(names, pool, kind):
    if names is None:
        return list(pool)
    if isinstance(names, str):
        names = [names]
    missing = [n for n in names if n not in pool]
    if missing:
        raise GeometryError(f"unknown {kind} {missing}")
    return list(names)


def _reduce(values, weights):
    values = np.asarray(values, dtype=float)
    return np.tensordot(weights, values, axes=(0, 0))


def integrate_surface(domain, patches, integrand):
    """Sum of ``integral integrand(points) dS`` over the named patches.

    ``integrand`` maps a ``(q, 3)`` point batch to ``(q,)`` (or ``(q, ...)``)
    values. ``patches=None`` means the whole boundary.
    """
    total = 0.0
    for name in _resolve(patches, domain.patches, "patches"):
        p = domain.patches[name]
        total = total + _reduce(integrand(p.points), p.weights)
    return total


def integrate_edge(domain, edges, integrand):
    total = 0.0
    for name in _resolve(edges, domain.edges, "edges"):
        e = domain.edges[name]
        total = total + _reduce(integrand(e.points), e.weights)
    return total


def integrate_volume(domain, integrand):
    return _reduce(integrand(domain.volume_points), domain.volume_weights)


def surface_gradient(phi, patch, point, h=1e-5):
    """Tangential gradient ``P grad(phi_ext)`` at ``point`` on ``patch``.

    ``phi`` is either an ambient polynomial field (differentiated exactly) or
    a callable ``phi(x, n)`` of position and normal; the callable is extended
    off the surface with the patch's normal field and differentiated by
    central differences.
    """
    from .poly_fields import PolyField

    x = np.asarray(point, dtype=float)
    n = patch.normal(x)
    P = ta.tangential_projector(n)
    if isinstance(phi, PolyField):
        g = phi.grad()(x)
    else:
        g = np.empty(3)
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            xp, xm = x + e, x - e
            g[k] = (phi(xp, patch.normal(xp)) - phi(xm, patch.normal(xm))) / (2 * h)
    return P @ g


def surface_divergence(w_grad, normals):
    """``tr(P grad w)`` from the ambient gradient ``[..., i, k] = w_i,k``."""
    P = ta.tangential_projector(normals)
    return np.einsum("...ik,...ki->...", w_grad, P)
