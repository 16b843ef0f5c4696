"""Trivariate polynomial fields with exact differentiation.

A :class:`PolyField` holds a tensor of polynomials in ``(x, y, z)``. The
coefficient array has shape ``shape + (N, N, N)`` with ``N = DEGREE_CAP + 1``;
entry ``[..., a, b, c]`` multiplies ``x**a * y**b * z**c``. Only exponents with
``a + b + c <= DEGREE_CAP`` may be nonzero.

Field literal grammar (used by the scenario config)::

    scalar  := sum of terms in x, y, z built from numbers, + - * / ( )
               and integer powers written ^ or **, e.g. "2*x^2*y - z/3"
    vector  := three scalars separated by commas, optionally in [ ]
"""

from math import comb

import numpy as np
from scipy import signal

from . import tensor_algebra as ta

DEGREE_CAP = 8
N = DEGREE_CAP + 1
PRUNE = 1e-300

_A, _B, _C = np.meshgrid(np.arange(N), np.arange(N), np.arange(N), indexing="ij")
_TOTAL = _A + _B + _C
ALLOWED = _TOTAL <= DEGREE_CAP


class DegreeError(ValueError):
    """A polynomial would exceed the degree cap."""


class PolyField:
    """Tensor-valued polynomial field; immutable once built."""

    __slots__ = ("_coef",)

    def __init__(self, coef):
        coef = np.array(coef, dtype=float)
        if coef.shape[-3:] != (N, N, N):
            raise ValueError(f"coefficient array must end in {(N, N, N)}")
        if np.any(coef[..., ~ALLOWED] != 0.0):
            raise DegreeError(f"field exceeds degree cap {DEGREE_CAP}")
        coef[np.abs(coef) < PRUNE] = 0.0
        if not np.all(np.isfinite(coef)):
            raise ValueError("non-finite coefficient")
        coef.setflags(write=False)
        self._coef = coef

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, shape=()):
        return cls(np.zeros(tuple(shape) + (N, N, N)))

    @classmethod
    def constant(cls, value):
        value = np.asarray(value, dtype=float)
        coef = np.zeros(value.shape + (N, N, N))
        coef[..., 0, 0, 0] = value
        return cls(coef)

    @classmethod
    def from_terms(cls, terms):
        """Scalar field from ``{(a, b, c): coefficient}``."""
        coef = np.zeros((N, N, N))
        for (a, b, c), v in terms.items():
            if min(a, b, c) < 0:
                raise ValueError("negative exponent")
            if a + b + c > DEGREE_CAP:
                raise DegreeError(f"monomial degree {a + b + c} > {DEGREE_CAP}")
            coef[a, b, c] += v
        return cls(coef)

    @classmethod
    def stack(cls, fields):
        """Stack same-shaped fields along a new leading axis."""
        return cls(np.stack([f.coef for f in fields]))

    @classmethod
    def coordinates(cls):
        """The identity map ``x -> x`` as a vector field."""
        coef = np.zeros((3, N, N, N))
        coef[0, 1, 0, 0] = coef[1, 0, 1, 0] = coef[2, 0, 0, 1] = 1.0
        return cls(coef)

    # basic protocol -----------------------------------------------------
    @property
    def coef(self):
        return self._coef

    @property
    def shape(self):
        return self._coef.shape[:-3]

    @property
    def degree(self):
        nz = np.any(self._coef.reshape(-1, N, N, N) != 0.0, axis=0)
        return int(_TOTAL[nz].max()) if nz.any() else 0

    def terms(self):
        """Nonzero monomials of a scalar field as ``{(a, b, c): coef}``."""
        if self.shape:
            raise ValueError("terms() is for scalar fields")
        idx = np.argwhere(self._coef != 0.0)
        return {tuple(int(i) for i in t): float(self._coef[tuple(t)]) for t in idx}

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        sub = self._coef[key]
        if sub.ndim < 3 or sub.shape[-3:] != (N, N, N):
            raise IndexError("cannot index into monomial axes")
        return PolyField(sub)

    def __repr__(self):
        return f"PolyField(shape={self.shape}, degree={self.degree})"

    def max_abs_coef(self):
        return float(np.max(np.abs(self._coef))) if self._coef.size else 0.0

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        return PolyField(self._coef + _coef_of(other, self.shape))

    __radd__ = __add__

    def __sub__(self, other):
        return PolyField(self._coef - _coef_of(other, self.shape))

    def __rsub__(self, other):
        return PolyField(_coef_of(other, self.shape) - self._coef)

    def __neg__(self):
        return PolyField(-self._coef)

    def __mul__(self, other):
        if isinstance(other, PolyField):
            return multiply(self, other)
        return PolyField(self._coef * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return PolyField(self._coef / float(other))

    # pointwise linear algebra -------------------------------------------
    def pointwise(self, func):
        """Apply a linear tensor map (batched over leading axes) coefficientwise."""
        k = len(self.shape)
        moved = np.moveaxis(self._coef, (k, k + 1, k + 2), (0, 1, 2))
        out = np.asarray(func(moved), dtype=float)
        return PolyField(np.moveaxis(out, (0, 1, 2), (-3, -2, -1)))

    # calculus -----------------------------------------------------------
    def partial(self, k):
        """Exact partial derivative with respect to coordinate ``k``."""
        ax = self._coef.ndim - 3 + k
        c = np.moveaxis(self._coef, ax, -1)
        d = np.zeros_like(c)
        d[..., :-1] = c[..., 1:] * np.arange(1, N)
        return PolyField(np.moveaxis(d, -1, ax))

    def grad(self):
        """Gradient with the new derivative index appended last."""
        return PolyField.stack([self.partial(k) for k in range(3)]).pointwise(
            lambda c: np.moveaxis(c, 3, -1)
        )

    # evaluation ---------------------------------------------------------
    def __call__(self, points):
        return evaluate(self, points)


def _coef_of(other, shape):
    if isinstance(other, PolyField):
        if other.shape != shape:
            raise ValueError(f"shape mismatch {other.shape} vs {shape}")
        return other.coef
    return PolyField.constant(np.broadcast_to(np.asarray(other, float), shape)).coef


def _power_table(t):
    return t[..., None] ** np.arange(N)


def evaluate(field, points):
    """Evaluate at one point ``(3,)`` or a batch ``(n, 3)``.

    Returns ``shape`` for a single point and ``(n,) + shape`` for a batch.
    """
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    X, Y, Z = (_power_table(pts[:, k]) for k in range(3))
    deg = field.degree + 1
    c = field.coef[..., :deg, :deg, :deg]
    out = np.einsum("...abc,pa,pb,pc->p...", c, X[:, :deg], Y[:, :deg], Z[:, :deg])
    return out[0] if single else out


def multiply(f, g):
    """Product of two fields; one must be scalar (or shapes must match)."""
    if f.shape and g.shape and f.shape != g.shape:
        raise ValueError("multiply() needs a scalar factor or equal shapes")
    if f.degree + g.degree > DEGREE_CAP:
        raise DegreeError(f"product degree {f.degree + g.degree} > {DEGREE_CAP}")
    shape = f.shape or g.shape
    df, dg = f.degree + 1, g.degree + 1
    fc = np.broadcast_to(f.coef[..., :df, :df, :df], shape + (df,) * 3).reshape(-1, df, df, df)
    gc = np.broadcast_to(g.coef[..., :dg, :dg, :dg], shape + (dg,) * 3).reshape(-1, dg, dg, dg)
    out = np.zeros((fc.shape[0], N, N, N))
    k = min(df + dg - 1, N)
    for i in range(fc.shape[0]):
        full = signal.convolve(fc[i], gc[i], method="direct")
        out[i, :k, :k, :k] = full[:k, :k, :k]
    out = np.where(ALLOWED, out, 0.0)
    return PolyField(out.reshape(shape + (N, N, N)))


def contract_fields(A, B):
    """``<A, B>`` summed over all tensor axes, as a scalar field."""
    if A.shape != B.shape:
        raise ValueError("contract_fields() needs equal shapes")
    total = PolyField.zeros()
    for idx in np.ndindex(*A.shape):
        total = total + multiply(A[idx], B[idx])
    return total


# named operators ------------------------------------------------------
def grad_vector(v):
    """``(grad v)_ik = v_i,k``."""
    _expect(v, (3,))
    return v.grad()


def curl_vector(v):
    """``(curl v)_i = eps_ijk v_k,j``."""
    _expect(v, (3,))
    return v.grad().pointwise(lambda G: np.einsum("ijk,...kj->...i", ta.EPS, G))


def div_matrix(A):
    """Row-wise divergence ``A_ij,j``."""
    _expect(A, (3, 3))
    return A.grad().pointwise(lambda T: np.einsum("...ijj->...i", T))


def grad_matrix(A):
    """Third-order gradient ``(grad A)_ijk = A_ij,k``."""
    _expect(A, (3, 3))
    return A.grad()


def div_vector(v):
    _expect(v, (3,))
    return v.grad().pointwise(ta.trace)


def _expect(f, shape):
    if f.shape != shape:
        raise ValueError(f"expected field of shape {shape}, got {f.shape}")


# random fields ---------------------------------------------------------
def monomials(degree):
    """Exponent triples with total degree <= ``degree`` in graded order."""
    return [
        (a, b, t - a - b)
        for t in range(degree + 1)
        for a in range(t, -1, -1)
        for b in range(t - a, -1, -1)
    ]


def n_monomials(degree):
    return comb(degree + 3, 3)


def random_field(rng, shape=(), degree=3):
    """Coefficients uniform in [-1, 1] on every monomial up to ``degree``."""
    if degree > DEGREE_CAP:
        raise DegreeError(f"degree {degree} > {DEGREE_CAP}")
    coef = np.zeros(tuple(shape) + (N, N, N))
    mask = _TOTAL <= degree
    coef[..., mask] = rng.uniform(-1.0, 1.0, size=tuple(shape) + (int(mask.sum()),))
    return PolyField(coef)


# literal parsing --------------------------------------------------------
def parse_scalar(text):
    """Parse a scalar field literal such as ``"2*x^2*y - z"``."""
    import sympy
    from sympy.parsing.sympy_parser import (
        convert_xor,
        parse_expr,
        standard_transformations,
    )

    x, y, z = sympy.symbols("x y z")
    try:
        expr = parse_expr(
            str(text),
            local_dict={"x": x, "y": y, "z": z},
            global_dict={"Integer": sympy.Integer, "Float": sympy.Float,
                         "Rational": sympy.Rational, "Symbol": sympy.Symbol},
            transformations=standard_transformations + (convert_xor,),
        )
    except Exception as exc:  # sympy raises a zoo of types here
        raise ValueError(f"cannot parse field literal {text!r}: {exc}") from exc
    expr = sympy.sympify(expr)
    extra = expr.free_symbols - {x, y, z}
    if extra:
        raise ValueError(f"unknown symbols {sorted(map(str, extra))} in {text!r}")
    try:
        poly = sympy.Poly(expr, x, y, z)
    except sympy.PolynomialError as exc:
        raise ValueError(f"{text!r} is not a polynomial") from exc
    return PolyField.from_terms({m: float(c) for m, c in poly.terms()})


def parse_vector(text):
    """Parse ``"[y^3, 0, 0]"`` (brackets optional) into a vector field."""
    body = str(text).strip()
    if body.startswith("[") and body.endswith("]"):
        body = body[1:-1]
    parts = _split_top_level(body)
    if len(parts) != 3:
        raise ValueError(f"vector literal needs 3 components, got {len(parts)}")
    return PolyField.stack([parse_scalar(p) for p in parts])


def _split_top_level(body):
    parts, depth, cur = [], 0, []
    for ch in body:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts]
