import numpy as np
import pytest
from numpy.testing import assert_allclose

from couplestress import tensor_algebra as ta
from couplestress.geometry import (
    GeometryError,
    RadialNormal,
    ScaledPositionNormal,
    integrate_edge,
    integrate_surface,
    integrate_volume,
    make_domain,
    surface_divergence,
    surface_gradient,
)
from couplestress.poly_fields import parse_scalar, random_field


def normals_integral(domain):
    return integrate_surface(domain, None, lambda x: _normals_at(domain, x))


def _normals_at(domain, x):
    for p in domain.patches.values():
        if p.points.shape == x.shape and np.array_equal(p.points, x):
            return p.normals
    raise AssertionError("unexpected node batch")


def test_unit_box_measures(unit_box):
    assert np.isclose(unit_box.area, 6.0)
    assert np.isclose(unit_box.volume, 1.0)
    assert_allclose(normals_integral(unit_box), 0, atol=1e-14)
    assert len(unit_box.edges) == 12


def test_unit_ball_measures():
    ball = make_domain("ball", 1.0, 32)
    assert abs(ball.area - 4 * np.pi) / (4 * np.pi) < 1e-10
    assert abs(ball.volume - 4 * np.pi / 3) < 1e-12
    assert_allclose(normals_integral(ball), 0, atol=1e-10)
    assert ball.edges == {}


def test_box_partition_edges():
    box = make_domain("box", 1.0, 8, dirichlet=["z0"])
    assert sorted(box.partition_edges()) == sorted(["x0|z0", "x1|z0", "y0|z0", "y1|z0"])
    assert box.neumann == ("x0", "x1", "y0", "y1", "z1")


def test_ball_cap_partition_induces_rim():
    ball = make_domain("ball", 1.0, 16, dirichlet=[f"cap:{np.pi / 3!r}"])
    assert ball.partition_edges() == ("rim",)
    assert ball.dirichlet == {"cap"}
    assert np.isclose(ball.area, 4 * np.pi)
    cap_area = 2 * np.pi * (1 - np.cos(np.pi / 3))
    assert np.isclose(ball.patch("cap").area, cap_area)


def test_order_too_low_rejected():
    with pytest.raises(GeometryError):
        make_domain("box", 1.0, 4, field_degree=3)
    with pytest.raises(GeometryError):
        make_domain("ball", 1.0, 12, field_degree=3)


@pytest.mark.parametrize("kwargs", [
    dict(kind="torus"), dict(kind="box", dirichlet=["top"]),
    dict(kind="ball", dirichlet=["z0"]), dict(kind="box", size=-1.0),
])
def test_bad_domain_requests(kwargs):
    with pytest.raises(GeometryError):
        make_domain(**{"size": 1.0, "order": 8, **kwargs})


def test_face_integral_xy(unit_box):
    assert np.isclose(integrate_surface(unit_box, "z1", lambda x: x[:, 0] * x[:, 1]), 0.25)


def test_sphere_flux_of_position(unit_ball):
    flux = integrate_surface(unit_ball, None, lambda x: np.einsum("qi,qi->q", x, x))
    assert np.isclose(flux, 4 * np.pi)


def test_sphere_integral_x_squared(unit_ball):
    # symmetry oracle: x^2 averages to r^2/3; refined rule agrees too
    fine = make_domain("ball", 1.0, 40)
    val = integrate_surface(unit_ball, None, lambda x: x[:, 0] ** 2)
    ref = integrate_surface(fine, None, lambda x: x[:, 0] ** 2)
    assert abs(val - 4 * np.pi / 3) < 1e-12
    assert abs(val - ref) < 1e-12


def test_box_edge_lengths_and_moments(unit_box):
    for e in unit_box.edges.values():
        assert np.isclose(e.length, 1.0)
    assert np.isclose(integrate_edge(unit_box, "y0|z0", lambda x: x[:, 0]), 0.5)


def test_cap_circle_circumference():
    ball = make_domain("ball", 1.0, 16, cap=np.pi / 3)
    assert np.isclose(integrate_edge(ball, "rim", lambda x: np.ones(len(x))),
                      2 * np.pi * np.sin(np.pi / 3))


def test_volume_integrals(unit_box):
    assert np.isclose(integrate_volume(unit_box, lambda x: x.prod(axis=1)), 1 / 8)
    ball = make_domain("ball", 1.0, 32)
    assert np.isclose(integrate_volume(ball, lambda x: np.ones(len(x))), 4 * np.pi / 3)
    fine = make_domain("ball", 1.0, 40)
    x2 = integrate_volume(ball, lambda x: x[:, 0] ** 2)
    r2 = integrate_volume(fine, lambda x: (x ** 2).sum(axis=1)) / 3
    assert abs(x2 - 4 * np.pi / 15) < 1e-12
    assert abs(x2 - r2) < 1e-12


def test_box_quadrature_exact_to_order(rng):
    box = make_domain("box", (1.0, 2.0, 0.5), 8)
    f = random_field(rng, (), 8)
    exact = sum(c * 1.0 ** (a + 1) / (a + 1) * 2.0 ** (b + 1) / (b + 1) * 0.5 ** (e + 1) / (e + 1)
                for (a, b, e), c in f.terms().items())
    assert np.isclose(integrate_volume(box, f), exact, rtol=1e-13)


def test_ball_patch_normals_unit(unit_ball):
    for p in unit_ball.patches.values():
        assert_allclose(np.linalg.norm(p.normals, axis=1), 1.0)
        assert np.all(p.weights > 0)


def test_surface_gradient_examples(unit_box, unit_ball):
    z1 = unit_box.patch("z1")
    x = np.array([0.3, 0.6, 1.0])
    assert_allclose(surface_gradient(lambda p, n: n @ p, z1, x), 0, atol=1e-10)
    assert_allclose(surface_gradient(parse_scalar("x"), z1, x), [1, 0, 0])
    sph = unit_ball.patch("sphere")
    y = sph.points[17]
    assert_allclose(surface_gradient(lambda p, n: np.linalg.norm(p), sph, y), 0, atol=1e-9)


def test_closed_surface_identities(unit_box, unit_ball):
    for dom in (unit_box, unit_ball):
        total = sum(np.einsum("q,qi,qj->ij", p.weights, p.points, p.normals)
                    for p in dom.patches.values())
        assert_allclose(total, dom.volume * np.eye(3), atol=1e-10)


def test_sphere_surface_divergence_theorem(rng, unit_ball):
    """On the unit sphere: int div_s(P v) = 0 and int div_s v = int 2 <v, n>."""
    sph = unit_ball.patch("sphere")
    x, n = sph.points, sph.normals
    for _ in range(5):
        v = random_field(rng, (3,), 3)
        G = v.grad()(x)
        dn = RadialNormal().gradient(x)
        P = ta.tangential_projector(n)
        vx = v(x)
        # grad(P v)_ik = P_ij v_j,k + dP_ij/dx_k v_j
        dP = -(np.einsum("qik,qj->qijk", dn, n) + np.einsum("qi,qjk->qijk", n, dn))
        grad_Pv = np.einsum("qij,qjk->qik", P, G) + np.einsum("qijk,qj->qik", dP, vx)
        assert abs(sph.weights @ surface_divergence(grad_Pv, n)) < 1e-8
        lhs = sph.weights @ surface_divergence(G, n)
        rhs = sph.weights @ (2 * np.einsum("qi,qi->q", vx, n))
        assert abs(lhs - rhs) < 1e-8


def test_flat_face_divergence_theorem(rng, unit_box):
    """int_face div_s w = sum over the face's edges of int <w, nu> ds."""
    for _ in range(3):
        v = random_field(rng, (3,), 3)
        for name, face in unit_box.patches.items():
            n = face.normals[0]
            P = ta.tangential_projector(n)
            G = v.grad()(face.points)
            lhs = face.weights @ surface_divergence(np.einsum("ij,qjk->qik", P, G), face.normals)
            rhs = 0.0
            for e in unit_box.edges.values():
                if name in (e.plus, e.minus):
                    nu = e.conormal(name, e.points)
                    rhs += e.weights @ np.einsum("qi,qi->q", v(e.points) @ P.T, nu)
            assert abs(lhs - rhs) < 1e-10


def test_edge_conormals_are_tangent_and_outward(unit_box):
    for e in unit_box.edges.values():
        for side in (e.plus, e.minus):
            face = unit_box.patch(side)
            nu = e.conormal(side, e.points)
            assert_allclose(np.einsum("qi,qi->q", nu, face.normal(e.points)), 0)
            assert_allclose(np.einsum("qi,qi->q", nu, e.tangents), 0)
            # moving inward along -nu stays on the face
            inside = e.points - 0.1 * nu
            assert np.all((inside > -1e-12) & (inside < 1 + 1e-12))


def test_alternative_normal_extension_agrees_on_surface(unit_ball):
    sph = unit_ball.patch("sphere")
    alt = sph.with_normal_field(ScaledPositionNormal(1.0))
    assert_allclose(alt.normals, sph.normals, atol=1e-14)
    P = ta.tangential_projector(sph.normals)
    g1 = np.einsum("qij,qjk->qik", RadialNormal().gradient(sph.points), P)
    g2 = np.einsum("qij,qjk->qik", ScaledPositionNormal(1.0).gradient(sph.points), P)
    assert_allclose(np.einsum("qij,qjk->qik", P, g1), np.einsum("qij,qjk->qik", P, g2), atol=1e-14)
