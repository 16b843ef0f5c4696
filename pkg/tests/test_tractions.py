import numpy as np
import pytest
import sympy as sp
from numpy.testing import assert_allclose

from couplestress import tensor_algebra as ta
from couplestress.constitutive import MaterialParams, rigid_motion
from couplestress.geometry import GeometryError, ScaledPositionNormal, make_domain
from couplestress.poly_fields import parse_vector, random_field
from couplestress.tractions import (
    StressState,
    edge_jump,
    missing_term,
    moment_corrected,
    moment_mt,
    sample_tractions,
    traction_corrected,
    traction_mt,
)
from oracles import X, Y, Z, boundary_oracle, edge_side_oracle

P1 = MaterialParams(1.0, 0.0, 1.0, 1.0)
P21 = MaterialParams(1.0, 0.0, 2.0, 1.0)
CUBIC = parse_vector("[y^3, 0, 0]")
R_SYM = sp.sqrt(X**2 + Y**2 + Z**2)
RADIAL = sp.Matrix([X / R_SYM, Y / R_SYM, Z / R_SYM])


def face_normal(patch):
    return sp.Matrix(patch.normals[0].round().astype(int).tolist())


def test_rigid_motion_has_no_tractions(unit_box):
    u = rigid_motion([1, 2, 3], [0.4, -0.1, 0.2])
    for patch in unit_box.patches.values():
        x = patch.points[:4]
        for fn in (traction_mt, traction_corrected, moment_mt, moment_corrected, missing_term):
            assert_allclose(fn(P1, u, patch, x), 0, atol=1e-14)
    for name in unit_box.edges:
        assert_allclose(edge_jump(P1, u, unit_box, name), 0, atol=1e-14)


def test_quadratic_field_on_flat_face(rng, unit_box):
    u = random_field(rng, (3,), 2)
    p = MaterialParams(1.3, 0.2, 0.8, 1.4)
    state = StressState(p, u)
    for patch in unit_box.patches.values():
        t = state.surface_terms(patch, patch.points)
        sigma_n = np.einsum("qij,qj->qi", state.tau(patch.points), patch.normals)
        assert_allclose(t["traction_mt"], sigma_n, atol=1e-13)
        assert_allclose(t["missing_term"], 0, atol=1e-13)
        assert_allclose(t["traction_corrected"], t["traction_mt"], atol=1e-13)


def test_traction_mt_cubic_against_symbolic_oracle(unit_box):
    for name in ("y0", "y1", "z1", "x0"):
        patch = unit_box.patch(name)
        for x in patch.points[::7]:
            ref = boundary_oracle(P1, CUBIC, face_normal(patch), x)
            assert_allclose(traction_mt(P1, CUBIC, patch, x), ref["traction_mt"], atol=1e-12)
    # tau_12 = 3 y^2 - 3, so the traction is (3, 0, 0) on y = 0 and vanishes on y = 1
    assert_allclose(traction_mt(P1, CUBIC, unit_box.patch("y0"), [0.5, 0.0, 0.5]), [3, 0, 0])


def test_moment_mt_examples():
    box = make_domain("box", 1.0, 8)
    z1 = box.patch("z1")
    m = np.diag([1.0, 1.0, -2.0])
    n = np.array([0, 0, 1.0])
    assert_allclose(ta.tangential_projector(n) @ m @ n, 0)
    m = np.zeros((3, 3))
    m[0, 2] = 1.0
    assert_allclose(ta.tangential_projector(n) @ m @ n, [1, 0, 0])
    # same through the field path: u with grad curl u having only entry (0, 2)
    # curl (0, 0, -x z)... choose u = (0, -x z^2 / 2, 0): curl = (x z, 0, -z^2/2)
    u = parse_vector("[0, -x*z^2/2, 0]")
    p = MaterialParams(1, 0, 1, 1)
    g = moment_mt(p, u, z1, np.array([0.5, 0.5, 1.0]))
    ref = boundary_oracle(p, u, sp.Matrix([0, 0, 1]), [0.5, 0.5, 1.0])["moment_mt"]
    assert_allclose(g, ref, atol=1e-13)


def test_missing_term_cubic_against_symbolic_oracle(unit_box):
    u = parse_vector("[x*z^2, 0, 0]")
    for name in ("x1", "z1", "y0"):
        patch = unit_box.patch(name)
        for x in patch.points[::9]:
            ref = boundary_oracle(P21, u, face_normal(patch), x)
            assert_allclose(missing_term(P21, u, patch, x), ref["missing_term"], atol=1e-12)
            assert_allclose(traction_corrected(P21, u, patch, x), ref["traction_corrected"],
                            atol=1e-12)
    assert np.abs(missing_term(P21, u, unit_box.patch("x1"), unit_box.patch("x1").points)).max() > 0.1


def test_spec_cubic_field_has_no_missing_term(unit_box):
    # P m n of u = (y^3, 0, 0) has zero tangential curl on every face
    for alphas in ((1.0, 1.0), (2.0, 1.0)):
        p = MaterialParams(1.0, 0.0, *alphas)
        for patch in unit_box.patches.values():
            assert_allclose(missing_term(p, CUBIC, patch, patch.points), 0, atol=1e-13)


def test_missing_term_is_normal_on_flat_faces(rng, unit_box):
    p = MaterialParams(1.0, 0.4, 1.7, 0.3)
    state = StressState(p, random_field(rng, (3,), 4))
    for patch in unit_box.patches.values():
        t = state.surface_terms(patch, patch.points)
        assert_allclose(np.einsum("qij,qj->qi", t["P"], t["missing_term"]), 0, atol=1e-12)


def test_sphere_terms_against_symbolic_oracle(rng, unit_ball):
    p = MaterialParams(1.2, 0.5, 1.6, 0.7)
    u = random_field(rng, (3,), 3)
    sph = unit_ball.patch("sphere")
    state = StressState(p, u)
    idx = rng.choice(len(sph.points), 4, replace=False)
    t = state.surface_terms(sph, sph.points[idx])
    for q, x in enumerate(sph.points[idx]):
        ref = boundary_oracle(p, u, RADIAL, x)
        for key in ("traction_mt", "missing_term", "moment_corrected"):
            assert_allclose(t[key][q], ref[key], atol=1e-11)


def test_corrected_is_mt_plus_missing(rng, unit_box, unit_ball):
    p = MaterialParams(1.0, 0.2, 1.3, 0.4)
    u = random_field(rng, (3,), 3)
    for dom in (unit_box, unit_ball):
        for patch in dom.patches.values():
            x = patch.points[:10]
            assert_allclose(traction_corrected(p, u, patch, x),
                            traction_mt(p, u, patch, x) + missing_term(p, u, patch, x), atol=1e-13)


def test_moment_corrected_rotation_example():
    # P m n = e1 on a face with n = e3 gives (e1 x e3) = -e2
    n = np.array([0.0, 0.0, 1.0])
    w = np.array([1.0, 0.0, 0.0])
    P = ta.tangential_projector(n)
    assert_allclose(P @ ta.anti(w) @ n, [0, -1, 0])


def test_moment_corrected_zero_for_zero_couple_stress(rng, unit_box):
    u = random_field(rng, (3,), 1)
    patch = unit_box.patch("x0")
    assert_allclose(moment_corrected(P1, u, patch, patch.points), 0)


def test_moment_rotation_invariants(rng, unit_box, unit_ball):
    p = MaterialParams(1.0, 0.0, 1.9, 0.6)
    u = random_field(rng, (3,), 4)
    state = StressState(p, u)
    for dom in (unit_box, unit_ball):
        for patch in dom.patches.values():
            x = patch.points[rng.choice(len(patch.points), 20, replace=False)]
            t = state.surface_terms(patch, x)
            g_mt, g_c, n = t["moment_mt"], t["moment_corrected"], t["n"]
            assert_allclose(g_c, np.cross(g_mt, n), atol=1e-12)
            assert_allclose(np.linalg.norm(g_c, axis=1), np.linalg.norm(g_mt, axis=1), atol=1e-12)
            assert_allclose(np.einsum("qi,qi->q", g_c, g_mt), 0, atol=1e-12)
            assert_allclose(np.einsum("qi,qi->q", g_mt, n), 0, atol=1e-12)
            assert_allclose(np.einsum("qi,qi->q", g_c, n), 0, atol=1e-12)


def test_mt_curvature_term_extension_independent(rng, unit_ball, unit_box):
    p = MaterialParams(1.0, 0.0, 1.5, 0.5)
    state = StressState(p, random_field(rng, (3,), 4))
    for dom in (unit_box, unit_ball):
        for patch in dom.patches.values():
            t = state.surface_terms(patch, patch.points)
            full = -0.5 * np.cross(t["n"], t["grad_phi"])
            assert_allclose(full, t["curvature_term"], atol=1e-12)


def test_missing_term_extension_independent_on_sphere(rng, unit_ball):
    p = MaterialParams(1.0, 0.0, 1.5, 0.5)
    state = StressState(p, random_field(rng, (3,), 3))
    sph = unit_ball.patch("sphere")
    alt = sph.with_normal_field(ScaledPositionNormal(1.0))
    a = state.surface_terms(sph, sph.points)
    b = state.surface_terms(alt, alt.points)
    for key in ("missing_term", "traction_corrected", "traction_mt", "moment_corrected"):
        assert_allclose(a[key], b[key], atol=1e-8)


def test_tractions_are_linear(rng, unit_box, unit_ball):
    p = MaterialParams(1.1, 0.3, 1.2, 0.9)
    for dom in (unit_box, unit_ball):
        u, v = random_field(rng, (3,), 3), random_field(rng, (3,), 3)
        a, b = rng.uniform(-2, 2, 2)
        for patch in dom.patches.values():
            x = patch.points[:8]
            su = StressState(p, u).surface_terms(patch, x)
            sv = StressState(p, v).surface_terms(patch, x)
            sw = StressState(p, a * u + b * v).surface_terms(patch, x)
            for key in ("traction_mt", "traction_corrected", "moment_mt", "moment_corrected",
                        "missing_term"):
                assert_allclose(sw[key], a * su[key] + b * sv[key], atol=1e-12)


def test_cap_rim_jump_vanishes(rng):
    ball = make_domain("ball", 1.0, 16, dirichlet=[f"cap:{np.pi / 3!r}"])
    p = MaterialParams(1.0, 0.0, 1.4, 0.6)
    for _ in range(3):
        terms = StressState(p, random_field(rng, (3,), 4)).edge_terms(ball, "rim")
        assert np.max(np.abs(terms["jump"])) < 1e-12
        assert np.max(np.abs(terms["normal_jump"])) < 1e-12


def test_box_edge_jump_against_per_side_oracle(unit_box):
    edge = unit_box.edge("y1|z1")
    x = edge.points
    jump = edge_jump(P1, CUBIC, unit_box, edge)
    for q in range(len(x)):
        ref = sum(edge_side_oracle(P1, CUBIC, unit_box.patch(s).normals[0],
                                   edge.conormal(s, x[q]), x[q]) for s in (edge.plus, edge.minus))
        assert_allclose(jump[q], ref, atol=1e-12)
    edge = unit_box.edge("x1|y1")
    jump = edge_jump(P1, CUBIC, unit_box, edge)
    assert np.max(np.abs(jump)) > 1.0


def test_edge_jump_rejects_unregistered_patch(unit_box):
    from dataclasses import replace

    bad = replace(unit_box.edge("y1|z1"), minus="lid")
    with pytest.raises(GeometryError):
        edge_jump(P1, CUBIC, unit_box, bad)


def test_edge_per_side_values_exposed(unit_box):
    terms = StressState(P1, CUBIC).edge_terms(unit_box, "x1|y1")
    sides = terms["sides"]
    assert set(sides) == {"x1", "y1"}
    assert_allclose(sides["x1"]["anti_w_nu"] + sides["y1"]["anti_w_nu"], terms["jump"])


def test_sample_tractions_rows(unit_box):
    rows = sample_tractions(P1, CUBIC, unit_box, ["z1"])
    assert len(rows) == 2 * len(unit_box.patch("z1").points)
    assert {r["flavor"] for r in rows} == {"MT", "corrected"}
