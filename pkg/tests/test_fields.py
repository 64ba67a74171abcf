import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sixwire import fields
from sixwire.fields import FieldDomainError, OperatingPoint
from sixwire.geometry import LayoutError

from oracles import central_gradient, greens_potential, random_rect_point, richardson_gradient

um = 1e-6

rect_st = st.tuples(
    st.floats(-300, 300), st.floats(5, 400), st.floats(-300, 300), st.floats(5, 400)
).map(lambda t: (t[0] * um, (t[0] + t[1]) * um, t[2] * um, (t[2] + t[3]) * um))
point_st = st.tuples(st.floats(-500, 500), st.floats(20, 500), st.floats(-500, 500)).map(lambda t: np.array(t) * um)


def test_potential_matches_quadrature(rng):
    for _ in range(30):
        rect, p = random_rect_point(rng)
        assert fields.unit_potential([rect], p) == pytest.approx(greens_potential(rect, p), abs=1e-9)


@given(rect_st, point_st)
@settings(max_examples=60, deadline=None)
def test_potential_bounded(rect, p):
    v = fields.unit_potential([rect], p)
    assert -1e-15 <= v <= 1 + 1e-15


@given(rect_st, point_st, st.floats(0.1, 0.9))
@settings(max_examples=60, deadline=None)
def test_additive_under_splitting(rect, p, frac):
    x1, x2, z1, z2 = rect
    xm = x1 + frac * (x2 - x1)
    whole = fields.unit_potential([rect], p)
    parts = fields.unit_potential([(x1, xm, z1, z2)], p) + fields.unit_potential([(xm, x2, z1, z2)], p)
    assert parts == pytest.approx(whole, abs=1e-13)


def test_partition_of_unity():
    # four quadrant electrodes covering a huge square see the plane as all at 1 V
    L = 1.0
    quads = [(-L, 0, -L, 0), (0, L, -L, 0), (-L, 0, 0, L), (0, L, 0, L)]
    p = np.array([13e-6, 150e-6, -7e-6])
    total = sum(fields.unit_potential([q], p) for q in quads)
    assert total == pytest.approx(1.0, abs=1e-3)
    # the uncovered far plane subtends y / (2 pi) * 4 sqrt2 / L
    assert total == pytest.approx(1 - 150e-6 / (2 * np.pi) * 4 * np.sqrt(2) / L, abs=1e-8)


@given(rect_st, point_st, st.floats(0.2, 5.0))
@settings(max_examples=40, deadline=None)
def test_scale_covariance(rect, p, k):
    r2 = tuple(k * v for v in rect)
    assert fields.unit_potential([r2], k * p) == pytest.approx(fields.unit_potential([rect], p), abs=1e-12)
    g1 = fields.unit_gradient([rect], p)
    g2 = fields.unit_gradient([r2], k * p)
    np.testing.assert_allclose(g2 * k, g1, atol=1e-9 * np.abs(g1).max() + 1e-300)


@given(rect_st, point_st)
@settings(max_examples=60, deadline=None)
def test_gradient_matches_finite_difference(rect, p):
    h = 1e-3 * p[1]
    g = fields.unit_gradient([rect], p)
    fd = richardson_gradient(lambda q: fields.unit_potential([rect], q), p, h)
    scale = np.abs(g).max()
    np.testing.assert_allclose(g, fd, atol=1e-6 * scale)


@given(rect_st, point_st)
@settings(max_examples=60, deadline=None)
def test_hessian_matches_finite_difference_and_is_traceless(rect, p):
    h = 1e-3 * p[1]
    H = fields.unit_hessian([rect], p)
    fd = np.array([richardson_gradient(lambda q: fields.unit_gradient([rect], q)[i], p, h) for i in range(3)])
    scale = np.abs(H).max()
    np.testing.assert_allclose(H, fd, atol=1e-6 * scale)
    np.testing.assert_allclose(H, H.T, atol=1e-12 * scale)
    assert abs(np.trace(H)) < 1e-9 * scale


def test_far_field_dipole_limit():
    a = 1e-6
    rect = (-a / 2, a / 2, -a / 2, a / 2)
    p = np.array([30e-6, 400e-6, -20e-6])
    r = np.linalg.norm(p)
    assert fields.unit_potential([rect], p) == pytest.approx(a * a * p[1] / (2 * np.pi * r**3), rel=1e-4)


def test_mirror_pair_has_no_x_gradient_on_axis(layout):
    cond = fields.Conductors.from_layout(layout, {"V3": 1.0, "V4": 1.0})
    p = np.array([[0.0, y, z] for y in (80e-6, 150e-6, 300e-6) for z in (-50e-6, 0.0, 70e-6)])
    g = cond.gradient(p)
    assert np.abs(g[:, 0]).max() < 1e-9 * np.abs(g).max()


def test_compiled_gradient_matches_numpy(layout, rng):
    cond = fields.Conductors.from_layout(layout, {n: rng.normal() for n in layout.names})
    p = np.column_stack([rng.uniform(-300, 300, 50), rng.uniform(20, 400, 50), rng.uniform(-300, 300, 50)]) * um
    ref = fields._corner_terms(cond.rects, cond.volts, p, 1)
    np.testing.assert_allclose(cond.gradient(p), ref, rtol=1e-12, atol=1e-12 * np.abs(ref).max())


def test_domain_checks():
    with pytest.raises(FieldDomainError):
        fields.unit_potential([(0, 1e-6, 0, 1e-6)], [0, 0, 0])
    with pytest.raises(FieldDomainError):
        fields.unit_gradient([(0, 1e-6, 0, 1e-6)], [0, -1e-6, 0])
    with pytest.raises(ValueError):
        fields.unit_potential([(0, 1e-6, 0, 1e-6)], [0, 1e-6])


def test_operating_point_validation(layout):
    with pytest.raises(LayoutError):
        OperatingPoint(layout, dc_voltages={"nope": 1.0})
    with pytest.raises(ValueError):
        OperatingPoint(layout, Omega_rf=0.0)


def test_rf_null_is_field_free(op175, null):
    assert np.linalg.norm(op175.rf.gradient(null)) < 1e-9
    assert null[1] == pytest.approx(150e-6, rel=1e-6)


def test_pseudopotential_derivatives(op175, null):
    p = null + np.array([3e-6, -4e-6, 2e-6])
    h = 1e-8
    g = fields.pseudopotential_gradient(op175, p)
    fd = richardson_gradient(lambda q: fields.pseudopotential(op175, q), p, h)
    np.testing.assert_allclose(g, fd, rtol=1e-5, atol=1e-6 * np.abs(g).max())
    H = fields.pseudopotential_hessian(op175, p)
    fdH = np.array([central_gradient(lambda q: fields.pseudopotential_gradient(op175, q)[i], p, h) for i in range(3)])
    np.testing.assert_allclose(H, fdH, rtol=1e-4, atol=1e-4 * np.abs(H).max())


def test_pseudopotential_scales_with_v_squared(op175, null):
    p = null + np.array([5e-6, 5e-6, 0])
    a = fields.pseudopotential(op175, p)
    b = fields.pseudopotential(op175.replace(V_rf=2 * op175.V_rf), p)
    assert b == pytest.approx(4 * a, rel=1e-12)


def test_trap_depth_scaling_and_magnitude(op175):
    d = fields.trap_depth(op175)
    assert d == pytest.approx(0.25 * fields.trap_depth(op175.replace(V_rf=350.0)), rel=1e-6)
    assert 0.05 < d / 1.602176634e-19 < 0.2
