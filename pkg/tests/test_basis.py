import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sixwire import basis, fields
from sixwire import constants as k
from sixwire.basis import DRIVEN, PotentialBasis, SolveError

coef = st.floats(-1e7, 1e7)


def test_fit_recovers_exact_quadratic(rng):
    a = rng.normal(size=3) * 1e6
    b = rng.normal(size=3) * 1e2
    c = rng.normal(size=3) * 1e5
    d = basis._sample_grid(np.zeros(3), 15e-6, 9)[0]
    x, y, z = d.T
    phi = 0.3 + a @ (d**2).T + b @ d.T + c[0] * x * y + c[1] * x * z + c[2] * y * z
    fit = basis.fit_samples(d, phi)
    np.testing.assert_allclose(fit.alpha, a, rtol=1e-10)
    np.testing.assert_allclose(fit.beta, b, rtol=1e-10)
    np.testing.assert_allclose(fit.cross, c, rtol=1e-10)


def test_degenerate_grid_rejected():
    d = np.zeros((50, 3))
    d[:, 0] = np.linspace(-1, 1, 50)
    with pytest.raises(SolveError):
        basis.fit_samples(d, d[:, 0] ** 2)


def test_alpha_matches_half_hessian(layout, null):
    for name in DRIVEN:
        fit = basis.fit_quadratic(layout[name], null)
        H = fields.unit_hessian(layout[name], null)
        scale = np.abs(np.diag(H)).max() / 2
        np.testing.assert_allclose(fit.alpha, np.diag(H) / 2, atol=1e-3 * scale)
        np.testing.assert_allclose(fit.beta, fields.unit_gradient(layout[name], null),
                                   atol=1e-3 * np.abs(fields.unit_gradient(layout[name], null)).max())


def test_laplace_closure_per_electrode(layout, null):
    for name in DRIVEN:
        assert basis.fit_quadratic(layout[name], null).laplacian_residual() < 1e-4


def test_mirror_pair_cancels_beta_x(layout, null):
    fits = basis.electrode_bases(layout, null)
    for a, b in (("V1", "V2"), ("V3", "V4"), ("V5", "V6")):
        s = fits[a] + fits[b]
        assert abs(s.beta[0]) < 1e-6 * abs(fits[a].beta[0])


@given(st.tuples(coef, coef, coef), st.tuples(coef, coef, coef), st.tuples(coef, coef, coef))
@settings(max_examples=50, deadline=None)
def test_frame_change_is_involution(a, b, c):
    p = PotentialBasis(a, b, "cardinal", c)
    back = p.to_frame("rotated45").to_frame("cardinal")
    np.testing.assert_allclose(back.alpha, p.alpha, atol=1e-6)
    np.testing.assert_allclose(back.beta, p.beta, atol=1e-6)
    np.testing.assert_allclose(back.cross, p.cross, atol=1e-6)
    # the Laplacian is frame independent
    assert sum(p.to_frame("rotated45").alpha) == pytest.approx(sum(p.alpha), abs=1e-3)


def test_endcap_target_is_laplace_consistent():
    t = basis.TARGETS["endcap"]
    assert t.alpha[0] == t.alpha[1]
    assert abs(sum(t.alpha)) <= 1e-9 * abs(t.alpha[2])


def test_zero_target_gives_zero_voltages(layout, null):
    vs = basis.solve_voltages(PotentialBasis((0, 0, 0), (0, 0, 0)), basis.electrode_bases(layout, null), "endcap")
    assert np.abs(vs.volts).max() == 0


@pytest.mark.parametrize("label", ["endcap", "tilt", "xcomp", "ycomp"])
def test_round_trip_through_field_model(layout, null, sets, label):
    """Re-fit the potential produced by the solved voltages and compare with the target."""
    vs = sets[label]
    cond = fields.Conductors.from_layout(layout, vs.as_dict())
    target = basis.TARGETS[label]
    got = basis.fit_quadratic(cond, null).to_frame(target.frame)
    np.testing.assert_allclose(got.beta, target.beta, atol=1e-3)
    amax = max(np.abs(target.alpha).max(), 1.0)
    if np.abs(target.alpha).max() > 0:
        np.testing.assert_allclose(got.alpha, target.alpha, atol=1e-3 * amax)
    else:
        # pure field bases: curvature is not constrained, but the field is exact
        assert vs.residual < 1e-3


def test_symmetry_signatures(sets):
    e, x, y, t = (sets[n] for n in ("endcap", "xcomp", "ycomp", "tilt"))
    assert e["V1"] == e["V2"] and e["V3"] == e["V4"] and e["V5"] == e["V6"]
    assert y["V1"] == y["V2"] and y["V3"] == y["V4"] and y["V5"] == y["V6"]
    assert x["V1"] == 0 and x["V2"] == 0 and x["V4"] == -x["V3"] and x["V6"] == -x["V5"]
    # the tilt class only ties V3 = V5 and V4 = V6; antisymmetry emerges from the geometry
    assert t["V3"] == t["V5"] and t["V4"] == t["V6"]
    for a, b in (("V1", "V2"), ("V3", "V4")):
        assert t[b] == pytest.approx(-t[a], rel=1e-9)


def test_unreachable_target_raises(layout, null):
    fits = basis.electrode_bases(layout, null)
    # a pure z field cannot be produced by a z-symmetric layout
    with pytest.raises(SolveError):
        basis.solve_voltages(PotentialBasis((0, 0, 0), (0, 0, 1)), fits, "custom")


# ---------------------------------------------------------------- modes


def test_axial_frequency_closed_form():
    assert basis.axial_frequency(2.05e6) == pytest.approx(500.7e3, rel=1e-3)


def test_untilted_modes(fitted_op):
    m = basis.analyze_modes(fitted_op)
    assert m.stable
    assert m.tilt_angle_deg < 1.0
    assert m.f_radial[1] - m.f_radial[0] < 1e-3 * m.f_radial[0]
    np.testing.assert_allclose(m.mode_axes @ m.mode_axes.T, np.eye(3), atol=1e-12)
    assert m.f_axial == pytest.approx(basis.axial_frequency(2.05e6), rel=1e-2)


def test_tilt_monotone_and_sum_rule(fitted_op, sets):
    rows = basis.tilt_table(fitted_op, sets, factors=(0, 0.125, 0.25, 0.5, 1, 2, 4))
    theta = [r[3] for r in rows]
    assert all(b >= a - 1e-9 for a, b in zip(theta, theta[1:]))
    assert all(0 <= t <= 45 for t in theta)
    s = np.array([r[1] ** 2 + r[2] ** 2 for r in rows])
    assert np.ptp(s) / s.mean() < 5e-3
    for _, lo, hi, _ in rows:
        assert lo <= hi


def test_ideal_quadrupole_splitting():
    f0, ft = 3.135e6, np.sqrt(2 * k.e * 1.0e7 / k.M_CA40) / (2 * np.pi)
    assert ft == pytest.approx(1.106e6, rel=2e-3)
    assert np.sqrt(f0**2 + ft**2) == pytest.approx(3.32e6, rel=2e-3)
    assert np.sqrt(f0**2 - ft**2) == pytest.approx(2.93e6, rel=2e-3)


def test_model_splitting_matches_quadrupole_algebra(fitted_op, sets):
    """f_high^2 - f_low^2 = 4 t Q alpha' / (m (2 pi)^2) for the traceless tilt."""
    for t in (0.5, 1.0, 2.0):
        m = basis.analyze_modes(fitted_op.replace(dc_voltages=basis.dc_voltages(sets, 1.0, t)))
        lo, hi = m.f_radial
        expect = 4 * t * k.e * 1.0e7 / (k.M_CA40 * (2 * np.pi) ** 2)
        assert hi**2 - lo**2 == pytest.approx(expect, rel=0.02)


def test_unstable_configuration_reported(op175, sets):
    op = op175.replace(V_rf=20.0, dc_voltages=basis.dc_voltages(sets, 1.0, 0.0))
    assert not basis.analyze_modes(op).stable


def test_infer_rf_round_trip(op175):
    f = np.mean(basis.analyze_modes(op175).f_radial)
    start = op175.replace(V_rf=150.0)
    assert basis.infer_rf_amplitude(f, start) == pytest.approx(175.0, rel=1e-3)
    assert basis.infer_rf_amplitude(2 * f, start) == pytest.approx(350.0, rel=1e-3)


# ---------------------------------------------------------------- micromotion


def test_micromotion_example(op175):
    r = basis.micromotion(op175, 100.0, 2 * np.pi * 3.1e6)
    assert r.x_d == pytest.approx(0.636e-6, rel=2e-3)
    assert r.x_mu == pytest.approx(0.108e-6, rel=5e-3)
    z = basis.micromotion(op175, 0.0, 2 * np.pi * 3.1e6)
    assert (z.x_d, z.x_mu, z.v0) == (0.0, 0.0, 0.0)


@given(st.floats(-1e4, 1e4), st.floats(1e5, 1e7))
@settings(max_examples=100, deadline=None)
def test_micromotion_identities(op175, E, f):
    w = 2 * np.pi * f
    r = basis.micromotion(op175, E, w)
    assert r.x_mu == pytest.approx(np.sqrt(2) * w / op175.Omega_rf * r.x_d, rel=1e-14, abs=1e-300)
    assert r.v0 == pytest.approx(r.x_mu * op175.Omega_rf, rel=1e-14, abs=1e-300)


def test_micromotion_rejects_bad_frequency(op175):
    with pytest.raises(ValueError):
        basis.micromotion(op175, 1.0, 0.0)
