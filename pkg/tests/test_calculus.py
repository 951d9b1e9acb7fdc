import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import quaternions, seeds
from qspectra import calculus as sc
from qspectra import instances as inst
from qspectra.errors import InvalidArgument, NotInSpectrum, NotIsolated, OnSpectrum
from qspectra.qlinalg import QMatrix, SpectrumResult, apply_Qq, chi, s_spectrum
from qspectra.quaternion import UNIT_I, UNIT_J, UNIT_K, ImaginaryUnit, Quaternion, Sphere
from test_qlinalg import complex_matrix

I, J, K = (u.quaternion for u in (UNIT_I, UNIT_J, UNIT_K))
UNITS = [UNIT_I, UNIT_J, UNIT_K, ImaginaryUnit.from_vector([1, -2, 0.5]), ImaginaryUnit.from_vector([-0.3, 0.4, 2])]


def spectral_projector_oracle(m: np.ndarray, sphere: Sphere) -> np.ndarray:
    """Complex spectral projector onto eigenvalues re +- i rho of a complex matrix."""
    lam, v = np.linalg.eig(m)
    pts = sphere.slice_points()
    sel = np.array([min(abs(l - p) for p in pts) < 1e-6 for l in lam], float)
    return v @ np.diag(sel) @ np.linalg.inv(v)


# S-resolvent


@given(quaternions())
def test_resolvent_of_zero(q):
    if abs(q) < 1e-3:
        return
    r = sc.s_resolvent(q, QMatrix.zeros(2))
    assert r.allclose(QMatrix.identity(2) * q.inverse(), 1e-12)


def test_resolvent_real_case():
    r = sc.s_resolvent(Quaternion(3.0), QMatrix.diag([Quaternion(2.0)]))
    assert r.allclose(QMatrix.identity(1), 1e-14)


@given(seeds)
def test_resolvent_defining_products(seed):
    rng = np.random.default_rng(seed)
    a = inst.random_matrix(rng, 3)
    q = inst.random_quaternion(rng) * (3.0 + a.norm()) * (1.0 / max(1e-3, abs(inst.random_quaternion(rng))))
    shifted = a - QMatrix.identity(3) * q.conj()
    qq = apply_Qq(a, q)
    assert (qq @ sc.s_resolvent(q, a, "left") + shifted).maxabs() <= 1e-10 * max(1.0, shifted.maxabs())
    assert (sc.s_resolvent(q, a, "right") @ qq + shifted).maxabs() <= 1e-10 * max(1.0, shifted.maxabs())


@given(seeds)
def test_resolvent_complex_oracle(seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    z = complex(*rng.standard_normal(2)) * 3
    want = np.linalg.inv(z * np.eye(3) - m)
    for side in ("left", "right"):
        got = sc.s_resolvent(Quaternion.from_complex(z, UNIT_I), complex_matrix(m), side)
        np.testing.assert_allclose(got.data[..., 0] + 1j * got.data[..., 1], want, atol=1e-10)
        np.testing.assert_allclose(got.data[..., 2:], 0.0, atol=1e-12)


def test_resolvent_errors():
    with pytest.raises(OnSpectrum):
        sc.s_resolvent(J, QMatrix.diag([I]))
    with pytest.raises(InvalidArgument):
        sc.s_resolvent(Quaternion(3.0), QMatrix.diag([I]), side="up")


# contours


def spec_of(*pairs, tol=1e-8):
    return SpectrumResult(tuple((Sphere(r, h), m) for r, h, m in pairs), tol)


def test_contour_geometry_example():
    c = sc.build_contour([Sphere(0, 1)], spec_of((0, 1, 1), (3, 0, 1)), UNIT_I)
    assert sorted(ci.center.imag for ci in c.circles) == [-1.0, 1.0]
    assert all(ci.center.real == 0.0 for ci in c.circles)
    assert all(ci.radius == pytest.approx(0.9) for ci in c.circles)


def test_contour_full_target_encloses_everything():
    sp = spec_of((0, 1, 1), (3, 0, 1))
    c = sc.build_contour(sp.sphere_list, sp)
    centers = sorted((ci.center.real, ci.center.imag) for ci in c.circles)
    assert centers == [(0.0, -1.0), (0.0, 1.0), (3.0, 0.0)]


def test_not_isolated():
    with pytest.raises(NotIsolated):
        sc.build_contour([Sphere(0, 1)], spec_of((0, 1, 1), (0, 1 + 1e-9, 1)))
    with pytest.raises(NotIsolated):  # conjugate slice points of the target itself coincide
        sc.build_contour([Sphere(2, 1e-9)], spec_of((2, 1e-9, 1)))
    with pytest.raises(NotInSpectrum):
        sc.build_contour([Sphere(5, 0)], spec_of((0, 1, 1)))


def test_contour_nodes_lie_on_circles():
    c = sc.Contour(UNIT_I, (sc.Circle(1 + 2j, 0.5),), 64)
    z, w = c.nodes()
    np.testing.assert_allclose(np.abs(z - (1 + 2j)), 0.5)
    assert abs(w.sum()) < 1e-14  # closed contour
    with pytest.raises(InvalidArgument):
        sc.Contour(UNIT_I, (), 8)


# Riesz projections


@pytest.mark.parametrize("unit", UNITS)
@pytest.mark.parametrize("side", ["left", "right"])
def test_block_projector(unit, side):
    a = QMatrix.diag([I, Quaternion(1, 0, 2)])
    res = sc.riesz_projection(a, [Sphere(0, 1)], unit, side=side)
    assert res.P.allclose(QMatrix.diag([Quaternion(1.0), Quaternion(0.0)]), 1e-10)
    assert res.idempotency_residual <= 1e-8 and res.commutator_residual <= 1e-8
    assert res.rank == 1


def test_full_and_empty_contours(rng):
    ins = inst.well_separated_instance(rng)
    sp = s_spectrum(ins.A)
    assert sc.riesz_projection(ins.A, sp.sphere_list, spectrum=sp).P.allclose(QMatrix.identity(ins.A.n), 1e-8)
    assert sc.riesz_projection(ins.A, [], spectrum=sp).P.maxabs() <= 1e-10


@settings(max_examples=15)
@given(seeds, st.integers(2, 5))
def test_projector_complex_oracle(seed, n):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    a = complex_matrix(m)
    sp = s_spectrum(a)
    for s in sp.sphere_list:
        if sc.isolation_gap(sc.match_spheres([s], sp), sp) < 0.3:
            continue
        p = sc.riesz_projection(a, [s], UNIT_I, spectrum=sp).P
        want = spectral_projector_oracle(m, s)
        np.testing.assert_allclose(p.data[..., 0] + 1j * p.data[..., 1], want, atol=1e-7)


@settings(max_examples=10)
@given(seeds)
def test_projector_quality_properties(seed):
    rng = np.random.default_rng(seed)
    ins = inst.well_separated_instance(rng)
    sp = s_spectrum(ins.A)
    for s in sp.sphere_list:
        ref = sc.riesz_projection(ins.A, [s], UNIT_I, spectrum=sp)
        assert ref.idempotency_residual <= 1e-8
        assert ref.commutator_residual <= 1e-8
        for u in UNITS[1:]:
            assert (sc.riesz_projection(ins.A, [s], u, spectrum=sp).P - ref.P).maxabs() <= 1e-8
        right = sc.riesz_projection(ins.A, [s], UNIT_I, side="right", spectrum=sp).P
        assert (right - ref.P).maxabs() <= 1e-8
        coarse = sc.riesz_projection(ins.A, [s], UNIT_I, nodes=128, spectrum=sp).P
        assert (coarse - ref.P).maxabs() <= 1e-10


def test_projector_json_has_diagnostics():
    res = sc.riesz_projection(QMatrix.diag([I, Quaternion(3.0)]), [Sphere(0, 1)])
    out = res.to_json()
    assert set(out) == {"P", "diagnostics", "contour"}
    assert out["diagnostics"]["rank"] == 1


# polynomial calculus


def test_poly_examples():
    a = QMatrix.diag([I, J])
    assert sc.poly_calculus(a, [1.0]).allclose(QMatrix.identity(2), 1e-8)
    assert sc.poly_calculus(a, [0.0, 1.0]).allclose(a, 1e-8)
    got = sc.poly_calculus(QMatrix.diag([I]), [0.0, -2.0, 1.0])
    assert abs(got[0, 0] - Quaternion(-1, -2)) <= 1e-8


@settings(max_examples=20)
@given(seeds, st.lists(st.floats(-3, 3), min_size=1, max_size=4))
def test_poly_chi_oracle(seed, coeffs):
    rng = np.random.default_rng(seed)
    ins = inst.well_separated_instance(rng)
    x = chi(ins.A)
    want = sum(c * np.linalg.matrix_power(x, m) for m, c in enumerate(coeffs))
    got = chi(sc.poly_calculus(ins.A, coeffs))
    scale = max(1.0, np.abs(want).max())
    assert np.abs(got - want).max() <= 1e-8 * scale
    assert np.abs(chi(sc.poly_direct(ins.A, coeffs)) - want).max() <= 1e-10 * scale


@settings(max_examples=20)
@given(seeds, st.lists(quaternions(), min_size=1, max_size=3))
def test_poly_quaternion_coefficients(seed, coeffs):
    """sum q^m a_m with quaternion a_m: contour integral equals sum A^m a_m."""
    rng = np.random.default_rng(seed)
    ins = inst.well_separated_instance(rng)
    want = sc.poly_direct(ins.A, coeffs)
    for unit in (UNIT_I, inst.random_unit(rng)):
        got = sc.poly_calculus(ins.A, coeffs, unit)
        assert (got - want).maxabs() <= 1e-8 * max(1.0, want.maxabs())


# companion division


def test_companion_examples():
    quot, rem = sc.divide_companion(1, Quaternion(2, 1, 1))
    assert quot.coefficients == (1.0,) and rem.coefficients == ()
    quot, rem = sc.divide_companion(2, I)
    assert sc.power_companion(2, I).coefficients == (1.0, 0.0, 2.0, 0.0, 1.0)
    assert quot.coefficients == (1.0, 0.0, 1.0) and rem.coefficients == ()
    _, rem = sc.divide_companion(3, Quaternion(1, 1))
    assert rem.max_abs() <= 1e-10
    with pytest.raises(InvalidArgument):
        sc.divide_companion(0, I)


@given(quaternions(), st.integers(1, 6))
def test_companion_polydiv_oracle(s, n):
    quot, rem = sc.divide_companion(n, s)
    num = sc.power_companion(n, s).coefficients[::-1]
    q_np, r_np = np.polydiv(num, sc.companion(s).coefficients[::-1])
    scale = max(1.0, sc.power_companion(n, s).max_abs())
    assert len(quot.coefficients) == 2 * n - 1
    np.testing.assert_allclose(quot.coefficients[::-1], q_np, atol=1e-12 * scale)
    assert rem.max_abs() <= 1e-10 * scale
    assert np.abs(r_np).max() <= 1e-10 * scale


@given(quaternions(), st.integers(1, 6))
def test_companion_reconstruction(s, n):
    quot, _ = sc.divide_companion(n, s)
    full = sc.power_companion(n, s)
    prod = (quot * sc.companion(s)).coefficients
    np.testing.assert_allclose(prod, full.coefficients, atol=1e-10 * max(1.0, full.max_abs()))


@given(quaternions(nonreal=True), st.integers(1, 5))
def test_power_companion_vanishes_on_sphere(s, n):
    """P_2n has real coefficients and vanishes at s, hence on the whole sphere of s."""
    from qspectra.quaternion import slice_power

    p = sc.power_companion(n, s)
    q = Quaternion(s.w, s.y, s.z, s.x)  # same sphere, different slice
    val = Quaternion(0.0)
    for m, c in enumerate(p.coefficients):
        val = val + slice_power(q, m) * c
    assert abs(val) <= 1e-9 * max(1.0, abs(s) ** (2 * n))
    assert math.isclose(p.coefficients[0], abs(s) ** (2 * n), rel_tol=1e-12)


@settings(max_examples=10)
@given(seeds)
def test_contour_clearance(seed):
    """Circles are disjoint and keep at least g/4 from every spectral slice point."""
    rng = np.random.default_rng(seed)
    sp = s_spectrum(inst.well_separated_instance(rng).A)
    points = [p for s in sp.sphere_list for p in s.slice_points()]
    for s in sp.sphere_list:
        c = sc.build_contour([s], sp, UNIT_I)
        for ci in c.circles:
            others = [abs(ci.center - p) for p in points if p != ci.center]
            g = min(others)
            assert all(abs(abs(ci.center - p) - ci.radius) >= g / 4 - 1e-12 for p in points)
        for a, b in ((a, b) for k, a in enumerate(c.circles) for b in c.circles[k + 1 :]):
            assert abs(a.center - b.center) > a.radius + b.radius


@settings(max_examples=8)
@given(seeds, st.sampled_from([0.3, 0.6, 0.9]))
def test_projector_independent_of_radius(seed, shrink):
    rng = np.random.default_rng(seed)
    ins = inst.well_separated_instance(rng)
    sp = s_spectrum(ins.A)
    target = [sp.sphere_list[0]]
    ref = sc.riesz_projection(ins.A, target, spectrum=sp).P
    c = sc.build_contour(target, sp)
    smaller = sc.Contour(c.unit, tuple(sc.Circle(ci.center, ci.radius * shrink) for ci in c.circles), 512)
    assert (sc.contour_integral(ins.A, smaller, "left") - ref).maxabs() <= 1e-8
