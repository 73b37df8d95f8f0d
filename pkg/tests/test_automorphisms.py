"""Automorphism tests: fixed points, round trips, differentials, corpus bodies."""
import numpy as np
import pytest

from cartanfinsler import automorphisms as am
from cartanfinsler import domains
from cartanfinsler.errors import DomainError, StructureError

ALL_SPECS = [
    domains.type_i(2, 3),
    domains.type_ii(2),
    domains.type_iii(4),
    domains.type_iv(3),
]


def fd_differential(fn, z, v, h=1e-5):
    """4-point central difference along the complex direction v."""
    return (
        8.0 * (fn(z + h * v) - fn(z - h * v)) - (fn(z + 2 * h * v) - fn(z - 2 * h * v))
    ) / (12.0 * h)


@pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
def test_normalizing_at_origin_is_identity(spec):
    phi = am.normalizing_automorphism(spec, np.zeros(spec.ambient_shape))
    z = domains.sample_point(spec, seed=0)
    np.testing.assert_allclose(am.apply(phi, z), z, atol=1e-13)


@pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
def test_normalizing_kills_base_point(spec):
    for seed in range(10):
        z0 = domains.sample_point(spec, seed=seed)
        phi = am.normalizing_automorphism(spec, z0)
        assert np.max(np.abs(am.apply(phi, z0))) <= 1e-10


def test_scalar_case_reduces_to_mobius():
    spec = domains.type_i(1, 1)
    a = 0.3 - 0.4j
    phi = am.normalizing_automorphism(spec, np.array([[a]]))
    for z in (0.1 + 0.2j, -0.5j, 0.62):
        got = am.apply(phi, np.array([[z]]))[0, 0]
        want = (z - a) / (1.0 - np.conj(a) * z)
        assert abs(abs(got) - abs(want)) < 1e-12  # equal up to unimodular factor


@pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
def test_membership_preserved(spec):
    z0 = domains.sample_point(spec, seed=1)
    phi = am.normalizing_automorphism(spec, z0)
    for seed in range(40):
        z = domains.sample_point(spec, seed=50 + seed)
        assert domains.contains(spec, am.apply(phi, z))


@pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
def test_round_trip(spec):
    z0 = domains.sample_point(spec, seed=2)
    phi = am.normalizing_automorphism(spec, z0)
    inv = am.invert(phi)
    for seed in range(10):
        z = domains.sample_point(spec, seed=80 + seed)
        back = am.apply(inv, am.apply(phi, z))
        assert np.max(np.abs(back - z)) <= 1e-9
        # and the other way around
        there = am.apply(phi, am.apply(inv, z))
        assert np.max(np.abs(there - z)) <= 1e-9


@pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
def test_differential_matches_finite_differences(spec):
    z0 = domains.sample_point(spec, seed=3)
    phi = am.normalizing_automorphism(spec, z0)
    for seed in range(5):
        z = domains.sample_point(spec, seed=120 + seed)
        v = domains.sample_tangent(spec, seed=130 + seed)
        dv = am.differential(phi, z, v)
        fdv = fd_differential(lambda x: am.apply(phi, x), z, v)
        assert np.max(np.abs(dv - fdv)) <= 1e-8


def test_differential_closed_form_at_base_point():
    # at Z = Z0 the pushforward collapses to V |-> A V (I - Z0* Z0)^{-1} D^{-1}
    spec = domains.type_i(2, 3)
    z0 = domains.sample_point(spec, seed=4)
    phi = am.normalizing_automorphism(spec, z0)
    body = phi.body
    v = domains.sample_tangent(spec, seed=5)
    want = body.a @ v @ np.linalg.inv(np.eye(3) - z0.conj().T @ z0) @ body.d_inv
    np.testing.assert_allclose(am.differential(phi, z0, v), want, atol=1e-12)


def test_differential_is_complex_linear():
    spec = domains.type_ii(3)
    phi = am.normalizing_automorphism(spec, domains.sample_point(spec, seed=6))
    z = domains.sample_point(spec, seed=7)
    v = domains.sample_tangent(spec, seed=8)
    w = domains.sample_tangent(spec, seed=9)
    lam = 0.7 - 1.1j
    lhs = am.differential(phi, z, lam * v + w)
    rhs = lam * am.differential(phi, z, v) + am.differential(phi, z, w)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


@pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
def test_chain_rule_on_compositions(spec):
    f = am.random_automorphism(spec, seed=10)
    g = am.random_automorphism(spec, seed=11)
    comp = am.compose(f, g)
    z = domains.sample_point(spec, seed=12)
    v = domains.sample_tangent(spec, seed=13)
    # composite evaluation agrees with sequential evaluation
    np.testing.assert_allclose(
        am.apply(comp, z), am.apply(f, am.apply(g, z)), atol=1e-12
    )
    dv = am.differential(comp, z, v)
    fdv = fd_differential(lambda x: am.apply(comp, x), z, v)
    assert np.max(np.abs(dv - fdv)) <= 1e-8


@pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
def test_isotropy_fixes_origin(spec):
    iso = am.isotropy_element(spec, seed=14)
    zero = np.zeros(spec.ambient_shape)
    assert np.max(np.abs(am.apply(iso, zero))) <= 1e-14
    # differential at any point is the map's own linear action
    z = domains.sample_point(spec, seed=15)
    v = domains.sample_tangent(spec, seed=16)
    np.testing.assert_allclose(
        am.differential(iso, z, v), am.apply(iso, v), atol=1e-13
    )


def test_isotropy_preserves_symmetry_classes():
    iso2 = am.isotropy_element(domains.type_ii(3), seed=17)
    w = am.apply(iso2, domains.sample_point(domains.type_ii(3), seed=18))
    np.testing.assert_allclose(w, w.T, atol=1e-13)
    iso3 = am.isotropy_element(domains.type_iii(4), seed=19)
    w = am.apply(iso3, domains.sample_point(domains.type_iii(4), seed=20))
    np.testing.assert_allclose(w, -w.T, atol=1e-13)


def test_lie_ball_isotropy_preserves_invariants():
    spec = domains.type_iv(4)
    iso = am.isotropy_element(spec, seed=21)
    z = domains.sample_point(spec, seed=22)
    w = am.apply(iso, z)
    assert np.vdot(w, w).real == pytest.approx(np.vdot(z, z).real, rel=1e-12)
    assert abs(w @ w) == pytest.approx(abs(z @ z), rel=1e-12)


def test_isotropy_round_trip():
    spec = domains.type_i(2, 3)
    iso = am.isotropy_element(spec, seed=23)
    inv = am.invert(iso)
    z = domains.sample_point(spec, seed=24)
    np.testing.assert_allclose(am.apply(inv, am.apply(iso, z)), z, atol=1e-13)


def test_newton_inverse_on_lie_ball():
    spec = domains.type_iv(5)
    z0 = domains.sample_point(spec, seed=25)
    phi = am.normalizing_automorphism(spec, z0)
    psi = am.invert(phi)
    # inverse of the inverse is the original body
    assert am.invert(psi) is phi
    for seed in range(10):
        z = domains.sample_point(spec, seed=140 + seed)
        assert np.max(np.abs(am.apply(psi, am.apply(phi, z)) - z)) <= 1e-8
    # differential of the inverse inverts the differential
    z = domains.sample_point(spec, seed=26)
    v = domains.sample_tangent(spec, seed=27)
    w = am.apply(phi, z)
    dv = am.differential(phi, z, v)
    back = am.differential(psi, w, dv)
    np.testing.assert_allclose(back, v, atol=1e-9)


def test_non_invertible_bodies_rejected():
    spec = domains.type_i(2, 2)
    const = am.HoloMap(spec, spec, am.ConstantMap(np.zeros((2, 2), dtype=complex)))
    with pytest.raises(StructureError):
        am.invert(const)
    disc = domains.type_i(1, 1)
    slice_map = am.HoloMap(disc, spec, am.ScalarSlice((0, 0), np.eye(2, dtype=complex)))
    with pytest.raises(StructureError):
        am.invert(slice_map)


def test_boundary_base_point_raises():
    # membership margin and the conditioning guard share the 1e-12 cutoff,
    # so a near-boundary base point is rejected before any inverse is formed
    spec = domains.type_i(2, 2)
    z0 = np.diag([1.0 - 1e-14, 0.1]).astype(complex)
    with pytest.raises(DomainError):
        am.normalizing_automorphism(spec, z0)


def test_corpus_bodies_evaluate():
    spec = domains.type_i(2, 2)
    disc = domains.type_i(1, 1)
    z = domains.sample_point(spec, seed=28)
    v = domains.sample_tangent(spec, seed=29)

    # scalar slice: the (0,0) entry spread onto a fixed direction
    sl = am.HoloMap(spec, spec, am.ScalarSlice((0, 0), np.eye(2, dtype=complex)))
    np.testing.assert_allclose(am.apply(sl, z), z[0, 0] * np.eye(2), atol=1e-14)
    np.testing.assert_allclose(am.differential(sl, z, v), v[0, 0] * np.eye(2), atol=1e-14)

    # disc slice j_V: 0 maps to 0 with differential V
    w1 = domains.sample_tangent(spec, seed=30)
    w1 = w1 / domains.minkowski_gauge(spec, w1)
    jv = am.HoloMap(disc, spec, am.ScalarSlice((0, 0), w1))
    np.testing.assert_allclose(am.apply(jv, np.zeros((1, 1))), np.zeros((2, 2)), atol=1e-15)
    np.testing.assert_allclose(
        am.differential(jv, np.zeros((1, 1)), np.ones((1, 1))), w1, atol=1e-14
    )

    # zero-pad embedding of a strip into the square
    strip = domains.type_i(1, 2)
    pad = am.HoloMap(strip, spec, am.PadEmbed())
    zs = domains.sample_point(strip, seed=31)
    out = am.apply(pad, zs)
    np.testing.assert_allclose(out[0], zs[0], atol=1e-15)
    np.testing.assert_allclose(out[1], 0.0, atol=1e-15)
    assert domains.contains(spec, out)

    # cubic matrix polynomial: value and differential vs finite differences
    poly = am.HoloMap(spec, spec, am.MatrixPolynomial(((1, 0.1), (3, 0.05 - 0.02j))))
    got = am.apply(poly, z)
    want = 0.1 * z + (0.05 - 0.02j) * np.linalg.matrix_power(z, 3)
    np.testing.assert_allclose(got, want, atol=1e-14)
    dv = am.differential(poly, z, v)
    fdv = fd_differential(lambda x: am.apply(poly, x), z, v)
    np.testing.assert_allclose(dv, fdv, atol=1e-9)


def test_batched_evaluation_agrees_with_loop():
    spec = domains.type_iii(4)
    phi = am.random_automorphism(spec, seed=32)
    zs = np.stack([domains.sample_point(spec, seed=200 + k) for k in range(5)])
    vs = np.stack([domains.sample_tangent(spec, seed=210 + k) for k in range(5)])
    wb = am.apply(phi, zs)
    db = am.differential(phi, zs, vs)
    for k in range(5):
        np.testing.assert_allclose(wb[k], am.apply(phi, zs[k]), atol=1e-13)
        np.testing.assert_allclose(db[k], am.differential(phi, zs[k], vs[k]), atol=1e-13)
