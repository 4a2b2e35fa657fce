import random

import pytest

from algebroidkit.algebroid import AlgebroidSpec, construct_example, section
from algebroidkit.cartan import (
    CARTAN_IDENTITIES,
    CONNECTION_IDENTITIES,
    ConnectionForm,
    GaugeMap,
    LForm,
    bianchi_check,
    cartan_identity_suite,
    compose_gauge,
    conjugate,
    connection_identity_suite,
    covariant_d,
    curvature,
    d_L,
    gauge_transform,
    graded_bracket,
    insert,
    lie_derivative,
    mat_identity,
    random_form,
    random_gauge,
    reference_flatness_residual,
    wedge,
)
from algebroidkit.exactpoly import DimensionError, poly_parse

from conftest import gallery_algebroid


def E(i, j, m=2):
    return [[int((a, b) == (i, j)) for b in range(m)] for a in range(m)]


@pytest.fixture
def abelian2():
    return construct_example("lie_algebra", dim=2)


def test_wedge_basis(abelian2):
    e0, e1 = LForm.covector(abelian2, 0), LForm.covector(abelian2, 1)
    w = wedge(e0, e1)
    assert w == LForm.build(abelian2, 2, {(0, 1): 1})
    assert wedge(e1, e0) == -w
    assert wedge(e0 + e1, e0 + e1).is_zero()


def test_matrix_wedge_and_bracket(abelian2):
    A = LForm.build(abelian2, 1, {(0,): E(0, 1), (1,): E(1, 0)})
    diag = [[1, 0], [0, -1]]
    assert wedge(A, A) == LForm.build(abelian2, 2, {(0, 1): diag})
    assert graded_bracket(A, A) == LForm.build(abelian2, 2, {(0, 1): [[2, 0], [0, -2]]})
    assert graded_bracket(A, A) == wedge(A, A).scale(2)


def test_degree_zero_bracket_is_commutator(abelian2):
    g = LForm.function(abelian2, E(0, 1))
    t = LForm.build(abelian2, 1, {(0,): E(1, 0), (1,): E(0, 0)})
    expect = LForm.build(abelian2, 1, {(0,): [[1, 0], [0, -1]], (1,): [[0, -1], [0, 0]]})
    assert graded_bracket(g, t) == expect


def test_d_L_examples():
    T1 = construct_example("tangent", n=1)
    assert d_L(T1, LForm.function(T1, poly_parse("x0^2", 1))) == LForm.build(T1, 1, {(0,): "2*x0"})
    so3 = construct_example("lie_algebra", dim=3, brackets={(0, 1): [0, 0, 1], (1, 2): [1, 0, 0], (2, 0): [0, 1, 0]})
    assert d_L(so3, LForm.covector(so3, 0)) == LForm.build(so3, 2, {(1, 2): -1})


def test_insert_examples(abelian2):
    T1 = construct_example("tangent", n=1)
    e0, e1 = LForm.covector(abelian2, 0), LForm.covector(abelian2, 1)
    assert insert(abelian2.basis_section(0), wedge(e0, e1)) == e1
    x0 = poly_parse("x0", 1)
    assert insert(section(T1, [x0]), LForm.covector(T1, 0)) == LForm.function(T1, x0)
    assert insert(abelian2.basis_section(0), LForm.function(abelian2, 3)).degree == -1


def test_lie_derivative_examples(poisson, rng):
    f = poly_parse("x1^2 + x0", 2)
    xi = section(poisson, ["x1", "1"])
    # a(xi) = x1 * x0 d1 - x0 d0
    assert lie_derivative(poisson, xi, LForm.function(poisson, f)) == LForm.function(
        poisson, poly_parse("2*x0*x1^2 - x0", 2)
    )
    ab = construct_example("lie_algebra", dim=3)
    w = random_form(ab, 2, rng, 0)
    assert lie_derivative(ab, section(ab, [1, 2, 3]), w).is_zero()


def test_suite_passes_on_tangent_and_poisson(poisson):
    for spec in (construct_example("tangent", n=2), poisson):
        report = cartan_identity_suite(spec, trials=20, seed=3)
        assert report.all_passed, [r.name for r in report.results if not r.passed]
        assert report.summary() == f"{len(CARTAN_IDENTITIES)}/{len(CARTAN_IDENTITIES)} identities pass"


def test_suite_catches_broken_jacobi():
    spec = AlgebroidSpec(0, 3, ((), (), ()), {(0, 1): (0, 0, 1), (0, 2): (1, 0, 0)})
    report = cartan_identity_suite(spec, trials=8, seed=0)
    res = report.by_name("d_squared")
    assert not res.passed
    assert not res.residual.is_zero()
    # d_L d_L e2* is minus the Jacobiator paired with e2*
    assert not d_L(spec, d_L(spec, LForm.covector(spec, 2))).is_zero()


def test_suite_is_deterministic():
    T = construct_example("tangent", n=2)
    a = cartan_identity_suite(T, trials=5, seed=11)
    b = cartan_identity_suite(T, trials=5, seed=11)
    assert [(r.name, r.failures) for r in a.results] == [(r.name, r.failures) for r in b.results]


def test_covariant_d_with_zero_connection_is_d_L(poisson, rng):
    zero = ConnectionForm(LForm.zero(poisson, 1, (2, 2)))
    w = random_form(poisson, 1, rng, 3, (2, 1))
    assert covariant_d(poisson, zero, w, "E") == d_L(poisson, w)
    with pytest.raises(DimensionError):
        covariant_d(poisson, zero, random_form(poisson, 1, rng, 2, (3, 1)), "E")


def test_curvature_examples():
    ab = construct_example("lie_algebra", dim=2)
    A = LForm.build(ab, 1, {(0,): 3, (1,): -5})
    assert curvature(ab, A).is_zero()
    aff = construct_example("lie_algebra", dim=2, brackets={(0, 1): [1, 0]})
    A = LForm.build(aff, 1, {(0,): 3, (1,): -5})
    assert curvature(aff, A) == LForm.build(aff, 2, {(0, 1): -3})
    assert curvature(aff, LForm.zero(aff, 1)).is_zero()


def test_bianchi_random(poisson, rng):
    for spec in (construct_example("tangent", n=2), poisson):
        for _ in range(3):
            A = random_form(spec, 1, rng, 3, (2, 2))
            assert bianchi_check(spec, A).is_zero()


def test_gauge_examples(rng):
    T1 = construct_example("tangent", n=1)
    phi = GaugeMap(((poly_parse("1", 1), poly_parse("x0", 1)), (poly_parse("0", 1), poly_parse("1", 1))),
                   ((poly_parse("1", 1), poly_parse("-x0", 1)), (poly_parse("0", 1), poly_parse("1", 1))))
    moved = gauge_transform(T1, LForm.zero(T1, 1, (2, 2)), phi)
    assert moved.alpha == LForm.build(T1, 1, {(0,): E(0, 1)})
    T2 = construct_example("tangent", n=2)
    A = random_form(T2, 1, rng, 3, (2, 2))
    scal = GaugeMap(mat_identity(2, 2), mat_identity(2, 2))
    assert gauge_transform(T2, A, scal).alpha == A


def test_gauge_map_checks_inverse():
    T1 = construct_example("tangent", n=1)
    with pytest.raises(ValueError):
        GaugeMap(((poly_parse("1", 1), poly_parse("x0", 1)), (poly_parse("0", 1), poly_parse("1", 1))),
                 mat_identity(1, 2))


def test_gauge_composition_and_covariance(poisson, rng):
    for _ in range(3):
        A = random_form(poisson, 1, rng, 2, (2, 2))
        phi, psi = random_gauge(poisson, 2, rng, 2), random_gauge(poisson, 2, rng, 2)
        lhs = gauge_transform(poisson, A, compose_gauge(phi, psi)).alpha
        rhs = gauge_transform(poisson, gauge_transform(poisson, A, phi), psi).alpha
        assert lhs == rhs
        R = curvature(poisson, A)
        assert curvature(poisson, gauge_transform(poisson, A, phi)) == conjugate(R, phi)


def test_flat_connections_stay_flat_under_gauge(rng):
    T2 = construct_example("tangent", n=2)
    flat = LForm.zero(T2, 1, (2, 2))
    for _ in range(3):
        phi = random_gauge(T2, 2, rng, 2)
        assert curvature(T2, gauge_transform(T2, flat, phi)).is_zero()


def test_reference_connection_flat_on_gallery():
    for name in ("tangent2", "poisson_x0", "nijenhuis_tangent2", "aff1_action"):
        assert reference_flatness_residual(gallery_algebroid(name)).is_zero()
    bad = AlgebroidSpec(2, 2, [["1", "0"], ["0", "x0"]])
    assert not reference_flatness_residual(bad).is_zero()


def test_connection_suite_on_gallery():
    for name in ("tangent2", "aff1_action"):
        report = connection_identity_suite(gallery_algebroid(name), trials=6, seed=1, max_degree=3)
        assert report.all_passed
        assert [r.name for r in report.results] == list(CONNECTION_IDENTITIES)
