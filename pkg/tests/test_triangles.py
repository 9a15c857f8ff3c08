"""Triangles, their normal-form charts, and the conversion pair.

The chart conversion is validated three ways: the forward map is pinned
to its case formulas entry by entry, the composite is the identity at
1e-9 over six dimension pairs, and both directions intertwine the gauge
action exactly.
"""

import numpy as np
import pytest

from bowlab.triangles import (
    ConditionReport,
    NotATriangle,
    RectForm,
    RectTangent,
    SingularU,
    SquareForm,
    SquareTangent,
    TriangleData,
    TwoWayData,
    check_S1,
    check_S2,
    condition_a_residual,
    form_action_vector,
    form_from_json_dict,
    form_gauge_action,
    form_to_json_dict,
    hurtubise_symplectic_pairing,
    hurtubise_to_triangle,
    random_rect_form,
    random_square_form,
    rect_blocks,
    rect_form_from_blocks,
    triangle_from_json_dict,
    triangle_gauge_action,
    triangle_moment,
    triangle_to_hurtubise,
    triangle_to_json_dict,
    two_way_moment,
    two_way_symplectic_pairing,
)

from conftest import cgauss, maxabs

DIM_PAIRS = ((1, 1), (2, 2), (1, 3), (3, 1), (2, 3), (3, 2))


def _random_form(rng, v1, v2):
    if v1 == v2:
        return random_square_form(rng, v1)
    return random_rect_form(rng, v1, v2)


def _form_distance(f, g):
    if isinstance(f, SquareForm):
        return max(maxabs(f.u - g.u), maxabs(f.h - g.h),
                   maxabs(f.I - g.I), maxabs(f.J - g.J))
    return max(maxabs(f.u - g.u), maxabs(f.eta - g.eta))


# --- conditions ---------------------------------------------------------------


def test_condition_a_residual():
    t = TriangleData(A=np.eye(2), B1=np.eye(2), B2=np.eye(2),
                     a=np.zeros((2, 1)), b=np.zeros((1, 2)))
    assert condition_a_residual(t) == 0.0
    t2 = TriangleData(A=np.eye(2), B1=np.zeros((2, 2)), B2=np.eye(2),
                      a=np.zeros((2, 1)), b=np.zeros((1, 2)))
    assert condition_a_residual(t2) == pytest.approx(np.sqrt(2))


def test_S1_fails_on_shared_kernel():
    # Ker A ∩ Ker b is everything and B1 preserves it
    t = TriangleData(A=np.zeros((2, 2)), B1=np.eye(2), B2=np.zeros((2, 2)),
                     a=np.zeros((2, 1)), b=np.zeros((1, 2)))
    rep = check_S1(t)
    assert not rep.ok
    assert rep.witness.dim == 2


def test_S1_holds_when_b_separates():
    # Ker A = span(e2) but b e2 != 0
    A = np.array([[1.0, 0.0], [0.0, 0.0]])
    t = TriangleData(A=A, B1=np.eye(2), B2=np.eye(2) - A @ np.eye(2) * 0,
                     a=np.zeros((2, 1)), b=np.array([[0.0, 1.0]]))
    assert check_S1(t).ok


def test_S2_fails_without_generation():
    t = TriangleData(A=np.zeros((2, 2)), B1=np.zeros((2, 2)), B2=np.eye(2),
                     a=np.zeros((2, 1)), b=np.zeros((1, 2)))
    rep = check_S2(t)
    assert not rep.ok
    assert rep.witness.dim == 0


def test_S2_holds_via_B2_orbit():
    # a = e1 and B2 the shift-up: e1 -> e2 generates the plane
    B2 = np.array([[0.0, 0.0], [1.0, 0.0]])
    t = TriangleData(A=np.zeros((2, 0)), B1=np.zeros((0, 0)), B2=B2,
                     a=np.array([[1.0], [0.0]]), b=np.zeros((1, 0)))
    assert check_S2(t).ok
    assert bool(ConditionReport(True)) is True
    assert bool(ConditionReport(False)) is False


# --- forward chart map ----------------------------------------------------------


def test_square_chart_formulas(rng):
    f = random_square_form(rng, 3)
    t = hurtubise_to_triangle(f)
    uinv = np.linalg.inv(f.u)
    assert maxabs(t.A - f.u) == 0.0
    assert maxabs(t.B1 - uinv @ f.h @ f.u) < 1e-12
    assert maxabs(t.B2 - (f.h - f.I @ f.J)) == 0.0
    assert maxabs(t.a - f.I) == 0.0
    assert maxabs(t.b - f.J @ f.u) < 1e-12


def test_wide_chart_formulas(rng):
    # v1 > v2: u acts on the larger side V1
    v1, v2 = 3, 1
    f = random_rect_form(rng, v1, v2)
    t = hurtubise_to_triangle(f)
    blocks = rect_blocks(f)
    uinv = np.linalg.inv(f.u)
    n, m = 3, 1
    assert maxabs(t.A - f.u[:m]) == 0.0
    assert maxabs(t.B1 - uinv @ f.eta @ f.u) < 1e-11
    assert maxabs(t.B2 - blocks["h"]) == 0.0
    assert maxabs(t.a - blocks["g"]) == 0.0
    assert maxabs(t.b - f.u[n - 1:]) == 0.0


def test_tall_chart_formulas(rng):
    # v1 < v2: all signs flip and u acts on V2
    v1, v2 = 1, 3
    f = random_rect_form(rng, v1, v2)
    t = hurtubise_to_triangle(f)
    blocks = rect_blocks(f)
    uinv = np.linalg.inv(f.u)
    n, m = 3, 1
    assert maxabs(t.A + uinv[:, :m]) < 1e-11
    assert maxabs(t.B1 + blocks["h"]) == 0.0
    assert maxabs(t.B2 + uinv @ f.eta @ f.u) < 1e-11
    assert maxabs(t.a - uinv @ np.eye(n)[:, m:m + 1]) < 1e-11
    assert maxabs(t.b + blocks["f"]) == 0.0


@pytest.mark.parametrize("v1,v2", DIM_PAIRS)
def test_chart_image_is_a_triangle(v1, v2):
    for k in range(25):
        rng = np.random.default_rng([101, v1, v2, k])
        t = hurtubise_to_triangle(_random_form(rng, v1, v2))
        assert condition_a_residual(t) < 1e-10 * max(1.0, t.scale())
        assert check_S1(t).ok
        assert check_S2(t).ok
        assert np.linalg.matrix_rank(t.A) == min(v1, v2)


def test_singular_u_rejected(rng):
    u = np.zeros((2, 2), dtype=complex)
    with pytest.raises(SingularU):
        hurtubise_to_triangle(SquareForm(u, cgauss(rng, 2, 2),
                                         cgauss(rng, 2, 1), cgauss(rng, 1, 2)))


# --- inverse and round trips ----------------------------------------------------


@pytest.mark.parametrize("v1,v2", DIM_PAIRS)
def test_round_trip_form_to_form(v1, v2):
    worst = 0.0
    for k in range(50):
        rng = np.random.default_rng([7, v1, v2, k])
        f = _random_form(rng, v1, v2)
        g = triangle_to_hurtubise(hurtubise_to_triangle(f))
        worst = max(worst, _form_distance(f, g))
    assert worst < 1e-9


@pytest.mark.parametrize("v1,v2", DIM_PAIRS)
def test_round_trip_triangle_to_triangle(v1, v2):
    for k in range(10):
        rng = np.random.default_rng([8, v1, v2, k])
        t = hurtubise_to_triangle(_random_form(rng, v1, v2))
        t2 = hurtubise_to_triangle(triangle_to_hurtubise(t))
        for name in ("A", "B1", "B2", "a", "b"):
            assert maxabs(getattr(t, name) - getattr(t2, name)) < 1e-9


def test_rejects_non_triangles():
    bad_a = TriangleData(A=np.eye(2), B1=np.eye(2), B2=2 * np.eye(2),
                         a=np.zeros((2, 1)), b=np.zeros((1, 2)))
    with pytest.raises(NotATriangle):
        triangle_to_hurtubise(bad_a)
    bad_s1 = TriangleData(A=np.zeros((2, 2)), B1=np.eye(2), B2=np.eye(2),
                          a=np.zeros((2, 1)), b=np.zeros((1, 2)))
    with pytest.raises(NotATriangle):
        triangle_to_hurtubise(bad_s1)


# --- gauge action -----------------------------------------------------------------


def _random_gl(rng, n):
    # shifted away from the singular locus
    return cgauss(rng, n, n) + 2.0 * np.eye(n)


@pytest.mark.parametrize("v1,v2", DIM_PAIRS)
def test_gauge_action_preserves_conditions(v1, v2):
    rng = np.random.default_rng([9, v1, v2])
    t = hurtubise_to_triangle(_random_form(rng, v1, v2))
    g1, g2 = _random_gl(rng, v1), _random_gl(rng, v2)
    moved = triangle_gauge_action(g1, g2, t)
    assert condition_a_residual(moved) < 1e-9 * max(1.0, moved.scale())
    assert check_S1(moved).ok
    assert check_S2(moved).ok
    # moment transforms by conjugation in each factor
    m1, m2 = triangle_moment(t)
    n1, n2 = triangle_moment(moved)
    assert maxabs(n1 - g1 @ m1 @ np.linalg.inv(g1)) < 1e-9
    assert maxabs(n2 - g2 @ m2 @ np.linalg.inv(g2)) < 1e-9


@pytest.mark.parametrize("v1,v2", DIM_PAIRS)
def test_conversion_is_equivariant(v1, v2):
    # chart fixing commutes with the gauge action on both sides
    rng = np.random.default_rng([10, v1, v2])
    f = _random_form(rng, v1, v2)
    g1, g2 = _random_gl(rng, v1), _random_gl(rng, v2)
    t = hurtubise_to_triangle(f)
    left = triangle_to_hurtubise(triangle_gauge_action(g1, g2, t))
    right = form_gauge_action(g1, g2, triangle_to_hurtubise(t))
    assert _form_distance(left, right) < 1e-8 * max(1.0, maxabs(right.u))


def test_moment_is_the_B_pair(rng):
    t = hurtubise_to_triangle(random_square_form(rng, 2))
    m1, m2 = triangle_moment(t)
    assert maxabs(m1 - t.B1) == 0.0
    assert maxabs(m2 + t.B2) == 0.0


# --- symplectic structure ----------------------------------------------------------


def _mu_paired(f, xi1, xi2):
    m1, m2 = triangle_moment(hurtubise_to_triangle(f))
    return np.trace(m1 @ xi1) + np.trace(m2 @ xi2)


def _shift_square(f, t, s):
    return SquareForm(f.u + s * t.du, f.h + s * t.dh, f.I + s * t.dI, f.J + s * t.dJ)


def _shift_rect(f, t, s):
    return RectForm(f.v1, f.v2, f.u + s * t.du, f.eta + s * t.deta)


def _random_square_tangent(rng, n):
    return SquareTangent(du=cgauss(rng, n, n), dh=cgauss(rng, n, n),
                         dI=cgauss(rng, n, 1), dJ=cgauss(rng, 1, n))


def _random_rect_tangent(rng, v1, v2):
    n, m = max(v1, v2), min(v1, v2)
    deta = rect_form_from_blocks(
        v1, v2, u=np.zeros((n, n)), h=cgauss(rng, m, m), g=cgauss(rng, m, 1),
        f=cgauss(rng, 1, m), e0=cgauss(rng, 1, 1), e=cgauss(rng, n - m - 1, 1),
    ).eta.copy()
    deta[m + 1:n, m:n - 1] = 0  # tangents carry zero in the pinned band
    return RectTangent(v1, v2, du=cgauss(rng, n, n), deta=deta)


@pytest.mark.parametrize("v1,v2", ((1, 1), (2, 2), (1, 2), (2, 1), (2, 3)))
def test_chart_hamiltonian_identity(v1, v2):
    h = 1e-6
    for k in range(15):
        rng = np.random.default_rng([11, v1, v2, k])
        xi1, xi2 = cgauss(rng, v1, v1), cgauss(rng, v2, v2)
        if v1 == v2:
            f = random_square_form(rng, v1)
            t = _random_square_tangent(rng, v1)
            shift = _shift_square
        else:
            f = random_rect_form(rng, v1, v2)
            t = _random_rect_tangent(rng, v1, v2)
            shift = _shift_rect
        lhs = hurtubise_symplectic_pairing(f, form_action_vector(xi1, xi2, f), t)
        rhs = (_mu_paired(shift(f, t, h), xi1, xi2)
               - _mu_paired(shift(f, t, -h), xi1, xi2)) / (2 * h)
        assert abs(lhs - rhs) < 1e-6 * max(1.0, abs(lhs))


def test_pairing_antisymmetry(rng):
    f = random_square_form(rng, 2)
    t1 = _random_square_tangent(rng, 2)
    t2 = _random_square_tangent(rng, 2)
    assert abs(hurtubise_symplectic_pairing(f, t1, t2)
               + hurtubise_symplectic_pairing(f, t2, t1)) < 1e-12


# --- two-way parts ------------------------------------------------------------------


def test_two_way_moment_signs(rng):
    e = TwoWayData(C=cgauss(rng, 3, 2), D=cgauss(rng, 2, 3))
    mt, mh = two_way_moment(e)
    assert maxabs(mt + e.D @ e.C) == 0.0
    assert maxabs(mh - e.C @ e.D) == 0.0


def test_two_way_hamiltonian_identity(rng):
    h = 1e-6
    vt, vh = 2, 3
    for _ in range(10):
        e = TwoWayData(C=cgauss(rng, vh, vt), D=cgauss(rng, vt, vh))
        xit, xih = cgauss(rng, vt, vt), cgauss(rng, vh, vh)
        xi_m = TwoWayData(C=xih @ e.C - e.C @ xit, D=xit @ e.D - e.D @ xih)
        t = TwoWayData(C=cgauss(rng, vh, vt), D=cgauss(rng, vt, vh))

        def paired(s):
            mt, mh = two_way_moment(TwoWayData(e.C + s * t.C, e.D + s * t.D))
            return np.trace(mt @ xit) + np.trace(mh @ xih)

        lhs = two_way_symplectic_pairing(xi_m, t)
        rhs = (paired(h) - paired(-h)) / (2 * h)
        assert abs(lhs - rhs) < 1e-6 * max(1.0, abs(lhs))


# --- serialization -------------------------------------------------------------------


def test_triangle_json_round_trip(rng):
    t = hurtubise_to_triangle(random_rect_form(rng, 2, 3))
    back = triangle_from_json_dict(triangle_to_json_dict(t))
    for name in ("A", "B1", "B2", "a", "b"):
        assert np.array_equal(getattr(t, name), getattr(back, name))


def test_form_json_round_trip(rng):
    for f in (random_square_form(rng, 2), random_rect_form(rng, 3, 1)):
        back = form_from_json_dict(form_to_json_dict(f))
        assert _form_distance(f, back) == 0.0


def test_eta_block_constraints_enforced(rng):
    n = 3
    eta = np.zeros((n, n), dtype=complex)
    with pytest.raises(ValueError):
        RectForm(1, 3, cgauss(rng, n, n), eta)  # missing identity band
    good = rect_form_from_blocks(1, 3, u=cgauss(rng, n, n), h=[[1.0]],
                                 g=[[0.0]], f=[[0.0]], e0=[[0.0]], e=[[0.0]])
    bad_eta = good.eta.copy()
    bad_eta[2, 0] = 1.0  # mandated zero block
    with pytest.raises(ValueError):
        RectForm(1, 3, good.u, bad_eta)
