"""Torsion groups of pencil maps, their characters, and canonical lifts."""

from __future__ import annotations

import random
from fractions import Fraction
from math import gcd, lcm

import pytest

from arrfixtures import (
    F,
    a2,
    a2_pencil,
    a3,
    a3_pencil,
    braid_pencil,
    deleted_b3,
    double_line_pencil,
    ex2,
    ex2_pencil,
    exfin3,
    exfin3_pencil,
    fw_pencil,
    random_line_pencil,
)
from curvepencils.arrangement import Arrangement, CurveComponent
from curvepencils.exactalg import QmodZ
from curvepencils.pencil import Pencil, classify, detect_special_fibers
from curvepencils.torsion import (
    TorsionError,
    characters_of_Tf,
    compute_Tf,
    epsilon_count,
    kernel_fstar,
    lift_character,
    theta,
)

HALF = Fraction(1, 2)


def pipeline(arr, pencil):
    cls = detect_special_fibers(arr, pencil, classify(arr, pencil))
    data = theta(arr, cls, kernel_fstar(arr, cls))
    return cls, compute_Tf(data)


def exponent_values(lift):
    return tuple(q.value for q in lift.rho.exponents)


# -- kernel of the induced map -------------------------------------------------


def test_kernel_relations_deleted_b3():
    arr, pencil = deleted_b3(), fw_pencil()
    cls = classify(arr, pencil)
    kernel = kernel_fstar(arr, cls)
    assert kernel.ncols == 6
    cls = detect_special_fibers(arr, pencil, cls)
    data = theta(arr, cls, kernel)
    assert data.relation_rows.to_lists() == [[1, -1, -1, 1, 2, 0, -2]]
    assert data.infinity_fiber_row == (0, 1, 1, 0, 0, 0, 2)
    for t in range(kernel.ncols):
        column = kernel.column(t)
        assert sum(a * b for a, b in zip(data.relation_rows.row(0), column)) == 0
    assert [str(b) for b in data.base_points] == ["(0:1)", "(1:0)"]
    assert str(data.infinity_side) == "(1:0)"
    assert "(1:0)" in data.chart_note() and "infinity" in data.chart_note()


def test_kernel_requires_designated_line():
    arr, pencil = ex2(), ex2_pencil()
    with pytest.raises(TorsionError, match="no line designated"):
        kernel_fstar(arr, classify(arr, pencil))


def test_kernel_with_single_base_point_is_everything():
    arr = Arrangement(
        [CurveComponent("T1", F("x")), CurveComponent("T2", F("y")), CurveComponent("T3", F("z"))],
        2,
    )
    pencil = Pencil(F("x^2 + y^2"), F("x*z"))
    cls = classify(arr, pencil)
    assert [str(b) for b in cls.base_points] == ["(1:0)"]
    kernel = kernel_fstar(arr, cls)
    assert kernel.to_lists() == [[1, 0], [0, 1]]
    cls = detect_special_fibers(arr, pencil, cls)
    _, tf = cls, compute_Tf(theta(arr, cls, kernel))
    assert tf.group.is_trivial() and tf.method == "reduced"


def test_theta_requires_special_fiber_data():
    arr, pencil = deleted_b3(), fw_pencil()
    cls = classify(arr, pencil)
    with pytest.raises(TorsionError, match="special fiber data not computed"):
        theta(arr, cls, kernel_fstar(arr, cls))


# -- theta data ------------------------------------------------------------------


def test_theta_rows_deleted_b3():
    arr, pencil = deleted_b3(), fw_pencil()
    cls = detect_special_fibers(arr, pencil, classify(arr, pencil))
    data = theta(arr, cls, kernel_fstar(arr, cls))
    assert data.moduli == (2,)
    assert data.theta_rows.to_lists() == [[0, 1, 1, 0, 0, 1, 0]]
    (sp,) = data.special_points
    assert str(sp.point) == "(1:1)"
    assert sp.members == ((5, 1), (7, 1)) and sp.m_prime == 1 and sp.m_dprime == 2


def test_theta_rows_exfin3():
    arr, pencil = exfin3(), exfin3_pencil()
    cls = detect_special_fibers(arr, pencil, classify(arr, pencil))
    data = theta(arr, cls, kernel_fstar(arr, cls))
    assert data.moduli == (2, 2, 2)
    assert [str(sp.point) for sp in data.special_points] == ["(0:1)", "(1:0)", "(1:1)"]
    assert data.theta_rows.to_lists() == [
        [0, 0, 0, 1, 1, 0, 1],
        [0, 1, 1, 0, 0, 0, 1],
        [1, 0, 0, 0, 0, 0, 1],
    ]


# -- the torsion group -----------------------------------------------------------


def test_tf_deleted_b3_is_order_two():
    arr, pencil = deleted_b3(), fw_pencil()
    cls, tf = pipeline(arr, pencil)
    assert str(tf.group) == "Z/2"
    assert tf.order == 2 and tf.method == "general"
    assert not tf.conditional
    assert characters_of_Tf(tf) == [(QmodZ(0),), (QmodZ(HALF),)]
    # loop around the sixth line, and the sum of the first two, both map to
    # the generator
    assert tf.class_of_kernel_vector([0, 0, 0, 0, 0, 1, 0]) == (1,)
    assert tf.class_of_kernel_vector([1, 1, 0, 0, 0, 0, 0]) == (1,)
    with pytest.raises(TorsionError, match="not in the kernel"):
        tf.class_of_kernel_vector([1, 0, 0, 0, 0, 0, 0])


def test_tf_trivial_on_reduced_pencils():
    arr, pencil = ex2().with_infinity(0), ex2_pencil()
    cls, tf = pipeline(arr, pencil)
    assert tf.group.is_trivial() and tf.method == "reduced"
    assert characters_of_Tf(tf) == [()]
    lift = lift_character(arr, cls, tf, ())
    assert lift.rho.is_trivial()

    arr, pencil = deleted_b3(), braid_pencil()
    _, tf = pipeline(arr, pencil)
    assert tf.group.is_trivial() and tf.method == "reduced"


def test_minimal_method_rejects_type2_fibers():
    arr, pencil = deleted_b3(), fw_pencil()
    cls = detect_special_fibers(arr, pencil, classify(arr, pencil))
    data = theta(arr, cls, kernel_fstar(arr, cls))
    with pytest.raises(TorsionError, match="minimal"):
        compute_Tf(data, method="minimal")


def test_tf_double_line_minimal_and_general_agree():
    arr, pencil = double_line_pencil()
    cls = detect_special_fibers(arr, pencil, classify(arr, pencil))
    assert cls.minimal
    assert [str(b) for b in cls.base_points] == ["(0:1)", "(1:0)", "(1:2)"]
    (sp,) = cls.special_points
    assert str(sp.point) == "(1:1)" and sp.members == () and sp.m_dprime == 2
    data = theta(arr, cls, kernel_fstar(arr, cls))
    assert data.kernel_basis.to_lists() == [[1], [1], [1]]
    tf_fast = compute_Tf(data)
    tf_general = compute_Tf(data, method="general")
    assert tf_fast.method == "minimal" and tf_general.method == "general"
    assert str(tf_fast.group) == "Z/2" == str(tf_general.group)
    assert tf_fast.elements() == tf_general.elements()
    for tf in (tf_fast, tf_general):
        lifts = {
            lift_character(arr, cls, tf, ch).rho.value_strings()
            for ch in characters_of_Tf(tf)
        }
        assert lifts == {("1", "1", "1", "1"), ("-1", "-1", "1", "1")}
    # the double line carries no member loop, so no special point is detected
    # by the character
    nontrivial = lift_character(arr, cls, tf_fast, (HALF,))
    assert epsilon_count(cls, nontrivial.rho) == 0


# -- lifted characters -------------------------------------------------------------


def test_lift_deleted_b3_canonical_and_pinned():
    arr, pencil = deleted_b3(), fw_pencil()
    cls, tf = pipeline(arr, pencil)
    trivial, generator = characters_of_Tf(tf)
    assert lift_character(arr, cls, tf, trivial).rho.is_trivial()

    lift = lift_character(arr, cls, tf, generator)
    assert exponent_values(lift) == (0, HALF, HALF, 0, 0, HALF, 0, HALF)
    assert lift.rho.value_strings() == ("1", "-1", "-1", "1", "1", "-1", "1", "-1")
    assert lift.pin is None and not lift.conditional
    assert epsilon_count(cls, lift.rho) == 1

    pinned = lift_character(arr, cls, tf, generator, pin=(0, HALF))
    assert exponent_values(pinned) == (HALF, 0, 0, HALF, 0, HALF, 0, HALF)
    assert pinned.rho.value_strings() == ("-1", "1", "1", "-1", "1", "-1", "1", "-1")
    assert pinned.pin == (0, QmodZ(HALF))


def test_lift_rejects_inconsistent_characters():
    arr, pencil = deleted_b3(), fw_pencil()
    cls, tf = pipeline(arr, pencil)
    with pytest.raises(TorsionError, match="not killed by the generator order"):
        lift_character(arr, cls, tf, (Fraction(1, 3),))
    with pytest.raises(TorsionError, match="expected 1 generator values"):
        lift_character(arr, cls, tf, ())
    # the subtorus fixes the sixth component, so it cannot be pinned
    with pytest.raises(TorsionError, match="does not move it"):
        lift_character(arr, cls, tf, (HALF,), pin=(5, HALF))

    arr, pencil = ex2().with_infinity(0), ex2_pencil()
    cls, tf = pipeline(arr, pencil)
    with pytest.raises(TorsionError, match="two-point base"):
        lift_character(arr, cls, tf, (), pin=(1, HALF))


def test_lift_a2_a3_pattern():
    for make_arr, make_pencil, m in ((a2, a2_pencil, 2), (a3, a3_pencil, 3)):
        arr, pencil = make_arr(), make_pencil()
        cls, tf = pipeline(arr, pencil)
        (sp,) = cls.special_points
        assert sp.m_prime == 1 and sp.m_dprime == m
        assert str(tf.group) == f"Z/{m}"
        lifts = {
            exponent_values(lift_character(arr, cls, tf, ch))
            for ch in characters_of_Tf(tf)
        }
        expected = {
            tuple(
                QmodZ(v).value
                for v in (0, 0, -q, -q, q, q, 0, 0)
            )
            for q in (Fraction(k, m) for k in range(m))
        }
        assert lifts == expected
        for ch in characters_of_Tf(tf)[1:]:
            lift = lift_character(arr, cls, tf, ch)
            assert epsilon_count(cls, lift.rho) == 1


def test_lift_exfin3_three_torsion_factors():
    arr, pencil = exfin3(), exfin3_pencil()
    cls, tf = pipeline(arr, pencil)
    assert tf.group.invariant_factors == (2, 2, 2)
    lifts = [lift_character(arr, cls, tf, ch) for ch in characters_of_Tf(tf)]
    observed = {exponent_values(lift) for lift in lifts}
    expected = set()
    for t1 in (Fraction(0), HALF):
        for t2 in (Fraction(0), HALF):
            for t3 in (Fraction(0), HALF):
                expected.add(
                    tuple(
                        QmodZ(v).value
                        for v in (t3, t3, t2, t2, t1, t1, 0, t1 + t2 + t3)
                    )
                )
    assert observed == expected
    # each special fiber is detected exactly when the character is nontrivial
    # on its members: L5/L6 over (0:1), L3/L4 over (1:0), L1/L2 over (1:1)
    for lift in lifts:
        values = lift.rho.exponents
        detected = sum(1 for v in (values[4], values[2], values[1]) if not v.is_zero())
        assert epsilon_count(cls, lift.rho) == detected


def test_lift_round_trip_and_degree_relation():
    cases = [
        (deleted_b3(), fw_pencil()),
        (a2(), a2_pencil()),
        (a3(), a3_pencil()),
        (exfin3(), exfin3_pencil()),
        (ex2().with_infinity(0), ex2_pencil()),
        double_line_pencil(),
    ]
    for arr, pencil in cases:
        cls, tf = pipeline(arr, pencil)
        base_lcm = 1
        for b in cls.base_points:
            for _, mult in cls.fiber_members(b):
                base_lcm = lcm(base_lcm, mult)
        for ch in characters_of_Tf(tf):
            lift = lift_character(arr, cls, tf, ch)
            assert lift.rho.satisfies_degree_relation(arr.degrees)
            # sections land back on the prescribed generator values
            for value, section in zip(ch, tf.section_columns):
                acc = QmodZ(0)
                for j, coeff in zip(tf.theta.affine_indices, section):
                    acc = acc + coeff * lift.rho.exponents[j]
                assert acc == value
            for exponent in lift.rho.exponents:
                assert (tf.order * base_lcm) % exponent.order == 0


# -- randomized line pencils -------------------------------------------------------


def test_random_line_pencils_reduced_implies_trivial():
    rng = random.Random(1208)
    for _ in range(10):
        arr, pencil = random_line_pencil(rng)
        cls = detect_special_fibers(arr, pencil, classify(arr, pencil))
        data = theta(arr, cls, kernel_fstar(arr, cls))
        tf = compute_Tf(data)
        tf_general = compute_Tf(data, method="general")
        assert tf.group.invariant_factors == tf_general.group.invariant_factors
        assert tf.elements() == tf_general.elements()
        if not data.moduli or all(m == 1 for m in data.moduli):
            assert tf.group.is_trivial()
        if cls.minimal and all(g >= 1 for g in data.fiber_multiplicity_gcds):
            m_f = lcm(*data.fiber_multiplicity_gcds)
            expected = 1
            for m in data.moduli:
                expected = lcm(expected, m // gcd(m, m_f))
            assert tf.order == expected
