"""Classification, special fibers, base-locus identities, and the search."""

from __future__ import annotations

import pytest

from arrfixtures import (
    F,
    a2,
    a2_pencil,
    a3,
    a3_pencil,
    b3,
    b3_pencil,
    braid_pencil,
    ceva2,
    ceva2_pencil,
    ceva3,
    ceva3_pencil,
    deleted_b3,
    ex2,
    ex2_pencil,
    exfin3,
    exfin3_pencil,
    four_generic_lines,
    fw_pencil,
    triangle,
)
from curvepencils.arrangement import pullback_subtorus
from curvepencils.pencil import (
    BlowupCluster,
    Pencil,
    PencilError,
    ProbeSequence,
    classify,
    detect_special_fibers,
    fy_identities,
    pencil_search,
    self_intersection,
    validate_pencil,
)
from curvepencils.polyform import P1Point


def P1(b0, b1) -> P1Point:
    return P1Point(b0, b1)


def placement_map(classification):
    return {
        j: (p.kind, p.point, p.multiplicity)
        for j, p in enumerate(classification.placements)
    }


# -- construction and validation ---------------------------------------------


def test_pencil_rejects_degenerate_generators():
    with pytest.raises(PencilError):
        Pencil(F("x"), F("y*z"))
    with pytest.raises(PencilError):
        Pencil(F("x*y"), F("3*x*y"))
    with pytest.raises(PencilError):
        Pencil(F("x"), F("0"))


def test_validate_pencil_common_factor():
    arr = triangle()
    with pytest.raises(PencilError, match="common factor"):
        validate_pencil(arr, Pencil(F("x*y"), F("x*z")))
    validate_pencil(arr, Pencil(F("x*y"), F("z^2")))


def test_pencil_from_json_blocks():
    arr = triangle()
    pencil = Pencil.from_json(
        {
            "blocks": [
                {"members": ["T1"], "multiplicities": [2]},
                {"members": ["T2", "T3"], "multiplicities": [1, 1]},
            ]
        },
        arr,
    )
    assert pencil.P.proportional_to(F("x^2"))
    assert pencil.Q.proportional_to(F("y*z"))
    with pytest.raises(PencilError):
        Pencil.from_json({"blocks": [{"members": ["T1"], "multiplicities": [1]}]}, arr)
    with pytest.raises(PencilError):
        Pencil.from_json(
            {
                "blocks": [
                    {"members": ["nope"], "multiplicities": [2]},
                    {"members": ["T2"], "multiplicities": [2]},
                ]
            },
            arr,
        )


# -- classification ------------------------------------------------------------


def test_classify_fw():
    arr = deleted_b3()
    c = classify(arr, fw_pencil())
    assert c.base_points == (P1(0, 1), P1(1, 0))
    assert c.type2_points == (P1(1, 1),)
    assert c.k == 2
    assert c.special and not c.minimal
    pm = placement_map(c)
    assert pm[0] == ("type1", P1(0, 1), 1)
    assert pm[3] == ("type1", P1(0, 1), 1)
    assert pm[4] == ("type1", P1(0, 1), 2)
    assert pm[1] == ("type1", P1(1, 0), 1)
    assert pm[2] == ("type1", P1(1, 0), 1)
    assert pm[6] == ("type1", P1(1, 0), 2)
    assert pm[5] == ("type2", P1(1, 1), 1)
    assert pm[7] == ("type2", P1(1, 1), 1)
    cof = c.fibers[P1(1, 1)].cofactor
    assert cof.proportional_to(F("x + y - z").power(2))
    assert c.divisor_string(P1(0, 1)) == "L1 + L4 + 2*L5"


def test_classify_braid():
    arr = deleted_b3()
    c = classify(arr, braid_pencil())
    assert c.base_points == (P1(0, 1), P1(1, 0), P1(1, 1))
    assert c.k == 3
    assert not c.special and not c.minimal
    pm = placement_map(c)
    assert pm[3][0] == "horizontal"
    assert pm[6][0] == "horizontal"
    assert pm[0] == ("type1", P1(0, 1), 1)
    assert pm[4] == ("type1", P1(0, 1), 1)
    assert pm[1] == ("type1", P1(1, 0), 1)
    assert pm[5] == ("type1", P1(1, 0), 1)
    assert pm[2] == ("type1", P1(1, 1), 1)
    assert pm[7] == ("type1", P1(1, 1), 1)


def test_classify_ex2():
    arr = ex2()
    c = classify(arr, ex2_pencil())
    assert c.base_points == (P1(0, 1), P1(1, 0), P1(1, 1))
    assert c.minimal and not c.special
    assert c.fiber_members(P1(0, 1)) == ((0, 2),)
    assert c.fiber_members(P1(1, 0)) == ((1, 1), (2, 1))
    assert c.fiber_members(P1(1, 1)) == ((3, 1),)
    assert c.divisor_string(P1(0, 1)) == "2*C1"
    assert c.divisor_string(P1(1, 0)) == "C2 + C3"


def test_classify_a2():
    arr = a2()
    c = classify(arr, a2_pencil())
    assert c.base_points == (P1(0, 1), P1(1, 0))
    assert c.type2_points == (P1(1, 1),)
    assert c.fiber_members(P1(0, 1)) == ((0, 2), (6, 1), (7, 1))
    assert c.fiber_members(P1(1, 0)) == ((1, 2), (4, 1), (5, 1))
    assert c.fiber_members(P1(1, 1)) == ((2, 1), (3, 1))


def test_classify_a3():
    arr = a3()
    c = classify(arr, a3_pencil())
    assert c.base_points == (P1(0, 1), P1(1, 0))
    assert c.fiber_members(P1(0, 1)) == ((0, 3), (6, 1), (7, 1))
    assert c.fiber_members(P1(1, 0)) == ((1, 3), (4, 1), (5, 1))
    assert c.fiber_members(P1(1, 1)) == ((2, 1), (3, 1))
    assert c.fibers[P1(1, 1)].cofactor.proportional_to(F("z").power(3))


def test_classify_exfin3():
    arr = exfin3()
    c = classify(arr, exfin3_pencil())
    assert c.base_points == (P1(1, -1), P1(1, 2))
    assert c.fiber_members(P1(1, -1)) == ((6, 1),)
    assert c.fiber_members(P1(1, 2)) == ((7, 1),)
    assert c.type2_points == (P1(0, 1), P1(1, 0), P1(1, 1))
    assert c.fiber_members(P1(0, 1)) == ((4, 1), (5, 1))
    assert c.fiber_members(P1(1, 0)) == ((2, 1), (3, 1))
    assert c.fiber_members(P1(1, 1)) == ((0, 1), (1, 1))


# -- special fibers -------------------------------------------------------------


def test_detect_fw():
    arr = deleted_b3()
    c = detect_special_fibers(arr, fw_pencil(), classify(arr, fw_pencil()))
    assert len(c.special_points) == 1
    sp = c.special_points[0]
    assert sp.point == P1(1, 1)
    assert sp.members == ((5, 1), (7, 1))
    assert sp.m_prime == 1
    assert sp.m_dprime == 2
    assert sp.new_part_profile == ((2, 1),)
    assert not c.conditional


def test_detect_braid_and_ex2_empty():
    arr = deleted_b3()
    c = detect_special_fibers(arr, braid_pencil(), classify(arr, braid_pencil()))
    assert c.special_points == ()
    assert c.incidental_points == ()
    arr = ex2()
    c = detect_special_fibers(arr, ex2_pencil(), classify(arr, ex2_pencil()))
    assert c.special_points == ()


def test_detect_a2_a3():
    arr = a2()
    c = detect_special_fibers(arr, a2_pencil(), classify(arr, a2_pencil()))
    assert [(sp.point, sp.m_prime, sp.m_dprime) for sp in c.special_points] == [
        (P1(1, 1), 1, 2)
    ]
    arr = a3()
    c = detect_special_fibers(arr, a3_pencil(), classify(arr, a3_pencil()))
    assert [(sp.point, sp.m_prime, sp.m_dprime) for sp in c.special_points] == [
        (P1(1, 1), 1, 3)
    ]


def test_detect_exfin3():
    arr = exfin3()
    c = detect_special_fibers(arr, exfin3_pencil(), classify(arr, exfin3_pencil()))
    got = [
        (sp.point, sp.members, sp.m_prime, sp.m_dprime) for sp in c.special_points
    ]
    assert got == [
        (P1(0, 1), ((4, 1), (5, 1)), 1, 2),
        (P1(1, 0), ((2, 1), (3, 1)), 1, 2),
        (P1(1, 1), ((0, 1), (1, 1)), 1, 2),
    ]


def test_probe_sequence_deterministic():
    s1 = ProbeSequence("a", "b")
    s2 = ProbeSequence("a", "b")
    lines1 = [line.form for _, line in zip(range(5), s1.lines())]
    lines2 = [line.form for _, line in zip(range(5), s2.lines())]
    assert lines1 == lines2


# -- base-locus identities ------------------------------------------------------


def test_fy_b3():
    arr = b3()
    report = fy_identities(arr, classify(arr, b3_pencil()))
    assert report.passed
    assert report.total == 16 and report.total_expected == 16
    assert report.member_degree_sum == 12 and report.member_degree_expected == 12
    values = sorted(n for _, n in report.point_table)
    assert values == [1, 1, 1, 1, 4, 4, 4]


def test_fy_ceva2():
    arr = ceva2()
    report = fy_identities(arr, classify(arr, ceva2_pencil()))
    assert report.passed
    assert sorted(n for _, n in report.point_table) == [1, 1, 1, 1]


def test_fy_braid():
    arr = deleted_b3()
    report = fy_identities(arr, classify(arr, braid_pencil()))
    assert report.passed
    assert sorted(n for _, n in report.point_table) == [1, 1, 1, 1]


def test_fy_ceva3_resultant_path():
    arr = ceva3()
    report = fy_identities(arr, classify(arr, ceva3_pencil()))
    assert report.passed
    assert report.point_table is None
    assert report.profile == ((1, 9),)
    assert report.total == 9
    assert report.member_degree_sum == 9


def test_fy_rejects_incomplete():
    arr = deleted_b3()
    with pytest.raises(PencilError, match="type-2"):
        fy_identities(arr, classify(arr, fw_pencil()))
    arr = triangle()
    c = classify(arr, Pencil(F("x^2 + y^2"), F("x*z")))
    with pytest.raises(PencilError, match="two full fibers"):
        fy_identities(arr, c)


# -- self-intersection ----------------------------------------------------------


def test_self_intersection_b3_auto():
    arr = b3()
    report = self_intersection(arr, classify(arr, b3_pencil()))
    assert report.value == -3
    assert report.curve_degree == 9
    mults = sorted(c.multiplicity for c in report.clusters)
    assert mults == [3, 3, 3, 3, 4, 4, 4]
    assert report.non_positive


def test_self_intersection_ceva2_auto():
    arr = ceva2()
    report = self_intersection(arr, classify(arr, ceva2_pencil()))
    assert report.value == 0
    assert report.curve_degree == 6


def test_self_intersection_braid_auto():
    arr = deleted_b3()
    report = self_intersection(arr, classify(arr, braid_pencil()))
    assert report.value == 0
    assert report.curve_degree == 6


def test_self_intersection_with_clusters():
    arr = ceva3()
    c = classify(arr, ceva3_pencil())
    with pytest.raises(PencilError):
        self_intersection(arr, c)  # conic members: no auto clusters
    report = self_intersection(arr, c, [BlowupCluster(3)] * 9)
    assert report.value == 0
    arr = ex2()
    report = self_intersection(
        arr, classify(arr, ex2_pencil()), [BlowupCluster(3)] * 4
    )
    assert report.value == -11
    assert report.curve_degree == 5


# -- search ----------------------------------------------------------------------


def partition_key(result):
    return frozenset(frozenset(fiber) for fiber in result.partition)


BRAID_PARTITIONS = [
    [{(0, 1), (4, 1)}, {(1, 1), (5, 1)}, {(2, 1), (7, 1)}],
    [{(1, 1), (7, 1)}, {(2, 1), (5, 1)}, {(3, 1), (4, 1)}],
    [{(0, 1), (3, 1)}, {(1, 1), (2, 1)}, {(5, 1), (7, 1)}],
    [{(0, 1), (5, 1)}, {(1, 1), (6, 1)}, {(3, 1), (7, 1)}],
    [{(0, 1), (7, 1)}, {(2, 1), (6, 1)}, {(3, 1), (5, 1)}],
]

TRIPLE_POINT_PARTITIONS = [
    [{(0, 1)}, {(2, 1)}, {(5, 1)}],
    [{(0, 1)}, {(1, 1)}, {(7, 1)}],
    [{(0, 1)}, {(3, 1)}, {(6, 1)}],
    [{(2, 1)}, {(3, 1)}, {(7, 1)}],
    [{(1, 1)}, {(2, 1)}, {(4, 1)}],
    [{(1, 1)}, {(3, 1)}, {(5, 1)}],
]


def test_search_deleted_b3_k3():
    results = pencil_search(deleted_b3(), max_multiplicity=2, max_blocks=3, min_blocks=3)
    keys = {partition_key(r) for r in results}
    expected = {
        frozenset(frozenset(f) for f in p)
        for p in BRAID_PARTITIONS + TRIPLE_POINT_PARTITIONS
    }
    assert keys == expected
    assert len(results) == 11
    assert all(r.k == 3 for r in results)


def test_search_roundtrip_classification():
    arr = deleted_b3()
    for result in pencil_search(arr, 2, 3, 3):
        redo = classify(arr, result.pencil)
        partition = tuple(
            redo.fiber_members(b) for b in redo.base_points
        )
        assert partition == result.partition


def test_search_finds_fw_partition():
    results = pencil_search(deleted_b3(), max_multiplicity=2, max_blocks=2, min_blocks=2)
    fw = frozenset(
        {frozenset({(0, 1), (3, 1), (4, 2)}), frozenset({(1, 1), (2, 1), (6, 2)})}
    )
    assert fw in {partition_key(r) for r in results}


def test_search_four_generic_lines_empty():
    assert pencil_search(four_generic_lines(), 2, 3, 3) == []


def test_search_rejects_composed():
    # blocks {1^2} | {2^2} span squares of a smaller pencil; never emitted
    results = pencil_search(triangle(), max_multiplicity=2, max_blocks=2, min_blocks=2)
    for r in results:
        mults = [m for fiber in r.partition for _, m in fiber]
        g = 0
        for m in mults:
            from math import gcd

            g = gcd(g, m)
        assert g == 1


# -- pullback subtori -------------------------------------------------------------


def test_pullback_subtorus_fw():
    arr = deleted_b3()
    sub = pullback_subtorus(arr, classify(arr, fw_pencil()))
    assert sub.rows == tuple(
        (v,) for v in (1, -1, -1, 1, 2, 0, -2, 0)
    )
    assert sub.monomial_strings() == (
        "t", "t^-1", "t^-1", "t", "t^2", "1", "t^-2", "1"
    )


def test_pullback_subtorus_ex2():
    arr = ex2()
    sub = pullback_subtorus(arr, classify(arr, ex2_pencil()))
    assert sub.rows == ((2, 0), (0, 1), (0, 1), (-1, -1))
    assert sub.dimension == 2


def test_pullback_subtorus_a2():
    arr = a2()
    sub = pullback_subtorus(arr, classify(arr, a2_pencil()))
    assert sub.rows == tuple(
        (v,) for v in (2, -2, 0, 0, -1, -1, 1, 1)
    )
