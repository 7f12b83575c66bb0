"""Catalog records: local and global components plus translated subtori."""

from __future__ import annotations

from arrfixtures import ex2
from curvepencils.catalog import _character_in_subtorus, build_catalog
from curvepencils.exactalg import lattice_key

W_FLAG = "certified (m'(c) = 1 for all c in C(f))"
NO_CUP = "candidate (no cup-product structure on this arrangement)"


def fiber_partition(record):
    cl = record.source
    labels = cl.arrangement.labels
    return frozenset(
        frozenset(labels[j] for j, _ in cl.fiber_members(b)) for b in cl.base_points
    )


# -- deleted B3 -----------------------------------------------------------------


def test_deleted_b3_shape(db3_catalog):
    assert db3_catalog.warnings == ()
    assert len(db3_catalog.by_kind("local")) == 7
    assert len(db3_catalog.by_kind("global")) == 5
    assert len(db3_catalog.by_kind("translated")) == 1
    # deterministic order: locals by point, then globals, then translated
    assert [r.kind for r in db3_catalog.records] == ["local"] * 7 + [
        "global"
    ] * 5 + ["translated"]


def test_deleted_b3_local_records(db3_catalog):
    locals_ = db3_catalog.by_kind("local")
    assert [str(r.source.point) for r in locals_] == [
        "(0:0:1)",
        "(0:1:0)",
        "(0:1:1)",
        "(1:0:0)",
        "(1:0:1)",
        "(1:1:0)",
        "(1:1:1)",
    ]
    assert [r.dimension for r in locals_] == [2, 2, 2, 2, 2, 3, 2]
    for rec in locals_:
        assert rec.flags == ("coordinate component", "certified")
        assert rec.torsion.is_trivial()
        assert rec.subtorus.dimension == rec.dimension
        assert rec.expected_generic_h1 == rec.dimension - 1


def test_deleted_b3_global_partitions(db3_catalog):
    globals_ = db3_catalog.by_kind("global")
    expected = {
        frozenset({frozenset({"L1", "L5"}), frozenset({"L2", "L6"}), frozenset({"L3", "L8"})}),
        frozenset({frozenset({"L2", "L8"}), frozenset({"L3", "L6"}), frozenset({"L4", "L5"})}),
        frozenset({frozenset({"L1", "L4"}), frozenset({"L2", "L3"}), frozenset({"L6", "L8"})}),
        frozenset({frozenset({"L1", "L6"}), frozenset({"L2", "L7"}), frozenset({"L4", "L8"})}),
        frozenset({frozenset({"L1", "L8"}), frozenset({"L3", "L7"}), frozenset({"L4", "L6"})}),
    }
    assert {fiber_partition(r) for r in globals_} == expected
    for rec in globals_:
        assert rec.dimension == 2 and rec.subtorus.dimension == 2
        assert rec.flags == ("coordinate component", "certified")
        assert rec.expected_generic_h1 == 1
    # the six triple-point partitions found by the search collapse onto the
    # local records, so local and global subtori never repeat
    keys = [r.subtorus.saturated_key() for r in db3_catalog.records[:12]]
    assert len(set(keys)) == 12


def test_deleted_b3_translated_component(db3_catalog):
    (rec,) = db3_catalog.by_kind("translated")
    assert rec.dimension == 1
    assert rec.source_string() == "L1 + L4 + 2*L5 | L2 + L3 + 2*L7"
    assert rec.torsion.value_strings() == ("1", "-1", "-1", "1", "1", "-1", "1", "-1")
    assert rec.subtorus.monomial_strings() == (
        "t",
        "t^-1",
        "t^-1",
        "t",
        "t^2",
        "1",
        "t^-2",
        "1",
    )
    assert rec.flags == ("translated coordinate component", W_FLAG)
    assert rec.certified
    assert rec.witness == "L6"
    assert rec.expected_generic_h1 == 1
    assert "witness L6" in rec.describe()
    assert not _character_in_subtorus(rec.subtorus, rec.torsion)


# -- small arrangements -----------------------------------------------------------


def test_triangle_catalog_is_empty(triangle_catalog):
    assert triangle_catalog.records == ()
    assert triangle_catalog.warnings == (
        "no designated infinity line; torsion sweep uses T1",
    )


def test_ex2_single_global(ex2_catalog):
    assert ex2_catalog.warnings == (
        "no designated infinity line; torsion sweep uses C1",
    )
    (rec,) = ex2_catalog.records
    assert rec.kind == "global" and rec.dimension == 2
    assert rec.source_string() == "2*C1 | C2 + C3 | C4"
    assert rec.flags == ("essential", "certified")
    # inside the degree-relation torus the subtorus is cut out by the single
    # character with exponents (1, 2, 0, 2)
    assert rec.subtorus.perp_lattice_key() == lattice_key([[1, 1, 1, 2], [1, 2, 0, 2]], 4)


def test_ex2_catalog_deterministic(ex2_catalog):
    again = build_catalog(ex2())
    assert again.to_json() == ex2_catalog.to_json()


# -- full A2 ----------------------------------------------------------------------


def test_a2_catalog_shape(a2_catalog):
    assert len(a2_catalog.by_kind("local")) == 7
    assert len(a2_catalog.by_kind("global")) == 5
    dims = {str(r.source.point): r.dimension for r in a2_catalog.by_kind("local")}
    assert dims["(0:0:1)"] == 3
    assert sorted(dims.values()) == [2, 2, 2, 2, 2, 2, 3]


def test_a2_translated_component(a2_catalog):
    (rec,) = a2_catalog.by_kind("translated")
    assert rec.dimension == 1
    assert rec.source_string() == "2*A2 + A5 + A6 | 2*A1 + A7 + A8"
    assert rec.torsion.value_strings() == ("1", "1", "-1", "-1", "1", "1", "-1", "-1")
    assert rec.flags == ("translated coordinate component", W_FLAG)
    assert rec.witness == "A3"
    assert rec.expected_generic_h1 == 1


# -- a curve arrangement ------------------------------------------------------------


def test_exfin3_catalog_shape(exfin3_catalog):
    assert len(exfin3_catalog.by_kind("local")) == 4
    (glob,) = exfin3_catalog.by_kind("global")
    assert fiber_partition(glob) == frozenset(
        {frozenset({"L1", "L2"}), frozenset({"L3", "L4"}), frozenset({"L5", "L6"})}
    )
    assert len(exfin3_catalog.by_kind("translated")) == 7


def test_exfin3_translated_candidates(exfin3_catalog):
    records = exfin3_catalog.by_kind("translated")
    for rec in records:
        assert rec.dimension == 1
        assert rec.source_string() == "Q1 | Q2"
        assert not rec.certified and NO_CUP in rec.flags
        assert rec.expected_generic_h1 == rec.torsion.value_strings()[:6].count("-1") // 2
    # one character per nontrivial class of (Z/2)^3; epsilon counts the
    # fibers whose members it detects
    assert sorted(r.expected_generic_h1 for r in records) == [1, 1, 1, 2, 2, 2, 3]
    values = {r.torsion.value_strings() for r in records}
    assert ("-1", "-1", "-1", "-1", "-1", "-1", "1", "-1") in values
    full = next(
        r
        for r in records
        if r.torsion.value_strings() == ("-1", "-1", "-1", "-1", "-1", "-1", "1", "-1")
    )
    assert full.flags == ("translated coordinate component", NO_CUP)
    assert full.witness == "L1"
    mixed = next(
        r
        for r in records
        if r.torsion.value_strings() == ("1", "1", "1", "1", "-1", "-1", "1", "-1")
    )
    assert mixed.flags == ("coordinate component", "translated coordinate component", NO_CUP)
    assert mixed.witness == "L5"


# -- invariants across every catalog ------------------------------------------------


def test_catalog_invariants(db3_catalog, a2_catalog, ex2_catalog, exfin3_catalog, triangle_catalog):
    for catalog in (db3_catalog, a2_catalog, ex2_catalog, exfin3_catalog, triangle_catalog):
        global_keys = {r.subtorus.saturated_key() for r in catalog.by_kind("global")}
        local_keys = {r.subtorus.saturated_key() for r in catalog.by_kind("local")}
        assert not global_keys & local_keys
        for rec in catalog.records:
            assert rec.dimension == rec.subtorus.dimension
            certiflags = [f for f in rec.flags if f.startswith(("certified", "candidate"))]
            assert len(certiflags) == 1
            assert len(rec.flags) > 1
            if rec.kind in ("local", "global"):
                assert rec.dimension >= 2
                assert rec.torsion.is_trivial()
            else:
                assert not rec.torsion.is_trivial()
                assert not _character_in_subtorus(rec.subtorus, rec.torsion)
                if rec.dimension >= 2:
                    assert rec.subtorus.saturated_key() in global_keys
