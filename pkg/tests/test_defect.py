"""Tests for the chromatic defect ledger.

Oracles: hand values for the classical catalogue (real K-theory at 2,
the real Johnson-Wilson tower doubling, cyclic fixed point theories via
cyclotomic ramification), plus cross-engine agreement between the
formal inverse witness and the valuation formula at matching heights.
"""

import pytest

from chromadefect.defect import (
    DefectVerdict,
    Evidence,
    assemble,
    catalogue,
    documented_infinite,
    floor_log,
    verdict_eo,
    verdict_er,
    verdict_ko,
    verdict_ku,
    verdict_table,
    verdict_tmf,
)


def ev(kind, bound=None, engine="test", op="op", detail="d"):
    return Evidence(engine, op, detail, kind, bound)


class TestFloorLog:
    def test_values(self):
        assert floor_log(2, 1) == 0
        assert floor_log(2, 2) == 1
        assert floor_log(2, 7) == 2
        assert floor_log(3, 27) == 3
        assert floor_log(5, 124) == 2

    def test_positive_required(self):
        with pytest.raises(ValueError):
            floor_log(2, 0)


class TestEvidence:
    def test_kinds_validated(self):
        with pytest.raises(ValueError, match="kind"):
            ev("sideways", 2)

    def test_fact_carries_no_bound(self):
        with pytest.raises(ValueError, match="no bound"):
            ev("fact", 3)

    def test_bound_positive_integer(self):
        with pytest.raises(ValueError, match="positive integer"):
            ev("upper", 0)
        with pytest.raises(ValueError, match="positive integer"):
            ev("lower", None)


class TestAssemble:
    def test_meeting_bounds_give_exact(self):
        v = assemble("x", [ev("upper", 4), ev("lower", 4)])
        assert v.status == "exact"
        assert v.phi == 4 and v.phi_p == 2

    def test_gap_gives_upper_bound_only(self):
        v = assemble("x", [ev("upper", 8), ev("lower", 2)])
        assert v.status == "upper-bound-only"
        assert v.phi == 8

    def test_exact_item_counts_for_both_sides(self):
        v = assemble("x", [ev("exact", 3)], prime=3)
        assert v.status == "exact" and v.phi == 3 and v.phi_p == 1

    def test_tightest_bounds_win(self):
        v = assemble("x", [ev("upper", 16), ev("upper", 4), ev("lower", 2), ev("lower", 4)])
        assert v.status == "exact" and v.phi == 4

    def test_contradiction_rejected(self):
        with pytest.raises(ValueError, match="exceeds"):
            assemble("x", [ev("upper", 2), ev("lower", 4)])

    def test_upper_bound_required(self):
        with pytest.raises(ValueError, match="no upper bound"):
            assemble("x", [ev("lower", 2)])

    def test_facts_do_not_move_bounds(self):
        v = assemble("x", [ev("upper", 4), ev("fact")])
        assert v.status == "upper-bound-only"


class TestVerdictValidation:
    def test_log_consistency_enforced(self):
        with pytest.raises(ValueError, match="logarithm"):
            DefectVerdict("x", 2, 4, 1, "exact", [ev("exact", 4)])

    def test_exact_needs_both_sides(self):
        with pytest.raises(ValueError, match="both sides"):
            DefectVerdict("x", 2, 4, 2, "exact", [ev("upper", 4)])

    def test_infinite_carries_no_value(self):
        with pytest.raises(ValueError, match="no finite value"):
            DefectVerdict("x", 2, 4, 2, "documented-infinite", [])


class TestCatalogueEntries:
    def test_ku_is_orientable(self):
        v = verdict_ku()
        assert v.phi == 1 and v.phi_p == 0 and v.status == "exact"

    def test_ko_exact_two(self):
        v = verdict_ko(stem_cap=16)
        assert v.phi == 2 and v.phi_p == 1 and v.status == "exact"
        engines = {e.engine for e in v.evidence}
        assert engines == {"ext", "ssq"}
        lower = [e for e in v.evidence if e.kind == "lower"][0]
        assert "convergence assumed" in lower.detail

    def test_tmf_upper_bound_four(self):
        v = verdict_tmf(stem_cap=16)
        assert v.phi == 4 and v.phi_p == 2
        assert v.status == "upper-bound-only"
        assert any(e.kind == "fact" for e in v.evidence)

    def test_er_tower(self):
        for n in (1, 2, 3):
            v = verdict_er(n)
            assert v.phi == 2**n and v.phi_p == n and v.status == "exact"
            kinds = sorted(e.kind for e in v.evidence)
            assert kinds == ["lower", "upper"]

    def test_eo_prime_cyclic(self):
        for p, k in [(2, 1), (2, 2), (3, 1), (3, 2), (5, 1)]:
            v = verdict_eo(p, 1, k * (p - 1))
            assert v.phi == p**k and v.phi_p == k and v.status == "exact"
            assert v.prime == p

    def test_eo_prime_square_cyclic(self):
        assert verdict_eo(2, 2, 2).phi == 4
        assert verdict_eo(3, 2, 6).phi == 27

    def test_eo_trivial_group(self):
        v = verdict_eo(7, 0, 5)
        assert v.phi == 1 and v.status == "exact"

    def test_monotonicity_against_orientable_base(self):
        # the real theory sits over the complex one along a ring map,
        # so its defect can only be larger
        assert verdict_ko(stem_cap=16).phi >= verdict_ku().phi == 1

    def test_cross_engine_agreement(self):
        # the formal-inverse witness and the cyclotomic valuation see
        # the same defect for the order-2 group at heights 1..3
        for n in (1, 2, 3):
            assert verdict_er(n).phi == verdict_eo(2, 1, n).phi == 2**n


class TestDocumentedInfinite:
    def test_finite_spectra(self):
        v = documented_infinite("finite")
        assert v.status == "documented-infinite"
        assert v.phi is None and v.phi_p is None

    def test_j(self):
        v = documented_infinite("j")
        assert v.status == "documented-infinite"
        assert len(v.evidence) == 2  # infinite defect plus the splitting corollary

    def test_unknown_subject(self):
        with pytest.raises(ValueError, match="unknown subject"):
            documented_infinite("tmf")


class TestTableOutput:
    def test_catalogue_table_shape(self):
        rows = catalogue(stem_cap=16)
        table = verdict_table(rows)
        lines = table.strip().split("\n")
        assert lines[0] == "subject\tprime\tphi\tphi_p\tstatus"
        assert len(lines) == 1 + len(rows)
        body = "\n".join(lines[1:])
        assert "ko\t2\t2\t1\texact" in body
        assert "tmf\t2\t<=4\t<=2\tupper-bound-only" in body
        assert "ER(3)\t2\t8\t3\texact" in body
        assert "j\t2\tinf\tinf\tdocumented-infinite" in body

    def test_json_round_trip_fields(self):
        v = verdict_er(2)
        data = v.to_json()
        assert data["subject"] == "ER(2)"
        assert data["phi"] == 4
        assert all({"engine", "operation", "detail", "kind", "bound"} == set(e) for e in data["evidence"])

    def test_deterministic(self):
        assert verdict_table(catalogue(stem_cap=16)) == verdict_table(catalogue(stem_cap=16))
