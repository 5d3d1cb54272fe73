"""
Tests for state domains and topology construction.
"""

import pytest

from src.errors import DomainMismatch, ExplicitIndexOutOfRange, TopologyError
from src.metamodel import DomainKind, Neighborhood, StateDomain, StateValue, TopologySpec, build_topology
from src.metamodel.topology import shortest_milieu


class TestStateDomain:
    """StateDomain parsing, membership and coercion"""

    def test_parse_bool(self):
        assert StateDomain.parse("bool") == StateDomain.boolean()

    def test_parse_int(self):
        domain = StateDomain.parse("int -2 3")
        assert (domain.lo, domain.hi) == (-2, 3)
        assert domain.size() == 6
        assert str(domain) == "int -2 3"

    @pytest.mark.parametrize("text", ["", "int 1", "int a b", "float 0 1", "bool true"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            StateDomain.parse(text)

    def test_empty_range(self):
        with pytest.raises(DomainMismatch):
            StateDomain.integer_range(3, 2)

    def test_boolean_membership(self):
        domain = StateDomain.boolean()
        assert domain.contains(True)
        assert not domain.contains(1)

    def test_integer_membership_excludes_bool(self):
        domain = StateDomain.integer_range(0, 1)
        assert domain.contains(0)
        assert not domain.contains(True)
        assert not domain.contains(2)

    def test_coerce_bool_from_int(self):
        assert StateDomain.boolean().coerce(1) == StateValue(DomainKind.BOOLEAN, True)
        with pytest.raises(DomainMismatch):
            StateDomain.boolean().coerce(2)

    def test_values_in_order(self):
        assert [v.value for v in StateDomain.integer_range(-1, 1).values()] == [-1, 0, 1]
        assert [v.value for v in StateDomain.boolean().values()] == [False, True]

    def test_on_value(self):
        assert StateDomain.integer_range(0, 5).on_value().value == 1
        assert StateDomain.integer_range(2, 5).on_value().value == 5
        assert StateDomain.boolean().on_value().value is True

    def test_value_text(self):
        assert StateValue(DomainKind.BOOLEAN, True).literal() == "true"
        assert StateValue(DomainKind.BOOLEAN, True).trace_text() == "1"
        assert StateValue(DomainKind.INTEGER, -3).literal() == "-3"


class TestBuildTopology:
    """Milieu order and shape for every topology kind"""

    def test_ring_order(self):
        milieus = build_topology(TopologySpec.ring(2), 6)
        assert milieus[0].neighbors == (4, 5, 1, 2)

    def test_ring_include_self(self):
        assert build_topology(TopologySpec.ring(1, include_self=True), 5)[0].neighbors == (4, 0, 1)

    def test_ring_repeats_when_small(self):
        assert build_topology(TopologySpec.ring(2), 3)[0].neighbors == (1, 2, 1, 2)

    def test_grid_moore_wrap(self):
        milieus = build_topology(TopologySpec.grid(3, 3), 9)
        assert milieus[4].neighbors == (0, 1, 2, 3, 5, 6, 7, 8)
        assert milieus[0].neighbors == (8, 6, 7, 2, 1, 5, 3, 4)

    def test_grid_von_neumann(self):
        milieus = build_topology(TopologySpec.grid(3, 3, Neighborhood.VON_NEUMANN), 9)
        assert milieus[4].neighbors == (1, 3, 5, 7)

    @pytest.mark.parametrize("neighborhood,length", [(Neighborhood.MOORE, 8), (Neighborhood.VON_NEUMANN, 4)])
    @pytest.mark.parametrize("wrap", [True, False])
    def test_grid_milieus_share_one_length(self, neighborhood, length, wrap):
        milieus = build_topology(TopologySpec.grid(4, 3, neighborhood, wrap=wrap), 12)
        assert {len(m) for m in milieus} == {length}

    def test_ring_milieus_share_one_length(self):
        assert {len(m) for m in build_topology(TopologySpec.ring(3), 10)} == {6}

    def test_nowrap_corner_sees_itself_past_the_border(self):
        milieus = build_topology(TopologySpec.grid(3, 3, Neighborhood.MOORE, wrap=False), 9)
        assert milieus[0].neighbors == (0, 0, 0, 0, 1, 0, 3, 4)
        assert milieus[4].neighbors == (0, 1, 2, 3, 5, 6, 7, 8)

    def test_nowrap_include_self(self):
        milieus = build_topology(TopologySpec.grid(2, 2, Neighborhood.VON_NEUMANN, wrap=False, include_self=True), 4)
        assert milieus[3].neighbors == (1, 2, 3, 3, 3)

    def test_grid_size_mismatch(self):
        with pytest.raises(TopologyError):
            build_topology(TopologySpec.grid(3, 3), 8)

    def test_explicit_verbatim(self):
        milieus = build_topology(TopologySpec.explicit([[2, 1], [0], [0, 1]]), 3)
        assert [m.neighbors for m in milieus] == [(2, 1), (0,), (0, 1)]
        assert shortest_milieu(milieus) == 1
        assert shortest_milieu(milieus, [0, 2]) == 2

    def test_explicit_index_out_of_range(self):
        with pytest.raises(ExplicitIndexOutOfRange):
            build_topology(TopologySpec.explicit([[1], [2]]), 2)

    def test_explicit_self_needs_include_self(self):
        with pytest.raises(TopologyError):
            build_topology(TopologySpec.explicit([[0, 1], [0]]), 2)
        assert build_topology(TopologySpec.explicit([[0, 1], [0]], include_self=True), 2)[0].neighbors == (0, 1)

    def test_explicit_row_count(self):
        with pytest.raises(TopologyError):
            build_topology(TopologySpec.explicit([[1], [0]]), 3)

    def test_zero_entities(self):
        with pytest.raises(TopologyError):
            build_topology(TopologySpec.ring(1), 0)

    def test_describe(self):
        assert TopologySpec.ring(1).describe() == "ring 1"
        assert TopologySpec.grid(4, 3, Neighborhood.VON_NEUMANN, wrap=False).describe() == "grid 4 3 vonneumann nowrap"
        assert TopologySpec.ring(1, include_self=True).describe() == "ring 1 +self"
