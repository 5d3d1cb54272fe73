"""
Tests for the bundled rule generators.
"""

import pytest

from src.codedata import BindingSet, execute_bound
from src.data import IDENTITY_SOURCE, elementary_rule_source, life_like_rule_source, parse_life_rule
from src.errors import UsageError
from src.metamodel import StateDomain
from src.rule_language import compile_source

INT01 = StateDomain.integer_range(0, 1)
BOOL = StateDomain.boolean()


def run_pattern(program, domain, centre, milieu):
    values = [domain.coerce(v) for v in milieu]
    return execute_bound(program, BindingSet(domain.coerce(centre), tuple(values))).as_int()


class TestElementaryRules:
    """Rule sources for the 256 elementary automata"""

    @pytest.mark.parametrize("number", range(256))
    def test_every_rule_matches_its_bits(self, number):
        program = compile_source(elementary_rule_source(number), INT01, 2)
        for pattern in range(8):
            left, centre, right = (pattern >> 2) & 1, (pattern >> 1) & 1, pattern & 1
            assert run_pattern(program, INT01, centre, [left, right]) == (number >> pattern) & 1

    @pytest.mark.parametrize("number", [0, 30, 90, 110, 255])
    def test_boolean_domain(self, number):
        program = compile_source(elementary_rule_source(number, BOOL), BOOL, 2)
        for pattern in range(8):
            left, centre, right = (pattern >> 2) & 1, (pattern >> 1) & 1, pattern & 1
            assert run_pattern(program, BOOL, centre, [left, right]) == (number >> pattern) & 1

    def test_rule110_matches_bundled_file(self, rules_dir):
        source = elementary_rule_source(110)
        assert source.name == "rule110"
        assert source.text == (rules_dir / "rule110.curb").read_text(encoding='utf-8').strip()

    def test_constant_rules_are_single_emits(self):
        assert elementary_rule_source(0).text == "emit 0 ;"
        assert elementary_rule_source(255).text == "emit 1 ;"

    @pytest.mark.parametrize("number", [-1, 256])
    def test_number_out_of_range(self, number):
        with pytest.raises(UsageError):
            elementary_rule_source(number)

    def test_domain_without_zero_and_one(self):
        with pytest.raises(UsageError):
            elementary_rule_source(110, StateDomain.integer_range(2, 5))

    def test_wider_domain_allowed(self):
        domain = StateDomain.integer_range(0, 3)
        compile_source(elementary_rule_source(110, domain), domain, 2)


class TestLifeLikeRules:
    """Outer-totalistic rule sources"""

    def test_parse_rulestring(self):
        assert parse_life_rule("B3/S23") == (frozenset({3}), frozenset({2, 3}))
        assert parse_life_rule("b36/s23") == (frozenset({3, 6}), frozenset({2, 3}))
        assert parse_life_rule("B/S") == (frozenset(), frozenset())

    @pytest.mark.parametrize("text", ["", "B3", "S23/B3", "B9/S23", "B3/S2x"])
    def test_bad_rulestring(self, text):
        with pytest.raises(UsageError):
            parse_life_rule(text)

    def test_conway_matches_bundled_files(self, rules_dir):
        source = life_like_rule_source("B3/S23")
        assert source.name == "life"
        assert source.text == (rules_dir / "life.curb").read_text(encoding='utf-8').strip()
        bool_source = life_like_rule_source("B3/S23", BOOL)
        assert bool_source.text == (rules_dir / "life_bool.curb").read_text(encoding='utf-8').strip()

    @pytest.mark.parametrize("rulestring", ["B3/S23", "B36/S23", "B2/S", "B/S012345678"])
    def test_counts(self, rulestring):
        birth, survival = parse_life_rule(rulestring)
        program = compile_source(life_like_rule_source(rulestring), INT01, 8)
        for alive in (0, 1):
            for count in range(9):
                milieu = [1] * count + [0] * (8 - count)
                expected = int(count in (survival if alive else birth))
                assert run_pattern(program, INT01, alive, milieu) == expected

    def test_rule_name(self):
        assert life_like_rule_source("B36/S23").name == "b36_s23"


def test_identity_source():
    program = compile_source(IDENTITY_SOURCE, INT01, 0)
    assert run_pattern(program, INT01, 1, []) == 1
