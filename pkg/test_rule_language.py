"""
Tests for the rule language: lexer, parser, validator and canonical renderer.

Includes the property checks for the render/parse round trip and for rejection
of words outside the vocabulary.
"""

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import rule_programs
from src.codedata import execute_closed
from src.errors import LanguageError, LexError, RuleSyntaxError, ValidationError, ValidationIssue, VocabularyViolation
from src.metamodel import StateDomain
from src.rule_language import RuleSource, TokenClass, VOCABULARY, compile_source, parse, parse_text, render, tokenize, validate
from src.rule_language.lexer import join_tokens
from src.rule_language.nodes import (
    Binary, BoolLit, Emit, Ident, If, IntLit, Let, MilieuIndex, MilieuSum, RuleAst, StateRef, Unary, node_count
)
from src.rule_language.vocabulary import IDENTIFIER_PATTERN

INT01 = StateDomain.integer_range(0, 1)
INT_WIDE = StateDomain.integer_range(-2, 3)
BOOL = StateDomain.boolean()


def classes(text):
    return [(t.cls, t.text) for t in tokenize(text)]


class TestTokenize:
    """Lexing into vocabulary tokens"""

    def test_identity_rule(self):
        assert classes("emit entityState ;") == [
            (TokenClass.KEYWORD, "emit"),
            (TokenClass.STATE_REF, "entityState"),
            (TokenClass.OPERATOR, ";"),
        ]

    def test_let_with_builtin(self):
        assert classes("let identifier0 = milieuSum + 1 ;") == [
            (TokenClass.KEYWORD, "let"),
            (TokenClass.GENERATED_IDENT, "identifier0"),
            (TokenClass.OPERATOR, "="),
            (TokenClass.MILIEU_REF, "milieuSum"),
            (TokenClass.OPERATOR, "+"),
            (TokenClass.INT_LITERAL, "1"),
            (TokenClass.OPERATOR, ";"),
        ]

    def test_unknown_word(self):
        with pytest.raises(VocabularyViolation) as exc:
            tokenize("emit launchMissiles ;")
        assert exc.value.word == "launchMissiles"
        assert (exc.value.line, exc.value.column) == (1, 6)

    def test_host_syntax_rejected(self):
        with pytest.raises(VocabularyViolation) as exc:
            tokenize("system . exit ( )")
        assert exc.value.word == "system"

    @pytest.mark.parametrize("symbol", [".", "\"", "'", "!", "&", "|", "$", "@", "\\", ","])
    def test_unknown_symbol(self, symbol):
        with pytest.raises(VocabularyViolation):
            tokenize(f"emit 1 {symbol} 1 ;")

    @pytest.mark.parametrize("word", ["identifier", "identifierX", "identifier1a", "Identifier1", "myVar", "x"])
    def test_identifier_family_is_exact(self, word):
        with pytest.raises(VocabularyViolation):
            tokenize(f"emit {word} ;")

    def test_malformed_literal(self):
        with pytest.raises(LexError):
            tokenize("emit 12ab ;")

    def test_positions_across_lines(self):
        tokens = tokenize("if true {\n  emit 1 ;\n}")
        emit = tokens[3]
        assert emit.text == "emit"
        assert (emit.line, emit.column) == (2, 3)

    def test_whitespace_insignificant(self):
        assert classes("emit\tmilieu[0]+1;") == classes("emit milieu [ 0 ] + 1 ;")

    def test_join_tokens_relexes(self, rule110_text):
        tokens = tokenize(rule110_text)
        assert classes(join_tokens(tokens)) == [(t.cls, t.text) for t in tokens]


class TestParse:
    """Recursive-descent parsing into rule trees"""

    def test_single_emit(self):
        assert parse_text("emit 0 ;") == RuleAst((Emit(IntLit(0)),))

    def test_if_then_emit(self):
        assert parse_text("if entityState == 1 { emit 0 ; } emit 1 ;") == RuleAst((
            If(Binary("==", StateRef(), IntLit(1)), (Emit(IntLit(0)),)),
            Emit(IntLit(1)),
        ))

    def test_if_else(self):
        ast = parse_text("if true { emit 1 ; } else { emit 0 ; }")
        assert ast.statements[0].orelse == (Emit(IntLit(0)),)

    def test_missing_expression(self):
        with pytest.raises(RuleSyntaxError) as exc:
            parse_text("emit ;")
        assert exc.value.expected == "expression"
        assert exc.value.found == "';'"

    def test_empty_program(self):
        with pytest.raises(RuleSyntaxError):
            parse_text("")

    def test_empty_block(self):
        with pytest.raises(RuleSyntaxError):
            parse_text("if true { } emit 1 ;")

    def test_unterminated_block(self):
        with pytest.raises(RuleSyntaxError) as exc:
            parse_text("if true { emit 1 ;")
        assert exc.value.found == "end of input"

    def test_let_requires_generated_identifier(self):
        with pytest.raises(RuleSyntaxError):
            parse_text("let 3 = 1 ; emit 1 ;")

    def test_multiplicative_binds_tighter(self):
        assert parse_text("emit 1 + 2 * 3 ;").statements[0].expr == Binary(
            "+", IntLit(1), Binary("*", IntLit(2), IntLit(3))
        )

    def test_and_binds_tighter_than_or(self):
        expr = parse_text("emit true or false and true ;").statements[0].expr
        assert expr == Binary("or", BoolLit(True), Binary("and", BoolLit(False), BoolLit(True)))

    def test_subtraction_left_associative(self):
        expr = parse_text("emit 5 - 2 - 1 ;").statements[0].expr
        assert expr == Binary("-", Binary("-", IntLit(5), IntLit(2)), IntLit(1))

    def test_unary_chain(self):
        expr = parse_text("emit - - 3 ;").statements[0].expr
        assert expr == Unary("-", Unary("-", IntLit(3)))

    def test_comparisons_do_not_chain(self):
        with pytest.raises(RuleSyntaxError):
            parse_text("emit 1 < 2 < 3 ;")

    def test_milieu_index_expression(self):
        expr = parse_text("emit milieu [ milieuSum % 2 ] ;").statements[0].expr
        assert expr == MilieuIndex(Binary("%", MilieuSum(), IntLit(2)))


class TestValidate:
    """Static checks against a state domain and milieu size"""

    def test_identity_is_valid(self):
        program = validate(parse_text("emit entityState ;"), INT01, 2)
        assert program.milieu_count == 2
        assert program.node_count == 2

    def test_bad_identifier_name(self):
        ast = RuleAst((Let("myVar", IntLit(1)), Emit(Ident("myVar"))))
        with pytest.raises(ValidationError) as exc:
            validate(ast, INT01, 2)
        assert exc.value.issue is ValidationIssue.BAD_IDENTIFIER
        assert "myVar" in str(exc.value)

    def test_use_before_let(self):
        with pytest.raises(ValidationError) as exc:
            validate(parse_text("emit identifier3 ;"), INT01, 2)
        assert exc.value.issue is ValidationIssue.BAD_IDENTIFIER

    def test_let_scope_ends_with_block(self):
        ast = parse_text("if true { let identifier0 = 1 ; emit identifier0 ; } emit identifier0 ;")
        with pytest.raises(ValidationError) as exc:
            validate(ast, INT01, 2)
        assert exc.value.issue is ValidationIssue.BAD_IDENTIFIER

    def test_constant_index_out_of_range(self):
        with pytest.raises(ValidationError) as exc:
            validate(parse_text("emit milieu [ 5 ] ;"), INT01, 2)
        assert exc.value.issue is ValidationIssue.MILIEU_INDEX_OUT_OF_RANGE

    def test_negative_constant_index(self):
        with pytest.raises(ValidationError) as exc:
            validate(parse_text("emit milieu [ - 1 ] ;"), INT01, 2)
        assert exc.value.issue is ValidationIssue.MILIEU_INDEX_OUT_OF_RANGE

    def test_computed_index_passes(self):
        validate(parse_text("emit milieu [ milieuSum % 2 ] ;"), INT01, 2)

    @pytest.mark.parametrize("text, domain", [
        ("emit 1 ;", BOOL),
        ("emit entityState + 1 ;", BOOL),
        ("emit 1 == 1 ;", INT01),
        ("if 1 { emit 0 ; } emit 1 ;", INT01),
        ("emit not 1 ;", INT01),
        ("emit - true ;", BOOL),
        ("emit true < false ;", BOOL),
        ("emit milieu [ true ] ;", INT01),
        ("let identifier0 = true ; emit identifier0 + 1 ;", INT01),
    ])
    def test_type_mismatch(self, text, domain):
        with pytest.raises(ValidationError) as exc:
            validate(parse_text(text), domain, 2)
        assert exc.value.issue is ValidationIssue.TYPE_MISMATCH

    def test_comparison_in_condition_allowed(self):
        validate(parse_text("if milieuSum >= 2 and entityState != 0 { emit 1 ; } emit 0 ;"), INT01, 2)

    def test_boolean_equality(self):
        validate(parse_text("emit entityState == milieu [ 0 ] ;"), BOOL, 2)

    @pytest.mark.parametrize("text", [
        "let identifier0 = 1 ;",
        "if true { emit 1 ; }",
        "emit 1 ; let identifier0 = 1 ;",
        "if true { emit 1 ; } else { let identifier0 = 0 ; }",
    ])
    def test_no_emit(self, text):
        with pytest.raises(ValidationError) as exc:
            validate(parse_text(text), INT01, 2)
        assert exc.value.issue is ValidationIssue.NO_EMIT

    def test_final_if_else_emits(self):
        validate(parse_text("if true { emit 1 ; } else { if false { emit 0 ; } else { emit 1 ; } }"), INT01, 2)

    def test_compile_source(self, rule110_text):
        program = compile_source(RuleSource(rule110_text), INT01, 2)
        assert program.node_count == node_count(program.ast)


class TestRender:
    """Canonical rendering"""

    def test_identity(self):
        assert render(RuleAst((Emit(StateRef()),))).text == "emit entityState ;"

    def test_rule_files_are_canonical(self, rules_dir):
        for path in sorted(rules_dir.glob("*.curb")):
            text = path.read_text(encoding='utf-8').strip()
            assert render(parse_text(text)).text == text, path.name

    def test_deterministic(self, life_text):
        ast = parse_text(life_text)
        assert render(ast).text == render(ast).text

    def test_parenthesises_only_when_needed(self):
        ast = RuleAst((Emit(Binary("*", Binary("+", IntLit(1), IntLit(2)), IntLit(3))),))
        assert render(ast).text == "emit ( 1 + 2 ) * 3 ;"
        ast = RuleAst((Emit(Binary("-", IntLit(1), Binary("-", IntLit(2), IntLit(3)))),))
        assert render(ast).text == "emit 1 - ( 2 - 3 ) ;"

    def test_not_of_comparison(self):
        ast = RuleAst((Emit(Unary("not", Binary("==", StateRef(), BoolLit(True)))),))
        assert render(ast).text == "emit not ( entityState == true ) ;"

    def test_nested_blocks_indent(self):
        text = render(parse_text("if true { if false { emit 1 ; } else { emit 0 ; } } emit 1 ;")).text
        assert text.splitlines() == [
            "if true {",
            "  if false {",
            "    emit 1 ;",
            "  } else {",
            "    emit 0 ;",
            "  }",
            "}",
            "emit 1 ;",
        ]

    def test_rule110_round_trip(self, rule110_text):
        ast = parse_text(rule110_text)
        assert parse(tokenize(render(ast))) == ast

    @settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(st.data())
    def test_round_trip_random_programs(self, data):
        domain = data.draw(st.sampled_from([INT01, INT_WIDE, BOOL]))
        ast = data.draw(rule_programs(domain, 3))
        assert parse(tokenize(render(ast))) == ast


# ==== Injection resistance ====

_FOREIGN_WORDS = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,14}", fullmatch=True).filter(
    lambda w: VOCABULARY.classify_word(w) is None
)


class TestInjection:
    """Words outside the vocabulary never get past the lexer"""

    @settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(st.data())
    def test_foreign_word_rejected(self, data):
        ast = data.draw(rule_programs(INT01, 2))
        tokens = render(ast).text.split()
        word = data.draw(_FOREIGN_WORDS)
        position = data.draw(st.integers(0, len(tokens)))
        source = " ".join(tokens[:position] + [word] + tokens[position:])

        with pytest.raises(VocabularyViolation) as exc:
            tokenize(source)
        assert exc.value.word == word
        # nothing downstream accepts it either
        with pytest.raises(LanguageError):
            execute_closed(RuleSource(source), INT01)

    @settings(max_examples=1000, deadline=None)
    @given(st.text(max_size=60))
    def test_arbitrary_text_yields_only_vocabulary_tokens(self, text):
        try:
            tokens = tokenize(text)
        except LanguageError:
            return
        for tok in tokens:
            assert VOCABULARY.accepts(tok.text)
            if tok.cls is TokenClass.GENERATED_IDENT:
                assert IDENTIFIER_PATTERN.fullmatch(tok.text)
