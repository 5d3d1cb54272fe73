"""
Rule Language

The restricted DSL update rules are written in: lexer, parser, validator and
canonical renderer.
"""

from .lexer import RuleSource, Token, tokenize
from .parser import parse, parse_text
from .renderer import render
from .validator import ExprType, RuleProgram, validate
from .vocabulary import VOCABULARY, TokenClass, Vocabulary


def compile_source(source: RuleSource, domain, milieu_count: int) -> RuleProgram:
    """tokenize -> parse -> validate in one call"""
    return validate(parse(tokenize(source)), domain, milieu_count)


__all__ = [
    'RuleSource', 'Token', 'tokenize', 'parse', 'parse_text', 'render',
    'ExprType', 'RuleProgram', 'validate', 'compile_source',
    'VOCABULARY', 'TokenClass', 'Vocabulary'
]
