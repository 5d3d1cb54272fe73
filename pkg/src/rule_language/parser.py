"""
Recursive-descent parser for the rule grammar.

    program   := stmt+
    stmt      := "let" IDENT "=" expr ";" | "if" expr block ("else" block)? | "emit" expr ";"
    block     := "{" stmt+ "}"
    expr      := orE ; orE := andE ("or" andE)* ; andE := cmpE ("and" cmpE)*
    cmpE      := addE (("=="|"!="|"<"|"<="|">"|">=") addE)?
    addE      := mulE (("+"|"-") mulE)* ; mulE := unary (("*"|"/"|"%") unary)*
    unary     := "not" unary | "-" unary | primary
    primary   := INT | "true" | "false" | "entityState" | "milieu" "[" expr "]"
               | "milieuSum" | "milieuCount" | IDENT | "(" expr ")"
"""
from typing import List, Optional, Sequence, Tuple

from ..errors import RuleSyntaxError
from .lexer import Token, tokenize
from .nodes import (
    Binary, BoolLit, Emit, Expr, Ident, If, IntLit, Let, MilieuCount, MilieuIndex,
    MilieuSum, RuleAst, StateRef, Stmt, Unary
)
from .vocabulary import TokenClass

COMPARISON_OPS = ("==", "!=", "<", "<=", ">", ">=")
ADDITIVE_OPS = ("+", "-")
MULTIPLICATIVE_OPS = ("*", "/", "%")


class Parser:
    """Parses one token sequence; use parse() for the common case"""

    def __init__(self, tokens: Sequence[Token]):
        self.tokens = list(tokens)
        self.pos = 0

    # ==== Token helpers ====

    def _peek(self) -> Optional[Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _at(self, text: str) -> bool:
        tok = self._peek()
        return tok is not None and tok.text == text and tok.cls in (TokenClass.KEYWORD, TokenClass.OPERATOR)

    def _error(self, expected: str) -> RuleSyntaxError:
        tok = self._peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            line = last.line if last else 1
            column = (last.column + len(last.text)) if last else 1
            return RuleSyntaxError(expected, "end of input", line, column)
        return RuleSyntaxError(expected, repr(tok.text), tok.line, tok.column)

    def _expect(self, text: str) -> Token:
        if not self._at(text):
            raise self._error(repr(text))
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    # ==== Statements ====

    def parse_program(self) -> RuleAst:
        statements = self._statements(until=None)
        return RuleAst(tuple(statements))

    def parse_statements(self) -> Tuple[Stmt, ...]:
        """Parse a possibly empty statement sequence spanning all tokens"""
        statements = []
        while self._peek() is not None:
            statements.append(self._statement())
        return tuple(statements)

    def _statements(self, until: Optional[str]) -> List[Stmt]:
        statements = [self._statement()]
        while True:
            tok = self._peek()
            if tok is None:
                if until is not None:
                    raise self._error(repr(until))
                return statements
            if until is not None and self._at(until):
                return statements
            statements.append(self._statement())

    def _statement(self) -> Stmt:
        if self._at("let"):
            self.pos += 1
            tok = self._peek()
            if tok is None or tok.cls is not TokenClass.GENERATED_IDENT:
                raise self._error("identifier")
            self.pos += 1
            self._expect("=")
            expr = self.parse_expression()
            self._expect(";")
            return Let(tok.text, expr)

        if self._at("if"):
            self.pos += 1
            cond = self.parse_expression()
            then = self._block()
            orelse = None
            if self._at("else"):
                self.pos += 1
                orelse = self._block()
            return If(cond, then, orelse)

        if self._at("emit"):
            self.pos += 1
            expr = self.parse_expression()
            self._expect(";")
            return Emit(expr)

        raise self._error("statement")

    def _block(self) -> Tuple[Stmt, ...]:
        self._expect("{")
        statements = self._statements(until="}")
        self._expect("}")
        return tuple(statements)

    # ==== Expressions ====

    def parse_expression(self) -> Expr:
        return self._or()

    def _or(self) -> Expr:
        left = self._and()
        while self._at("or"):
            self.pos += 1
            left = Binary("or", left, self._and())
        return left

    def _and(self) -> Expr:
        left = self._comparison()
        while self._at("and"):
            self.pos += 1
            left = Binary("and", left, self._comparison())
        return left

    def _comparison(self) -> Expr:
        left = self._additive()
        tok = self._peek()
        if tok is not None and tok.cls is TokenClass.OPERATOR and tok.text in COMPARISON_OPS:
            self.pos += 1
            return Binary(tok.text, left, self._additive())
        return left

    def _additive(self) -> Expr:
        left = self._multiplicative()
        while True:
            tok = self._peek()
            if tok is None or tok.cls is not TokenClass.OPERATOR or tok.text not in ADDITIVE_OPS:
                return left
            self.pos += 1
            left = Binary(tok.text, left, self._multiplicative())

    def _multiplicative(self) -> Expr:
        left = self._unary()
        while True:
            tok = self._peek()
            if tok is None or tok.cls is not TokenClass.OPERATOR or tok.text not in MULTIPLICATIVE_OPS:
                return left
            self.pos += 1
            left = Binary(tok.text, left, self._unary())

    def _unary(self) -> Expr:
        if self._at("not"):
            self.pos += 1
            return Unary("not", self._unary())
        if self._at("-"):
            self.pos += 1
            return Unary("-", self._unary())
        return self._primary()

    def _primary(self) -> Expr:
        tok = self._peek()
        if tok is None:
            raise self._error("expression")

        if tok.cls is TokenClass.INT_LITERAL:
            self.pos += 1
            return IntLit(int(tok.text))
        if tok.cls is TokenClass.BOOL_LITERAL:
            self.pos += 1
            return BoolLit(tok.text == "true")
        if tok.cls is TokenClass.STATE_REF:
            self.pos += 1
            return StateRef()
        if tok.cls is TokenClass.GENERATED_IDENT:
            self.pos += 1
            return Ident(tok.text)
        if tok.cls is TokenClass.MILIEU_REF:
            self.pos += 1
            if tok.text == "milieuSum":
                return MilieuSum()
            if tok.text == "milieuCount":
                return MilieuCount()
            self._expect("[")
            index = self.parse_expression()
            self._expect("]")
            return MilieuIndex(index)
        if self._at("("):
            self.pos += 1
            inner = self.parse_expression()
            self._expect(")")
            return inner

        raise self._error("expression")


def parse(tokens: Sequence[Token]) -> RuleAst:
    """
    Parse a full program.

    Raises:
        RuleSyntaxError: With the expected construct, the found token and its position
    """
    parser = Parser(tokens)
    if not parser.tokens:
        raise parser._error("statement")
    return parser.parse_program()


def parse_text(text: str) -> RuleAst:
    return parse(tokenize(text))


def parse_expression_text(text: str) -> Expr:
    """Parse a standalone expression fragment (used to replay mutations)"""
    parser = Parser(tokenize(text))
    expr = parser.parse_expression()
    if parser._peek() is not None:
        raise parser._error("end of expression")
    return expr


def parse_statements_text(text: str) -> Tuple[Stmt, ...]:
    """Parse a possibly empty statement fragment (used to replay mutations)"""
    return Parser(tokenize(text)).parse_statements()
