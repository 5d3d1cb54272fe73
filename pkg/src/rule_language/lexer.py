"""
Rule lexer - turns rule text into vocabulary tokens.

This is the injection defence surface: any word that is not a predefined word, an
integer literal or a generated identifier stops tokenization with a
VocabularyViolation.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Union

from ..errors import LexError, VocabularyViolation
from .vocabulary import VOCABULARY, TokenClass

_TWO_CHAR_OPERATORS = ("==", "!=", "<=", ">=")
_DIGITS = "0123456789"


@dataclass(frozen=True)
class RuleSource:
    """Update rules as data: plain rule text"""

    text: str
    name: Optional[str] = field(default=None, compare=False)

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class Token:
    cls: TokenClass
    text: str
    line: int
    column: int

    def __repr__(self) -> str:
        return f"{self.cls.value}({self.text})"


def _is_word_start(ch: str) -> bool:
    return ch == "_" or ch.isalpha()


def _is_word_char(ch: str) -> bool:
    return ch == "_" or ch.isalnum()


def tokenize(source: Union[RuleSource, str]) -> List[Token]:
    """
    Tokenize rule text. Whitespace separates tokens and is otherwise ignored.

    Args:
        source: Rule source or raw text

    Returns:
        Token sequence covering the whole input

    Raises:
        VocabularyViolation: For a word or symbol outside the vocabulary
        LexError: For a malformed integer literal (e.g. "12ab")
    """
    text = source.text if isinstance(source, RuleSource) else source
    tokens: List[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    while i < n:
        ch = text[i]

        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch.isspace():
            i, col = i + 1, col + 1
            continue

        start = i
        if ch in _DIGITS:
            while i < n and text[i] in _DIGITS:
                i += 1
            if i < n and _is_word_char(text[i]):
                while i < n and _is_word_char(text[i]):
                    i += 1
                raise LexError(f"malformed integer literal {text[start:i]!r}", line, col)
            tokens.append(Token(TokenClass.INT_LITERAL, text[start:i], line, col))
        elif _is_word_start(ch):
            while i < n and _is_word_char(text[i]):
                i += 1
            word = text[start:i]
            cls = VOCABULARY.classify_word(word)
            if cls is None:
                raise VocabularyViolation(word, line, col)
            tokens.append(Token(cls, word, line, col))
        else:
            pair = text[i:i + 2]
            if pair in _TWO_CHAR_OPERATORS:
                i += 2
                tokens.append(Token(TokenClass.OPERATOR, pair, line, col))
            elif ch in VOCABULARY.operators:
                i += 1
                tokens.append(Token(TokenClass.OPERATOR, ch, line, col))
            else:
                raise VocabularyViolation(ch, line, col)

        col += i - start

    return tokens


def join_tokens(tokens: List[Token]) -> str:
    """Render tokens with single spaces (re-lexes to the same sequence)"""
    return " ".join(t.text for t in tokens)
