"""
The closed rule vocabulary.

Rule code may only be built from the predefined words and operators below, integer
literals, and generated identifiers of the form identifier<digits>. Anything else is
rejected by the lexer before it can reach a parser or an evaluator.
"""
import re
from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet


class TokenClass(str, Enum):
    KEYWORD = "Keyword"
    OPERATOR = "Operator"
    INT_LITERAL = "IntLiteral"
    BOOL_LITERAL = "BoolLiteral"
    STATE_REF = "StateRef"
    MILIEU_REF = "MilieuRef"
    GENERATED_IDENT = "GeneratedIdent"


KEYWORDS = frozenset({"let", "if", "else", "emit", "or", "and", "not"})
BOOL_LITERALS = frozenset({"true", "false"})
STATE_WORD = "entityState"
MILIEU_WORDS = frozenset({"milieu", "milieuSum", "milieuCount"})

# ASCII only; str.isdigit() would admit other scripts' digits
IDENTIFIER_PATTERN = re.compile(r"identifier[0-9]+")
IDENTIFIER_PREFIX = "identifier"


@dataclass(frozen=True)
class Vocabulary:
    """The finite list of predefined words plus the two open token families"""

    words: FrozenSet[str]
    operators: FrozenSet[str]

    def is_identifier(self, text: str) -> bool:
        return IDENTIFIER_PATTERN.fullmatch(text) is not None

    def classify_word(self, text: str):
        """Token class of a word, or None when the word is outside the vocabulary"""
        if text in KEYWORDS:
            return TokenClass.KEYWORD
        if text in BOOL_LITERALS:
            return TokenClass.BOOL_LITERAL
        if text == STATE_WORD:
            return TokenClass.STATE_REF
        if text in MILIEU_WORDS:
            return TokenClass.MILIEU_REF
        if self.is_identifier(text):
            return TokenClass.GENERATED_IDENT
        return None

    def accepts(self, text: str) -> bool:
        """True when text is a single token of some vocabulary family"""
        if text in self.words or text in self.operators:
            return True
        if text.isascii() and text.isdigit():
            return True
        return self.is_identifier(text)


VOCABULARY = Vocabulary(
    words=KEYWORDS | BOOL_LITERALS | {STATE_WORD} | MILIEU_WORDS,
    operators=frozenset({
        "==", "!=", "<", "<=", ">", ">=", "+", "-", "*", "/", "%",
        "=", ";", "(", ")", "[", "]", "{", "}"
    })
)
