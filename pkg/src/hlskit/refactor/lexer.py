"""Tokenizer for the C subset, keeping exact source spans.

Comments, string/char literals, and whole preprocessor lines become single
tokens so later passes can skip them without losing their bytes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

__all__ = ["Token", "LexError", "tokenize", "KEYWORDS"]


class LexError(ValueError):
    """Tokenizer failure, e.g. an unterminated string or comment."""

    def __init__(self, message: str, offset: int, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.offset = offset
        self.line = line


IDENT = "ident"
NUMBER = "number"
STRING = "string"
CHAR = "char"
PUNCT = "punct"
COMMENT = "comment"
PREPROC = "preproc"

KEYWORDS = frozenset(
    """auto break case char const continue default do double else enum extern
    float for goto if inline int long register return short signed sizeof
    static struct switch typedef union unsigned void volatile while new
    delete using namespace template class bool true false nullptr""".split()
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int
    is_float: bool = False  # meaningful for NUMBER tokens only

    @property
    def is_keyword(self) -> bool:
        return self.kind == IDENT and self.text in KEYWORDS


_IDENT_RE = re.compile(r"[A-Za-z_]\w*")
_NUMBER_RE = re.compile(
    r"""
    (?P<hex>0[xX][0-9a-fA-F]+(?:[uUlL]+)?)
    | (?P<float>
        (?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?[fFlL]?
        | \d+[eE][+-]?\d+[fFlL]?
        | \d+\.(?:[eE][+-]?\d+)?[fFlL]?
      )
    | (?P<int>\d+(?:[uUlL]+)?)
    """,
    re.VERBOSE,
)
_PUNCT3 = ("<<=", ">>=", "...", "->*")
_PUNCT2 = (
    "::", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=",
    "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
)


def _line_of(text: str, offset: int) -> int:
    return text.count("\n", 0, offset) + 1


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(text)
    at_line_start = True
    while i < n:
        c = text[i]
        if c in " \t\r":
            i += 1
            continue
        if c == "\n":
            at_line_start = True
            i += 1
            continue
        if c == "#" and at_line_start:
            # whole preprocessor line, honoring backslash continuations
            start = i
            while i < n:
                eol = text.find("\n", i)
                if eol == -1:
                    i = n
                    break
                if text[eol - 1] == "\\" or (eol >= 2 and text[eol - 2 : eol] == "\\\r"):
                    i = eol + 1
                    continue
                i = eol
                break
            tokens.append(Token(PREPROC, text[start:i], start, i))
            continue
        at_line_start = False
        if c == "/" and i + 1 < n and text[i + 1] == "/":
            eol = text.find("\n", i)
            end = n if eol == -1 else eol
            tokens.append(Token(COMMENT, text[i:end], i, end))
            i = end
            continue
        if c == "/" and i + 1 < n and text[i + 1] == "*":
            close = text.find("*/", i + 2)
            if close == -1:
                raise LexError("unterminated block comment", i, _line_of(text, i))
            tokens.append(Token(COMMENT, text[i : close + 2], i, close + 2))
            i = close + 2
            continue
        if c in "\"'":
            what = "string" if c == '"' else "char"
            start = i
            i += 1
            while i < n:
                if text[i] == "\\":
                    i += 2
                    continue
                if text[i] == c:
                    break
                if text[i] == "\n":
                    raise LexError(f"unterminated {what} literal", start, _line_of(text, start))
                i += 1
            if i >= n:
                raise LexError(f"unterminated {what} literal", start, _line_of(text, start))
            i += 1
            tokens.append(Token(STRING if c == '"' else CHAR, text[start:i], start, i))
            continue
        m = _NUMBER_RE.match(text, i)
        if m and (c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit())):
            tokens.append(Token(NUMBER, m.group(), i, m.end(), is_float=m.lastgroup == "float"))
            i = m.end()
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            tokens.append(Token(IDENT, m.group(), i, m.end()))
            i = m.end()
            continue
        matched = False
        for seq in _PUNCT3 + _PUNCT2:
            if text.startswith(seq, i):
                tokens.append(Token(PUNCT, seq, i, i + len(seq)))
                i += len(seq)
                matched = True
                break
        if not matched:
            tokens.append(Token(PUNCT, c, i, i + 1))
            i += 1
    return tokens
