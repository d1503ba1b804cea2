"""Tokenizer for canonical source text.

Runs after preprocessing: comments are already stripped and any redefined
surface spellings have been folded back to the canonical ones, so this stage
only knows the fixed token inventory below.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .diagnostics import CompileError, Diagnostic

KEYWORDS = frozenset({
    "var", "proc", "struct", "extern", "int", "char",
    "if", "else", "while", "for", "return", "break", "continue",
})

# Two-character spellings first so maximal munch falls out of scan order.
PUNCTUATORS = (
    "++", "--", "==", "!=", "<=", ">=", "&&", "||",
    "+", "-", "*", "/", "%", "&", "|", "^", "!", "~",
    "<", ">", "=", "(", ")", "[", "]", "{", "}", ",", ";", ":", ".",
)

_ESCAPES = {
    "n": "\n", "t": "\t", "r": "\r", "0": "\0", "\\": "\\",
    "'": "'", '"': '"', "a": "\a", "b": "\b", "f": "\f", "v": "\v",
}


@dataclass(frozen=True)
class Token:
    """One lexeme. Equality ignores position so token sequences produced
    from differently-shaped source (extra blank lines, redefined surfaces)
    compare equal when they spell the same program."""

    kind: str            # "id" | "num" | "str" | "chr" | "kw" | "punct"
    text: str            # exact spelling, quotes included for literals
    value: object = None  # int for num/chr, decoded str for str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def __repr__(self) -> str:
        return f"{self.kind}({self.text!r})@{self.line}:{self.col}"


def _is_ident_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _is_ident_char(c: str) -> bool:
    return c.isalnum() or c == "_"


def tokenize(
    text: str,
    filename: str = "<input>",
    origin: Callable[[int], tuple[str, int]] | None = None,
) -> list[Token]:
    """Scan `text` into tokens. `origin` maps a line in `text` back to a
    (file, line) pair when the text came out of the preprocessor."""
    if origin is None:
        origin = lambda line: (filename, line)

    def err(line: int, col: int, message: str) -> CompileError:
        f, oline = origin(line)
        return CompileError(Diagnostic(f, oline, col, message))

    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r\f\v":
            i += 1
            col += 1
            continue
        start_col = col

        if _is_ident_start(c):
            j = i + 1
            while j < n and _is_ident_char(text[j]):
                j += 1
            word = text[i:j]
            kind = "kw" if word in KEYWORDS else "id"
            tokens.append(Token(kind, word, None, line, start_col))
            col += j - i
            i = j
            continue

        if c.isdigit():
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            if j < n and _is_ident_start(text[j]):
                k = j
                while k < n and _is_ident_char(text[k]):
                    k += 1
                raise err(line, start_col, f"malformed number '{text[i:k]}'")
            spelling = text[i:j]
            tokens.append(Token("num", spelling, int(spelling), line, start_col))
            col += j - i
            i = j
            continue

        if c == '"' or c == "'":
            j = i + 1
            chars: list[str] = []
            closed = False
            while j < n and text[j] != "\n":
                q = text[j]
                if q == c:
                    j += 1
                    closed = True
                    break
                if q == "\\":
                    if j + 1 >= n or text[j + 1] == "\n":
                        break
                    esc = text[j + 1]
                    if esc not in _ESCAPES:
                        raise err(line, col + (j - i), f"unknown escape '\\{esc}'")
                    chars.append(_ESCAPES[esc])
                    j += 2
                    continue
                chars.append(q)
                j += 1
            what = "string" if c == '"' else "character"
            if not closed:
                raise err(line, start_col, f"unterminated {what} literal")
            spelling = text[i:j]
            if c == '"':
                tokens.append(Token("str", spelling, "".join(chars), line, start_col))
            else:
                if len(chars) != 1:
                    raise err(line, start_col, "character literal must hold exactly one character")
                tokens.append(Token("chr", spelling, ord(chars[0]), line, start_col))
            col += j - i
            i = j
            continue

        for p in PUNCTUATORS:
            if text.startswith(p, i):
                tokens.append(Token("punct", p, None, line, start_col))
                col += len(p)
                i += len(p)
                break
        else:
            raise err(line, start_col, f"unknown character {c!r}")
    return tokens


def detokenize(tokens: list[Token]) -> str:
    """Space-join token spellings. Retokenizing the result yields an equal
    token sequence; used as the round-trip check on the tokenizer."""
    return " ".join(t.text for t in tokens)
