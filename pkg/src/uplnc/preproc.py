"""Line-oriented preprocessor.

Three jobs, in order per file:

1. strip comments (replaced by a space, newlines inside kept so line
   numbers survive),
2. gather `#syntax` redefinitions and fold every redefined surface back to
   its canonical spelling,
3. process `#define` / `#include` and expand object-like macros with
   rescanning.

The surface of the language is partially redefinable: a directive such as

    #syntax lparen <arg>
    #syntax func-keyword <p>

maps an alternative spelling onto a core syntax element, after which
`<p> doprimes<arg>$</arg>` reads as `proc doprimes()`. Redefinitions are
gathered per file over the whole file (a directive in the middle still
covers the lines above it) and do not leak into or out of included files.

Every transformation preserves the line count of its input: directive
lines become empty lines and `#include` splices the included file's lines
in place, so the output line map stays exact. Text inside string and
character literals is never touched by any stage.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .diagnostics import CompileError, Diagnostic, fail
from .lexer import KEYWORDS, PUNCTUATORS

MAX_EXPANSION_DEPTH = 64
MAX_INCLUDE_DEPTH = 16

# canonical spelling of each redefinable syntax element
ELEMENT_SPELLINGS = {
    "lparen": "(",
    "rparen": ")",
    "lbrace": "{",
    "rbrace": "}",
    "func-keyword": "proc",
}

_CORE_SPELLINGS = frozenset(PUNCTUATORS) | KEYWORDS

_IDENT_RE = re.compile(r"[A-Za-z_]\w*")
_DEFINE_RE = re.compile(r"#\s*define\b(.*)$")
_INCLUDE_RE = re.compile(r'#\s*include\s+"([^"]+)"\s*$')
_SYNTAX_RE = re.compile(r"#\s*syntax\b(.*)$")


@dataclass(frozen=True)
class MacroDef:
    """Object-like macro: NAME -> replacement text (one line)."""

    name: str
    replacement: str = ""


@dataclass(frozen=True)
class SyntaxRule:
    element: str   # key of ELEMENT_SPELLINGS
    surface: str   # alternative spelling to fold back


@dataclass(frozen=True)
class PreprocOutput:
    """Preprocessed text plus a per-line origin map (1-based)."""

    text: str
    line_map: tuple[tuple[str, int], ...]

    def origin(self, line: int) -> tuple[str, int]:
        if 1 <= line <= len(self.line_map):
            return self.line_map[line - 1]
        if self.line_map:
            return self.line_map[-1]
        return ("<unknown>", line)


def _is_ident_char(c: str) -> bool:
    return c.isalnum() or c == "_"


def _scan_literal(text: str, i: int, filename: str, line: int, col: int) -> int:
    """Return the index just past the literal starting at text[i].
    A newline or end of input before the closing quote is an error."""
    quote = text[i]
    j = i + 1
    n = len(text)
    while j < n:
        c = text[j]
        if c == quote:
            return j + 1
        if c == "\n":
            break
        if c == "\\":
            if j + 1 >= n or text[j + 1] == "\n":
                break
            j += 2
            continue
        j += 1
    what = "string" if quote == '"' else "character"
    raise CompileError(Diagnostic(filename, line, col, f"unterminated {what} literal"))


def _strip_comments(text: str, filename: str) -> str:
    """Replace each /*...*/ comment with a single space, keeping the
    newlines it spanned so line numbers are unchanged."""
    out: list[str] = []
    i = 0
    n = len(text)
    line = 1
    line_start = 0
    while i < n:
        c = text[i]
        if c == "\n":
            out.append(c)
            i += 1
            line += 1
            line_start = i
            continue
        if c == '"' or c == "'":
            j = _scan_literal(text, i, filename, line, i - line_start + 1)
            out.append(text[i:j])
            i = j
            continue
        if c == "/" and text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                fail(filename, line, i - line_start + 1, "unterminated comment")
            segment = text[i:end + 2]
            newlines = segment.count("\n")
            out.append(" ")
            if newlines:
                out.append("\n" * newlines)
                line += newlines
                line_start = i + segment.rfind("\n") + 1
            i = end + 2
            continue
        out.append(c)
        i += 1
    return "".join(out)


def _comment_spans(text: str, filename: str) -> list[tuple[int, int]]:
    """Character ranges covered by comments, literal-aware."""
    spans: list[tuple[int, int]] = []
    i = 0
    n = len(text)
    line = 1
    line_start = 0
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            line_start = i
            continue
        if c == '"' or c == "'":
            i = _scan_literal(text, i, filename, line, i - line_start + 1)
            continue
        if c == "/" and text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                fail(filename, line, i - line_start + 1, "unterminated comment")
            line += text.count("\n", i, end + 2)
            spans.append((i, end + 2))
            i = end + 2
            continue
        i += 1
    return spans


def _validate_table(table: dict[str, str], filename: str) -> None:
    seen: dict[str, str] = {}
    for element, surface in table.items():
        if element not in ELEMENT_SPELLINGS:
            fail(filename, 1, 1, f"unknown syntax element '{element}'")
        if not surface:
            fail(filename, 1, 1, f"empty surface for syntax element '{element}'")
        if surface in _CORE_SPELLINGS:
            fail(filename, 1, 1,
                 f"surface '{surface}' collides with a core token spelling")
        if surface in seen:
            fail(filename, 1, 1,
                 f"overlapping surfaces: '{surface}' redefines both "
                 f"'{seen[surface]}' and '{element}'")
        seen[surface] = element


def _substitute(text: str, table: dict[str, str], filename: str) -> str:
    """Replace every surface occurrence outside literals and comments with
    its canonical spelling. Longest surface wins at each position."""
    ordered = sorted(
        ((surface, ELEMENT_SPELLINGS[element]) for element, surface in table.items()),
        key=lambda pair: -len(pair[0]),
    )
    out: list[str] = []
    last = ""   # last character emitted, for boundary checks
    i = 0
    n = len(text)
    line = 1
    line_start = 0

    def emit(s: str) -> None:
        nonlocal last
        out.append(s)
        if s:
            last = s[-1]

    while i < n:
        c = text[i]
        if c == "\n":
            emit(c)
            i += 1
            line += 1
            line_start = i
            continue
        if c == '"' or c == "'":
            j = _scan_literal(text, i, filename, line, i - line_start + 1)
            emit(text[i:j])
            i = j
            continue
        if c == "/" and text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                fail(filename, line, i - line_start + 1, "unterminated comment")
            segment = text[i:end + 2]
            emit(segment)
            newlines = segment.count("\n")
            if newlines:
                line += newlines
                line_start = i + segment.rfind("\n") + 1
            i = end + 2
            continue
        for surface, canonical in ordered:
            if not text.startswith(surface, i):
                continue
            # A surface with identifier-shaped edges only matches on word
            # boundaries; "fn" must not fire inside "fnord".
            if _is_ident_char(surface[0]) and last and _is_ident_char(last):
                continue
            after = text[i + len(surface):i + len(surface) + 1]
            if _is_ident_char(surface[-1]) and after and _is_ident_char(after):
                continue
            col = i - line_start + 1
            # The canonical spelling must not glue onto neighbouring
            # identifier characters, or the token boundary is ambiguous.
            if _is_ident_char(canonical[0]) and last and _is_ident_char(last):
                fail(filename, line, col,
                     f"surface '{surface}' for '{canonical}' touches an identifier")
            if _is_ident_char(canonical[-1]) and after and _is_ident_char(after):
                fail(filename, line, col,
                     f"surface '{surface}' for '{canonical}' touches an identifier")
            emit(canonical)
            i += len(surface)
            break
        else:
            emit(c)
            i += 1
    return "".join(out)


def apply_syntax_redefinitions(
    source: str,
    rules: tuple[SyntaxRule, ...] | list[SyntaxRule] = (),
    *,
    filename: str = "<input>",
) -> str:
    """Gather in-file `#syntax` directives (blanking those lines), merge them
    over `rules`, and fold every redefined surface back to its canonical
    spelling. In-file directives cover the whole file, including lines above
    them. With no rules at all the text comes back unchanged."""
    spans = _comment_spans(source, filename)

    def in_comment(pos: int) -> bool:
        return any(s <= pos < e for s, e in spans)

    table: dict[str, str] = {}
    for rule in rules:
        table[rule.element] = rule.surface

    lines = source.split("\n")
    offset = 0
    out_lines: list[str] = []
    for lineno, ln in enumerate(lines, 1):
        stripped = ln.lstrip()
        hash_pos = offset + (len(ln) - len(stripped))
        consumed = False
        if stripped.startswith("#") and not in_comment(hash_pos):
            m = _SYNTAX_RE.match(stripped)
            if m:
                body = m.group(1).strip()
                parts = body.split(None, 1)
                if len(parts) != 2:
                    fail(filename, lineno, 1,
                         "syntax directive needs an element name and a surface")
                element, surface = parts[0], parts[1].strip()
                if element not in ELEMENT_SPELLINGS:
                    fail(filename, lineno, 1, f"unknown syntax element '{element}'")
                table[element] = surface
                out_lines.append("")
                consumed = True
        if not consumed:
            out_lines.append(ln)
        offset += len(ln) + 1
    _validate_table(table, filename)
    text = "\n".join(out_lines)
    if not table:
        return text
    return _substitute(text, table, filename)


def _expand_chunk(text: str, macros: dict[str, MacroDef],
                  filename: str, lineno: int, depth: int) -> str:
    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == '"' or c == "'":
            j = _scan_literal(text, i, filename, lineno, i + 1)
            out.append(text[i:j])
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i + 1
            while j < n and _is_ident_char(text[j]):
                j += 1
            word = text[i:j]
            macro = macros.get(word)
            if macro is None:
                out.append(word)
            else:
                if depth >= MAX_EXPANSION_DEPTH:
                    fail(filename, lineno, i + 1, f"recursive macro '{word}'")
                out.append(_expand_chunk(macro.replacement, macros,
                                         filename, lineno, depth + 1))
            i = j
            continue
        out.append(c)
        i += 1
    return "".join(out)


class Preprocessor:
    """Holds macro state across a translation unit (includes share it)."""

    def __init__(
        self,
        include_dir: str | Path | None = None,
        macros: tuple[MacroDef, ...] | list[MacroDef] = (),
        syntax_rules: tuple[SyntaxRule, ...] | list[SyntaxRule] = (),
    ):
        self.macros: dict[str, MacroDef] = {}
        for m in macros:
            self.define(m)
        self.syntax_rules = tuple(syntax_rules)
        self.include_dir = Path(include_dir) if include_dir is not None else None

    def define(self, macro: MacroDef) -> None:
        if not _IDENT_RE.fullmatch(macro.name):
            fail("<macro-table>", 1, 1, f"macro name '{macro.name}' is not an identifier")
        self.macros[macro.name] = macro

    def process_file(self, path: str | Path) -> PreprocOutput:
        path = Path(path)
        try:
            source = path.read_text()
        except OSError as exc:
            raise CompileError(Diagnostic(str(path), 1, 1,
                                          f"cannot open input file: {exc.strerror}"))
        lines, lmap = self._run(source, str(path), path.parent, 0)
        return PreprocOutput("\n".join(lines), tuple(lmap))

    def process_text(self, source: str, filename: str = "<input>") -> PreprocOutput:
        base = self.include_dir if self.include_dir is not None else Path(".")
        lines, lmap = self._run(source, filename, base, 0)
        return PreprocOutput("\n".join(lines), tuple(lmap))

    def _run(self, source: str, filename: str, directory: Path,
             depth: int) -> tuple[list[str], list[tuple[str, int]]]:
        text = _strip_comments(source, filename)
        text = apply_syntax_redefinitions(text, self.syntax_rules, filename=filename)
        out: list[str] = []
        lmap: list[tuple[str, int]] = []
        for lineno, ln in enumerate(text.split("\n"), 1):
            stripped = ln.lstrip()
            if stripped.startswith("#"):
                self._directive(stripped, filename, lineno, directory, depth, out, lmap)
            else:
                out.append(_expand_chunk(ln, self.macros, filename, lineno, 0))
                lmap.append((filename, lineno))
        return out, lmap

    def _directive(self, stripped: str, filename: str, lineno: int,
                   directory: Path, depth: int,
                   out: list[str], lmap: list[tuple[str, int]]) -> None:
        inc = _INCLUDE_RE.match(stripped)
        if inc:
            if depth >= MAX_INCLUDE_DEPTH:
                fail(filename, lineno, 1,
                     f"include depth exceeds {MAX_INCLUDE_DEPTH} (include cycle?)")
            target = directory / inc.group(1)
            try:
                source = target.read_text()
            except OSError:
                fail(filename, lineno, 1, f"cannot open include file '{inc.group(1)}'")
            ilines, imap = self._run(source, str(target), target.parent, depth + 1)
            if ilines and ilines[-1] == "":
                # the included file's trailing newline; the include line's own
                # newline already separates us from the next line
                ilines.pop()
                imap.pop()
            out.extend(ilines)
            lmap.extend(imap)
            return
        d = _DEFINE_RE.match(stripped)
        if d:
            body = d.group(1)
            if body[:1] not in ("", " ", "\t"):
                fail(filename, lineno, 1, "malformed define directive")
            body = body.strip()
            m = _IDENT_RE.match(body)
            if not m:
                fail(filename, lineno, 1, "macro name must be an identifier")
            name = m.group(0)
            rest = body[m.end():]
            if rest.startswith("("):
                fail(filename, lineno, 1,
                     f"function-like macro '{name}(...)' is not supported")
            self.macros[name] = MacroDef(name, rest.strip())
            out.append("")
            lmap.append((filename, lineno))
            return
        if stripped == "#":
            out.append("")
            lmap.append((filename, lineno))
            return
        word = re.match(r"#\s*([\w-]+)", stripped)
        shown = word.group(1) if word else stripped
        fail(filename, lineno, 1, f"unknown directive '#{shown}'")


def expand_text(
    source: str,
    initial_macros: tuple[MacroDef, ...] | list[MacroDef] = (),
    *,
    filename: str = "<input>",
    include_dir: str | Path | None = None,
    syntax_rules: tuple[SyntaxRule, ...] | list[SyntaxRule] = (),
) -> PreprocOutput:
    """Full preprocessing of `source`: comment stripping, syntax-surface
    folding, directives, macro expansion. The output has no directive lines
    and no redefined surfaces; input with no directives and no comments
    comes back byte-identical."""
    pp = Preprocessor(include_dir=include_dir, macros=initial_macros,
                      syntax_rules=syntax_rules)
    return pp.process_text(source, filename)
