"""Recursive-descent parser.

Declarations accept both orders, `var name,...:type;` and `var type:name,...;`,
with `extern` permitted before the name list, inside the type, after the
type, and before individual names. The tie-break after `var`: skip any
leading `extern`s, then a token that can start a type (`[`, `*`, `int`,
`char`, or a declared structure name) selects the type-first form.

On a syntax error the parser records a diagnostic and resynchronizes at the
next `;` or `}`, so one pass can report several errors; parsing raises at
the end when any were recorded.
"""

from __future__ import annotations

from typing import Callable

from .diagnostics import CompileError, Diagnostic
from .lexer import Token
from .nodes import (
    Assign, Binary, Block, Break, Call, CharLit, Continue, ExprStmt, For,
    FuncDef, Identifier, If, Index, Member, Module, NumberLit, PostIncDec,
    Return, StringLit, StructDef, Symbol, Storage, TypeExpr, TYPE_INT, Unary,
    VarDecl, While, sizeof,
)

_EOF = Token("eof", "")

_BINARY_LEVELS = (
    ("||",),
    ("&&",),
    ("|",),
    ("^",),
    ("&",),
    ("==", "!="),
    ("<", ">", "<=", ">="),
    ("+", "-"),
    ("*", "/", "%"),
)

_UNARY_OPS = ("-", "!", "~", "*", "&")


class _Resync(Exception):
    """Internal: unwind to the nearest recovery point."""


class Parser:
    def __init__(
        self,
        tokens: list[Token],
        filename: str = "<input>",
        origin: Callable[[int], tuple[str, int]] | None = None,
    ):
        self.tokens = list(tokens)
        self.pos = 0
        self.filename = filename
        self.origin = origin or (lambda line: (filename, line))
        self.diags: list[Diagnostic] = []
        # name -> size in bytes; None while the structure is still open,
        # which lets members point at the structure being defined
        self.struct_sizes: dict[str, int | None] = {}
        self.structs: dict[str, StructDef] = {}

    # ------------------------------------------------------------ cursor

    def _peek(self, ahead: int = 0) -> Token:
        i = self.pos + ahead
        return self.tokens[i] if i < len(self.tokens) else _EOF

    def _advance(self) -> Token:
        t = self._peek()
        if t.kind != "eof":
            self.pos += 1
        return t

    def _at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def _at(self, kind: str, text: str | None = None) -> bool:
        t = self._peek()
        return t.kind == kind and (text is None or t.text == text)

    def _accept(self, kind: str, text: str | None = None) -> Token | None:
        if self._at(kind, text):
            return self._advance()
        return None

    def _shown(self, t: Token) -> str:
        return "end of input" if t.kind == "eof" else f"'{t.text}'"

    def _error(self, pos: tuple[int, int], message: str) -> _Resync:
        line, col = pos
        f, oline = self.origin(line)
        self.diags.append(Diagnostic(f, oline, col, message))
        return _Resync()

    def _error_here(self, message: str) -> _Resync:
        t = self._peek()
        line = t.line if t.kind != "eof" else (self.tokens[-1].line if self.tokens else 1)
        col = t.col if t.kind != "eof" else (self.tokens[-1].col if self.tokens else 1)
        return self._error((line, col), message)

    def _expect(self, kind: str, text: str | None = None, what: str | None = None) -> Token:
        t = self._accept(kind, text)
        if t is None:
            want = what or (f"'{text}'" if text else kind)
            raise self._error_here(f"expected {want}, found {self._shown(self._peek())}")
        return t

    # ----------------------------------------------------------- program

    def parse_program(self) -> Module:
        module = Module()
        while not self._at_end():
            try:
                t = self._peek()
                if t.kind == "kw" and t.text == "var":
                    module.items.append(self.parse_var_decl(Storage.GLOBAL))
                elif t.kind == "kw" and t.text == "proc":
                    module.items.append(self.parse_func())
                elif t.kind == "kw" and t.text == "struct":
                    module.items.append(self.parse_struct())
                else:
                    raise self._error_here(
                        f"expected a declaration, found {self._shown(t)}")
            except _Resync:
                self._sync_top()
        module.structs = dict(self.structs)
        if self.diags:
            raise CompileError(self.diags)
        return module

    def _sync_top(self) -> None:
        while not self._at_end():
            t = self._peek()
            if t.kind == "kw" and t.text in ("var", "proc", "struct"):
                return
            self._advance()
            if t.kind == "punct" and t.text in (";", "}"):
                return

    def _sync_stmt(self) -> None:
        while not self._at_end():
            t = self._peek()
            if t.kind == "punct" and t.text == "}":
                return
            self._advance()
            if t.kind == "punct" and t.text == ";":
                return

    # ------------------------------------------------------ declarations

    def _starts_type(self, t: Token) -> bool:
        if t.kind == "punct" and t.text in ("[", "*"):
            return True
        if t.kind == "kw" and t.text in ("int", "char"):
            return True
        return t.kind == "id" and t.text in self.struct_sizes

    def parse_var_decl(self, default_storage: Storage) -> VarDecl:
        kw = self._expect("kw", "var")
        ahead = 0
        while self._peek(ahead).kind == "kw" and self._peek(ahead).text == "extern":
            ahead += 1
        type_first = self._starts_type(self._peek(ahead))

        if type_first:
            ty, ty_ext = self.parse_type_spec()
            self._expect("punct", ":")
            names, list_ext = self._parse_name_list()
        else:
            names, list_ext = self._parse_name_list()
            self._expect("punct", ":")
            ty, ty_ext = self.parse_type_spec()
        self._expect("punct", ";")

        symbols: list[Symbol] = []
        seen: set[str] = set()
        for tok, item_ext in names:
            is_ext = ty_ext or list_ext or item_ext
            storage = default_storage
            if is_ext:
                if default_storage is not Storage.GLOBAL:
                    raise self._error((tok.line, tok.col),
                                      "extern is only allowed at module scope")
                storage = Storage.EXTERN
            if tok.text in seen:
                raise self._error((tok.line, tok.col),
                                  f"duplicate name '{tok.text}' in declaration")
            seen.add(tok.text)
            symbols.append(Symbol(tok.text, storage, ty, pos=(tok.line, tok.col)))
        return VarDecl(symbols, pos=(kw.line, kw.col))

    def _parse_name_list(self) -> tuple[list[tuple[Token, bool]], bool]:
        list_ext = False
        while self._accept("kw", "extern"):
            list_ext = True
        names: list[tuple[Token, bool]] = []
        while True:
            item_ext = False
            while self._accept("kw", "extern"):
                item_ext = True
            tok = self._expect("id", what="a name")
            names.append((tok, item_ext))
            if not self._accept("punct", ","):
                break
        return names, list_ext

    def parse_type_spec(self) -> tuple[TypeExpr, bool]:
        """Parse `[N]`/`*` prefixes and a base, with `extern` allowed at any
        position inside. Returns the type and whether extern appeared."""
        ctors: list = []
        base: str | None = None
        is_ext = False
        start = self._peek()
        while True:
            t = self._peek()
            if t.kind == "kw" and t.text == "extern":
                self._advance()
                is_ext = True
                continue
            if base is not None:
                break
            if t.kind == "punct" and t.text == "[":
                self._advance()
                dim = self._expect("num", what="an array dimension")
                if dim.value <= 0:
                    raise self._error((dim.line, dim.col),
                                      "array dimension must be positive")
                self._expect("punct", "]")
                ctors.append(dim.value)
                continue
            if t.kind == "punct" and t.text == "*":
                self._advance()
                ctors.append("*")
                continue
            if t.kind == "kw" and t.text in ("int", "char"):
                self._advance()
                base = t.text
                continue
            if t.kind == "id":
                if t.text in self.struct_sizes:
                    self._advance()
                    base = t.text
                    continue
                raise self._error((t.line, t.col), f"unknown type name '{t.text}'")
            raise self._error_here(f"expected a type, found {self._shown(t)}")
        size = sizeof(tuple(ctors), base, self.struct_sizes)
        if size is None:
            raise self._error((start.line, start.col),
                              f"structure '{base}' has no complete size here")
        return TypeExpr(tuple(ctors), base, size), is_ext

    def parse_struct(self) -> StructDef:
        kw = self._expect("kw", "struct")
        name_tok = self._expect("id", what="a structure name")
        name = name_tok.text
        if name in self.struct_sizes:
            raise self._error((name_tok.line, name_tok.col),
                              f"structure '{name}' is already defined")
        self._expect("punct", "{")
        self.struct_sizes[name] = None
        members: list[Symbol] = []
        methods: list[FuncDef] = []
        taken: set[str] = set()
        offset = 0
        while not self._at("punct", "}") and not self._at_end():
            try:
                t = self._peek()
                if t.kind == "kw" and t.text == "var":
                    decl = self.parse_var_decl(Storage.MEMBER)
                    for sym in decl.symbols:
                        if sym.name in taken:
                            raise self._error(sym.pos,
                                              f"duplicate member '{sym.name}'")
                        taken.add(sym.name)
                        sym.struct = name
                        sym.location = offset
                        offset += sym.type.size_bytes
                        members.append(sym)
                elif t.kind == "kw" and t.text == "proc":
                    fn = self.parse_func(struct=name)
                    if fn.name in taken:
                        raise self._error(fn.pos, f"duplicate member '{fn.name}'")
                    taken.add(fn.name)
                    methods.append(fn)
                else:
                    raise self._error_here(
                        f"expected a member or method, found {self._shown(t)}")
            except _Resync:
                self._sync_stmt()
        self._expect("punct", "}")
        self._accept("punct", ";")
        self.struct_sizes[name] = offset
        struct = StructDef(name, members, methods, offset, pos=(kw.line, kw.col))
        self.structs[name] = struct
        return struct

    def parse_func(self, struct: str | None = None) -> FuncDef:
        kw = self._expect("kw", "proc")
        name_tok = self._expect("id", what="a function name")
        self._expect("punct", "(")
        params: list[Symbol] = []
        if not self._at("punct", ")"):
            while True:
                ptok = self._expect("id", what="a parameter name")
                ptype = TYPE_INT
                if self._accept("punct", ":"):
                    ptype, p_ext = self.parse_type_spec()
                    if p_ext:
                        raise self._error((ptok.line, ptok.col),
                                          "extern is only allowed at module scope")
                if any(p.name == ptok.text for p in params):
                    raise self._error((ptok.line, ptok.col),
                                      f"duplicate parameter '{ptok.text}'")
                params.append(Symbol(ptok.text, Storage.PARAM, ptype,
                                     pos=(ptok.line, ptok.col)))
                if not self._accept("punct", ","):
                    break
        self._expect("punct", ")")
        body = self.parse_block()
        return FuncDef(name_tok.text, params, body, struct=struct,
                       pos=(kw.line, kw.col))

    # -------------------------------------------------------- statements

    def parse_block(self) -> Block:
        open_tok = self._expect("punct", "{")
        stmts: list = []
        while not self._at("punct", "}") and not self._at_end():
            try:
                stmts.append(self.parse_stmt())
            except _Resync:
                self._sync_stmt()
        self._expect("punct", "}")
        return Block(stmts, pos=(open_tok.line, open_tok.col))

    def parse_stmt(self):
        t = self._peek()
        if t.kind == "punct" and t.text == "{":
            return self.parse_block()
        if t.kind == "punct" and t.text == ";":
            self._advance()
            return Block([], pos=(t.line, t.col))
        if t.kind == "kw":
            if t.text == "var":
                return self.parse_var_decl(Storage.LOCAL)
            if t.text == "if":
                self._advance()
                self._expect("punct", "(")
                cond = self.parse_expr()
                self._expect("punct", ")")
                then = self.parse_stmt()
                orelse = None
                if self._accept("kw", "else"):
                    orelse = self.parse_stmt()
                return If(cond, then, orelse, pos=(t.line, t.col))
            if t.text == "while":
                self._advance()
                self._expect("punct", "(")
                cond = self.parse_expr()
                self._expect("punct", ")")
                body = self.parse_stmt()
                return While(cond, body, pos=(t.line, t.col))
            if t.text == "for":
                self._advance()
                self._expect("punct", "(")
                init = None if self._at("punct", ";") else self.parse_expr()
                self._expect("punct", ";")
                cond = None if self._at("punct", ";") else self.parse_expr()
                self._expect("punct", ";")
                step = None if self._at("punct", ")") else self.parse_expr()
                self._expect("punct", ")")
                body = self.parse_stmt()
                return For(init, cond, step, body, pos=(t.line, t.col))
            if t.text == "return":
                self._advance()
                value = None if self._at("punct", ";") else self.parse_expr()
                self._expect("punct", ";")
                return Return(value, pos=(t.line, t.col))
            if t.text == "break":
                self._advance()
                self._expect("punct", ";")
                return Break(pos=(t.line, t.col))
            if t.text == "continue":
                self._advance()
                self._expect("punct", ";")
                return Continue(pos=(t.line, t.col))
        expr = self.parse_expr()
        self._expect("punct", ";")
        return ExprStmt(expr, pos=(t.line, t.col))

    # ------------------------------------------------------- expressions

    def parse_expr(self):
        left = self._parse_binary(0)
        eq = self._accept("punct", "=")
        if eq:
            value = self.parse_expr()
            return Assign(left, value, pos=(eq.line, eq.col))
        return left

    def _parse_binary(self, level: int):
        if level == len(_BINARY_LEVELS):
            return self._parse_unary()
        left = self._parse_binary(level + 1)
        ops = _BINARY_LEVELS[level]
        while True:
            t = self._peek()
            if t.kind == "punct" and t.text in ops:
                self._advance()
                right = self._parse_binary(level + 1)
                left = Binary(t.text, left, right, pos=(t.line, t.col))
            else:
                return left

    def _parse_unary(self):
        t = self._peek()
        if t.kind == "punct" and t.text in _UNARY_OPS:
            self._advance()
            return Unary(t.text, self._parse_unary(), pos=(t.line, t.col))
        return self._parse_postfix()

    def _parse_postfix(self):
        e = self._parse_primary()
        while True:
            t = self._peek()
            if t.kind != "punct":
                return e
            if t.text == "(":
                self._advance()
                args: list = []
                if not self._at("punct", ")"):
                    while True:
                        args.append(self.parse_expr())
                        if not self._accept("punct", ","):
                            break
                self._expect("punct", ")")
                e = Call(e, args, pos=(t.line, t.col))
            elif t.text == "[":
                self._advance()
                idx = self.parse_expr()
                self._expect("punct", "]")
                e = Index(e, idx, pos=(t.line, t.col))
            elif t.text == ".":
                self._advance()
                name = self._expect("id", what="a member name")
                e = Member(e, name.text, pos=(name.line, name.col))
            elif t.text in ("++", "--"):
                self._advance()
                e = PostIncDec(t.text, e, pos=(t.line, t.col))
            else:
                return e

    def _parse_primary(self):
        t = self._peek()
        if t.kind == "num":
            self._advance()
            return NumberLit(t.value, pos=(t.line, t.col))
        if t.kind == "str":
            self._advance()
            return StringLit(t.value, pos=(t.line, t.col))
        if t.kind == "chr":
            self._advance()
            return CharLit(t.value, pos=(t.line, t.col))
        if t.kind == "id":
            self._advance()
            return Identifier(t.text, pos=(t.line, t.col))
        if t.kind == "punct" and t.text == "(":
            self._advance()
            e = self.parse_expr()
            self._expect("punct", ")")
            return e
        raise self._error_here(f"expected an expression, found {self._shown(t)}")


def parse_program(
    tokens: list[Token],
    filename: str = "<input>",
    origin: Callable[[int], tuple[str, int]] | None = None,
) -> Module:
    return Parser(tokens, filename, origin).parse_program()


def parse_var_declaration(
    tokens: list[Token],
    cursor: int = 0,
    *,
    filename: str = "<input>",
    struct_sizes: dict[str, int] | None = None,
    origin: Callable[[int], tuple[str, int]] | None = None,
) -> tuple[list[Symbol], int]:
    """Parse one `var` declaration starting at tokens[cursor]. Returns the
    declared symbols and the cursor just past the closing `;`."""
    p = Parser(tokens, filename, origin)
    if struct_sizes:
        p.struct_sizes.update(struct_sizes)
    p.pos = cursor
    try:
        decl = p.parse_var_decl(Storage.GLOBAL)
    except _Resync:
        raise CompileError(p.diags)
    if p.diags:
        raise CompileError(p.diags)
    return decl.symbols, p.pos
