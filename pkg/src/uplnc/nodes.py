"""Syntax tree, type expressions, and symbols.

Types are a chain of constructors over a base: each constructor is either
an array dimension (a positive int) or "*" for one level of indirection,
outermost first. `[3]*char` is ctors=(3, "*") over base "char". Sizes:
int and pointers are 4 bytes, char is 1, a structure is the sum of its
members with no padding, an array multiplies.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping


class Storage(Enum):
    GLOBAL = "global"
    EXTERN = "extern"
    LOCAL = "local"
    PARAM = "param"
    MEMBER = "member"
    METHOD = "method"


@dataclass(frozen=True)
class TypeExpr:
    ctors: tuple = ()        # ints (array dims) and "*", outermost first
    base: str = "int"        # "int" | "char" | structure name
    size_bytes: int = 4

    @property
    def is_pointer(self) -> bool:
        return bool(self.ctors) and self.ctors[0] == "*"

    @property
    def is_array(self) -> bool:
        return bool(self.ctors) and isinstance(self.ctors[0], int)

    @property
    def is_struct(self) -> bool:
        return not self.ctors and self.base not in ("int", "char")

    @property
    def is_scalar(self) -> bool:
        return self.is_pointer or (not self.ctors and not self.is_struct)

    def __str__(self) -> str:
        parts = [f"[{c}]" if isinstance(c, int) else "*" for c in self.ctors]
        return "".join(parts) + self.base


TYPE_INT = TypeExpr((), "int", 4)
TYPE_CHAR = TypeExpr((), "char", 1)


def sizeof(ctors: tuple, base: str, struct_sizes: Mapping[str, int | None]) -> int | None:
    """Byte size of a type, or None when it depends on a structure whose
    size is not known yet (open structure or undeclared name)."""
    if ctors:
        head = ctors[0]
        if head == "*":
            return 4
        inner = sizeof(ctors[1:], base, struct_sizes)
        return None if inner is None else head * inner
    if base == "char":
        return 1
    if base == "int":
        return 4
    return struct_sizes.get(base)


def make_type(ctors: tuple, base: str,
              struct_sizes: Mapping[str, int | None]) -> TypeExpr | None:
    size = sizeof(tuple(ctors), base, struct_sizes)
    if size is None:
        return None
    return TypeExpr(tuple(ctors), base, size)


def pointer_to(t: TypeExpr) -> TypeExpr:
    return TypeExpr(("*",) + t.ctors, t.base, 4)


def element_of(t: TypeExpr) -> TypeExpr:
    """Element type of an array; size is recovered by division since an
    array's size is exactly dim * element size."""
    dim = t.ctors[0]
    return TypeExpr(t.ctors[1:], t.base, t.size_bytes // dim)


def pointee_of(t: TypeExpr, struct_sizes: Mapping[str, int | None]) -> TypeExpr | None:
    return make_type(t.ctors[1:], t.base, struct_sizes)


def decayed(t: TypeExpr) -> TypeExpr:
    """Arrays decay to pointer-to-element in value positions."""
    return pointer_to(element_of(t)) if t.is_array else t


@dataclass
class Symbol:
    name: str
    storage: Storage
    type: TypeExpr
    location: int | str | None = None   # frame/member offset, or link name
    is_function: bool = False
    func: "FuncDef | None" = None       # definition when one exists
    struct: str | None = None           # owning structure for members/methods
    pos: tuple[int, int] = (0, 0)

    @property
    def link_name(self) -> str:
        if self.storage is Storage.METHOD:
            return f"{self.struct}${self.name}"
        return self.name


# ---------------------------------------------------------------- AST


@dataclass
class Module:
    items: list = field(default_factory=list)     # VarDecl | StructDef | FuncDef
    structs: dict = field(default_factory=dict)   # name -> StructDef
    globals: dict = field(default_factory=dict)   # name -> Symbol, set by checking

    def functions(self) -> Iterator["FuncDef"]:
        for item in self.items:
            if isinstance(item, FuncDef):
                yield item
            elif isinstance(item, StructDef):
                yield from item.methods


@dataclass
class VarDecl:
    symbols: list
    pos: tuple[int, int] = (0, 0)


@dataclass
class StructDef:
    name: str
    members: list        # Symbol, storage MEMBER, location = byte offset
    methods: list        # FuncDef with struct set
    size: int = 0
    pos: tuple[int, int] = (0, 0)

    def member(self, name: str) -> Symbol | None:
        for m in self.members:
            if m.name == name:
                return m
        return None

    def method(self, name: str) -> "FuncDef | None":
        for m in self.methods:
            if m.name == name:
                return m
        return None


@dataclass
class FuncDef:
    name: str
    params: list         # Symbol, storage PARAM; methods get `this` prepended
    body: "Block"
    struct: str | None = None
    frame_size: int = 0  # bytes of locals, set by checking
    symbol: Symbol | None = None
    pos: tuple[int, int] = (0, 0)

    @property
    def link_name(self) -> str:
        return f"{self.struct}${self.name}" if self.struct else self.name


@dataclass
class Block:
    stmts: list
    pos: tuple[int, int] = (0, 0)


@dataclass
class If:
    cond: object
    then: object
    orelse: object = None
    pos: tuple[int, int] = (0, 0)


@dataclass
class While:
    cond: object
    body: object
    pos: tuple[int, int] = (0, 0)


@dataclass
class For:
    init: object = None   # expression or None
    cond: object = None
    step: object = None
    body: object = None
    pos: tuple[int, int] = (0, 0)


@dataclass
class Return:
    value: object = None
    pos: tuple[int, int] = (0, 0)


@dataclass
class Break:
    pos: tuple[int, int] = (0, 0)


@dataclass
class Continue:
    pos: tuple[int, int] = (0, 0)


@dataclass
class ExprStmt:
    expr: object
    pos: tuple[int, int] = (0, 0)


@dataclass
class Binary:
    op: str
    left: object
    right: object
    type: TypeExpr | None = None
    pos: tuple[int, int] = (0, 0)


@dataclass
class Unary:
    op: str              # "-" "!" "~" "*" "&"
    operand: object
    type: TypeExpr | None = None
    pos: tuple[int, int] = (0, 0)


@dataclass
class Assign:
    target: object
    value: object
    type: TypeExpr | None = None
    pos: tuple[int, int] = (0, 0)


@dataclass
class PostIncDec:
    op: str              # "++" "--"
    target: object
    type: TypeExpr | None = None
    pos: tuple[int, int] = (0, 0)


@dataclass
class Call:
    func: object         # Identifier or Member
    args: list = field(default_factory=list)
    type: TypeExpr | None = None
    callee: Symbol | None = None   # resolved by checking
    pos: tuple[int, int] = (0, 0)


@dataclass
class Index:
    base: object
    index: object
    type: TypeExpr | None = None
    pos: tuple[int, int] = (0, 0)


@dataclass
class Member:
    base: object
    name: str
    type: TypeExpr | None = None
    symbol: Symbol | None = None   # resolved member
    pos: tuple[int, int] = (0, 0)


@dataclass
class Identifier:
    name: str
    type: TypeExpr | None = None
    symbol: Symbol | None = None
    pos: tuple[int, int] = (0, 0)


@dataclass
class NumberLit:
    value: int
    type: TypeExpr | None = None
    pos: tuple[int, int] = (0, 0)


@dataclass
class CharLit:
    value: int
    type: TypeExpr | None = None
    pos: tuple[int, int] = (0, 0)


@dataclass
class StringLit:
    value: str
    type: TypeExpr | None = None
    pos: tuple[int, int] = (0, 0)


EXPR_TYPES = (Binary, Unary, Assign, PostIncDec, Call, Index, Member,
              Identifier, NumberLit, CharLit, StringLit)

NODE_TYPES = EXPR_TYPES + (Module, VarDecl, StructDef, FuncDef, Block, If,
                           While, For, Return, Break, Continue, ExprStmt)


def _children(node) -> Iterator[object]:
    for f in dataclasses.fields(node):
        v = getattr(node, f.name)
        if isinstance(v, NODE_TYPES):
            yield v
        elif isinstance(v, (list, tuple)):
            for x in v:
                if isinstance(x, NODE_TYPES):
                    yield x


def walk(node) -> Iterator[object]:
    """Every node in the subtree rooted at `node`, preorder."""
    yield node
    for child in _children(node):
        yield from walk(child)


def walk_expressions(node) -> Iterator[object]:
    return (n for n in walk(node) if isinstance(n, EXPR_TYPES))
