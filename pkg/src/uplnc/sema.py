"""Name resolution and type checking.

Walks a parsed module, binds every identifier to a Symbol, computes a type
for every expression node, assigns frame offsets to locals and parameters,
and collects diagnostics. Raises CompileError if any were recorded; on a
clean run every expression node has a non-None type.

Conventions checked here:

- Inside a method the implicit `this` (pointer to the structure) is
  parameter 0; a bare member name resolves through it to the same Symbol
  as the explicit `this.member` form.
- `.` works on a structure value and on a pointer to a structure alike
  (there is no separate arrow operator).
- A called name that was never declared becomes an implicit extern
  function returning int; defined functions get argument-count checking,
  extern ones do not.
- Arrays decay to pointer-to-element in value positions; `&arr` means
  `&arr[0]`.
"""

from __future__ import annotations

from typing import Callable

from .diagnostics import CompileError, Diagnostic
from .nodes import (
    Assign, Binary, Block, Break, Call, CharLit, Continue, ExprStmt, For,
    FuncDef, Identifier, If, Index, Member, Module, NumberLit, PostIncDec,
    Return, StringLit, StructDef, Symbol, Storage, TypeExpr, TYPE_INT,
    Unary, VarDecl, While, decayed, element_of, pointer_to, pointee_of,
    make_type,
)

_PTR_CHAR = TypeExpr(("*",), "char", 4)


class _Scope:
    def __init__(self, parent: "_Scope | None" = None):
        self.names: dict[str, Symbol] = {}
        self.parent = parent

    def declare(self, sym: Symbol) -> bool:
        if sym.name in self.names:
            return False
        self.names[sym.name] = sym
        return True

    def lookup(self, name: str) -> Symbol | None:
        scope: _Scope | None = self
        while scope is not None:
            if name in scope.names:
                return scope.names[name]
            scope = scope.parent
        return None


class Checker:
    def __init__(
        self,
        module: Module,
        filename: str = "<input>",
        origin: Callable[[int], tuple[str, int]] | None = None,
    ):
        self.module = module
        self.origin = origin or (lambda line: (filename, line))
        self.diags: list[Diagnostic] = []
        self.struct_sizes: dict[str, int | None] = {
            name: sd.size for name, sd in module.structs.items()
        }
        self.globals: dict[str, Symbol] = {}
        self.current_fn: FuncDef | None = None
        self.current_struct: StructDef | None = None
        self.frame_cursor = 0
        self.loop_depth = 0

    def _diag(self, pos: tuple[int, int], message: str) -> None:
        line, col = pos
        f, oline = self.origin(line)
        self.diags.append(Diagnostic(f, oline, col, message))

    # ------------------------------------------------------------- entry

    def run(self) -> Module:
        self._collect_module_symbols()
        for fn in self.module.functions():
            self._check_function(fn)
        if self.diags:
            raise CompileError(self.diags)
        self.module.globals = self.globals
        return self.module

    def _collect_module_symbols(self) -> None:
        for item in self.module.items:
            if isinstance(item, VarDecl):
                for sym in item.symbols:
                    self._declare_global(sym)
            elif isinstance(item, FuncDef):
                sym = Symbol(item.name, Storage.GLOBAL, TYPE_INT,
                             location=item.name, is_function=True,
                             func=item, pos=item.pos)
                item.symbol = sym
                self._declare_global(sym)
            elif isinstance(item, StructDef):
                for m in item.methods:
                    m.symbol = Symbol(m.name, Storage.METHOD, TYPE_INT,
                                      location=m.link_name, is_function=True,
                                      func=m, struct=item.name, pos=m.pos)

    def _declare_global(self, sym: Symbol) -> None:
        old = self.globals.get(sym.name)
        if old is not None:
            # repeating an extern declaration of the same type is harmless
            if (old.storage is Storage.EXTERN and sym.storage is Storage.EXTERN
                    and old.type == sym.type and not sym.is_function):
                return
            self._diag(sym.pos, f"redeclaration of '{sym.name}'")
            return
        if sym.location is None:
            sym.location = sym.name
        self.globals[sym.name] = sym

    # --------------------------------------------------------- functions

    def _check_function(self, fn: FuncDef) -> None:
        self.current_fn = fn
        self.current_struct = self.module.structs.get(fn.struct) if fn.struct else None
        if fn.struct:
            already = (fn.params and fn.params[0].name == "this"
                       and fn.params[0].location is not None)
            if not already:
                clash = next((p for p in fn.params if p.name == "this"), None)
                if clash is not None:
                    self._diag(clash.pos, "a method parameter may not be named 'this'")
                else:
                    this_type = make_type(("*",), fn.struct, self.struct_sizes)
                    assert this_type is not None
                    fn.params = [Symbol("this", Storage.PARAM, this_type,
                                        pos=fn.pos)] + fn.params
        scope = _Scope()
        for i, p in enumerate(fn.params):
            p.location = 8 + 4 * i
            if not scope.declare(p):
                self._diag(p.pos, f"duplicate parameter '{p.name}'")
        self.frame_cursor = 0
        self.loop_depth = 0
        self._check_block(fn.body, scope)
        fn.frame_size = self.frame_cursor
        self.current_fn = None
        self.current_struct = None

    def _check_block(self, block: Block, parent: _Scope) -> None:
        scope = _Scope(parent)
        for stmt in block.stmts:
            self._check_stmt(stmt, scope)

    def _check_stmt(self, stmt, scope: _Scope) -> None:
        if isinstance(stmt, VarDecl):
            for sym in stmt.symbols:
                size = (sym.type.size_bytes + 3) & ~3
                self.frame_cursor += size
                sym.location = -self.frame_cursor
                if not scope.declare(sym):
                    self._diag(sym.pos, f"redeclaration of '{sym.name}'")
        elif isinstance(stmt, Block):
            self._check_block(stmt, scope)
        elif isinstance(stmt, If):
            self._check_condition(stmt.cond, scope)
            self._check_stmt(stmt.then, scope)
            if stmt.orelse is not None:
                self._check_stmt(stmt.orelse, scope)
        elif isinstance(stmt, While):
            self._check_condition(stmt.cond, scope)
            self.loop_depth += 1
            self._check_stmt(stmt.body, scope)
            self.loop_depth -= 1
        elif isinstance(stmt, For):
            if stmt.init is not None:
                self._check_expr(stmt.init, scope)
            if stmt.cond is not None:
                self._check_condition(stmt.cond, scope)
            if stmt.step is not None:
                self._check_expr(stmt.step, scope)
            self.loop_depth += 1
            self._check_stmt(stmt.body, scope)
            self.loop_depth -= 1
        elif isinstance(stmt, Return):
            if stmt.value is not None:
                t = decayed(self._check_expr(stmt.value, scope))
                if t.is_struct:
                    self._diag(stmt.pos, "cannot return a structure by value")
        elif isinstance(stmt, Break):
            if self.loop_depth == 0:
                self._diag(stmt.pos, "break outside a loop")
        elif isinstance(stmt, Continue):
            if self.loop_depth == 0:
                self._diag(stmt.pos, "continue outside a loop")
        elif isinstance(stmt, ExprStmt):
            self._check_expr(stmt.expr, scope)
        else:
            raise AssertionError(f"unhandled statement {stmt!r}")

    def _check_condition(self, expr, scope: _Scope) -> None:
        t = decayed(self._check_expr(expr, scope))
        if t.is_struct:
            self._diag(expr.pos, "condition must be a scalar value")

    # ------------------------------------------------------- expressions

    def _lookup(self, name: str, scope: _Scope) -> Symbol | None:
        """Resolution order: enclosing blocks and parameters, then members
        and methods of the enclosing structure, then module scope."""
        sym = scope.lookup(name)
        if sym is not None:
            return sym
        if self.current_struct is not None:
            member = self.current_struct.member(name)
            if member is not None:
                return member
            method = self.current_struct.method(name)
            if method is not None:
                return method.symbol
        return self.globals.get(name)

    def _check_expr(self, e, scope: _Scope) -> TypeExpr:
        t = self._infer(e, scope)
        e.type = t
        return t

    def _infer(self, e, scope: _Scope) -> TypeExpr:
        if isinstance(e, NumberLit):
            return TYPE_INT
        if isinstance(e, CharLit):
            # character literals have int type, like their arithmetic uses
            return TYPE_INT
        if isinstance(e, StringLit):
            return _PTR_CHAR
        if isinstance(e, Identifier):
            sym = self._lookup(e.name, scope)
            if sym is None:
                self._diag(e.pos, f"undeclared name '{e.name}'")
                return TYPE_INT
            if sym.is_function:
                self._diag(e.pos, f"function name '{e.name}' used as a value")
                return TYPE_INT
            e.symbol = sym
            return sym.type
        if isinstance(e, Unary):
            return self._infer_unary(e, scope)
        if isinstance(e, Binary):
            return self._infer_binary(e, scope)
        if isinstance(e, Assign):
            return self._infer_assign(e, scope)
        if isinstance(e, PostIncDec):
            t = decayed(self._check_expr(e.target, scope))
            if not self._is_lvalue(e.target):
                self._diag(e.pos, f"target of '{e.op}' is not assignable")
            elif not t.is_scalar:
                self._diag(e.pos, f"'{e.op}' needs an integer or pointer")
            return t
        if isinstance(e, Index):
            return self._infer_index(e, scope)
        if isinstance(e, Member):
            return self._infer_member(e, scope)
        if isinstance(e, Call):
            return self._infer_call(e, scope)
        raise AssertionError(f"unhandled expression {e!r}")

    def _infer_unary(self, e: Unary, scope: _Scope) -> TypeExpr:
        if e.op == "&":
            t = self._check_expr(e.operand, scope)
            if not self._is_lvalue(e.operand) and not t.is_array:
                self._diag(e.pos, "cannot take the address of this expression")
                return _PTR_CHAR
            if t.is_array:
                return pointer_to(element_of(t))
            return pointer_to(t)
        t = decayed(self._check_expr(e.operand, scope))
        if e.op == "*":
            if not t.is_pointer:
                self._diag(e.pos, "cannot dereference a non-pointer")
                return TYPE_INT
            pointee = pointee_of(t, self.struct_sizes)
            if pointee is None:
                self._diag(e.pos, "pointer to an incomplete type")
                return TYPE_INT
            return pointee
        if t.is_struct:
            self._diag(e.pos, f"'{e.op}' needs a scalar operand")
            return TYPE_INT
        if e.op in ("-", "~") and t.is_pointer:
            self._diag(e.pos, f"'{e.op}' does not apply to a pointer")
        return TYPE_INT

    def _infer_binary(self, e: Binary, scope: _Scope) -> TypeExpr:
        lt = decayed(self._check_expr(e.left, scope))
        rt = decayed(self._check_expr(e.right, scope))
        if lt.is_struct or rt.is_struct:
            self._diag(e.pos, "structure value not allowed in arithmetic")
            return TYPE_INT
        op = e.op
        if op == "+":
            if lt.is_pointer and rt.is_pointer:
                self._diag(e.pos, "cannot add two pointers")
                return TYPE_INT
            if lt.is_pointer:
                return lt
            if rt.is_pointer:
                return rt
            return TYPE_INT
        if op == "-":
            if lt.is_pointer and rt.is_pointer:
                # byte distance between the two addresses
                return TYPE_INT
            if lt.is_pointer:
                return lt
            if rt.is_pointer:
                self._diag(e.pos, "cannot subtract a pointer from an integer")
            return TYPE_INT
        if op in ("*", "/", "%", "&", "|", "^"):
            if lt.is_pointer or rt.is_pointer:
                self._diag(e.pos, f"'{op}' needs integer operands")
            return TYPE_INT
        # comparisons and logical connectives yield 0 or 1
        return TYPE_INT

    def _infer_assign(self, e: Assign, scope: _Scope) -> TypeExpr:
        tt = self._check_expr(e.target, scope)
        vt = decayed(self._check_expr(e.value, scope))
        if not self._is_lvalue(e.target):
            self._diag(e.pos, "target of assignment is not assignable")
            return tt if tt is not None else TYPE_INT
        if tt.is_array:
            self._diag(e.pos, "cannot assign to an array")
        elif tt.is_struct:
            self._diag(e.pos, "structure assignment is not supported")
        elif vt.is_struct:
            self._diag(e.pos, "cannot assign a structure value")
        return tt

    def _infer_index(self, e: Index, scope: _Scope) -> TypeExpr:
        bt = decayed(self._check_expr(e.base, scope))
        it = decayed(self._check_expr(e.index, scope))
        if it.is_struct or it.is_array:
            self._diag(e.pos, "index must be an integer")
        if not bt.is_pointer:
            self._diag(e.pos, "indexed expression is not an array or pointer")
            return TYPE_INT
        elem = pointee_of(bt, self.struct_sizes)
        if elem is None:
            self._diag(e.pos, "pointer to an incomplete type")
            return TYPE_INT
        return elem

    def _struct_of(self, t: TypeExpr) -> StructDef | None:
        """Structure reached by `.`: a structure value or a pointer to one."""
        if t.is_struct:
            return self.module.structs.get(t.base)
        if t.is_pointer and not t.ctors[1:] and t.base not in ("int", "char"):
            return self.module.structs.get(t.base)
        return None

    def _infer_member(self, e: Member, scope: _Scope) -> TypeExpr:
        bt = self._check_expr(e.base, scope)
        sd = self._struct_of(bt)
        if sd is None:
            self._diag(e.pos, "member access on a non-structure value")
            return TYPE_INT
        member = sd.member(e.name)
        if member is None:
            if sd.method(e.name) is not None:
                self._diag(e.pos, f"method '{e.name}' used as a value")
            else:
                self._diag(e.pos, f"structure '{sd.name}' has no member '{e.name}'")
            return TYPE_INT
        e.symbol = member
        return member.type

    def _infer_call(self, e: Call, scope: _Scope) -> TypeExpr:
        callee: Symbol | None = None
        f = e.func
        if isinstance(f, Identifier):
            sym = self._lookup(f.name, scope)
            if sym is None:
                # undeclared callee: an extern function returning int
                sym = Symbol(f.name, Storage.EXTERN, TYPE_INT,
                             location=f.name, is_function=True, pos=f.pos)
                self.globals[f.name] = sym
            if not sym.is_function:
                self._diag(e.pos, f"called object '{f.name}' is not a function")
                sym = None
            elif sym.storage is Storage.METHOD:
                if self.current_struct is None or sym.struct != self.current_struct.name:
                    self._diag(e.pos, f"method '{f.name}' called without an instance")
                    sym = None
            f.symbol = sym
            f.type = TYPE_INT
            callee = sym
        elif isinstance(f, Member):
            bt = self._check_expr(f.base, scope)
            sd = self._struct_of(bt)
            if sd is None:
                self._diag(e.pos, "method call on a non-structure value")
            else:
                m = sd.method(f.name)
                if m is None:
                    self._diag(e.pos, f"structure '{sd.name}' has no method '{f.name}'")
                else:
                    callee = m.symbol
            f.symbol = callee
            f.type = TYPE_INT
        else:
            self._diag(e.pos, "called expression is not a function name")

        for arg in e.args:
            at = decayed(self._check_expr(arg, scope))
            if at.is_struct:
                self._diag(arg.pos, "cannot pass a structure by value")

        if callee is not None and callee.func is not None:
            declared = len(callee.func.params)
            if callee.storage is Storage.METHOD:
                declared -= 1   # `this` is supplied by the call form
            if len(e.args) != declared:
                self._diag(e.pos, f"'{callee.name}' expects {declared} "
                                  f"argument(s), got {len(e.args)}")
        e.callee = callee
        return TYPE_INT

    def _is_lvalue(self, e) -> bool:
        if isinstance(e, Identifier):
            return e.symbol is not None and not e.symbol.is_function
        if isinstance(e, Index):
            return True
        if isinstance(e, Member):
            return e.symbol is not None
        if isinstance(e, Unary):
            return e.op == "*"
        return False


def resolve_and_check(
    module: Module,
    filename: str = "<input>",
    origin: Callable[[int], tuple[str, int]] | None = None,
) -> Module:
    """Check `module` in place and return it. Raises CompileError carrying
    every diagnostic found."""
    return Checker(module, filename, origin).run()
