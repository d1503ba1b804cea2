"""Linear intermediate representation and the lowering pass that produces it.

The IR runs over virtual temporaries (no register allocation here or later;
the code generator gives every temp a frame slot). Memory is explicit:
ADDR_FRAME/ADDR_GLOBAL produce addresses, LOAD/STORE move 1 or 4 bytes.
Calls follow the cdecl discipline: arguments are pushed right to left and
the caller cleans them up, so emitted code links against C objects.

Frame layout contract shared with the interpreter and the code generator:
parameter i lives at ebp + 8 + 4*i, locals at the negative offsets handed
out during checking, and a method's `this` is parameter 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, auto

from .nodes import (
    Assign, Binary, Block, Break, Call, CharLit, Continue, ExprStmt, For,
    FuncDef, Identifier, If, Index, Member, Module, NumberLit, PostIncDec,
    Return, StringLit, Storage, Unary, VarDecl, While, decayed, pointee_of,
)


class Op(Enum):
    CONST = auto()        # dst = a (a is Const)
    MOVE = auto()         # dst = a
    LOAD = auto()         # dst = size bytes at address a (1 byte zero-extends)
    STORE = auto()        # size bytes at address a = b
    ADDR_GLOBAL = auto()  # dst = address of global `name`
    ADDR_FRAME = auto()   # dst = frame pointer + label-free immediate a
    ADD = auto()
    SUB = auto()
    MUL = auto()
    DIV = auto()          # signed, truncates toward zero
    MOD = auto()          # remainder, sign follows the dividend
    AND = auto()
    OR = auto()
    XOR = auto()
    NOT = auto()          # bitwise complement of a
    NEG = auto()
    CMP = auto()          # dst = (a <cmp> b) as 0/1, signed compare
    JUMP = auto()
    BZ = auto()           # branch to label when a == 0
    LABEL = auto()
    PUSH_ARG = auto()
    CALL = auto()         # dst = call name with argc stacked args
    RET = auto()


@dataclass(frozen=True)
class Temp:
    index: int

    def __str__(self) -> str:
        return f"t{self.index}"


@dataclass(frozen=True)
class Const:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass
class Instr:
    op: Op
    dst: Temp | None = None
    a: Temp | Const | None = None
    b: Temp | Const | None = None
    name: str | None = None
    label: int | None = None
    argc: int | None = None
    size: int | None = None      # 1 or 4 for LOAD/STORE
    cmp: str | None = None       # eq ne lt le gt ge

    def __str__(self) -> str:
        op = self.op
        if op is Op.CONST or op is Op.MOVE:
            return f"{self.dst} = {self.a}"
        if op is Op.LOAD:
            return f"{self.dst} = load{self.size} [{self.a}]"
        if op is Op.STORE:
            return f"store{self.size} [{self.a}] = {self.b}"
        if op is Op.ADDR_GLOBAL:
            return f"{self.dst} = addr {self.name}"
        if op is Op.ADDR_FRAME:
            return f"{self.dst} = frame {self.a}"
        if op is Op.CMP:
            return f"{self.dst} = cmp {self.cmp} {self.a}, {self.b}"
        if op is Op.JUMP:
            return f"jump L{self.label}"
        if op is Op.BZ:
            return f"bz {self.a}, L{self.label}"
        if op is Op.LABEL:
            return f"L{self.label}:"
        if op is Op.PUSH_ARG:
            return f"push {self.a}"
        if op is Op.CALL:
            return f"{self.dst} = call {self.name}, {self.argc}"
        if op is Op.RET:
            return f"ret {self.a}"
        if op in (Op.NOT, Op.NEG):
            return f"{self.dst} = {op.name.lower()} {self.a}"
        return f"{self.dst} = {op.name.lower()} {self.a}, {self.b}"


@dataclass
class IrFunction:
    name: str               # link name; methods are Struct$method
    frame_size: int         # bytes of locals
    param_count: int
    body: list[Instr] = field(default_factory=list)
    temp_count: int = 0

    def __str__(self) -> str:
        lines = [f"func {self.name} frame={self.frame_size} params={self.param_count}"]
        lines += [f"  {ins}" for ins in self.body]
        return "\n".join(lines)


@dataclass(frozen=True)
class GlobalVar:
    name: str
    size: int
    extern: bool = False


@dataclass
class IrModule:
    functions: list[IrFunction] = field(default_factory=list)
    globals: list[GlobalVar] = field(default_factory=list)
    strings: list[tuple[str, bytes]] = field(default_factory=list)

    def function(self, name: str) -> IrFunction | None:
        for f in self.functions:
            if f.name == name:
                return f
        return None

    def __str__(self) -> str:
        parts = [str(f) for f in self.functions]
        return "\n\n".join(parts)


_CMP_CODES = {"==": "eq", "!=": "ne", "<": "lt", "<=": "le", ">": "gt", ">=": "ge"}
_ARITH_OPS = {"+": Op.ADD, "-": Op.SUB, "*": Op.MUL, "/": Op.DIV, "%": Op.MOD,
              "&": Op.AND, "|": Op.OR, "^": Op.XOR}


class _Lowerer:
    def __init__(self, module: Module):
        self.module = module
        self.struct_sizes = {name: sd.size for name, sd in module.structs.items()}
        self.string_pool: dict[bytes, str] = {}
        self.instrs: list[Instr] = []
        self.temp_count = 0
        self.label_count = 0
        self.loops: list[tuple[int, int]] = []   # (break label, continue label)
        self.fn: FuncDef | None = None

    # --------------------------------------------------------- plumbing

    def _temp(self) -> Temp:
        t = Temp(self.temp_count)
        self.temp_count += 1
        return t

    def _label(self) -> int:
        self.label_count += 1
        return self.label_count

    def _emit(self, op: Op, **kw) -> Instr:
        ins = Instr(op, **kw)
        self.instrs.append(ins)
        return ins

    def _intern_string(self, text: str) -> str:
        data = text.encode("latin-1", "replace") + b"\0"
        label = self.string_pool.get(data)
        if label is None:
            label = f".LC{len(self.string_pool)}"
            self.string_pool[data] = label
        return label

    def _pointee_size(self, t) -> int:
        pointee = pointee_of(decayed(t), self.struct_sizes)
        return pointee.size_bytes if pointee is not None else 1

    @staticmethod
    def _access_size(t) -> int:
        return 1 if (not t.ctors and t.base == "char") else 4

    # -------------------------------------------------------- functions

    def lower_function(self, fn: FuncDef) -> IrFunction:
        self.fn = fn
        self.instrs = []
        self.temp_count = 0
        self.label_count = 0
        self.loops = []
        self._stmt(fn.body)
        self._emit(Op.RET, a=Const(0))   # deterministic fall-off return
        return IrFunction(fn.link_name, fn.frame_size, len(fn.params),
                          self.instrs, self.temp_count)

    # ------------------------------------------------------- statements

    def _stmt(self, s) -> None:
        if isinstance(s, Block):
            for inner in s.stmts:
                self._stmt(inner)
        elif isinstance(s, VarDecl):
            pass   # locals are frame slots; the language has no initializers
        elif isinstance(s, ExprStmt):
            self._expr(s.expr)
        elif isinstance(s, If):
            cond = self._expr(s.cond)
            l_false = self._label()
            self._emit(Op.BZ, a=cond, label=l_false)
            self._stmt(s.then)
            if s.orelse is not None:
                l_end = self._label()
                self._emit(Op.JUMP, label=l_end)
                self._emit(Op.LABEL, label=l_false)
                self._stmt(s.orelse)
                self._emit(Op.LABEL, label=l_end)
            else:
                self._emit(Op.LABEL, label=l_false)
        elif isinstance(s, While):
            l_top = self._label()
            l_end = self._label()
            self._emit(Op.LABEL, label=l_top)
            cond = self._expr(s.cond)
            self._emit(Op.BZ, a=cond, label=l_end)
            self.loops.append((l_end, l_top))
            self._stmt(s.body)
            self.loops.pop()
            self._emit(Op.JUMP, label=l_top)
            self._emit(Op.LABEL, label=l_end)
        elif isinstance(s, For):
            if s.init is not None:
                self._expr(s.init)
            l_cond = self._label()
            l_step = self._label()
            l_end = self._label()
            self._emit(Op.LABEL, label=l_cond)
            if s.cond is not None:
                cond = self._expr(s.cond)
                self._emit(Op.BZ, a=cond, label=l_end)
            # continue jumps to the step, not the condition
            self.loops.append((l_end, l_step))
            self._stmt(s.body)
            self.loops.pop()
            self._emit(Op.LABEL, label=l_step)
            if s.step is not None:
                self._expr(s.step)
            self._emit(Op.JUMP, label=l_cond)
            self._emit(Op.LABEL, label=l_end)
        elif isinstance(s, Return):
            value = self._expr(s.value) if s.value is not None else Const(0)
            self._emit(Op.RET, a=value)
        elif isinstance(s, Break):
            self._emit(Op.JUMP, label=self.loops[-1][0])
        elif isinstance(s, Continue):
            self._emit(Op.JUMP, label=self.loops[-1][1])
        else:
            raise AssertionError(f"unhandled statement {s!r}")

    # ------------------------------------------------------ expressions

    def _expr(self, e) -> Temp | Const:
        if isinstance(e, NumberLit) or isinstance(e, CharLit):
            return Const(e.value)
        if isinstance(e, StringLit):
            label = self._intern_string(e.value)
            t = self._temp()
            self._emit(Op.ADDR_GLOBAL, dst=t, name=label)
            return t
        if isinstance(e, (Identifier, Index, Member)):
            addr = self._addr(e)
            if e.type.is_array or e.type.is_struct:
                return addr   # aggregates are used by address
            return self._load(addr, e.type)
        if isinstance(e, Unary):
            return self._unary(e)
        if isinstance(e, Binary):
            return self._binary(e)
        if isinstance(e, Assign):
            addr = self._addr(e.target)
            value = self._expr(e.value)
            self._emit(Op.STORE, a=addr, b=value, size=self._access_size(e.target.type))
            return value
        if isinstance(e, PostIncDec):
            addr = self._addr(e.target)
            size = self._access_size(e.target.type)
            old = self._temp()
            self._emit(Op.LOAD, dst=old, a=addr, size=size)
            t = decayed(e.target.type)
            delta = self._pointee_size(t) if t.is_pointer else 1
            new = self._temp()
            op = Op.ADD if e.op == "++" else Op.SUB
            self._emit(op, dst=new, a=old, b=Const(delta))
            self._emit(Op.STORE, a=addr, b=new, size=size)
            return old
        if isinstance(e, Call):
            return self._call(e)
        raise AssertionError(f"unhandled expression {e!r}")

    def _load(self, addr: Temp | Const, t) -> Temp:
        dst = self._temp()
        self._emit(Op.LOAD, dst=dst, a=addr, size=self._access_size(t))
        return dst

    def _sym_addr(self, sym) -> Temp:
        dst = self._temp()
        if sym.storage in (Storage.LOCAL, Storage.PARAM):
            self._emit(Op.ADDR_FRAME, dst=dst, a=Const(sym.location))
            return dst
        if sym.storage is Storage.MEMBER:
            # bare member access inside a method: offset from `this`
            this_addr = self._temp()
            self._emit(Op.ADDR_FRAME, dst=this_addr, a=Const(8))
            this_val = self._temp()
            self._emit(Op.LOAD, dst=this_val, a=this_addr, size=4)
            if sym.location == 0:
                return this_val
            self._emit(Op.ADD, dst=dst, a=this_val, b=Const(sym.location))
            return dst
        self._emit(Op.ADDR_GLOBAL, dst=dst, name=sym.link_name)
        return dst

    def _addr(self, e) -> Temp | Const:
        if isinstance(e, Identifier):
            return self._sym_addr(e.symbol)
        if isinstance(e, Unary) and e.op == "*":
            return self._expr(e.operand)
        if isinstance(e, Index):
            base = self._expr(e.base)   # array values are already addresses
            idx = self._expr(e.index)
            scaled = self._scale(idx, e.type.size_bytes)
            dst = self._temp()
            self._emit(Op.ADD, dst=dst, a=base, b=scaled)
            return dst
        if isinstance(e, Member):
            bt = e.base.type
            if bt.is_struct:
                base = self._addr(e.base)
            else:
                base = self._expr(e.base)   # pointer to the structure
            offset = e.symbol.location
            if offset == 0:
                return base
            dst = self._temp()
            self._emit(Op.ADD, dst=dst, a=base, b=Const(offset))
            return dst
        raise AssertionError(f"no address for {e!r}")

    def _scale(self, operand: Temp | Const, factor: int) -> Temp | Const:
        if factor == 1:
            return operand
        if isinstance(operand, Const):
            return Const(operand.value * factor)
        dst = self._temp()
        self._emit(Op.MUL, dst=dst, a=operand, b=Const(factor))
        return dst

    def _unary(self, e: Unary) -> Temp | Const:
        if e.op == "&":
            return self._addr(e.operand)
        if e.op == "*":
            addr = self._expr(e.operand)
            if e.type.is_struct or e.type.is_array:
                return addr
            return self._load(addr, e.type)
        a = self._expr(e.operand)
        dst = self._temp()
        if e.op == "-":
            self._emit(Op.NEG, dst=dst, a=a)
        elif e.op == "~":
            self._emit(Op.NOT, dst=dst, a=a)
        elif e.op == "!":
            self._emit(Op.CMP, dst=dst, a=a, b=Const(0), cmp="eq")
        else:
            raise AssertionError(e.op)
        return dst

    def _binary(self, e: Binary) -> Temp | Const:
        if e.op == "&&":
            return self._logical_and(e)
        if e.op == "||":
            return self._logical_or(e)
        lt = decayed(e.left.type)
        rt = decayed(e.right.type)
        a = self._expr(e.left)
        b = self._expr(e.right)
        dst = self._temp()
        if e.op in _CMP_CODES:
            self._emit(Op.CMP, dst=dst, a=a, b=b, cmp=_CMP_CODES[e.op])
            return dst
        if e.op == "+" and (lt.is_pointer or rt.is_pointer):
            if lt.is_pointer:
                b = self._scale(b, self._pointee_size(lt))
            else:
                a = self._scale(a, self._pointee_size(rt))
            self._emit(Op.ADD, dst=dst, a=a, b=b)
            return dst
        if e.op == "-" and lt.is_pointer:
            if rt.is_pointer:
                # pointer difference is the raw byte distance
                self._emit(Op.SUB, dst=dst, a=a, b=b)
                return dst
            b = self._scale(b, self._pointee_size(lt))
            self._emit(Op.SUB, dst=dst, a=a, b=b)
            return dst
        self._emit(_ARITH_OPS[e.op], dst=dst, a=a, b=b)
        return dst

    def _logical_and(self, e: Binary) -> Temp:
        dst = self._temp()
        l_false = self._label()
        l_end = self._label()
        a = self._expr(e.left)
        self._emit(Op.BZ, a=a, label=l_false)
        b = self._expr(e.right)
        self._emit(Op.BZ, a=b, label=l_false)
        self._emit(Op.CONST, dst=dst, a=Const(1))
        self._emit(Op.JUMP, label=l_end)
        self._emit(Op.LABEL, label=l_false)
        self._emit(Op.CONST, dst=dst, a=Const(0))
        self._emit(Op.LABEL, label=l_end)
        return dst

    def _logical_or(self, e: Binary) -> Temp:
        dst = self._temp()
        l_eval = self._label()
        l_false = self._label()
        l_end = self._label()
        a = self._expr(e.left)
        self._emit(Op.BZ, a=a, label=l_eval)
        self._emit(Op.CONST, dst=dst, a=Const(1))
        self._emit(Op.JUMP, label=l_end)
        self._emit(Op.LABEL, label=l_eval)
        b = self._expr(e.right)
        self._emit(Op.BZ, a=b, label=l_false)
        self._emit(Op.CONST, dst=dst, a=Const(1))
        self._emit(Op.JUMP, label=l_end)
        self._emit(Op.LABEL, label=l_false)
        self._emit(Op.CONST, dst=dst, a=Const(0))
        self._emit(Op.LABEL, label=l_end)
        return dst

    def _call(self, e: Call) -> Temp:
        instance: Temp | Const | None = None
        if isinstance(e.func, Member):
            bt = e.func.base.type
            if bt.is_struct:
                instance = self._addr(e.func.base)
            else:
                instance = self._expr(e.func.base)
        elif e.callee is not None and e.callee.storage is Storage.METHOD:
            # sibling method call: pass our own `this` along
            this_addr = self._temp()
            self._emit(Op.ADDR_FRAME, dst=this_addr, a=Const(8))
            instance = self._temp()
            self._emit(Op.LOAD, dst=instance, a=this_addr, size=4)
        args = [self._expr(arg) for arg in e.args]
        for operand in reversed(args):
            self._emit(Op.PUSH_ARG, a=operand)
        if instance is not None:
            self._emit(Op.PUSH_ARG, a=instance)
        name = e.callee.link_name if e.callee is not None else "<error>"
        dst = self._temp()
        argc = len(args) + (1 if instance is not None else 0)
        self._emit(Op.CALL, dst=dst, name=name, argc=argc)
        return dst


def lower(module: Module) -> IrModule:
    """Lower a checked module to linear IR. Must run after checking: it
    relies on resolved symbols, computed types, and frame offsets."""
    lo = _Lowerer(module)
    functions = [lo.lower_function(fn) for fn in module.functions()]
    globals_list = [
        GlobalVar(sym.link_name, sym.type.size_bytes,
                  extern=sym.storage is Storage.EXTERN)
        for sym in module.globals.values()
        if not sym.is_function
    ]
    strings = [(label, data) for data, label in lo.string_pool.items()]
    return IrModule(functions, globals_list, strings)
