"""i386 assembly emission, AT&T syntax, GNU as dialect.

No register allocation: every IR temporary gets a frame slot below the
locals and each instruction works through %eax/%ecx (%edx for remainders).
Deterministic by construction; the same IrModule always yields the same
bytes. Functions keep their unmangled link names and follow cdecl, so the
output links against C objects with a 32-bit toolchain.

Frame picture after the prologue (offsets from %ebp):

    +8+4i  parameter i
    +4     return address
    +0     saved %ebp
    -N     locals (N = frame_size from checking)
    below  one 4-byte slot per temporary
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import fail
from .ir import Const, Instr, IrFunction, IrModule, Op, Temp
from .interp import _s32

FRAME_CAP = 1 << 20   # a function's locals + temp slots must stay under 1 MiB

_SETCC = {"eq": "sete", "ne": "setne", "lt": "setl",
          "le": "setle", "gt": "setg", "ge": "setge"}

_SIMPLE_ARITH = {Op.ADD: "addl", Op.SUB: "subl", Op.AND: "andl",
                 Op.OR: "orl", Op.XOR: "xorl"}


@dataclass(frozen=True)
class AsmUnit:
    text: str
    functions: tuple[str, ...]


def _escape_string(data: bytes) -> str:
    out = []
    for b in data:
        if b == 0x22:
            out.append('\\"')
        elif b == 0x5C:
            out.append("\\\\")
        elif 32 <= b < 127:
            out.append(chr(b))
        else:
            out.append(f"\\{b:03o}")
    return "".join(out)


class _FunctionEmitter:
    def __init__(self, fn: IrFunction, index: int, lines: list[str]):
        self.fn = fn
        self.prefix = f".L{index}"
        self.lines = lines
        if fn.frame_size + 4 * fn.temp_count > FRAME_CAP:
            fail("<asm>", 1, 1,
                 f"function '{fn.name}': frame would exceed {FRAME_CAP} bytes")

    def _slot(self, t: Temp) -> str:
        off = -(self.fn.frame_size + 4 * (t.index + 1))
        return f"{off}(%ebp)"

    def _emit(self, text: str) -> None:
        self.lines.append(f"\t{text}")

    def _to_reg(self, operand: Temp | Const, reg: str) -> None:
        if isinstance(operand, Const):
            self._emit(f"movl ${_s32(operand.value)}, {reg}")
        else:
            self._emit(f"movl {self._slot(operand)}, {reg}")

    def _store_dst(self, dst: Temp, reg: str = "%eax") -> None:
        self._emit(f"movl {reg}, {self._slot(dst)}")

    def _label(self, n: int) -> str:
        return f"{self.prefix}_{n}"

    def run(self) -> None:
        fn = self.fn
        self.lines.append(f"\t.globl {fn.name}")
        self.lines.append(f"{fn.name}:")
        self._emit("pushl %ebp")
        self._emit("movl %esp, %ebp")
        alloc = fn.frame_size + 4 * fn.temp_count
        if alloc:
            self._emit(f"subl ${alloc}, %esp")
        for ins in fn.body:
            self._instr(ins)
        self.lines.append(f"{self.prefix}_ret:")
        self._emit("movl %ebp, %esp")
        self._emit("popl %ebp")
        self._emit("ret")

    def _instr(self, ins: Instr) -> None:
        op = ins.op
        if op is Op.LABEL:
            self.lines.append(f"{self._label(ins.label)}:")
        elif op is Op.JUMP:
            self._emit(f"jmp {self._label(ins.label)}")
        elif op is Op.BZ:
            self._to_reg(ins.a, "%eax")
            self._emit("testl %eax, %eax")
            self._emit(f"je {self._label(ins.label)}")
        elif op is Op.CONST:
            self._emit(f"movl ${_s32(ins.a.value)}, {self._slot(ins.dst)}")
        elif op is Op.MOVE:
            self._to_reg(ins.a, "%eax")
            self._store_dst(ins.dst)
        elif op is Op.LOAD:
            self._to_reg(ins.a, "%eax")
            if ins.size == 1:
                self._emit("movzbl (%eax), %eax")
            else:
                self._emit("movl (%eax), %eax")
            self._store_dst(ins.dst)
        elif op is Op.STORE:
            self._to_reg(ins.a, "%eax")
            self._to_reg(ins.b, "%ecx")
            if ins.size == 1:
                self._emit("movb %cl, (%eax)")
            else:
                self._emit("movl %ecx, (%eax)")
        elif op is Op.ADDR_GLOBAL:
            self._emit(f"movl ${ins.name}, %eax")
            self._store_dst(ins.dst)
        elif op is Op.ADDR_FRAME:
            self._emit(f"leal {_s32(ins.a.value)}(%ebp), %eax")
            self._store_dst(ins.dst)
        elif op in _SIMPLE_ARITH:
            self._to_reg(ins.a, "%eax")
            self._to_reg(ins.b, "%ecx")
            self._emit(f"{_SIMPLE_ARITH[op]} %ecx, %eax")
            self._store_dst(ins.dst)
        elif op is Op.MUL:
            self._to_reg(ins.a, "%eax")
            self._to_reg(ins.b, "%ecx")
            self._emit("imull %ecx, %eax")
            self._store_dst(ins.dst)
        elif op is Op.DIV or op is Op.MOD:
            self._to_reg(ins.a, "%eax")
            self._to_reg(ins.b, "%ecx")
            self._emit("cltd")
            self._emit("idivl %ecx")
            self._store_dst(ins.dst, "%eax" if op is Op.DIV else "%edx")
        elif op is Op.NOT:
            self._to_reg(ins.a, "%eax")
            self._emit("notl %eax")
            self._store_dst(ins.dst)
        elif op is Op.NEG:
            self._to_reg(ins.a, "%eax")
            self._emit("negl %eax")
            self._store_dst(ins.dst)
        elif op is Op.CMP:
            self._to_reg(ins.a, "%eax")
            self._to_reg(ins.b, "%ecx")
            self._emit("cmpl %ecx, %eax")
            self._emit(f"{_SETCC[ins.cmp]} %al")
            self._emit("movzbl %al, %eax")
            self._store_dst(ins.dst)
        elif op is Op.PUSH_ARG:
            self._to_reg(ins.a, "%eax")
            self._emit("pushl %eax")
        elif op is Op.CALL:
            self._emit(f"call {ins.name}")
            if ins.argc:
                self._emit(f"addl ${4 * ins.argc}, %esp")
            self._store_dst(ins.dst)
        elif op is Op.RET:
            self._to_reg(ins.a, "%eax")
            self._emit(f"jmp {self.prefix}_ret")
        else:
            fail("<asm>", 1, 1, f"no encoding for IR operation {op.name}")


def emit_assembly(ir: IrModule) -> AsmUnit:
    """Render an IrModule to one assembly file. An empty module still gets
    the full section skeleton and assembles cleanly."""
    lines: list[str] = ["\t.text"]
    names: list[str] = []
    for i, fn in enumerate(ir.functions):
        lines.append("")
        _FunctionEmitter(fn, i, lines).run()
        names.append(fn.name)

    lines.append("")
    lines.append("\t.section .rodata")
    for label, data in ir.strings:
        lines.append(f"{label}:")
        # .string appends the terminator; drop the one carried in `data`
        lines.append(f'\t.string "{_escape_string(data[:-1])}"')

    lines.append("")
    lines.append("\t.data")

    lines.append("")
    lines.append("\t.bss")
    for g in ir.globals:
        if g.extern:
            continue   # storage comes from whichever object defines it
        lines.append("\t.align 4")
        lines.append(f"\t.globl {g.name}")
        lines.append(f"{g.name}:")
        lines.append(f"\t.space {g.size}")

    return AsmUnit("\n".join(lines) + "\n", tuple(names))
