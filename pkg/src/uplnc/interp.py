"""IR interpreter over byte-addressable simulated memory.

Serves as the reference for what compiled programs must do: same 32-bit
wrap-around arithmetic, same truncating signed division, same frame layout
(parameter i at ebp + 8 + 4i, locals below ebp), same cdecl stack
discipline. Loads of 1 byte zero-extend. Little-endian throughout.

Memory map: a reserved low region so that address 0 and small offsets
fault, then globals (externs too: with no linker in the picture they get
zero-filled storage here), then the string pool and the argv area, with
the stack descending from the top.

printf/putchar/getchar/exit are built in; printf supports %d %u %x %c %s
and %%. Any memory access outside the map, division by zero, or a call to
an unknown extern raises RuntimeFault naming the function and the index
of the offending instruction.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ir import Const, Instr, IrFunction, IrModule, Op, Temp

MASK = 0xFFFFFFFF
RESERVED = 0x1000
DEFAULT_MEMORY = 4 * 1024 * 1024


def _s32(v: int) -> int:
    v &= MASK
    return v - 0x100000000 if v & 0x80000000 else v


def sdiv(a: int, b: int) -> int:
    """Signed 32-bit division truncating toward zero, like idivl."""
    sa, sb = _s32(a), _s32(b)
    q = sa // sb
    if q < 0 and q * sb != sa:
        q += 1
    return q & MASK


def smod(a: int, b: int) -> int:
    """Remainder with the dividend's sign, consistent with sdiv."""
    sa, sb = _s32(a), _s32(b)
    q = sa // sb
    if q < 0 and q * sb != sa:
        q += 1
    return (sa - q * sb) & MASK


class RuntimeFault(Exception):
    def __init__(self, function: str, index: int, message: str):
        self.function = function
        self.index = index
        self.message = message
        super().__init__(f"fault in {function} at instruction {index}: {message}")


@dataclass
class RunResult:
    exit_code: int
    stdout: str

    def __iter__(self):
        return iter((self.exit_code, self.stdout))


class _Exit(Exception):
    def __init__(self, code: int):
        self.code = code


class _Frame:
    __slots__ = ("fn", "labels", "temps", "ip", "ebp", "resume_sp", "ret_dst")

    def __init__(self, fn: IrFunction, labels: dict[int, int], ebp: int,
                 resume_sp: int, ret_dst: Temp | None):
        self.fn = fn
        self.labels = labels
        self.temps = [0] * fn.temp_count
        self.ip = 0
        self.ebp = ebp
        self.resume_sp = resume_sp
        self.ret_dst = ret_dst


class _Machine:
    def __init__(self, ir: IrModule, memory_size: int, stdin: str,
                 max_steps: int | None):
        self.ir = ir
        self.mem = bytearray(memory_size)
        self.size = memory_size
        self.stdin = stdin.encode("latin-1", "replace")
        self.stdin_pos = 0
        self.out: list[str] = []
        self.max_steps = max_steps
        self.steps = 0
        self.where: tuple[str, int] = ("<start>", 0)
        self._labels: dict[int, dict[int, int]] = {}

        cursor = RESERVED
        self.addresses: dict[str, int] = {}
        for g in ir.globals:
            cursor = (cursor + 3) & ~3
            self.addresses[g.name] = cursor
            cursor += g.size
        for label, data in ir.strings:
            self.addresses[label] = cursor
            cursor += len(data)
            self.mem[self.addresses[label]:cursor] = data
        self.static_end = cursor
        self.sp = memory_size

    # ------------------------------------------------------------ faults

    def _fault(self, message: str) -> RuntimeFault:
        fn, idx = self.where
        return RuntimeFault(fn, idx, message)

    # ------------------------------------------------------------ memory

    def _check(self, addr: int, size: int) -> None:
        if addr < RESERVED or addr + size > self.size:
            raise self._fault(f"memory access out of bounds at address {addr:#x}")

    def load(self, addr: int, size: int) -> int:
        self._check(addr, size)
        if size == 1:
            return self.mem[addr]
        return int.from_bytes(self.mem[addr:addr + 4], "little")

    def store(self, addr: int, size: int, value: int) -> None:
        self._check(addr, size)
        if size == 1:
            self.mem[addr] = value & 0xFF
        else:
            self.mem[addr:addr + 4] = (value & MASK).to_bytes(4, "little")

    def read_cstring(self, addr: int) -> bytes:
        end = self.mem.find(b"\0", addr)
        if addr < RESERVED or end < 0:
            raise self._fault(f"bad string address {addr:#x}")
        return bytes(self.mem[addr:end])

    def write_block(self, addr: int, data: bytes) -> None:
        self.mem[addr:addr + len(data)] = data

    # ------------------------------------------------------------- stack

    def push(self, value: int) -> None:
        self.sp -= 4
        if self.sp < self.static_end:
            raise self._fault("stack overflow")
        self.store(self.sp, 4, value)

    # ---------------------------------------------------------- builtins

    def _builtin(self, name: str, args: list[int]) -> int:
        if name == "printf":
            return self._printf(args)
        if name == "putchar":
            if not args:
                raise self._fault("putchar needs an argument")
            self.out.append(chr(args[0] & 0xFF))
            return args[0]
        if name == "getchar":
            if self.stdin_pos >= len(self.stdin):
                return MASK   # end of input reads as -1
            b = self.stdin[self.stdin_pos]
            self.stdin_pos += 1
            return b
        if name == "exit":
            raise _Exit(args[0] if args else 0)
        raise self._fault(f"call to unknown extern function '{name}'")

    def _printf(self, args: list[int]) -> int:
        if not args:
            raise self._fault("printf needs a format string")
        fmt = self.read_cstring(args[0]).decode("latin-1")
        out: list[str] = []
        ai = 1

        def next_arg() -> int:
            nonlocal ai
            if ai >= len(args):
                raise self._fault("printf: not enough arguments for format")
            v = args[ai]
            ai += 1
            return v

        i = 0
        while i < len(fmt):
            c = fmt[i]
            if c != "%":
                out.append(c)
                i += 1
                continue
            if i + 1 >= len(fmt):
                raise self._fault("printf: format string ends inside a conversion")
            conv = fmt[i + 1]
            i += 2
            if conv == "%":
                out.append("%")
            elif conv == "d":
                out.append(str(_s32(next_arg())))
            elif conv == "u":
                out.append(str(next_arg() & MASK))
            elif conv == "x":
                out.append(format(next_arg() & MASK, "x"))
            elif conv == "c":
                out.append(chr(next_arg() & 0xFF))
            elif conv == "s":
                out.append(self.read_cstring(next_arg()).decode("latin-1"))
            else:
                raise self._fault(f"printf: unsupported conversion '%{conv}'")
        text = "".join(out)
        self.out.append(text)
        return len(text)

    # ------------------------------------------------------------ values

    def _labels_for(self, fn: IrFunction) -> dict[int, int]:
        cached = self._labels.get(id(fn))
        if cached is None:
            cached = {ins.label: i for i, ins in enumerate(fn.body)
                      if ins.op is Op.LABEL}
            self._labels[id(fn)] = cached
        return cached

    def _enter(self, fn: IrFunction, ret_dst: Temp | None,
               resume_sp: int) -> _Frame:
        self.sp -= 8                  # return-address and saved-ebp slots
        if self.sp < self.static_end:
            raise self._fault("stack overflow")
        ebp = self.sp
        self.sp -= fn.frame_size
        if self.sp < self.static_end:
            raise self._fault("stack overflow")
        return _Frame(fn, self._labels_for(fn), ebp, resume_sp, ret_dst)

    # -------------------------------------------------------------- run

    def run(self, entry: str, argv: tuple[str, ...]) -> RunResult:
        fn = self.ir.function(entry)
        if fn is None:
            raise RuntimeFault(entry, 0, f"entry function '{entry}' is not defined")

        if fn.param_count > 0:
            argv_ptr = self._materialize_argv(argv)
            incoming = [len(argv), argv_ptr] + [0] * max(0, fn.param_count - 2)
            for value in reversed(incoming[:fn.param_count]):
                self.push(value)

        frame = self._enter(fn, None, self.size)
        frames = [frame]
        final = 0
        try:
            final = self._loop(frames)
        except _Exit as e:
            final = e.code
        return RunResult(_s32(final), "".join(self.out))

    def _materialize_argv(self, argv: tuple[str, ...]) -> int:
        cursor = (self.static_end + 3) & ~3
        pointers: list[int] = []
        for arg in argv:
            data = arg.encode("latin-1", "replace") + b"\0"
            self.write_block(cursor, data)
            pointers.append(cursor)
            cursor += len(data)
        cursor = (cursor + 3) & ~3
        table = cursor
        for p in pointers + [0]:
            self.store(cursor, 4, p)
            cursor += 4
        self.static_end = cursor
        return table

    def _loop(self, frames: list[_Frame]) -> int:
        while frames:
            fr = frames[-1]
            body = fr.fn.body
            if fr.ip >= len(body):
                self.where = (fr.fn.name, fr.ip)
                raise self._fault("execution ran off the end of the function")
            idx = fr.ip
            ins = body[idx]
            self.where = (fr.fn.name, idx)
            self.steps += 1
            if self.max_steps is not None and self.steps > self.max_steps:
                raise self._fault("step limit exceeded")

            op = ins.op
            temps = fr.temps

            if op is Op.LABEL:
                fr.ip = idx + 1
                continue
            if op is Op.JUMP:
                fr.ip = fr.labels[ins.label]
                continue
            if op is Op.BZ:
                if self._value(fr, ins.a) == 0:
                    fr.ip = fr.labels[ins.label]
                else:
                    fr.ip = idx + 1
                continue
            if op is Op.CONST or op is Op.MOVE:
                temps[ins.dst.index] = self._value(fr, ins.a)
            elif op is Op.LOAD:
                temps[ins.dst.index] = self.load(self._value(fr, ins.a), ins.size)
            elif op is Op.STORE:
                self.store(self._value(fr, ins.a), ins.size, self._value(fr, ins.b))
            elif op is Op.ADDR_GLOBAL:
                addr = self.addresses.get(ins.name)
                if addr is None:
                    raise self._fault(f"unresolved global '{ins.name}'")
                temps[ins.dst.index] = addr
            elif op is Op.ADDR_FRAME:
                temps[ins.dst.index] = (fr.ebp + _s32(self._value(fr, ins.a))) & MASK
            elif op is Op.ADD:
                temps[ins.dst.index] = (self._value(fr, ins.a) + self._value(fr, ins.b)) & MASK
            elif op is Op.SUB:
                temps[ins.dst.index] = (self._value(fr, ins.a) - self._value(fr, ins.b)) & MASK
            elif op is Op.MUL:
                temps[ins.dst.index] = (self._value(fr, ins.a) * self._value(fr, ins.b)) & MASK
            elif op is Op.DIV or op is Op.MOD:
                a = self._value(fr, ins.a)
                b = self._value(fr, ins.b)
                if _s32(b) == 0:
                    raise self._fault("division by zero")
                temps[ins.dst.index] = sdiv(a, b) if op is Op.DIV else smod(a, b)
            elif op is Op.AND:
                temps[ins.dst.index] = self._value(fr, ins.a) & self._value(fr, ins.b)
            elif op is Op.OR:
                temps[ins.dst.index] = self._value(fr, ins.a) | self._value(fr, ins.b)
            elif op is Op.XOR:
                temps[ins.dst.index] = self._value(fr, ins.a) ^ self._value(fr, ins.b)
            elif op is Op.NOT:
                temps[ins.dst.index] = (~self._value(fr, ins.a)) & MASK
            elif op is Op.NEG:
                temps[ins.dst.index] = (-self._value(fr, ins.a)) & MASK
            elif op is Op.CMP:
                a = _s32(self._value(fr, ins.a))
                b = _s32(self._value(fr, ins.b))
                temps[ins.dst.index] = int(_COMPARES[ins.cmp](a, b))
            elif op is Op.PUSH_ARG:
                self.push(self._value(fr, ins.a))
            elif op is Op.CALL:
                target = self.ir.function(ins.name)
                if target is None:
                    args = [self.load(self.sp + 4 * i, 4) for i in range(ins.argc)]
                    result = self._builtin(ins.name, args)
                    self.sp += 4 * ins.argc
                    temps[ins.dst.index] = result & MASK
                else:
                    fr.ip = idx + 1
                    # after the return, the caller also pops the arguments
                    resume = self.sp + 4 * ins.argc
                    frames.append(self._enter(target, ins.dst, resume))
                    continue
            elif op is Op.RET:
                value = self._value(fr, ins.a)
                frames.pop()
                self.sp = fr.resume_sp
                if not frames:
                    return value
                caller = frames[-1]
                if fr.ret_dst is not None:
                    caller.temps[fr.ret_dst.index] = value
                continue
            else:
                raise self._fault(f"unknown instruction {op.name}")
            fr.ip = idx + 1
        return 0

    @staticmethod
    def _value(fr: _Frame, operand: Temp | Const) -> int:
        if isinstance(operand, Temp):
            return fr.temps[operand.index]
        return operand.value & MASK


_COMPARES = {
    "eq": lambda a, b: a == b,
    "ne": lambda a, b: a != b,
    "lt": lambda a, b: a < b,
    "le": lambda a, b: a <= b,
    "gt": lambda a, b: a > b,
    "ge": lambda a, b: a >= b,
}


def interpret(
    ir: IrModule,
    entry: str = "main",
    argv: tuple[str, ...] | list[str] = (),
    stdin: str = "",
    memory_size: int = DEFAULT_MEMORY,
    max_steps: int | None = None,
) -> RunResult:
    """Run `entry` and return its value and everything printed. `argv`
    strings are copied into simulated memory and passed as (argc, argv)
    when the entry function declares parameters."""
    machine = _Machine(ir, memory_size, stdin, max_steps)
    return machine.run(entry, tuple(argv))
