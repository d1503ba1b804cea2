"""Command-line driver.

    uplnc -E FILE...             preprocess, print the result
    uplnc -S FILE...             compile to assembly (FILE.s, or -o OUT)
    uplnc -c FILE... [-o OUT]    compile and link via the C toolchain
    uplnc --graph FILE...        symbol-reference graph (FILE.gp, or -o OUT)
    uplnc --run FILE             compile to IR and interpret
    uplnc --ccs K N [-o OUT]     print a nested-summation program

Arguments after a bare `--` are handed to the C compiler when linking.
The linking compiler is `gcc` unless UPLNC_CC says otherwise; `-m32` is
always passed since the emitted assembly is 32-bit. Source files use .e,
headers .he. Exit status: 0 on success, 1 on diagnostics or I/O trouble,
the child's status for -c, and the interpreted program's own (low 8 bits)
for --run.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import tempfile
from pathlib import Path

from .codegen import emit_assembly
from .diagnostics import CompileError
from .grapher import build_ref_graph, emit_gnuplot
from .ccs import generate_ccs_source
from .interp import RuntimeFault, interpret
from .ir import IrModule, lower
from .lexer import tokenize
from .nodes import Module
from .parser import parse_program
from .preproc import PreprocOutput, Preprocessor
from .sema import resolve_and_check


def preprocess_file(path: str | Path) -> PreprocOutput:
    path = Path(path)
    return Preprocessor(include_dir=path.parent).process_file(path)


def compile_front(pp: PreprocOutput, filename: str) -> Module:
    tokens = tokenize(pp.text, filename, pp.origin)
    module = parse_program(tokens, filename, pp.origin)
    return resolve_and_check(module, filename, pp.origin)


def compile_file(path: str | Path) -> tuple[PreprocOutput, Module, IrModule]:
    path = Path(path)
    pp = preprocess_file(path)
    module = compile_front(pp, str(path))
    return pp, module, lower(module)


def _build_arg_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="uplnc",
        description="Compiler driver: preprocess, compile, link, graph, "
                    "interpret, or generate nested-summation programs.")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("-E", action="store_true", dest="preprocess",
                      help="preprocess and print the result")
    mode.add_argument("-S", action="store_true", dest="assemble",
                      help="compile to assembly")
    mode.add_argument("-c", action="store_true", dest="link",
                      help="compile and link into an executable")
    mode.add_argument("--graph", action="store_true",
                      help="write a gnuplot script of global-symbol references")
    mode.add_argument("--run", action="store_true",
                      help="compile and interpret, propagating the exit status")
    mode.add_argument("--ccs", nargs=2, type=int, metavar=("K", "N"),
                      help="print a program summing over K nested indices up to N")
    p.add_argument("-o", dest="output", metavar="OUT", help="output path")
    p.add_argument("files", nargs="*", metavar="FILE", help="source files")
    return p


def _write_or_print(text: str, out_path: str | None, stdout) -> None:
    if out_path:
        Path(out_path).write_text(text)
    else:
        stdout.write(text)


def run_pipeline(argv: list[str], stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr

    extra: list[str] = []
    if "--" in argv:
        split = argv.index("--")
        extra = argv[split + 1:]
        argv = argv[:split]

    args = _build_arg_parser().parse_args(argv)

    try:
        if args.ccs is not None:
            if args.files:
                stderr.write("uplnc: --ccs takes no input files\n")
                return 1
            k, n = args.ccs
            try:
                text = generate_ccs_source(k, n)
            except ValueError as exc:
                stderr.write(f"uplnc: {exc}\n")
                return 1
            _write_or_print(text, args.output, stdout)
            return 0

        if not args.files:
            stderr.write("uplnc: no input files\n")
            return 1
        multi_out_ok = args.link
        if args.output and len(args.files) > 1 and not multi_out_ok:
            stderr.write("uplnc: -o needs a single input file\n")
            return 1

        if args.preprocess:
            for f in args.files:
                pp = preprocess_file(f)
                _write_or_print(pp.text, args.output, stdout)
            return 0

        if args.assemble:
            for f in args.files:
                _, _, ir = compile_file(f)
                unit = emit_assembly(ir)
                out = args.output or str(Path(f).with_suffix(".s"))
                Path(out).write_text(unit.text)
            return 0

        if args.graph:
            for f in args.files:
                pp = preprocess_file(f)
                module = compile_front(pp, str(f))
                script = emit_gnuplot(build_ref_graph(module))
                out = args.output or str(Path(f).with_suffix(".gp"))
                Path(out).write_text(script)
            return 0

        if args.run:
            if len(args.files) != 1:
                stderr.write("uplnc: --run takes exactly one source file\n")
                return 1
            _, _, ir = compile_file(args.files[0])
            try:
                result = interpret(ir)
            except RuntimeFault as fault:
                stderr.write(f"uplnc: {fault}\n")
                return 1
            stdout.write(result.stdout)
            return result.exit_code & 0xFF

        # -c: assemble each unit, then let the C toolchain link them
        cc = os.environ.get("UPLNC_CC", "gcc")
        out = args.output or "a.out"
        with tempfile.TemporaryDirectory(prefix="uplnc-") as tmp:
            asm_files: list[str] = []
            for i, f in enumerate(args.files):
                _, _, ir = compile_file(f)
                unit = emit_assembly(ir)
                asm_path = Path(tmp) / f"{Path(f).stem}_{i}.s"
                asm_path.write_text(unit.text)
                asm_files.append(str(asm_path))
            cmd = [cc, "-m32", "-no-pie", *asm_files, "-o", out, *extra]
            try:
                proc = subprocess.run(cmd)
            except OSError as exc:
                stderr.write(f"uplnc: cannot run '{cc}': {exc}\n")
                return 1
            return proc.returncode

    except CompileError as exc:
        for d in exc.diagnostics:
            stderr.write(f"{d}\n")
        return 1
    except OSError as exc:
        stderr.write(f"uplnc: {exc}\n")
        return 1


def main() -> None:
    sys.exit(run_pipeline(sys.argv[1:]))
