"""Compiler toolchain for a small C-family language with a redefinable
surface syntax: preprocessor, front end, linear IR with an interpreter,
i386 assembly emission, a symbol-reference grapher, and a generator for
nested-summation programs."""

from .ccs import CcsSpec, generate_ccs_source, monotone_nested_sum
from .codegen import AsmUnit, emit_assembly
from .diagnostics import CompileError, Diagnostic
from .grapher import RefGraph, build_ref_graph, emit_gnuplot
from .interp import RunResult, RuntimeFault, interpret
from .ir import IrModule, lower
from .lexer import Token, detokenize, tokenize
from .parser import parse_program, parse_var_declaration
from .preproc import (MacroDef, PreprocOutput, Preprocessor, SyntaxRule,
                      apply_syntax_redefinitions, expand_text)
from .sema import resolve_and_check

__version__ = "0.1.0"

__all__ = [
    "AsmUnit", "CcsSpec", "CompileError", "Diagnostic", "IrModule",
    "MacroDef", "PreprocOutput", "Preprocessor", "RefGraph", "RunResult",
    "RuntimeFault", "SyntaxRule", "Token", "apply_syntax_redefinitions",
    "build_ref_graph", "detokenize", "emit_assembly", "emit_gnuplot",
    "expand_text", "generate_ccs_source", "interpret", "lower",
    "monotone_nested_sum", "parse_program", "parse_var_declaration",
    "resolve_and_check", "tokenize", "__version__",
]
