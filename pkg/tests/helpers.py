"""Shared pipeline shorthands and independent oracles for the test suite."""

from __future__ import annotations

from pathlib import Path

from uplnc import (
    RunResult,
    expand_text,
    interpret,
    lower,
    parse_program,
    resolve_and_check,
    tokenize,
)

PROGRAMS = Path(__file__).parent / "programs"

PRIMES_BANNER = "Calculating the primes>=3...\nu"


def front(text: str, filename: str = "<test>"):
    """Preprocess, tokenize, parse, and check; returns the checked module."""
    pp = expand_text(text, filename=filename)
    tokens = tokenize(pp.text, filename, pp.origin)
    module = parse_program(tokens, filename, pp.origin)
    return resolve_and_check(module, filename, pp.origin)


def compile_ir(text: str, filename: str = "<test>"):
    return lower(front(text, filename))


def run_text(text: str, argv=(), stdin: str = "", max_steps=None) -> RunResult:
    return interpret(compile_ir(text), argv=argv, stdin=stdin, max_steps=max_steps)


def file_tokens(path: Path):
    text = path.read_text()
    pp = expand_text(text, filename=str(path), include_dir=path.parent)
    return tokenize(pp.text, str(path), pp.origin)


def sieve_primes(limit: int) -> list[int]:
    """Plain sieve of Eratosthenes, the reference for every primes check."""
    composite = bytearray(limit + 1)
    out = []
    for n in range(2, limit + 1):
        if composite[n]:
            continue
        out.append(n)
        for m in range(n * n, limit + 1, n):
            composite[m] = 1
    return out


def parse_primes_output(stdout: str) -> list[int]:
    assert stdout.startswith(PRIMES_BANNER), f"unexpected banner: {stdout[:60]!r}"
    rest = stdout[len(PRIMES_BANNER):]
    return [int(part) for part in rest.split("\n") if part]
