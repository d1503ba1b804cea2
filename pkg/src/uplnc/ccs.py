"""Sums over monotone index tuples, and source generation for the same.

The quantity computed is

    R = sum f(i1, ..., ik)  over  1 <= i1 <= i2 <= ... <= ik <= N

which a nest of k loops visits with i_k outermost (slowest) and i_1
innermost, each inner index bounded by the next one out. The library
evaluator walks the same region iteratively with an odometer: increment
i_1, carry into the next index whenever i_j exceeds its bound, and reset
every lower index to 1. The number of visited tuples is C(N+k-1, k).

`generate_ccs_source` emits a source program whose k nested `for` loops do
the same accumulation and print R, so the generator, the compiler, and the
evaluator can be checked against each other.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

COUNT_BODY = "R=R+1;"

_INDEX_REF = re.compile(r"i\[(\d+)\]")


def _validate(k: int, n: int) -> None:
    if k < 0:
        raise ValueError("k must be >= 0")
    if n < 1:
        raise ValueError("N must be >= 1")


@dataclass(frozen=True)
class CcsSpec:
    k: int
    N: int
    summand: Callable[[tuple[int, ...]], int]

    def __post_init__(self) -> None:
        _validate(self.k, self.N)


def monotone_nested_sum(spec: CcsSpec) -> int:
    """Evaluate the sum. k = 0 means one invocation on the empty tuple."""
    k, n, f = spec.k, spec.N, spec.summand
    if k == 0:
        return f(())
    idx = [1] * k
    total = 0
    while True:
        total += f(tuple(idx))
        j = 0
        idx[0] += 1
        while j < k - 1 and idx[j] > idx[j + 1]:
            j += 1
            idx[j] += 1
        if idx[k - 1] > n:
            return total
        for m in range(j):
            idx[m] = 1


def visit_tuples(k: int, n: int) -> list[tuple[int, ...]]:
    """The tuples in visitation order; mostly useful for checking that the
    odometer agrees with the loop nest."""
    seen: list[tuple[int, ...]] = []
    monotone_nested_sum(CcsSpec(k, n, lambda t: seen.append(t) or 0))
    return seen


def generate_ccs_source(k: int, n: int, body: str = COUNT_BODY) -> str:
    """Emit a source program with k nested for loops accumulating into a
    global R and printing it. `body` is the full accumulation statement;
    it may reference the loop indices as i[0] (innermost) through i[k-1]."""
    _validate(k, n)
    for m in _INDEX_REF.finditer(body):
        if int(m.group(1)) >= k:
            raise ValueError(
                f"body references index i[{m.group(1)}] but k is {k}")

    lines: list[str] = ["var R:int;"]
    if k > 0:
        lines.append(f"var i:[{k}]int;")
    lines += ["", "proc main()", "{", "    R=0;"]
    indent = "    "
    for j in range(k - 1, -1, -1):
        bound = str(n) if j == k - 1 else f"i[{j + 1}]"
        lines.append(f"{indent}for(i[{j}]=1;i[{j}]<={bound};i[{j}]++)")
        indent += "    "
    lines.append(indent + body)
    lines.append('    printf("%d\\n",R);')
    lines.append("    return 0;")
    lines.append("}")
    return "\n".join(lines) + "\n"
