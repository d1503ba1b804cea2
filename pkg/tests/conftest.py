from __future__ import annotations

import shutil
import subprocess

import pytest

from uplnc.codegen import emit_assembly
from helpers import compile_ir


def _probe_native_32bit(tmp_path) -> bool:
    """Can we assemble, link, and run a 32-bit executable here? Needs gcc
    with -m32 and a 32-bit C runtime installed."""
    if shutil.which("gcc") is None:
        return False
    unit = emit_assembly(compile_ir("proc main() { return 42; }"))
    asm = tmp_path / "probe.s"
    asm.write_text(unit.text)
    exe = tmp_path / "probe"
    link = subprocess.run(
        ["gcc", "-m32", "-no-pie", str(asm), "-o", str(exe)],
        capture_output=True)
    if link.returncode != 0:
        return False
    try:
        run = subprocess.run([str(exe)], capture_output=True, timeout=10)
    except OSError:
        return False
    return run.returncode == 42


@pytest.fixture(scope="session")
def native_32bit(tmp_path_factory) -> bool:
    return _probe_native_32bit(tmp_path_factory.mktemp("native-probe"))


@pytest.fixture(scope="session")
def has_as_32() -> bool:
    if shutil.which("as") is None:
        return False
    probe = subprocess.run(["as", "--32", "-o", "/dev/null"],
                           input=b"\t.text\n", capture_output=True)
    return probe.returncode == 0


@pytest.fixture(scope="session")
def has_gnuplot() -> bool:
    return shutil.which("gnuplot") is not None
