"""Lowering and interpreter tests. The interpreter is the behavioral
reference for the assembly backend, so its own semantics are pinned down
tightly here: 32-bit wrap-around, truncating division, zero-extending
char loads, cdecl argument order, and fault reporting."""

import pytest

from helpers import compile_ir, run_text
from uplnc import RuntimeFault, interpret
from uplnc.ir import Const, Op


# ----------------------------------------------------------------- lowering


def test_return_constant_ir_shape():
    ir = compile_ir("proc main() { return 42; }")
    fn = ir.function("main")
    assert str(fn.body[0]) == "ret 42"
    # the deterministic fall-off return is always appended
    assert str(fn.body[-1]) == "ret 0"


def test_constant_index_is_scaled_at_lowering_time():
    ir = compile_ir("var tab:[5]int;\nproc f() { tab[2] = 1; return 0; }")
    adds = [i for i in ir.function("f").body if i.op is Op.ADD]
    assert any(i.b == Const(8) for i in adds)   # 2 * sizeof(int)


def test_call_pushes_arguments_right_to_left():
    ir = compile_ir("proc main() { printf(\"%d %d\", 10, 20); return 0; }")
    body = ir.function("main").body
    pushes = [i for i in body if i.op is Op.PUSH_ARG]
    assert pushes[0].a == Const(20)
    assert pushes[1].a == Const(10)
    call = next(i for i in body if i.op is Op.CALL)
    assert call.name == "printf" and call.argc == 3


def test_short_circuit_guard_precedes_second_call():
    ir = compile_ir("""
proc f() { return 0; }
proc g() { return 1; }
proc main() { return f() && g(); }
""")
    body = ir.function("main").body
    calls = [n for n, i in enumerate(body) if i.op is Op.CALL]
    branches = [n for n, i in enumerate(body) if i.op is Op.BZ]
    assert len(calls) == 2
    # a branch on f's result sits between the two calls
    assert any(calls[0] < b < calls[1] for b in branches)


def test_string_literals_are_pooled():
    ir = compile_ir("""
proc main()
{
  printf("same");
  printf("same");
  printf("other");
  return 0;
}
""")
    assert len(ir.strings) == 2
    assert {data for _, data in ir.strings} == {b"same\0", b"other\0"}


def test_globals_carry_sizes_and_extern_flags():
    ir = compile_ir("var tab:[1001]int;\nvar extern ext:int;\nvar c:char;\n"
                    "proc main() { return tab[0] + ext + c; }")
    table = {g.name: g for g in ir.globals}
    assert table["tab"].size == 4004 and not table["tab"].extern
    assert table["ext"].size == 4 and table["ext"].extern
    assert table["c"].size == 1


def test_method_lowering_uses_link_names():
    ir = compile_ir("""
struct S { var v:int; proc get() { return v; } }
var s:S;
proc main() { return s.get(); }
""")
    assert ir.function("S$get") is not None
    call = next(i for i in ir.function("main").body if i.op is Op.CALL)
    assert call.name == "S$get" and call.argc == 1   # instance only


# --------------------------------------------------------------- evaluation


def test_return_value_becomes_exit_code():
    assert run_text("proc main() { return 42; }").exit_code == 42


def test_missing_return_yields_zero():
    code, out = run_text("proc main() { }")
    assert (code, out) == (0, "")


def test_printf_conversions():
    r = run_text(r"""
proc main()
{
  printf("%d %u %x|", 0-1, 0-1, 255);
  printf("%c%s 100%%\n", 'A', "bc");
  return 0;
}
""")
    assert r.stdout == "-1 4294967295 ff|Abc 100%\n"


def test_putchar_and_getchar():
    r = run_text("""
proc main()
{
  var c:int;
  c = getchar();
  while (c != -1) {
    putchar(c + 1);
    c = getchar();
  }
  return 0;
}
""", stdin="abc")
    assert r.stdout == "bcd"


def test_exit_builtin_stops_execution():
    r = run_text('proc main() { exit(7); printf("not reached"); return 0; }')
    assert r.exit_code == 7 and r.stdout == ""


def test_globals_are_zero_initialized():
    r = run_text("var a:[3]int;\nvar c:char;\n"
                 'proc main() { printf("%d %d %d %d", a[0], a[1], a[2], c); return 0; }')
    assert r.stdout == "0 0 0 0"


def test_arithmetic_wraps_at_32_bits():
    r = run_text('proc main() { printf("%d", 2147483647 + 1); return 0; }')
    assert r.stdout == "-2147483648"


def test_division_truncates_toward_zero():
    r = run_text('proc main() { printf("%d %d %d %d", -7/2, -7%2, 7/-2, 7%-2); return 0; }')
    assert r.stdout == "-3 -1 -3 1"


def test_unary_operators():
    r = run_text('proc main() { printf("%d %d %d %d", -5, !0, !9, ~0); return 0; }')
    assert r.stdout == "-5 1 0 -1"


def test_comparisons_are_signed():
    r = run_text('proc main() { printf("%d %d %d", -1 < 0, -1 > 1, 2 >= 2); return 0; }')
    assert r.stdout == "1 0 1"


def test_char_arithmetic():
    r = run_text("proc main() { putchar('a' + 1); return 0; }")
    assert r.stdout == "b"


def test_char_store_truncates_and_load_zero_extends():
    r = run_text("""
var c:char;
proc main()
{
  c = 300;
  printf("%d ", c);
  c = -1;
  printf("%d", c);
  return 0;
}
""")
    assert r.stdout == "44 255"


def test_assignment_yields_the_stored_value():
    r = run_text('proc main() { var a:int; var b:int; printf("%d", a = b = 5); return a; }')
    assert r.stdout == "5" and r.exit_code == 5


def test_postincrement_returns_old_value():
    r = run_text("""
proc main()
{
  var i:int;
  i = 3;
  printf("%d %d ", i++, i);
  printf("%d %d", i--, i);
  return 0;
}
""")
    # arguments evaluate left to right: i++ yields 3 and leaves 4 behind
    assert r.stdout == "3 4 4 3"


def test_pointer_postincrement_steps_by_element_size():
    r = run_text("""
var a:[3]int;
proc main()
{
  var p:*int;
  a[0] = 10; a[1] = 20; a[2] = 30;
  p = &a[0];
  printf("%d", *p++);
  printf(" %d", *p++);
  printf(" %d", *p);
  return 0;
}
""")
    assert r.stdout == "10 20 30"


def test_while_and_break():
    r = run_text("""
proc main()
{
  var i:int;
  i = 0;
  while (1) {
    if (i == 4) break;
    printf("%d", i);
    i = i + 1;
  }
  return 0;
}
""")
    assert r.stdout == "0123"


def test_for_continue_jumps_to_step():
    r = run_text("""
proc main()
{
  var i:int;
  for (i = 0; i < 5; i++) {
    if (i == 2) continue;
    printf("%d", i);
  }
  return 0;
}
""")
    assert r.stdout == "0134"


def test_short_circuit_skips_side_effects():
    r = run_text("""
var hits:int;
proc side() { hits = hits + 1; return 1; }
proc main()
{
  var a:int;
  hits = 0;
  a = 0 && side();
  printf("%d %d ", a, hits);
  a = 1 || side();
  printf("%d %d ", a, hits);
  a = 1 && side();
  printf("%d %d ", a, hits);
  a = 0 || side();
  printf("%d %d", a, hits);
  return 0;
}
""")
    assert r.stdout == "0 0 1 0 1 1 1 2"


@pytest.mark.parametrize("elem,size", [("char", 1), ("int", 4)])
def test_pointer_scaling_law(elem, size):
    src = f"""
var a:[11]{elem};
proc gap(i) {{ return &a[i] - &a[0]; }}
proc main(which) {{ return gap(which - 1); }}
"""
    for i in range(11):
        r = run_text(src, argv=("x",) * (i + 1))
        assert r.exit_code == i * size, (elem, i)


def test_pointer_plus_int_scales():
    r = run_text("""
var a:[4]int;
proc main()
{
  var p:*int;
  a[3] = 99;
  p = &a[0];
  return *(p + 3);
}
""")
    assert r.exit_code == 99


def test_pointer_difference_is_raw_bytes():
    r = run_text("""
var x:[8]int;
proc main()
{
  printf("%d", &x[4] - &x[0]);
  return 0;
}
""")
    assert r.stdout == "16"


def test_multidimensional_array_layout():
    r = run_text("""
var m:[2][3]int;
proc main()
{
  var i:int;
  var j:int;
  for (i = 0; i < 2; i++)
    for (j = 0; j < 3; j++)
      m[i][j] = 10 * i + j;
  printf("%d %d %d", m[1][2], m[0][2], m[1][0]);
  return 0;
}
""")
    assert r.stdout == "12 2 10"


def test_recursion_factorial():
    r = run_text("""
proc fact(n)
{
  if (n < 2) return 1;
  return n * fact(n - 1);
}
proc main() { printf("%d", fact(10)); return 0; }
""")
    assert r.stdout == "3628800"


def test_mutual_recursion():
    r = run_text("""
proc iseven(n) { if (n == 0) return 1; return isodd(n - 1); }
proc isodd(n) { if (n == 0) return 0; return iseven(n - 1); }
proc main() { return iseven(10) + 2 * isodd(7); }
""")
    assert r.exit_code == 3


def test_methods_mutate_through_this():
    r = run_text("""
struct Counter
{
  var n:int;
  proc bump(by) { n = n + by; return n; }
  proc twice(by) { bump(by); return bump(by); }
  proc get() { return this.n; }
}
var c:Counter;
proc main()
{
  c.n = 5;
  c.bump(3);
  printf("%d ", c.get());
  printf("%d ", c.twice(1));
  printf("%d", c.n);
  return 0;
}
""")
    # bump: 5 -> 8; twice bumps two more; sibling call shares the instance
    assert r.stdout == "8 10 10"


def test_method_call_through_pointer():
    r = run_text("""
struct S { var v:int; proc get() { return v; } }
var s:S;
proc via(p:*S) { return p.get(); }
proc main() { s.v = 77; return via(&s); }
""")
    assert r.exit_code == 77


def test_struct_members_are_packed():
    r = run_text("""
struct Mixed { var c:char; var n:int; }
var m:Mixed;
proc main()
{
  m.c = 1;
  m.n = 258;
  return m.c + m.n - 259 + (&m.n - &m.c);
}
""")
    # offset of n is exactly 1 byte past c: no padding
    assert r.exit_code == 1


def test_argv_strings_are_materialized():
    r = run_text("""
proc main(argc, argv:**char)
{
  printf("%d %s %s", argc, argv[0], argv[1]);
  return argc;
}
""", argv=("prog", "hello"))
    assert r.stdout == "2 prog hello"
    assert r.exit_code == 2


def test_entry_without_parameters_sees_no_argv():
    r = run_text("proc main() { return 9; }", argv=("a", "b", "c"))
    assert r.exit_code == 9


def test_interpret_alternative_entry():
    ir = compile_ir("proc helper() { return 5; }\nproc main() { return 1; }")
    assert interpret(ir, entry="helper").exit_code == 5


def test_run_result_unpacks():
    code, out = run_text('proc main() { printf("hi"); return 3; }')
    assert (code, out) == (3, "hi")


def test_interpreter_is_deterministic():
    src = """
var seen:[4]int;
proc main()
{
  var i:int;
  for (i = 0; i < 4; i++) seen[i] = i * i;
  printf("%d %d %d %d", seen[0], seen[1], seen[2], seen[3]);
  return seen[3];
}
"""
    first = run_text(src)
    second = run_text(src)
    assert (first.exit_code, first.stdout) == (second.exit_code, second.stdout)


# -------------------------------------------------------------------- faults


def fault_of(text, **kw):
    with pytest.raises(RuntimeFault) as exc:
        run_text(text, **kw)
    return exc.value


def test_division_by_zero_names_function_and_index():
    fault = fault_of("proc main() { return 1/0; }")
    assert fault.function == "main"
    assert fault.index == 0
    assert "division by zero" in fault.message


def test_modulo_by_zero_faults():
    assert "division by zero" in fault_of("proc main() { return 1%0; }").message


def test_null_dereference_faults():
    fault = fault_of("var p:*int;\nproc main() { return *p; }")
    assert "out of bounds" in fault.message and "0x0" in fault.message


def test_store_out_of_bounds_faults():
    fault = fault_of("""
var p:*int;
proc main() { p = 3; *p = 1; return 0; }
""")
    assert "out of bounds" in fault.message


def test_unknown_extern_faults():
    fault = fault_of("proc main() { return mystery(); }")
    assert "unknown extern function 'mystery'" in fault.message


def test_runaway_recursion_overflows_the_stack():
    fault = fault_of("proc main() { return main(); }")
    assert "stack overflow" in fault.message


def test_printf_missing_argument_faults():
    fault = fault_of('proc main() { printf("%d"); return 0; }')
    assert "not enough arguments" in fault.message


def test_printf_unknown_conversion_faults():
    fault = fault_of('proc main() { printf("%q", 1); return 0; }')
    assert "unsupported conversion '%q'" in fault.message


def test_printf_trailing_percent_faults():
    fault = fault_of('proc main() { printf("end%"); return 0; }')
    assert "ends inside a conversion" in fault.message


def test_missing_entry_function():
    fault = fault_of("var g:int;")
    assert "entry function 'main' is not defined" in fault.message


def test_step_limit():
    fault = fault_of("proc main() { while (1) ; return 0; }", max_steps=10_000)
    assert "step limit exceeded" in fault.message
