"""Simple-cycle enumeration and local bound assignment."""

import pytest

from dcbound.localbounds import (
    ONE,
    CycleOverflow,
    local_bound_map,
    simple_cycles,
)

from conftest import load_dcp


def ids(cycle):
    return tuple(t.id for t in cycle)


def cycle_sets(dcp, cap=10_000):
    return {ids(c) for c in simple_cycles(dcp, cap)}


def test_cycles_example_a():
    assert cycle_sets(load_dcp("exampleA.dcp")) == {("t1",), ("t2",)}


def test_cycles_example_1():
    # derived by hand on the five-location graph: two big loops and one self-loop
    assert cycle_sets(load_dcp("example1.dcp")) == {
        ("t1", "t2a", "t4", "t5"),
        ("t1", "t2b", "t5"),
        ("t3",),
    }


def test_cycles_example_c():
    assert cycle_sets(load_dcp("exampleC.dcp")) == {("t1", "t3"), ("t2",)}


def test_cycle_cap_overflow():
    with pytest.raises(CycleOverflow) as ei:
        simple_cycles(load_dcp("example1.dcp"), cap=2)
    assert ei.value.cap == 2


def test_local_bounds_example_a():
    d = load_dcp("exampleA.dcp")
    z = local_bound_map(d, simple_cycles(d))
    assert z.mapping == {"t0": ONE, "t1": "i", "t2": "j"}
    assert z.unbounded == []


def test_local_bounds_example_b():
    d = load_dcp("exampleB.dcp")
    z = local_bound_map(d, simple_cycles(d))
    assert z.mapping == {"t0": ONE, "t1": "i", "t2": "l", "t3": "j"}


def test_local_bounds_example_c():
    d = load_dcp("exampleC.dcp")
    z = local_bound_map(d, simple_cycles(d))
    assert z.mapping == {"t0": ONE, "t1": "i", "t3": "i", "t2": "k"}


def test_local_bounds_example_1():
    d = load_dcp("example1.dcp")
    z = local_bound_map(d, simple_cycles(d))
    assert z.mapping == {
        "t0": ONE, "t1": "x", "t2a": "x", "t2b": "x",
        "t4": "x", "t5": "x", "t3": "p",
    }


def test_local_bounds_example_2():
    d = load_dcp("example2.dcp")
    z = local_bound_map(d, simple_cycles(d))
    assert z.mapping == {
        "t0": ONE, "t0a": ONE, "t0b": ONE, "t2": ONE,
        "t1": "y", "t3": "z",
    }


def test_no_local_bound_recorded():
    # a cycle whose only decremented variable is unguarded has no local bound
    from dcbound.dcp import parse_dcp
    d = parse_dcp("""
dcp
consts: n
vars: x
entry: lb
exit: le
trans t0: lb -> l1 { x' <= n; }
trans t1: l1 -> l1 { x' <= x - 1; }
""")
    z = local_bound_map(d, simple_cycles(d))
    assert z.mapping["t1"] is None
    assert z.unbounded == ["t1"]


def test_lexicographic_tie_break():
    from dcbound.dcp import parse_dcp
    d = parse_dcp("""
dcp
consts: n
vars: a, b
entry: lb
exit: le
trans t0: lb -> l1 { a' <= n; b' <= n; }
trans t1: l1 -> l1 guard(a,b) { a' <= a - 1; b' <= b - 1; }
""")
    z = local_bound_map(d, simple_cycles(d))
    assert z.mapping["t1"] == "a"
