"""Parser, pretty-printer and name handling."""
import random

import pytest
from hypothesis import given, settings, strategies as st

from resusage.gen import random_program
from resusage.syntax import (
    NIL, Acc, Attr, Concat, Down, In, NuR, Out, ParseError, Repl, Star, Sym, Var,
    iter_subprocesses, parse_process, parse_program, parse_spec, show_process,
)


def test_nil():
    assert parse_process("0") == NIL


def test_resource_binder_with_builtin_spec():
    prog = parse_program("newR 1,x in acc(x,init).r!!(x)", mode="liveness")
    p = prog.process
    assert isinstance(p, NuR) and p.res == "x"
    assert p.body == Acc("I", "x", Out("r", (Var("x"),), Attr.SUCCEEDS, NIL))


def test_replicated_input_with_close_shorthand():
    assert parse_process("*(c?().close(x))") == Repl(In("c", (), Attr.NONE, Acc("C", "x", NIL)))


@pytest.mark.parametrize("text, expected", [
    ("pref(I R* C)", Concat(Sym("I"), Concat(Star(Sym("R")), Sym("C")))),
    ("pref((P G)*)", Star(Concat(Sym("P"), Sym("G")))),
    ("pref(I R* C v)", Concat(Sym("I"), Concat(Star(Sym("R")), Concat(Sym("C"), Down())))),
])
def test_parse_spec(text, expected):
    assert parse_spec(text) == expected


@pytest.mark.parametrize("text, fragment", [
    ("spec 1 = pref(I); spec 1 = pref(R); 0", "duplicate"),
    ("newR pref(I v R),x in 0", "end marker"),
    ("acc(x,Q).0", "undeclared access label"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_program(text)


def test_error_reports_line_and_column():
    with pytest.raises(ParseError) as info:
        parse_program("newR pref(I),x in\n  x?().(0 |")
    assert str(info.value).startswith("2:")


def test_bound_names_are_unique():
    p = parse_process("new a in a!() | new a in a?() | new a in 0")
    binders = [q.name for q in iter_subprocesses(p) if hasattr(q, "name")]
    assert len(binders) == 3 and len(set(binders)) == 3


def test_safety_mode_strips_attributes():
    p = parse_process("c!!().c??().0")
    attrs = [q.attr for q in iter_subprocesses(p) if hasattr(q, "attr")]
    assert attrs == [Attr.NONE, Attr.NONE]


def test_liveness_header_keeps_attributes():
    p = parse_program("mode liveness; c!!().c?().0").process
    attrs = [q.attr for q in iter_subprocesses(p) if hasattr(q, "attr")]
    assert attrs == [Attr.SUCCEEDS, Attr.NONE]


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6), st.booleans())
def test_pretty_print_round_trip(seed, attrs):
    p = random_program(random.Random(seed), max_prefixes=8, attrs=attrs)
    mode = "liveness" if attrs else "safety"
    text = show_process(p)
    q = parse_program(text, mode).process
    assert show_process(q) == text
    assert parse_program(show_process(q), mode).process == q


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_parsed_safety_programs_carry_no_attributes(seed):
    p = random_program(random.Random(seed), max_prefixes=8, attrs=True)
    q = parse_program(show_process(p), "safety").process
    assert all(getattr(s, "attr", Attr.NONE) is Attr.NONE for s in iter_subprocesses(q))
