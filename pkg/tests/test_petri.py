"""Petri nets built from bases: structure, firing, traces and pdisabled."""
import random

import pytest
from hypothesis import assume, given, settings, strategies as st

from resusage import behavior as bt
from resusage.behavior import ZERO, Hide, Par
from resusage.gen import random_btype, random_finite_btype
from resusage.normalize import AtomBoundExceeded, build_basis, lift_nu
from resusage.petri import (
    TAU, PetriNet, Transition, build_net, enabled, fire, listing, net_step, pdisabled,
    ptraces_bounded, show_marking, to_dot, to_text,
)

seeds = st.integers(0, 10**7)


@pytest.fixture
def handoff():
    """new r (acc(x,I). r! | r?. acc(x,C))"""
    a = Hide("r", Par(bt.acc("x", "I", bt.out("r")), bt.inp("r", bt.acc("x", "C"))))
    return build_net(build_basis(a), "x")


def test_handoff_structure(handoff):
    n = handoff
    h = n.hidden[0]
    assert n.places == [bt.acc("x", "I", bt.out(h)), bt.out(h), bt.inp(h, bt.acc("x", "C")),
                        bt.acc("x", "C"), ZERO]
    assert n.initial == (1, 0, 1, 0, 0)
    assert set(n.transitions) == {
        Transition((1, 0, 0, 0, 0), (0, 1, 0, 0, 0), "I"),
        Transition((0, 1, 1, 0, 0), (0, 0, 0, 1, 1), TAU),
        Transition((0, 0, 0, 1, 0), (0, 0, 0, 0, 1), "C"),
    }
    assert n.access_labels() == {"I", "C"}


def test_handoff_firing(handoff):
    n = handoff
    assert net_step(n, (1, 0, 1, 0, 0)) == [("I", (0, 1, 1, 0, 0))]
    assert net_step(n, (0, 1, 1, 0, 0)) == [(TAU, (0, 0, 0, 1, 1))]
    assert net_step(n, (0, 0, 0, 0, 0)) == []


def test_handoff_traces(handoff):
    traces, partial = ptraces_bounded(handoff, 4)
    assert traces == {(), ("I",), ("I", "C")} and not partial
    # without guarantees the receiver may block after I
    ext, _ = ptraces_bounded(handoff, 4, extended=True)
    assert {("I", "v"), ("I", "C", "v")} <= ext


def test_handoff_with_guarantees_must_close():
    a = Hide("r", Par(bt.acc("x", "I", bt.out("r", attr=bt.SUCC)),
                      bt.inp("r", bt.acc("x", "C"), bt.SUCC)))
    net = build_net(build_basis(a, extended=True), "x")
    ext, _ = ptraces_bounded(net, 4, extended=True)
    assert ext == {(), ("I",), ("I", "C"), ("I", "C", "v")}


def test_empty_net_traces():
    net = PetriNet("x", [], [], ())
    assert ptraces_bounded(net, 3) == ({()}, False)


def test_unhidden_output_has_no_partner():
    net = build_net(build_basis(bt.Repl(bt.out("c"))), "x")
    assert all(t.label == TAU and sum(t.consume) == 1 for t in net.transitions)


def test_pdisabled_examples():
    a = Par(bt.acc("x", "C"), bt.out("c", bt.acc("x", "R")))
    net = build_net(build_basis(a, extended=True), "x")
    close = net.places.index(bt.acc("x", "C"))
    send = 1 - close
    zero = tuple(0 for _ in net.places)
    assert pdisabled(net, zero, {"x"})
    m = list(zero); m[close] = 1
    assert not pdisabled(net, tuple(m), {"x"})
    m = list(zero); m[send] = 1
    assert pdisabled(net, tuple(m), {"x"})


def test_rendering(handoff):
    assert show_marking(handoff.initial) == "1 * 0 | 1 * 2"
    assert show_marking((0, 0)) == "0"
    text = to_text(handoff)
    assert "(*** 5 Places ***)" in text and "(*** 3 Transitions ***)" in text
    assert "(x,C): 1*3 -> -1*3 | 1*4" in text
    dot = to_dot(handoff)
    assert dot.startswith('digraph "P(x)"') and "p1 -> t" in dot
    assert listing([], [], (), "x").splitlines()[-1] == "(*** 0 Transitions ***)"


# ---------------------------------------------------------------------------
# properties


def _net(seed, extended=False, **kw):
    a = random_finite_btype(random.Random(seed), bound=80, **kw)
    assume(a is not None)
    pa = bt.project(a, {"x"})
    lifted = lift_nu(pa)
    assume(bt.is_finite_state(lifted, 300))
    try:
        basis = build_basis(pa, 300, extended)
    except AtomBoundExceeded:
        assume(False)
    return lifted, basis, build_net(basis, "x")


@settings(max_examples=100, deadline=None)
@given(seeds, st.booleans())
def test_net_and_type_traces_agree(seed, extended):
    lifted, _, net = _net(seed, extended)
    for k in (3, 6):
        p_tr, p_part = ptraces_bounded(net, k, extended, cap=3000)
        t_tr, t_part = bt.traces_bounded(lifted, "x", k, extended, cap=3000)
        assume(not (p_part or t_part))
        assert p_tr == t_tr


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_firing_conservation(seed):
    _, _, net = _net(seed)
    frontier, seen = [net.initial], {net.initial}
    while frontier and len(seen) < 200:
        m = frontier.pop()
        for t in net.transitions:
            if enabled(t, m):
                assert all(c <= k for c, k in zip(t.consume, m))
                m2 = fire(t, m)
                assert m2 == tuple(k - c + p for k, c, p in zip(m, t.consume, t.produce))
                assert min(m2) >= 0
                if m2 not in seen:
                    seen.add(m2)
                    frontier.append(m2)
            else:
                assert any(c > k for c, k in zip(t.consume, m))


def _as_type(net, m):
    """The type a marking stands for: the hidden names over the marked atoms."""
    body = bt.par_of([p for p, k in zip(net.places, m) for _ in range(k)])
    for h in reversed(net.hidden):
        body = Hide(h, body)
    return body


@settings(max_examples=100, deadline=None)
@given(seeds, st.sampled_from([frozenset({"x"}), frozenset({"a"}), frozenset({"x", "b"})]))
def test_pdisabled_matches_disabled(seed, names):
    a = bt.project(random_btype(random.Random(seed), attrs=True), {"x", "a", "b"})
    try:
        basis = build_basis(a, 300, extended=True)
    except AtomBoundExceeded:
        assume(False)
    net = build_net(basis, "x")
    frontier, seen = [net.initial], {net.initial}
    while frontier and len(seen) < 30:
        m = frontier.pop()
        assert pdisabled(net, m, names) == bt.disabled(_as_type(net, m), names)
        for _, m2 in net_step(net, m):
            if m2 not in seen:
                seen.add(m2)
                frontier.append(m2)
