"""Behavioural types: transitions, ``disabled``, bounded traces, and the
algebraic laws of the simulation preorder."""
import random

import pytest
from hypothesis import assume, given, settings, strategies as st

from resusage import behavior as bt
from resusage.behavior import (
    NONE, SUCC, TAU, ZERO, Act, Choice, Hide, Par, Rec, Repl, TVar,
    disabled, simulates, traces_bounded, tstep,
)
from resusage.gen import LABELS, random_finite_btype

N_LAW = 200
seeds = st.integers(0, 10**7)


def fin(rng, **kw):
    """A small random finite-state type."""
    kw.setdefault("depth", 3)
    a = random_finite_btype(rng, bound=60, **kw)
    assume(a is not None)
    return a


def equiv(a, b):
    return simulates(a, b) and simulates(b, a)


def random_action(rng, names=("a", "b")):
    k = rng.randrange(4)
    if k == 0:
        return ("acc", "x", rng.choice(LABELS))
    if k == 1:
        return ("out", rng.choice(names))
    if k == 2:
        return ("in", rng.choice(names))
    return TAU


def random_rec(rng):
    """A closed recursive type built from a template around random parts."""
    a = fin(rng, rec=False, repl=False)
    v = TVar("t_law")
    l1, l2 = random_action(rng), random_action(rng)
    body = rng.choice([
        lambda: Choice(a, Act(l1, NONE, v)),
        lambda: Act(l1, NONE, Choice(a, Act(l2, NONE, v))),
        lambda: Act(l1, NONE, Par(a, Act(l2, NONE, ZERO))),
        lambda: Choice(Act(l1, NONE, v), Act(l2, NONE, Choice(v, a))),
    ])()
    return Rec("t_law", body)


def replicable(rng):
    """A body whose replication is finite-state: every derivative is either
    ``0`` or the body itself, so copies are absorbed by ``*A``."""
    act, attr = random_action(rng), rng.choice([NONE, SUCC])
    if rng.random() < 0.5:
        return Act(act, attr, ZERO)
    return Rec("r_law", Act(act, attr, TVar("r_law")))


# ---------------------------------------------------------------------------
# transitions


def test_access_prefix_step():
    assert tstep(bt.acc("x", "R")) == ((("acc", "x", "R"), ZERO),)


def test_hidden_communication_becomes_tau():
    a = Hide("c", Par(bt.out("c"), bt.inp("c")))
    steps = tstep(a)
    assert any(lab == TAU and bt.norm(t) is ZERO for lab, t in steps)
    assert all(lab == TAU for lab, _ in steps)


def test_rename_maps_labels():
    a = bt.rename([("x", "y")], bt.out("x"))
    [(lab, t)] = tstep(a)
    assert lab == ("out", "y")
    assert bt.norm(t) is ZERO


def test_par_offers_a_pair_label():
    labels = {lab for lab, _ in tstep(Par(bt.out("a"), bt.inp("b")))}
    assert ("pair", "b", "a") in labels


def test_unguarded_recursion_has_no_transitions():
    assert tstep(Rec("t", TVar("t"))) == ()


# ---------------------------------------------------------------------------
# disabled


def test_disabled_examples():
    assert disabled(ZERO, {"x"})
    assert disabled(bt.out("c", bt.acc("x", "C")), {"x"})
    assert not disabled(bt.acc("x", "C"), {"x"})
    assert disabled(bt.acc("x", "C"), {"y"})


def test_disabled_with_succeeding_attribute_looks_through():
    assert not disabled(bt.out("c", bt.acc("x", "C"), SUCC), {"x"})
    assert disabled(bt.out("c", bt.acc("y", "C"), SUCC), {"x"})


def test_disabled_par_and_choice():
    bad = bt.acc("x", "C")
    assert not disabled(Par(ZERO, bad), {"x"})
    assert disabled(Choice(ZERO, bad), {"x"})


def test_disabled_hide_removes_name():
    assert disabled(Hide("x", bt.acc("x", "C")), {"x"})


def test_disabled_recursion_is_least():
    loop = Rec("t", bt.tau(TVar("t"), SUCC))
    assert not disabled(loop, {"x"})


# ---------------------------------------------------------------------------
# traces


def test_traces_basic():
    a = bt.acc("x", "I", bt.acc("x", "R"))
    assert traces_bounded(a, "x", 4)[0] == {(), ("I",), ("I", "R")}


def test_traces_extended():
    a = bt.acc("x", "I", bt.acc("x", "R"))
    assert traces_bounded(a, "x", 4, extended=True)[0] == {
        (), ("I",), ("I", "R"), ("I", "R", "v")}


def test_traces_of_zero_extended():
    assert traces_bounded(ZERO, "x", 3, extended=True)[0] == {(), ("v",)}


def test_traces_ignore_other_resources():
    a = bt.acc("y", "W", bt.acc("x", "I"))
    assert traces_bounded(a, "x", 3)[0] == {(), ("I",)}


def test_traces_cap_flags_partial():
    growing = Repl(bt.tau(bt.acc("x", "R")))
    traces, partial = traces_bounded(growing, "x", 2, cap=50)
    assert partial
    assert ("R", "R") in traces


# ---------------------------------------------------------------------------
# simulation: fixed examples


def test_simulation_examples():
    a = bt.acc("x", "I", bt.out("c"))
    b = bt.inp("c", bt.acc("x", "C"))
    assert simulates(a, Choice(a, b))
    assert not simulates(Choice(a, b), a)
    s = frozenset({"x"})
    assert simulates(a, Par(bt.Exclude(a, s), bt.Project(a, s)))
    assert simulates(ZERO, a)


def test_simulation_rejects_infinite_state():
    grow = Repl(bt.out("a", bt.out("b")))
    with pytest.raises(bt.NotFiniteState):
        simulates(grow, grow, bound=100)


def test_extended_simulation_checks_disabled():
    a = ZERO
    b = bt.tau(bt.acc("x", "C"), SUCC)
    assert simulates(a, b)
    assert not simulates(a, b, extended=True)


# ---------------------------------------------------------------------------
# structural congruence laws (both directions, basic mode)


@settings(max_examples=N_LAW, deadline=None)
@given(seeds)
def test_law_par_unit(seed):
    a = fin(random.Random(seed))
    assert equiv(Par(a, ZERO), a)


@settings(max_examples=N_LAW, deadline=None)
@given(seeds)
def test_law_par_commutative(seed):
    r = random.Random(seed)
    a, b = fin(r), fin(r)
    assert equiv(Par(a, b), Par(b, a))


@settings(max_examples=N_LAW, deadline=None)
@given(seeds)
def test_law_par_associative(seed):
    r = random.Random(seed)
    a, b, c = fin(r, depth=2), fin(r, depth=2), fin(r, depth=2)
    left, right = Par(a, Par(b, c)), Par(Par(a, b), c)
    assume(bt.is_finite_state(left, 400))
    assert equiv(left, right)


@settings(max_examples=N_LAW, deadline=None)
@given(seeds)
def test_law_choice_commutative(seed):
    r = random.Random(seed)
    a, b = fin(r), fin(r)
    assert equiv(Choice(a, b), Choice(b, a))


@settings(max_examples=N_LAW, deadline=None)
@given(seeds)
def test_law_choice_associative(seed):
    r = random.Random(seed)
    a, b, c = fin(r), fin(r), fin(r)
    assert equiv(Choice(a, Choice(b, c)), Choice(Choice(a, b), c))


@settings(max_examples=N_LAW, deadline=None)
@given(seeds)
def test_law_choice_idempotent(seed):
    a = fin(random.Random(seed))
    assert equiv(Choice(a, a), a)


@settings(max_examples=N_LAW, deadline=None)
@given(seeds)
def test_law_replication_unfolds(seed):
    a = replicable(random.Random(seed))
    assert equiv(Repl(a), Par(a, Repl(a)))


@settings(max_examples=N_LAW, deadline=None)
@given(seeds)
def test_law_recursion_unfolds(seed):
    m = random_rec(random.Random(seed))
    assume(bt.is_finite_state(m, 200))
    assert equiv(bt.unfold(m), m)


@settings(max_examples=N_LAW, deadline=None)
@given(seeds)
def test_law_restriction_scope(seed):
    r = random.Random(seed)
    a, b = fin(r, names=("a",)), fin(r)
    assert "b" not in bt.free_names(a)
    assert equiv(Hide("b", Par(a, b)), Par(a, Hide("b", b)))


# ---------------------------------------------------------------------------
# exclusion / projection laws


def _names(r):
    return frozenset(n for n in ("a", "b", "x") if r.random() < 0.5)


@settings(max_examples=N_LAW, deadline=None)
@given(seeds)
def test_exclusion_distributes_over_par(seed):
    r = random.Random(seed)
    a, b, s = fin(r), fin(r), _names(r)
    assert equiv(bt.Exclude(Par(a, b), s), Par(bt.Exclude(a, s), bt.Exclude(b, s)))


@settings(max_examples=N_LAW, deadline=None)
@given(seeds)
def test_exclusion_composes(seed):
    r = random.Random(seed)
    a, s, t = fin(r), _names(r), _names(r)
    assert equiv(bt.Exclude(bt.Exclude(a, s), t), bt.Exclude(a, s | t))


@settings(max_examples=N_LAW, deadline=None)
@given(seeds)
def test_projection_composes(seed):
    r = random.Random(seed)
    a, s, t = fin(r), _names(r), _names(r)
    assert equiv(bt.Project(bt.Project(a, s), t), bt.Project(a, s & t))


@settings(max_examples=N_LAW, deadline=None)
@given(seeds)
def test_exclusion_of_unused_names(seed):
    r = random.Random(seed)
    a = fin(r)
    s = frozenset({"z", "w"}) | (_names(r) - bt.free_names(a))
    assert equiv(bt.Exclude(a, s), a)


# ---------------------------------------------------------------------------
# substitution with colliding names


@settings(max_examples=N_LAW, deadline=None)
@given(seeds)
def test_substitution_distributes_over_par(seed):
    r = random.Random(seed)
    a, b = fin(r), fin(r)
    pairs = r.choice([[("a", "b")], [("b", "a")], [("a", "b"), ("b", "a")], [("x", "a")]])
    left = bt.rename(pairs, Par(a, b))
    right = Par(bt.rename(pairs, a), bt.rename(pairs, b))
    assert equiv(left, right)


def test_substitution_collision_creates_communication():
    # a! | b?  cannot talk, but after [b/a] the pair label becomes b? b!
    p = Par(bt.out("a"), bt.inp("b"))
    renamed = bt.rename([("a", "b")], p)
    split = Par(bt.rename([("a", "b")], bt.out("a")), bt.inp("b"))
    assert equiv(renamed, split)
    assert ("pair", "b", "b") in {lab for lab, _ in tstep(renamed)}


# ---------------------------------------------------------------------------
# simulation implies trace inclusion; the least-prefix-point rule


def _bigger(r, a):
    b = fin(r)
    return r.choice([Choice(a, b), Choice(b, a), Par(a, b), b, bt.tau(a)])


@settings(max_examples=N_LAW, deadline=None)
@given(seeds, st.booleans())
def test_simulation_implies_trace_inclusion(seed, extended):
    r = random.Random(seed)
    a1 = fin(r)
    a2 = _bigger(r, a1)
    assume(bt.is_finite_state(a2, 300))
    if not simulates(a1, a2, extended=extended):
        return
    t1, p1 = traces_bounded(a1, "x", 6, extended)
    t2, p2 = traces_bounded(a2, "x", 6, extended)
    assert not (p1 or p2)
    assert t1 <= t2


def _chaos(labels):
    """A type that can do any of ``labels`` forever, or stop."""
    v = TVar("c_law")
    return Rec("c_law", bt.choice_of([ZERO] + [Act(l, NONE, v) for l in labels]))


@settings(max_examples=N_LAW, deadline=None)
@given(seeds)
def test_recursion_is_least_prefix_point(seed):
    r = random.Random(seed)
    m = random_rec(r)
    body = m.body
    assume(bt.is_finite_state(m, 200))
    labels = sorted({lab for s in bt.LTS(m, 200).trans.values() for lab, _ in s
                     if lab[0] != "pair"})
    b = r.choice([_chaos(labels), fin(r), m])
    if simulates(bt.subst_tvar(body, m.var, b), b):
        assert simulates(m, b)


def test_least_prefix_point_example():
    loop = Rec("t", bt.out("a", TVar("t")))
    bound = _chaos([("out", "a")])
    assert simulates(bt.subst_tvar(loop.body, "t", bound), bound)
    assert simulates(loop, bound)
