"""Random programs and behavioural types for fuzzing and property tests.

Generators take a :class:`random.Random` so that a test can be replayed
from its seed.  Programs are built to be well typed by construction:

* ``c1``, ``c2`` are signalling channels (no arguments);
* ``d`` carries one resource;
* ``e`` carries a signalling channel.
"""
from __future__ import annotations

import random
from typing import Optional, Sequence

from . import behavior as bt
from .behavior import BType
from .syntax import (
    NIL, OPAQUE, Acc, Attr, Concat, If, In, Nu, NuR, Out, Par, Process, Repl,
    Star, Sym, TraceSpec, Union_, Var, uniquify, Down,
)

LABELS = ("I", "R", "W", "C")

SPEC_POOL: tuple[TraceSpec, ...] = (
    Concat(Sym("I"), Concat(Star(Sym("R")), Sym("C"))),
    Concat(Sym("I"), Concat(Star(Union_(Sym("R"), Sym("W"))), Sym("C"))),
    Star(Concat(Sym("I"), Sym("C"))),
    Concat(Star(Sym("R")), Sym("W")),
    Concat(Sym("I"), Concat(Sym("R"), Sym("C"))),
)


def random_spec(rng: random.Random, depth: int = 3, down: bool = False) -> TraceSpec:
    """A random regular expression; with ``down`` the end marker may close it."""
    if rng.random() < 0.5:
        r = rng.choice(SPEC_POOL)
    else:
        r = _random_regex(rng, depth)
    if down and rng.random() < 0.7:
        r = Concat(r, Down())
    return r


def _random_regex(rng: random.Random, depth: int) -> TraceSpec:
    if depth <= 0 or rng.random() < 0.3:
        return Sym(rng.choice(LABELS))
    k = rng.randrange(3)
    if k == 0:
        return Concat(_random_regex(rng, depth - 1), _random_regex(rng, depth - 1))
    if k == 1:
        return Union_(_random_regex(rng, depth - 1), _random_regex(rng, depth - 1))
    return Star(_random_regex(rng, depth - 1))


# ---------------------------------------------------------------------------
# Programs


class _ProgGen:
    def __init__(self, rng: random.Random, attrs: bool):
        self.rng = rng
        self.attrs = attrs
        self.fresh = 0

    def attr(self) -> Attr:
        if self.attrs and self.rng.random() < 0.5:
            return Attr.SUCCEEDS
        return Attr.NONE

    def var(self, base: str) -> str:
        self.fresh += 1
        return f"{base}{self.fresh}"

    def thread(self, budget: int, res: list[str], sigs: list[str]) -> tuple[Process, int]:
        """A sequential-ish thread using at most ``budget`` prefixes."""
        rng = self.rng
        if budget <= 0 or rng.random() < 0.12:
            return NIL, 0
        k = rng.random()
        if k < 0.32 and res:
            cont, used = self.thread(budget - 1, res, sigs)
            return Acc(rng.choice(LABELS), rng.choice(res), cont), used + 1
        if k < 0.52:
            cont, used = self.thread(budget - 1, res, sigs)
            return Out(rng.choice(sigs), (), self.attr(), cont), used + 1
        if k < 0.70:
            cont, used = self.thread(budget - 1, res, sigs)
            body = In(rng.choice(sigs), (), self.attr(), cont)
            if rng.random() < 0.2:
                return Repl(body), used + 1
            return body, used + 1
        if k < 0.78 and res:
            cont, used = self.thread(budget - 1, res, sigs)
            return Out("d", (Var(rng.choice(res)),), self.attr(), cont), used + 1
        if k < 0.86:
            y = self.var("y")
            cont, used = self.thread(budget - 1, res + [y], sigs)
            return In("d", (y,), self.attr(), cont), used + 1
        if k < 0.90:
            cont, used = self.thread(budget - 1, res, sigs)
            return Out("e", (Var(rng.choice(sigs[:2])),), self.attr(), cont), used + 1
        if k < 0.93:
            z = self.var("k")
            cont, used = self.thread(budget - 1, res, sigs + [z])
            return In("e", (z,), self.attr(), cont), used + 1
        if k < 0.97:
            then, u1 = self.thread(budget // 2, res, sigs)
            orelse, u2 = self.thread(budget - u1, res, sigs)
            return If(OPAQUE, then, orelse), u1 + u2
        left, u1 = self.thread(budget // 2, res, sigs)
        right, u2 = self.thread(budget - u1, res, sigs)
        return Par(left, right), u1 + u2


def random_program(rng: random.Random, max_prefixes: int = 6, max_resources: int = 2,
                   attrs: bool = False, down: bool = False) -> Process:
    """A closed, well-typed program with at most ``max_prefixes`` action
    prefixes and at most ``max_resources`` resources."""
    g = _ProgGen(rng, attrs)
    n_res = rng.randint(1, max_resources)
    res = [f"x{i}" for i in range(1, n_res + 1)]
    sigs = ["c1", "c2"]
    budget = max_prefixes
    threads = []
    for i in range(rng.randint(1, 3)):
        if budget <= 0:
            break
        t, used = g.thread(budget, res, sigs)
        budget -= used
        threads.append(t)
    body: Process = NIL
    for t in reversed(threads):
        body = t if body is NIL else Par(t, body)
    for ch in ("e", "d", "c2", "c1"):
        body = Nu(ch, body)
    for x in reversed(res):
        body = NuR(x, random_spec(rng, down=down), body)
    return uniquify(body)


# ---------------------------------------------------------------------------
# Behavioural types


class _TypeGen:
    def __init__(self, rng: random.Random, names: Sequence[str], resource: str,
                 attrs: bool, rec: bool, repl: bool, static: bool, hide: bool):
        self.rng = rng
        self.names = list(names)
        self.resource = resource
        self.attrs = attrs
        self.rec = rec
        self.repl = repl
        self.static = static
        self.hide = hide
        self.nvars = 0

    def attr(self):
        if self.attrs and self.rng.random() < 0.5:
            return bt.SUCC
        return bt.NONE

    def action(self) -> tuple:
        rng = self.rng
        k = rng.random()
        if k < 0.35:
            return ("acc", self.resource, rng.choice(LABELS[:3]))
        if k < 0.6:
            return ("out", rng.choice(self.names))
        if k < 0.85:
            return ("in", rng.choice(self.names))
        return bt.TAU

    def gen(self, depth: int, guarded: list[str], unguarded: list[str]) -> BType:
        """``guarded``: recursion variables usable here (a prefix separates
        us from their binder); ``unguarded``: bound but not yet usable."""
        rng = self.rng
        if depth <= 0:
            if guarded and rng.random() < 0.5:
                return bt.TVar(rng.choice(guarded))
            if rng.random() < 0.5:
                return bt.ZERO
            return bt.Act(self.action(), self.attr(), bt.ZERO)
        k = rng.random()
        if k < 0.1:
            return bt.ZERO
        if k < 0.17 and guarded:
            return bt.TVar(rng.choice(guarded))
        if k < 0.47:
            cont = self.gen(depth - 1, guarded + unguarded, [])
            return bt.Act(self.action(), self.attr(), cont)
        if k < 0.60:
            return bt.Par(self.gen(depth - 1, guarded, unguarded),
                          self.gen(depth - 1, guarded, unguarded))
        if k < 0.70:
            return bt.Choice(self.gen(depth - 1, guarded + unguarded, []),
                             self.gen(depth - 1, guarded + unguarded, []))
        if k < 0.76 and self.repl:
            cont = self.gen(depth - 1, [], [])
            return bt.Repl(bt.Act(self.action(), self.attr(), cont))
        if k < 0.84 and self.rec:
            self.nvars += 1
            v = f"t{self.nvars}"
            return bt.Rec(v, self.gen(depth - 1, guarded, unguarded + [v]))
        if k < 0.88 and self.hide:
            return bt.Hide(rng.choice(self.names), self.gen(depth - 1, guarded, unguarded))
        if self.static:
            body = self.gen(depth - 1, guarded, unguarded)
            j = rng.randrange(3)
            universe = self.names + [self.resource]
            s = frozenset(n for n in universe if rng.random() < 0.4)
            if j == 0:
                return bt.Exclude(body, s)
            if j == 1:
                return bt.Project(body, s)
            src = rng.choice(self.names)
            dst = rng.choice(self.names)
            return bt.rename([(src, dst)], body)
        return bt.Act(self.action(), self.attr(), self.gen(depth - 1, guarded + unguarded, []))


def random_btype(rng: random.Random, depth: int = 4, names: Sequence[str] = ("a", "b"),
                 resource: str = "x", attrs: bool = False, rec: bool = True,
                 repl: bool = True, static: bool = True, hide: bool = True) -> BType:
    """A closed behavioural type; recursion variables are always guarded."""
    g = _TypeGen(rng, names, resource, attrs, rec, repl, static, hide)
    return g.gen(depth, [], [])


def random_finite_btype(rng: random.Random, bound: int = 300, tries: int = 50,
                        **kw) -> Optional[BType]:
    """A random type whose reachable state space has at most ``bound``
    states (or ``None`` if none was found within ``tries``)."""
    for _ in range(tries):
        a = random_btype(rng, **kw)
        if bt.is_finite_state(a, bound):
            return a
    return None
