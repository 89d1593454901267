"""Trace-inclusion checking: specification automata, the composed net, and
counter-abstracted reachability.

For an obligation ``traces_x(A) <= Phi`` the type is projected on ``x``,
turned into a Petri net (see :mod:`resusage.petri`) and run in lock-step
with the minimal automaton of ``Phi``.  A composed state is a marking plus an
automaton state.  It is *unsafe* when the marking can fire an access the
automaton cannot follow, or (liveness) when the marking may stop while the
automaton has no end-marker transition.

Reachability is decided over abstract markings in which each place holds
``0 .. cap-1`` tokens or ``OMEGA`` ("cap or more").
"""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from itertools import product as cartesian
from typing import Iterable, Optional

from . import behavior as bt
from . import speclang as sl
from .normalize import AtomBoundExceeded, NotInSpan, build_basis
from .petri import TAU, PetriNet, Transition, build_net, dot, enabled, fire, listing, pdisabled
from .syntax import TraceSpec, show_spec

DOWN = sl.DOWN


# ---------------------------------------------------------------------------
# Automata


@dataclass
class Dfa:
    """A minimal, partial DFA of a prefix-closed language.  Every state is
    accepting; a missing transition means rejection."""

    start: int
    delta: dict[tuple[int, str], int]
    states: list[int]
    exprs: list[TraceSpec] = field(default_factory=list)

    def step(self, q: int, a: str) -> Optional[int]:
        return self.delta.get((q, a))

    def accepts(self, word: Iterable[str]) -> bool:
        q: Optional[int] = self.start
        for a in word:
            q = self.delta.get((q, a))
            if q is None:
                return False
        return True

    @property
    def alphabet(self) -> list[str]:
        return sorted({a for _, a in self.delta})

    def is_total(self, alphabet: Iterable[str]) -> bool:
        return all((q, a) in self.delta for q in self.states for a in alphabet)

    def to_text(self) -> str:
        lines = [f"(*** {len(self.states)} Automaton States ***)", f"start: q{self.start}"]
        for (q, a), r in sorted(self.delta.items()):
            lines.append(f"q{q} -{a}-> q{r}")
        return "\n".join(lines)


def spec_to_dfa(phi: TraceSpec, extended: bool = False) -> Dfa:
    """Minimal DFA of ``pref(phi)``.  Without ``extended`` the end marker is
    erased first.  States are built from Brzozowski derivatives, dead
    residuals are dropped, then equivalent states are merged by partition
    refinement; states are numbered in breadth-first order."""
    r = sl.normalize(phi if extended else sl.erase_down(phi))
    if sl.is_empty(r):
        return Dfa(0, {}, [0], [sl.EMPTY])
    sigma = sorted(sl.alphabet(r))
    index = {r: 0}
    exprs = [r]
    delta: dict[tuple[int, str], int] = {}
    queue = deque([r])
    while queue:
        e = queue.popleft()
        for a in sigma:
            d = sl.residual(e, a)
            if isinstance(d, sl.Empty):
                continue
            if d not in index:
                index[d] = len(exprs)
                exprs.append(d)
                queue.append(d)
            delta[(index[e], a)] = index[d]
    return _minimize(0, delta, exprs, sigma)


def _minimize(start: int, delta: dict, exprs: list, sigma: list[str]) -> Dfa:
    n = len(exprs)
    block = [0] * n
    while True:
        sig = [(block[q],) + tuple(block[delta[(q, a)]] if (q, a) in delta else -1
                                    for a in sigma) for q in range(n)]
        ids: dict = {}
        new = [ids.setdefault(s, len(ids)) for s in sig]
        if len(ids) == len(set(block)):
            break
        block = new
    # renumber blocks in breadth-first order from the start state
    order: dict[int, int] = {}
    rep: dict[int, int] = {}
    queue = deque([start])
    order[block[start]] = 0
    rep[block[start]] = start
    while queue:
        q = queue.popleft()
        for a in sigma:
            r = delta.get((q, a))
            if r is not None and block[r] not in order:
                order[block[r]] = len(order)
                rep[block[r]] = r
                queue.append(r)
    nd: dict[tuple[int, str], int] = {}
    for (q, a), r in delta.items():
        if block[q] in order:
            nd[(order[block[q]], a)] = order[block[r]]
    inv = sorted(order, key=order.get)
    return Dfa(0, nd, list(range(len(order))), [exprs[rep[b]] for b in inv])


# ---------------------------------------------------------------------------
# Composition


@dataclass
class ProductNet:
    """The net run in lock-step with the automaton, as a Petri net of its
    own: automaton states become places holding a single token.  The
    rejecting sink of the completed automaton is listed as a place, but no
    transition ever marks it."""

    base: PetriNet
    dfa: Dfa
    places: list[str]
    transitions: list[Transition]
    initial: tuple[int, ...]

    def to_text(self) -> str:
        return listing(self.places, self.transitions, self.initial, self.base.resource)

    def to_dot(self) -> str:
        return dot(self.places, self.transitions, self.initial, f"P({self.base.resource}) x M")


def compose(net: PetriNet, dfa: Dfa) -> ProductNet:
    n = net.size
    sigma = sorted(set(dfa.alphabet) | net.access_labels())
    sink = [] if dfa.is_total(sigma) else ["q_reject"]
    qnames = [f"q{q}" for q in dfa.states] + sink
    places = [bt.show(p) for p in net.places] + qnames
    m = len(places)

    def pad(v: tuple, extra: dict) -> tuple:
        w = list(v) + [0] * (m - n)
        for j, k in extra.items():
            w[j] += k
        return tuple(w)

    trans: list[Transition] = []
    for t in net.transitions:
        if t.label == TAU:
            trans.append(Transition(pad(t.consume, {}), pad(t.produce, {}), TAU))
            continue
        for q in dfa.states:
            r = dfa.step(q, t.label)
            if r is not None:
                trans.append(Transition(pad(t.consume, {n + q: 1}),
                                        pad(t.produce, {n + r: 1}), t.label))
    initial = pad(net.initial, {n + dfa.start: 1})
    return ProductNet(net, dfa, places, trans, initial)


# ---------------------------------------------------------------------------
# Unsafe conditions


@dataclass(frozen=True)
class UnsafePattern:
    """``kind == "access"``: a marking covering ``consume`` with the
    automaton in ``q``, where ``label`` is not allowed.  ``kind ==
    "liveness"``: a pdisabled marking with the automaton in ``q``, where the
    end marker is not allowed."""

    kind: str
    q: int
    consume: tuple[int, ...] = ()
    label: str = ""

    def describe(self) -> str:
        if self.kind == "access":
            return f"access {self.label} not allowed in automaton state q{self.q}"
        return f"may stop in automaton state q{self.q} with a required access pending"


def unsafe_conditions(net: PetriNet, dfa: Dfa, extended: bool = False) -> list[UnsafePattern]:
    pats: dict[UnsafePattern, None] = {}
    for t in net.transitions:
        if t.label == TAU:
            continue
        for q in dfa.states:
            if dfa.step(q, t.label) is None:
                pats.setdefault(UnsafePattern("access", q, t.consume, t.label), None)
    if extended:
        for q in dfa.states:
            if dfa.step(q, DOWN) is None:
                pats.setdefault(UnsafePattern("liveness", q), None)
    return list(pats)


def _hits(net: PetriNet, m: tuple, q: int, by_q: dict) -> Optional[UnsafePattern]:
    for p in by_q.get(q, ()):
        if p.kind == "access":
            if all(c <= k for c, k in zip(p.consume, m)):
                return p
        elif pdisabled(net, m, {net.resource}):
            return p
    return None


# ---------------------------------------------------------------------------
# Reachability


@dataclass
class ReachResult:
    unsafe: Optional[UnsafePattern]
    witness: list[str]
    states: int
    complete: bool = True
    saturated: bool = False


def _search(net: PetriNet, dfa: Dfa, patterns, init, successors, limit=None,
            cap=None) -> ReachResult:
    by_q: dict[int, list[UnsafePattern]] = {}
    for p in patterns:
        by_q.setdefault(p.q, []).append(p)
    start = (init, dfa.start)
    parent: dict = {start: None}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        m, q = s
        hit = _hits(net, m, q, by_q)
        if hit is not None:
            path = []
            while parent[s] is not None:
                s, lab = parent[s]
                path.append(lab)
            return ReachResult(hit, path[::-1], len(parent),
                               saturated=_saturated(net, parent, cap))
        for t in net.transitions:
            if t.label == TAU:
                q2 = q
            else:
                q2 = dfa.step(q, t.label)
                if q2 is None:
                    continue
            for m2 in successors(t, m):
                s2 = (m2, q2)
                if s2 not in parent:
                    if limit is not None and len(parent) >= limit:
                        return ReachResult(None, [], len(parent), complete=False)
                    parent[s2] = (s, t.label)
                    queue.append(s2)
    return ReachResult(None, [], len(parent), saturated=_saturated(net, parent, cap))


def _saturated(net: PetriNet, states, cap) -> bool:
    """Did a place that some transition consumes from reach OMEGA?  (Tokens
    piling up on inert places lose no information.)"""
    if cap is None:
        return False
    live = [j for j in range(net.size) if any(t.consume[j] for t in net.transitions)]
    return any(m[j] >= cap for m, _ in states for j in live)


def abstract_marking(m: Iterable[int], cap: int) -> tuple[int, ...]:
    """Counts of ``cap`` or more collapse to ``cap`` (read as OMEGA)."""
    return tuple(min(k, cap) for k in m)


def abstract_fire(t: Transition, m: tuple[int, ...], cap: int) -> list[tuple[int, ...]]:
    """All abstract successors.  A place at OMEGA is enabled for any demand;
    removing ``k`` tokens from OMEGA may leave any of ``cap-k .. cap-1`` or
    OMEGA again, so every concrete firing is covered."""
    choices = []
    for k, c, p in zip(m, t.consume, t.produce):
        if c == 0:
            opts = [k]
        elif k == cap:
            opts = sorted(set(range(max(0, cap - c), cap)) | {cap})
        elif k >= c:
            opts = [k - c]
        else:
            return []
        choices.append([min(cap, o + p) for o in opts])
    return [tuple(v) for v in cartesian(*choices)]


def abstract_reach(net: PetriNet, dfa: Dfa, patterns, cap: int = 3) -> ReachResult:
    if cap < 1:
        raise ValueError("cap must be at least 1")
    return _search(net, dfa, patterns, abstract_marking(net.initial, cap),
                   lambda t, m: abstract_fire(t, m, cap), cap=cap)


def exact_reach(net: PetriNet, dfa: Dfa, patterns, limit: int = 5_000) -> ReachResult:
    """Exact exploration of the composed net, up to ``limit`` states
    (``complete`` is false when the limit cut the search short)."""
    return _search(net, dfa, patterns, tuple(net.initial),
                   lambda t, m: [fire(t, m)] if enabled(t, m) else [], limit)


def exact_reachable(net: PetriNet, dfa: Dfa, limit: int = 5_000) -> tuple[set, bool]:
    """All reachable (marking, automaton-state) pairs; flag is false when
    truncated."""
    start = (tuple(net.initial), dfa.start)
    seen = {start}
    queue = deque([start])
    while queue:
        m, q = queue.popleft()
        for t in net.transitions:
            q2 = q if t.label == TAU else dfa.step(q, t.label)
            if q2 is None or not enabled(t, m):
                continue
            s2 = (fire(t, m), q2)
            if s2 not in seen:
                if len(seen) >= limit:
                    return seen, False
                seen.add(s2)
                queue.append(s2)
    return seen, True


def abstract_reachable(net: PetriNet, dfa: Dfa, cap: int = 3) -> set:
    start = (abstract_marking(net.initial, cap), dfa.start)
    seen = {start}
    queue = deque([start])
    while queue:
        m, q = queue.popleft()
        for t in net.transitions:
            q2 = q if t.label == TAU else dfa.step(q, t.label)
            if q2 is None:
                continue
            for m2 in abstract_fire(t, m, cap):
                if (m2, q2) not in seen:
                    seen.add((m2, q2))
                    queue.append((m2, q2))
    return seen


# ---------------------------------------------------------------------------
# Verdicts


SAFE = "Safe"
POSSIBLY_UNSAFE = "PossiblyUnsafe"


@dataclass
class Verdict:
    resource: str
    verdict: str
    spec: str
    mode: str
    witness: Optional[list[str]] = None
    reason: Optional[str] = None
    nu_lifted: bool = False
    counter_abstracted: bool = False
    places: int = 0
    transitions: int = 0
    abstract_states: int = 0
    millis: int = 0
    confirmed: Optional[bool] = None
    net: Optional[PetriNet] = None
    dfa: Optional[Dfa] = None
    basis: object = None

    @property
    def safe(self) -> bool:
        return self.verdict == SAFE

    def to_json(self, timing: bool = True) -> dict:
        d: dict = {"resource": self.resource, "verdict": self.verdict,
                   "spec": self.spec, "mode": self.mode}
        if self.witness is not None:
            d["witness"] = self.witness
        if self.reason is not None:
            d["reason"] = self.reason
        if self.confirmed is not None:
            d["confirmed"] = self.confirmed
        d["approximations"] = {"nu_lifted": self.nu_lifted,
                               "counter_abstracted": self.counter_abstracted}
        stats = {"places": self.places, "transitions": self.transitions,
                 "abstract_states": self.abstract_states}
        if timing:
            stats["millis"] = self.millis
        d["stats"] = stats
        return d

    def product(self) -> Optional[ProductNet]:
        if self.net is None or self.dfa is None:
            return None
        return compose(self.net, self.dfa)


def check_inclusion(obligation, cap: int = 3, atom_bound: int = 2000,
                    replay_limit: int = 5_000) -> Verdict:
    """Decide ``traces_x(A) <= Phi`` (or its extended form) soundly.

    ``obligation`` needs ``resource``, ``body``, ``spec`` and ``extended``.
    A ``PossiblyUnsafe`` witness is replayed on the exact composed net when
    it is small enough; ``confirmed`` records the outcome.
    """
    t0 = time.perf_counter()
    x = obligation.resource
    mode = "liveness" if obligation.extended else "safety"
    v = Verdict(x, SAFE, show_spec(obligation.spec), mode)
    try:
        basis = build_basis(bt.project(obligation.body, {x}), atom_bound,
                            extended=obligation.extended)
    except (AtomBoundExceeded, NotInSpan, bt.NotFiniteState) as e:
        v.verdict = POSSIBLY_UNSAFE
        v.reason = f"basis-too-large: {e}"
        v.millis = int((time.perf_counter() - t0) * 1000)
        return v
    net = build_net(basis, x)
    dfa = spec_to_dfa(obligation.spec, obligation.extended)
    pats = unsafe_conditions(net, dfa, obligation.extended)
    res = abstract_reach(net, dfa, pats, cap)
    prod = compose(net, dfa)
    v.nu_lifted = basis.nu_lifted
    v.net, v.dfa, v.basis = net, dfa, basis
    v.places, v.transitions = len(prod.places), len(prod.transitions)
    v.abstract_states = res.states
    v.counter_abstracted = res.saturated
    if res.unsafe is not None:
        v.verdict = POSSIBLY_UNSAFE
        v.witness = res.witness
        v.reason = res.unsafe.describe()
        exact = exact_reach(net, dfa, pats, replay_limit)
        if exact.unsafe is not None:
            v.confirmed = True
            v.witness = exact.witness
        elif exact.complete:
            v.confirmed = False
    v.millis = int((time.perf_counter() - t0) * 1000)
    return v

