"""Behavioral types: syntax, labelled transitions, traces and simulation.

Terms are hash-consed: constructing a node with the same arguments twice
yields the same object, so structural equality is identity and hashing is
O(1).  This matters because inferred types are large DAGs after recursive
solutions are substituted into one another.

Actions and labels are plain tuples::

    ("out", x)   ("in", x)   ("acc", x, xi)   ("tau",)   ("pair", x, y)

``("pair", x, y)`` is the simultaneous input on ``x`` and output on ``y`` by
two parallel components; when ``x == y`` the same move also yields ``tau``.

Transition rules (the type-level semantics used throughout):

* a prefix fires its action; a choice moves silently to either branch;
* ``A | B`` interleaves and pairs an input of one side with an output of the
  other; ``*A`` behaves like ``A | *A``; ``mu a.A`` like its unfolding;
* ``new x in A`` blocks every label mentioning ``x`` except the pair
  ``{x, x~}``, which becomes ``tau``;
* ``A^S`` (exclusion) turns labels whose names all lie in ``S`` into
  ``tau``, blocks labels that mention ``S`` only partly, and keeps the rest;
* ``A|_S`` (projection) is dual: labels avoiding ``S`` become ``tau``,
  labels entirely inside ``S`` are kept, the others are blocked;
* ``[y/x]A`` renames labels (a renamed pair ``{z, z~}`` also yields ``tau``).
"""
from __future__ import annotations

import hashlib
import itertools
from collections import deque
from typing import Iterable

from .syntax import Attr

TAU = ("tau",)
NONE = Attr.NONE
SUCC = Attr.SUCCEEDS


class NotFiniteState(Exception):
    """Raised when a reachable state space exceeds the exploration bound."""


# ---------------------------------------------------------------------------
# Term representation


class BType:
    """Base class of hash-consed behavioral-type nodes."""

    __slots__ = ("_skey", "__weakref__")
    _fields: tuple[str, ...] = ()
    _table: dict = {}

    def __new__(cls, *args):
        key = (cls,) + args
        node = BType._table.get(key)
        if node is None:
            node = object.__new__(cls)
            for f, v in zip(cls._fields, args):
                object.__setattr__(node, f, v)
            object.__setattr__(node, "_skey", None)
            BType._table[key] = node
        return node

    def __init__(self, *args):
        pass

    def __setattr__(self, name, value):
        raise AttributeError("behavioral types are immutable")

    def __reduce__(self):
        return (self.__class__, tuple(getattr(self, f) for f in self._fields))

    def __repr__(self) -> str:
        args = ", ".join(repr(getattr(self, f)) for f in self._fields)
        return f"{type(self).__name__}({args})"

    def __str__(self) -> str:
        return show(self)

    def children(self) -> tuple["BType", ...]:
        return tuple(getattr(self, f) for f in self._fields
                     if isinstance(getattr(self, f), BType))


class Zero(BType):
    __slots__ = ()


class Act(BType):
    __slots__ = _fields = ("action", "attr", "cont")


class Par(BType):
    __slots__ = _fields = ("left", "right")


class Choice(BType):
    __slots__ = _fields = ("left", "right")


class Repl(BType):
    __slots__ = _fields = ("body",)


class Hide(BType):
    __slots__ = _fields = ("name", "body")


class Rename(BType):
    """``[y1/x1,...]A``: ``pairs`` is a tuple of ``(source, target)``."""

    __slots__ = _fields = ("pairs", "body")


class Exclude(BType):
    __slots__ = _fields = ("body", "names")


class Project(BType):
    __slots__ = _fields = ("body", "names")


class Rec(BType):
    __slots__ = _fields = ("var", "body")


class TVar(BType):
    __slots__ = _fields = ("var",)


ZERO = Zero()


# -- convenience constructors


def out(x: str, cont: BType = ZERO, attr: Attr = NONE) -> BType:
    return Act(("out", x), attr, cont)


def inp(x: str, cont: BType = ZERO, attr: Attr = NONE) -> BType:
    return Act(("in", x), attr, cont)


def acc(x: str, xi: str, cont: BType = ZERO) -> BType:
    return Act(("acc", x, xi), NONE, cont)


def tau(cont: BType = ZERO, attr: Attr = NONE) -> BType:
    return Act(TAU, attr, cont)


def exclude(b: BType, names: Iterable[str]) -> BType:
    return Exclude(b, frozenset(names))


def project(b: BType, names: Iterable[str]) -> BType:
    return Project(b, frozenset(names))


def rename(pairs: Iterable[tuple[str, str]], b: BType) -> BType:
    ps = tuple((s, t) for s, t in pairs if s != t)
    if not ps:
        return b
    return Rename(ps, b)


def par_of(items: Iterable[BType]) -> BType:
    items = [i for i in items if i is not ZERO]
    if not items:
        return ZERO
    out_ = items[-1]
    for it in reversed(items[:-1]):
        out_ = Par(it, out_)
    return out_


def choice_of(items: Iterable[BType]) -> BType:
    items = list(items)
    if not items:
        return ZERO
    out_ = items[-1]
    for it in reversed(items[:-1]):
        out_ = Choice(it, out_)
    return out_


_var_counter = itertools.count(1)


def fresh_var(prefix: str = "a") -> str:
    return f"{prefix}{next(_var_counter)}"


def reset_fresh(seed: int = 0) -> None:
    """Restart fresh type-variable numbering (at ``seed + 1``)."""
    global _var_counter
    _var_counter = itertools.count(seed + 1)


# ---------------------------------------------------------------------------
# Structural helpers


def skey(a: BType) -> str:
    """A deterministic structural digest (stable across runs)."""
    k = a._skey
    if k is not None:
        return k
    stack = [a]
    while stack:
        n = stack[-1]
        pending = [c for c in n.children() if c._skey is None]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        if n._skey is not None:
            continue
        parts = [type(n).__name__]
        for f in n._fields:
            v = getattr(n, f)
            if isinstance(v, BType):
                parts.append(v._skey)
            elif isinstance(v, frozenset):
                parts.append(repr(sorted(v)))
            elif isinstance(v, Attr):
                parts.append(v.value)
            else:
                parts.append(repr(v))
        digest = hashlib.blake2b("\x00".join(parts).encode(), digest_size=12).hexdigest()
        object.__setattr__(n, "_skey", digest)
    return a._skey


def _memo_walk(a: BType, fn, memo: dict):
    if a in memo:
        return memo[a]
    r = fn(a)
    memo[a] = r
    return r


def free_names(a: BType) -> frozenset[str]:
    """Names that may appear in labels emitted by ``a``."""
    return _fn(a)


_FN: dict = {}


def _fn(a: BType) -> frozenset[str]:
    r = _FN.get(a)
    if r is not None:
        return r
    if isinstance(a, (Zero, TVar)):
        r = frozenset()
    elif isinstance(a, Act):
        r = _fn(a.cont) | frozenset(a.action[1:2])
    elif isinstance(a, (Par, Choice)):
        r = _fn(a.left) | _fn(a.right)
    elif isinstance(a, (Repl, Rec)):
        r = _fn(a.body)
    elif isinstance(a, Hide):
        r = _fn(a.body) - {a.name}
    elif isinstance(a, Rename):
        m = dict(a.pairs)
        r = frozenset(m.get(n, n) for n in _fn(a.body))
    elif isinstance(a, (Exclude, Project)):
        r = _fn(a.body)
    else:
        raise TypeError(a)
    _FN[a] = r
    return r


def all_names(a: BType) -> set[str]:
    """Every name syntactically present (including bound/renamed ones)."""
    out_: set[str] = set()
    seen = set()
    stack = [a]
    while stack:
        n = stack.pop()
        if n in seen:
            continue
        seen.add(n)
        if isinstance(n, Act):
            out_.update(n.action[1:2])
        elif isinstance(n, Hide):
            out_.add(n.name)
        elif isinstance(n, Rename):
            for s, t in n.pairs:
                out_.update((s, t))
        elif isinstance(n, (Exclude, Project)):
            out_.update(n.names)
        stack.extend(n.children())
    return out_


_FTV: dict = {}


def free_tvars(a: BType) -> frozenset[str]:
    r = _FTV.get(a)
    if r is not None:
        return r
    if isinstance(a, TVar):
        r = frozenset({a.var})
    elif isinstance(a, Rec):
        r = free_tvars(a.body) - {a.var}
    else:
        r = frozenset()
        for c in a.children():
            r |= free_tvars(c)
    _FTV[a] = r
    return r


def rebuild(a: BType, kids: list[BType]) -> BType:
    """Reconstruct ``a`` with new children (in field order)."""
    it = iter(kids)
    args = []
    for f in a._fields:
        v = getattr(a, f)
        args.append(next(it) if isinstance(v, BType) else v)
    return type(a)(*args)


def subst_tvar(a: BType, var: str, repl: BType) -> BType:
    """Replace free occurrences of type variable ``var`` by ``repl``.

    ``repl`` is assumed closed or at least not captured (bound variables are
    generated fresh, so capture does not arise in practice)."""
    return subst_tvars(a, {var: repl})


def subst_tvars(a: BType, sigma: dict[str, BType]) -> BType:
    memo: dict = {}

    def go(n: BType) -> BType:
        r = memo.get(n)
        if r is not None:
            return r
        ftv = free_tvars(n)
        if not (ftv & sigma.keys()):
            r = n
        elif isinstance(n, TVar):
            r = sigma[n.var]
        elif isinstance(n, Rec) and n.var in sigma:
            inner = {k: v for k, v in sigma.items() if k != n.var}
            r = Rec(n.var, subst_tvars(n.body, inner)) if inner else n
        else:
            r = rebuild(n, [go(c) for c in n.children()])
        memo[n] = r
        return r

    return go(a)


_UNFOLD: dict = {}


def unfold(r: Rec) -> BType:
    u = _UNFOLD.get(r)
    if u is None:
        u = subst_tvar(r.body, r.var, r)
        _UNFOLD[r] = u
    return u


def rename_names(a: BType, sigma: dict[str, str]) -> BType:
    """Eagerly rename names everywhere in ``a`` (actions, binders, operator
    name sets).  Used for alpha-conversion of hoisted restrictions."""
    if not sigma:
        return a
    memo: dict = {}

    def nm(x: str) -> str:
        return sigma.get(x, x)

    def go(n: BType) -> BType:
        r = memo.get(n)
        if r is not None:
            return r
        if isinstance(n, (Zero, TVar)):
            r = n
        elif isinstance(n, Act):
            act = n.action
            if len(act) > 1:
                act = (act[0], nm(act[1])) + act[2:]
            r = Act(act, n.attr, go(n.cont))
        elif isinstance(n, Hide):
            r = Hide(nm(n.name), go(n.body))
        elif isinstance(n, Rename):
            r = Rename(tuple((nm(s), nm(t)) for s, t in n.pairs), go(n.body))
        elif isinstance(n, Exclude):
            r = Exclude(go(n.body), frozenset(nm(x) for x in n.names))
        elif isinstance(n, Project):
            r = Project(go(n.body), frozenset(nm(x) for x in n.names))
        else:
            r = rebuild(n, [go(c) for c in n.children()])
        memo[n] = r
        return r

    return go(a)


def size(a: BType) -> int:
    """Number of distinct nodes (DAG size)."""
    seen = set()
    stack = [a]
    while stack:
        n = stack.pop()
        if n in seen:
            continue
        seen.add(n)
        stack.extend(n.children())
    return len(seen)


# ---------------------------------------------------------------------------
# Labels


def targets(label: tuple) -> frozenset[str]:
    k = label[0]
    if k == "tau":
        return frozenset()
    if k == "pair":
        return frozenset(label[1:])
    return frozenset(label[1:2])


def _rename_label(label: tuple, m: dict[str, str]) -> tuple:
    k = label[0]
    if k == "tau":
        return label
    if k == "pair":
        return ("pair", m.get(label[1], label[1]), m.get(label[2], label[2]))
    return (k, m.get(label[1], label[1])) + label[2:]


def show_label(label: tuple) -> str:
    k = label[0]
    if k == "tau":
        return "tau"
    if k == "out":
        return f"{label[1]}!"
    if k == "in":
        return f"{label[1]}?"
    if k == "acc":
        return f"{label[2]}({label[1]})"
    return "{" + f"{label[1]}?,{label[2]}!" + "}"


# ---------------------------------------------------------------------------
# Transitions


_TSTEP: dict = {}


def tstep(a: BType) -> tuple[tuple[tuple, BType], ...]:
    """All one-step transitions of ``a``.  Unguarded recursion contributes
    no transitions."""
    r = _TSTEP.get(a)
    if r is not None:
        return r
    res, tainted = _tstep(a, frozenset())
    if not tainted:
        _TSTEP[a] = res
    return res


def _tstep(a: BType, visiting: frozenset) -> tuple[tuple, bool]:
    cached = _TSTEP.get(a)
    if cached is not None:
        return cached, False
    tainted = False
    out_: list[tuple[tuple, BType]] = []
    if isinstance(a, Zero) or isinstance(a, TVar):
        pass
    elif isinstance(a, Act):
        out_.append((a.action, a.cont))
    elif isinstance(a, Choice):
        out_ += [(TAU, a.left), (TAU, a.right)]
    elif isinstance(a, Par):
        ls, t1 = _tstep(a.left, visiting)
        rs, t2 = _tstep(a.right, visiting)
        tainted = t1 or t2
        for l, a1 in ls:
            out_.append((l, Par(a1, a.right)))
        for l, a2 in rs:
            out_.append((l, Par(a.left, a2)))
        for l1, a1 in ls:
            for l2, a2 in rs:
                for pl in _pair(l1, l2):
                    out_.append((pl, Par(a1, a2)))
    elif isinstance(a, Repl):
        bs, tainted = _tstep(a.body, visiting)
        for l, b1 in bs:
            out_.append((l, Par(b1, a)))
        for l1, b1 in bs:
            for l2, b2 in bs:
                if l1[0] == "in" and l2[0] == "out":
                    for pl in _pair(l1, l2):
                        out_.append((pl, Par(b1, Par(b2, a))))
    elif isinstance(a, Rec):
        if a in visiting:
            return (), True
        res, tainted = _tstep(unfold(a), visiting | {a})
        out_ += res
    elif isinstance(a, Hide):
        bs, tainted = _tstep(a.body, visiting)
        x = a.name
        for l, b1 in bs:
            tg = targets(l)
            if x not in tg:
                out_.append((l, Hide(x, b1)))
            elif l == ("pair", x, x):
                out_.append((TAU, Hide(x, b1)))
    elif isinstance(a, Rename):
        bs, tainted = _tstep(a.body, visiting)
        m = dict(a.pairs)
        for l, b1 in bs:
            l2 = _rename_label(l, m)
            nb = Rename(a.pairs, b1)
            out_.append((l2, nb))
            if l2[0] == "pair" and l2[1] == l2[2]:
                out_.append((TAU, nb))
    elif isinstance(a, Exclude):
        bs, tainted = _tstep(a.body, visiting)
        for l, b1 in bs:
            tg = targets(l)
            nb = Exclude(b1, a.names)
            if tg <= a.names:
                out_.append((TAU, nb))
            elif not (tg & a.names):
                out_.append((l, nb))
    elif isinstance(a, Project):
        bs, tainted = _tstep(a.body, visiting)
        for l, b1 in bs:
            tg = targets(l)
            nb = Project(b1, a.names)
            if not (tg & a.names):
                out_.append((TAU, nb))
            elif tg <= a.names:
                out_.append((l, nb))
    else:
        raise TypeError(a)
    res = tuple(dict.fromkeys(out_))
    if not tainted:
        _TSTEP[a] = res
    return res, tainted


def _pair(l1: tuple, l2: tuple) -> list[tuple]:
    if l1[0] == "in" and l2[0] == "out":
        x, y = l1[1], l2[1]
    elif l1[0] == "out" and l2[0] == "in":
        x, y = l2[1], l1[1]
    else:
        return []
    if x == y:
        return [("pair", x, y), TAU]
    return [("pair", x, y)]


# ---------------------------------------------------------------------------
# The "disabled" predicate


_DIS: dict = {}


def disabled(a: BType, names: Iterable[str]) -> bool:
    """Least relation: ``a`` may stop here without leaving any access on
    ``names`` (or any successful-attributed action) pending."""
    s = frozenset(names)
    v, _ = _disabled(a, s, frozenset())
    return v


def _disabled(a: BType, s: frozenset, visiting: frozenset) -> tuple[bool, bool]:
    key = (a, s)
    c = _DIS.get(key)
    if c is not None:
        return c, False
    tainted = False
    if isinstance(a, Zero):
        v = True
    elif isinstance(a, TVar):
        v = False
    elif isinstance(a, Act):
        act = a.action
        if act[0] == "acc":
            if act[1] in s:
                v = False
            else:
                v, tainted = _disabled(a.cont, s, visiting)
        elif a.attr is SUCC:
            v, tainted = _disabled(a.cont, s, visiting)
        else:
            v = True
    elif isinstance(a, Par):
        v, tainted = _disabled(a.left, s, visiting)
        if v:
            v, t2 = _disabled(a.right, s, visiting)
            tainted = tainted or t2
    elif isinstance(a, Choice):
        v, tainted = _disabled(a.left, s, visiting)
        if not v:
            v, t2 = _disabled(a.right, s, visiting)
            tainted = tainted or t2
    elif isinstance(a, Repl):
        v, tainted = _disabled(a.body, s, visiting)
    elif isinstance(a, Hide):
        v, tainted = _disabled(a.body, s - {a.name}, visiting)
    elif isinstance(a, Exclude):
        v, tainted = _disabled(a.body, s - a.names, visiting)
    elif isinstance(a, Project):
        v, tainted = _disabled(a.body, s & a.names, visiting)
    elif isinstance(a, Rename):
        m = dict(a.pairs)
        pre = {z for z in s if z not in m} | {src for src, dst in a.pairs if dst in s}
        v, tainted = _disabled(a.body, frozenset(pre), visiting)
    elif isinstance(a, Rec):
        if key in visiting:
            return False, True
        v, tainted = _disabled(unfold(a), s, visiting | {key})
    else:
        raise TypeError(a)
    if not tainted:
        _DIS[key] = v
    return v, tainted


# ---------------------------------------------------------------------------
# State normalization (sound w.r.t. strong bisimilarity)


_NORM: dict = {}


def _par_items(a: BType) -> list[BType]:
    if isinstance(a, Par):
        return _par_items(a.left) + _par_items(a.right)
    return [a]


def norm(a: BType) -> BType:
    """Normalize the *active* part of a state: flatten and sort parallel
    components, drop ``0``, absorb ``A`` into a sibling ``*A``, and simplify
    static operators applied to ``0``."""
    r = _NORM.get(a)
    if r is not None:
        return r
    if isinstance(a, Par):
        items = [norm(i) for i in _par_items(a)]
        flat: list[BType] = []
        for i in items:
            flat += _par_items(i)
        flat = [i for i in flat if i is not ZERO]
        repl_bodies = {i.body for i in flat if isinstance(i, Repl)}
        flat = [i for i in flat if i not in repl_bodies]
        # keep one copy of each replicated component
        seen_repl = set()
        kept = []
        for i in flat:
            if isinstance(i, Repl):
                if i in seen_repl:
                    continue
                seen_repl.add(i)
            kept.append(i)
        kept.sort(key=skey)
        r = par_of(kept)
    elif isinstance(a, (Hide, Rename, Exclude, Project)):
        body = norm(a.body)
        if body is ZERO:
            r = ZERO
        else:
            r = rebuild(a, [body])
    elif isinstance(a, Repl) and a.body is ZERO:
        r = ZERO
    else:
        r = a
    _NORM[a] = r
    return r


# ---------------------------------------------------------------------------
# State spaces


class LTS:
    """Explicit reachable transition system of a (finite-state) type."""

    def __init__(self, start: BType, bound: int = 2000):
        self.start = norm(start)
        self.states: list[BType] = [self.start]
        self.trans: dict[BType, list[tuple[tuple, BType]]] = {}
        queue = deque([self.start])
        seen = {self.start}
        while queue:
            s = queue.popleft()
            succ = []
            for l, t in tstep(s):
                t = norm(t)
                succ.append((l, t))
                if t not in seen:
                    if len(seen) >= bound:
                        raise NotFiniteState(
                            f"more than {bound} reachable states from {show(start)[:80]}")
                    seen.add(t)
                    self.states.append(t)
                    queue.append(t)
            self.trans[s] = list(dict.fromkeys(succ))
        self._tau_closure: dict = {}

    def tau_closure(self, s: BType) -> frozenset[BType]:
        c = self._tau_closure.get(s)
        if c is not None:
            return c
        seen = {s}
        stack = [s]
        while stack:
            q = stack.pop()
            for l, t in self.trans[q]:
                if l == TAU and t not in seen:
                    seen.add(t)
                    stack.append(t)
        c = frozenset(seen)
        self._tau_closure[s] = c
        return c

    def weak(self, s: BType, label: tuple) -> set[BType]:
        if label == TAU:
            return set(self.tau_closure(s))
        out_ = set()
        for q in self.tau_closure(s):
            for l, t in self.trans[q]:
                if l == label:
                    out_ |= self.tau_closure(t)
        return out_


def is_finite_state(a: BType, bound: int = 2000) -> bool:
    try:
        LTS(a, bound)
        return True
    except NotFiniteState:
        return False


def simulates(a1: BType, a2: BType, extended: bool = False, bound: int = 2000) -> bool:
    """Is ``a1 <= a2`` (``a2`` weakly simulates ``a1``)?

    In extended mode the simulation must also preserve ``disabled(-, S)`` for
    every subset ``S`` of the free names of the two types.
    """
    l1 = LTS(a1, bound)
    l2 = LTS(a2, bound)
    subsets: list[frozenset] = []
    if extended:
        names = sorted(free_names(a1) | free_names(a2))
        if len(names) > 10:
            raise ValueError("too many free names for the extended check")
        for k in range(len(names) + 1):
            subsets += [frozenset(c) for c in itertools.combinations(names, k)]

    def compatible(p: BType, q: BType) -> bool:
        return all(disabled(q, s) for s in subsets if disabled(p, s))

    rel = {(p, q) for p in l1.states for q in l2.states if not extended or compatible(p, q)}
    weak_cache: dict = {}

    def weak(q: BType, l: tuple) -> set[BType]:
        k = (q, l)
        w = weak_cache.get(k)
        if w is None:
            w = l2.weak(q, l)
            weak_cache[k] = w
        return w

    changed = True
    while changed:
        changed = False
        for p, q in list(rel):
            for l, p1 in l1.trans[p]:
                if not any((p1, q1) in rel for q1 in weak(q, l)):
                    rel.discard((p, q))
                    changed = True
                    break
    return (l1.start, l2.start) in rel


def equivalent(a1: BType, a2: BType, extended: bool = False, bound: int = 2000) -> bool:
    return simulates(a1, a2, extended, bound) and simulates(a2, a1, extended, bound)


# ---------------------------------------------------------------------------
# Traces


DOWN = "v"


def traces_bounded(a: BType, x: str, maxlen: int, extended: bool = False,
                   cap: int = 10_000) -> tuple[set[tuple[str, ...]], bool]:
    """Weak access traces on ``x`` of length <= ``maxlen`` (prefix closed).

    With ``extended``, ``w v`` is included whenever some state reached by
    ``w`` is disabled with respect to ``{x}``.  Returns the trace set and a
    flag telling whether the tau-closure cap was hit (result partial).
    """
    start = norm(project(a, {x}))
    partial = False
    total = 0

    def closure(states: set[BType]) -> set[BType]:
        nonlocal partial, total
        seen = set(states)
        stack = list(states)
        while stack:
            s = stack.pop()
            for l, t in tstep(s):
                if l == TAU:
                    t = norm(t)
                    if t not in seen:
                        if total + len(seen) >= cap:
                            partial = True
                            continue
                        seen.add(t)
                        stack.append(t)
        total += len(seen)
        return seen

    traces: set[tuple[str, ...]] = {()}
    level: dict[tuple[str, ...], set[BType]] = {(): closure({start})}
    for n in range(maxlen + 1):
        nxt: dict[tuple[str, ...], set[BType]] = {}
        for w, states in level.items():
            if extended and any(disabled(s, {x}) for s in states):
                if n < maxlen:
                    traces.add(w + (DOWN,))
            if n == maxlen:
                continue
            for s in states:
                for l, t in tstep(s):
                    if l[0] == "acc" and l[1] == x:
                        nxt.setdefault(w + (l[2],), set()).add(norm(t))
        if n == maxlen:
            break
        level = {}
        for w, states in nxt.items():
            level[w] = closure(states)
            traces.add(w)
    return traces, partial


# ---------------------------------------------------------------------------
# Pretty printing


def _act_str(act: tuple, attr: Attr) -> str:
    c = attr is SUCC
    k = act[0]
    if k == "out":
        return f"{act[1]}{'!!' if c else '!'}"
    if k == "in":
        return f"{act[1]}{'??' if c else '?'}"
    if k == "acc":
        return f"acc({act[1]}, {act[2]})"
    return "tau_c" if c else "tau"


def _names(ns) -> str:
    return ",".join(sorted(ns))


def show(a: BType, _prec: int = 0) -> str:
    """ASCII rendering.  Precedence: prefix > choice (&) > parallel (|)."""
    if isinstance(a, Zero):
        return "O"
    if isinstance(a, TVar):
        return f"${a.var}"
    if isinstance(a, Act):
        return f"{_act_str(a.action, a.attr)}. {show(a.cont, 2)}"
    if isinstance(a, Par):
        s = " | ".join(show(i, 1) for i in _par_items(a))
        return f"({s})" if _prec >= 1 else s
    if isinstance(a, Choice):
        s = f"{show(a.left, 2)} & {show(a.right, 1)}"
        return f"({s})" if _prec >= 2 else s
    if isinstance(a, Repl):
        return f"*{_atom(a.body)}"
    if isinstance(a, Hide):
        return f"(new {a.name}){_atom(a.body)}"
    if isinstance(a, Rename):
        sub = ",".join(f"{t}/{s}" for s, t in a.pairs)
        return f"[{sub}]{_atom(a.body)}"
    if isinstance(a, Exclude):
        return f"{_atom(a.body)}^{{{_names(a.names)}}}"
    if isinstance(a, Project):
        return f"{_atom(a.body)}|_{{{_names(a.names)}}}"
    if isinstance(a, Rec):
        return f"(mu ${a.var}. {show(a.body)})"
    raise TypeError(a)


def _atom(a: BType) -> str:
    if isinstance(a, (Zero, TVar, Rec)):
        return show(a)
    return f"({show(a)})"
