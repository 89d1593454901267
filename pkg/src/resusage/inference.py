"""Type inference: from a process to a behavioral type plus trace-inclusion
obligations.

The algorithm runs in two stages.  The first walks the process and emits
value-type equalities, "is a channel" checks, lower bounds ``b >= A`` for the
behavioral variables attached to channel types, and one inclusion obligation
per resource creation.  The second stage unifies value types and then solves
the lower bounds as least fixpoints ``b := mu b.(A1 & ... & An)``, eliminating
mutually recursive variables one at a time.

Channel types carry a behavioral variable describing what a receiver does with
its arguments.  Arguments are referred to positionally through the reserved
names ``@1``, ``@2``, ...; a receiver's lower bound is renamed from its own
parameter names to these placeholders and a sender renames them back to the
actual arguments.  Two channel types are equal only when their behavioral
variables are identified.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import behavior as bt
from .behavior import BType
from .syntax import (
    Acc, Attr, BoolLit, If, In, Nil, Nu, NuR, Opaque, Out, Par, Process, Repl,
    TraceSpec, Value, Var, show_spec,
)


class InferenceError(Exception):
    """The process is not typable."""


class Mismatch(InferenceError):
    pass


class NotAChannel(InferenceError):
    pass


class OccursCheck(InferenceError):
    pass


# ---------------------------------------------------------------------------
# Value types


class ValueType:
    __slots__ = ()


@dataclass(frozen=True)
class TBool(ValueType):
    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class TRes(ValueType):
    def __str__(self) -> str:
        return "res"


@dataclass(frozen=True)
class TChan(ValueType):
    params: tuple
    beh: str  # behavioral variable

    def __str__(self) -> str:
        return f"ch({', '.join(map(str, self.params))}; ${self.beh})"


@dataclass(frozen=True)
class TyVar(ValueType):
    id: int

    def __str__(self) -> str:
        return f"'t{self.id}"


BOOL = TBool()
RES = TRes()


def placeholder(i: int) -> str:
    """Reserved name of the i-th (1-based) channel argument."""
    return f"@{i}"


# ---------------------------------------------------------------------------
# Constraints


@dataclass(frozen=True)
class Eq:
    left: ValueType
    right: ValueType
    origin: str = ""

    def __str__(self) -> str:
        return f"{self.left} = {self.right}"


@dataclass(frozen=True)
class IsChan:
    type: ValueType
    name: str

    def __str__(self) -> str:
        return f"ischan({self.name} : {self.type})"


@dataclass(frozen=True)
class Sub:
    """Lower bound ``$beh >= body``."""

    beh: str
    body: BType

    def __str__(self) -> str:
        return f"${self.beh} >= {bt.show(self.body)}"


@dataclass(frozen=True)
class Incl:
    """Obligation: the (extended) traces of ``body`` on ``res`` lie in ``spec``."""

    res: str
    body: BType
    spec: TraceSpec
    extended: bool = False

    def __str__(self) -> str:
        kind = "etrace" if self.extended else "trace"
        return f"{kind}({self.res}, {bt.show(self.body)}) is included in {show_spec(self.spec)}"


Constraint = Eq | IsChan | Sub | Incl


# ---------------------------------------------------------------------------
# Stage one


class _Ctx:
    def __init__(self, mode: str):
        self.mode = mode
        self._tv = itertools.count(1)
        self._bv = itertools.count(1)

    def tyvar(self) -> TyVar:
        return TyVar(next(self._tv))

    def behvar(self) -> str:
        return f"b{next(self._bv)}"


Env = dict[str, ValueType]


def _merge(envs: list[Env], cs: list) -> Env:
    """Combine environments left to right; overlapping names must agree."""
    out: Env = {}
    for env in envs:
        for x, t in env.items():
            if x in out:
                cs.append(Eq(out[x], t, x))
            else:
                out[x] = t
    return out


def merge_env(envs: list[Env]) -> tuple[Env, list]:
    """The leftmost-binding union of ``envs`` and one equality per name
    bound in two of them."""
    cs: list = []
    return _merge(envs, cs), cs


def _ptv(v: Value, ctx: _Ctx) -> tuple[Env, ValueType]:
    if isinstance(v, Var):
        t = ctx.tyvar()
        return {v.name: t}, t
    return {}, BOOL


def ptv(v: Value, mode: str = "safety") -> tuple[Env, ValueType]:
    """Environment and type of a value: a fresh variable for a name, ``bool``
    for a literal."""
    return _ptv(v, _Ctx(mode))


def pt(p: Process, mode: str = "safety", ctx: _Ctx | None = None) -> tuple[Env, BType, list]:
    """First stage: environment, behavioral type and constraints of ``p``."""
    ctx = ctx or _Ctx(mode)
    cs: list = []
    env, a = _pt(p, ctx, cs)
    return env, a, cs


def _attr(a: Attr, ctx: _Ctx) -> Attr:
    return a if ctx.mode == "liveness" else Attr.NONE


def _pt(p: Process, ctx: _Ctx, cs: list) -> tuple[Env, BType]:
    if isinstance(p, Nil):
        return {}, bt.ZERO
    if isinstance(p, Out):
        env0, a0 = _pt(p.cont, ctx, cs)
        beta = ctx.behvar()
        arg_envs, arg_types = [], []
        for v in p.args:
            e, t = _ptv(v, ctx)
            arg_envs.append(e)
            arg_types.append(t)
        chan = TChan(tuple(arg_types), beta)
        env = _merge([env0, {p.chan: chan}] + arg_envs, cs)
        pairs = [(placeholder(i + 1), v.name) for i, v in enumerate(p.args)
                 if isinstance(v, Var)]
        carried = bt.rename(pairs, bt.TVar(beta))
        return env, bt.Act(("out", p.chan), _attr(p.attr, ctx), bt.par_of([carried, a0]))
    if isinstance(p, In):
        env0, a0 = _pt(p.cont, ctx, cs)
        beta = ctx.behvar()
        ptypes = tuple(env0.get(y) or ctx.tyvar() for y in p.params)
        chan = TChan(ptypes, beta)
        inner = {k: v for k, v in env0.items() if k not in p.params}
        env = _merge([inner, {p.chan: chan}], cs)
        params = frozenset(p.params)
        body = bt.rename([(y, placeholder(i + 1)) for i, y in enumerate(p.params)],
                         bt.Project(a0, params))
        cs.append(Sub(beta, body))
        cont = bt.Exclude(a0, params) if params else a0
        return env, bt.Act(("in", p.chan), _attr(p.attr, ctx), cont)
    if isinstance(p, Par):
        e1, a1 = _pt(p.left, ctx, cs)
        e2, a2 = _pt(p.right, ctx, cs)
        return _merge([e1, e2], cs), bt.Par(a1, a2)
    if isinstance(p, If):
        e1, a1 = _pt(p.then, ctx, cs)
        e2, a2 = _pt(p.orelse, ctx, cs)
        ev, tv = _ptv(p.cond, ctx)
        cs.append(Eq(tv, BOOL, str(p.cond)))
        return _merge([e1, e2, ev], cs), bt.Choice(a1, a2)
    if isinstance(p, Nu):
        e0, a0 = _pt(p.body, ctx, cs)
        if p.name in e0:
            cs.append(IsChan(e0[p.name], p.name))
        env = {k: v for k, v in e0.items() if k != p.name}
        return env, bt.Hide(p.name, a0)
    if isinstance(p, Repl):
        e0, a0 = _pt(p.body, ctx, cs)
        return e0, bt.Repl(a0)
    if isinstance(p, Acc):
        e0, a0 = _pt(p.cont, ctx, cs)
        env = _merge([e0, {p.res: RES}], cs)
        return env, bt.Act(("acc", p.res, p.label), Attr.NONE, a0)
    if isinstance(p, NuR):
        e0, a0 = _pt(p.body, ctx, cs)
        if p.res in e0:
            cs.append(Eq(e0[p.res], RES, p.res))
        env = {k: v for k, v in e0.items() if k != p.res}
        cs.append(Incl(p.res, a0, p.spec, ctx.mode == "liveness"))
        return env, bt.Exclude(a0, frozenset({p.res}))
    raise TypeError(p)


# ---------------------------------------------------------------------------
# Unification


class Solution:
    """Most general unifier of value types plus the induced identification of
    behavioral variables."""

    def __init__(self) -> None:
        self.bind: dict[int, ValueType] = {}
        self.beh_parent: dict[str, str] = {}

    def beh_rep(self, b: str) -> str:
        root = b
        while self.beh_parent.get(root, root) != root:
            root = self.beh_parent[root]
        while self.beh_parent.get(b, b) != root:
            nxt = self.beh_parent[b]
            self.beh_parent[b] = root
            b = nxt
        return root

    def union_beh(self, a: str, b: str) -> None:
        ra, rb = self.beh_rep(a), self.beh_rep(b)
        if ra != rb:
            # keep the older (smaller-numbered) variable as representative
            if _bnum(rb) < _bnum(ra):
                ra, rb = rb, ra
            self.beh_parent[rb] = ra

    def walk(self, t: ValueType) -> ValueType:
        while isinstance(t, TyVar) and t.id in self.bind:
            t = self.bind[t.id]
        return t

    def resolve(self, t: ValueType) -> ValueType:
        t = self.walk(t)
        if isinstance(t, TChan):
            return TChan(tuple(self.resolve(p) for p in t.params), self.beh_rep(t.beh))
        return t

    def occurs(self, v: TyVar, t: ValueType) -> bool:
        t = self.walk(t)
        if t == v:
            return True
        if isinstance(t, TChan):
            return any(self.occurs(v, p) for p in t.params)
        return False


def _bnum(b: str) -> int:
    digits = "".join(ch for ch in b if ch.isdigit())
    return int(digits) if digits else 0


def unify(constraints: list) -> Solution:
    """Solve the equality and channel constraints (others are ignored)."""
    sol = Solution()
    work = [c for c in constraints if isinstance(c, Eq)]
    while work:
        c = work.pop()
        a, b = sol.walk(c.left), sol.walk(c.right)
        if a == b:
            continue
        if isinstance(a, TyVar) or isinstance(b, TyVar):
            v, t = (a, b) if isinstance(a, TyVar) else (b, a)
            if sol.occurs(v, t):
                raise OccursCheck(f"recursive type for {c.origin or v}: {v} = {sol.resolve(t)}")
            sol.bind[v.id] = t
            continue
        if isinstance(a, TChan) and isinstance(b, TChan):
            if len(a.params) != len(b.params):
                raise Mismatch(f"channel {c.origin} used with {len(a.params)} and "
                               f"{len(b.params)} arguments")
            sol.union_beh(a.beh, b.beh)
            for pa, pb in zip(a.params, b.params):
                work.append(Eq(pa, pb, c.origin))
            continue
        raise Mismatch(f"type mismatch for {c.origin}: {sol.resolve(a)} vs {sol.resolve(b)}")
    for c in constraints:
        if isinstance(c, IsChan):
            t = sol.walk(c.type)
            if isinstance(t, (TBool, TRes)):
                raise NotAChannel(f"{c.name} is restricted as a channel but has type {t}")
    return sol


# ---------------------------------------------------------------------------
# Stage two


def solve_behaviors(constraints: list, sol: Solution) -> dict[str, BType]:
    """Least solutions of the lower bounds, as closed recursive types.

    Every behavioral variable mentioned anywhere gets a solution; variables
    without lower bounds denote ``0``.
    """
    mentioned: set[str] = set()
    bodies: dict[str, list[BType]] = {}
    for c in constraints:
        if isinstance(c, Sub):
            mentioned.add(c.beh)
            mentioned |= bt.free_tvars(c.body)
        elif isinstance(c, Incl):
            mentioned |= bt.free_tvars(c.body)
    to_rep = {b: bt.TVar(sol.beh_rep(b)) for b in mentioned}
    ident = {b: t for b, t in to_rep.items() if t.var != b}
    for c in constraints:
        if isinstance(c, Sub):
            rep = sol.beh_rep(c.beh)
            body = bt.subst_tvars(c.body, ident) if ident else c.body
            bodies.setdefault(rep, [])
            if body is not bt.TVar(rep):
                bodies[rep].append(body)
    reps = sorted({sol.beh_rep(b) for b in mentioned}, key=_bnum)
    eqs: dict[str, BType] = {}
    for r in reps:
        items = list(dict.fromkeys(bodies.get(r, [])))
        eqs[r] = bt.choice_of(items) if items else bt.ZERO
    for r in reps:
        e = eqs[r]
        if r in bt.free_tvars(e):
            e = bt.Rec(r, e)
        eqs[r] = e
        for other in reps:
            if other != r and r in bt.free_tvars(eqs[other]):
                eqs[other] = bt.subst_tvar(eqs[other], r, e)
    out = {b: eqs[sol.beh_rep(b)] for b in mentioned}
    return out


@dataclass
class Obligation:
    resource: str
    body: BType
    spec: TraceSpec
    extended: bool

    def __str__(self) -> str:
        kind = "etrace" if self.extended else "trace"
        return f"{kind}({self.resource}, {bt.show(self.body)}) is included in {show_spec(self.spec)}"


@dataclass
class Inference:
    env: Env
    type: BType
    raw_type: BType
    constraints: list
    solution: Solution
    behaviors: dict[str, BType]
    obligations: list[Obligation] = field(default_factory=list)

    def resolved_env(self) -> dict[str, ValueType]:
        return {x: self.solution.resolve(t) for x, t in self.env.items()}


def reduce_step2(constraints: list, sol: Solution | None = None) -> list[Obligation]:
    """Second stage: substitute least behavior solutions into the trace
    inclusion constraints."""
    sol = sol or unify(constraints)
    behaviors = solve_behaviors(constraints, sol)
    out = []
    for c in constraints:
        if isinstance(c, Incl):
            body = bt.subst_tvars(c.body, behaviors) if behaviors else c.body
            out.append(Obligation(c.res, body, c.spec, c.extended))
    return out


def infer(p: Process, mode: str = "safety") -> Inference:
    """Run both stages and return closed types and obligations.

    Raises ``InferenceError`` for untypable processes.
    """
    env, a, cs = pt(p, mode)
    sol = unify(cs)
    behaviors = solve_behaviors(cs, sol)
    top = bt.subst_tvars(a, behaviors) if behaviors else a
    obligations = reduce_step2(cs, sol)
    return Inference(env, top, a, cs, sol, behaviors, obligations)
