"""Normal forms for behavioral types and the finite basis of a type.

The pipeline applied to an obligation body is::

    lift_nu  ->  eliminate_static_ops  ->  atoms / decompose

``lift_nu`` hoists every restriction to the top (an over-approximation when a
restriction sits under replication or recursion: all unfoldings then share
one channel).  ``eliminate_static_ops`` pushes renaming, exclusion and
projection into the prefixes, introducing fresh recursion variables for
each distinct (definition, label-transformer) pair, which keeps the result
finite.  Atoms are the prefixed, choice, replicated and recursive subterms
reachable by unfolding; every derivative of an atom is a parallel
composition of atoms, so the type becomes a Petri net over them.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import behavior as bt
from .behavior import (
    Act, BType, Choice, Exclude, Hide, Par, Project, Rec, Rename, Repl, TVar, Zero,
)


class AtomBoundExceeded(Exception):
    pass


class NotInSpan(Exception):
    """A term is not a parallel composition of known atoms (internal error)."""


# ---------------------------------------------------------------------------
# Hoisting restrictions


_HAS_HIDE: dict = {}


def _has_hide(a: BType) -> bool:
    r = _HAS_HIDE.get(a)
    if r is None:
        r = isinstance(a, Hide) or any(_has_hide(c) for c in a.children())
        _HAS_HIDE[a] = r
    return r


def split_hidden(a: BType) -> tuple[list[str], BType]:
    """Strip the leading restrictions of ``a``."""
    names = []
    while isinstance(a, Hide):
        names.append(a.name)
        a = a.body
    return names, a


def lift_nu(a: BType) -> BType:
    """Move every restriction to the top, renaming each hoisted occurrence
    apart.  Projections absorb hoisted names; exclusions and renamings
    are unaffected because the names are fresh."""
    used = bt.all_names(a)
    hidden, body = _lift(a, used)
    for y in reversed(hidden):
        body = Hide(y, body)
    return body


def nu_was_lifted(a: BType) -> bool:
    """Does lifting lose precision, i.e. does a restriction sit under a
    replication or a recursion (so that all copies would share one name)?
    Hoisting past prefixes, choices and static operators is exact since the
    hoisted names are fresh."""
    seen: set = set()
    stack = [a]
    while stack:
        t = stack.pop()
        if t in seen or not _has_hide(t):
            continue
        seen.add(t)
        if isinstance(t, (Repl, Rec)):
            return True
        stack.extend(t.children())
    return False


def _fresh(base: str, used: set[str]) -> str:
    root = base.split("#")[0]
    k = 1
    while f"{root}#{k}" in used:
        k += 1
    name = f"{root}#{k}"
    used.add(name)
    return name


def _lift(a: BType, used: set[str]) -> tuple[list[str], BType]:
    if not _has_hide(a):
        return [], a
    if isinstance(a, Hide):
        y = _fresh(a.name, used)
        inner = bt.rename_names(a.body, {a.name: y})
        ys, body = _lift(inner, used)
        return [y] + ys, body
    if isinstance(a, Act):
        ys, c = _lift(a.cont, used)
        return ys, Act(a.action, a.attr, c)
    if isinstance(a, (Par, Choice)):
        y1, l = _lift(a.left, used)
        y2, r = _lift(a.right, used)
        return y1 + y2, type(a)(l, r)
    if isinstance(a, Repl):
        ys, b = _lift(a.body, used)
        return ys, Repl(b)
    if isinstance(a, Rec):
        ys, b = _lift(a.body, used)
        return ys, Rec(a.var, b)
    if isinstance(a, Rename):
        ys, b = _lift(a.body, used)
        return ys, Rename(a.pairs, b)
    if isinstance(a, Exclude):
        ys, b = _lift(a.body, used)
        return ys, Exclude(b, a.names)
    if isinstance(a, Project):
        ys, b = _lift(a.body, used)
        return ys, Project(b, a.names | frozenset(ys))
    raise TypeError(a)


# ---------------------------------------------------------------------------
# Eliminating renaming, exclusion and projection


class _Ctx:
    """A label transformer: maps each name to a name or to ``None`` (the label
    becomes ``tau``).  Names absent from ``mapping`` map to themselves, or to
    ``None`` when ``default_tau`` holds."""

    __slots__ = ("mapping", "default_tau")

    def __init__(self, mapping: dict, default_tau: bool = False):
        self.mapping = mapping
        self.default_tau = default_tau

    def __call__(self, n: str):
        if n in self.mapping:
            return self.mapping[n]
        return None if self.default_tau else n

    def rename(self, pairs) -> "_Ctx":
        m = dict(self.mapping)
        for s, t in pairs:
            m[s] = self(t)
        return _Ctx(m, self.default_tau)

    def exclude(self, names) -> "_Ctx":
        m = dict(self.mapping)
        for n in names:
            m[n] = None
        return _Ctx(m, self.default_tau)

    def project(self, names) -> "_Ctx":
        return _Ctx({n: self(n) for n in names}, True)

    def key(self, names) -> tuple:
        return tuple(sorted((n, self(n) or "") for n in names))


def _emitted(a: BType, env: dict, memo: dict) -> frozenset[str]:
    """Names that labels of ``a`` may carry; ``env`` gives the sets for free
    type variables."""
    k = a
    if not bt.free_tvars(a):
        r = memo.get(k)
        if r is not None:
            return r
    if isinstance(a, Zero):
        r = frozenset()
    elif isinstance(a, TVar):
        r = env.get(a.var, frozenset())
    elif isinstance(a, Act):
        r = _emitted(a.cont, env, memo) | frozenset(a.action[1:2])
    elif isinstance(a, (Par, Choice)):
        r = _emitted(a.left, env, memo) | _emitted(a.right, env, memo)
    elif isinstance(a, Repl):
        r = _emitted(a.body, env, memo)
    elif isinstance(a, Rec):
        inner = dict(env)
        inner[a.var] = frozenset()
        r = _emitted(a.body, inner, memo)
    elif isinstance(a, Rename):
        m = dict(a.pairs)
        r = frozenset(m.get(n, n) for n in _emitted(a.body, env, memo))
    elif isinstance(a, (Exclude, Project)):
        r = _emitted(a.body, env, memo)
    elif isinstance(a, Hide):
        r = _emitted(a.body, env, memo) - {a.name}
    else:
        raise TypeError(a)
    if not bt.free_tvars(a):
        memo[k] = r
    return r


def eliminate_static_ops(b: BType) -> BType:
    """Rewrite ``b`` (free of restrictions) into an equivalent type without
    renaming, exclusion or projection."""
    memo: dict = {}

    def fresh() -> str:
        return bt.fresh_var("e")

    def act(a: Act, ctx: _Ctx) -> tuple:
        k = a.action[0]
        if k == "tau":
            return a.action, a.attr
        n = ctx(a.action[1])
        if n is None:
            return bt.TAU, (bt.SUCC if k == "acc" else a.attr)
        return (k, n) + a.action[2:], a.attr

    def go(a: BType, ctx: _Ctx, F: dict, D: dict) -> BType:
        if isinstance(a, Zero):
            return a
        if isinstance(a, Act):
            action, attr = act(a, ctx)
            return Act(action, attr, go(a.cont, ctx, F, D))
        if isinstance(a, (Par, Choice)):
            return type(a)(go(a.left, ctx, F, D), go(a.right, ctx, F, D))
        if isinstance(a, Repl):
            return Repl(go(a.body, ctx, F, D))
        if isinstance(a, Rename):
            return go(a.body, ctx.rename(a.pairs), F, D)
        if isinstance(a, Exclude):
            return go(a.body, ctx.exclude(a.names), F, D)
        if isinstance(a, Project):
            return go(a.body, ctx.project(a.names), F, D)
        if isinstance(a, Rec):
            env = {v: e[1] for v, e in D.items()}
            env[a.var] = frozenset()
            names = _emitted(a.body, env, memo)
            entry = (a, names, D)
            return enter(entry, ctx, F)
        if isinstance(a, TVar):
            if a.var not in D:
                raise ValueError(f"free type variable ${a.var}")
            return enter(D[a.var], ctx, F)
        if isinstance(a, Hide):
            raise ValueError("restrictions must be lifted before elimination")
        raise TypeError(a)

    def enter(entry, ctx: _Ctx, F: dict) -> BType:
        rec, names, d_def = entry
        key = (rec, ctx.key(names))
        if key in F:
            return TVar(F[key])
        v = fresh()
        F2 = dict(F)
        F2[key] = v
        D2 = dict(d_def)
        D2[rec.var] = entry
        body = go(rec.body, ctx, F2, D2)
        if v in bt.free_tvars(body):
            return Rec(v, body)
        return body

    return go(b, _Ctx({}), {}, {})


# ---------------------------------------------------------------------------
# Simplification


def _unguarded_tvars(a: BType) -> frozenset[str]:
    """Type variables with an occurrence not under any prefix or choice."""
    if isinstance(a, TVar):
        return frozenset({a.var})
    if isinstance(a, Par):
        return _unguarded_tvars(a.left) | _unguarded_tvars(a.right)
    if isinstance(a, Repl):
        return _unguarded_tvars(a.body)
    if isinstance(a, Rec):
        return _unguarded_tvars(a.body) - {a.var}
    return frozenset()


def simplify(b: BType, extended: bool = False) -> BType:
    """Over-approximating clean-up of an eliminated type.

    * a subterm that can only ever emit ``tau`` is replaced by ``0`` (traces
      are unchanged; ``disabled`` can only become true more often);
    * ``tau_c`` prefixes are dropped (neither traces nor ``disabled`` change);
    * without the extended (liveness) semantics, plain ``tau`` prefixes and
      choices with an inert branch ``A & 0`` are dropped as well.

    A prefix is kept when dropping it would leave a recursion variable
    unguarded.
    """
    memo: dict = {}
    emitted_memo: dict = {}

    def go(a: BType, env: dict, open_vars: frozenset) -> BType:
        # open_vars: recursion variables bound above with no guard since
        closed = not bt.free_tvars(a)
        key = (a, None if closed else open_vars & bt.free_tvars(a))
        r = memo.get(key)
        if r is None:
            r = _go(a, env, open_vars)
            if closed:
                memo[key] = r
        return r

    def _go(a: BType, env: dict, open_vars: frozenset) -> BType:
        if isinstance(a, (Zero, TVar)):
            return a
        if not _emitted(a, env, emitted_memo):
            return bt.ZERO
        if isinstance(a, Act):
            if a.action == bt.TAU and (a.attr is bt.SUCC or not extended):
                cont = go(a.cont, env, open_vars)
                if not (_unguarded_tvars(cont) & open_vars):
                    return cont
            return Act(a.action, a.attr, go(a.cont, env, frozenset()))
        if isinstance(a, Par):
            return bt.par_of([go(a.left, env, open_vars), go(a.right, env, open_vars)])
        if isinstance(a, Choice):
            l, r = go(a.left, env, frozenset()), go(a.right, env, frozenset())
            if l is r:
                return l
            if not extended:
                if l is bt.ZERO:
                    return r
                if r is bt.ZERO:
                    return l
            return Choice(l, r)
        if isinstance(a, Repl):
            body = go(a.body, env, open_vars)
            return bt.ZERO if body is bt.ZERO else Repl(body)
        if isinstance(a, Rec):
            inner = dict(env)
            inner[a.var] = _emitted(a, env, emitted_memo)
            body = go(a.body, inner, open_vars | {a.var})
            if body is TVar(a.var):
                return bt.ZERO
            if a.var not in bt.free_tvars(body):
                return body
            return Rec(a.var, body)
        raise TypeError(a)

    return canonical_vars(go(b, {}, frozenset()))


def canonical_vars(b: BType) -> BType:
    """Rename bound recursion variables by binding depth, so that
    alpha-equivalent closed subterms become the same (hash-consed) node."""
    memo: dict = {}

    def go(a: BType, depth: int, ren: dict) -> BType:
        key = (a, depth) if not bt.free_tvars(a) else None
        if key is not None and key in memo:
            return memo[key]
        if isinstance(a, TVar):
            r = TVar(ren.get(a.var, a.var))
        elif isinstance(a, Rec):
            v = f"r{depth}"
            inner = dict(ren)
            inner[a.var] = v
            r = Rec(v, go(a.body, depth + 1, inner))
        elif isinstance(a, Zero):
            r = a
        else:
            r = bt.rebuild(a, [go(c, depth, ren) for c in a.children()])
        if key is not None:
            memo[key] = r
        return r

    return go(b, 0, {})


# ---------------------------------------------------------------------------
# Basis


@dataclass
class Basis:
    """Atoms of a lifted, eliminated type and the decomposition of its body."""

    hidden: list[str]
    body: BType
    atoms: list[BType] = field(default_factory=list)
    index: dict = field(default_factory=dict)
    fold_table: dict = field(default_factory=dict)
    initial: tuple[int, ...] = ()
    nu_lifted: bool = False

    def fold(self, t: BType) -> BType:
        return self.fold_table.get(t, t)

    def decompose(self, c: BType) -> tuple[int, ...]:
        vec = [0] * len(self.atoms)
        for comp in _components(c):
            f = self.fold(comp)
            j = self.index.get(f)
            if j is None:
                raise NotInSpan(bt.show(comp)[:200])
            vec[j] += 1
        return tuple(vec)


def _components(c: BType) -> list[BType]:
    out = []
    stack = [c]
    while stack:
        t = stack.pop()
        if isinstance(t, Par):
            stack.append(t.right)
            stack.append(t.left)
        elif not isinstance(t, Zero):
            out.append(t)
    return out


def compute_atoms(b: BType, bound: int = 2000) -> tuple[list[BType], dict, dict]:
    """Atoms of ``b`` in depth-first discovery order.

    Recursive types are identified with their unfoldings, so an unfolding is
    never an atom of its own.  Raises ``AtomBoundExceeded`` past ``bound``.
    """
    atoms: list[BType] = []
    index: dict = {}
    fold_table: dict = {}

    def add(t: BType) -> bool:
        if t in index:
            return False
        if len(atoms) >= bound:
            raise AtomBoundExceeded(f"more than {bound} atoms")
        index[t] = len(atoms)
        atoms.append(t)
        return True

    stack: list[tuple[str, BType]] = [("visit", b)]
    while stack:
        op, t = stack.pop()
        if op == "visit":
            if isinstance(t, Zero):
                continue
            if isinstance(t, Par):
                stack.append(("visit", t.right))
                stack.append(("visit", t.left))
                continue
            if isinstance(t, TVar):
                raise ValueError(f"free type variable ${t.var}")
            t = fold_table.get(t, t)
            if not add(t):
                continue
            if isinstance(t, Rec):
                u = bt.unfold(t)
                if u not in index:
                    fold_table.setdefault(u, t)
                stack.append(("children", u))
            else:
                stack.append(("children", t))
        else:
            kids: list[BType]
            if isinstance(t, Act):
                kids = [t.cont]
            elif isinstance(t, (Choice, Par)):
                kids = [t.left, t.right]
            elif isinstance(t, Repl):
                kids = [t.body]
            elif isinstance(t, Rec):
                kids = [t]
            else:
                kids = []
            for k in reversed(kids):
                stack.append(("visit", k))
    return atoms, index, fold_table


def build_basis(a: BType, bound: int = 2000, extended: bool = False,
                clean: bool = True) -> Basis:
    """Lift restrictions, eliminate static operators, simplify (unless
    ``clean`` is false) and compute atoms."""
    lifted = a if not _has_hide(a) else lift_nu(a)
    hidden, body = split_hidden(lifted)
    nu_lifted = nu_was_lifted(a)
    body = eliminate_static_ops(body)
    if clean:
        body = simplify(body, extended)
    atoms, index, fold_table = compute_atoms(body, bound)
    basis = Basis(hidden, body, atoms, index, fold_table, nu_lifted=nu_lifted)
    basis.initial = basis.decompose(body)
    return basis
