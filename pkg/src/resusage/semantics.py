"""Reduction semantics of processes and a bounded state-space explorer.

Runtime states are kept in a flat normal form: a list of top-level binders
(channel restrictions and resource creations, already extruded) and a
multiset of *threads* -- prefixed processes, conditionals and replications.
Replication is unfolded lazily: a fresh copy of ``*P`` is produced only when
one of its threads takes part in a reduction.  Binders of a copy are
alpha-renamed against every name already present, so extrusion never
captures.

The explorer is the ground-truth oracle for tests and for ``--oracle``: it
enumerates every reduction sequence up to a depth bound and reports states
that violate a resource specification.  A state budget bounds the search;
exceeding it marks the result as truncated.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field

from . import speclang
from .syntax import (
    NIL, Acc, BoolLit, In, Nil, Nu, NuR, Opaque, Out, Par, Process, Repl,
    TraceSpec, Var, If, all_names, fresh_name, show_process, show_spec, substitute,
)

TAU = ("tau",)


def access_label(res: str, label: str) -> tuple:
    return ("acc", res, label)


def show_label(lab: tuple) -> str:
    if lab[0] == "tau":
        return "tau"
    return f"{lab[2]}({lab[1]})"


def spec_residual(phi: TraceSpec, xi: str) -> TraceSpec:
    """``{s | xi s in phi}``; the empty expression signals a violation."""
    return speclang.residual(phi, xi)


# ---------------------------------------------------------------------------
# Flat states


@dataclass(frozen=True)
class Binder:
    name: str
    spec: TraceSpec | None = None  # None for a channel restriction

    @property
    def is_resource(self) -> bool:
        return self.spec is not None


@dataclass(frozen=True, eq=False)
class State:
    binders: tuple[Binder, ...]
    threads: tuple[Process, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "key", str(self.to_process()))
        object.__setattr__(self, "_hash", hash(self.key))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, State) and self.key == other.key

    def __hash__(self) -> int:
        return self._hash

    def to_process(self) -> Process:
        body: Process = NIL
        for t in reversed(self.threads):
            body = t if isinstance(body, Nil) else Par(t, body)
        for b in reversed(self.binders):
            body = NuR(b.name, b.spec, body) if b.is_resource else Nu(b.name, body)
        return body

    def names(self) -> set[str]:
        used = {b.name for b in self.binders}
        for t in self.threads:
            used |= all_names(t)
        return used

    def violated_resources(self) -> list[str]:
        return [b.name for b in self.binders
                if b.is_resource and speclang.is_empty(b.spec)]


def _flatten(p: Process, binders: list, threads: list, used: set[str]) -> None:
    """Split ``p`` into extruded binders and threads, renaming binders that
    clash with ``used``."""
    stack = [p]
    while stack:
        q = stack.pop()
        if isinstance(q, Nil):
            continue
        if isinstance(q, Par):
            stack.append(q.right)
            stack.append(q.left)
        elif isinstance(q, (Nu, NuR)):
            name = q.name if isinstance(q, Nu) else q.res
            body = q.body
            if name in used:
                new = fresh_name(name, used | all_names(body))
                body = substitute(body, {name: Var(new)})
                name = new
            used.add(name)
            binders.append(Binder(name, q.spec if isinstance(q, NuR) else None))
            stack.append(body)
        elif isinstance(q, Repl):
            b = q.body
            if isinstance(b, Nil):
                continue
            if isinstance(b, Repl):
                stack.append(b)
            elif isinstance(b, Par):
                stack.append(Repl(b.right))
                stack.append(Repl(b.left))
            else:
                threads.append(q)
        else:
            threads.append(q)


_CANON_RE = re.compile(r"'\d+$")


def _base(name: str) -> str:
    return _CANON_RE.sub("", name)


def _finish(binders: list[Binder], threads: list[Process]) -> State:
    """Garbage-collect unused channel binders and pick canonical names."""
    mentioned: set[str] = set()
    for t in threads:
        mentioned |= all_names(t)
    binders = [b for b in binders if b.is_resource or b.name in mentioned]
    bound = {b.name for b in binders}

    def abstract_key(t: Process) -> str:
        s = show_process(t)
        return re.sub(r"[A-Za-z_][A-Za-z0-9_']*",
                      lambda m: "_" if m.group() in bound else m.group(), s)

    threads.sort(key=abstract_key)
    order: list[str] = []
    seen: set[str] = set()
    for t in threads:
        for tok in re.findall(r"[A-Za-z_][A-Za-z0-9_']*", show_process(t)):
            if tok in bound and tok not in seen:
                seen.add(tok)
                order.append(tok)
    rest = sorted((b for b in binders if b.name not in seen),
                  key=lambda b: (show_spec(b.spec) if b.spec is not None else "", b.name))
    order += [b.name for b in rest]
    by_name = {b.name: b for b in binders}
    ren: dict[str, str] = {}
    for k, n in enumerate(order):
        ren[n] = f"{_base(n)}'{k}"
    sigma = {old: Var(new) for old, new in ren.items() if old != new}
    if sigma:
        avoid = set(ren.values())
        threads = [substitute(t, sigma, avoid) for t in threads]
    new_binders = tuple(Binder(ren[n], by_name[n].spec) for n in order)
    threads.sort(key=show_process)
    return State(new_binders, tuple(threads))


def state_of(p: Process) -> State:
    binders: list[Binder] = []
    threads: list[Process] = []
    used = set(all_names(p))
    # names of top-level binders must not be renamed needlessly
    for q in _top_binders(p):
        used.discard(q)
    _flatten(p, binders, threads, used)
    return _finish(binders, threads)


def _top_binders(p: Process) -> list[str]:
    out = []
    stack = [p]
    while stack:
        q = stack.pop()
        if isinstance(q, Par):
            stack += [q.left, q.right]
        elif isinstance(q, Nu):
            out.append(q.name)
            stack.append(q.body)
        elif isinstance(q, NuR):
            out.append(q.res)
            stack.append(q.body)
    return out


def canonicalize(p: Process) -> Process:
    """Flatten parallel composition, drop ``0`` components, extrude binders
    to the top and order components deterministically."""
    return state_of(p).to_process()


# ---------------------------------------------------------------------------
# One-step reduction


@dataclass
class _Offer:
    index: int              # component the thread comes from
    thread: Process
    binders: list           # binders introduced by unfolding
    rest: list              # leftover components replacing the source


def _offers(comp: Process, index: int, used: set[str], depth: int = 2) -> list[_Offer]:
    if not isinstance(comp, Repl):
        return [_Offer(index, comp, [], [])]
    if depth == 0:
        return []
    binders: list[Binder] = []
    threads: list[Process] = []
    _flatten(comp.body, binders, threads, used)
    out = []
    for k, t in enumerate(threads):
        others = threads[:k] + threads[k + 1:]
        for o in _offers(t, index, used, depth - 1):
            out.append(_Offer(index, o.thread, binders + o.binders,
                              others + o.rest + [comp]))
    return out


def _copy_pairs(comp: Process, index: int, used: set[str]) -> list[tuple]:
    """Output/input pairs taken from a single copy of a replication."""
    binders: list[Binder] = []
    threads: list[Process] = []
    _flatten(comp.body, binders, threads, used)
    pairs = []
    for i, a in enumerate(threads):
        for j, b in enumerate(threads):
            if isinstance(a, Out) and isinstance(b, In) and a.chan == b.chan \
                    and len(a.args) == len(b.params):
                rest = [t for k, t in enumerate(threads) if k not in (i, j)] + [comp]
                pairs.append((a, b, binders, rest))
    return pairs


def _communicate(out: Out, inp: In) -> list[Process]:
    sigma = dict(zip(inp.params, out.args))
    return [out.cont, substitute(inp.cont, sigma)]


def step_state(st: State) -> list[tuple[tuple, State]]:
    used = st.names()
    comps = list(st.threads)
    offers: list[_Offer] = []
    for i, c in enumerate(comps):
        offers += _offers(c, i, used)
    results: list[tuple[tuple, State]] = []

    def emit(label: tuple, removed: set[int], binders: list, new: list[Process],
             spec_update: tuple | None = None) -> None:
        bs = list(st.binders)
        if spec_update is not None:
            k, spec = spec_update
            bs[k] = Binder(bs[k].name, spec)
        bs += binders
        threads: list[Process] = [c for i, c in enumerate(comps) if i not in removed]
        extra_b: list[Binder] = []
        extra_t: list[Process] = []
        for p in new:
            _flatten(p, extra_b, extra_t, used)
        results.append((label, _finish(bs + extra_b, threads + extra_t)))

    binder_index = {b.name: k for k, b in enumerate(st.binders)}

    for o in offers:
        t = o.thread
        if isinstance(t, Acc):
            k = binder_index.get(t.res)
            if k is not None and st.binders[k].is_resource:
                spec = spec_residual(st.binders[k].spec, t.label)
                emit(TAU, {o.index}, o.binders, o.rest + [t.cont], (k, spec))
            else:
                emit(access_label(t.res, t.label), {o.index}, o.binders, o.rest + [t.cont])
        elif isinstance(t, If):
            c = t.cond
            if isinstance(c, BoolLit):
                emit(TAU, {o.index}, o.binders, o.rest + [t.then if c.value else t.orelse])
            elif isinstance(c, Opaque):
                emit(TAU, {o.index}, o.binders, o.rest + [t.then])
                emit(TAU, {o.index}, o.binders, o.rest + [t.orelse])

    for a in offers:
        if not isinstance(a.thread, Out):
            continue
        for b in offers:
            if b.index == a.index or not isinstance(b.thread, In):
                continue
            if a.thread.chan != b.thread.chan or len(a.thread.args) != len(b.thread.params):
                continue
            emit(TAU, {a.index, b.index}, a.binders + b.binders,
                 a.rest + b.rest + _communicate(a.thread, b.thread))

    for i, c in enumerate(comps):
        if isinstance(c, Repl):
            for out, inp, binders, rest in _copy_pairs(c, i, used):
                emit(TAU, {i}, binders, rest + _communicate(out, inp))

    # deduplicate
    seen = set()
    uniq = []
    for lab, s in results:
        key = (lab, s)
        if key not in seen:
            seen.add(key)
            uniq.append((lab, s))
    return uniq


def step(p: Process) -> list[tuple[tuple, Process]]:
    """All one-step reductions of ``p`` (after canonicalization)."""
    return [(lab, s.to_process()) for lab, s in step_state(state_of(p))]


def is_resource_safe(p: Process) -> bool:
    """No resource binder at top level has an empty residual specification."""
    return not state_of(p).violated_resources()


# ---------------------------------------------------------------------------
# Exploration


@dataclass
class Violation:
    kind: str            # "safety" or "liveness"
    resource: str
    path: list[tuple]    # reduction labels from the initial state
    state: Process

    def describe(self) -> str:
        trace = " ".join(show_label(l) for l in self.path) or "(initial state)"
        return f"{self.kind} violation on {self.resource} after: {trace}"


@dataclass
class ExploreResult:
    violations: list[Violation] = field(default_factory=list)
    states: int = 0
    truncated: bool = False
    max_depth: int = 0

    @property
    def safe(self) -> bool:
        return not self.violations


def explore(p: Process, depth: int, mode: str = "safety",
            budget: int = 50_000, stop_at_first: bool = False) -> ExploreResult:
    """Breadth-first enumeration of reductions of ``p`` up to ``depth`` steps.

    In liveness mode, a stuck state (no successor at all) is a violation when
    some resource's residual specification does not permit the end marker.
    The result is *truncated* when the state budget is exhausted before the
    depth bound is reached; states at the depth frontier are not considered
    truncation.
    """
    start = state_of(p)
    res = ExploreResult()
    seen = {start: None}
    parent: dict[State, tuple] = {}
    queue = deque([(start, 0)])

    def path_to(s: State) -> list[tuple]:
        labels = []
        while s in parent:
            lab, prev = parent[s]
            labels.append(lab)
            s = prev
        return labels[::-1]

    while queue:
        st, d = queue.popleft()
        res.max_depth = max(res.max_depth, d)
        bad = st.violated_resources()
        if bad:
            for r in bad:
                res.violations.append(Violation("safety", r, path_to(st), st.to_process()))
            if stop_at_first:
                break
            continue
        if d >= depth and mode != "liveness":
            continue
        succs = step_state(st)
        if mode == "liveness" and not succs:
            for b in st.binders:
                if b.is_resource and not speclang.allows_down(b.spec):
                    res.violations.append(
                        Violation("liveness", b.name, path_to(st), st.to_process()))
            if res.violations and stop_at_first:
                break
            continue
        if d >= depth:
            continue
        for lab, s2 in succs:
            if s2 in seen:
                continue
            if len(seen) >= budget:
                res.truncated = True
                queue.clear()
                break
            seen[s2] = None
            parent[s2] = (lab, st)
            queue.append((s2, d + 1))
    res.states = len(seen)
    return res
