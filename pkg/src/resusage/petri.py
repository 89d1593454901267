"""Labelled Petri nets built from a basis.

Places are the atoms of a :class:`~resusage.normalize.Basis`, plus one extra
place for the inert type ``O`` whenever some transition leaves nothing
behind.  A marking is a tuple of token counts, one per place.  Transition
labels are either :data:`TAU` or an access label such as ``"I"``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from . import behavior as bt
from .behavior import BType
from .normalize import Basis
from .speclang import DOWN

TAU = "tau"

Marking = tuple  # tuple[int, ...], one count per place


@dataclass(frozen=True)
class Transition:
    consume: tuple[int, ...]
    produce: tuple[int, ...]
    label: str = TAU

    @property
    def delta(self) -> tuple[int, ...]:
        return tuple(p - c for c, p in zip(self.consume, self.produce))


@dataclass
class PetriNet:
    resource: str
    places: list[BType]
    transitions: list[Transition]
    initial: Marking
    hidden: list[str] = field(default_factory=list)

    def __post_init__(self):
        self._disabled: dict = {}

    @property
    def size(self) -> int:
        return len(self.places)

    def access_labels(self) -> set[str]:
        return {t.label for t in self.transitions if t.label != TAU}

    def place_disabled(self, j: int, names: frozenset) -> bool:
        key = (j, names)
        v = self._disabled.get(key)
        if v is None:
            v = bt.disabled(self.places[j], names - set(self.hidden))
            self._disabled[key] = v
        return v


def _vec(n: int, items: Iterable[tuple[int, int]]) -> tuple[int, ...]:
    v = [0] * n
    for j, k in items:
        v[j] += k
    return tuple(v)


def build_net(basis: Basis, x: str) -> PetriNet:
    """The net of ``basis`` observed on resource ``x``.

    * every tau step of an atom is a tau transition consuming that atom;
    * every access on ``x`` is a transition labelled by the access kind;
    * an output and an input on the same hidden name, taken from two atom
      tokens (possibly two tokens of one place), synchronize into a tau.
    """
    atoms = list(basis.atoms)
    hidden = set(basis.hidden)
    n = len(atoms)
    zero_used = False

    def dec(c: BType) -> tuple[int, ...]:
        nonlocal zero_used
        v = basis.decompose(c)
        if not any(v):
            zero_used = True
            return v + (1,)
        return v + (0,)

    raw: list[tuple[dict, tuple, str]] = []
    outs: dict[str, list[tuple[int, tuple]]] = {}
    ins: dict[str, list[tuple[int, tuple]]] = {}
    for j, a in enumerate(atoms):
        for label, c in bt.tstep(a):
            kind = label[0]
            if kind == "tau":
                raw.append(({j: 1}, dec(c), TAU))
            elif kind == "acc":
                raw.append(({j: 1}, dec(c), label[2] if label[1] == x else TAU))
            elif kind in ("out", "in") and label[1] in hidden:
                (outs if kind == "out" else ins).setdefault(label[1], []).append((j, dec(c)))
    for z in sorted(outs):
        for j, p1 in outs[z]:
            for k, p2 in ins.get(z, ()):
                consume = {j: 1}
                consume[k] = consume.get(k, 0) + 1
                raw.append((consume, tuple(a + b for a, b in zip(p1, p2)), TAU))

    places = atoms + ([bt.ZERO] if zero_used else [])
    m = len(places)
    seen: dict[Transition, None] = {}
    for consume, produce, label in raw:
        t = Transition(_vec(m, consume.items()), produce[:m], label)
        seen.setdefault(t, None)
    initial = tuple(basis.initial) + ((0,) if zero_used else ())
    return PetriNet(x, places, list(seen), initial, list(basis.hidden))


def enabled(t: Transition, m: Marking) -> bool:
    return all(c <= k for c, k in zip(t.consume, m))


def fire(t: Transition, m: Marking) -> Marking:
    return tuple(k - c + p for k, c, p in zip(m, t.consume, t.produce))


def net_step(net: PetriNet, m: Marking) -> list[tuple[str, Marking]]:
    """All firings enabled at ``m``."""
    return [(t.label, fire(t, m)) for t in net.transitions if enabled(t, m)]


def pdisabled(net: PetriNet, m: Marking, names: Iterable[str]) -> bool:
    """Every marked place is ``disabled`` w.r.t. ``names`` (hidden names are
    removed first, as the marking stands under their binders)."""
    s = frozenset(names)
    return all(net.place_disabled(j, s) for j, k in enumerate(m) if k)


def ptraces_bounded(net: PetriNet, maxlen: int, extended: bool = False,
                    cap: int = 10_000) -> tuple[set[tuple[str, ...]], bool]:
    """Access traces of the net of length <= ``maxlen``; with ``extended``,
    ``w v`` is added when some marking reached by ``w`` is pdisabled.
    Returns the trace set and a flag telling whether the tau-closure cap
    was hit."""
    partial = False
    total = 0
    x = net.resource

    def closure(ms: set) -> set:
        nonlocal partial, total
        seen = set(ms)
        stack = list(ms)
        while stack:
            m = stack.pop()
            for t in net.transitions:
                if t.label == TAU and enabled(t, m):
                    m2 = fire(t, m)
                    if m2 not in seen:
                        if total + len(seen) >= cap:
                            partial = True
                            continue
                        seen.add(m2)
                        stack.append(m2)
        total += len(seen)
        return seen

    traces: set[tuple[str, ...]] = {()}
    level = {(): closure({net.initial})}
    for n in range(maxlen + 1):
        nxt: dict[tuple[str, ...], set] = {}
        for w, ms in level.items():
            if extended and n < maxlen and any(pdisabled(net, m, {x}) for m in ms):
                traces.add(w + (DOWN,))
            if n == maxlen:
                continue
            for m in ms:
                for t in net.transitions:
                    if t.label != TAU and enabled(t, m):
                        nxt.setdefault(w + (t.label,), set()).add(fire(t, m))
        if n == maxlen:
            break
        level = {}
        for w, ms in nxt.items():
            level[w] = closure(ms)
            traces.add(w)
    return traces, partial


# ---------------------------------------------------------------------------
# Rendering


def show_marking(m: Iterable[int]) -> str:
    parts = [f"{k} * {j}" for j, k in enumerate(m) if k]
    return " | ".join(parts) if parts else "0"


def _show_vec(v: Iterable[int]) -> str:
    parts = [f"{k}*{j}" for j, k in enumerate(v) if k]
    return " | ".join(parts) if parts else "0"


def show_transition(t: Transition, resource: str) -> str:
    lab = "tau" if t.label == TAU else f"({resource},{t.label})"
    return f"{lab}: {_show_vec(t.consume)} -> {_show_vec(t.delta)}"


def listing(places: list[str], transitions: list[Transition], initial: Marking,
            resource: str) -> str:
    lines = ["(*** initial marking ***)", show_marking(initial),
             f"(*** {len(places)} Places ***)"]
    lines += [f"{j}: {p}" for j, p in enumerate(places)]
    lines.append(f"(*** {len(transitions)} Transitions ***)")
    lines += [show_transition(t, resource) for t in transitions]
    return "\n".join(lines)


def to_text(net: PetriNet) -> str:
    return listing([bt.show(p) for p in net.places], net.transitions,
                   net.initial, net.resource)


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def dot(places: list[str], transitions: list[Transition], initial: Marking,
        name: str = "net") -> str:
    """Graphviz rendering: places as boxes (with their initial tokens),
    transitions as small dots labelled by tau or the access kind."""
    out = [f'digraph "{_dot_escape(name)}" {{', "  rankdir=LR;"]
    for j, p in enumerate(places):
        tok = f" [{initial[j]}]" if initial[j] else ""
        out.append(f'  p{j} [shape=box, label="{j}: {_dot_escape(p)}{tok}"];')
    for i, t in enumerate(transitions):
        out.append(f'  t{i} [shape=point, width=0.12, xlabel="{_dot_escape(t.label)}"];')
        for j, c in enumerate(t.consume):
            if c:
                w = f' [label="{c}"]' if c > 1 else ""
                out.append(f"  p{j} -> t{i}{w};")
        for j, p in enumerate(t.produce):
            if p:
                w = f' [label="{p}"]' if p > 1 else ""
                out.append(f"  t{i} -> p{j}{w};")
    out.append("}")
    return "\n".join(out)


def to_dot(net: PetriNet) -> str:
    return dot([bt.show(p) for p in net.places], net.transitions, net.initial,
               f"P({net.resource})")
