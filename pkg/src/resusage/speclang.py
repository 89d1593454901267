"""Language operations on trace specifications via Brzozowski derivatives.

A specification ``r`` denotes the prefix closure of the regular language of
``r``.  Because ``D_a(pref(L)) = pref(D_a(L))``, residuals of a specification
are simply derivatives of the underlying expression.  Expressions are kept in
a normal form (flattened, sorted unions; right-nested concatenations; unit
laws) so that every expression has finitely many distinct derivatives.
"""
from __future__ import annotations

from functools import lru_cache

from .syntax import Concat, Down, Empty, Epsilon, Star, Sym, TraceSpec, Union_

DOWN = "v"  # the end-of-use symbol

EMPTY = Empty()
EPS = Epsilon()


def _alternatives(r: TraceSpec) -> list[TraceSpec]:
    if isinstance(r, Union_):
        return _alternatives(r.left) + _alternatives(r.right)
    if isinstance(r, Empty):
        return []
    return [r]


def mk_union(a: TraceSpec, b: TraceSpec) -> TraceSpec:
    alts = {str_key(x): x for x in _alternatives(a) + _alternatives(b)}
    if not alts:
        return EMPTY
    items = [alts[k] for k in sorted(alts)]
    out = items[-1]
    for it in reversed(items[:-1]):
        out = Union_(it, out)
    return out


def mk_concat(a: TraceSpec, b: TraceSpec) -> TraceSpec:
    if isinstance(a, Empty) or isinstance(b, Empty):
        return EMPTY
    if isinstance(a, Epsilon):
        return b
    if isinstance(b, Epsilon):
        return a
    if isinstance(a, Concat):
        return mk_concat(a.left, mk_concat(a.right, b))
    return Concat(a, b)


def mk_star(a: TraceSpec) -> TraceSpec:
    if isinstance(a, (Empty, Epsilon)):
        return EPS
    if isinstance(a, Star):
        return a
    return Star(a)


def str_key(r: TraceSpec) -> str:
    return repr(r)


@lru_cache(maxsize=None)
def normalize(r: TraceSpec) -> TraceSpec:
    if isinstance(r, Union_):
        return mk_union(normalize(r.left), normalize(r.right))
    if isinstance(r, Concat):
        return mk_concat(normalize(r.left), normalize(r.right))
    if isinstance(r, Star):
        return mk_star(normalize(r.body))
    return r


@lru_cache(maxsize=None)
def nullable(r: TraceSpec) -> bool:
    if isinstance(r, (Epsilon, Star)):
        return True
    if isinstance(r, Concat):
        return nullable(r.left) and nullable(r.right)
    if isinstance(r, Union_):
        return nullable(r.left) or nullable(r.right)
    return False


@lru_cache(maxsize=None)
def is_empty(r: TraceSpec) -> bool:
    """Is the regular language of ``r`` empty?"""
    if isinstance(r, Empty):
        return True
    if isinstance(r, Concat):
        return is_empty(r.left) or is_empty(r.right)
    if isinstance(r, Union_):
        return is_empty(r.left) and is_empty(r.right)
    return False


@lru_cache(maxsize=None)
def _deriv(r: TraceSpec, a: str) -> TraceSpec:
    if isinstance(r, (Empty, Epsilon)):
        return EMPTY
    if isinstance(r, Sym):
        return EPS if r.label == a else EMPTY
    if isinstance(r, Down):
        return EPS if a == DOWN else EMPTY
    if isinstance(r, Union_):
        return mk_union(_deriv(r.left, a), _deriv(r.right, a))
    if isinstance(r, Concat):
        d = mk_concat(_deriv(r.left, a), r.right)
        if nullable(r.left):
            d = mk_union(d, _deriv(r.right, a))
        return d
    if isinstance(r, Star):
        return mk_concat(_deriv(r.body, a), r)
    raise TypeError(r)


def derivative(r: TraceSpec, a: str) -> TraceSpec:
    """``{s | a s in L(r)}`` as a normalized expression."""
    return _deriv(normalize(r), a)


def residual(r: TraceSpec, a: str) -> TraceSpec:
    """Residual of the specification after symbol ``a``.  Returns ``EMPTY``
    exactly when ``a`` is not a permitted next symbol."""
    d = derivative(r, a)
    return EMPTY if is_empty(d) else d


def allows(r: TraceSpec, word) -> bool:
    """Is ``word`` (a sequence of symbols) in the prefix closure of ``r``?"""
    cur = normalize(r)
    if not word:
        return True
    for a in word:
        cur = residual(cur, a)
        if isinstance(cur, Empty):
            return False
    return True


def allows_down(r: TraceSpec) -> bool:
    return not is_empty(derivative(r, DOWN))


def alphabet(r: TraceSpec) -> set[str]:
    if isinstance(r, Sym):
        return {r.label}
    if isinstance(r, Down):
        return {DOWN}
    if isinstance(r, (Concat, Union_)):
        return alphabet(r.left) | alphabet(r.right)
    if isinstance(r, Star):
        return alphabet(r.body)
    return set()


def erase_down(r: TraceSpec) -> TraceSpec:
    """Replace every end marker by the empty word."""
    if isinstance(r, Down):
        return EPS
    if isinstance(r, Concat):
        return Concat(erase_down(r.left), erase_down(r.right))
    if isinstance(r, Union_):
        return Union_(erase_down(r.left), erase_down(r.right))
    if isinstance(r, Star):
        return Star(erase_down(r.body))
    return r
