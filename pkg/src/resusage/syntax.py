"""Surface syntax: processes, trace specifications, parser and printer.

A program file is an optional header followed by one process::

    labels P G;                    # declare extra access labels
    spec 1 = pref(I R* C);         # name a trace specification
    mode liveness;                 # or: mode safety (the default)
    newR 1,x in acc(x,I).acc(x,C)

The process grammar (lowest to highest precedence)::

    par  ::= seq ('|' seq)*
    seq  ::= 'new' names 'in' par
           | 'newR' specref ',' name 'in' par
           | 'if' value 'then' par 'else' par
           | '*' seq
           | prefix ['.' seq]
           | '(' par ')' | '0'

Binder forms (``new``, ``newR``, ``else``) extend as far right as possible.
Integer literals and arithmetic/comparison expressions are desugared to an
opaque boolean (printed ``any``), so ``if n=0 then P else Q`` becomes a
branch on an unknown value.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterator, Union


class ParseError(Exception):
    """Raised for malformed input; carries a 1-based line and column."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(where + message)


class Attr(enum.Enum):
    """Prefix attribute: ``c`` promises the action eventually succeeds."""

    NONE = ""
    SUCCEEDS = "c"


# ---------------------------------------------------------------------------
# Values


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class BoolLit:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Opaque:
    """A boolean whose value is unknown (result of desugaring integers)."""

    def __str__(self) -> str:
        return "any"


TRUE = BoolLit(True)
FALSE = BoolLit(False)
OPAQUE = Opaque()

Value = Union[Var, BoolLit, Opaque]


# ---------------------------------------------------------------------------
# Trace specifications: regular expressions whose prefix closure is the spec.


class TraceSpec:
    """Base class of trace-specification regular expressions."""

    __slots__ = ()

    def __str__(self) -> str:
        return _show_regex(self, 0)


@dataclass(frozen=True)
class Empty(TraceSpec):
    pass


@dataclass(frozen=True)
class Epsilon(TraceSpec):
    pass


@dataclass(frozen=True)
class Sym(TraceSpec):
    label: str


@dataclass(frozen=True)
class Down(TraceSpec):
    """The end-of-use marker (written ``v`` in source)."""


@dataclass(frozen=True)
class Concat(TraceSpec):
    left: TraceSpec
    right: TraceSpec


@dataclass(frozen=True)
class Union_(TraceSpec):
    left: TraceSpec
    right: TraceSpec


@dataclass(frozen=True)
class Star(TraceSpec):
    body: TraceSpec


def _show_regex(r: TraceSpec, prec: int) -> str:
    # prec: 0 = union context, 1 = concat context, 2 = star operand
    if isinstance(r, Empty):
        return "0"
    if isinstance(r, Epsilon):
        return "eps"
    if isinstance(r, Sym):
        return r.label
    if isinstance(r, Down):
        return "v"
    if isinstance(r, Star):
        return _show_regex(r.body, 2) + "*"
    if isinstance(r, Concat):
        s = _show_regex(r.left, 1) + " " + _show_regex(r.right, 1)
        return f"({s})" if prec > 1 else s
    if isinstance(r, Union_):
        s = _show_regex(r.left, 0) + "+" + _show_regex(r.right, 0)
        return f"({s})" if prec > 0 else s
    raise TypeError(r)


def show_spec(r: TraceSpec) -> str:
    return f"pref({_show_regex(r, 0)})"


def spec_labels(r: TraceSpec) -> set[str]:
    """Access labels mentioned by ``r`` (excluding the end marker)."""
    if isinstance(r, Sym):
        return {r.label}
    if isinstance(r, (Concat, Union_)):
        return spec_labels(r.left) | spec_labels(r.right)
    if isinstance(r, Star):
        return spec_labels(r.body)
    return set()


def spec_is_empty(r: TraceSpec) -> bool:
    """True iff the regular language of ``r`` is empty."""
    if isinstance(r, Empty):
        return True
    if isinstance(r, Concat):
        return spec_is_empty(r.left) or spec_is_empty(r.right)
    if isinstance(r, Union_):
        return spec_is_empty(r.left) and spec_is_empty(r.right)
    return False


def _down_only_final(r: TraceSpec) -> bool:
    """Check that ``v`` can only be the last symbol of a word."""

    def has_down(t: TraceSpec) -> bool:
        if isinstance(t, Down):
            return True
        if isinstance(t, (Concat, Union_)):
            return has_down(t.left) or has_down(t.right)
        if isinstance(t, Star):
            return has_down(t.body)
        return False

    def ok(t: TraceSpec, followed: bool) -> bool:
        # followed: whether a non-empty word may follow t
        if isinstance(t, Down):
            return not followed
        if isinstance(t, Star):
            return not has_down(t.body) and ok(t.body, True)
        if isinstance(t, Union_):
            return ok(t.left, followed) and ok(t.right, followed)
        if isinstance(t, Concat):
            right_nonempty = not _only_epsilon(t.right)
            return ok(t.left, followed or right_nonempty) and ok(t.right, followed)
        return True

    def _only_epsilon(t: TraceSpec) -> bool:
        if isinstance(t, (Epsilon, Empty)):
            return True
        if isinstance(t, Concat):
            return spec_is_empty(t) or (_only_epsilon(t.left) and _only_epsilon(t.right))
        if isinstance(t, Union_):
            return _only_epsilon(t.left) and _only_epsilon(t.right)
        if isinstance(t, Star):
            return _only_epsilon(t.body)
        return False

    return ok(r, False)


# ---------------------------------------------------------------------------
# Processes


class Process:
    __slots__ = ()

    def __str__(self) -> str:
        return show_process(self)


@dataclass(frozen=True)
class Nil(Process):
    pass


@dataclass(frozen=True)
class Out(Process):
    chan: str
    args: tuple
    attr: Attr
    cont: Process


@dataclass(frozen=True)
class In(Process):
    chan: str
    params: tuple
    attr: Attr
    cont: Process


@dataclass(frozen=True)
class Par(Process):
    left: Process
    right: Process


@dataclass(frozen=True)
class If(Process):
    cond: Value
    then: Process
    orelse: Process


@dataclass(frozen=True)
class Nu(Process):
    name: str
    body: Process


@dataclass(frozen=True)
class Repl(Process):
    body: Process


@dataclass(frozen=True)
class Acc(Process):
    label: str
    res: str
    cont: Process


@dataclass(frozen=True)
class NuR(Process):
    res: str
    spec: TraceSpec
    body: Process


NIL = Nil()

BUILTIN_LABELS = ("I", "R", "W", "C")
LABEL_ALIASES = {"init": "I", "read": "R", "write": "W", "close": "C"}
# The built-in specification ``1``: initialise, read/write any number of
# times, close, then stop.
BUILTIN_SPECS = {
    "1": Concat(
        Sym("I"),
        Concat(Star(Union_(Sym("R"), Sym("W"))), Concat(Sym("C"), Down())),
    )
}


@dataclass
class Program:
    """A parsed program: header declarations plus the process."""

    process: Process
    labels: tuple[str, ...] = BUILTIN_LABELS
    specs: dict[str, TraceSpec] = field(default_factory=dict)
    mode: str = "safety"


# ---------------------------------------------------------------------------
# Name utilities


def free_names(p: Process) -> frozenset[str]:
    if isinstance(p, Nil):
        return frozenset()
    if isinstance(p, Out):
        names = {a.name for a in p.args if isinstance(a, Var)}
        return frozenset({p.chan} | names) | free_names(p.cont)
    if isinstance(p, In):
        return frozenset({p.chan}) | (free_names(p.cont) - set(p.params))
    if isinstance(p, Par):
        return free_names(p.left) | free_names(p.right)
    if isinstance(p, If):
        c = {p.cond.name} if isinstance(p.cond, Var) else set()
        return frozenset(c) | free_names(p.then) | free_names(p.orelse)
    if isinstance(p, Nu):
        return free_names(p.body) - {p.name}
    if isinstance(p, Repl):
        return free_names(p.body)
    if isinstance(p, Acc):
        return frozenset({p.res}) | free_names(p.cont)
    if isinstance(p, NuR):
        return free_names(p.body) - {p.res}
    raise TypeError(p)


def all_names(p: Process) -> set[str]:
    """Every name occurring in ``p``, free or bound."""
    out: set[str] = set()
    stack = [p]
    while stack:
        q = stack.pop()
        if isinstance(q, Out):
            out.add(q.chan)
            out.update(a.name for a in q.args if isinstance(a, Var))
            stack.append(q.cont)
        elif isinstance(q, In):
            out.add(q.chan)
            out.update(q.params)
            stack.append(q.cont)
        elif isinstance(q, Par):
            stack += [q.left, q.right]
        elif isinstance(q, If):
            if isinstance(q.cond, Var):
                out.add(q.cond.name)
            stack += [q.then, q.orelse]
        elif isinstance(q, Nu):
            out.add(q.name)
            stack.append(q.body)
        elif isinstance(q, Repl):
            stack.append(q.body)
        elif isinstance(q, Acc):
            out.add(q.res)
            stack.append(q.cont)
        elif isinstance(q, NuR):
            out.add(q.res)
            stack.append(q.body)
    return out


def fresh_name(base: str, used: set[str]) -> str:
    """Return ``base`` or ``base_k`` (smallest k) not in ``used``."""
    root = re.sub(r"_\d+$", "", base) or base
    if root not in used:
        return root
    k = 1
    while f"{root}_{k}" in used:
        k += 1
    return f"{root}_{k}"


def subst_value(v: Value, sigma: dict[str, Value]) -> Value:
    if isinstance(v, Var):
        return sigma.get(v.name, v)
    return v


def substitute(p: Process, sigma: dict[str, Value], avoid: set[str] | None = None) -> Process:
    """Capture-avoiding substitution of values for free names.

    ``avoid`` is the set of names that must not be captured; it defaults to the
    free names of the substituted values.
    """
    if not sigma:
        return p
    if avoid is None:
        avoid = {v.name for v in sigma.values() if isinstance(v, Var)}
    return _subst(p, sigma, avoid)


def _rebind(name: str, body: Process, sigma: dict, avoid: set[str]) -> tuple[str, dict]:
    sigma = {k: v for k, v in sigma.items() if k != name}
    if name in avoid:
        used = avoid | all_names(body) | set(sigma)
        new = fresh_name(name, used)
        sigma[name] = Var(new)
        return new, sigma
    return name, sigma


def _subst(p: Process, sigma: dict, avoid: set[str]) -> Process:
    if not sigma or isinstance(p, Nil):
        return p
    if isinstance(p, Out):
        ch = sigma.get(p.chan, Var(p.chan))
        chan = ch.name if isinstance(ch, Var) else p.chan
        args = tuple(subst_value(a, sigma) for a in p.args)
        return Out(chan, args, p.attr, _subst(p.cont, sigma, avoid))
    if isinstance(p, In):
        ch = sigma.get(p.chan, Var(p.chan))
        chan = ch.name if isinstance(ch, Var) else p.chan
        params = []
        s = sigma
        for y in p.params:
            y2, s = _rebind(y, p.cont, s, avoid)
            params.append(y2)
        return In(chan, tuple(params), p.attr, _subst(p.cont, s, avoid))
    if isinstance(p, Par):
        return Par(_subst(p.left, sigma, avoid), _subst(p.right, sigma, avoid))
    if isinstance(p, If):
        return If(subst_value(p.cond, sigma), _subst(p.then, sigma, avoid),
                  _subst(p.orelse, sigma, avoid))
    if isinstance(p, Nu):
        n, s = _rebind(p.name, p.body, sigma, avoid)
        return Nu(n, _subst(p.body, s, avoid))
    if isinstance(p, Repl):
        return Repl(_subst(p.body, sigma, avoid))
    if isinstance(p, Acc):
        r = sigma.get(p.res, Var(p.res))
        res = r.name if isinstance(r, Var) else p.res
        return Acc(p.label, res, _subst(p.cont, sigma, avoid))
    if isinstance(p, NuR):
        n, s = _rebind(p.res, p.body, sigma, avoid)
        return NuR(n, p.spec, _subst(p.body, s, avoid))
    raise TypeError(p)


def uniquify(p: Process, reserved: set[str] | None = None) -> Process:
    """Alpha-rename bound names so that all binders are pairwise distinct
    and distinct from the free names.  Deterministic: the first binder of a
    name keeps it, later ones get ``_k`` suffixes."""
    used = set(free_names(p)) | (reserved or set())
    return _uniq(p, {}, used)


def _uniq(p: Process, ren: dict[str, str], used: set[str]) -> Process:
    def r(n: str) -> str:
        return ren.get(n, n)

    def bind(n: str) -> tuple[str, dict]:
        new = fresh_name(n, used)
        used.add(new)
        d = dict(ren)
        d[n] = new
        return new, d

    if isinstance(p, Nil):
        return p
    if isinstance(p, Out):
        args = tuple(Var(r(a.name)) if isinstance(a, Var) else a for a in p.args)
        return Out(r(p.chan), args, p.attr, _uniq(p.cont, ren, used))
    if isinstance(p, In):
        params = []
        d = ren
        for y in p.params:
            new = fresh_name(y, used)
            used.add(new)
            d = dict(d)
            d[y] = new
            params.append(new)
        return In(r(p.chan), tuple(params), p.attr, _uniq(p.cont, d, used))
    if isinstance(p, Par):
        left = _uniq(p.left, ren, used)
        return Par(left, _uniq(p.right, ren, used))
    if isinstance(p, If):
        c = Var(r(p.cond.name)) if isinstance(p.cond, Var) else p.cond
        t = _uniq(p.then, ren, used)
        return If(c, t, _uniq(p.orelse, ren, used))
    if isinstance(p, Nu):
        n, d = bind(p.name)
        return Nu(n, _uniq(p.body, d, used))
    if isinstance(p, Repl):
        return Repl(_uniq(p.body, ren, used))
    if isinstance(p, Acc):
        return Acc(p.label, r(p.res), _uniq(p.cont, ren, used))
    if isinstance(p, NuR):
        n, d = bind(p.res)
        return NuR(n, p.spec, _uniq(p.body, d, used))
    raise TypeError(p)


def strip_attrs(p: Process) -> Process:
    """Replace every attribute with the empty one (safety mode)."""
    if isinstance(p, Nil):
        return p
    if isinstance(p, Out):
        return Out(p.chan, p.args, Attr.NONE, strip_attrs(p.cont))
    if isinstance(p, In):
        return In(p.chan, p.params, Attr.NONE, strip_attrs(p.cont))
    if isinstance(p, Par):
        return Par(strip_attrs(p.left), strip_attrs(p.right))
    if isinstance(p, If):
        return If(p.cond, strip_attrs(p.then), strip_attrs(p.orelse))
    if isinstance(p, Nu):
        return Nu(p.name, strip_attrs(p.body))
    if isinstance(p, Repl):
        return Repl(strip_attrs(p.body))
    if isinstance(p, Acc):
        return Acc(p.label, p.res, strip_attrs(p.cont))
    if isinstance(p, NuR):
        return NuR(p.res, p.spec, strip_attrs(p.body))
    raise TypeError(p)


def annotate_all(p: Process) -> Process:
    """Mark every channel prefix with the ``c`` attribute."""
    if isinstance(p, Nil):
        return p
    if isinstance(p, Out):
        return Out(p.chan, p.args, Attr.SUCCEEDS, annotate_all(p.cont))
    if isinstance(p, In):
        return In(p.chan, p.params, Attr.SUCCEEDS, annotate_all(p.cont))
    if isinstance(p, Par):
        return Par(annotate_all(p.left), annotate_all(p.right))
    if isinstance(p, If):
        return If(p.cond, annotate_all(p.then), annotate_all(p.orelse))
    if isinstance(p, Nu):
        return Nu(p.name, annotate_all(p.body))
    if isinstance(p, Repl):
        return Repl(annotate_all(p.body))
    if isinstance(p, Acc):
        return Acc(p.label, p.res, annotate_all(p.cont))
    if isinstance(p, NuR):
        return NuR(p.res, p.spec, annotate_all(p.body))
    raise TypeError(p)


def count_prefixes(p: Process) -> int:
    if isinstance(p, Nil):
        return 0
    if isinstance(p, (Out, In, Acc)):
        return 1 + count_prefixes(p.cont)
    if isinstance(p, Par):
        return count_prefixes(p.left) + count_prefixes(p.right)
    if isinstance(p, If):
        return count_prefixes(p.then) + count_prefixes(p.orelse)
    if isinstance(p, (Nu, Repl, NuR)):
        return count_prefixes(p.body)
    raise TypeError(p)


# ---------------------------------------------------------------------------
# Pretty printing


def _show_args(vals) -> str:
    return ",".join(str(v) for v in vals)


def _ends_open(p: Process) -> bool:
    """Does the printed form of ``p`` extend as far right as possible?"""
    if isinstance(p, (Nu, NuR, If)):
        return True
    if isinstance(p, (Out, In, Acc)):
        return not isinstance(p.cont, Nil) and _ends_open(p.cont)
    if isinstance(p, Repl):
        return not isinstance(p.body, Par) and _ends_open(p.body)
    return False


def _show_seq(p: Process) -> str:
    """Print ``p`` in a position where a ``seq`` is expected."""
    if isinstance(p, Par):
        return "(" + show_process(p) + ")"
    return show_process(p)


def show_process(p: Process) -> str:
    if isinstance(p, Nil):
        return "0"
    if isinstance(p, (Out, In, Acc)):
        if isinstance(p, Out):
            bang = "!!" if p.attr is Attr.SUCCEEDS else "!"
            head = f"{p.chan}{bang}({_show_args(p.args)})"
        elif isinstance(p, In):
            q = "??" if p.attr is Attr.SUCCEEDS else "?"
            head = f"{p.chan}{q}({','.join(p.params)})"
        else:
            head = f"acc({p.res},{p.label})"
        if isinstance(p.cont, Nil):
            return head
        return head + "." + _show_seq(p.cont)
    if isinstance(p, Par):
        parts = []
        q: Process = p
        while isinstance(q, Par):
            parts.append(q.left)
            q = q.right
        parts.append(q)
        out = []
        for i, part in enumerate(parts):
            s = show_process(part)
            if isinstance(part, Par) or (i < len(parts) - 1 and _ends_open(part)):
                s = f"({s})"
            out.append(s)
        return " | ".join(out)
    if isinstance(p, If):
        then = show_process(p.then)
        if isinstance(p.then, Par):
            then = f"({then})"
        return f"if {p.cond} then {then} else {show_process(p.orelse)}"
    if isinstance(p, Nu):
        return f"new {p.name} in {show_process(p.body)}"
    if isinstance(p, NuR):
        return f"newR {show_spec(p.spec)},{p.res} in {show_process(p.body)}"
    if isinstance(p, Repl):
        return "*" + _show_seq(p.body)
    raise TypeError(p)


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>!!|\?\?|<=|>=|==|!=|[!?().,|*+\-=<>;&])
    """,
    re.VERBOSE,
)

KEYWORDS = {"new", "newR", "in", "if", "then", "else", "acc", "true", "false", "any",
            "pref", "spec", "labels", "mode"}


@dataclass(frozen=True)
class Token:
    kind: str  # 'num', 'ident', 'op', 'eof'
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        s = m.group()
        if kind != "ws":
            toks.append(Token(kind, s, line, pos - line_start + 1))
        nl = s.count("\n")
        if nl:
            line += nl
            line_start = pos + s.rindex("\n") + 1
        pos = m.end()
    toks.append(Token("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.labels: list[str] = list(BUILTIN_LABELS)
        self.specs: dict[str, TraceSpec] = {}
        self.mode = "safety"

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        t = tok or self.tok
        return ParseError(msg, t.line, t.col)

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "ident")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        t = self.tok
        self.i += 1
        return t

    def name(self) -> str:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            raise self.error(f"expected a name, found {t.text or 'end of input'!r}")
        self.i += 1
        return t.text

    # -- header
    def header(self) -> None:
        while True:
            if self.at("labels"):
                self.i += 1
                while not self.at(";"):
                    t = self.tok
                    lab = self.name()
                    if not lab[0].isupper() or lab == "v":
                        raise self.error(f"access labels must be capitalised: {lab!r}", t)
                    if lab not in self.labels:
                        self.labels.append(lab)
                    self.accept(",")
                self.expect(";")
            elif self.at("spec"):
                self.i += 1
                t = self.tok
                if t.kind not in ("num", "ident"):
                    raise self.error("expected a specification name")
                self.i += 1
                if t.text in self.specs:
                    raise self.error(f"duplicate specification {t.text!r}", t)
                self.expect("=")
                self.specs[t.text] = self.pref()
                self.expect(";")
            elif self.at("mode") and self.peek().text in ("safety", "liveness"):
                self.i += 1
                self.mode = self.name()
                self.expect(";")
            else:
                return

    # -- specifications
    def pref(self) -> TraceSpec:
        self.expect("pref")
        self.expect("(")
        r = self.regex()
        self.expect(")")
        if not _down_only_final(r):
            raise self.error("the end marker 'v' may only occur at the end of a trace")
        return r

    def regex(self) -> TraceSpec:
        left = self.regex_cat()
        if self.at("+") or self.at("|"):
            self.i += 1
            return Union_(left, self.regex())
        return left

    def regex_cat(self) -> TraceSpec:
        items = [self.regex_star()]
        while self.tok.kind in ("ident", "num") or self.at("("):
            if self.tok.kind == "num" and self.tok.text not in ("0",):
                break
            items.append(self.regex_star())
        r = items[-1]
        for it in reversed(items[:-1]):
            r = Concat(it, r)
        return r

    def regex_star(self) -> TraceSpec:
        r = self.regex_atom()
        while self.accept("*"):
            r = Star(r)
        return r

    def regex_atom(self) -> TraceSpec:
        t = self.tok
        if self.accept("("):
            r = self.regex()
            self.expect(")")
            return r
        if t.kind == "num" and t.text == "0":
            self.i += 1
            return Empty()
        if t.kind == "ident":
            self.i += 1
            if t.text == "v":
                return Down()
            if t.text == "eps":
                return Epsilon()
            lab = LABEL_ALIASES.get(t.text, t.text)
            if lab not in self.labels:
                raise self.error(f"undeclared access label {t.text!r}", t)
            return Sym(lab)
        raise self.error(f"unexpected {t.text or 'end of input'!r} in specification")

    # -- processes
    def par(self) -> Process:
        parts = [self.seq()]
        while self.accept("|"):
            parts.append(self.seq())
        p = parts[-1]
        for q in reversed(parts[:-1]):
            p = Par(q, p)
        return p

    def names(self) -> list[str]:
        out = [self.name()]
        while self.accept(","):
            out.append(self.name())
        return out

    def seq(self) -> Process:
        t = self.tok
        if self.accept("new"):
            ns = self.names()
            self.expect("in")
            body = self.par()
            for n in reversed(ns):
                body = Nu(n, body)
            return body
        if self.accept("newR"):
            spec = self.specref()
            self.expect(",")
            x = self.name()
            self.expect("in")
            return NuR(x, spec, self.par())
        if self.accept("if"):
            cond = self.value()
            self.expect("then")
            then = self.par()
            self.expect("else")
            return If(cond, then, self.par())
        if self.accept("*"):
            return Repl(self.seq())
        if self.accept("("):
            p = self.par()
            self.expect(")")
            return p
        if t.kind == "num" and t.text == "0":
            self.i += 1
            return NIL
        return self.prefixed()

    def specref(self) -> TraceSpec:
        t = self.tok
        if self.at("pref"):
            r = self.pref()
        elif t.kind in ("num", "ident"):
            self.i += 1
            if t.text in self.specs:
                r = self.specs[t.text]
            elif t.text in BUILTIN_SPECS:
                r = BUILTIN_SPECS[t.text]
            else:
                raise self.error(f"unknown specification {t.text!r}", t)
        else:
            raise self.error("expected a specification")
        # The prefix closure of the empty language is taken to be {eps}.
        return Epsilon() if spec_is_empty(r) else r

    def continuation(self) -> Process:
        if self.accept("."):
            return self.seq()
        return NIL

    def prefixed(self) -> Process:
        t = self.tok
        if self.accept("acc"):
            self.expect("(")
            x = self.name()
            self.expect(",")
            lt = self.tok
            if lt.kind != "ident":
                raise self.error("expected an access label")
            self.i += 1
            lab = LABEL_ALIASES.get(lt.text, lt.text)
            if lab not in self.labels:
                raise self.error(f"undeclared access label {lt.text!r}", lt)
            self.expect(")")
            return Acc(lab, x, self.continuation())
        if t.kind == "ident" and t.text in LABEL_ALIASES and self.peek().text == "(":
            self.i += 1
            self.expect("(")
            x = self.name()
            self.expect(")")
            return Acc(LABEL_ALIASES[t.text], x, self.continuation())
        x = self.name()
        if self.at("!") or self.at("!!"):
            attr = Attr.SUCCEEDS if self.tok.text == "!!" else Attr.NONE
            self.i += 1
            args: list[Value] = []
            if self.accept("("):
                if not self.at(")"):
                    args.append(self.value())
                    while self.accept(","):
                        args.append(self.value())
                self.expect(")")
            return Out(x, tuple(args), attr, self.continuation())
        if self.at("?") or self.at("??"):
            attr = Attr.SUCCEEDS if self.tok.text == "??" else Attr.NONE
            self.i += 1
            params: list[str] = []
            if self.accept("("):
                if not self.at(")"):
                    params = self.names()
                self.expect(")")
            if len(set(params)) != len(params):
                raise self.error("duplicate input parameter", t)
            return In(x, tuple(params), attr, self.continuation())
        raise self.error(f"expected '!' or '?' after {x!r}")

    _ARITH = ("+", "-", "*", "=", "==", "!=", "<", ">", "<=", ">=")

    def value(self) -> Value:
        v, opaque = self.value_atom()
        while self.tok.kind == "op" and self.tok.text in self._ARITH:
            # '*' is only arithmetic when an operand follows
            if self.tok.text == "*" and self.peek().kind not in ("num", "ident"):
                break
            self.i += 1
            self.value_atom()
            opaque = True
        return OPAQUE if opaque else v

    def value_atom(self) -> tuple[Value, bool]:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return OPAQUE, True
        if self.accept("true"):
            return TRUE, False
        if self.accept("false"):
            return FALSE, False
        if self.accept("any"):
            return OPAQUE, True
        if self.accept("("):
            v = self.value()
            self.expect(")")
            return v, isinstance(v, Opaque)
        return Var(self.name()), False


def parse_program(text: str, mode: str | None = None) -> Program:
    """Parse a whole program file (header plus process).  ``mode`` overrides
    the header's mode; in safety mode every attribute is erased."""
    ps = _Parser(text)
    ps.header()
    proc = ps.par()
    if ps.tok.kind != "eof":
        raise ps.error(f"unexpected {ps.tok.text!r}")
    proc = uniquify(proc)
    mode = mode or ps.mode
    if mode == "safety":
        proc = strip_attrs(proc)
    return Program(proc, tuple(ps.labels), ps.specs, mode)


def parse_process(text: str) -> Process:
    return parse_program(text).process


def parse_spec(text: str, labels: tuple[str, ...] = BUILTIN_LABELS) -> TraceSpec:
    """Parse a specification written as ``pref(...)``.  Unknown capitalised
    identifiers are accepted as labels."""
    ps = _Parser(text)
    ps.labels = list(labels)
    # allow any capitalised identifier as a label here
    for t in ps.toks:
        if t.kind == "ident" and t.text[:1].isupper() and t.text not in ps.labels:
            ps.labels.append(t.text)
    r = ps.pref()
    if ps.tok.kind != "eof":
        raise ps.error(f"unexpected {ps.tok.text!r}")
    return r


def iter_subprocesses(p: Process) -> Iterator[Process]:
    stack = [p]
    while stack:
        q = stack.pop()
        yield q
        for attr in ("cont", "left", "right", "then", "orelse", "body"):
            child = getattr(q, attr, None)
            if isinstance(child, Process):
                stack.append(child)
