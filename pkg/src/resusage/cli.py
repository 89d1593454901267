"""Command-line front end: parse, infer, check every resource, report.

Exit status: 0 when every obligation is ``Safe``, 1 when some obligation is
``PossiblyUnsafe``, 2 on input or typing errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, TextIO

from . import behavior as bt
from .checker import Verdict, check_inclusion
from .inference import InferenceError, infer
from .semantics import ExploreResult, explore
from .syntax import ParseError, annotate_all, parse_program, show_process

EXIT_SAFE = 0
EXIT_UNSAFE = 1
EXIT_ERROR = 2

WELL_ANNOTATED_WARNING = (
    "warning: --assume-all-succeed marks every communication as eventually "
    "succeeding; input contract: well-annotatedness not verified")


@dataclass
class RunConfig:
    mode: Optional[str] = None        # None: take it from the file header
    cap: int = 3
    atom_bound: int = 2000
    oracle_depth: Optional[int] = None
    dumps: set = field(default_factory=set)   # subset of {types, basis, petri, dfa}
    output: str = "text"
    seed: int = 0
    assume_all_succeed: bool = False
    dot_dir: Optional[str] = None

    def __post_init__(self):
        if self.cap < 1:
            raise ValueError("cap must be at least 1")


@dataclass
class Report:
    """Everything a run produced; rendered as text or JSON."""

    file: str
    mode: str
    program: str = ""
    constraints: list[str] = field(default_factory=list)
    environment: list[str] = field(default_factory=list)
    verdicts: list[Verdict] = field(default_factory=list)
    oracle: Optional[ExploreResult] = None
    oracle_depth: Optional[int] = None
    warnings: list[str] = field(default_factory=list)
    error: Optional[str] = None

    @property
    def exit_code(self) -> int:
        if self.error is not None:
            return EXIT_ERROR
        return EXIT_SAFE if all(v.safe for v in self.verdicts) else EXIT_UNSAFE

    def oracle_json(self) -> Optional[dict]:
        if self.oracle is None:
            return None
        o = self.oracle
        return {"depth": self.oracle_depth, "states": o.states, "truncated": o.truncated,
                "violations": [v.describe() for v in o.violations]}

    def to_json(self, timing: bool = True) -> dict:
        d: dict = {"file": self.file, "mode": self.mode}
        if self.error is not None:
            d["error"] = self.error
        d["verdicts"] = [v.to_json(timing) for v in self.verdicts]
        if self.oracle is not None:
            d["oracle"] = self.oracle_json()
        if self.warnings:
            d["warnings"] = list(self.warnings)
        return d


def analyze(text: str, config: RunConfig, name: str = "<input>") -> Report:
    """Run the whole pipeline on program text."""
    bt.reset_fresh(config.seed)
    report = Report(name, config.mode or "safety")
    try:
        prog = parse_program(text, config.mode)
    except ParseError as e:
        report.error = f"parse error: {e}"
        return report
    mode = prog.mode
    report.mode = mode
    proc = prog.process
    if config.assume_all_succeed:
        proc = annotate_all(proc)
        report.warnings.append(WELL_ANNOTATED_WARNING)
    report.program = show_process(proc)
    try:
        inf = infer(proc, mode)
    except InferenceError as e:
        report.error = f"type error: {e}"
        return report
    report.constraints = [str(o) for o in inf.obligations]
    report.environment = [f"{x} : {t}" for x, t in sorted(inf.resolved_env().items())]
    for ob in inf.obligations:
        report.verdicts.append(check_inclusion(ob, cap=config.cap, atom_bound=config.atom_bound))
    if config.oracle_depth is not None:
        report.oracle_depth = config.oracle_depth
        report.oracle = explore(proc, config.oracle_depth, mode)
        if report.oracle.violations and all(v.safe for v in report.verdicts):
            report.warnings.append("warning: the oracle found a violation the checker missed")
    return report


# ---------------------------------------------------------------------------
# Text rendering


def _section(title: str) -> str:
    return f"(*** {title} ***)"


def render_text(report: Report, config: RunConfig) -> str:
    out: list[str] = []
    if report.error is not None:
        out.append(f"{report.file}: {report.error}")
        return "\n".join(out) + "\n"
    if "types" in config.dumps:
        out.append(_section("Program"))
        out.append(report.program)
        out.append(_section("Type environment"))
        out.extend(report.environment or ["(empty)"])
        out.append(_section("Constraints"))
        out.extend(report.constraints or ["(none)"])
    for v in report.verdicts:
        if "basis" in config.dumps and v.basis is not None:
            b = v.basis
            out.append(_section(f"Basis for {v.resource}"))
            out.append("hidden: " + (", ".join(b.hidden) or "(none)"))
            out.extend(f"{j}: {bt.show(a)}" for j, a in enumerate(b.atoms))
            out.append("initial: " + " ".join(str(k) for k in b.initial))
        if "dfa" in config.dumps and v.dfa is not None:
            out.append(_section(f"Automaton for {v.spec}"))
            out.append(v.dfa.to_text())
        if "petri" in config.dumps and v.net is not None:
            prod = v.product()
            out.append(prod.to_text())
            if config.dot_dir:
                path = Path(config.dot_dir) / f"{v.resource}.dot"
                path.write_text(prod.to_dot() + "\n")
                out.append(f"(dot written to {path})")
            else:
                out.append(prod.to_dot())
        out.extend(_verdict_lines(v))
    if report.oracle is not None:
        o = report.oracle
        trunc = ", truncated" if o.truncated else ""
        out.append(_section(f"Oracle (depth {report.oracle_depth}, {o.states} states{trunc})"))
        out.extend(v.describe() for v in o.violations[:5])
        if not o.violations:
            out.append("no violation within the bound")
    out.extend(report.warnings)
    n_bad = sum(not v.safe for v in report.verdicts)
    if n_bad == 0:
        out.append("No error found")
    else:
        out.append(f"Possible errors found: {n_bad} of {len(report.verdicts)} "
                   f"resource obligation(s) may be violated")
    return "\n".join(out) + "\n"


def _verdict_lines(v: Verdict) -> list[str]:
    approx = [k for k, on in (("nu-lifted", v.nu_lifted),
                              ("counter-abstracted", v.counter_abstracted)) if on]
    head = (f"{v.resource}: {v.verdict} against {v.spec} ({v.mode}; "
            f"{v.places} places, {v.transitions} transitions, "
            f"{v.abstract_states} abstract states")
    head += f"; {', '.join(approx)})" if approx else ")"
    lines = [head]
    if not v.safe:
        lines.append(f"  reason: {v.reason}")
        if v.witness is not None:
            lines.append("  witness: " + (" ".join(v.witness) or "(initial state)"))
        if v.confirmed is True:
            lines.append("  confirmed on the exact net")
        elif v.confirmed is False:
            lines.append("  not reproducible on the exact net (abstraction artefact)")
    return lines


# ---------------------------------------------------------------------------
# Entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="resusage",
        description="Check resource-usage protocols of pi-calculus programs.")
    ap.add_argument("file", help="program file ('-' for standard input)")
    ap.add_argument("--mode", choices=["safety", "liveness"], default=None,
                    help="override the mode declared in the file (default: safety)")
    ap.add_argument("--cap", type=int, default=3,
                    help="token counter bound; counts >= CAP are abstracted (default 3)")
    ap.add_argument("--atom-bound", type=int, default=2000,
                    help="give up (PossiblyUnsafe) beyond this many basis atoms")
    ap.add_argument("--oracle", type=int, metavar="DEPTH", default=None,
                    help="also run the bounded reduction explorer to DEPTH steps")
    ap.add_argument("--dump-types", action="store_true", help="print types and constraints")
    ap.add_argument("--dump-basis", action="store_true", help="print each basis")
    ap.add_argument("--dump-petri", action="store_true",
                    help="print each composed Petri net (listing and DOT)")
    ap.add_argument("--dot-dir", default=None,
                    help="with --dump-petri, write DOT files here instead of printing")
    ap.add_argument("--dump-dfa", action="store_true", help="print each specification automaton")
    ap.add_argument("--json", action="store_true", help="emit a JSON report")
    ap.add_argument("--seed", type=int, default=0,
                    help="offset for generated type-variable names")
    ap.add_argument("--assume-all-succeed", action="store_true",
                    help="liveness experiments: treat every communication as succeeding")
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    dumps = {k for k in ("types", "basis", "petri", "dfa") if getattr(args, f"dump_{k}")}
    return RunConfig(mode=args.mode, cap=args.cap, atom_bound=args.atom_bound,
                     oracle_depth=args.oracle, dumps=dumps,
                     output="json" if args.json else "text", seed=args.seed,
                     assume_all_succeed=args.assume_all_succeed, dot_dir=args.dot_dir)


def run(config: RunConfig, path: str, stdout: Optional[TextIO] = None,
        stderr: Optional[TextIO] = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as e:
        print(f"{path}: cannot read: {e.strerror}", file=stderr)
        return EXIT_ERROR
    report = analyze(text, config, path)
    for w in report.warnings:
        if w == WELL_ANNOTATED_WARNING:
            print(w, file=stderr)
    if config.output == "json":
        stdout.write(json.dumps(report.to_json(), indent=2) + "\n")
    elif report.error is not None:
        stderr.write(render_text(report, config))
    else:
        stdout.write(render_text(report, config))
    return report.exit_code


def main(argv: Optional[list[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.cap < 1:
        ap.error("--cap must be at least 1")
    return run(config_from_args(args), args.file)


if __name__ == "__main__":
    sys.exit(main())
