"""Acceptance gate: one test per criterion, each reporting PASS/FAIL."""
import random
import subprocess
import sys
import time
from collections import deque
from pathlib import Path

from resusage import behavior as bt
from resusage.checker import check_inclusion
from resusage.cli import RunConfig, analyze, render_text
from resusage.gen import random_program
from resusage.inference import infer
from resusage.semantics import explore, state_of, step_state
from resusage.syntax import NIL, Par, parse_program

from conftest import example_text, record

TESTS = Path(__file__).parent


def _timed(text, **kw):
    t0 = time.perf_counter()
    report = analyze(text, RunConfig(**kw))
    return report, time.perf_counter() - t0


def _verdicts(report):
    return [v.verdict for v in report.verdicts]


def test_criterion_1_cobegin():
    text = example_text("cobegin")
    # delete the second of the two c2?() receives of the closing thread
    mutant = text.replace("c2?().c2?().acc(x,close)", "c2?().acc(x,close)")
    assert mutant != text
    assert parse_program(mutant).process == parse_program(example_text("cobegin_mutant")).process
    good, t1 = _timed(text)
    bad, t2 = _timed(mutant)
    oracle = explore(parse_program(mutant).process, 12)
    ok = (_verdicts(good) == ["Safe"] and _verdicts(bad) == ["PossiblyUnsafe"]
          and bool(oracle.violations) and not oracle.truncated and max(t1, t2) < 2.0)
    record(1, ok, f"cobegin {_verdicts(good)} in {t1:.2f}s; mutant {_verdicts(bad)} in {t2:.2f}s; "
                  f"oracle(12) violations={len(oracle.violations)}")


def test_criterion_2_repeatread():
    t0 = time.perf_counter()
    safety = analyze(example_text("repeatread"), RunConfig())
    live = analyze(example_text("repeatread_live"), RunConfig())
    noclose = analyze(example_text("repeatread_noclose"), RunConfig())
    elapsed = time.perf_counter() - t0
    ok = (_verdicts(safety) == ["Safe"] and safety.mode == "safety"
          and _verdicts(live) == ["Safe"] and live.mode == "liveness"
          and _verdicts(noclose) == ["PossiblyUnsafe"] and noclose.mode == "liveness"
          and elapsed < 10.0)
    record(2, ok, f"safety {_verdicts(safety)}, liveness {_verdicts(live)}, "
                  f"no close {_verdicts(noclose)} in {elapsed:.2f}s")


def test_criterion_3_producer_consumer():
    text = example_text("prodcons")
    mutant = text.replace("| x!()", "| y!()")
    assert mutant != text
    t0 = time.perf_counter()
    good = analyze(text, RunConfig())
    bad = analyze(mutant, RunConfig())
    elapsed = time.perf_counter() - t0
    ok = _verdicts(good) == ["Safe"] and _verdicts(bad) == ["PossiblyUnsafe"] and elapsed < 5.0
    record(3, ok, f"prodcons {_verdicts(good)}, swapped token {_verdicts(bad)} in {elapsed:.2f}s")


def test_criterion_4_samplerun():
    cfg = RunConfig(dumps={"petri"}, seed=0)
    report = analyze(example_text("samplerun"), cfg)
    out = render_text(report, cfg)
    lines = out.splitlines()
    ok = (_verdicts(report) == ["Safe"] and lines[-1] == "No error found"
          and "(*** 14 Places ***)" in lines and "(*** 9 Transitions ***)" in lines)
    v = report.verdicts[0]
    record(4, ok, f"{_verdicts(report)}, last line {lines[-1]!r}, "
                  f"{v.places} places / {v.transitions} transitions")


def test_criterion_5_soundness_fuzz():
    t0 = time.perf_counter()
    counts = dict(programs=0, safe=0, unsafe=0, truncated=0, unsound=0)
    unsound = []
    for seed in range(500):
        p = random_program(random.Random(seed), max_prefixes=6, max_resources=2)
        counts["programs"] += 1
        verdicts = [check_inclusion(o) for o in infer(p).obligations]
        if not all(v.safe for v in verdicts):
            counts["unsafe"] += 1
            continue
        counts["safe"] += 1
        oracle = explore(p, 8)
        if oracle.truncated:
            counts["truncated"] += 1
        elif oracle.violations:
            counts["unsound"] += 1
            unsound.append(seed)
    elapsed = time.perf_counter() - t0
    ok = counts["unsound"] == 0 and counts["programs"] >= 500 and elapsed < 300
    record(5, ok, f"{counts} in {elapsed:.1f}s; unsound seeds {unsound[:5]}")


PROPERTY_SUITES = {
    "structural congruence (9 laws)": [
        "test_behavior.py::test_law_par_unit",
        "test_behavior.py::test_law_par_commutative",
        "test_behavior.py::test_law_par_associative",
        "test_behavior.py::test_law_choice_commutative",
        "test_behavior.py::test_law_choice_associative",
        "test_behavior.py::test_law_choice_idempotent",
        "test_behavior.py::test_law_replication_unfolds",
        "test_behavior.py::test_law_recursion_unfolds",
        "test_behavior.py::test_law_restriction_scope",
    ],
    "exclusion/projection": [
        "test_behavior.py::test_exclusion_distributes_over_par",
        "test_behavior.py::test_exclusion_composes",
        "test_behavior.py::test_projection_composes",
        "test_behavior.py::test_exclusion_of_unused_names",
    ],
    "substitution collision": [
        "test_behavior.py::test_substitution_distributes_over_par",
        "test_behavior.py::test_substitution_collision_creates_communication",
    ],
    "simulation => trace inclusion": ["test_behavior.py::test_simulation_implies_trace_inclusion"],
    "least prefix point": ["test_behavior.py::test_recursion_is_least_prefix_point"],
    "basis closure": ["test_normalize.py::test_basis_closure"],
    "net/LTS trace agreement": ["test_petri.py::test_net_and_type_traces_agree"],
    "abstraction soundness": ["test_checker.py::test_abstraction_is_sound"],
    "exact product <=> trace inclusion": [
        "test_checker.py::test_exact_product_agrees_with_trace_inclusion"],
    "disabled/pdisabled": ["test_petri.py::test_pdisabled_matches_disabled"],
    "DFA membership": ["test_checker.py::test_dfa_membership"],
}


def test_criterion_6_property_suites():
    ids = [str(TESTS / n) for suite in PROPERTY_SUITES.values() for n in suite]
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *ids],
                          capture_output=True, text=True, cwd=TESTS.parent)
    elapsed = time.perf_counter() - t0
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    ok = proc.returncode == 0 and f"{len(ids)} passed" in tail
    record(6, ok, f"{len(PROPERTY_SUITES)} suites, {len(ids)} property tests: {tail} "
                  f"({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# subject reduction


def _weakly_offers(a, label, bound=3000):
    """Can ``a`` perform ``label`` after some silent steps?"""
    if label == bt.TAU:
        return True
    start = bt.norm(a)
    seen, queue = {start}, deque([start])
    while queue:
        s = queue.popleft()
        for lab, t in bt.tstep(s):
            if lab == label:
                return True
            if lab == bt.TAU:
                t = bt.norm(t)
                if t not in seen and len(seen) < bound:
                    seen.add(t)
                    queue.append(t)
    return False


def _opened(state):
    """The threads of a state without their binders, so that accesses to
    bound resources stay observable."""
    body = NIL
    for t in reversed(state.threads):
        body = t if body is NIL else Par(t, body)
    return body


def test_criterion_7_subject_reduction():
    checked = accesses = 0
    failures = []
    for seed in range(100):
        frontier = [state_of(random_program(random.Random(seed)))]
        seen = set(frontier)
        for _ in range(5):
            nxt = []
            for st in frontier:
                body = _opened(st)
                a = infer(body).type
                for lab, st2 in step_state(state_of(body)):
                    checked += 1
                    accesses += lab[0] == "acc"
                    if not _weakly_offers(a, lab):
                        failures.append((seed, lab))
                    if st2 not in seen:
                        seen.add(st2)
                        nxt.append(st2)
            frontier = nxt
    ok = not failures and accesses > 0
    record(7, ok, f"100 programs, {checked} reductions ({accesses} accesses) matched; "
                  f"failures {failures[:3]}")
