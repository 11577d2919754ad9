"""Benchmark suites: generated scenarios, correctness checks, median timings, CSV and PNG output."""

from __future__ import annotations

import csv
import io
import os
import statistics
import time
from dataclasses import dataclass
from typing import Callable, TextIO

from ..errors import CorrectnessFailure
from ..knowledge import Instance, true_instances
from ..syntax import parse_program
from ..transition import Session, SessionOptions
from .common import session_options

CHAIN = """Fact x Identified by int Derived from
  (Foreach x: x(x.int - 1) Where 0 < x.int).
+x({n}).
"""

ARITH = """Fact x Identified by Int Derived from
  (Foreach x1, x2: x((x1 + x2) / 2)).
+x(0).
+x({n}).
"""

COMBO = """Fact x Identified by Int Derived from
  (Foreach y: y.x1), (Foreach y: y.x2)
  (Foreach y: y.x3), (Foreach x: x(x - 1) Where 0 < x)
Fact y Identified by x1 * x2 * x3 Derived from
  (Foreach x: y(x,x,x)),
  (Foreach x1, x2, x3: y(x1,x2,x3)
                Where (x1 == x2 || x2 != x3)
                   && (Exists y: x2 < y.x1)).
+x({n}).
"""

PRIMES = """Fact prime Identified by Int
  Derived from (Foreach int: prime(int)
    Where Not(Exists int1, int2:
      1 Where int1 * int2 == int)).
Event addleq Related to int Creates int
  Syncs with addleq(int - 1) Where 2 < int.
addleq({n}).
"""

LONG_HEADER = "Fact x Identified by Int.\n"


def scenario(suite: str, n: int) -> str:
    if suite == "long":
        return LONG_HEADER + "+x(4).\n" * n
    template = {"chain": CHAIN, "arith": ARITH, "combo": COMBO, "primes": PRIMES}[suite]
    return template.replace("{n}", str(n))


# -- independent expectations ---------------------------------------------------------


def sieve(n: int) -> set[int]:
    flags = [True] * (n + 1)
    flags[:2] = [False] * min(2, n + 1)
    for i in range(2, int(n ** 0.5) + 1):
        if flags[i]:
            flags[i * i::i] = [False] * len(flags[i * i::i])
    return {i for i, f in enumerate(flags) if f}


def midpoint_closure(n: int) -> set[int]:
    seen = {0, n}
    while True:
        new = {(a + b) // 2 for a in seen for b in seen} - seen
        if not new:
            return seen
        seen |= new


def combo_expected(n: int) -> tuple[set[int], set[tuple]]:
    xs = set(range(n + 1))
    ys: set[tuple] = set()
    while True:
        new_ys = {(x, x, x) for x in xs}
        firsts = {y[0] for y in ys}
        new_ys |= {(a, b, c) for a in xs for b in xs for c in xs
                   if (a == b or b != c) and any(b < f for f in firsts)}
        new_xs = xs | {v for y in new_ys for v in y}
        new_xs |= {x - 1 for x in new_xs if 0 < x}
        if new_ys == ys and new_xs == xs:
            return xs, ys
        xs, ys = new_xs, new_ys


def _literals(session: Session, type_name: str) -> list:
    st = session.state
    return [i.args[0] if len(i.args) == 1 and not isinstance(i.args[0], Instance) else i
            for i in true_instances(st.kb, st.registry, type_name)]


def _check(suite: str, n: int, session: Session, phrases: list) -> None:
    def fail(msg: str):
        raise CorrectnessFailure(f"{suite} N={n}: {msg}")

    if suite == "chain":
        xs = [i.args[0].args[0] for i in true_instances(session.state.kb, session.state.registry, "x")]
        if sorted(xs) != list(range(n + 1)):
            fail(f"expected {n + 1} instances x(0)..x({n}), got {len(xs)}")
    elif suite == "arith":
        if set(_literals(session, "x")) != midpoint_closure(n):
            fail("held x differs from the midpoint closure of {0, N}")
    elif suite == "combo":
        xs, ys = combo_expected(n)
        got_y = {tuple(a.args[0] for a in i.args)
                 for i in true_instances(session.state.kb, session.state.registry, "y")}
        if set(_literals(session, "x")) != xs or got_y != ys:
            fail("held x/y differ from the direct fixpoint")
    elif suite == "primes":
        got = set(_literals(session, "prime"))
        if got != sieve(n):
            fail(f"primes differ from the sieve: {sorted(got ^ sieve(n))[:10]}")
    elif suite == "long":
        if len(phrases) != n + 1 or set(_literals(session, "x")) != ({4} if n else set()):
            fail("expected N statements holding x(4)")


# -- timing -------------------------------------------------------------------------------

DEFAULT_SIZES = {
    "chain": [8, 16, 32, 64, 128, 256, 512],
    "arith": [4, 8, 16, 32, 64],
    "combo": [1, 2, 3, 4, 5, 6],
    "long": [16, 64, 256, 1024],
    "primes": [10, 25, 50, 100],
}


@dataclass
class Timing:
    suite: str
    n: int
    median_ms: float
    runs: int


def run_once(suite: str, n: int, options: SessionOptions) -> tuple[Session, list, float]:
    text = scenario(suite, n)
    start = time.perf_counter()
    phrases = parse_program(text)
    session = Session(options)
    for p in phrases:
        session.exec_phrase(p)
    return session, phrases, (time.perf_counter() - start) * 1000.0


def time_suite(suite: str, sizes: list[int], runs: int, options: SessionOptions,
               progress: Callable[[str], None] = lambda s: None) -> list[Timing]:
    """Check every size first; only then time ``runs`` executions per size."""
    for n in sizes:
        session, phrases, _ = run_once(suite, n, options)
        _check(suite, n, session, phrases)
    out = []
    for n in sizes:
        samples = [run_once(suite, n, options)[2] for _ in range(runs)]
        out.append(Timing(suite, n, statistics.median(samples), runs))
        progress(f"{suite} N={n}: {out[-1].median_ms:.1f} ms")
    return out


def to_csv(timings: list[Timing]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["suite", "n", "median_ms", "runs"])
    for t in timings:
        w.writerow([t.suite, t.n, f"{t.median_ms:.3f}", t.runs])
    return buf.getvalue()


def plot(timings: list[Timing], path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for suite in dict.fromkeys(t.suite for t in timings):
        pts = [t for t in timings if t.suite == suite]
        ax.plot([t.n for t in pts], [t.median_ms for t in pts], marker="o", label=suite)
    ax.set_xscale("log", base=2)
    ax.set_yscale("log", base=2)
    ax.set_xlabel("N")
    ax.set_ylabel("median run time (ms)")
    ax.grid(True, which="major", alpha=0.4)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def run_bench(args, out: TextIO) -> int:
    options = session_options(args)
    suites = list(DEFAULT_SIZES) if args.suite == "all" else [args.suite]
    timings: list[Timing] = []
    try:
        for suite in suites:
            sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else DEFAULT_SIZES[suite]
            timings += time_suite(suite, sizes, args.runs, options)
    except CorrectnessFailure as exc:
        print(f"error (CorrectnessFailure): {exc}", file=out)
        return 1
    outdir = args.output or "."
    os.makedirs(outdir, exist_ok=True)
    stem = os.path.join(outdir, f"bench_{args.suite}")
    text = to_csv(timings)
    with open(stem + ".csv", "w", encoding="utf-8") as fh:
        fh.write(text)
    plot(timings, stem + ".png")
    out.write(text)
    out.write(f"# wrote {stem}.csv and {stem}.png\n")
    return 0
