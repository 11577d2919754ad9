"""Interactive session with meta-commands for exploring alternative scenarios."""

from __future__ import annotations

import itertools
import sys
from typing import Optional

from ..errors import EvalInterrupt, NormSpecError
from ..evaluator import Context
from ..knowledge import Instance, canonical, held_set
from ..syntax import parse_program
from ..transition import Session, SessionOptions, describe_phrase
from .common import describe_error, load_paths, query_text, session_options

MAX_OPTION_CANDIDATES = 10_000

HELP = """\
:state          held instances of the current state
:options        enabled actions and events (over enumerable fields)
:violations     violations reported when the current state was reached
:history        states from the initial one up to the current one
:revert N       make state N the current state
:help           this text"""


def enabled_options(session: Session) -> list[Instance]:
    st = session.state
    ctx = Context(st.registry, st.kb, session.options.eval)
    out = []
    for rec in st.registry:
        if not rec.is_action:
            continue
        try:
            if rec.is_primitive:
                domains = [ctx.enumerate(rec.name)]
                make = lambda combo, rec=rec: combo[0]
            else:
                domains = [ctx.enumerate(t) for _, t in st.registry.field_types(rec.name)]
                make = lambda combo, rec=rec: Instance(rec.name, tuple(combo))
        except EvalInterrupt:
            continue
        for combo in itertools.islice(itertools.product(*domains), MAX_OPTION_CANDIDATES):
            inst = make(combo)
            try:
                if ctx.enabled(inst):
                    out.append(inst)
            except EvalInterrupt:
                continue
    return canonical(out)


def _short(text: str, width: int = 72) -> str:
    text = " ".join(text.split())
    return text if len(text) <= width else text[:width - 3] + "..."


class Repl:
    def __init__(self, options: Optional[SessionOptions] = None):
        self.session = Session(options)

    def step(self, line: str) -> list[str]:
        """Execute one input line (phrases or a meta-command) and return the printed lines."""
        line = line.strip()
        if not line:
            return []
        if line.startswith(":"):
            return self.meta(line)
        try:
            phrases = parse_program(line, filename="<repl>")
        except NormSpecError as exc:
            return [describe_error(exc)]
        return self.run(phrases)

    def run(self, phrases) -> list[str]:
        out = []
        for phrase in phrases:
            try:
                result = self.session.exec_phrase(phrase)
            except NormSpecError as exc:
                out.append(describe_error(exc))
                break
            out += [query_text(q) for q in result.queries]
            out += [str(v) for v in result.violations]
            if result.outcome is not None:
                out.append(f"#{result.state.id}")
        return out

    def meta(self, line: str) -> list[str]:
        cmd, _, arg = line.partition(" ")
        s = self.session
        if cmd == ":state":
            return [str(i) for i in canonical(held_set(s.state.kb, s.state.registry))]
        if cmd == ":options":
            return [str(i) for i in enabled_options(s)]
        if cmd == ":violations":
            return [str(v) for v in s.state.violations]
        if cmd == ":history":
            return [f"#{st.id} {_short(describe_phrase(st.phrase))}".rstrip() for st in s.lineage()]
        if cmd == ":revert":
            try:
                st = s.revert(int(arg))
            except (KeyError, ValueError):
                return [f"error: no state {arg.strip()!r}"]
            return [f"#{st.id}"]
        if cmd == ":help":
            return HELP.splitlines()
        return [f"error: unknown command {cmd} (try :help)"]


def run_repl(args) -> int:
    repl = Repl(session_options(args))
    if args.files:
        try:
            phrases = load_paths(args.files)
        except (NormSpecError, OSError) as exc:
            print(describe_error(exc), file=sys.stderr)
            return 2
        for text in repl.run(phrases):
            print(text)
    while True:
        try:
            line = input(f"#{repl.session.head} > ")
        except EOFError:
            print()
            return 0
        for text in repl.step(line):
            print(text)
