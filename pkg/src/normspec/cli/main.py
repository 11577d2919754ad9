"""``normspec run|test|repl|serve|emit-asp|bench``"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, TextIO

from ..asp_export import SearchSpec, emit_search, emit_specification
from ..errors import NormSpecError
from ..syntax import ast as A
from ..transition import Session
from ..typesystem import Registry, apply_declarations
from .common import (EXIT_FAILED, EXIT_OK, EXIT_PARSE, describe_error, exit_code_for, load_paths,
                     query_json, query_text, session_options)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="normspec", description="Interpreter for normative specifications.")
    sub = p.add_subparsers(dest="mode", required=True)

    def common(sp):
        sp.add_argument("--max-fixpoint-iters", type=int, default=100_000)
        sp.add_argument("--atom-cap", type=int, default=20,
                        help="ground atom limit of the oracle (NORMSPEC_ATOM_CAP overrides)")
        sp.add_argument("--oracle-fallback", action="store_true",
                        help="accept a non-stratified stratum when it has a unique stable model")
        sp.add_argument("--empty-aggregate", choices=("sentinel", "error"), default="sentinel")
        sp.add_argument("--json", action="store_true", help="one JSON object per output line")
        sp.add_argument("-o", "--output", help="output file (directory for bench)")

    for mode in ("run", "test"):
        sp = sub.add_parser(mode, help="execute files" if mode == "run" else "report failing Boolean queries")
        common(sp)
        sp.add_argument("files", nargs="+")
        if mode == "test":
            sp.add_argument("--fail-on-violation", action="store_true",
                            help="also exit 1 when a violation is reported")
    sp = sub.add_parser("repl", help="interactive session")
    common(sp)
    sp.add_argument("files", nargs="*")
    sp = sub.add_parser("serve", help="JSON-lines service on stdin/stdout")
    common(sp)
    sp.add_argument("files", nargs="*")
    sp = sub.add_parser("emit-asp", help="write the ASP translation of a specification")
    common(sp)
    sp.add_argument("files", nargs="+")
    sp.add_argument("--search", help="JSON file describing a scenario search")
    sp = sub.add_parser("bench", help="time the benchmark suites")
    common(sp)
    sp.add_argument("suite", choices=("chain", "arith", "combo", "long", "primes", "all"))
    sp.add_argument("--sizes", help="comma-separated sizes (defaults per suite)")
    sp.add_argument("--runs", type=int, default=10)
    return p


def run_files(args, out: TextIO, test_mode: bool) -> int:
    session = Session(session_options(args))
    failed = violations = 0
    try:
        phrases = load_paths(args.files)
        for phrase in phrases:
            result = session.exec_phrase(phrase)
            for q in result.queries:
                if q.failed:
                    failed += 1
                if test_mode and not q.failed:
                    continue
                if args.json:
                    out.write(json.dumps(query_json(q)) + "\n")
                elif test_mode:
                    out.write(f"FAILED {query_text(q)}\n")
                else:
                    out.write(query_text(q) + "\n")
            for v in result.violations:
                violations += 1
                if args.json:
                    out.write(json.dumps({"kind": "violation", "violation": v.kind,
                                          "instance": str(v.instance)}) + "\n")
                elif not test_mode:
                    out.write(f"{v}\n")
    except NormSpecError as exc:
        code = exit_code_for(exc)
        if args.json:
            out.write(json.dumps({"kind": "error", "error": type(exc).__name__, "message": str(exc),
                                  "exit": code}) + "\n")
        else:
            print(describe_error(exc), file=sys.stderr if code == EXIT_PARSE else out)
        return code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if failed:
        return EXIT_FAILED
    if test_mode and violations and args.fail_on_violation:
        return EXIT_FAILED
    return EXIT_OK


def emit_asp(args, out: TextIO) -> int:
    try:
        registry = Registry.initial()
        for phrase in load_paths(args.files):
            if isinstance(phrase, A.Decls):
                registry = apply_declarations(registry, phrase.decls)
            elif isinstance(phrase, A.Parallel):
                decls = [d for p in phrase.phrases if isinstance(p, A.Decls) for d in p.decls]
                registry = apply_declarations(registry, decls)
        text = emit_specification(registry)
        if args.search:
            with open(args.search, encoding="utf-8") as fh:
                spec = SearchSpec(**json.load(fh))
            text += emit_search(registry, spec)
    except NormSpecError as exc:
        print(describe_error(exc), file=sys.stderr)
        return exit_code_for(exc)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    out = sys.stdout
    if args.mode in ("run", "test"):
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                return run_files(args, fh, args.mode == "test")
        return run_files(args, out, args.mode == "test")
    if args.mode == "emit-asp":
        return emit_asp(args, out)
    if args.mode == "repl":
        from .repl import run_repl

        return run_repl(args)
    if args.mode == "serve":
        from .serve import serve

        return serve(args, sys.stdin, out)
    from .bench import run_bench

    return run_bench(args, out)


if __name__ == "__main__":
    sys.exit(main())
