import json
import subprocess
import sys

import pytest

from normspec.cli import main
from normspec.cli import bench
from normspec.cli.repl import Repl
from normspec.cli.serve import Server
from normspec.errors import CorrectnessFailure
from normspec.syntax import parse_program
from normspec.transition import SessionOptions

from support import CORPUS, GOLDEN, REJECTED, corpus_text

AUCTION = GOLDEN / "auction.eflint"


def write(tmp_path, text, name="spec.eflint"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_run_auction(capsys):
    assert main(["run", str(AUCTION)]) == 0
    out = capsys.readouterr().out
    assert out.strip().splitlines()[-1] == "?payment-duty(Bob, David, 140): True"


def test_failing_query_exits_1(tmp_path, capsys):
    assert main(["run", write(tmp_path, "?False.")]) == 1
    assert main(["test", write(tmp_path, "?True. ?False.")]) == 1
    assert capsys.readouterr().out.strip().splitlines()[-1] == "FAILED ?False: False"


def test_parse_error_exits_2(tmp_path, capsys):
    assert main(["run", write(tmp_path, "Fact a Identified by.")]) == 2
    assert "spec.eflint" in capsys.readouterr().err


def test_missing_file_exits_2(tmp_path):
    assert main(["run", str(tmp_path / "absent.eflint")]) == 2


def test_stratification_rejection_exits_3(capsys):
    assert main(["run", str(REJECTED / "ready.eflint")]) == 3
    assert "ready -[neg]-> ready" in capsys.readouterr().out


def test_interrupt_exits_4(tmp_path, capsys):
    assert main(["run", write(tmp_path, "Open Fact user Identified by String. ?Holds(user(Eve)).")]) == 4
    assert "MISSING INPUT: user(Eve)" in capsys.readouterr().out


def test_json_output(tmp_path, capsys):
    assert main(["run", "--json", write(tmp_path, "Fact a Identified by Int. +a(1). ?a(1). ?-a.")]) == 0
    lines = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert lines == [
        {"kind": "query", "query": "bool", "expr": "a(1)", "value": True},
        {"kind": "query", "query": "instances", "expr": "a", "value": ["a(1)"]},
    ]


@pytest.mark.parametrize("path", sorted(GOLDEN.glob("*.eflint")), ids=lambda p: p.stem)
def test_golden_files_pass_test_mode(path, capsys):
    assert main(["test", str(path)]) == 0
    assert "FAILED" not in capsys.readouterr().out


def test_violations_fail_test_mode_only_on_request(tmp_path):
    path = write(tmp_path, corpus_text("golden/auction.eflint") + "+undue-payment-delay().\n")
    assert main(["test", path]) == 0
    assert main(["test", "--fail-on-violation", path]) == 1


def test_atom_cap_from_environment(tmp_path, monkeypatch, capsys):
    spec = "Bool p Holds when Not(q()), Not(p())\nBool q Holds when Not(p()).\n?p().\n"
    path = write(tmp_path, spec)
    assert main(["run", "--oracle-fallback", path]) == 0
    monkeypatch.setenv("NORMSPEC_ATOM_CAP", "1")
    assert main(["run", "--oracle-fallback", path]) == 1
    assert "UniverseTooLarge" in capsys.readouterr().out


def test_emit_asp(tmp_path, capsys):
    assert main(["emit-asp", str(CORPUS / "asp" / "controls.eflint"),
                 "--search", str(CORPUS / "asp" / "search.json")]) == 0
    out = capsys.readouterr().out
    assert "in((holds,I),S) :- in((derived,I),S)" in out
    assert ":- counterexample." in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "normspec.cli", "run", str(AUCTION)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "140): True" in proc.stdout


# -- repl -----------------------------------------------------------------------------


def test_repl_session():
    repl = Repl()
    assert repl.step("Fact a Identified by Int.") == ["#1"]
    assert repl.step("+a(1).") == ["#2"]
    assert repl.step("?a(1).") == ["?a(1): True"]
    assert repl.step(":state") == ["a(1)"]
    assert [line.split()[0] for line in repl.step(":history")] == ["#0", "#1", "#2"]
    assert repl.step(":revert 1") == ["#1"]
    assert repl.step(":state") == []
    assert repl.step(":revert 99") == ["error: no state '99'"]
    assert repl.step(":bogus")[0].startswith("error: unknown command")


def test_repl_missing_input():
    repl = Repl()
    repl.step("Open Fact user Identified by String.")
    assert repl.step("?Holds(user(Eve)).") == ["MISSING INPUT: user(Eve)"]


def test_repl_options_and_violations():
    repl = Repl()
    repl.run(parse_program(corpus_text("golden/auction.eflint")))
    assert "undue-payment-delay()" not in repl.step(":options")
    out = repl.step("+undue-payment-delay().")
    assert "VIOLATION duty payment-duty(Bob, David, 140)" in out
    assert repl.step(":violations") == ["VIOLATION duty payment-duty(Bob, David, 140)"]


# -- serve ----------------------------------------------------------------------------


def request(server, **fields):
    return server.handle({"v": 1, **fields})


def test_serve_open_type_flow():
    server = Server(SessionOptions())
    assert request(server, kind="phrase", payload="Open Fact user Identified by String.")["ok"]
    plain = request(server, kind="phrase", payload="?Holds(user(Eve)).")
    assert plain["ok"] is False and plain["missing"] == {"instance": "user(Eve)", "type": "user"}
    scoped = request(server, kind="phrase", payload="?Holds(user(Eve)).",
                     additional=[{"instance": "user(Eve)", "value": True}])
    assert scoped["ok"] and scoped["results"][0]["value"] is True
    again = request(server, kind="phrase", payload="?Holds(user(Eve)).")
    assert again["missing"] == plain["missing"]


def test_serve_inspect_open_types():
    server = Server(SessionOptions())
    text = corpus_text("golden/auction.eflint").split("+bidder(Alice).")[0]
    text += ("Open Function min-price-of Identified by object * price.\n"
             "Open Fact bidder Identified by String.\nOpen Var auctioneer Identified by String.\n")
    assert request(server, kind="phrase", payload=text)["ok"]
    types = request(server, kind="inspect-open-types")["types"]
    assert {t["name"] for t in types} == {"min-price-of", "bidder", "auctioneer"}
    mpo = next(t for t in types if t["name"] == "min-price-of")
    assert mpo["domain"]["kind"] == "product"
    assert [i["instance"] for i in mpo["instances"]] == \
        ["min-price-of(Clock, 200)", "min-price-of(Painting, 400)", "min-price-of(Watch, 100)"]


def test_serve_revert_and_errors():
    server = Server(SessionOptions())
    first = request(server, kind="phrase", payload="Fact a Identified by Int.")["state"]
    request(server, kind="phrase", payload="+a(1).")
    assert request(server, kind="revert", state=first) == {"v": 1, "state": first, "ok": True}
    assert request(server, kind="phrase", payload="?a(1).")["results"][0]["value"] is False
    assert request(server, kind="revert", state=999)["ok"] is False
    assert "unknown request kind" in request(server, kind="dance")["error"]
    assert server.handle_line("{not json")["error"].startswith("malformed JSON")
    assert server.handle({"v": 2, "kind": "phrase"})["ok"] is False


def test_serve_failed_request_keeps_the_head():
    server = Server(SessionOptions())
    request(server, kind="phrase", payload="Fact a Identified by Int.")
    head = server.session.head
    reply = request(server, kind="phrase", payload="+a(1). ?b().")
    assert reply["ok"] is False and reply["state"] == head


# -- bench ----------------------------------------------------------------------------


def test_bench_writes_csv_and_png(tmp_path, capsys):
    assert main(["bench", "chain", "--sizes", "2,4", "--runs", "2", "-o", str(tmp_path)]) == 0
    csv_text = (tmp_path / "bench_chain.csv").read_text()
    assert csv_text.splitlines()[0] == "suite,n,median_ms,runs"
    assert len(csv_text.splitlines()) == 3
    assert (tmp_path / "bench_chain.png").stat().st_size > 0


@pytest.mark.parametrize("suite, n", [("arith", 8), ("combo", 2), ("primes", 30), ("long", 10)])
def test_bench_scenarios_are_correct(suite, n):
    session, phrases, _ = bench.run_once(suite, n, SessionOptions())
    bench._check(suite, n, session, phrases)


def test_long_scenario_has_n_statements():
    _, phrases, _ = bench.run_once("long", 25, SessionOptions())
    assert len(phrases) == 26


def test_bench_reports_correctness_failure(monkeypatch, tmp_path, capsys):
    monkeypatch.setattr(bench, "scenario", lambda suite, n: bench.CHAIN.replace("{n}", str(n - 1)))
    with pytest.raises(CorrectnessFailure):
        bench.time_suite("chain", [4], 1, SessionOptions())
    assert main(["bench", "chain", "--sizes", "4", "--runs", "1", "-o", str(tmp_path)]) == 1
    assert "CorrectnessFailure" in capsys.readouterr().out
    assert not (tmp_path / "bench_chain.csv").exists()
