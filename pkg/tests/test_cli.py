"""The art command: subcommands, flags, exit codes, JSON output."""

import json
import os
import subprocess
import sys

import pytest

from art.cli import parseArgs, run
from helpers import CORPUS

ABS = str(CORPUS / "abs.imp")
INSERT = str(CORPUS / "insert.imp")
BASEQ = str(CORPUS / "base.quals")
LENQ = str(CORPUS / "len.quals")


def testDefaultCommandIsVerify():
    ns = parseArgs([ABS, "--qualifiers", BASEQ])
    assert ns.command == "verify" and ns.file == ABS


def testExplicitCommandKept():
    ns = parseArgs(["elaborate", ABS])
    assert ns.command == "elaborate"


def testVerifyOk(capsys):
    assert run([ABS, "--qualifiers", BASEQ]) == 0
    out = capsys.readouterr().out
    assert "abs:" in out and out.rstrip().endswith("ok")
    assert "0 <= v" in out


def testVerifyFailureExitsOne(capsys):
    assert run([str(CORPUS / "neg_nullret.imp"),
                "--qualifiers", BASEQ]) == 1
    err = capsys.readouterr().err
    assert "verification failure" in err and "pad" in err


def testInputErrorExitsTwo(tmp_path, capsys):
    assert run([str(tmp_path / "missing.imp")]) == 2
    bad = tmp_path / "bad.imp"
    bad.write_text("function f( {")
    assert run([str(bad)]) == 2


def testBackendErrorExitsThree(capsys):
    assert run([ABS, "--qualifiers", BASEQ, "--smt", "false"]) == 3
    assert "backend error" in capsys.readouterr().err


def testElaborate(capsys):
    assert run(["elaborate", INSERT]) == 0
    out = capsys.readouterr().out
    assert "//: conc(x)" in out and "//: unfold(&x)" in out


def testConstraints(capsys):
    assert run(["constraints", INSERT]) == 0
    out = capsys.readouterr().out
    assert "|-" in out and ";; " in out and "clauses" in out


def testSolution(capsys):
    assert run(["solution", INSERT, "--qualifiers", LENQ]) == 0
    out = capsys.readouterr().out
    assert "k1 :=" in out and "len(v) == 1 + len(x0)" in out


def testAudit(capsys):
    assert run(["audit", INSERT]) == 0
    assert "audit ok" in capsys.readouterr().out


def testJsonOutput(capsys):
    assert run([INSERT, "--qualifiers", LENQ, "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["status"] == "ok"
    assert "insert" in doc["signatures"]
    assert "len(v) == 1 + len(x0)" in doc["signatures"]["insert"]


def testJsonFailure(capsys):
    assert run([str(CORPUS / "neg_nullhead.imp"), "--json",
                "--qualifiers", BASEQ]) == 1
    doc = json.loads(capsys.readouterr().out)
    assert doc["status"] == "invalid"
    assert "conc" in doc["failed"]["provenance"]


def testEmitFlags(tmp_path, capsys):
    assert run([ABS, "--qualifiers", BASEQ, "--emit-annotated",
                "--emit-constraints", "--emit-solution",
                "--emit-smt", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "function abs" in out and "|-" in out and "k1 :=" in out
    assert any(f.endswith(".smt2") for f in os.listdir(tmp_path))


def testParallelJobs(capsys):
    assert run([INSERT, "--qualifiers", LENQ, "-j", "2"]) == 0
    assert "ok" in capsys.readouterr().out


def testConsoleScriptAndEnvOverride(tmp_path):
    env = dict(os.environ)
    env["ART_SMT"] = f"{sys.executable} -m art.minismt"
    r = subprocess.run([sys.executable, "-m", "art.cli", ABS,
                        "--qualifiers", BASEQ],
                       capture_output=True, text=True, env=env, timeout=60)
    assert r.returncode == 0 and r.stdout.rstrip().endswith("ok")
    env["ART_SMT"] = "this-command-does-not-exist"
    r = subprocess.run([sys.executable, "-m", "art.cli", ABS,
                        "--qualifiers", BASEQ],
                       capture_output=True, text=True, env=env, timeout=60)
    assert r.returncode == 3
