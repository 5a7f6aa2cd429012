#!/usr/bin/env python3
"""End-to-end checks of the command-line tool."""

import json
import math
import subprocess
import sys
import tempfile
from pathlib import Path

ITM = sys.argv[1]
REPO = Path(sys.argv[2])

failures = 0


def run(*args, expect_code=0):
    global failures
    proc = subprocess.run([ITM, *args], capture_output=True, text=True, cwd=REPO)
    if proc.returncode != expect_code:
        print(f"FAIL: {' '.join(args)} -> exit {proc.returncode} (expected {expect_code})")
        print(proc.stdout[-2000:])
        print(proc.stderr[-2000:])
        failures += 1
        return None
    return proc.stdout


def check(name, cond):
    global failures
    print(f"{'ok' if cond else 'FAIL'}: {name}")
    if not cond:
        failures += 1


out = run("schedule", "--mu", "0", "--L", "1", "--N", "2")
if out:
    j = json.loads(out)
    check("schedule q=0 A values", abs(j["A"][1] - 4) < 1e-12
          and abs(j["A"][2] - (6 + 2 * math.sqrt(5))) < 1e-9)

out = run("schedule", "--mu", "0.1", "--L", "1", "--N", "1")
if out:
    j = json.loads(out)
    check("schedule A_1 at q=0.1", abs(j["A"][1] - 4 / 0.81) < 1e-9)
    check("schedule carries lambda", "lambda" in j and abs(j["lambda"][0] - math.sqrt(0.1)) < 1e-12)

run("schedule", "--mu", "1", "--L", "1", "--N", "1", expect_code=1)
run("design", "--crit", "func", "--cw", "0", "--cf", "0", "--mu", "0.1", "--L", "1", "--N", "1",
    expect_code=1)

out = run("schedule", "--mu", "0.1", "--L", "1", "--N", "3", "--format", "csv")
if out:
    check("schedule csv header", out.splitlines()[0] == "k,A,beta,delta,lambda")

with tempfile.TemporaryDirectory() as tmp:
    method = Path(tmp) / "method.json"
    cert = Path(tmp) / "cert.json"
    out = run("design", "--crit", "func", "--cw", "1", "--cf", "0", "--mu", "0.1", "--L", "1",
              "--N", "2", "--out", str(method), "--cert-out", str(cert))
    if out:
        bound = float(out.splitlines()[0].split(":")[1])
        check("design prints the published bound", abs(bound - 0.0418) < 1e-4)
        check("design prints the h table", "1.5567" in out and "1.7016" in out)
        j = json.loads(method.read_text())
        check("method file form", j["form"] == "h" and j["N"] == 2)
        jc = json.loads(cert.read_text())
        check("certificate sidecar", abs(jc["tau"] - 0.0418) < 1e-3)

        wc = run("worst-case", "--method", str(method), "--crit", "func", "--cw", "1",
                 "--cf", "0", "--mode", "relaxed")
        if wc:
            jw = json.loads(wc)
            check("worst-case recovers the design bound", abs(jw["value"] - jc["tau"]) < 2e-6)

        wf = run("worst-case", "--method", str(method), "--crit", "func", "--cw", "1",
                 "--cf", "0", "--mode", "full")
        if wf:
            jwf = json.loads(wf)
            check("full mode status", jwf["status"] == "optimal")

out = run("run", "--mu", "0.1", "--L", "1", "--N", "10", "--oracle", "fmu", "--dim", "2",
          "--format", "csv")
if out:
    lines = out.strip().splitlines()
    check("run csv header", lines[0] == "k,x_dist_sq,f_gap,z_dist_sq,z_bound")
    worst = 0.0
    for line in lines[1:]:
        cols = [float(c) for c in line.split(",")]
        worst = max(worst, abs(cols[3] - cols[4]) / max(cols[4], 1e-300))
    check("ITEM on f_mu attains the bound column", worst < 1e-9)

out = run("certify", "--mu", "0.1", "--L", "1", "--N", "10", "--oracle", "fL", "--dim", "2")
if out:
    j = json.loads(out)
    check("certify reports a nonincreasing potential", j["nonincreasing"])

golden = REPO / "data" / "appendix_e_golden.json"
if golden.exists():
    out = run("tables", "--golden", str(golden))
    if out is not None:
        check("tables match the golden file", "max deviation" in out)
else:
    print("skip: golden file missing")
    failures += 1

sys.exit(1 if failures else 0)
