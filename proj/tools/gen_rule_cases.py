#!/usr/bin/env python3
"""Records reference-linter findings for the small rule cases used by test_rules.

Reads tests/data/rule_cases.txt (cases separated by lines of '----') and writes
tests/data/rule_cases.jsonl with {"text", "expected": [[rule, line], ...]}.
"""
import json
import os
import subprocess
import sys
import tempfile

KEEP = {"DL3003", "DL3006", "DL3008", "DL3009", "DL3015", "DL3020", "DL4000", "DL4006"}
root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
hadolint = os.environ.get("HADOLINT", "hadolint")

with open(os.path.join(root, "tests/data/rule_cases.txt")) as f:
    cases = [c.lstrip("\n") for c in f.read().split("----\n") if c.strip()]

out = []
for text in cases:
    with tempfile.NamedTemporaryFile("w", suffix=".Dockerfile", delete=False) as tmp:
        tmp.write(text)
    res = subprocess.run([hadolint, "--no-fail", "-f", "json", tmp.name], capture_output=True, text=True)
    os.unlink(tmp.name)
    if res.returncode != 0:
        sys.exit("hadolint failed on:\n" + text + res.stderr)
    found = sorted({(d["code"], d["line"]) for d in json.loads(res.stdout) if d["code"] in KEEP})
    out.append({"text": text, "expected": [list(x) for x in found]})

with open(os.path.join(root, "tests/data/rule_cases.jsonl"), "w") as f:
    for row in out:
        f.write(json.dumps(row) + "\n")
print(len(out), "cases")
