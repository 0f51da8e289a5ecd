"""Validate ranklab reports against docs/report.schema.json.

usage: check_schema.py SCHEMA TOOL SPEC_DIR
Runs a fixed set of commands and checks every report.
"""

import json
import subprocess
import sys

import jsonschema

COMMANDS = [
    ["heights", "--spec", "{d}/chacon.json", "--stages", "4"],
    ["ap", "--spec", "{d}/chacon.json", "--base", "1:0", "--to", "3", "--max-len", "14"],
    ["gaps", "--k", "9", "--alphabet", "0,2,3,5,6,8", "--n", "2"],
    ["--approx", "conservativity", "--spec", "{d}/chacon.json", "--alpha", "1,1", "--horizon", "2"],
    ["non-ergodic", "--spec", "{d}/all_but_last.json", "--b", "0,1", "--base-stage", "1", "--horizon", "3"],
    ["mixing", "--spec", "{d}/separated.json", "--levels", "0", "--m", "40"],
    ["heights", "--spec", "{d}/missing.json"],
    ["bogus"],
]


def main() -> int:
    schema_path, tool, spec_dir = sys.argv[1:4]
    with open(schema_path) as f:
        schema = json.load(f)
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    failures = 0
    for cmd in COMMANDS:
        args = [a.format(d=spec_dir) for a in cmd]
        proc = subprocess.run([tool, *args], capture_output=True, text=True)
        report = json.loads(proc.stdout)
        errors = list(validator.iter_errors(report))
        if report["exitCode"] != proc.returncode:
            errors.append(f"exitCode {report['exitCode']} != process status {proc.returncode}")
        status = "ok" if not errors else "INVALID"
        print(f"{status}: {' '.join(cmd)}")
        for e in errors:
            print(f"    {e}")
        failures += bool(errors)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
