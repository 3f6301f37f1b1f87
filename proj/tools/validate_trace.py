#!/usr/bin/env python3
"""Validate every line of a trace file against the trace JSON Schema."""

import argparse
import json
import sys

import jsonschema


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("schema")
    ap.add_argument("traces", nargs="+")
    args = ap.parse_args()

    with open(args.schema) as f:
        schema = json.load(f)
    validator = jsonschema.Draft202012Validator(schema)

    bad = 0
    for path in args.traces:
        with open(path) as f:
            for n, line in enumerate(f, 1):
                if not line.strip():
                    continue
                for err in validator.iter_errors(json.loads(line)):
                    bad += 1
                    if bad <= 20:
                        print(f"{path}:{n}: {err.message}", file=sys.stderr)
        print(f"{path}: {n} lines checked")
    if bad:
        print(f"{bad} schema violations", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
