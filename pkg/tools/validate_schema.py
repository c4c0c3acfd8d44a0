#!/usr/bin/env python3
"""
kopcheck report checker.

Checks reports written by `kopcheck ... --report FILE`: first against the
frozen JSON schema, then for agreement between the exit status and the
payload it was derived from. Not part of the installed package.

Usage:
    python tools/validate_schema.py report out/verify.json [more.json ...]
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any

try:
    import jsonschema
except ImportError:
    sys.exit("Error: jsonschema is required (pip install -e '.[dev]')")


SCHEMA_DIR = Path(__file__).parent.parent / "schemas"

SCHEMA_FILES = {
    "report": "report.schema.json",
}

ERROR_STATUS = {"INPUT_ERROR": 3, "BUDGET_EXCEEDED": 4}


def load_schema(schema_name: str) -> dict:
    if schema_name not in SCHEMA_FILES:
        raise ValueError(f"Unknown schema: {schema_name}. Valid: {list(SCHEMA_FILES)}")
    return json.loads((SCHEMA_DIR / SCHEMA_FILES[schema_name]).read_text())


def validate_document(document: dict, schema: dict) -> list[str]:
    """Schema violations as 'path: message' strings (empty if valid)."""
    validator = jsonschema.Draft7Validator(schema)
    errors = sorted(validator.iter_errors(document), key=lambda e: list(e.absolute_path))
    return [
        f"{'.'.join(str(p) for p in e.absolute_path) or '(root)'}: {e.message}" for e in errors
    ]


def expected_status(result: dict[str, Any]) -> int:
    """Exit status implied by a verification or predicate result."""
    if not all(h["holds"] for h in result["hypotheses"]):
        return 2
    if result["conclusion_holds"] and all(s["holds"] for s in result["subchecks"]):
        return 0
    return 1


def consistency_errors(report: dict[str, Any]) -> list[str]:
    """Disagreements between exit_status and the error or result it reports."""
    status, error, result = report["exit_status"], report.get("error"), report.get("result")
    if error is not None:
        want = ERROR_STATUS.get(error["code"])
        if want != status:
            return [f"exit_status: {status} does not match error code {error['code']}"]
        return []
    if status in ERROR_STATUS.values():
        return [f"exit_status: {status} without an error object"]
    if isinstance(result, dict) and "hypotheses" in result:
        want = expected_status(result)
        if want != status:
            return [f"exit_status: {status} but the result implies {want}"]
    return []


def check_file(path: Path, schema: dict) -> list[str]:
    try:
        report = json.loads(path.read_text())
    except FileNotFoundError:
        return ["file not found"]
    except json.JSONDecodeError as e:
        return [f"invalid JSON: {e}"]
    errors = validate_document(report, schema)
    return errors or consistency_errors(report)


def main() -> None:
    parser = argparse.ArgumentParser(description="Check kopcheck reports")
    parser.add_argument("schema", choices=list(SCHEMA_FILES), help="Schema name")
    parser.add_argument("files", nargs="+", type=Path, help="Report files")
    args = parser.parse_args()

    schema = load_schema(args.schema)
    failed = 0
    for path in args.files:
        errors = check_file(path, schema)
        if errors:
            failed += 1
            print(f"INVALID {path}:")
            for error in errors:
                print(f"  - {error}")
        else:
            print(f"VALID {path}")
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
