"""
kopcheck Structured Reports.

Responsibilities:
- Build the machine-readable report of one command invocation
- Validate it against schemas/report.schema.json
- Serialize JSON deterministically

Forbidden:
- No evaluation logic
- No absolute paths or timestamps (reports are reproducible)
"""

import json
import logging
from pathlib import Path
from typing import Any

from kopcheck import __version__
from kopcheck.context import RunContext
from kopcheck.contracts import ExitStatus
from kopcheck.kernel import System
from kopcheck.utils import serialize_json


logger = logging.getLogger(__name__)

SCHEMA_PATH = Path(__file__).parent.parent / "schemas" / "report.schema.json"


def describe_system(sys: System) -> dict[str, Any]:
    return {
        "agents": list(sys.agent_names),
        "horizon": sys.horizon,
        "runs": sys.run_count,
        "points": sys.point_count,
        "props": list(sys.interpretation.props),
    }


def build_report(
    command: str,
    ctx: RunContext,
    status: ExitStatus,
    result: dict[str, Any] | None = None,
    system: System | None = None,
    error: dict[str, Any] | None = None,
) -> dict[str, Any]:
    """
    Build the report object.

    Args:
        command: Subcommand name (eval, check, verify, scenario)
        ctx: Invocation context; only deterministic settings are embedded
        status: Exit status of the command
        result: Command-specific payload, e.g. VerificationReport.to_dict()
        system: The system the command ran on, if one was loaded
        error: build_error(...) object when the command failed on input
    """
    return {
        "version": __version__,
        "command": command,
        "exit_status": int(status),
        "settings": ctx.report_settings(),
        "system": describe_system(system) if system is not None else None,
        "result": result,
        "error": error,
    }


def validate_report(report: dict[str, Any]) -> list[str]:
    """
    Validate a report against the frozen schema.

    Returns:
        List of validation error messages (empty if valid).
    """
    try:
        import jsonschema
    except ImportError:
        # jsonschema is a dev extra
        return []

    with open(SCHEMA_PATH) as f:
        schema = json.load(f)

    validator = jsonschema.Draft7Validator(schema)
    errors = []
    for error in validator.iter_errors(report):
        path = ".".join(str(p) for p in error.absolute_path) or "(root)"
        errors.append(f"{path}: {error.message}")
    return errors


def write_report(report: dict[str, Any], path: Path) -> None:
    """Validate (softly) and write a report."""
    for problem in validate_report(report):
        logger.warning("report schema violation %s", problem)
    path.write_text(serialize_json(report))
    logger.debug("wrote report path=%s command=%s", path, report["command"])
