"""
kopcheck RunContext - Command execution context.

Responsibilities:
- Hold global CLI configuration for one command invocation
- Serialization for reports and debugging

Invariants:
- Immutable during command execution
- Built once from CLI flags; no config files, no environment variables
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any


DEFAULT_RUN_BUDGET = 100_000  # maximum runs enumerated per system
DEFAULT_SEED = 0


@dataclass(frozen=True)
class RunContext:
    """Context passed to every CLI command."""

    budget: int = DEFAULT_RUN_BUDGET
    seed: int = DEFAULT_SEED
    report_path: Path | None = None
    extension: bool = False
    verbose: bool = False

    def to_dict(self) -> dict[str, Any]:
        """Serialize to dictionary."""
        return {
            "budget": self.budget,
            "seed": self.seed,
            "report_path": str(self.report_path) if self.report_path else None,
            "extension": self.extension,
            "verbose": self.verbose,
        }

    def report_settings(self) -> dict[str, Any]:
        """Settings embedded in structured reports (no paths, deterministic)."""
        return {"budget": self.budget, "seed": self.seed}
