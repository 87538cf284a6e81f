"""Schema validation by delegation to the core pipeline's CLI.

The canonical loader (exposed as `hopqg validate`) is the executable source of
truth for the record schema (documented in schema/record-schema.md of the core
repository); calling it guarantees this package and the core enforce exactly
the same invariant set.
"""

from __future__ import annotations

import json
import shutil
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

VALIDATOR_COMMAND = "hopqg"


class ValidatorUnavailable(Exception):
    pass


@dataclass
class ValidationReport:
    file: str
    violations: list

    @property
    def count(self) -> int:
        return len(self.violations)

    @property
    def clean(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"file": self.file, "violations": self.violations,
                "count": self.count}


def validate_against_schema(jsonl_path) -> ValidationReport:
    """Run the core validator on a JSONL file and parse its report."""
    if shutil.which(VALIDATOR_COMMAND) is None:
        raise ValidatorUnavailable(
            f"{VALIDATOR_COMMAND!r} is not on PATH; install the core package "
            "to validate against the canonical schema"
        )
    with tempfile.TemporaryDirectory() as tmp:
        report_path = Path(tmp) / "report.json"
        proc = subprocess.run(
            [VALIDATOR_COMMAND, "validate", str(jsonl_path),
             "--out", str(report_path)],
            capture_output=True, text=True,
        )
        if proc.returncode not in (0, 1):
            raise ValidatorUnavailable(
                f"validator exited with {proc.returncode}: {proc.stderr.strip()}"
            )
        payload = json.loads(report_path.read_text(encoding="utf-8"))
    return ValidationReport(file=str(jsonl_path), violations=payload["violations"])
