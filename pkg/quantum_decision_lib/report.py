"""
Reproducible command reports rendered as JSON, CSV or Markdown.

Every float is rounded to 12 significant digits before encoding, so the
three formats carry identical numbers and repeated runs differ only in the
timestamp.
"""
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Tuple
import csv
import io
import json
import logging
import math

import numpy as np

from .exceptions import OutOfRange

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = "1.0"
SIGNIFICANT_DIGITS = 12


def format_number(value: float) -> str:
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def normalize(obj: Any) -> Any:
    """JSON-ready copy with floats at 12 significant digits."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not math.isfinite(value):
            return str(value)
        rounded = float(format_number(value))
        return 0.0 if rounded == 0 else rounded
    if isinstance(obj, (complex, np.complexfloating)):
        return [normalize(obj.real), normalize(obj.imag)]
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return normalize(obj.tolist())
    if hasattr(obj, "to_dict"):
        return normalize(obj.to_dict())
    return obj


def flatten(obj: Any, prefix: str = "") -> List[Tuple[str, Any]]:
    """Dotted-path leaves of a nested structure, in document order."""
    if isinstance(obj, dict):
        rows = []
        for key, value in obj.items():
            rows.extend(flatten(value, f"{prefix}.{key}" if prefix else str(key)))
        return rows
    if isinstance(obj, list):
        rows = []
        for index, value in enumerate(obj):
            rows.extend(flatten(value, f"{prefix}[{index}]"))
        return rows
    return [(prefix, obj)]


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_number(value)
    return str(value)


@dataclass
class Report:
    """
    Output of one command.
    """
    command: str
    input_digest: Optional[str]
    results: Dict[str, Any]
    seed: int
    version: str
    residuals: Dict[str, Any] = field(default_factory=dict)
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

    def to_dict(self) -> Dict[str, Any]:
        return normalize({
            "schema_version": REPORT_SCHEMA_VERSION,
            "command": self.command,
            "input_digest": self.input_digest,
            "seed": self.seed,
            "version": self.version,
            "results": self.results,
            "residuals": self.residuals,
            "timestamp": self.timestamp,
        })

    def deterministic_dict(self) -> Dict[str, Any]:
        """to_dict without the timestamp."""
        data = self.to_dict()
        data.pop("timestamp")
        return data


def render_json(report: Report) -> str:
    return json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n"


def render_csv(report: Report) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["field", "value"])
    for key, value in flatten(report.to_dict()):
        writer.writerow([key, _cell(value)])
    return buffer.getvalue()


def render_markdown(report: Report) -> str:
    data = report.to_dict()
    lines = [
        f"# qdu {data['command']}",
        "",
        f"- version: `{data['version']}`",
        f"- seed: `{data['seed']}`",
        f"- input digest: `{data['input_digest'] or '-'}`",
        f"- timestamp: `{data['timestamp']}`",
    ]
    for section in ("results", "residuals"):
        rows = flatten(data[section])
        lines += ["", f"## {section.capitalize()}", ""]
        if not rows:
            lines.append("_none_")
            continue
        lines += ["| field | value |", "|---|---:|"]
        lines += [f"| {key} | {_cell(value)} |" for key, value in rows]
    return "\n".join(lines) + "\n"


RENDERERS = {
    "json": render_json,
    "csv": render_csv,
    "md": render_markdown,
}


def render(report: Report, fmt: str = "json") -> str:
    try:
        return RENDERERS[fmt](report)
    except KeyError:
        raise OutOfRange(f"unknown report format '{fmt}'") from None


def write_report(text: str, out: Optional[str] = None) -> None:
    """Write to ``out`` as UTF-8, or to stdout when no path is given."""
    if out is None:
        print(text, end="")
        return
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text)
    logger.info(f"Report written to {out}")
