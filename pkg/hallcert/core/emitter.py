"""Output emitters for certificates, reports and batch summaries."""

import csv
import io
import json
import os
import tempfile
from abc import ABC, abstractmethod
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Sequence, Union

from jinja2 import Environment, FileSystemLoader
from pydantic import BaseModel

from .models import BatchRow, TheoremReport


def canonical_json(record: Union[BaseModel, Sequence[BaseModel]]) -> str:
    """Sorted keys, two-space indent, trailing newline."""
    if isinstance(record, BaseModel):
        data: Any = record.model_dump(mode="json")
    else:
        data = [r.model_dump(mode="json") for r in record]
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def atomic_write(output_path: Path, text: str) -> None:
    """Write to a temporary sibling, then rename it over the target."""
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=output_path.parent, prefix=f".{output_path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, output_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class BaseEmitter(ABC):
    """Base class for all output emitters."""

    def __init__(self, records: Sequence[BaseModel]):
        self.records = list(records)

    @abstractmethod
    def render(self) -> str:
        """The report as text."""

    def emit(self, output_path: Path) -> None:
        """Emit the report to the specified path."""
        atomic_write(output_path, self.render())

    def get_summary_stats(self) -> Dict[str, Any]:
        """Counts of records by status."""
        stats: Dict[str, Any] = {"total": len(self.records), "by_status": {}}
        for record in self.records:
            status = getattr(record, "status", None) or getattr(record, "verdict", None) or "n/a"
            status = getattr(status, "value", status)
            stats["by_status"][status] = stats["by_status"].get(status, 0) + 1
        return stats


class JSONEmitter(BaseEmitter):
    """A single record as its canonical JSON document, several as a JSON list."""

    def render(self) -> str:
        if len(self.records) == 1:
            return canonical_json(self.records[0])
        return canonical_json(self.records)


class CSVEmitter(BaseEmitter):
    """One row per batch instance, in manifest order."""

    def render(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(BatchRow.model_fields), lineterminator="\n")
        writer.writeheader()
        for row in self.records:
            if not isinstance(row, BatchRow):
                raise ValueError(f"CSV output takes batch rows, got {type(row).__name__}")
            writer.writerow(row.model_dump(mode="json"))
        return buf.getvalue()


class HTMLEmitter(BaseEmitter):
    """Theorem-check reports and batch rows as one HTML page."""

    def render(self) -> str:
        template_dir = Path(__file__).parent.parent / "render"
        env = Environment(loader=FileSystemLoader(template_dir), autoescape=True)
        template = env.get_template("report.html")

        reports = [r for r in self.records if isinstance(r, TheoremReport)]
        rows = [r for r in self.records if isinstance(r, BatchRow)]
        context = {
            "reports": [self._report_to_dict(r) for r in reports],
            "rows": [r.model_dump(mode="json") for r in rows],
            "summary": self.get_summary_stats(),
            "generated_at": datetime.now().isoformat(timespec="seconds"),
        }
        return template.render(**context)

    def _report_to_dict(self, report: TheoremReport) -> Dict[str, Any]:
        cert = report.certificate
        return {
            "group": report.group.label,
            "pi": ",".join(str(r) for r in report.pi),
            "status": report.status,
            "epi": report.epi.status if report.epi else "",
            "case": report.epi.case_label if report.epi else "",
            "group_order": report.group_order,
            "hall_order": report.hall_order,
            "provenance": report.provenance or "",
            "hall_solvable": report.hall_solvable,
            "base_size": str(report.base_size) if report.base_size else "",
            "reg": str(report.reg) if report.reg else "",
            "reg_m": report.reg_m,
            "comparisons": report.comparisons,
            "verdict": cert.verdict.value if cert else "",
            "witnesses": len(cert.witnesses) if cert else 0,
            "intersection_order": cert.intersection_order if cert else None,
            "notes": report.notes,
        }


def create_emitter(format_type: str, records: Sequence[BaseModel]) -> BaseEmitter:
    """Factory function to create appropriate emitter."""
    emitters = {
        "json": JSONEmitter,
        "csv": CSVEmitter,
        "html": HTMLEmitter,
    }

    if format_type not in emitters:
        raise ValueError(f"Unsupported format: {format_type}. Supported: {list(emitters.keys())}")

    return emitters[format_type](records)


def format_for(path: Path) -> str:
    """Output format from a file suffix; JSON unless .csv or .html."""
    suffix = Path(path).suffix.lower().lstrip(".")
    return {"csv": "csv", "html": "html", "htm": "html"}.get(suffix, "json")
