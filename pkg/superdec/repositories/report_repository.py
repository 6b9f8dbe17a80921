"""
Report Repository

JSON for pydantic reports (sorted keys, two-space indent, Python float repr
so repeated runs are byte-identical) and CSV for tabular results.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

from pydantic import BaseModel

from superdec.repositories.base import BaseRepository
from superdec.schemas.reports import MacReport, MetricsReport

logger = logging.getLogger(__name__)


def dump_json(payload: Any) -> str:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


class ReportRepository(BaseRepository[Dict[str, Any]]):
    """Writes reports under one output directory."""

    def save(self, name: str, item: Any) -> Path:
        path = self.path_for(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dump_json(item))
        logger.info(f"Wrote {path}")
        return path

    def load(self, name: str) -> Dict[str, Any]:
        return json.loads(self.path_for(name).read_text())

    def save_metrics(self, report: MetricsReport, name: str = "metrics.json") -> Path:
        return self.save(name, report)

    def load_metrics(self, name: str = "metrics.json") -> MetricsReport:
        return MetricsReport.model_validate(self.load(name))

    def save_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        path = self.path_for(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow(row)
        logger.info(f"Wrote {path}")
        return path

    def save_macs(self, report: MacReport, name: str = "macs.csv") -> Path:
        rows: List[List[str]] = report.csv_rows()
        return self.save_csv(name, rows[0], rows[1:])
