import csv
import logging
from datetime import datetime, timezone
from pathlib import Path

from frameshrink.errors import InputError
from payload_models.payloads import CsvRow, format_value

from core.utils import _m
from services.const import TIMESTAMP_PREFIX

logger = logging.getLogger(__name__)


class ReportService:
    def write_table(
        self,
        path: Path,
        header: list[str],
        rows: list[list],
        timestamp: bool = True,
    ) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fp:
            if timestamp:
                fp.write(f"{TIMESTAMP_PREFIX}{datetime.now(timezone.utc).isoformat()}\n")
            writer = csv.writer(fp, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([value if isinstance(value, str) else format_value(value) for value in row])

        logger.info(_m("Report written", extra={"path": str(path), "rows": len(rows)}))
        return path

    def write_rows(self, path: Path, rows: list[CsvRow], timestamp: bool = True) -> Path:
        if not rows:
            raise InputError("report has no rows")
        header = type(rows[0]).columns()
        return self.write_table(path, header, [row.as_csv_row() for row in rows], timestamp)

    def read_body(self, path: Path) -> list[list[str]]:
        """CSV rows without the optional timestamp line."""
        with Path(path).open(newline="", encoding="utf-8") as fp:
            lines = [line for line in fp if not line.startswith(TIMESTAMP_PREFIX)]
        return list(csv.reader(lines))
