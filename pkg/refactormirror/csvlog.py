from __future__ import annotations

import csv
from pathlib import Path

HEADER = ["entry_id", "refactoring_type", "template", "success", "applied", "residual", "note"]


def append_row(csv_path: str | Path, entry_id: str, refactoring_type: str, template: str,
               success: bool, applied: int = 0, residual: int = 0, note: str = "") -> None:
    """
    Append one run row to the CSV. Creates the file and header if missing.
    Columns: entry_id, refactoring_type, template, success, applied, residual, note
    """
    path = Path(csv_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    need_header = not path.exists()

    with path.open("a", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        if need_header:
            w.writerow(HEADER)
        w.writerow([entry_id, refactoring_type, template, "yes" if success else "no", applied, residual, note])
