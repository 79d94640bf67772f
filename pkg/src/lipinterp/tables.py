"""Tabular output shared by every study: CSV or JSON, written atomically."""
from __future__ import annotations

import contextlib
import csv
import json
import math
import os
import tempfile
from typing import Iterable, List, Sequence


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


@contextlib.contextmanager
def atomic_path(path):
    """Yield a temporary sibling of ``path`` and move it into place on success."""
    path = os.fspath(path)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=os.path.dirname(os.path.abspath(path)))
    os.close(fd)
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]):
    with atomic_path(path) as tmp, open(tmp, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def write_json(path, header: Sequence[str], rows: Iterable[Sequence]):
    records = [{k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in zip(header, row)} for row in rows]
    with atomic_path(path) as tmp, open(tmp, "w", encoding="utf-8") as fh:
        json.dump(records, fh, indent=1)
        fh.write("\n")


def write_table(path_stem, header, rows, fmt: str = "csv") -> str:
    """Write ``path_stem`` + ``.csv`` or ``.json``; returns the path written."""
    path = f"{path_stem}.{fmt}"
    (write_json if fmt == "json" else write_csv)(path, header, list(rows))
    return path


def read_csv(path) -> List[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
