"""Serialisation of results and the append-only CSV result cache.

Floats are written with 17 significant digits so every double round-trips.
Output is a pure function of the record, which keeps repeated runs
byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
import time
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence

from filelock import FileLock


def format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    if x == int(x) and abs(x) < 1e16:
        return f"{int(x)}.0"
    return format(x, ".17g")


def _plain(v: Any) -> Any:
    """Reduce a value to JSON-able primitives (Fractions become "p/q")."""
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, float):
        return v
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if hasattr(v, "item") and callable(v.item):  # numpy scalars
        return _plain(v.item())
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if hasattr(v, "label"):
        return v.label
    return str(v)


def _encode(v: Any, indent: int, level: int) -> str:
    if v is None:
        return "null"
    if v is True:
        return "true"
    if v is False:
        return "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format_float(v)
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," + pad if indent else ", "
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f"{json.dumps(k)}: {_encode(x, indent, level + 1)}" for k, x in v.items()]
        return "{" + pad + sep.join(items) + end + "}"
    if not v:
        return "[]"
    return "[" + pad + sep.join(_encode(x, indent, level + 1) for x in v) + end + "]"


def to_json(obj: Any, indent: int = 2) -> str:
    return _encode(_plain(obj), indent, 0) + "\n"


def _cell(v: Any) -> str:
    v = _plain(v)
    if isinstance(v, float):
        return format_float(v)
    if v is None:
        return ""
    if isinstance(v, (dict, list)):
        return _encode(v, 0, 0)
    return str(v)


def to_csv(rows: Sequence[Dict[str, Any]], columns: Optional[List[str]] = None) -> str:
    if columns is None:
        columns = []
        for r in rows:
            for k in r:
                if k not in columns:
                    columns.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(k)) for k in columns])
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the same directory and rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cache_key(command: str, params: Dict[str, Any]) -> str:
    """Canonical key: command followed by parameters sorted by name."""
    parts = [command] + [f"{k}={_cell(params[k])}" for k in sorted(params)]
    return "|".join(parts)


class ResultCache:
    """Append-only CSV of (key, value, created_at) rows guarded by a file lock.

    The first row stored for a key wins; later identical keys are ignored,
    so a key always maps to one value.
    """

    FIELDS = ("key", "value", "created_at")

    def __init__(self, path: str):
        self.path = path
        self.lock = FileLock(path + ".lock")
        self._entries: Optional[Dict[str, dict]] = None

    def _load(self) -> Dict[str, dict]:
        entries: Dict[str, dict] = {}
        if os.path.exists(self.path):
            with open(self.path, newline="", encoding="utf-8") as fh:
                for row in csv.DictReader(fh):
                    entries.setdefault(row["key"], json.loads(row["value"]))
        return entries

    def get(self, key: str) -> Optional[dict]:
        with self.lock:
            self._entries = self._load()
        return self._entries.get(key)

    def put(self, key: str, value: dict) -> None:
        with self.lock:
            entries = self._load()
            if key in entries:
                self._entries = entries
                return
            new = not os.path.exists(self.path) or os.path.getsize(self.path) == 0
            with open(self.path, "a", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                if new:
                    w.writerow(self.FIELDS)
                w.writerow([key, _encode(_plain(value), 0, 0),
                            time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())])
            entries[key] = json.loads(_encode(_plain(value), 0, 0))
            self._entries = entries

    def keys(self) -> Iterable[str]:
        with self.lock:
            return list(self._load())
