"""Plain-text formats: single-column series CSV, lag/value CSV, JSON output."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import Ar1FitError

__all__ = ["InputFormatError", "fmt_num", "read_series", "read_lag_values", "dump_json"]

SCHEMA_VERSION = 1


class InputFormatError(Ar1FitError):
    """A data file could not be parsed."""


def fmt_num(x) -> str:
    """Shortest round-trip text for floats, plain digits for integers."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def _rows(path):
    text = Path(path).read_text()
    return [(i, ln.strip()) for i, ln in enumerate(text.splitlines(), 1) if ln.strip()]


def read_series(path) -> np.ndarray:
    """One value per line; a single non-numeric first line is taken as a header."""
    rows = _rows(path)
    if rows and not _is_number(rows[0][1].split(",")[0]):
        rows = rows[1:]
    vals = []
    for lineno, ln in rows:
        tok = ln.split(",")[0].strip()
        try:
            v = float(tok)
        except ValueError:
            raise InputFormatError(f"{path}:{lineno}: cannot parse {ln!r} as a number") from None
        if not math.isfinite(v):
            raise InputFormatError(f"{path}:{lineno}: non-finite value {ln!r}")
        vals.append(v)
    return np.array(vals)


def read_lag_values(path) -> dict[int, float]:
    """Two columns (lag, value), optional header line."""
    rows = _rows(path)
    if rows and not _is_number(rows[0][1].split(",")[0]):
        rows = rows[1:]
    out = {}
    for lineno, ln in rows:
        parts = [p.strip() for p in ln.split(",")]
        try:
            lag, val = int(parts[0]), float(parts[1])
        except (ValueError, IndexError):
            raise InputFormatError(f"{path}:{lineno}: expected 'lag,value', got {ln!r}") from None
        out[lag] = val
    return out


def _plain(obj):
    """Convert numpy scalars/arrays to Python types and non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dump_json(obj, indent: int = 2) -> str:
    """JSON text with shortest round-trip floats and NaN/inf as null."""
    return json.dumps(_plain(obj), indent=indent, allow_nan=False) + "\n"
