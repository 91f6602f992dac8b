"""Output plumbing: metadata headers, CSV/JSON writers, range and config parsing."""

from __future__ import annotations

import datetime as _dt
import io
import json
import math
import sys

import numpy as np
import scipy

from . import __version__, units


def fmt(value) -> str:
    """9 significant digits, '.' decimal, independent of locale."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".9g")
    return str(value)


def metadata(command: str, params: dict, timestamp: bool = True) -> dict:
    meta = {
        "command": command,
        "params": params,
        "units": units.convention(),
        "versions": {"soliton_imaging": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
    }
    if timestamp:
        meta["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return meta


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def csv_text(meta: dict, columns: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(_jsonable(meta), sort_keys=True) + "\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def json_text(meta: dict, data) -> str:
    # metadata comes first and on its own line so the data block is byte-stable
    return (
        "{\"metadata\": " + json.dumps(_jsonable(meta), sort_keys=True) + ",\n"
        + " \"data\": " + json.dumps(_jsonable(data), sort_keys=True, indent=1) + "}\n"
    )


def emit(text: str, path: str | None):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def parse_range(text: str) -> list[float]:
    """'a', 'a,b,c' or 'start:stop:step' (stop included when within half a step)."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError(f"range step must be positive, got {step}")
        count = int(math.floor((stop - start) / step + 0.5)) + 1
        if count < 1:
            raise ValueError(f"empty range {text!r}")
        return [round(start + i * step, 12) for i in range(count)]
    return [float(p) for p in text.split(",") if p.strip()]


def read_config(path: str) -> dict:
    """Flat key=value file; '#' starts a comment, dashes in keys map to underscores."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out
