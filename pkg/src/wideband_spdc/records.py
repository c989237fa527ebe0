"""CSV/JSON writers with a parameter-echo header.

CSV files carry ``#``-prefixed header lines. The ``# config:`` line holds the
fully resolved run configuration as JSON, so a file can be fed back through
``--config`` to regenerate it.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError

CONFIG_PREFIX = "# config: "


def _number(x) -> str:
    x = float(x)
    return repr(x) if np.isfinite(x) else ("nan" if np.isnan(x) else ("inf" if x > 0 else "-inf"))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_csv(path, config: dict, columns: dict, extra: dict | None = None):
    """Write ``columns`` (name -> 1-D array) under an echo of ``config`` and ``extra``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = [np.asarray(v) for v in columns.values()]
    with path.open("w", newline="") as fh:
        fh.write(f"# wideband_spdc {__version__}\n")
        fh.write(CONFIG_PREFIX + json.dumps(_jsonable(config), sort_keys=True) + "\n")
        for key, value in (extra or {}).items():
            fh.write(f"# {key}: {json.dumps(_jsonable(value), sort_keys=True)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(columns))
        for row in zip(*arrays):
            writer.writerow([v if isinstance(v, str) else _number(v) for v in row])
    return path


def write_json(path, payload: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(payload))
    return path


def read_csv(path):
    """(header dict, column dict) from a file written by ``write_csv``."""
    header = {}
    rows = []
    with Path(path).open() as fh:
        lines = [line for line in fh]
    body = []
    for line in lines:
        if line.startswith("# ") and ": " in line:
            key, _, value = line[2:].partition(": ")
            try:
                header[key] = json.loads(value)
            except json.JSONDecodeError:
                header[key] = value.strip()
        elif not line.startswith("#"):
            body.append(line)
    reader = csv.reader(body)
    names = next(reader)
    for row in reader:
        rows.append(row)
    columns = {}
    for j, name in enumerate(names):
        values = [r[j] for r in rows]
        try:
            columns[name] = np.array([float(v) for v in values])
        except ValueError:
            columns[name] = values
    return header, columns


def load_config_file(path) -> dict:
    """Run configuration from a JSON file or from the echo header of a CSV output."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"config file {path}: {exc}")
    for line in text.splitlines():
        if line.startswith(CONFIG_PREFIX):
            text = line[len(CONFIG_PREFIX):]
            break
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path}: invalid JSON ({exc})")
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path}: top level must be an object")
    return data
