"""Deterministic CSV/JSON writers, key=value config files and run manifests."""

import hashlib
import io as _io
import json
import math
from pathlib import Path

import numpy as np

from .errors import DomainError


def format_float(x):
    """17 significant digits; ``nan``/``inf`` spelled out."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    return str(v)


def csv_text(header, rows):
    """Comma-separated text with a header row and LF line endings."""
    buf = _io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_cell(v) for v in row) + "\n")
    return buf.getvalue()


def columns_to_rows(*cols):
    return list(zip(*[np.asarray(c).tolist() for c in cols]))


def to_jsonable(obj):
    """Convert numpy scalars/arrays and non-finite floats for JSON output."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else format_float(x)
    return obj


def json_text(obj):
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def envelope(inputs, outputs, diagnostics=None, conjectural=False):
    """Result envelope ``{inputs, outputs, diagnostics, labels}``."""
    return {
        "inputs": inputs,
        "outputs": outputs,
        "diagnostics": diagnostics or {},
        "labels": {"conjectural": bool(conjectural)},
    }


def read_config(path):
    """Parse a ``key = value`` file; ``#`` starts a comment.

    Values are returned as stripped strings; dashes in keys become
    underscores.
    """
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{n}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        if not key:
            raise DomainError(f"{path}:{n}: empty key")
        out[key.replace("-", "_")] = val
    return out


def sha256_text(text):
    return hashlib.sha256(text.encode()).hexdigest()


def write_outputs(out_dir, files, manifest_info):
    """Write ``{name: text}`` into ``out_dir`` plus ``manifest.json``.

    The manifest lists every file with its SHA-256 and echoes
    ``manifest_info`` (inputs, versions, grid settings).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    listing = []
    for name in sorted(files):
        text = files[name]
        (out / name).write_text(text, newline="\n")
        listing.append({"file": name, "sha256": sha256_text(text), "bytes": len(text.encode())})
    manifest = dict(manifest_info)
    manifest["files"] = listing
    (out / "manifest.json").write_text(json_text(manifest), newline="\n")
    return out / "manifest.json"
