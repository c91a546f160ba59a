"""CSV / JSON readers and writers.  Every writer is atomic (temp file + rename)."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .hurst import TimeGrid
from .paths import ObservedPath


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def atomic_write_text(dest, text: str) -> Path:
    dest = Path(dest)
    dest.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=dest.parent, prefix=f".{dest.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, dest)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return dest


def write_csv(dest, header: Sequence[str], rows: Iterable[Sequence],
              provenance: Optional[dict] = None) -> Path:
    """CSV with optional leading ``# key=value`` provenance lines."""
    buf = io.StringIO()
    for k, v in (provenance or {}).items():
        buf.write(f"# {k}={_fmt(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return atomic_write_text(dest, buf.getvalue())


def read_csv(src) -> tuple[list, list, dict]:
    """Return ``(header, rows, provenance)``; rows are lists of strings."""
    provenance = {}
    lines = []
    with open(src, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                provenance[key.strip()] = val
            else:
                lines.append(line)
    reader = csv.reader(lines)
    header = next(reader)
    return header, [r for r in reader if r], provenance


def write_json(dest, payload: dict) -> Path:
    return atomic_write_text(dest, json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def meta_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".meta.json")


def write_path(path: ObservedPath, dest, provenance: Optional[dict] = None) -> tuple[Path, Path]:
    """Write ``index,t,x`` rows and the metadata sidecar."""
    rows = zip(range(path.grid.n + 1), path.times, path.values)
    csv_file = write_csv(dest, ("index", "t", "x"), rows, provenance)
    beta, h = path.true_params if path.true_params else (None, None)
    meta = {
        "seed": path.seed,
        "T": path.grid.t_max,
        "n": path.grid.n,
        "beta": beta,
        "h": h,
        "model": path.model_name,
    }
    meta.update(provenance or {})
    return csv_file, write_json(meta_path(dest), meta)


def read_path(src) -> ObservedPath:
    src = Path(src)
    if not src.exists():
        raise FileNotFoundError(f"path file not found: {src}")
    header, rows, _ = read_csv(src)
    if header != ["index", "t", "x"]:
        raise ValueError(f"{src}: expected header index,t,x, got {','.join(header)}")
    data = np.array([[float(v) for v in r] for r in rows])
    idx = data[:, 0].astype(int)
    if not np.array_equal(idx, np.arange(idx.size)):
        raise ValueError(f"{src}: index column must run 0..n")
    meta = {}
    mp = meta_path(src)
    if mp.exists():
        meta = json.loads(mp.read_text())
    n = idx.size - 1
    t_max = float(meta.get("T") or data[-1, 1])
    grid = TimeGrid(t_max, n)
    if not np.allclose(grid.points, data[:, 1], rtol=1e-12, atol=1e-12):
        raise ValueError(f"{src}: times are not the uniform grid T*i/n")
    true = None
    if meta.get("beta") is not None and meta.get("h") is not None:
        true = (float(meta["beta"]), float(meta["h"]))
    return ObservedPath(grid, data[:, 2], seed=meta.get("seed"), true_params=true,
                        model_name=meta.get("model"))


def write_decomposition(decomp, grid: TimeGrid, dest, provenance: Optional[dict] = None) -> Path:
    rows = zip(range(grid.n), grid.points[:-1], decomp.delta_z, decomp.delta_g,
               decomp.delta_m, decomp.v_sq)
    return write_csv(dest, ("i", "t", "delta_z", "delta_g", "delta_m", "v_sq"), rows, provenance)
