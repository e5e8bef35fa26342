"""Atomic file output and the CSV/JSON layouts used by the command line."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path


def atomic_write_text(path, text: str) -> Path:
    """Write ``text`` to ``path`` via a temporary file in the same directory and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
    return path


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_json(path, obj) -> Path:
    return atomic_write_text(path, dumps_json(obj))


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> Path:
    return atomic_write_text(path, csv_text(header, rows))


def curve_rows(curve):
    return zip(curve.r_grid.tolist(), curve.undecoded_fraction.tolist())


def curve_sidecar(curve) -> dict:
    return {"area": curve.area, "dist": curve.dist.to_dict(), "monotone": curve.monotone}


def write_decoding_curve(csv_path, curve, extra: dict | None = None):
    """``r,undecoded`` CSV plus a JSON sidecar next to it (same stem, .json)."""
    csv_path = Path(csv_path)
    write_csv(csv_path, ["r", "undecoded"], curve_rows(curve))
    side = curve_sidecar(curve)
    if extra:
        side.update(extra)
    write_json(csv_path.with_suffix(".json"), side)
    return csv_path


def trajectory_rows(stats):
    """``trial,r,undecoded`` rows; needs stats computed with keep_trajectories=True."""
    if stats.trajectories is None:
        raise ValueError("trajectories were not kept")
    r = stats.r_grid.tolist()
    for trial, row in enumerate(stats.trajectories.tolist()):
        for x, y in zip(r, row):
            yield trial, x, y
