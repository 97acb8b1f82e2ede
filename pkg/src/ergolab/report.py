"""Output writers: delimited tables, deterministic SVG figures, run manifests.

Every file is written atomically (temp file in the target directory, then
rename).  Floats are serialized with 17 significant digits so a value
round-trips exactly; figures carry no timestamps and use a fixed hash salt,
making reruns byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

ARTIFACT_VERSION = "0.1.0"
_SVG_HASHSALT = "ergolab"


def format_value(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    return str(value)


def atomic_write_bytes(path: str, data: bytes):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    atomic_write_bytes(path, buffer.getvalue().encode("utf-8"))


def sha256_of(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(stem: str, config: dict, output_paths, wall_time_s: float) -> str:
    manifest = {
        "artifact_version": ARTIFACT_VERSION,
        "config": config,
        "wall_time_seconds": wall_time_s,
        "outputs": {
            os.path.basename(p): {"sha256": sha256_of(p), "bytes": os.path.getsize(p)}
            for p in output_paths
        },
    }
    path = stem + ".manifest.json"
    atomic_write_bytes(path, (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode("utf-8"))
    return path


def _break_wraps(x: np.ndarray, y: np.ndarray):
    """Insert NaN where a wrapped angle jumps, so no segment crosses the plot."""
    jumps = np.flatnonzero(np.abs(np.diff(x)) > np.pi)
    if jumps.size == 0:
        return x, y
    x = np.insert(x.astype(float), jumps + 1, np.nan)
    y = np.insert(y.astype(float), jumps + 1, np.nan)
    return x, y


def render_portrait_svg(path: str, orbits, labels, *, title: str, wrap: bool = False,
                        equal_aspect: bool = False):
    """Render phase-plane polylines to a deterministic SVG file.

    ``orbits`` yields OrbitTrace objects; ``labels`` one legend label each.
    With ``wrap`` the wrapped angle is plotted and wrap jumps are broken.
    """
    with plt.rc_context({"svg.hashsalt": _SVG_HASHSALT, "figure.figsize": (6.4, 4.8)}):
        fig, ax = plt.subplots()
        for trace, label in zip(orbits, labels):
            x = trace.q_wrapped if wrap else trace.q
            x, y = _break_wraps(x, trace.p) if wrap else (x, trace.p)
            ax.plot(x, y, lw=1.0, label=label)
        ax.set_xlabel("theta" if wrap else "q")
        ax.set_ylabel("p")
        ax.set_title(title)
        if equal_aspect:
            ax.set_aspect("equal")
        if labels:
            ax.legend(loc="upper right", fontsize=8)
        buffer = io.BytesIO()
        fig.savefig(buffer, format="svg", metadata={"Date": None})
        plt.close(fig)
    atomic_write_bytes(path, buffer.getvalue())
