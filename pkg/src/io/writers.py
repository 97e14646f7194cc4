"""Result files: TSV tables with a comment header, JSON documents, one SVG curve."""
import json
import math
from pathlib import Path

import numpy as np
import pandas as pd

from src.core.constants import TSV_SCHEMA_VERSION
from src.core.debug_logger import print_debug3


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else str(v)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, pd.DataFrame):
        return _jsonable(value.to_dict(orient="records"))
    return value


def write_tsv(frame, path, meta=None):
    """Header line `# schema=N key=value ...`, then the column names and rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    items = {"schema": TSV_SCHEMA_VERSION, **(meta or {})}
    header = "# " + " ".join(f"{k}={v}" for k, v in items.items())
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(header + "\n")
        frame.to_csv(fh, sep="\t", index=False, float_format="%.15g")
    print_debug3(f"wrote {len(frame)} rows to {path}")
    return path


def write_json(document, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(document), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print_debug3(f"wrote {path}")
    return path


def write_manifest(manifest, out_dir):
    return write_json(manifest.model_dump(), Path(out_dir) / "manifest.json")


def write_curve_svg(x, y, path, xlabel="U", ylabel="binding"):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(x, y, "o-", lw=1.2, ms=3)
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    # metadata=None keeps the file free of timestamps
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    print_debug3(f"wrote {path}")
    return path
