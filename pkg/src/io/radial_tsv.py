"""RadialFunction files: `# spacing=<h> box=<R>`, then an (r, value) table."""
from pathlib import Path

import numpy as np
import pandas as pd

from src.core.debug_logger import print_debug3
from src.core.exceptions import GridError, GridMismatchError
from src.core.models import RadialFunction, RadialGrid


def write_radial_function(phi, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(f"# spacing={phi.grid.spacing!r} box={phi.grid.box_radius!r}\n")
        phi.to_frame().to_csv(fh, sep="\t", index=False, float_format="%.17g")
    print_debug3(f"wrote {phi.grid.node_count} radial samples to {path}")
    return path


def _header(line, path):
    if not line.startswith("#"):
        raise GridError(f"{path}: missing '# spacing=<h> box=<R>' header")
    fields = dict(item.split("=", 1) for item in line[1:].split() if "=" in item)
    try:
        return float(fields["spacing"]), float(fields["box"])
    except (KeyError, ValueError) as e:
        raise GridError(f"{path}: bad header {line.strip()!r}") from e


def read_radial_function(path, normalized_tol=1e-10):
    """Rebuild the grid from the header and check the r column against it."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        spacing, box = _header(fh.readline(), path)
    frame = pd.read_csv(path, sep="\t", comment="#", float_precision="round_trip")
    grid = RadialGrid.from_box(spacing, box)
    if len(frame) != grid.node_count or not np.allclose(frame["r"].to_numpy(), grid.nodes, rtol=0, atol=1e-12):
        raise GridMismatchError(f"{path}: r column does not match spacing={spacing} box={box}")
    phi = RadialFunction(grid, frame["value"].to_numpy())
    phi.normalized = abs(phi.norm_sq() - 1.0) <= normalized_tol
    return phi
