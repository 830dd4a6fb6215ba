"""Design-of-experiments sampling and labeled-dataset generation.

Designs are drawn with a centered Latin Hypercube (one sample per stratum
per dimension, no intra-stratum jitter), scaled to the design-space bounds,
and pushed through the structural simulator.  The result is a flat CSV with
a provenance header so a dataset is reproducible from its own first lines.
"""

from __future__ import annotations

import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import ProjectConfig
from .geometry import DesignFeatures, DesignSpace, FEATURE_NAMES, PIER_COUNT_INDEX, N_P_MIN, N_P_MAX
from .simulator import LoadModel, METRIC_NAMES, FLAG_METRICS, SimulatorFailure, evaluate
from .geometry import SiteConfig

STATUS_OK = "ok"
STATUS_FAILURE = "sim_failure"

CSV_COLUMNS = ("id",) + FEATURE_NAMES + METRIC_NAMES + ("status",)


def central_lhs(n: int, d: int, seed: int) -> np.ndarray:
    """Centered Latin Hypercube: n points in [0, 1)^d.

    Each dimension takes exactly the stratum midpoints (k + 0.5)/n for
    k = 0..n-1, independently permuted per dimension.  Centering (rather
    than jittering within strata) makes the stratification exactly
    checkable by sorting columns.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    rng = np.random.default_rng(seed)
    midpoints = (np.arange(n) + 0.5) / n
    cube = np.empty((n, d), dtype=np.float64)
    for j in range(d):
        cube[:, j] = midpoints[rng.permutation(n)]
    return cube


def scale_to_bounds(u: np.ndarray, space: DesignSpace) -> DesignFeatures:
    """Map one unit-cube row onto the bounded design space.

    Continuous features scale affinely; the pier count bins its unit
    coordinate uniformly onto the integers 2..8 (the Latin property is a
    statement about the unit cube, not the 7 integer values).
    """
    u = np.asarray(u, dtype=np.float64)
    lo = np.asarray(space.lower)
    hi = np.asarray(space.upper)
    x = lo + u * (hi - lo)
    span = N_P_MAX - N_P_MIN + 1
    n_p = int(np.clip(np.floor(N_P_MIN + u[PIER_COUNT_INDEX] * span), N_P_MIN, N_P_MAX))
    x[PIER_COUNT_INDEX] = n_p
    return DesignFeatures.from_array(x)


def sample_designs(n: int, seed: int, space: DesignSpace) -> np.ndarray:
    """n design rows (as a float array, n_p already integer-valued)."""
    cube = central_lhs(n, len(FEATURE_NAMES), seed)
    return np.vstack([scale_to_bounds(row, space).as_array() for row in cube])


@dataclass(frozen=True)
class Dataset:
    """A labeled design/performance table plus the provenance that made it."""

    ids: np.ndarray            # (n,) int
    X: np.ndarray              # (n, 6) designs
    Y: np.ndarray              # (n, 6) metrics, NaN on failed rows
    status: tuple[str, ...]    # per-row "ok" | "sim_failure"
    seed: int
    config_hash: str
    bounds_lower: tuple[float, ...]
    bounds_upper: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def ok_mask(self) -> np.ndarray:
        return np.array([s == STATUS_OK for s in self.status])


def _format_value(value: float, column: str) -> str:
    # repr() of a Python float is the shortest string that round-trips the
    # exact binary value; integers and flags stay integers in the file.
    if column == "id" or column == "n_p" or column in ("clearance_ok", "trees_ok"):
        v = float(value)
        return str(int(v)) if np.isfinite(v) else "nan"
    return repr(float(value))


def _evaluate_row(args: tuple[int, np.ndarray, SiteConfig, LoadModel]) -> tuple[int, np.ndarray, str]:
    idx, x_arr, site, loads = args
    x = DesignFeatures.from_array(x_arr)
    try:
        y = evaluate(x, site, loads).as_array()
        return idx, y, STATUS_OK
    except SimulatorFailure:
        return idx, np.full(len(METRIC_NAMES), np.nan), STATUS_FAILURE


def generate_dataset(
    n: int,
    seed: int,
    site: SiteConfig,
    loads: LoadModel,
    out_path: str | Path,
    space: DesignSpace | None = None,
    workers: int = 1,
) -> Dataset:
    """Sample n designs, simulate each, and write the labeled CSV.

    Rows are emitted in sample-id order regardless of worker scheduling, so
    the file bytes depend only on (n, seed, config).  The file is written to
    a sibling temp path and moved into place; a failed write leaves nothing
    behind.
    """
    space = space or DesignSpace()
    X = sample_designs(n, seed, space)
    Y = np.empty((n, len(METRIC_NAMES)), dtype=np.float64)
    status: list[str] = [STATUS_OK] * n

    jobs = [(idx, X[idx], site, loads) for idx in range(n)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_evaluate_row, jobs, chunksize=max(1, n // (workers * 8)))
            for idx, y, st in results:
                Y[idx] = y
                status[idx] = st
    else:
        for job in jobs:
            idx, y, st = _evaluate_row(job)
            Y[idx] = y
            status[idx] = st

    config_hash = ProjectConfig(site=site, loads=loads, design_space=space).content_hash()
    dataset = Dataset(
        ids=np.arange(n),
        X=X,
        Y=Y,
        status=tuple(status),
        seed=seed,
        config_hash=config_hash,
        bounds_lower=space.lower,
        bounds_upper=space.upper,
    )
    _write_csv(dataset, Path(out_path))
    return dataset


def _write_csv(dataset: Dataset, out_path: Path) -> None:
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=out_path.parent, prefix=out_path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# seed: {dataset.seed}\n")
            fh.write(f"# config_hash: {dataset.config_hash}\n")
            fh.write("# bounds_lower: " + ",".join(repr(float(v)) for v in dataset.bounds_lower) + "\n")
            fh.write("# bounds_upper: " + ",".join(repr(float(v)) for v in dataset.bounds_upper) + "\n")
            fh.write(f"# n_samples: {len(dataset)}\n")
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for k in range(len(dataset)):
                row = [str(int(dataset.ids[k]))]
                row += [_format_value(v, c) for v, c in zip(dataset.X[k], FEATURE_NAMES)]
                row += [_format_value(v, c) for v, c in zip(dataset.Y[k], METRIC_NAMES)]
                row.append(dataset.status[k])
                fh.write(",".join(row) + "\n")
        os.replace(tmp_name, out_path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def load_dataset(path: str | Path) -> Dataset:
    """Read a dataset CSV back, provenance header included."""
    path = Path(path)
    meta: dict[str, str] = {}
    rows: list[list[str]] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                meta[key.strip()] = value.strip()
                continue
            rows.append(line.split(","))
    header, data = rows[0], rows[1:]
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"unexpected dataset columns: {header}")
    n = len(data)
    ids = np.array([int(r[0]) for r in data])
    X = np.array([[float(v) for v in r[1:7]] for r in data])
    Y = np.array([[float(v) for v in r[7:13]] for r in data]) if n else np.empty((0, 6))
    status = tuple(r[13] for r in data)
    return Dataset(
        ids=ids,
        X=X,
        Y=Y,
        status=status,
        seed=int(meta["seed"]),
        config_hash=meta["config_hash"],
        bounds_lower=tuple(float(v) for v in meta["bounds_lower"].split(",")),
        bounds_upper=tuple(float(v) for v in meta["bounds_upper"].split(",")),
    )
