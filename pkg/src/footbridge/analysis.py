"""Explainability and exploration analytics over a trained surrogate.

Everything here reads an immutable checkpoint: design sensitivities via
reverse-mode Jacobians, sensitivity swarms over generated batches, latent
maps for the 2-D latent space, accuracy reports on the test split, and
Pareto extraction over (cost, utilization) style objective pairs.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import gradcore as gc
from .cvae import (
    CvaeCheckpoint,
    GenerationResult,
    Standardizer,
    _ok_rows,
    generate,
    split_indices,
)
from .geometry import (
    CONTINUOUS_FEATURES,
    DesignFeatures,
    FEATURE_NAMES,
    N_P_CLASSES,
    N_P_MIN,
    N_P_MAX,
    PIER_COUNT_INDEX,
)
from .sampling import Dataset
from .simulator import CONTINUOUS_METRICS, FLAG_METRICS, METRIC_NAMES

# user-facing sensitivity columns: the five continuous features plus the
# aggregated discrete pier-count column
VARIABLE_LABELS = tuple(FEATURE_NAMES[j] for j in CONTINUOUS_FEATURES) + ("n_p",)


@dataclass(frozen=True)
class SensitivityReport:
    """Jacobian of the encoder's performance outputs at one design."""

    x: tuple[float, ...]
    jacobian_std: np.ndarray        # (6, 12) d(encoded y) / d(encoded x)
    per_variable_std: np.ndarray    # (6, 6) continuous columns + discrete n_p column
    per_variable_physical: np.ndarray  # (6, 6) same, in physical units per target
    targets: tuple[str, ...] = METRIC_NAMES
    variables: tuple[str, ...] = VARIABLE_LABELS

    def to_dict(self) -> dict:
        return {
            "x": list(self.x),
            "targets": list(self.targets),
            "variables": list(self.variables),
            "jacobian_std": self.jacobian_std.tolist(),
            "per_variable_std": self.per_variable_std.tolist(),
            "per_variable_physical": self.per_variable_physical.tolist(),
        }

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["target", "units"] + list(self.variables))
            for i, target in enumerate(self.targets):
                writer.writerow([target, "standardized"] + [repr(v) for v in self.per_variable_std[i]])
                writer.writerow([target, "physical"] + [repr(v) for v in self.per_variable_physical[i]])


def _encoder_jacobian(ckpt: CvaeCheckpoint, x_encoded: np.ndarray) -> np.ndarray:
    """d(encoder outputs)/d(encoded inputs) at one row: one backward per output."""
    model = ckpt.model()
    width = x_encoded.shape[0]
    n_out = len(METRIC_NAMES)
    jac = np.empty((n_out, width))
    for i in range(n_out):
        x_t = gc.Tensor(x_encoded[None, :])
        y_hat, _, _ = model.encoder(x_t)
        seed = np.zeros((1, n_out))
        seed[0, i] = 1.0
        y_hat.backward(seed)
        jac[i] = x_t.grad[0]
    return jac


def _aggregate_variables(jacobian_std: np.ndarray, n_p: int) -> np.ndarray:
    """Collapse the 7 one-hot columns to one discrete column.

    The discrete sensitivity is the change in output from stepping the pier
    count up one class at the design's own class (down at the top class),
    read off the adjacent one-hot columns.
    """
    n_cont = len(CONTINUOUS_FEATURES)
    cls = n_p - N_P_MIN
    if n_p < N_P_MAX:
        discrete = jacobian_std[:, n_cont + cls + 1] - jacobian_std[:, n_cont + cls]
    else:
        discrete = jacobian_std[:, n_cont + cls] - jacobian_std[:, n_cont + cls - 1]
    return np.column_stack([jacobian_std[:, :n_cont], discrete])


def _physical_units(per_variable_std: np.ndarray, standardizer: Standardizer) -> np.ndarray:
    """Chain-rule the standardized sensitivities into physical units.

    Rows for the continuous targets scale by sigma_y; continuous-feature
    columns divide by sigma_x; the discrete column is per class step; flag
    rows stay in logit units.
    """
    sigma_y = np.ones(len(METRIC_NAMES))
    sigma_y[list(CONTINUOUS_METRICS)] = standardizer.y_std
    sigma_x = np.append(np.asarray(standardizer.x_std), 1.0)
    return per_variable_std * sigma_y[:, None] / sigma_x[None, :]


def sensitivity(x: DesignFeatures, ckpt: CvaeCheckpoint) -> SensitivityReport:
    """Exact reverse-mode sensitivities of every performance output at x."""
    x_enc = ckpt.standardizer.encode_x(x.as_array()[None, :])[0]
    jac = _encoder_jacobian(ckpt, x_enc)
    per_var = _aggregate_variables(jac, x.n_p)
    return SensitivityReport(
        x=tuple(x.as_array()),
        jacobian_std=jac,
        per_variable_std=per_var,
        per_variable_physical=_physical_units(per_var, ckpt.standardizer),
    )


@dataclass(frozen=True)
class SwarmReport:
    """Per-variable cost sensitivities across a generated batch."""

    y_request: tuple[float, ...]
    seed: int
    variables: tuple[str, ...]
    values_std: np.ndarray       # (n, 6) d cost_std / d variable
    values_physical: np.ndarray  # (n, 6)
    cost: np.ndarray             # (n,) predicted cost for coloring
    designs: np.ndarray          # (n, 6)
    extrapolated: bool

    def sign_fraction(self, variable: str) -> float:
        """Fraction of the batch with a positive sensitivity for a variable."""
        j = self.variables.index(variable)
        return float(np.mean(self.values_std[:, j] > 0.0))

    def to_dict(self) -> dict:
        return {
            "y_request": list(self.y_request),
            "seed": self.seed,
            "variables": list(self.variables),
            "values_std": self.values_std.tolist(),
            "values_physical": self.values_physical.tolist(),
            "cost": self.cost.tolist(),
            "designs": self.designs.tolist(),
            "extrapolated": self.extrapolated,
        }

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["design"] + [f"d_cost_d_{v}" for v in self.variables] + ["cost"])
            for k in range(len(self.cost)):
                writer.writerow([k] + [repr(v) for v in self.values_physical[k]] + [repr(float(self.cost[k]))])


COST_INDEX = METRIC_NAMES.index("cost")


def sensitivity_swarm(y_request: Sequence[float], n: int, seed: int, ckpt: CvaeCheckpoint) -> SwarmReport:
    """Generate a batch for the request and collect its cost sensitivities."""
    result = generate(y_request, n, seed, ckpt)
    values_std = np.empty((n, len(VARIABLE_LABELS)))
    values_phys = np.empty_like(values_std)
    cost = np.empty(n)
    for k, row in enumerate(result.designs):
        report = sensitivity(DesignFeatures.from_array(row), ckpt)
        values_std[k] = report.per_variable_std[COST_INDEX]
        values_phys[k] = report.per_variable_physical[COST_INDEX]
        cost[k] = _predicted_cost(row, ckpt)
    return SwarmReport(
        y_request=tuple(float(v) for v in y_request),
        seed=seed,
        variables=VARIABLE_LABELS,
        values_std=values_std,
        values_physical=values_phys,
        cost=cost,
        designs=result.designs,
        extrapolated=result.extrapolated,
    )


def _predicted_cost(design_row: np.ndarray, ckpt: CvaeCheckpoint) -> float:
    model = ckpt.model()
    x_enc = ckpt.standardizer.encode_x(design_row[None, :])
    y_hat, _, _ = model.encoder(gc.Tensor(x_enc))
    physical = ckpt.standardizer.decode_y(y_hat.data)[0]
    return float(physical[COST_INDEX])


@dataclass(frozen=True)
class LatentMap:
    """Encoder latent means for the test split, paired with true metrics."""

    z: np.ndarray                  # (n, d_z)
    y: np.ndarray                  # (n, 6) true metrics
    corr_cost: tuple[float, ...]   # |corr(z_k, cost)| per latent dimension
    mean_abs_corr_continuous: float

    def to_dict(self) -> dict:
        return {
            "z": self.z.tolist(),
            "y": self.y.tolist(),
            "corr_cost": list(self.corr_cost),
            "mean_abs_corr_continuous": self.mean_abs_corr_continuous,
        }

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            d_z = self.z.shape[1]
            writer.writerow([f"z{k}" for k in range(d_z)] + list(METRIC_NAMES))
            for zk, yk in zip(self.z, self.y):
                writer.writerow([repr(float(v)) for v in zk] + [repr(float(v)) for v in yk])


def latent_map(dataset: Dataset, ckpt: CvaeCheckpoint) -> LatentMap:
    """Project the test split into the latent space via the encoder mean."""
    X, Y = _ok_rows(dataset)
    _, _, test_idx = split_indices(len(X), ckpt.config.split, ckpt.config.seed)
    x_enc = ckpt.standardizer.encode_x(X[test_idx])
    model = ckpt.model()
    _, mu, _ = model.encoder(gc.Tensor(x_enc))
    z = mu.data
    y_true = Y[test_idx]
    y_std = ckpt.standardizer.encode_y(y_true)
    corr = np.corrcoef(np.hstack([y_std[:, list(CONTINUOUS_METRICS)], z]).T)
    cross = corr[: len(CONTINUOUS_METRICS), len(CONTINUOUS_METRICS) :]
    return LatentMap(
        z=z,
        y=y_true,
        corr_cost=tuple(np.abs(cross[CONTINUOUS_METRICS.index(COST_INDEX)])),
        mean_abs_corr_continuous=float(np.abs(cross).mean()),
    )


@dataclass(frozen=True)
class SurrogateReport:
    """Test-split accuracy: R2/RMSE per continuous target, accuracy per flag."""

    r2: dict[str, float]
    rmse: dict[str, float]
    flag_accuracy: dict[str, float]
    true_values: np.ndarray        # (n, 4) continuous targets
    predicted_values: np.ndarray   # (n, 4)
    n_test: int

    def to_dict(self) -> dict:
        return {
            "r2": self.r2,
            "rmse": self.rmse,
            "flag_accuracy": self.flag_accuracy,
            "n_test": self.n_test,
        }

    def to_csv(self, path: str | Path) -> None:
        names = [METRIC_NAMES[j] for j in CONTINUOUS_METRICS]
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"true_{n}" for n in names] + [f"pred_{n}" for n in names])
            for t, p in zip(self.true_values, self.predicted_values):
                writer.writerow([repr(float(v)) for v in t] + [repr(float(v)) for v in p])


def surrogate_report(dataset: Dataset, ckpt: CvaeCheckpoint) -> SurrogateReport:
    """True-vs-predicted accuracy of the encoder head on the held-out split."""
    X, Y = _ok_rows(dataset)
    _, _, test_idx = split_indices(len(X), ckpt.config.split, ckpt.config.seed)
    x_enc = ckpt.standardizer.encode_x(X[test_idx])
    model = ckpt.model()
    y_hat, _, _ = model.encoder(gc.Tensor(x_enc))
    pred_physical = ckpt.standardizer.decode_y(y_hat.data)
    true = Y[test_idx]

    r2: dict[str, float] = {}
    rmse: dict[str, float] = {}
    for j in CONTINUOUS_METRICS:
        name = METRIC_NAMES[j]
        err = pred_physical[:, j] - true[:, j]
        sst = np.sum((true[:, j] - true[:, j].mean()) ** 2)
        r2[name] = float(1.0 - np.sum(err**2) / sst)
        rmse[name] = float(np.sqrt(np.mean(err**2)))
    flag_accuracy = {
        METRIC_NAMES[j]: float(np.mean((y_hat.data[:, j] > 0.0) == (true[:, j] > 0.5)))
        for j in FLAG_METRICS
    }
    cont = list(CONTINUOUS_METRICS)
    return SurrogateReport(
        r2=r2,
        rmse=rmse,
        flag_accuracy=flag_accuracy,
        true_values=true[:, cont],
        predicted_values=pred_physical[:, cont],
        n_test=len(test_idx),
    )


@dataclass(frozen=True)
class ParetoResult:
    """Indices of the non-dominated points under the given directions."""

    indices: tuple[int, ...]
    directions: tuple[str, str]

    def to_dict(self) -> dict:
        return {"indices": list(self.indices), "directions": list(self.directions)}


def pareto_front(points: Sequence[Sequence[float]], directions: tuple[str, str] = ("min", "min")) -> ParetoResult:
    """Non-dominated subset of 2-D points by sort-and-scan; ties kept.

    A point dominates another if it is at least as good in both objectives
    and strictly better in one.  Equal points do not dominate each other.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) == 0:
        raise ValueError("points must be a non-empty n x 2 table")
    signs = np.array([1.0 if d == "min" else -1.0 for d in directions])
    work = pts * signs

    order = np.lexsort((work[:, 1], work[:, 0]))
    keep: list[int] = []
    best_f2 = np.inf
    group_start = 0
    while group_start < len(order):
        group_end = group_start
        f1 = work[order[group_start], 0]
        while group_end < len(order) and work[order[group_end], 0] == f1:
            group_end += 1
        group = order[group_start:group_end]
        group_min = work[group, 1].min()
        if group_min < best_f2:
            keep.extend(int(i) for i in group if work[i, 1] == group_min)
            best_f2 = group_min
        group_start = group_end
    return ParetoResult(indices=tuple(sorted(keep)), directions=directions)


def write_json(payload: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
