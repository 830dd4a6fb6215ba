"""Conditional VAE over bridge designs and their performance metrics.

The encoder maps an encoded design to a performance prediction and a latent
distribution in two separate heads; the decoder reconstructs designs from
ground-truth performance plus a latent draw.  The four-term loss balances
design reconstruction, performance prediction, latent normality, and a
covariance penalty that decorrelates the latent space from the targets, so
z captures only what the performance vector does not already pin down.

Forward use (predict) is a plain surrogate; inverse use (generate) samples
designs conditioned on requested performance, scoring each sample by how
well the encoder thinks it meets the request.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import gradcore as gc
from .geometry import (
    CONTINUOUS_FEATURES,
    DesignFeatures,
    DesignSpace,
    FEATURE_NAMES,
    N_P_CLASSES,
    N_P_MIN,
    PIER_COUNT_INDEX,
)
from .sampling import Dataset
from .simulator import CONTINUOUS_METRICS, FLAG_METRICS, METRIC_NAMES, PerformanceMetrics

X_ENCODED_WIDTH = len(CONTINUOUS_FEATURES) + N_P_CLASSES   # 5 + 7
Y_WIDTH = len(METRIC_NAMES)                                # 4 + 2

CHECKPOINT_MAGIC = b"FBCVAE01"


class TrainingError(RuntimeError):
    """Raised when the loss goes non-finite or the dataset is unusable."""


@dataclass(frozen=True)
class Standardizer:
    """Column statistics mapping physical rows to network inputs and back.

    Continuous design features and continuous targets become zero-mean,
    unit-variance columns; the pier count becomes a 7-way one-hot block;
    the binary compliance flags pass through as 0/1.
    """

    x_mean: tuple[float, ...]
    x_std: tuple[float, ...]
    y_mean: tuple[float, ...]
    y_std: tuple[float, ...]

    @classmethod
    def fit(cls, X: np.ndarray, Y: np.ndarray) -> "Standardizer":
        xc = X[:, list(CONTINUOUS_FEATURES)]
        yc = Y[:, list(CONTINUOUS_METRICS)]
        x_std = xc.std(axis=0)
        y_std = yc.std(axis=0)
        if np.any(x_std <= 0.0) or np.any(y_std <= 0.0):
            raise TrainingError("degenerate feature: zero variance in the training split")
        return cls(
            x_mean=tuple(xc.mean(axis=0)),
            x_std=tuple(x_std),
            y_mean=tuple(yc.mean(axis=0)),
            y_std=tuple(y_std),
        )

    def encode_x(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        cont = (X[:, list(CONTINUOUS_FEATURES)] - self.x_mean) / self.x_std
        classes = np.rint(X[:, PIER_COUNT_INDEX]).astype(int) - N_P_MIN
        onehot = np.eye(N_P_CLASSES)[classes]
        return np.hstack([cont, onehot])

    def decode_x(self, cont_std: np.ndarray, np_logits: np.ndarray) -> np.ndarray:
        cont = cont_std * self.x_std + self.x_mean
        n_p = np_logits.argmax(axis=1) + N_P_MIN
        X = np.empty((cont.shape[0], len(FEATURE_NAMES)))
        X[:, list(CONTINUOUS_FEATURES)] = cont
        X[:, PIER_COUNT_INDEX] = n_p
        return X

    def encode_y(self, Y: np.ndarray) -> np.ndarray:
        Y = np.atleast_2d(Y)
        out = Y.astype(np.float64).copy()
        out[:, list(CONTINUOUS_METRICS)] = (Y[:, list(CONTINUOUS_METRICS)] - self.y_mean) / self.y_std
        return out

    def decode_y(self, Y_std: np.ndarray) -> np.ndarray:
        out = np.atleast_2d(Y_std).astype(np.float64).copy()
        out[:, list(CONTINUOUS_METRICS)] = Y_std[:, list(CONTINUOUS_METRICS)] * self.y_std + self.y_mean
        return out

    def to_dict(self) -> dict:
        return {
            "x_mean": list(self.x_mean),
            "x_std": list(self.x_std),
            "y_mean": list(self.y_mean),
            "y_std": list(self.y_std),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(
            x_mean=tuple(d["x_mean"]),
            x_std=tuple(d["x_std"]),
            y_mean=tuple(d["y_mean"]),
            y_std=tuple(d["y_std"]),
        )


@dataclass(frozen=True)
class CvaeConfig:
    widths: tuple[int, ...] = (128, 256, 512, 256, 128)
    latent_dim: int = 2
    lambdas: tuple[float, float, float, float] = (1.0, 10.0, 0.1, 0.01)
    lr: float = 0.001
    plateau_factor: float = 0.1
    plateau_patience: int = 6
    early_stop_patience: int = 12
    batch_size: int = 256
    max_epochs: int = 500
    split: tuple[float, float, float] = (0.70, 0.10, 0.20)
    min_improvement: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if not self.widths:
            raise ValueError("widths must be non-empty")
        if abs(sum(self.split) - 1.0) > 1e-9:
            raise ValueError("split fractions must sum to 1")
        if any(l < 0 for l in self.lambdas):
            raise ValueError("loss weights must be non-negative")

    def to_dict(self) -> dict:
        return {
            "widths": list(self.widths),
            "latent_dim": self.latent_dim,
            "lambdas": list(self.lambdas),
            "lr": self.lr,
            "plateau_factor": self.plateau_factor,
            "plateau_patience": self.plateau_patience,
            "early_stop_patience": self.early_stop_patience,
            "batch_size": self.batch_size,
            "max_epochs": self.max_epochs,
            "split": list(self.split),
            "min_improvement": self.min_improvement,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CvaeConfig":
        return cls(
            widths=tuple(d["widths"]),
            latent_dim=int(d["latent_dim"]),
            lambdas=tuple(d["lambdas"]),
            lr=float(d["lr"]),
            plateau_factor=float(d["plateau_factor"]),
            plateau_patience=int(d["plateau_patience"]),
            early_stop_patience=int(d["early_stop_patience"]),
            batch_size=int(d["batch_size"]),
            max_epochs=int(d["max_epochs"]),
            split=tuple(d["split"]),
            min_improvement=float(d["min_improvement"]),
            seed=int(d["seed"]),
        )


DESK_WIDTHS = (32, 64, 128, 64, 32)


class MlpBlock:
    """Dense, then leaky-ReLU, then batch normalization."""

    def __init__(self, fan_in: int, fan_out: int, rng: np.random.Generator):
        self.dense = gc.DenseLayer(fan_in, fan_out, rng)
        self.norm = gc.BatchNormLayer(fan_out)

    def __call__(self, x: gc.Tensor) -> gc.Tensor:
        return self.norm(gc.leaky_relu(self.dense(x)))

    def parameters(self) -> list[gc.Tensor]:
        return self.dense.parameters() + self.norm.parameters()


class Encoder:
    """Shared trunk with a performance head and a latent-distribution head."""

    def __init__(self, config: CvaeConfig, rng: np.random.Generator):
        self.blocks: list[MlpBlock] = []
        fan_in = X_ENCODED_WIDTH
        for width in config.widths:
            self.blocks.append(MlpBlock(fan_in, width, rng))
            fan_in = width
        self.y_head = gc.DenseLayer(fan_in, Y_WIDTH, rng)
        self.latent_head = gc.DenseLayer(fan_in, 2 * config.latent_dim, rng)
        self.latent_dim = config.latent_dim

    def __call__(self, x: gc.Tensor) -> tuple[gc.Tensor, gc.Tensor, gc.Tensor]:
        h = x
        for block in self.blocks:
            h = block(h)
        y_hat = self.y_head(h)
        latent = self.latent_head(h)
        mu = gc.slice_cols(latent, 0, self.latent_dim)
        logvar = gc.slice_cols(latent, self.latent_dim, 2 * self.latent_dim)
        return y_hat, mu, logvar

    def parameters(self) -> list[gc.Tensor]:
        params = []
        for block in self.blocks:
            params += block.parameters()
        return params + self.y_head.parameters() + self.latent_head.parameters()


class Decoder:
    """Maps (performance, latent) back to an encoded design."""

    def __init__(self, config: CvaeConfig, rng: np.random.Generator):
        self.blocks: list[MlpBlock] = []
        fan_in = Y_WIDTH + config.latent_dim
        for width in config.widths:
            self.blocks.append(MlpBlock(fan_in, width, rng))
            fan_in = width
        self.out_head = gc.DenseLayer(fan_in, X_ENCODED_WIDTH, rng)

    def __call__(self, y: gc.Tensor, z: gc.Tensor) -> gc.Tensor:
        h = gc.concat([y, z], axis=1)
        for block in self.blocks:
            h = block(h)
        return self.out_head(h)

    def parameters(self) -> list[gc.Tensor]:
        params = []
        for block in self.blocks:
            params += block.parameters()
        return params + self.out_head.parameters()


class CvaeModel:
    def __init__(self, config: CvaeConfig, rng: np.random.Generator | None = None):
        rng = rng or np.random.default_rng([config.seed, 1])
        self.config = config
        self.encoder = Encoder(config, rng)
        self.decoder = Decoder(config, rng)

    def parameters(self) -> list[gc.Tensor]:
        return self.encoder.parameters() + self.decoder.parameters()

    def _norm_layers(self) -> list[gc.BatchNormLayer]:
        blocks = self.encoder.blocks + self.decoder.blocks
        return [b.norm for b in blocks]

    def train_mode(self) -> None:
        for norm in self._norm_layers():
            norm.training = True

    def eval_mode(self) -> None:
        for norm in self._norm_layers():
            norm.training = False

    def named_arrays(self) -> list[tuple[str, np.ndarray]]:
        """All state in a fixed order: parameters plus batchnorm statistics."""
        out: list[tuple[str, np.ndarray]] = []
        for side, part in (("encoder", self.encoder), ("decoder", self.decoder)):
            for k, block in enumerate(part.blocks):
                out.append((f"{side}.block{k}.weight", block.dense.weight.data))
                out.append((f"{side}.block{k}.bias", block.dense.bias.data))
                out.append((f"{side}.block{k}.gamma", block.norm.gamma.data))
                out.append((f"{side}.block{k}.beta", block.norm.beta.data))
                out.append((f"{side}.block{k}.running_mean", block.norm.running_mean))
                out.append((f"{side}.block{k}.running_var", block.norm.running_var))
        for name, head in (
            ("encoder.y_head", self.encoder.y_head),
            ("encoder.latent_head", self.encoder.latent_head),
            ("decoder.out_head", self.decoder.out_head),
        ):
            out.append((f"{name}.weight", head.weight.data))
            out.append((f"{name}.bias", head.bias.data))
        return out

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for name, current in self.named_arrays():
            incoming = arrays[name]
            if incoming.shape != current.shape:
                raise ValueError(f"{name}: shape {incoming.shape} != {current.shape}")
            current[...] = incoming

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: arr.copy() for name, arr in self.named_arrays()}


def reparameterize(mu: gc.Tensor, logvar: gc.Tensor, eps: np.ndarray) -> gc.Tensor:
    """z = mu + exp(logvar / 2) * eps, with eps a constant draw."""
    sigma = gc.exp(gc.scale(logvar, 0.5))
    return gc.add(mu, gc.mul(sigma, gc.Tensor(eps)))


def kl_divergence(mu: gc.Tensor, logvar: gc.Tensor) -> gc.Tensor:
    """Mean over the batch of KL(N(mu, diag e^logvar) || N(0, I))."""
    d_z = mu.data.shape[1]
    ones = gc.Tensor(np.ones_like(mu.data))
    inner = gc.add(gc.add(ones, logvar), gc.scale(gc.add(gc.square(mu), gc.exp(logvar)), -1.0))
    return gc.scale(gc.reduce_mean(inner), -0.5 * d_z)


def loss_cov(y_encoded: np.ndarray, z: gc.Tensor) -> gc.Tensor:
    """Mean squared entry of Cov = (1/B)(y - ybar)^T z.

    y is centered; z is not (the KL term already drives its mean to zero).
    """
    batch = y_encoded.shape[0]
    y_centered = y_encoded - y_encoded.mean(axis=0)
    cov = gc.scale(gc.matmul(gc.Tensor(y_centered.T), z), 1.0 / batch)
    return gc.mse(cov, np.zeros_like(cov.data))


def loss_total(
    x_encoded: np.ndarray,
    x_hat: gc.Tensor,
    y_encoded: np.ndarray,
    y_hat: gc.Tensor,
    mu: gc.Tensor,
    logvar: gc.Tensor,
    z: gc.Tensor,
    lambdas: Sequence[float],
) -> tuple[gc.Tensor, dict[str, float]]:
    """Weighted sum of reconstruction, prediction, KL, and covariance terms."""
    n_cont_x = len(CONTINUOUS_FEATURES)
    l_des = gc.add(
        gc.mse(gc.slice_cols(x_hat, 0, n_cont_x), x_encoded[:, :n_cont_x]),
        gc.softmax_ce(gc.slice_cols(x_hat, n_cont_x, X_ENCODED_WIDTH), x_encoded[:, n_cont_x:]),
    )
    n_cont_y = len(CONTINUOUS_METRICS)
    l_perf = gc.add(
        gc.mse(gc.slice_cols(y_hat, 0, n_cont_y), y_encoded[:, :n_cont_y]),
        gc.binary_ce_with_logits(gc.slice_cols(y_hat, n_cont_y, Y_WIDTH), y_encoded[:, n_cont_y:]),
    )
    l_kl = kl_divergence(mu, logvar)
    l_cov = loss_cov(y_encoded, z)
    total = gc.add(
        gc.add(gc.scale(l_des, lambdas[0]), gc.scale(l_perf, lambdas[1])),
        gc.add(gc.scale(l_kl, lambdas[2]), gc.scale(l_cov, lambdas[3])),
    )
    components = {
        "des": float(l_des.data),
        "perf": float(l_perf.data),
        "kl": float(l_kl.data),
        "cov": float(l_cov.data),
        "total": float(total.data),
    }
    return total, components


def split_indices(n: int, fractions: tuple[float, float, float], seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Deterministic train/val/test index split by seeded shuffle."""
    order = np.random.default_rng([seed, 0]).permutation(n)
    n_train = int(round(fractions[0] * n))
    n_val = int(round(fractions[1] * n))
    return order[:n_train], order[n_train : n_train + n_val], order[n_train + n_val :]


@dataclass
class CvaeCheckpoint:
    """Everything needed to reuse or exactly reproduce a trained model."""

    config: CvaeConfig
    standardizer: Standardizer
    arrays: dict[str, np.ndarray]
    history: list[dict[str, float]]
    y_range: tuple[tuple[float, ...], tuple[float, ...]]   # (min, max) over training targets
    design_space: DesignSpace
    format_version: int = 1

    _model_cache: CvaeModel | None = field(default=None, repr=False, compare=False)

    def model(self) -> CvaeModel:
        """The restored network, batchnorm in eval mode.  Cached; treat as immutable."""
        if self._model_cache is None:
            model = CvaeModel(self.config)
            model.load_arrays(self.arrays)
            model.eval_mode()
            self._model_cache = model
        return self._model_cache

    def save(self, path: str | Path) -> None:
        names = [name for name, _ in CvaeModel(self.config).named_arrays()]
        header = {
            "format": "footbridge-cvae",
            "version": self.format_version,
            "config": self.config.to_dict(),
            "standardizer": self.standardizer.to_dict(),
            "history": self.history,
            "y_range": [list(self.y_range[0]), list(self.y_range[1])],
            "design_space": self.design_space.to_dict(),
            "arrays": [{"name": n, "shape": list(self.arrays[n].shape)} for n in names],
        }
        header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as fh:
            fh.write(CHECKPOINT_MAGIC)
            fh.write(struct.pack("<Q", len(header_bytes)))
            fh.write(header_bytes)
            for name in names:
                fh.write(np.ascontiguousarray(self.arrays[name], dtype="<f8").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "CvaeCheckpoint":
        with open(path, "rb") as fh:
            magic = fh.read(len(CHECKPOINT_MAGIC))
            if magic != CHECKPOINT_MAGIC:
                raise ValueError(f"not a checkpoint file: bad magic {magic!r}")
            (header_len,) = struct.unpack("<Q", fh.read(8))
            header = json.loads(fh.read(header_len).decode("utf-8"))
            arrays: dict[str, np.ndarray] = {}
            for desc in header["arrays"]:
                shape = tuple(desc["shape"])
                count = int(np.prod(shape)) if shape else 1
                buf = fh.read(count * 8)
                arrays[desc["name"]] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
        return cls(
            config=CvaeConfig.from_dict(header["config"]),
            standardizer=Standardizer.from_dict(header["standardizer"]),
            arrays=arrays,
            history=header["history"],
            y_range=(tuple(header["y_range"][0]), tuple(header["y_range"][1])),
            design_space=DesignSpace.from_dict(header["design_space"]),
            format_version=header["version"],
        )


def _forward_loss(
    model: CvaeModel,
    x_enc: np.ndarray,
    y_enc: np.ndarray,
    eps: np.ndarray,
    lambdas: Sequence[float],
) -> tuple[gc.Tensor, dict[str, float], gc.Tensor]:
    x_t = gc.Tensor(x_enc)
    y_hat, mu, logvar = model.encoder(x_t)
    z = reparameterize(mu, logvar, eps)
    # ground-truth conditioning: the decoder sees the true y, never y_hat
    x_hat = model.decoder(gc.Tensor(y_enc), z)
    total, components = loss_total(x_enc, x_hat, y_enc, y_hat, mu, logvar, z, lambdas)
    return total, components, y_hat


def validation_loss(model: CvaeModel, x_enc: np.ndarray, y_enc: np.ndarray, lambdas: Sequence[float]) -> dict[str, float]:
    """Deterministic full-batch loss in eval mode with z at the latent mean."""
    model.eval_mode()
    eps = np.zeros((x_enc.shape[0], model.config.latent_dim))
    _, components, _ = _forward_loss(model, x_enc, y_enc, eps, lambdas)
    return components


def checkpoint_validation_loss(ckpt: CvaeCheckpoint, dataset: Dataset) -> dict[str, float]:
    """Re-evaluate the stored model on the dataset's validation split."""
    X, Y = _ok_rows(dataset)
    _, val_idx, _ = split_indices(len(X), ckpt.config.split, ckpt.config.seed)
    x_enc = ckpt.standardizer.encode_x(X[val_idx])
    y_enc = ckpt.standardizer.encode_y(Y[val_idx])
    return validation_loss(ckpt.model(), x_enc, y_enc, ckpt.config.lambdas)


def _ok_rows(dataset: Dataset) -> tuple[np.ndarray, np.ndarray]:
    mask = dataset.ok_mask
    return dataset.X[mask], dataset.Y[mask]


def train(dataset: Dataset, config: CvaeConfig) -> CvaeCheckpoint:
    """Fit the model on a labeled dataset; deterministic given config.seed.

    Split by seeded shuffle, standardize on the training split only, Adam
    with plateau-decayed learning rate, early stop on the validation total
    loss, best-validation parameters restored at the end.
    """
    X, Y = _ok_rows(dataset)
    if len(X) < 100:
        raise TrainingError(f"need at least 100 ok rows, got {len(X)}")
    train_idx, val_idx, _ = split_indices(len(X), config.split, config.seed)

    standardizer = Standardizer.fit(X[train_idx], Y[train_idx])
    x_train = standardizer.encode_x(X[train_idx])
    y_train = standardizer.encode_y(Y[train_idx])
    x_val = standardizer.encode_x(X[val_idx])
    y_val = standardizer.encode_y(Y[val_idx])
    y_range = (
        tuple(Y[train_idx].min(axis=0)),
        tuple(Y[train_idx].max(axis=0)),
    )

    model = CvaeModel(config)
    params = model.parameters()
    adam = gc.AdamState(params)
    lr = config.lr

    best_val = np.inf
    best_arrays: dict[str, np.ndarray] | None = None
    stall = 0
    history: list[dict[str, float]] = []

    for epoch in range(config.max_epochs):
        rng = np.random.default_rng([config.seed, 2, epoch])
        order = rng.permutation(len(x_train))
        model.train_mode()
        train_components: dict[str, float] = {}
        n_batches = 0
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            if len(batch) < 2:
                continue   # batchnorm and the covariance term need a real batch
            eps = rng.standard_normal((len(batch), config.latent_dim))
            total, components, _ = _forward_loss(model, x_train[batch], y_train[batch], eps, config.lambdas)
            if not np.isfinite(components["total"]):
                bad = {k: v for k, v in components.items() if not np.isfinite(v)}
                raise TrainingError(f"non-finite loss at epoch {epoch}: {bad}")
            gc.zero_grads(params)
            total.backward()
            gc.adam_step(params, [p.grad for p in params], adam, lr)
            for key, value in components.items():
                train_components[key] = train_components.get(key, 0.0) + value
            n_batches += 1

        val_components = validation_loss(model, x_val, y_val, config.lambdas)
        record = {"epoch": float(epoch), "lr": lr}
        record.update({f"train_{k}": v / max(n_batches, 1) for k, v in train_components.items()})
        record.update({f"val_{k}": v for k, v in val_components.items()})
        history.append(record)

        if val_components["total"] < best_val - config.min_improvement:
            best_val = val_components["total"]
            best_arrays = model.snapshot()
            stall = 0
        else:
            stall += 1
            if stall >= config.early_stop_patience:
                break
            if stall % config.plateau_patience == 0:
                lr *= config.plateau_factor   # patience counter continues toward early stop

    if best_arrays is not None:
        model.load_arrays(best_arrays)

    return CvaeCheckpoint(
        config=config,
        standardizer=standardizer,
        arrays=model.snapshot(),
        history=history,
        y_range=y_range,
        design_space=DesignSpace(),
    )


@dataclass(frozen=True)
class Prediction:
    """Encoder output for one design, back in physical units."""

    metrics: PerformanceMetrics
    flag_probabilities: tuple[float, float]
    y_encoded: tuple[float, ...]


def predict(x: DesignFeatures, ckpt: CvaeCheckpoint) -> Prediction:
    """Surrogate forward pass for a single design."""
    model = ckpt.model()
    x_enc = ckpt.standardizer.encode_x(x.as_array()[None, :])
    y_hat, _, _ = model.encoder(gc.Tensor(x_enc))
    return _prediction_from_row(y_hat.data[0], ckpt)


def _prediction_from_row(row: np.ndarray, ckpt: CvaeCheckpoint) -> Prediction:
    n_cont = len(CONTINUOUS_METRICS)
    logits = row[n_cont:]
    probs = 1.0 / (1.0 + np.exp(-logits))
    physical = ckpt.standardizer.decode_y(row[None, :])[0]
    physical[list(FLAG_METRICS)] = (logits > 0.0).astype(float)
    return Prediction(
        metrics=PerformanceMetrics.from_array(physical),
        flag_probabilities=(float(probs[0]), float(probs[1])),
        y_encoded=tuple(row),
    )


@dataclass(frozen=True)
class GenerationResult:
    """A batch of decoded designs for one performance request."""

    designs: np.ndarray            # (n, 6) physical features, n_p integer
    reliability: np.ndarray        # (n, 6) |request - re-encoded prediction|, standardized units
    z: np.ndarray                  # (n, d_z) latent draws used
    clipped: np.ndarray            # (n,) True where any feature was pulled to a bound
    extrapolated: bool             # request outside the training-data y range
    y_request: tuple[float, ...]

    def design_features(self) -> list[DesignFeatures]:
        return [DesignFeatures.from_array(row) for row in self.designs]


def generate(y_request: Sequence[float], n: int, seed: int, ckpt: CvaeCheckpoint) -> GenerationResult:
    """Sample n designs conditioned on a complete 6-entry performance request.

    Latent draws come from a seeded standard normal; decoded designs are
    de-standardized, the pier count arg-maxed, and features clipped to the
    design-space bounds.  Reliability is the per-target absolute gap between
    the request and the encoder's prediction for the returned design, in
    standardized units, so targets are comparable.
    """
    y_request = np.asarray(y_request, dtype=np.float64)
    if y_request.shape != (Y_WIDTH,):
        raise ValueError(f"y_request must have {Y_WIDTH} entries")
    model = ckpt.model()
    space = ckpt.design_space

    lo, hi = np.asarray(ckpt.y_range[0]), np.asarray(ckpt.y_range[1])
    cont = list(CONTINUOUS_METRICS)
    extrapolated = bool(np.any(y_request[cont] < lo[cont]) or np.any(y_request[cont] > hi[cont]))

    z = np.random.default_rng(seed).standard_normal((n, ckpt.config.latent_dim))
    y_enc = np.repeat(ckpt.standardizer.encode_y(y_request[None, :]), n, axis=0)
    x_hat = model.decoder(gc.Tensor(y_enc), gc.Tensor(z))

    n_cont_x = len(CONTINUOUS_FEATURES)
    designs = ckpt.standardizer.decode_x(x_hat.data[:, :n_cont_x], x_hat.data[:, n_cont_x:])
    pairs = [space.clip(row) for row in designs]
    clipped_designs = np.vstack([p[0] for p in pairs])
    clipped = np.array([p[1] for p in pairs])

    # score the designs as returned, clipping included
    x_enc = ckpt.standardizer.encode_x(clipped_designs)
    y_hat, _, _ = model.encoder(gc.Tensor(x_enc))
    request_enc = ckpt.standardizer.encode_y(y_request[None, :])
    reliability = np.abs(y_hat.data - request_enc)

    return GenerationResult(
        designs=clipped_designs,
        reliability=reliability,
        z=z,
        clipped=clipped,
        extrapolated=extrapolated,
        y_request=tuple(y_request),
    )
