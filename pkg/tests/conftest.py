"""Shared fixtures.

The expensive artifacts (the 4000-sample dataset and the trained models)
are built once per session.  Seeds are pinned: the dataset campaign and the
model seeds below are the reference configuration for the whole suite.
"""

import subprocess
import time
from types import SimpleNamespace

import numpy as np
import pytest

from footbridge import cvae, sampling
from footbridge.config import load_config

DATASET_N = 4000
DATASET_SEED = 2024
MAIN_SEED = 505
ABLATION_SEED = 1111


@pytest.fixture(scope="session")
def project():
    return load_config(None)


@pytest.fixture(scope="session")
def dataset_run(tmp_path_factory):
    """The full sampling campaign through the installed CLI, timed."""
    out = tmp_path_factory.mktemp("data") / "dataset.csv"
    started = time.perf_counter()
    proc = subprocess.run(
        [
            "footbridge",
            "generate-data",
            "--n", str(DATASET_N),
            "--seed", str(DATASET_SEED),
            "--out", str(out),
            "--workers", "4",
        ],
        capture_output=True,
        text=True,
    )
    elapsed = time.perf_counter() - started
    assert proc.returncode == 0, proc.stderr
    return SimpleNamespace(
        path=out,
        elapsed=elapsed,
        stdout=proc.stdout,
        dataset=sampling.load_dataset(out),
    )


@pytest.fixture(scope="session")
def main_model(dataset_run, tmp_path_factory):
    """Reference desk-scale model used by the quality and inverse checks."""
    config = cvae.CvaeConfig(widths=cvae.DESK_WIDTHS, seed=MAIN_SEED)
    started = time.perf_counter()
    ckpt = cvae.train(dataset_run.dataset, config)
    elapsed = time.perf_counter() - started
    path = tmp_path_factory.mktemp("model") / "main.ckpt"
    ckpt.save(path)
    return SimpleNamespace(ckpt=ckpt, path=path, train_seconds=elapsed)


@pytest.fixture(scope="session")
def ablation_models(dataset_run):
    """Identically seeded pair differing only in the covariance weight."""
    out = {}
    for lam4 in (0.01, 0.0):
        config = cvae.CvaeConfig(
            widths=cvae.DESK_WIDTHS,
            seed=ABLATION_SEED,
            lambdas=(1.0, 10.0, 0.1, lam4),
        )
        out[lam4] = cvae.train(dataset_run.dataset, config)
    return out


@pytest.fixture(scope="session")
def median_request(dataset_run):
    """Columnwise dataset median; the canonical in-range performance request."""
    ok = dataset_run.dataset.ok_mask
    return np.median(dataset_run.dataset.Y[ok], axis=0)


TINY_CONFIG = cvae.CvaeConfig(widths=(8, 8), seed=5, batch_size=64, max_epochs=12)


@pytest.fixture(scope="session")
def tiny_config():
    return TINY_CONFIG


@pytest.fixture(scope="session")
def tiny_dataset_path(tmp_path_factory):
    """Small labeled dataset for the fast structural tests."""
    out = tmp_path_factory.mktemp("tiny") / "ds.csv"
    project = load_config(None)
    sampling.generate_dataset(150, 99, project.site, project.loads, out)
    return out


@pytest.fixture(scope="session")
def tiny_dataset(tiny_dataset_path):
    return sampling.load_dataset(tiny_dataset_path)


@pytest.fixture(scope="session")
def tiny_ckpt(tiny_dataset):
    return cvae.train(tiny_dataset, TINY_CONFIG)


@pytest.fixture(scope="session")
def tiny_ckpt_path(tiny_ckpt, tmp_path_factory):
    path = tmp_path_factory.mktemp("tinymodel") / "tiny.ckpt"
    tiny_ckpt.save(path)
    return path
