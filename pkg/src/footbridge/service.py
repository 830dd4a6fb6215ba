"""Command line and HTTP facades over the full pipeline.

Both paths call the same library functions, so identical inputs produce
bit-identical numbers whether they arrive via a terminal or a socket.  The
HTTP app serves an immutable checkpoint loaded at startup; every response
carries the checkpoint's content hash so clients can detect model swaps.
"""

from __future__ import annotations

import hashlib
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np

from . import analysis, cvae, sampling
from .config import load_config
from .geometry import (
    DesignFeatures,
    FEATURE_NAMES,
    SiteConfig,
    alignment_polyline,
    build_geometry,
)
from .simulator import METRIC_NAMES, PerformanceMetrics

MAX_GENERATE = 1000
PLAN_POLYLINE_POINTS = 65


@dataclass(frozen=True)
class AppConfig:
    checkpoint_path: Path
    config_path: Path | None = None
    dataset_path: Path | None = None
    host: str = "127.0.0.1"
    port: int = 8000
    max_generate: int = MAX_GENERATE


def _file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _design_from_mapping(body: dict) -> DesignFeatures:
    try:
        values = [float(body[name]) for name in FEATURE_NAMES]
    except KeyError as missing:
        raise ValueError(f"missing design field {missing}")
    return DesignFeatures.from_array(np.array(values))


def _design_to_mapping(row: np.ndarray) -> dict:
    out = {name: float(v) for name, v in zip(FEATURE_NAMES, row)}
    out["n_p"] = int(round(out["n_p"]))
    return out


def _metrics_to_mapping(metrics: PerformanceMetrics) -> dict:
    arr = metrics.as_array()
    out = {name: float(v) for name, v in zip(METRIC_NAMES, arr)}
    out["clearance_ok"] = bool(arr[4])
    out["trees_ok"] = bool(arr[5])
    return out


def _request_from_mapping(body: dict) -> np.ndarray:
    try:
        return np.array([float(body[name]) for name in METRIC_NAMES])
    except KeyError as missing:
        raise ValueError(f"missing request field {missing}")


def _geometry_payload(x: DesignFeatures, site: SiteConfig) -> dict:
    """Plan and elevation polylines so a client renders without any math."""
    geom = build_geometry(x, site)
    plan = alignment_polyline(x.i, x.w, site, PLAN_POLYLINE_POINTS)
    girder_bottom = site.deck_elevation - x.h_girder
    return {
        "plan": [[float(px), float(py)] for px, py in plan],
        "deck_width": site.width_b,
        "arc_length": geom.arc_length,
        "elevation": {
            "deck_top": [[0.0, site.deck_elevation], [geom.arc_length, site.deck_elevation]],
            "deck_bottom": [[0.0, girder_bottom], [geom.arc_length, girder_bottom]],
            "ground": [[0.0, site.ground_elevation], [geom.arc_length, site.ground_elevation]],
            "piers": [
                {"station": float(s), "top": girder_bottom, "bottom": site.ground_elevation, "side": x.h_p}
                for s in geom.pier_stations
            ],
        },
    }


def predict_payload(x: DesignFeatures, ckpt: cvae.CvaeCheckpoint, checkpoint_hash: str) -> dict:
    prediction = cvae.predict(x, ckpt)
    return {
        "x": _design_to_mapping(x.as_array()),
        "y_pred": _metrics_to_mapping(prediction.metrics),
        "flag_probabilities": {
            "clearance_ok": prediction.flag_probabilities[0],
            "trees_ok": prediction.flag_probabilities[1],
        },
        "checkpoint_hash": checkpoint_hash,
    }


def generate_payload(
    y_request: np.ndarray,
    n: int,
    seed: int,
    ckpt: cvae.CvaeCheckpoint,
    site: SiteConfig,
    checkpoint_hash: str,
) -> dict:
    result = cvae.generate(y_request, n, seed, ckpt)
    designs = []
    for k, row in enumerate(result.designs):
        x = DesignFeatures.from_array(row)
        prediction = cvae.predict(x, ckpt)
        designs.append(
            {
                "x": _design_to_mapping(row),
                "y_pred": _metrics_to_mapping(prediction.metrics),
                "reliability": {name: float(v) for name, v in zip(METRIC_NAMES, result.reliability[k])},
                "mean_reliability": float(result.reliability[k].mean()),
                "z": [float(v) for v in result.z[k]],
                "clipped": bool(result.clipped[k]),
                "geometry": _geometry_payload(x, site),
            }
        )
    return {
        "y_request": {name: float(v) for name, v in zip(METRIC_NAMES, result.y_request)},
        "n": n,
        "seed": seed,
        "designs": designs,
        "extrapolated": result.extrapolated,
        "checkpoint_hash": checkpoint_hash,
    }


def sensitivity_payload(report: analysis.SensitivityReport, checkpoint_hash: str) -> dict:
    payload = report.to_dict()
    payload["checkpoint_hash"] = checkpoint_hash
    return payload


def create_app(app_config: AppConfig):
    """FastAPI application over one checkpoint; stateless request handling."""
    from fastapi import Body, FastAPI, HTTPException, Request
    from fastapi.exceptions import RequestValidationError
    from fastapi.responses import JSONResponse

    ckpt: cvae.CvaeCheckpoint | None = None
    checkpoint_hash = ""
    if app_config.checkpoint_path and Path(app_config.checkpoint_path).exists():
        ckpt = cvae.CvaeCheckpoint.load(app_config.checkpoint_path)
        checkpoint_hash = _file_sha256(Path(app_config.checkpoint_path))
    project = load_config(app_config.config_path)
    dataset: sampling.Dataset | None = None
    if app_config.dataset_path and Path(app_config.dataset_path).exists():
        dataset = sampling.load_dataset(app_config.dataset_path)

    app = FastAPI(title="footbridge design service")

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": "malformed request body"})

    def require_checkpoint() -> cvae.CvaeCheckpoint:
        if ckpt is None:
            raise HTTPException(status_code=503, detail="no checkpoint loaded")
        return ckpt

    def require_dataset() -> sampling.Dataset:
        if dataset is None:
            raise HTTPException(status_code=503, detail="no dataset loaded")
        return dataset

    @app.post("/api/predict")
    def api_predict(body: dict = Body(...)):
        model = require_checkpoint()
        try:
            x = _design_from_mapping(body.get("x", body))
        except (ValueError, TypeError) as err:
            raise HTTPException(status_code=400, detail=str(err))
        if not model.design_space.contains(x):
            raise HTTPException(status_code=400, detail="design outside the design-space bounds")
        return predict_payload(x, model, checkpoint_hash)

    @app.post("/api/generate")
    def api_generate(body: dict = Body(...)):
        model = require_checkpoint()
        try:
            y_request = _request_from_mapping(body.get("y_request", {}))
            n = int(body.get("n", 100))
            seed = int(body.get("seed", 0))
        except (ValueError, TypeError) as err:
            raise HTTPException(status_code=400, detail=str(err))
        if not 1 <= n <= app_config.max_generate:
            raise HTTPException(status_code=400, detail=f"n must be in 1..{app_config.max_generate}")
        payload = generate_payload(y_request, n, seed, model, project.site, checkpoint_hash)
        if payload["extrapolated"]:
            payload["warning"] = "y_request outside the training-data range; designs are extrapolations"
            return JSONResponse(status_code=422, content=payload)
        return payload

    @app.post("/api/sensitivity")
    def api_sensitivity(body: dict = Body(...)):
        model = require_checkpoint()
        if "x" in body:
            try:
                x = _design_from_mapping(body["x"])
            except (ValueError, TypeError) as err:
                raise HTTPException(status_code=400, detail=str(err))
            if not model.design_space.contains(x):
                raise HTTPException(status_code=400, detail="design outside the design-space bounds")
            return sensitivity_payload(analysis.sensitivity(x, model), checkpoint_hash)
        try:
            y_request = _request_from_mapping(body.get("y_request", {}))
            n = int(body.get("n", 100))
            seed = int(body.get("seed", 0))
        except (ValueError, TypeError) as err:
            raise HTTPException(status_code=400, detail=str(err))
        if not 1 <= n <= app_config.max_generate:
            raise HTTPException(status_code=400, detail=f"n must be in 1..{app_config.max_generate}")
        swarm = analysis.sensitivity_swarm(y_request, n, seed, model)
        payload = swarm.to_dict()
        payload["checkpoint_hash"] = checkpoint_hash
        return payload

    @app.get("/api/latent")
    def api_latent():
        model = require_checkpoint()
        data = require_dataset()
        payload = analysis.latent_map(data, model).to_dict()
        payload["checkpoint_hash"] = checkpoint_hash
        return payload

    @app.get("/api/meta")
    def api_meta():
        space = ckpt.design_space if ckpt else project.design_space
        payload = {
            "feature_names": list(FEATURE_NAMES),
            "metric_names": list(METRIC_NAMES),
            "bounds": {"lower": list(space.lower), "upper": list(space.upper)},
            "max_generate": app_config.max_generate,
            "checkpoint_hash": checkpoint_hash or None,
        }
        if ckpt is not None:
            payload["y_range"] = {"min": list(ckpt.y_range[0]), "max": list(ckpt.y_range[1])}
            payload["model"] = {"widths": list(ckpt.config.widths), "latent_dim": ckpt.config.latent_dim}
        return payload

    @app.get("/api/pareto")
    def api_pareto(source: str = "dataset", n: int = 100, seed: int = 0, y_request: str | None = None):
        model = require_checkpoint()
        if source == "dataset":
            data = require_dataset()
            mask = data.ok_mask
            cost = data.Y[mask][:, METRIC_NAMES.index("cost")]
            uls = data.Y[mask][:, METRIC_NAMES.index("uls_util")]
        elif source == "generated":
            if y_request is None:
                raise HTTPException(status_code=400, detail="generated source needs y_request=v1,...,v6")
            try:
                request = np.array([float(v) for v in y_request.split(",")])
            except ValueError:
                raise HTTPException(status_code=400, detail="y_request must be 6 comma-separated numbers")
            if request.shape != (len(METRIC_NAMES),):
                raise HTTPException(status_code=400, detail="y_request must have 6 entries")
            if not 1 <= n <= app_config.max_generate:
                raise HTTPException(status_code=400, detail=f"n must be in 1..{app_config.max_generate}")
            result = cvae.generate(request, n, seed, model)
            predictions = [cvae.predict(DesignFeatures.from_array(row), model).metrics for row in result.designs]
            cost = np.array([p.cost for p in predictions])
            uls = np.array([p.uls_util for p in predictions])
        else:
            raise HTTPException(status_code=400, detail="source must be dataset or generated")
        points = np.column_stack([cost, uls])
        front = analysis.pareto_front(points)
        return {
            "source": source,
            "points": [[float(c), float(u)] for c, u in points],
            "front_indices": list(front.indices),
            "directions": list(front.directions),
            "checkpoint_hash": checkpoint_hash,
        }

    return app


def _parse_values(text: str, count: int, label: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != count:
        raise click.UsageError(f"{label} needs {count} comma-separated values, got {len(parts)}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError:
        raise click.UsageError(f"{label} must be numeric")


@click.group()
def cli():
    """Design-space exploration for parametric girder footbridges."""


@cli.command("generate-data")
@click.option("--n", default=4000, show_default=True, help="Number of designs to sample.")
@click.option("--seed", default=2024, show_default=True)
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None, help="Project config JSON.")
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
@click.option("--workers", default=1, show_default=True, help="Parallel simulator processes.")
def cli_generate_data(n, seed, config_path, out_path, workers):
    """Sample the design space and label every design with the simulator."""
    try:
        project = load_config(config_path)
    except (OSError, ValueError) as err:
        raise click.ClickException(f"config error: {err}")
    started = time.time()
    try:
        dataset = sampling.generate_dataset(
            n, seed, project.site, project.loads, out_path, space=project.design_space, workers=workers
        )
    except OSError as err:
        raise click.ClickException(f"write failed: {err}")
    elapsed = time.time() - started
    ok = int(dataset.ok_mask.sum())
    click.echo(f"wrote {len(dataset)} rows ({ok} ok, {len(dataset) - ok} failed) to {out_path}")
    click.echo(f"{elapsed:.1f} s total, {len(dataset) / elapsed:.1f} designs/s")


@cli.command("train")
@click.option("--data", "data_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
@click.option("--widths", default="32,64,128,64,32", show_default=True, help="Comma-separated block widths.")
@click.option("--latent-dim", default=2, show_default=True)
@click.option("--lambdas", default="1,10,0.1,0.01", show_default=True, help="Loss weights l1,l2,l3,l4.")
@click.option("--seed", default=505, show_default=True)
@click.option("--batch-size", default=256, show_default=True)
@click.option("--max-epochs", default=500, show_default=True)
def cli_train(data_path, out_path, widths, latent_dim, lambdas, seed, batch_size, max_epochs):
    """Train the surrogate on a labeled dataset and write a checkpoint."""
    dataset = sampling.load_dataset(data_path)
    width_values = tuple(int(v) for v in _parse_values(widths, len(widths.split(",")), "--widths"))
    lam = _parse_values(lambdas, 4, "--lambdas")
    config = cvae.CvaeConfig(
        widths=width_values,
        latent_dim=latent_dim,
        lambdas=tuple(lam),
        seed=seed,
        batch_size=batch_size,
        max_epochs=max_epochs,
    )
    try:
        ckpt = cvae.train(dataset, config)
    except cvae.TrainingError as err:
        raise click.ClickException(str(err))
    ckpt.save(out_path)
    history_path = Path(out_path).with_suffix(Path(out_path).suffix + ".history.csv")
    keys = sorted({k for record in ckpt.history for k in record})
    with open(history_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(keys) + "\n")
        for record in ckpt.history:
            fh.write(",".join(repr(record.get(k, "")) for k in keys) + "\n")
    best = min(h["val_total"] for h in ckpt.history)
    click.echo(f"trained {len(ckpt.history)} epochs, best validation loss {best:.6f}")
    click.echo(f"checkpoint: {out_path}")
    click.echo(f"history: {history_path}")


@cli.command("report")
@click.option("--data", "data_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--ckpt", "ckpt_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out-dir", type=click.Path(path_type=Path), required=True)
def cli_report(data_path, ckpt_path, out_dir):
    """Accuracy report and latent map for a trained checkpoint."""
    dataset = sampling.load_dataset(data_path)
    ckpt = cvae.CvaeCheckpoint.load(ckpt_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = analysis.surrogate_report(dataset, ckpt)
    analysis.write_json(report.to_dict(), out_dir / "surrogate_report.json")
    report.to_csv(out_dir / "diagonal.csv")
    lmap = analysis.latent_map(dataset, ckpt)
    analysis.write_json(lmap.to_dict(), out_dir / "latent_map.json")
    lmap.to_csv(out_dir / "latent_map.csv")
    click.echo(json.dumps(report.to_dict(), indent=2, sort_keys=True))


@cli.command("sensitivity")
@click.option("--ckpt", "ckpt_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--design", default=None, help="6 comma-separated feature values for a single design.")
@click.option("--request", "request_", default=None, help="6 comma-separated metric targets for a batch.")
@click.option("--n", default=100, show_default=True)
@click.option("--seed", default=17, show_default=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None)
def cli_sensitivity(ckpt_path, design, request_, n, seed, out_path):
    """Performance sensitivities for one design or a generated batch."""
    ckpt = cvae.CvaeCheckpoint.load(ckpt_path)
    if (design is None) == (request_ is None):
        raise click.UsageError("give exactly one of --design or --request")
    if design is not None:
        x = DesignFeatures.from_array(_parse_values(design, 6, "--design"))
        if not ckpt.design_space.contains(x):
            raise click.UsageError("design outside the design-space bounds")
        report = analysis.sensitivity(x, ckpt)
        payload = report.to_dict()
        if out_path:
            report.to_csv(out_path)
    else:
        y_request = _parse_values(request_, 6, "--request")
        swarm = analysis.sensitivity_swarm(y_request, n, seed, ckpt)
        payload = swarm.to_dict()
        if out_path:
            swarm.to_csv(out_path)
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


@cli.command("predict")
@click.option("--ckpt", "ckpt_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--design", required=True, help="6 comma-separated feature values.")
def cli_predict(ckpt_path, design):
    """Surrogate performance prediction for one design."""
    ckpt = cvae.CvaeCheckpoint.load(ckpt_path)
    x = DesignFeatures.from_array(_parse_values(design, 6, "--design"))
    if not ckpt.design_space.contains(x):
        raise click.UsageError("design outside the design-space bounds")
    payload = predict_payload(x, ckpt, _file_sha256(Path(ckpt_path)))
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


@cli.command("serve")
@click.option("--ckpt", "ckpt_path", type=click.Path(path_type=Path), required=True)
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None)
@click.option("--data", "data_path", type=click.Path(path_type=Path), default=None)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def cli_serve(ckpt_path, config_path, data_path, host, port):
    """Serve the HTTP API (and the browser UI when its build is present)."""
    import uvicorn

    app_config = AppConfig(
        checkpoint_path=ckpt_path,
        config_path=config_path,
        dataset_path=data_path,
        host=host,
        port=port,
    )
    app = create_app(app_config)
    static_dir = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
    if static_dir.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    cli()
