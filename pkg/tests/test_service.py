import hashlib
import json

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from footbridge import service
from footbridge.geometry import DEFAULT_LOWER, DEFAULT_UPPER

DESIGN = {"h_girder": 1.0, "t_girder": 0.15, "n_p": 4, "h_p": 0.8, "i": 1.0, "w": 2.0}
DESIGN_FLAG = "1.0,0.15,4,0.8,1.0,2.0"
REQUEST = {
    "uls_util": 0.3,
    "sls_util": 0.2,
    "f1": 10.0,
    "cost": 1.5e5,
    "clearance_ok": 1,
    "trees_ok": 1,
}


@pytest.fixture(scope="module")
def client(tiny_ckpt_path, tiny_dataset_path):
    app = service.create_app(
        service.AppConfig(checkpoint_path=tiny_ckpt_path, dataset_path=tiny_dataset_path)
    )
    return TestClient(app)


def run_cli(*args):
    return CliRunner().invoke(service.cli, [str(a) for a in args])


# ---------------------------------------------------------------- CLI


def test_generate_data_is_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        res = run_cli("generate-data", "--n", 10, "--seed", 7, "--out", out)
        assert res.exit_code == 0, res.output
        assert "designs/s" in res.output
    assert hashlib.sha256(a.read_bytes()).digest() == hashlib.sha256(b.read_bytes()).digest()


def test_generate_data_missing_config_leaves_nothing(tmp_path):
    out = tmp_path / "ds.csv"
    res = run_cli("generate-data", "--n", 4, "--out", out, "--config", tmp_path / "absent.json")
    assert res.exit_code != 0
    assert not out.exists()


def test_train_same_seed_writes_identical_history(tiny_dataset_path, tmp_path):
    histories = []
    for tag in ("a", "b"):
        out = tmp_path / f"{tag}.ckpt"
        res = run_cli(
            "train", "--data", tiny_dataset_path, "--out", out,
            "--widths", "8,8", "--max-epochs", 6, "--seed", 5,
        )
        assert res.exit_code == 0, res.output
        assert out.exists()
        histories.append((tmp_path / f"{tag}.ckpt.history.csv").read_bytes())
    assert histories[0] == histories[1]


def test_report_writes_all_artifacts(tiny_dataset_path, tiny_ckpt_path, tmp_path):
    res = run_cli("report", "--data", tiny_dataset_path, "--ckpt", tiny_ckpt_path, "--out-dir", tmp_path)
    assert res.exit_code == 0, res.output
    for name in ("surrogate_report.json", "diagonal.csv", "latent_map.json", "latent_map.csv"):
        assert (tmp_path / name).exists()
    report = json.loads((tmp_path / "surrogate_report.json").read_text())
    assert set(report["r2"]) == {"uls_util", "sls_util", "f1", "cost"}


def test_sensitivity_cli_single_design(tiny_ckpt_path, tmp_path):
    out = tmp_path / "sens.csv"
    res = run_cli("sensitivity", "--ckpt", tiny_ckpt_path, "--design", DESIGN_FLAG, "--out", out)
    assert res.exit_code == 0, res.output
    payload = json.loads(res.output)
    assert payload["variables"] == ["h_girder", "t_girder", "h_p", "i", "w", "n_p"]
    assert out.exists()


def test_sensitivity_cli_rejects_out_of_bounds_design(tiny_ckpt_path):
    res = run_cli("sensitivity", "--ckpt", tiny_ckpt_path, "--design", "9.0,0.15,4,0.8,1.0,2.0")
    assert res.exit_code != 0
    assert "bounds" in res.output


def test_sensitivity_cli_needs_exactly_one_mode(tiny_ckpt_path):
    res = run_cli("sensitivity", "--ckpt", tiny_ckpt_path)
    assert res.exit_code != 0
    res = run_cli(
        "sensitivity", "--ckpt", tiny_ckpt_path,
        "--design", DESIGN_FLAG, "--request", "0.3,0.2,10,150000,1,1",
    )
    assert res.exit_code != 0


def test_predict_cli_rejects_malformed_vectors(tiny_ckpt_path):
    res = run_cli("predict", "--ckpt", tiny_ckpt_path, "--design", "1,2,3")
    assert res.exit_code != 0


# ---------------------------------------------------------------- HTTP API


def test_api_meta_reports_bounds_verbatim(client):
    body = client.get("/api/meta").json()
    assert body["bounds"]["lower"] == list(DEFAULT_LOWER)
    assert body["bounds"]["upper"] == list(DEFAULT_UPPER)
    assert body["feature_names"][0] == "h_girder"
    assert body["max_generate"] == 1000
    assert len(body["y_range"]["min"]) == 6
    assert body["checkpoint_hash"]


def test_api_predict_round_trip(client):
    r = client.post("/api/predict", json={"x": DESIGN})
    assert r.status_code == 200
    body = r.json()
    assert set(body["y_pred"]) == {"uls_util", "sls_util", "f1", "cost", "clearance_ok", "trees_ok"}
    assert isinstance(body["y_pred"]["clearance_ok"], bool)
    assert body["checkpoint_hash"]


def test_api_predict_rejects_out_of_bounds(client):
    r = client.post("/api/predict", json={"x": {**DESIGN, "h_girder": 99.0}})
    assert r.status_code == 400


def test_api_predict_rejects_malformed_bodies(client):
    r = client.post("/api/predict", content=b"{{", headers={"content-type": "application/json"})
    assert r.status_code == 400
    r = client.post("/api/predict", json={"x": {"h_girder": 1.0}})
    assert r.status_code == 400


def test_api_generate_identical_seeds_identical_bodies(client):
    a = client.post("/api/generate", json={"y_request": REQUEST, "n": 5, "seed": 3})
    b = client.post("/api/generate", json={"y_request": REQUEST, "n": 5, "seed": 3})
    assert a.status_code == b.status_code
    assert a.content == b.content


def test_api_generate_ships_renderable_geometry(client):
    r = client.post("/api/generate", json={"y_request": REQUEST, "n": 3, "seed": 1})
    body = r.json()
    assert len(body["designs"]) == 3
    for entry in body["designs"]:
        geo = entry["geometry"]
        assert len(geo["plan"]) == service.PLAN_POLYLINE_POINTS
        assert geo["elevation"]["deck_top"][0][1] > geo["elevation"]["deck_bottom"][0][1]
        assert len(geo["elevation"]["piers"]) == entry["x"]["n_p"]
        assert set(entry["reliability"]) == set(REQUEST)
        assert set(entry["y_pred"]) == set(REQUEST)
        assert isinstance(entry["y_pred"]["clearance_ok"], bool)


def test_api_generate_rejects_oversized_batches(client):
    r = client.post("/api/generate", json={"y_request": REQUEST, "n": 1001, "seed": 1})
    assert r.status_code == 400


def test_api_generate_warns_on_extrapolation(client):
    wild = {**REQUEST, "cost": 9e9}
    r = client.post("/api/generate", json={"y_request": wild, "n": 2, "seed": 1})
    assert r.status_code == 422
    body = r.json()
    # the result still arrives, flagged
    assert body["extrapolated"] is True
    assert "warning" in body
    assert len(body["designs"]) == 2


def test_api_sensitivity_single_and_swarm(client):
    single = client.post("/api/sensitivity", json={"x": DESIGN})
    assert single.status_code == 200
    assert "per_variable_physical" in single.json()
    swarm = client.post("/api/sensitivity", json={"y_request": REQUEST, "n": 4, "seed": 2})
    assert swarm.status_code == 200
    assert len(swarm.json()["values_std"]) == 4


def test_api_latent_serves_the_map(client):
    body = client.get("/api/latent").json()
    assert len(body["z"]) == len(body["y"])
    assert "mean_abs_corr_continuous" in body


def test_api_pareto_dataset_and_generated(client):
    ds = client.get("/api/pareto").json()
    assert ds["source"] == "dataset"
    assert len(ds["front_indices"]) >= 1
    gen = client.get(
        "/api/pareto",
        params={"source": "generated", "n": 5, "seed": 1, "y_request": "0.3,0.2,10,150000,1,1"},
    )
    assert gen.status_code == 200
    assert len(gen.json()["points"]) == 5
    bad = client.get("/api/pareto", params={"source": "generated"})
    assert bad.status_code == 400


def test_api_without_checkpoint_returns_503(tmp_path):
    app = service.create_app(service.AppConfig(checkpoint_path=tmp_path / "absent.ckpt"))
    c = TestClient(app)
    assert c.post("/api/predict", json={"x": DESIGN}).status_code == 503
    assert c.get("/api/latent").status_code == 503
    # meta still answers so a client can discover the situation
    assert c.get("/api/meta").status_code == 200


def test_cli_and_api_predict_agree_exactly(client, tiny_ckpt_path):
    res = run_cli("predict", "--ckpt", tiny_ckpt_path, "--design", DESIGN_FLAG)
    assert res.exit_code == 0, res.output
    cli_payload = json.loads(res.output)
    api_payload = client.post("/api/predict", json={"x": DESIGN}).json()
    assert json.dumps(cli_payload, sort_keys=True) == json.dumps(api_payload, sort_keys=True)
