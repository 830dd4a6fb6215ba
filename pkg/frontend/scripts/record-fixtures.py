"""Record service responses as JSON fixtures for the UI contract tests.

Run from the repository root with a trained checkpoint and a dataset:

    python3 frontend/scripts/record-fixtures.py --ckpt model.ckpt --data dataset.csv

Every fixture is a verbatim response body; the tests treat them as the
source of truth for what the client must send and render.
"""

import argparse
import json
from pathlib import Path

from fastapi.testclient import TestClient

from footbridge.service import AppConfig, create_app

REQUEST = {
    "uls_util": 0.078,
    "sls_util": 0.0118,
    "f1": 23.778,
    "cost": 74034.0,
    "clearance_ok": 0.0,
    "trees_ok": 0.0,
}
FAR_REQUEST = dict(REQUEST, cost=9e9)
DESIGN = {"h_girder": 1.0, "t_girder": 0.15, "n_p": 4, "h_p": 0.8, "i": 1.0, "w": 2.0}


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--ckpt", required=True)
    parser.add_argument("--data", required=True)
    parser.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "tests" / "fixtures"))
    args = parser.parse_args()

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    client = TestClient(create_app(AppConfig(checkpoint_path=args.ckpt, dataset_path=args.data)))

    recordings = {
        "meta": client.get("/api/meta"),
        "predict": client.post("/api/predict", json={"x": DESIGN}),
        "predict_oob": client.post("/api/predict", json={"x": dict(DESIGN, h_girder=99.0)}),
        "generate": client.post("/api/generate", json={"y_request": REQUEST, "n": 8, "seed": 7}),
        "generate_extrapolated": client.post("/api/generate", json={"y_request": FAR_REQUEST, "n": 2, "seed": 7}),
        "sensitivity_single": client.post("/api/sensitivity", json={"x": DESIGN}),
        "sensitivity_swarm": client.post("/api/sensitivity", json={"y_request": REQUEST, "n": 12, "seed": 17}),
        "latent": client.get("/api/latent"),
        "pareto_dataset": client.get("/api/pareto", params={"source": "dataset"}),
        "pareto_generated": client.get(
            "/api/pareto",
            params={"source": "generated", "n": 20, "seed": 7,
                    "y_request": ",".join(str(v) for v in REQUEST.values())},
        ),
    }
    for name, response in recordings.items():
        path = out_dir / f"{name}.json"
        path.write_text(json.dumps(response.json(), indent=2, sort_keys=True) + "\n")
        print(f"{path.name}: status {response.status_code}, {path.stat().st_size} bytes")


if __name__ == "__main__":
    main()
