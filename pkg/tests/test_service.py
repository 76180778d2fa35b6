import base64
import warnings

import numpy as np

from weinstein.service import app

with warnings.catch_warnings():
    # this starlette build warns about its own httpx shim
    warnings.filterwarnings("ignore", message="Using `httpx`")
    from starlette.testclient import TestClient

    client = TestClient(app)

GOOD_CONFIG = {
    "experiment": "transform_suite",
    "params": {"alpha": 0.5, "d": 1},
    "grid": {"axial_n": 64, "axial_halfwidth": 10.0, "radial_n": 64, "radial_extent": 10.0},
    "seed": 3,
}


def test_health():
    resp = client.get("/health")
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "ok"
    assert body["version"]


def test_validate_endpoint_ok_and_bad():
    ok = client.post("/experiments/validate", json={"config": GOOD_CONFIG})
    assert ok.status_code == 200 and ok.json()["valid"]

    bad = dict(GOOD_CONFIG, params={"alpha": -1.0, "d": 1})
    res = client.post("/experiments/validate", json={"config": bad})
    body = res.json()
    assert res.status_code == 200 and not body["valid"]
    assert "alpha > -1/2" in body["errors"][0]["message"]


def test_run_endpoint_transform_suite():
    resp = client.post("/experiments/run", json={"config": GOOD_CONFIG})
    assert resp.status_code == 200
    body = resp.json()
    assert body["passed"]
    names = {c["name"] for c in body["checks"]}
    assert {"plancherel_rel_err", "gaussian_pair_rel_err"} <= names


def test_run_endpoint_rejects_bad_config():
    bad = dict(GOOD_CONFIG, experiment="nope")
    resp = client.post("/experiments/run", json={"config": bad})
    assert resp.status_code == 400
    assert "unknown experiment" in resp.json()["detail"]


def test_run_solve_returns_binary_checkpoint():
    cfg = {
        "experiment": "solve",
        "params": {"alpha": 0.5, "d": 1},
        "grid": {"axial_n": 64, "axial_halfwidth": 16.0, "radial_n": 64, "radial_extent": 16.0},
        "seed": 1,
        "solver": {"p": 1.0, "mu": 1.0, "T": 0.5, "dt": 0.01, "initial_l2": 0.05},
    }
    from weinstein.transform import BoundaryDecayWarning

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryDecayWarning)
        resp = client.post("/experiments/run", json={"config": cfg})
    assert resp.status_code == 200
    body = resp.json()
    assert body["passed"], body["checks"]
    assert "diagnostics.csv" in body["artifacts"]
    header = body["artifacts"]["diagnostics.csv"].splitlines()[0]
    assert header == "t,mass,sup_norm,lqlr_accum,contraction_ratio"
    raw = base64.b64decode(body["binary_artifacts"]["final_state.field"])
    from io import BytesIO

    from weinstein import read_field

    field = read_field(BytesIO(raw))
    assert field.grid.radial_n == 64
    assert np.isfinite(field.values).all()


def test_classify_endpoint():
    resp = client.post(
        "/admissibility/classify", json={"alpha": 0.5, "d": 1, "q": 4.0, "r": 8.0 / 3.0}
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["classification"] == "sharp"
    assert body["sigma"] == 2.0

    resp = client.post("/admissibility/classify", json={"alpha": 0.5, "d": 1, "q": "inf", "r": 2.0})
    assert resp.json()["classification"] == "sharp"

    resp = client.post("/admissibility/classify", json={"alpha": -0.9, "d": 1, "q": 2, "r": 2})
    assert resp.status_code == 400
