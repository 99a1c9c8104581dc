import pytest
from fastapi.testclient import TestClient

from hypdiam.service.app import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def test_healthz(client):
    data = client.get("/healthz").json()
    assert data["status"] == "ok"


def test_hexagon_endpoint(client):
    r = client.post("/hexagon", json={"ell": 6.0})
    assert r.status_code == 200
    data = r.json()
    assert data["s"] == 3.0
    assert data["seam_length"] == pytest.approx(2.0 * data["t"])
    assert data["c_ell"] == pytest.approx(0.6010103213780813, abs=1e-12)


def test_hexagon_validation(client):
    assert client.post("/hexagon", json={"ell": 100.0}).status_code == 422
    assert client.post("/hexagon", json={}).status_code == 422


def test_lattice_endpoint(client):
    r = client.post("/lattice", json={"ell": 6.0, "radius": 6.5, "grid_step": 2.0})
    assert r.status_code == 200
    rows = r.json()["rows"]
    assert len(rows) == 3  # offset grid at 2, 4, 6 (+ tie offset)
    assert all(row["submult_ok"] and row["area_ok"] for row in rows)


def test_lattice_radius_cap(client):
    assert client.post("/lattice", json={"ell": 6.0, "radius": 31.0}).status_code == 422


def test_lattice_budget_conflict(client):
    r = client.post("/lattice", json={"ell": 6.0, "radius": 10.0, "node_budget": 10})
    assert r.status_code == 409


def test_graph_endpoint_deterministic(client):
    payload = {"genus": 3, "trials": 4, "seed": 9}
    a = client.post("/graph", json=payload).json()
    b = client.post("/graph", json=payload).json()
    assert a == b


def test_surface_endpoint(client):
    r = client.post("/surface", json={"genus": 8, "trials": 2, "seed": 11})
    assert r.status_code == 200
    rows = r.json()["rows"]
    assert len(rows) == 2
    for row in rows:
        if row["connected"]:
            assert row["padded_diam"] >= row["bavard"]


def test_peel_endpoint(client):
    r = client.post("/peel", json={"genus": 16, "trials": 2, "seed": 4})
    assert r.status_code == 200
    for row in r.json()["rows"]:
        assert row["audit_pass"] in ("true", "false", "skipped")


def test_peel_validation(client):
    assert client.post("/peel", json={"genus": 16, "epsilon": 0.2}).status_code == 422


def test_sweep_endpoint(client):
    r = client.post("/sweep", json={"genus": [8], "trials": 2, "seed": 1})
    assert r.status_code == 200
    data = r.json()
    assert "summary" in data and "rows" in data
    assert data["config"]["genus"] == [8]


def test_verify_endpoint(client):
    r = client.post("/verify", json={"suite": "geometry"})
    assert r.status_code == 200
    data = r.json()
    assert data["passed"] is True
    assert data["suites"][0]["suite"] == "geometry"
