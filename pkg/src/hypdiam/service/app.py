"""FastAPI service exposing the core computations.

Run standalone with `hypdiam serve` (uvicorn) or consume in-process via
the CLI's default client.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__, harness
from ..config import ExperimentConfig
from ..errors import (
    BudgetExceededError,
    EstimationError,
    HypdiamError,
    InputRangeError,
)
from . import schemas

app = FastAPI(
    title="hypdiam service",
    description="Random hyperbolic surface diameter experiments",
    version=__version__,
)


def _guard(fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except InputRangeError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    except (BudgetExceededError, EstimationError) as exc:
        raise HTTPException(status_code=409, detail=str(exc))
    except HypdiamError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@app.get("/healthz")
def healthz():
    return {"status": "ok", "version": __version__}


@app.post("/hexagon", response_model=schemas.HexagonResponse)
def hexagon(req: schemas.HexagonRequest):
    return _guard(harness.hexagon_payload, req.ell)


@app.post("/lattice", response_model=schemas.LatticeResponse)
def lattice(req: schemas.LatticeRequest):
    kw = {}
    if req.node_budget is not None:
        kw["node_budget"] = req.node_budget
    rows = _guard(harness.lattice_rows, req.ell, req.radius, req.grid_step, **kw)
    return {"ell": req.ell, "rows": rows}


@app.post("/graph", response_model=schemas.GraphResponse)
def graph(req: schemas.GraphRequest):
    return {"rows": _guard(harness.graph_rows, req.genus, req.trials, req.seed)}


@app.post("/surface", response_model=schemas.SurfaceResponse)
def surface(req: schemas.SurfaceRequest):
    rows = _guard(
        harness.surface_rows,
        req.genus,
        req.trials,
        req.seed,
        ell=req.ell,
        rcap=req.rcap,
        threads=req.threads,
        timings=req.timings,
    )
    return {"rows": rows}


@app.post("/peel", response_model=schemas.PeelResponse)
def peel(req: schemas.PeelRequest):
    rows = _guard(
        harness.peel_rows,
        req.genus,
        req.trials,
        req.seed,
        ell=req.ell,
        epsilon=req.epsilon,
        k=req.k,
        threads=req.threads,
        timings=req.timings,
    )
    return {"rows": rows}


@app.post("/sweep", response_model=schemas.SweepResponse)
def sweep(req: ExperimentConfig):
    result = _guard(harness.run_scaling_sweep, req)
    return {
        "rows": result.rows,
        "summary": result.summary.as_dict(),
        "config": result.config,
    }


@app.post("/verify", response_model=schemas.VerifyResponse)
def verify(req: schemas.VerifyRequest):
    reports = _guard(harness.run_verification_suites, req.suite)
    return {
        "passed": all(r.passed for r in reports),
        "suites": [r.as_dict() for r in reports],
    }
