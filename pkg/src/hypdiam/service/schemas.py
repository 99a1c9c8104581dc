"""Request/response models for the compute service."""

from __future__ import annotations

from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, Field

from ..config import ExperimentConfig


class HexagonRequest(BaseModel):
    ell: float = Field(ge=0.1, le=60.0)


class HexagonResponse(BaseModel):
    ell: float
    s: float
    t: float
    c_ell: float
    c_prime: float
    rho: float
    pants_radius: float
    seam_length: float


class LatticeRequest(BaseModel):
    ell: float = Field(ge=0.1, le=60.0)
    radius: float = Field(ge=0.0, le=30.0)
    grid_step: Optional[float] = Field(default=None, gt=0.0)
    node_budget: Optional[int] = Field(default=None, gt=0)


class LatticeRow(BaseModel):
    R: float
    N: int
    shell: int
    raw_rate: Optional[float] = None
    certified_upper: Optional[float] = None
    submult_ok: bool
    area_ok: bool


class LatticeResponse(BaseModel):
    ell: float
    rows: List[LatticeRow]


class GraphRequest(BaseModel):
    genus: int = Field(ge=2)
    trials: int = Field(default=1, ge=1)
    seed: int = 0


class GraphRow(BaseModel):
    trial: int
    connected: bool
    # infinite for disconnected graphs; JSON carries null there and the
    # CSV layer prints the "inf" sentinel
    graph_diameter: Optional[float] = None


class GraphResponse(BaseModel):
    rows: List[GraphRow]


class SurfaceRequest(BaseModel):
    genus: int = Field(ge=2)
    ell: Union[float, Literal["auto"]] = "auto"
    trials: int = Field(default=1, ge=1)
    seed: int = 0
    rcap: Optional[float] = Field(default=None, gt=0.0, le=30.0)
    threads: int = Field(default=1, ge=1)
    timings: bool = False


class SurfaceRow(BaseModel):
    trial: int
    connected: Optional[bool] = None
    midpoint_diam: Optional[float] = None
    padded_diam: Optional[float] = None
    bavard: float
    theorem_budget: float
    nodes_expanded: Optional[int] = None
    wall_ms: int = 0
    error: str = ""
    genus: int
    ell: float
    seed: int
    budget_gap: Optional[float] = None


class SurfaceResponse(BaseModel):
    rows: List[SurfaceRow]


class PeelRequest(BaseModel):
    genus: int = Field(ge=3)
    ell: Union[float, Literal["auto"]] = "auto"
    epsilon: float = Field(default=0.4, gt=1.0 / 3.0, lt=0.5)
    k: int = Field(default=3, ge=3)
    trials: int = Field(default=1, ge=1)
    seed: int = 0
    threads: int = Field(default=1, ge=1)
    timings: bool = False


class PeelRow(BaseModel):
    trial: int
    bad_phase1: Optional[int] = None
    bad_phase2: Optional[int] = None
    R_6k: Optional[float] = None
    R_tau1: Optional[float] = None
    R_tau2: Optional[float] = None
    closed_early: Optional[bool] = None
    audit_pass: str = ""
    audit_slack_min: Optional[float] = None
    error: str = ""
    genus: int
    ell: float
    seed: int
    wall_ms: int = 0


class PeelResponse(BaseModel):
    rows: List[PeelRow]


class SweepResponse(BaseModel):
    rows: List[SurfaceRow]
    summary: Dict
    config: Dict


class VerifyRequest(BaseModel):
    suite: Literal["geometry", "counting", "peeling", "all"] = "all"


class VerifyCheck(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class VerifySuite(BaseModel):
    suite: str
    passed: bool
    checks: List[VerifyCheck]


class VerifyResponse(BaseModel):
    passed: bool
    suites: List[VerifySuite]


SweepRequest = ExperimentConfig
