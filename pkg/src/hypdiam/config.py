"""Experiment configuration shared by the harness, service, and CLI."""

from __future__ import annotations

from typing import List, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator


class ExperimentConfig(BaseModel):
    """A scaling-sweep specification; also the --config file schema."""

    genus: List[int] = Field(default=[64, 128, 256, 512, 1024, 2048])
    ell: Union[float, str] = "auto"
    trials: int = 20
    seed: int = 0
    rcap: Optional[float] = None
    epsilon: float = 0.4
    k: int = 3
    threads: int = 1
    timings: bool = False

    @field_validator("genus")
    @classmethod
    def _genus_ok(cls, v):
        if not v:
            raise ValueError("genus list must be nonempty")
        if any(g < 2 for g in v):
            raise ValueError("genus entries must be >= 2")
        return v

    @field_validator("trials")
    @classmethod
    def _trials_ok(cls, v):
        if v < 1:
            raise ValueError("trials must be >= 1")
        return v

    @field_validator("epsilon")
    @classmethod
    def _eps_ok(cls, v):
        if not (1.0 / 3.0 < v < 0.5):
            raise ValueError("epsilon must lie in (1/3, 1/2)")
        return v

    @field_validator("k")
    @classmethod
    def _k_ok(cls, v):
        if v < 3:
            raise ValueError("k must be >= 3")
        return v

    @field_validator("ell")
    @classmethod
    def _ell_ok(cls, v):
        if isinstance(v, str):
            if v != "auto":
                raise ValueError('ell must be a number or "auto"')
            return v
        if not (0.1 <= float(v) <= 60.0):
            raise ValueError("ell must lie in [0.1, 60]")
        return float(v)

    @field_validator("threads")
    @classmethod
    def _threads_ok(cls, v):
        if v < 1:
            raise ValueError("threads must be >= 1")
        return v


def trial_seed(root_seed: int, genus: int, trial: int) -> int:
    """Counter-mode per-trial seed; reproducible independent of scheduling."""
    ss = np.random.SeedSequence(root_seed, spawn_key=(genus, trial))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
