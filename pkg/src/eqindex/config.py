"""Run configuration: every tolerance and budget used anywhere, in one block.

Reports embed the active configuration so that any emitted number can be
reproduced from (problem file, config, seed).
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass

from .errors import ValidationError


@dataclass(frozen=True)
class RunConfig:
    # tolerances
    newton_tol: float = 1e-11      # residual norm accepted by equilibrium Newton
    corrector_tol: float = 1e-10   # bordered-corrector residual along branches
    margin_tol: float = 1e-7       # relative boundary margin for degree/flux sampling
    tol_center: float = 1e-8       # |mu| below this counts as a center eigenvalue
    tol_def: float = 1e-9          # definiteness threshold for quadratic forms
    eig_tol: float = 1e-3          # |lambda_end - m^2| for a trivial reconnect
    reconnect_tol: float = 1e-4    # ||u_end|| for a trivial reconnect
    dedup_tol: float = 1e-6        # zero deduplication radius
    # reduction
    validity_radius: float = 0.1   # kernel-plane radius where the quadratic manifold is trusted
    # planar dynamics
    rk_dt: float = 1e-3            # base RK4 step, scaled once by initial field magnitude
    t_max: float = 400.0
    block_samples: int = 720
    # degree
    grid: int = 41                 # multistart grid per axis for planar zero counting
    random_starts: int = 64        # extra LCG-seeded starts for full-space zero counting
    max_boundary_samples: int = 2**20
    # continuation
    h_min: float = 1e-4
    h_max: float = 0.1
    r_max: float = 10.0
    max_steps: int = 500
    lambda_min: float = -10.0
    lambda_max: float = 30.0
    # reproducibility
    seed: int = 0

    def __post_init__(self):
        for name in ("newton_tol", "corrector_tol", "margin_tol", "tol_center",
                     "tol_def", "eig_tol", "reconnect_tol", "dedup_tol",
                     "validity_radius", "rk_dt", "h_min", "h_max", "r_max"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"config field {name} must be positive")
        if self.h_min >= self.h_max:
            raise ValidationError("h_min must be smaller than h_max")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        bad = set(data) - known
        if bad:
            raise ValidationError(f"unknown config fields: {sorted(bad)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def thread_count() -> int:
    """Parallelism cap from EQINDEX_THREADS (default 1: fully sequential)."""
    raw = os.environ.get("EQINDEX_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def parallel_map(fn, items):
    """Map preserving order; threaded only when EQINDEX_THREADS > 1."""
    items = list(items)
    n = thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
