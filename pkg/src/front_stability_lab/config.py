"""Run configuration: strict JSON schema, unknown keys rejected."""

import json
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .analysis import AnalysisConfig
from .evolve import SimConfig


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ModelSection(_Strict):
    name: Literal["combustion", "bistable"]
    params: Dict[str, float] = Field(default_factory=dict)
    mode: Literal["theory", "exploration"] = "theory"


class FrontSection(_Strict):
    L: Optional[float] = None  # None -> 40 / min |omega|
    n_nodes: int = 1601
    tol: float = 1e-10
    max_iter: int = 60
    c0: float = 0.5
    width: float = 2.0

    @field_validator("n_nodes")
    @classmethod
    def _odd(cls, v):
        if v < 7 or v % 2 == 0:
            raise ValueError("n_nodes must be odd and at least 7")
        return v


class WeightSection(_Strict):
    nu: Optional[float] = None  # None -> 0.1 c^2
    n_grid: int = 200
    alpha: Optional[Tuple[float, float]] = None  # fixed (alpha_-, alpha_+) skips the search
    eig_tol: float = 1e-5


class SimSection(_Strict):
    d: Literal[2, 3] = 2
    L_z: float = 90.0
    n_z: int = 513
    n_y: List[int] = Field(default_factory=lambda: [256])
    L_y: List[float] = Field(default_factory=lambda: [60.0])
    dt: float = 0.05
    T_end: float = 50.0
    output_stride: int = 10
    k: Optional[int] = None
    delta: float = 1.0
    snapshot_stride: int = 0

    def to_sim_config(self) -> SimConfig:
        return SimConfig(d=self.d, n_y=tuple(self.n_y), L_y=tuple(self.L_y), dt=self.dt, T_end=self.T_end,
                         output_stride=self.output_stride, k=self.k, delta=self.delta,
                         snapshot_stride=self.snapshot_stride)


class InitSection(_Strict):
    """Initial shift q0 = A exp(-|y|^2 / (2 s2)) plus an optional y-independent u1 bump."""
    q_amplitude: float = 0.3
    q_variance: float = 0.25
    bump_amplitude: float = 0.0
    bump_center: float = -25.0
    bump_variance: float = 4.0
    v_noise: float = 0.0  # amplitude of a seeded random v0 in ran Q


class AnalysisSection(_Strict):
    nu: Optional[float] = None
    rho: Optional[float] = None
    beta: Optional[float] = None
    delta: float = 1.0
    gamma: float = 0.5
    delta0: Optional[float] = None
    fit_window: Tuple[Optional[float], Optional[float]] = (5.0, None)
    t_calibrate: float = 5.0
    v1_factor: float = 2.0
    contrast_gap: float = 0.5
    contrast: bool = False
    identity_tol: float = 1e-8
    degree_tol: float = 0.25
    n_directions: int = 100
    scales: Tuple[float, ...] = (1.0, 0.5, 0.25)
    heat_tol: Tuple[float, float] = (0.03, 0.05)
    nonlinear: bool = True
    semigroup: bool = True
    integral: bool = True

    def to_analysis_config(self) -> AnalysisConfig:
        data = self.model_dump()
        for key in ("nonlinear", "semigroup", "integral"):
            data.pop(key)
        return AnalysisConfig(**data)


class RunConfig(_Strict):
    model: ModelSection
    front: FrontSection = Field(default_factory=FrontSection)
    weight: WeightSection = Field(default_factory=WeightSection)
    sim: SimSection = Field(default_factory=SimSection)
    init: InitSection = Field(default_factory=InitSection)
    analysis: AnalysisSection = Field(default_factory=AnalysisSection)
    out_dir: str = "out"
    seed: int = Field(default=0, ge=0, lt=2**64)


def parse_config(text: str) -> RunConfig:
    return RunConfig.model_validate(json.loads(text))


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def dump_config(cfg: RunConfig) -> str:
    return json.dumps(cfg.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"
