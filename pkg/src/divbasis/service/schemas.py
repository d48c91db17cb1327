"""Request and response models for the estimation service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field, model_validator

FUNCTIONALS = ("hellinger", "kl01", "kl10", "dp", "ber")
ESTIMATE_METHODS = (
    "bernstein",
    "convex_uniform",
    "convex_density",
    "parametric_plugin",
    "convex_bound",
)


class DatasetParams(BaseModel):
    """Where the sample comes from: a built-in generator or inline CSV."""

    experiment: Optional[int] = Field(default=None, ge=1, le=4)
    fukunaga: Optional[int] = Field(default=None, ge=1, le=2)
    dataset_csv: Optional[str] = None
    n: int = Field(default=1000, ge=4, description="total pooled sample size")
    d: int = Field(default=3, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def _one_source(self):
        n_sources = sum(
            x is not None for x in (self.experiment, self.fukunaga, self.dataset_csv)
        )
        if n_sources != 1:
            raise ValueError("set exactly one of experiment, fukunaga, dataset_csv")
        if self.dataset_csv is None and self.n % 2 != 0:
            raise ValueError("generated datasets need an even total size")
        return self


class GenerateRequest(DatasetParams):
    pass


class GenerateResponse(BaseModel):
    csv: str
    n: int
    d: int


class EstimateRequest(DatasetParams):
    functional: str = "hellinger"
    method: str = "convex_uniform"
    k: int = Field(default=10, ge=1)
    lam: float = Field(default=0.01, ge=0.0)
    grid: str = "auto"  # auto | standard | kl_clipped

    @model_validator(mode="after")
    def _known_names(self):
        if self.functional not in FUNCTIONALS:
            raise ValueError(f"functional must be one of {FUNCTIONALS}")
        if self.method not in ESTIMATE_METHODS:
            raise ValueError(f"method must be one of {ESTIMATE_METHODS}")
        if self.method == "convex_bound" and self.functional != "ber":
            raise ValueError("convex_bound applies to the ber functional only")
        if self.grid not in ("auto", "standard", "kl_clipped"):
            raise ValueError("grid must be auto, standard or kl_clipped")
        return self


class EstimateResponse(BaseModel):
    value: float
    method: str
    functional: str
    k: Optional[int]
    lam: Optional[float]
    n: int
    seed: Optional[int]
    csv: str  # header line plus one report row


class ExperimentRequest(BaseModel):
    experiment: Optional[int] = Field(default=None, ge=1, le=4)
    fukunaga: Optional[int] = Field(default=None, ge=1, le=2)
    functional: str = "hellinger"
    methods: tuple[str, ...] = ("bernstein", "convex_uniform", "convex_density", "parametric_plugin")
    k: int = Field(default=10, ge=1)
    lam: float = Field(default=0.01, ge=0.0)
    grid: str = "auto"
    n_values: tuple[int, ...] = (100, 200, 500, 1000, 2000, 5000, 10000)
    trials: int = Field(default=100, ge=1)
    seed_base: int = 0
    d: int = Field(default=3, ge=1)
    oracle_draws: int = Field(default=1_000_000, ge=10_000)
    oracle_seed: int = 1_234_567


class ExperimentResponse(BaseModel):
    truth: float
    truth_std_error: float
    raw_csv: str
    aggregate_csv: str


class BoundsRequest(BaseModel):
    experiment: Optional[int] = Field(default=None, ge=1, le=4)
    fukunaga: Optional[int] = Field(default=None, ge=1, le=2)
    k: int = Field(default=10, ge=1)
    lam: float = Field(default=0.01, ge=0.0)
    n_values: tuple[int, ...] = (1000,)
    trials: int = Field(default=100, ge=1)
    seed_base: int = 0
    d: int = Field(default=3, ge=1)
    oracle_draws: int = Field(default=1_000_000, ge=10_000)
    oracle_seed: int = 1_234_567


class BoundsResponse(BaseModel):
    true_ber: float
    raw_csv: str
    aggregate_csv: str
    theory_csv: str


class CurvesRequest(BaseModel):
    k: int = Field(default=10, ge=1)
    lam: float = Field(default=0.01, ge=0.0)


class CurvesResponse(BaseModel):
    csv: str


class OracleRequest(BaseModel):
    experiment: Optional[int] = Field(default=None, ge=1, le=4)
    fukunaga: Optional[int] = Field(default=None, ge=1, le=2)
    functional: str = "hellinger"
    draws: int = Field(default=1_000_000, ge=10_000)
    seed: int = 0
    d: int = Field(default=3, ge=1)

    @model_validator(mode="after")
    def _validate(self):
        if (self.experiment is None) == (self.fukunaga is None):
            raise ValueError("set exactly one of experiment or fukunaga")
        if self.functional not in FUNCTIONALS:
            raise ValueError(f"functional must be one of {FUNCTIONALS}")
        return self


class OracleResponse(BaseModel):
    experiment: str
    functional: str
    value: float
    std_error: float
    method: str
    mc_samples: int
    seed: int
    manifest_header: str
    manifest_row: str
