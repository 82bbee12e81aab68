"""Request/response models for the HTTP service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class DescriptorModel(BaseModel):
    coverage: float
    leniency: int
    reachability: int


class LevelValidateRequest(BaseModel):
    level: str


class LevelErrorModel(BaseModel):
    message: str
    row: Optional[int] = None
    col: Optional[int] = None


class LevelValidateResponse(BaseModel):
    valid: bool
    width: Optional[int] = None
    height: Optional[int] = None
    descriptor: Optional[DescriptorModel] = None
    error: Optional[LevelErrorModel] = None


class EvaluateRequest(BaseModel):
    level: str
    agent: str
    rollouts: int = Field(default=40, ge=1)
    seed: int = 0
    max_ticks: int = Field(default=2000, ge=1)
    budget_calls: int = Field(default=1000, ge=1)


class EvaluateResponse(BaseModel):
    agent: str
    rollouts: int
    win_rate: float
    performance: float


class ArchiveUploadResponse(BaseModel):
    archive_id: str
    agent: str
    occupied_cells: int
    config_fingerprint: str


class ArchiveSummary(BaseModel):
    archive_id: str
    agent: str
    occupied_cells: int


class BandsResponse(BaseModel):
    archive_id: str
    labels: list[str]
    counts: list[int]


class SessionCreateRequest(BaseModel):
    archive_id: str
    target_agent: str = ""
    beta: float = Field(default=0.03, ge=0.0)
    max_iterations: int = Field(default=20, ge=1)
    success_threshold: float = Field(default=0.75, gt=0.0, le=1.0)
    amplitude: float = Field(default=1.0, gt=0.0)
    lengthscale: float = Field(default=1.0, gt=0.0)
    noise_variance: float = Field(default=0.1, ge=0.0)


class SuggestionModel(BaseModel):
    cell: list[int]
    level: str
    posterior_mean: float
    posterior_sigma: float
    acq_value: float


class StepModel(BaseModel):
    iteration: int
    cell: list[int]
    win_rate: float
    performance: float
    acq_value: float


class SessionStateResponse(BaseModel):
    session_id: str
    prior_agent: str
    target_agent: str
    iterations_used: int
    done: bool
    success: bool
    suggestion: Optional[SuggestionModel] = None
    history: list[StepModel] = []


class ObserveRequest(BaseModel):
    win_rate: float = Field(ge=0.0, le=1.0)


class AdaptRunRequest(BaseModel):
    archive_id: str
    agent: str
    seed: int = 0
    rollouts: int = Field(default=40, ge=1)
    beta: float = Field(default=0.03, ge=0.0)
    max_iterations: int = Field(default=20, ge=1)
    success_threshold: float = Field(default=0.75, gt=0.0, le=1.0)
    max_ticks: int = Field(default=2000, ge=1)
    budget_calls: int = Field(default=1000, ge=1)


class AdaptRunResponse(BaseModel):
    prior_agent: str
    target_agent: str
    success: bool
    iterations_used: int
    steps: list[StepModel]
