"""FastAPI service wrapping the experiment runners and the admissibility
classifier.  The CLI is a client of this app (in-process by default)."""

from __future__ import annotations

import math

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict, Field as PField

from . import __version__
from .config import ConfigError, validate_config
from .experiments import run_experiment
from .grid import WeinsteinParams
from .strichartz import classify

app = FastAPI(title="weinstein", version=__version__)


class HealthResponse(BaseModel):
    status: str
    version: str


class ValidateRequest(BaseModel):
    config: dict


class ValidationIssue(BaseModel):
    path: str
    line: int | None
    message: str


class ValidateResponse(BaseModel):
    valid: bool
    errors: list[ValidationIssue] = PField(default_factory=list)


class CheckModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    name: str
    value: float
    tolerance: float
    passed: bool = PField(serialization_alias="pass")


class RunRequest(BaseModel):
    config: dict


class RunResponse(BaseModel):
    experiment: str
    params: dict
    checks: list[CheckModel]
    artifacts: dict[str, str]
    binary_artifacts: dict[str, str]
    passed: bool


class ClassifyRequest(BaseModel):
    alpha: float
    d: int
    q: float | str
    r: float | str


class ClassifyResponse(BaseModel):
    classification: str
    sigma: float
    q: float
    r: float


def _as_exponent(x: float | str) -> float:
    if isinstance(x, str):
        if x.lower() in ("inf", "infinity"):
            return math.inf
        raise HTTPException(status_code=400, detail=f"bad exponent {x!r}")
    return float(x)


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/experiments/validate", response_model=ValidateResponse)
def validate(req: ValidateRequest) -> ValidateResponse:
    try:
        validate_config(req.config)
    except ConfigError as exc:
        return ValidateResponse(
            valid=False,
            errors=[ValidationIssue(path=exc.path, line=exc.line, message=str(exc))],
        )
    return ValidateResponse(valid=True)


@app.post("/experiments/run", response_model=RunResponse)
def run(req: RunRequest) -> RunResponse:
    try:
        config = validate_config(req.config)
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    report = run_experiment(config)
    return RunResponse(
        experiment=report.experiment,
        params=report.params,
        checks=[
            CheckModel(name=c.name, value=_finite(c.value), tolerance=_finite(c.tolerance), passed=c.passed)
            for c in report.checks
        ],
        artifacts=report.artifacts,
        binary_artifacts=report.binary_artifacts,
        passed=report.passed,
    )


def _finite(x: float) -> float:
    # JSON cannot carry infinities; report them as a sentinel
    if math.isinf(x):
        return 1e308 if x > 0 else -1e308
    return x


@app.post("/admissibility/classify", response_model=ClassifyResponse)
def classify_endpoint(req: ClassifyRequest) -> ClassifyResponse:
    try:
        params = WeinsteinParams(req.alpha, req.d)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    q, r = _as_exponent(req.q), _as_exponent(req.r)
    pair = classify(params, q, r)
    return ClassifyResponse(
        classification=pair.classification.value,
        sigma=params.sigma,
        q=_finite(q),
        r=_finite(r),
    )
