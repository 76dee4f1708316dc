"""Pydantic models for run configuration and serialized results.

Numeric settings are held as exact decimal strings and every BigReal in a
payload is rendered as a decimal string, so 25-digit results survive JSON
unchanged.
"""

import hashlib
import json
from decimal import Decimal, InvalidOperation
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import ConfigurationError
from .specfun import MAX_PRECISION, MIN_PRECISION

# Fields that change numbers; the rest only change where output goes.
NUMERIC_FIELDS = (
    "precision", "eps", "zero_count", "zero_height", "tol", "quad_panels", "quad_degree",
    "quad_max_refinements", "tail_factor", "reference_ceiling", "chi_table_limit",
    "flow_m", "t_end", "samples", "flow_tol",
)


def _canonical_decimal(value: Any, name: str) -> str:
    if isinstance(value, float):
        value = repr(value)
    try:
        parsed = Decimal(str(value).strip())
    except InvalidOperation as e:
        raise ConfigurationError(f"{name} must be a decimal number, got {value!r}") from e
    if not parsed.is_finite():
        raise ConfigurationError(f"{name} must be finite, got {value!r}")
    return str(parsed.normalize()) if parsed != 0 else "0"


# ============ Configuration ============

class RunConfig(BaseModel):
    """Validated settings for one computation."""

    model_config = ConfigDict(extra="forbid")

    precision: int = Field(30, description="Working precision in decimal digits")
    eps: str = Field("5e-16", description="Target absolute accuracy of Xi")
    zero_count: Optional[int] = Field(20, ge=1, description="Number of zeros to locate")
    zero_height: Optional[str] = Field(None, description="Locate zeros up to this height instead of a count")
    tol: str = Field("1e-12", description="Zero bracket width")
    quad_panels: int = Field(8, ge=1, description="Initial quadrature panel count")
    quad_degree: int = Field(5, ge=1, le=10, description="Gauss-Legendre degree index per panel")
    quad_max_refinements: int = Field(5, ge=1, description="Panel doublings before giving up")
    tail_factor: str = Field("2", description="Sum-rule tail allowance factor")
    reference_ceiling: int = Field(2000, ge=3, description="Largest D for the reference L(1/2)")
    chi_table_limit: int = Field(10**6, ge=0, description="Largest period tabulated in full")
    flow_m: int = Field(32, ge=1, description="Zeros carried by the heat-flow system")
    t_end: str = Field("1", description="Final heat-flow time")
    samples: int = Field(11, ge=1, description="Trajectory sample count")
    flow_tol: str = Field("1e-12", description="Per-step integrator tolerance")
    format: Literal["json", "csv"] = Field("json", description="Output format")
    cache_dir: Optional[str] = Field(None, description="Report cache directory")
    workers: Optional[int] = Field(None, ge=1, description="Scan worker processes")
    scan_analyze: bool = Field(False, description="Run the full pipeline during scans")

    @field_validator("precision")
    @classmethod
    def _check_precision(cls, v: int) -> int:
        if not MIN_PRECISION <= v <= MAX_PRECISION:
            raise ConfigurationError(f"precision must be between {MIN_PRECISION} and {MAX_PRECISION}, got {v}")
        return v

    @field_validator("eps", "tol", "tail_factor", "t_end", "flow_tol", mode="before")
    @classmethod
    def _check_decimal(cls, v: Any, info) -> str:
        return _canonical_decimal(v, info.field_name)

    @field_validator("zero_height", mode="before")
    @classmethod
    def _check_height(cls, v: Any) -> Optional[str]:
        return None if v is None else _canonical_decimal(v, "zero_height")

    @model_validator(mode="after")
    def _check_ranges(self) -> "RunConfig":
        eps = Decimal(self.eps)
        if not 0 < eps < 1:
            raise ConfigurationError(f"eps must lie in (0, 1), got {self.eps}")
        if eps < Decimal(10) ** (3 - self.precision):
            raise ConfigurationError(f"eps = {self.eps} is too small for precision {self.precision}")
        tol = Decimal(self.tol)
        if not tol > 0 or tol < Decimal(10) ** (2 - self.precision):
            raise ConfigurationError(f"tol = {self.tol} must be positive and at least 1e{2 - self.precision}")
        flow_tol = Decimal(self.flow_tol)
        if not flow_tol > 0 or flow_tol < Decimal(10) ** (3 - self.precision):
            raise ConfigurationError(f"flow_tol = {self.flow_tol} must be positive and at least 1e{3 - self.precision}")
        if Decimal(self.tail_factor) <= 0:
            raise ConfigurationError(f"tail_factor must be positive, got {self.tail_factor}")
        if self.zero_height is not None:
            if Decimal(self.zero_height) <= 0:
                raise ConfigurationError(f"zero_height must be positive, got {self.zero_height}")
            self.zero_count = None
        elif self.zero_count is None:
            raise ConfigurationError("one of zero_count and zero_height is required")
        return self

    def numeric_settings(self) -> Dict[str, Any]:
        """The fields that determine computed values."""
        data = self.model_dump()
        return {k: data[k] for k in NUMERIC_FIELDS}

    def config_hash(self) -> str:
        """sha256 of the canonical JSON of the numeric settings."""
        text = json.dumps(self.numeric_settings(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


# ============ Result payloads ============

class StageError(BaseModel):
    """A pipeline stage that failed and why."""
    stage: str
    message: str


class LowReportPayload(BaseModel):
    """Serialized LowReport; BigReals as decimal strings, absent values as null."""

    model_config = ConfigDict(populate_by_name=True)

    disc: int
    d: int
    precision: int
    config_hash: str
    zeros_used: int
    zeros_used_in_bound: Optional[int] = None
    xi0: Optional[str] = None
    xi2: Optional[str] = None
    z0: Optional[str] = None
    log_z_second: Optional[str] = None
    origin: Optional[str] = None
    gamma1: Optional[str] = None
    gamma2: Optional[str] = None
    gamma1_tilde: Optional[str] = None
    gamma2_tilde: Optional[str] = None
    certify_residual: Optional[str] = None
    certify_flagged: bool = False
    g0_bound: Optional[str] = None
    rmt_g0_bound: Optional[str] = None
    lowdef_u: Optional[str] = None
    satisfies_lowdef: bool = False
    lambda_value: Optional[str] = Field(None, alias="lambda")
    lambda_naive: Optional[str] = None
    low3_lhs: Optional[str] = None
    low3_rhs: Optional[str] = None
    low3_intermediate_lhs: Optional[str] = None
    low3_intermediate_rhs: Optional[str] = None
    is_low: bool = False
    error: Optional[StageError] = None


class ScanEntry(BaseModel):
    """One discriminant of a scan."""
    disc: int
    origin: Optional[str] = None
    z0: Optional[str] = None
    log_z_second: Optional[str] = None
    lambda_value: Optional[str] = Field(None, alias="lambda")
    is_low: Optional[bool] = None
    error: Optional[str] = None

    model_config = ConfigDict(populate_by_name=True)


class ScanSummary(BaseModel):
    """Counts by origin classification over a discriminant range."""
    lo: int
    hi: int
    total: int
    counts: Dict[str, int] = Field(default_factory=dict)
    positive_local_min: List[int] = Field(default_factory=list)
    failures: List[int] = Field(default_factory=list)
    best_lambda: Optional[str] = None
    entries: List[ScanEntry] = Field(default_factory=list)


class OracleGap(BaseModel):
    """ODE position against the quadrature root of Xi_t at one time."""
    t: str
    index: int
    ode: str
    quadrature: Optional[str] = None
    gap: Optional[str] = None
    allowance: str
    ok: bool


class FlowPayload(BaseModel):
    """Heat-flow run summary emitted alongside the trajectory."""
    disc: int
    m: int
    t_start: str
    t_end: str
    t_reached: str
    status: Literal["completed", "collision"]
    steps_accepted: int
    steps_rejected: int
    min_gap: str
    drift_allowance: List[str] = Field(default_factory=list)
    diagnostics: List[Dict[str, Any]] = Field(default_factory=list)
    oracle: List[OracleGap] = Field(default_factory=list)
