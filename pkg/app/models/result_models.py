import math
from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.sequence_models import Backend, IntSeq
from app.models.state_models import PureState


class VerdictMode(str, Enum):
    EXACT = "exact"        # both distributions fully known, decided by a residual check
    WINDOWED = "windowed"  # at least one truncated prefix, decided on the checked window


class AMajorVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    holds: bool
    witness: Optional[IntSeq] = None
    min_violation: Any = 0
    window: int
    window_lo: int
    window_hi: int
    mode: VerdictMode
    backend: Backend
    marginal: bool = False

    @model_validator(mode="after")
    def _witness_when_holds(self) -> "AMajorVerdict":
        if self.holds and self.witness is None:
            raise ValueError("a positive verdict carries its witness")
        return self


class BoundKind(str, Enum):
    EXACT = "exact"
    UPPER_BOUND = "upper_bound"
    LOWER_BOUND = "lower_bound"


class QfiBracket(BaseModel):
    """
    value = 4 * lambda_star. [lam_lo, lam_hi] brackets the feasibility edge of the Poisson
    parameter; `unbounded` marks an infimum that no tested lambda attained.
    """

    model_config = ConfigDict(frozen=True)

    value: float = Field(..., ge=0.0)
    kind: BoundKind
    lam_star: float = Field(..., ge=0.0)
    iterations: int = 0
    lam_lo: float = 0.0
    lam_hi: float = 0.0
    unbounded: bool = False

    @model_validator(mode="after")
    def _value_matches_lambda(self) -> "QfiBracket":
        if math.isinf(self.value) or math.isinf(self.lam_star):
            if not (math.isinf(self.value) and math.isinf(self.lam_star)):
                raise ValueError("value and lam_star must both be infinite")
        elif abs(self.value - 4.0 * self.lam_star) > 1e-12 * max(1.0, self.value):
            raise ValueError("value must equal 4 * lam_star")
        return self

    @classmethod
    def from_lambda(cls, lam: float, kind: BoundKind, **extra) -> "QfiBracket":
        return cls(value=4.0 * lam, kind=kind, lam_star=lam, **extra)


class PhaseAlignment(BaseModel):
    model_config = ConfigDict(frozen=True)

    phases: tuple[float, ...]
    achieved_distance: float
    overlap: float
    bound: float


class SmoothingWitness(BaseModel):
    model_config = ConfigDict(frozen=True)

    state: PureState
    dist: float
    eps: float
    bound: float
    witness: IntSeq
    majorizes: bool


class RatePoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int
    raw_value: float
    per_m: float
    bound_kind: BoundKind


class RateDirection(str, Enum):
    SUP = "sup"
    INF = "inf"


class RateEstimate(BaseModel):
    """Unbounded smoothing values surface as +inf in per_m and in the plateau average."""

    model_config = ConfigDict(frozen=True)

    eps: float = Field(..., ge=0.0, le=1.0)
    per_m: tuple[RatePoint, ...]
    extrapolated: float
    spread: float
    direction: RateDirection


class CertificateRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int
    d_tv: float
    bound: float


class ChainRow(BaseModel):
    """Distances along coherence bits -> translated Poisson -> Poisson profile."""

    model_config = ConfigDict(frozen=True)

    m: int
    d_iid_tp: float
    d_tp_poisson: float
    comparison_bound: float
    unitary_distance_bound: float


class Entropies(BaseModel):
    model_config = ConfigDict(frozen=True)

    s: float
    s_max: float
    s_min: float


class SmoothEntropies(BaseModel):
    """s_max is an upper bound on the smooth max-entropy, s_min a lower bound on the smooth min-entropy."""

    model_config = ConfigDict(frozen=True)

    eps: float
    s_max: float
    s_min: float
    s_max_kind: BoundKind = BoundKind.UPPER_BOUND
    s_min_kind: BoundKind = BoundKind.LOWER_BOUND


class EntropyRateRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int
    s_rate: float
    s_max_rate: float
    s_min_rate: float


class CorrespondenceRow(BaseModel):
    """One pure-state pair checked on both sides of the asymmetry/entanglement correspondence."""

    model_config = ConfigDict(frozen=True)

    index: int
    rta_convertible: bool
    rta_oracle: bool
    locc_convertible: bool
    locc_oracle: bool
