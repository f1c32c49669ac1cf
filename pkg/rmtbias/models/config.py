"""
Pydantic models for scenario / experiment documents
"""
from enum import Enum
from typing import Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from rmtbias.models.domain import ModulusLaw


# ============================================
# Enums
# ============================================

class LosKind(str, Enum):
    """LoS 성분 생성 방식"""
    ULA = "ula"
    ZERO = "zero"
    FILE = "file"


class SweepVariable(str, Enum):
    """스윕 변수"""
    N = "N"
    SIGMA2 = "sigma2"
    R = "R"
    CV = "cv"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


# ============================================
# Scenario
# ============================================

class LosConfig(BaseModel):
    """LoS 행렬 설정"""
    model_config = ConfigDict(extra="forbid")

    kind: LosKind = Field(LosKind.ULA, description="ula | zero | file")
    angles: Optional[List[float]] = Field(None, description="ULA 위상 (길이 M, 기본값: 2*pi*m/N)")
    path: Optional[str] = Field(None, description="kind=file 일 때 .npy / 텍스트 행렬 경로")

    @model_validator(mode="after")
    def _path_for_file(self):
        if self.kind is LosKind.FILE and not self.path:
            raise ValueError("los.kind='file' requires los.path")
        return self


class EntryConfig(BaseModel):
    """채널 원소 분포 설정"""
    model_config = ConfigDict(extra="forbid")

    law: ModulusLaw = Field(..., description="weibull | lognormal | nakagami | gaussian")
    params: Dict[str, float] = Field(default_factory=dict, description="법칙 파라미터 (k / sigma / m)")
    sigma_r2: float = Field(1.0, ge=0, description="실수부 가중치")
    sigma_i2: float = Field(1.0, ge=0, description="허수부 가중치")


ProfileSpec = Union[List[float], str]


class ScenarioConfig(BaseModel):
    """채널 시나리오 (단일 source of truth)"""
    model_config = ConfigDict(
        extra="forbid",
        json_schema_extra={
            "example": {
                "N": 32,
                "M": 64,
                "los": {"kind": "ula"},
                "rician_K": 1.0,
                "D": "identity",
                "Dt": "identity",
                "entry": {"law": "weibull", "params": {"k": 1.0}, "sigma_r2": 1.6, "sigma_i2": 0.4},
            }
        },
    )

    N: int = Field(..., ge=1, description="수신 안테나 수")
    M: int = Field(..., ge=1, description="송신 안테나 수")
    los: LosConfig = Field(default_factory=LosConfig, description="LoS 성분")
    rician_K: float = Field(0.0, description="Rician K-factor (>= 0)")
    D: ProfileSpec = Field("identity", description='"identity" | 길이 N 벡터 | 파일 경로')
    Dt: ProfileSpec = Field("identity", description='"identity" | 길이 M 벡터 | 파일 경로')
    entry: EntryConfig
    norm_cap: Optional[float] = Field(None, gt=0, description="||A|| 상한 (기본값: 자동)")


# ============================================
# Solver / Monte-Carlo / Output
# ============================================

class SolverOptions(BaseModel):
    """고정점 반복 옵션"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    tol: float = Field(1e-12, gt=0, description="max(|delta - f|, |delta_t - f_t|) 허용 오차")
    max_iter: int = Field(10_000, ge=1, description="최대 반복 횟수")
    damping: Optional[float] = Field(None, gt=0, le=1, description="감쇠 계수 theta (None: 자동)")
    auto_damping_after: int = Field(200, ge=1, description="비단조 반복이 이 횟수를 넘으면 theta=0.5 적용")


class McConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    trials: int = Field(20_000, ge=2, description="Monte-Carlo 시행 횟수")
    seed: int = Field(0, ge=0, lt=2**64, description="64-bit seed")


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: str = Field("-", description='출력 경로 ("-" = stdout, reproduce 는 디렉터리)')
    format: OutputFormat = Field(OutputFormat.CSV, description="csv | json")


class SweepConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    variable: SweepVariable
    values: List[float] = Field(..., min_length=1)

    @field_validator("values")
    @classmethod
    def _strictly_increasing(cls, values: List[float]) -> List[float]:
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("sweep values must be strictly increasing")
        return values


class ExperimentConfig(BaseModel):
    """실험 설정 (시나리오 + 스윕 + 솔버 + MC + 출력)"""
    model_config = ConfigDict(extra="forbid")

    scenario: ScenarioConfig
    sweep: Optional[SweepConfig] = None
    solver: SolverOptions = Field(default_factory=SolverOptions)
    mc: McConfig = Field(default_factory=McConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    sigma2: float = Field(0.2, gt=0, description="잡음 분산 (z = -sigma2)")
    rate: Optional[float] = Field(None, description="outage 임계 전송률 R (nats)")

    @model_validator(mode="after")
    def _n_sweep_keeps_integer_ratio(self):
        if self.sweep is not None and self.sweep.variable is SweepVariable.N:
            for value in self.sweep.values:
                if value != int(value) or value < 1:
                    raise ValueError(f"N sweep values must be positive integers, got {value}")
        return self
