"""
Pydantic models for CLI output records

Complex values are split into ``*_re`` / ``*_im`` columns so every record is
a flat row of scalars for CSV and JSON alike.
"""
from enum import Enum
from typing import Optional, Union

from pydantic import BaseModel, ConfigDict, Field


# ============================================
# Enums
# ============================================

class CheckStatus(str, Enum):
    PASS = "pass"
    WARN = "warn"
    FAIL = "fail"


# ============================================
# Records
# ============================================

class SolveOut(BaseModel):
    """고정점 해 (solve 응답)"""
    z_re: float
    z_im: float
    delta_re: float
    delta_im: float
    delta_t_re: float
    delta_t_im: float
    trace_T_re: float = Field(..., description="Re Tr T(z)")
    trace_T_im: float = Field(..., description="Im Tr T(z)")
    iterations: int
    residual: float
    damping: float = Field(1.0, description="최종 감쇠 계수")

    model_config = ConfigDict(json_schema_extra={
        "example": {
            "z_re": -1.0, "z_im": 0.0,
            "delta_re": 0.6180339887498949, "delta_im": 0.0,
            "delta_t_re": 0.6180339887498949, "delta_t_im": 0.0,
            "trace_T_re": 0.6180339887498949, "trace_T_im": 0.0,
            "iterations": 31, "residual": 4.4e-13, "damping": 1.0,
        }
    })


class BiasOut(BaseModel):
    """resolvent trace bias (bias 응답)"""
    z_re: float
    z_im: float
    method: str = Field(..., description="closed_form | log_delta_fd")
    B_theta_re: float
    B_theta_im: float
    B_kappa_re: float
    B_kappa_im: float
    total_re: float
    total_im: float
    rel_gap: Optional[float] = Field(None, description="두 방법 간 상대 오차 (method=both 일 때)")


class LssOut(BaseModel):
    """선형 스펙트럼 통계량 평균/편향 (lss 응답)"""
    f: str = Field(..., description="mi | poly:c0,c1,...")
    V_f_re: float
    V_f_im: float
    B_f_re: float
    B_f_im: float
    nodes: int
    margin: float
    u_plus: float
    shape: str


class CltOut(BaseModel):
    """MI CLT 통계량 (clt 응답)"""
    sigma2: float
    V: float
    B_C: float
    B_C_theta: float
    B_C_kappa: float
    Theta_G: float
    Theta_B: float
    Theta: float
    mean: float
    unit: str = Field("nats", description="nats | bits")
    special_case: Optional[str] = Field(None, description="적용된 축약 공식 (--special)")
    special_B_C: Optional[float] = Field(None, description="축약 공식으로 계산한 B_C")

    model_config = ConfigDict(json_schema_extra={
        "example": {
            "sigma2": 0.2, "V": 21.3, "B_C": -0.041, "B_C_theta": -0.012,
            "B_C_kappa": -0.029, "Theta_G": 0.62, "Theta_B": 0.082,
            "Theta": 0.702, "mean": 21.259, "unit": "nats",
        }
    })


class OutageRow(BaseModel):
    rate: float
    p_out: float
    p_out_empirical: Optional[float] = None


class SummaryRow(BaseModel):
    """mc 요약 행"""
    quantity: str
    value: Union[int, float]
    stderr: Optional[float] = None


class ValidationItem(BaseModel):
    """validate 진단 항목"""
    check: str = Field(..., description="점검 항목 이름")
    status: CheckStatus
    detail: str = Field("", description="세부 내용")
