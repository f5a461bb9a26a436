"""
Uncertainty Distribution Shift

두 코퍼스의 샘플별 평균 불확실성 분포 비교 (two-sample KS test)
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Sequence

import numpy as np
from scipy import stats

logger = logging.getLogger(__name__)


class ShiftLevel(Enum):
    """분포 shift 수준"""
    NONE = "none"
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


@dataclass
class ShiftResult:
    """분포 비교 결과"""
    reference_name: str
    current_name: str
    shifted: bool
    p_value: float
    statistic: float
    level: ShiftLevel
    reference_mean: float
    current_mean: float

    def to_dict(self) -> Dict:
        return {
            "reference": self.reference_name,
            "current": self.current_name,
            "shifted": self.shifted,
            "p_value": round(self.p_value, 6),
            "statistic": round(self.statistic, 6),
            "level": self.level.value,
            "reference_mean": round(self.reference_mean, 6),
            "current_mean": round(self.current_mean, 6),
        }


class UncertaintyShiftDetector:
    """평균 불확실성 분포 shift 감지기"""

    def __init__(self, significance_level: float = 0.05):
        """
        감지기 초기화

        Args:
            significance_level: 유의 수준 (기본 0.05)
        """
        if not 0 < significance_level < 1:
            raise ValueError(f"significance_level must be in (0, 1), got {significance_level}")
        self.significance_level = significance_level
        self.reference: Optional[np.ndarray] = None
        self.reference_name = "reference"

    def set_reference(self, values: Sequence[float], name: str = "reference") -> None:
        """
        기준 분포 설정 (예: SIM 검증 집합의 ⟨σ̂²⟩)

        Args:
            values: 샘플별 평균 불확실성
            name: 기준 집합 이름
        """
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 1 or values.size < 2:
            raise ValueError(f"Reference needs a 1-D sample of size >= 2, got {values.shape}")
        self.reference = values
        self.reference_name = name
        logger.info(f"Reference set: {name} ({values.size} samples)")

    def detect(self, values: Sequence[float], name: str = "current") -> ShiftResult:
        """
        shift 감지

        Args:
            values: 비교할 샘플별 평균 불확실성
            name: 비교 집합 이름

        Returns:
            ShiftResult
        """
        if self.reference is None:
            raise RuntimeError("Reference distribution not set. Call set_reference() first.")
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 1 or values.size < 2:
            raise ValueError(f"Current sample must be 1-D with size >= 2, got {values.shape}")

        statistic, p_value = stats.ks_2samp(self.reference, values)
        result = ShiftResult(
            reference_name=self.reference_name,
            current_name=name,
            shifted=bool(p_value < self.significance_level),
            p_value=float(p_value),
            statistic=float(statistic),
            level=self._get_shift_level(float(p_value)),
            reference_mean=float(self.reference.mean()),
            current_mean=float(values.mean()),
        )
        logger.info(
            f"Shift check {self.reference_name} -> {name}: KS={result.statistic:.4f}, "
            f"p={result.p_value:.4g}, level={result.level.value}"
        )
        return result

    def _get_shift_level(self, p_value: float) -> ShiftLevel:
        """p-value에 따른 shift 수준"""
        if p_value >= 0.1:
            return ShiftLevel.NONE
        elif p_value >= 0.05:
            return ShiftLevel.LOW
        elif p_value >= 0.01:
            return ShiftLevel.MEDIUM
        elif p_value >= 0.001:
            return ShiftLevel.HIGH
        else:
            return ShiftLevel.CRITICAL


def compare_uncertainty_distributions(
    reference: Sequence[float],
    current: Sequence[float],
    significance_level: float = 0.05,
    reference_name: str = "reference",
    current_name: str = "current"
) -> ShiftResult:
    """두 평균 불확실성 분포의 KS 비교 편의 함수"""
    detector = UncertaintyShiftDetector(significance_level)
    detector.set_reference(reference, reference_name)
    return detector.detect(current, current_name)
