"""
统计分析：探测事件、两点相关与扇区划分、探测事件比例曲线、输出态分布与 TVD
"""

from auto_noise.analysis.correlation import (
    CorrelationReport,
    SectorDiff,
    average_reports,
    correlation_matrix,
    correlation_strength,
    sector_difference,
    timelike_profile,
)
from auto_noise.analysis.detections import (
    DetectionTensor,
    ancilla_fraction,
    detection_fraction,
    extract_detections,
    fraction_rms,
    fraction_slope,
)
from auto_noise.analysis.distribution import (
    StateDistribution,
    state_distribution,
    statistical_tvd_floor,
    tvd,
)
from auto_noise.analysis.sectors import (
    Sector,
    classify_sectors,
    expected_sector_counts,
    sector_of,
)

__all__ = [
    "CorrelationReport",
    "SectorDiff",
    "average_reports",
    "correlation_matrix",
    "correlation_strength",
    "sector_difference",
    "timelike_profile",
    "DetectionTensor",
    "ancilla_fraction",
    "detection_fraction",
    "extract_detections",
    "fraction_rms",
    "fraction_slope",
    "StateDistribution",
    "state_distribution",
    "statistical_tvd_floor",
    "tvd",
    "Sector",
    "classify_sectors",
    "expected_sector_counts",
    "sector_of",
]
