"""
参考预言机：小规模态矢量轨迹模拟，用于校验帧采样器
"""

from auto_noise.oracle.trajectory import (
    CHECK_CHANNELS,
    MAX_QUBITS,
    OracleCheckResult,
    oracle_check,
    oracle_sample,
)

__all__ = [
    "CHECK_CHANNELS",
    "MAX_QUBITS",
    "OracleCheckResult",
    "oracle_check",
    "oracle_sample",
]
