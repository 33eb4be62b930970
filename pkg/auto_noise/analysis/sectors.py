"""
探测器对的扇区划分

按两个探测器的辅助比特距离 Δa 与轮次差 Δr 分类：
- timelike:     Δa = 0, |Δr| = 1
- spacelike:    Δa = 1, Δr = 0
- spacetime:    Δa = 1, |Δr| = 1
- leakage-tail: Δa ≤ 1, |Δr| ≥ 2
- other:        其余
"""

from enum import Enum
from typing import Dict

import numpy as np

from auto_noise.circuit.models import Circuit


class Sector(str, Enum):
    TIMELIKE = "timelike"
    SPACELIKE = "spacelike"
    SPACETIME = "spacetime"
    LEAKAGE_TAIL = "leakage-tail"
    OTHER = "other"


SECTOR_CODES: Dict[Sector, int] = {s: i for i, s in enumerate(Sector)}
SECTORS = tuple(Sector)


def sector_of(ancilla_a: int, round_a: int, ancilla_b: int, round_b: int) -> Sector:
    da = abs(ancilla_a - ancilla_b)
    dr = abs(round_a - round_b)
    if da == 0 and dr == 1:
        return Sector.TIMELIKE
    if da == 1 and dr == 0:
        return Sector.SPACELIKE
    if da == 1 and dr == 1:
        return Sector.SPACETIME
    if da <= 1 and dr >= 2:
        return Sector.LEAKAGE_TAIL
    return Sector.OTHER


def sector_codes(ancillas: np.ndarray, rounds: np.ndarray) -> np.ndarray:
    """向量化分类，返回 int8 扇区编码矩阵（对角线记为 other）"""
    da = np.abs(ancillas[:, None] - ancillas[None, :])
    dr = np.abs(rounds[:, None] - rounds[None, :])
    codes = np.full(da.shape, SECTOR_CODES[Sector.OTHER], dtype=np.int8)
    codes[(da <= 1) & (dr >= 2)] = SECTOR_CODES[Sector.LEAKAGE_TAIL]
    codes[(da == 1) & (dr == 1)] = SECTOR_CODES[Sector.SPACETIME]
    codes[(da == 1) & (dr == 0)] = SECTOR_CODES[Sector.SPACELIKE]
    codes[(da == 0) & (dr == 1)] = SECTOR_CODES[Sector.TIMELIKE]
    return codes


def detector_coordinates(circuit: Circuit):
    """(ancilla, round) 坐标数组，顺序同探测器编号"""
    ancillas = np.array([d.ancilla for d in circuit.detectors], dtype=np.int64)
    rounds = np.array([d.round for d in circuit.detectors], dtype=np.int64)
    return ancillas, rounds


def classify_sectors(circuit: Circuit) -> np.ndarray:
    """
    探测器对的扇区标签

    Returns:
        (n_detectors, n_detectors) 的扇区名字符串数组（对称），与 Sector.value 比较
    """
    codes = sector_codes(*detector_coordinates(circuit))
    return np.array([s.value for s in SECTORS])[codes]


def expected_sector_counts(n_ancilla: int, rounds: int) -> Dict[Sector, int]:
    """只含逐轮探测器时各扇区的无序对个数"""
    a, r = n_ancilla, rounds
    timelike = a * (r - 1)
    spacelike = (a - 1) * r
    spacetime = 2 * (a - 1) * (r - 1)
    tail = a * (r - 1) * (r - 2) // 2 + (a - 1) * (r - 1) * (r - 2)
    total = a * r * (a * r - 1) // 2
    return {
        Sector.TIMELIKE: timelike,
        Sector.SPACELIKE: spacelike,
        Sector.SPACETIME: spacetime,
        Sector.LEAKAGE_TAIL: tail,
        Sector.OTHER: total - timelike - spacelike - spacetime - tail,
    }
