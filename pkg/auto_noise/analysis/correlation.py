"""
探测事件两点相关

默认估计量（exact）假设每对探测器由独立的“单独触发 i / 单独触发 j / 同时触发”三种机制产生，
由一阶、二阶矩反解同时触发的概率：

    p_ij = 1/2 - 1/2 * sqrt(1 - 4 (<x_i x_j> - <x_i><x_j>) / (1 - 2<x_i> - 2<x_j> + 4<x_i x_j>))

first_order 估计量是其小概率近似：

    p_ij = (<x_i x_j> - <x_i><x_j>) / ((1 - 2<x_i>)(1 - 2<x_j>))

<x_i> 接近 1/2 或探测器恒定时，该对记为未定义（NaN）。对角线存放 <x_i>。
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from auto_noise.analysis.detections import DetectionTensor
from auto_noise.analysis.sectors import SECTOR_CODES, SECTORS, Sector, sector_codes
from auto_noise.errors import ValidationError

EPSILON = 1e-6
ESTIMATORS = ("exact", "first_order")


@dataclass(frozen=True, eq=False)
class CorrelationReport:
    """
    相关矩阵

    Attributes:
        p: (n, n) 对称矩阵，未定义项为 NaN，对角线为 <x_i>
        codes: (n, n) 扇区编码（见 sectors.SECTOR_CODES）
        ancillas / rounds: 每个探测器的坐标
        n_shots: 样本数
        estimator: 估计量名称
    """

    p: np.ndarray
    codes: np.ndarray
    ancillas: np.ndarray
    rounds: np.ndarray
    n_shots: int
    estimator: str = "exact"

    @property
    def n_detectors(self) -> int:
        return int(self.p.shape[0])

    def sector(self, i: int, j: int) -> Sector:
        return SECTORS[int(self.codes[i, j])]

    def sector_mask(self, sector: Sector) -> np.ndarray:
        """上三角中属于该扇区的位置"""
        upper = np.triu(np.ones_like(self.codes, dtype=bool), k=1)
        return upper & (self.codes == SECTOR_CODES[Sector(sector)])

    def sector_values(self, sector: Sector) -> np.ndarray:
        """该扇区中已定义的 p_ij"""
        values = self.p[self.sector_mask(sector)]
        return values[~np.isnan(values)]

    def same_geometry(self, other: "CorrelationReport") -> bool:
        return (
            self.p.shape == other.p.shape
            and np.array_equal(self.ancillas, other.ancillas)
            and np.array_equal(self.rounds, other.rounds)
        )

    def rows(self) -> List[Tuple[int, int, str, float]]:
        """(i, j, sector, p_ij)，只列上三角"""
        out = []
        n = self.n_detectors
        for i in range(n):
            for j in range(i + 1, n):
                out.append((i, j, self.sector(i, j).value, float(self.p[i, j])))
        return out


def _moments(flat: np.ndarray):
    x = flat.astype(np.float64)
    n = x.shape[0]
    # 0/1 矩阵乘积在 float64 下是精确整数计数
    joint = (x.T @ x) / n
    mean = np.diag(joint).copy()
    return mean, joint


def correlation_from_moments(
    mean: np.ndarray, joint: np.ndarray, estimator: str = "exact"
) -> np.ndarray:
    """由一阶、二阶矩计算 p_ij 矩阵"""
    if estimator not in ESTIMATORS:
        raise ValidationError(f"未知估计量 {estimator!r}，可选 {ESTIMATORS}")
    xi = mean[:, None]
    xj = mean[None, :]
    cov = joint - xi * xj
    with np.errstate(divide="ignore", invalid="ignore"):
        if estimator == "first_order":
            p = cov / ((1.0 - 2.0 * xi) * (1.0 - 2.0 * xj))
        else:
            denom = 1.0 - 2.0 * xi - 2.0 * xj + 4.0 * joint
            radicand = 1.0 - 4.0 * cov / denom
            p = 0.5 - 0.5 * np.sqrt(np.maximum(radicand, 0.0))
            p = np.where(np.abs(denom) < EPSILON, np.nan, p)

    near_half = np.abs(1.0 - 2.0 * mean) < EPSILON
    constant = (mean < EPSILON) | (mean > 1.0 - EPSILON)
    bad = near_half | constant
    p = np.where(bad[:, None] | bad[None, :], np.nan, p)
    p = 0.5 * (p + p.T)
    np.fill_diagonal(p, mean)
    return p


def correlation_matrix(
    tensor: DetectionTensor, estimator: str = "exact"
) -> CorrelationReport:
    """
    计算探测事件两点相关矩阵

    Args:
        tensor: 探测事件张量（至少 2 个 shot）
        estimator: exact 或 first_order

    Returns:
        CorrelationReport
    """
    if tensor.n_shots < 2:
        raise ValidationError(f"至少需要 2 个 shot，实际 {tensor.n_shots}")
    flat = tensor.flat()
    mean, joint = _moments(flat)
    p = correlation_from_moments(mean, joint, estimator)

    rounds_axis = np.arange(1, tensor.rounds + 1)
    ancillas = np.tile(np.arange(tensor.n_ancilla), tensor.rounds)
    rounds = np.repeat(rounds_axis, tensor.n_ancilla)
    if tensor.final_bits is not None:
        ancillas = np.concatenate([ancillas, np.arange(tensor.n_ancilla)])
        rounds = np.concatenate([rounds, np.full(tensor.n_ancilla, tensor.rounds + 1)])

    return CorrelationReport(
        p=p,
        codes=sector_codes(ancillas, rounds),
        ancillas=ancillas,
        rounds=rounds,
        n_shots=tensor.n_shots,
        estimator=estimator,
    )


def average_reports(reports: Sequence[CorrelationReport]) -> CorrelationReport:
    """逐项平均多次运行的相关矩阵（只平均已定义的项）"""
    if not reports:
        raise ValidationError("至少需要一个相关矩阵")
    head = reports[0]
    for r in reports[1:]:
        if not head.same_geometry(r):
            raise ValidationError("相关矩阵的几何结构不一致")
    stack = np.stack([r.p for r in reports])
    defined = ~np.isnan(stack)
    counts = defined.sum(axis=0)
    sums = np.where(defined, stack, 0.0).sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        mean = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    return CorrelationReport(
        p=mean,
        codes=head.codes,
        ancillas=head.ancillas,
        rounds=head.rounds,
        n_shots=sum(r.n_shots for r in reports),
        estimator=head.estimator,
    )


@dataclass(frozen=True)
class SectorDiff:
    """
    两个相关矩阵之间逐扇区的平均绝对差

    Attributes:
        timelike / spacelike / spacetime / leakage_tail: 平均绝对差（扇区为空时为 0）
        max_abs: 每个扇区的最大绝对差
    """

    timelike: float
    spacelike: float
    spacetime: float
    leakage_tail: float
    max_abs: Dict[str, float]

    def total(self, weights: Optional[Dict[str, float]] = None) -> float:
        w = weights or {"timelike": 1.0, "spacelike": 1.0, "spacetime": 1.0}
        return float(
            w.get("timelike", 0.0) * self.timelike
            + w.get("spacelike", 0.0) * self.spacelike
            + w.get("spacetime", 0.0) * self.spacetime
            + w.get("leakage_tail", 0.0) * self.leakage_tail
        )

    def to_dict(self) -> Dict[str, object]:
        return {
            "timelike": self.timelike,
            "spacelike": self.spacelike,
            "spacetime": self.spacetime,
            "leakage_tail": self.leakage_tail,
            "max_abs": dict(self.max_abs),
        }


def sector_difference(a: CorrelationReport, b: CorrelationReport) -> SectorDiff:
    """
    逐扇区平均 |a.p_ij - b.p_ij|，任一侧未定义的项被排除

    Raises:
        ValidationError: 几何结构不一致
    """
    if not a.same_geometry(b):
        raise ValidationError(
            f"相关矩阵几何不一致: {a.p.shape} vs {b.p.shape}"
        )
    diff = np.abs(a.p - b.p)
    means: Dict[Sector, float] = {}
    maxima: Dict[str, float] = {}
    for sector in (
        Sector.TIMELIKE,
        Sector.SPACELIKE,
        Sector.SPACETIME,
        Sector.LEAKAGE_TAIL,
    ):
        values = diff[a.sector_mask(sector)]
        values = values[~np.isnan(values)]
        means[sector] = float(values.mean()) if values.size else 0.0
        maxima[sector.value] = float(values.max()) if values.size else 0.0
    return SectorDiff(
        timelike=means[Sector.TIMELIKE],
        spacelike=means[Sector.SPACELIKE],
        spacetime=means[Sector.SPACETIME],
        leakage_tail=means[Sector.LEAKAGE_TAIL],
        max_abs=maxima,
    )


def correlation_strength(
    report: CorrelationReport, sector: Sector
) -> Tuple[float, float]:
    """扇区内 p_ij 的均值与标准差"""
    values = report.sector_values(sector)
    if values.size == 0:
        return float("nan"), float("nan")
    return float(values.mean()), float(values.std())


def timelike_profile(report: CorrelationReport, ancilla: int) -> np.ndarray:
    """
    某个辅助比特相邻轮次之间的 p_ij，长度 rounds-1

    刻画泄漏在轮次上的累积。
    """
    index = {
        (int(a), int(r)): i
        for i, (a, r) in enumerate(zip(report.ancillas, report.rounds))
    }
    rounds = sorted({int(r) for a, r in index if a == ancilla})
    if not rounds:
        raise ValidationError(f"不存在的辅助比特序号 {ancilla}")
    profile = [
        report.p[index[(ancilla, r)], index[(ancilla, r + 1)]]
        for r in rounds
        if (ancilla, r + 1) in index
    ]
    return np.asarray(profile, dtype=np.float64)
