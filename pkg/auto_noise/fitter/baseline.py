"""
基线模型的最优物理错误率选择
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from auto_noise.analysis.correlation import sector_difference
from auto_noise.analysis.distribution import state_distribution, tvd
from auto_noise.circuit.models import Circuit
from auto_noise.errors import ValidationError
from auto_noise.fitter.objective import (
    DatasetLike,
    as_runs,
    multiround_stats,
    simulate,
)
from auto_noise.models import Dataset
from auto_noise.noise.models import ModelKind, NoiseModel

logger = logging.getLogger(__name__)


@dataclass
class BaselineSelection:
    """网格搜索结果"""

    kind: ModelKind
    p_opt: float
    losses: Dict[float, float] = field(default_factory=dict)
    metric: str = "sector"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "p_opt": self.p_opt,
            "metric": self.metric,
            "grid": [{"p": p, "loss": loss} for p, loss in sorted(self.losses.items())],
        }


def select_baseline_p(
    kind: ModelKind,
    data: DatasetLike,
    circuit: Circuit,
    p_grid: Sequence[float],
    *,
    shots: Optional[int] = None,
    seed: int = 1,
    estimator: str = "exact",
    weights: Optional[Dict[str, float]] = None,
    threads: int = 1,
) -> BaselineSelection:
    """
    在网格上选取使模型与实验差异最小的 p

    多轮电路用逐扇区相关差之和，单轮电路用 TVD。所有网格点使用同一模拟种子；
    损失相同时取较小的 p。

    Args:
        kind: 基线模型种类
        data: 实验数据（一次或多次运行）
        circuit: 电路
        p_grid: 候选 p
        shots: 模拟 shot 数（默认与数据一致）
        seed: 模拟种子
        estimator: 相关估计量
        weights: 扇区权重（默认 timelike/spacelike/spacetime 各 1）
        threads: 采样线程数

    Returns:
        BaselineSelection
    """
    kind = ModelKind(kind)
    if not kind.is_baseline:
        raise ValidationError(f"{kind.value} 不是基线模型")
    grid = sorted({float(p) for p in p_grid})
    if not grid:
        raise ValidationError("p_grid 不能为空")

    runs = as_runs(data)
    single = circuit.rounds == 1
    if single:
        merged = runs[0] if len(runs) == 1 else Dataset.concat(runs)
        target_dist = state_distribution(merged)
        n_shots = shots or merged.n_shots
    else:
        target = multiround_stats(runs, circuit, estimator)
        n_shots = shots or target.n_shots

    losses: Dict[float, float] = {}
    best_p, best_loss = grid[0], float("inf")
    for p in grid:
        model = NoiseModel.baseline(kind, p)
        dataset = simulate(circuit, model, n_shots, seed, threads)
        if single:
            loss = tvd(state_distribution(dataset), target_dist)
        else:
            stats = multiround_stats(dataset, circuit, estimator)
            loss = sector_difference(stats.report, target.report).total(weights)
        losses[p] = loss
        logger.debug(f"{kind.value} p={p}: loss={loss:.6g}")
        if loss < best_loss:
            best_p, best_loss = p, loss

    logger.info(f"{kind.value} 最优 p = {best_p} (loss={best_loss:.6g})")
    return BaselineSelection(
        kind=kind, p_opt=best_p, losses=losses, metric="tvd" if single else "sector"
    )


def baseline_grid(kind: ModelKind) -> List[float]:
    """各基线模型的默认搜索网格"""
    centers = {
        ModelKind.CIRCUIT: 0.025,
        ModelKind.CODE_CAPACITY: 0.15,
        ModelKind.PHENOMENOLOGICAL: 0.075,
        ModelKind.SD6: 0.02,
        ModelKind.SI1000: 0.015,
    }
    center = centers[ModelKind(kind)]
    return [round(center * f, 6) for f in (0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0)]
