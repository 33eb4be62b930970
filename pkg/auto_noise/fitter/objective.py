"""
拟合目标：实验统计量与模拟统计量的比较

多轮模式比较相关矩阵（逐扇区）、探测事件比例曲线与第一轮逐辅助比特比例；
单轮模式比较输出态分布的 TVD。
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from auto_noise.analysis.correlation import (
    CorrelationReport,
    average_reports,
    correlation_matrix,
    sector_difference,
)
from auto_noise.analysis.detections import (
    ancilla_fraction,
    detection_fraction,
    extract_detections,
    fraction_rms,
    fraction_slope,
)
from auto_noise.analysis.distribution import StateDistribution, state_distribution, tvd
from auto_noise.circuit.models import Circuit
from auto_noise.errors import AutoNoiseError, ValidationError
from auto_noise.fitter.models import FractionTerm, Objective
from auto_noise.models import Dataset
from auto_noise.noise.models import NoiseModel
from auto_noise.noise.params import ParamMask, apply_vector
from auto_noise.noise.schedule import compile_schedule
from auto_noise.sampler.frame import SamplerConfig, sample

logger = logging.getLogger(__name__)

DatasetLike = Union[Dataset, Sequence[Dataset]]


def as_runs(data: DatasetLike) -> list:
    runs = [data] if isinstance(data, Dataset) else list(data)
    if not runs:
        raise ValidationError("至少需要一个数据集")
    return runs


@dataclass(frozen=True)
class MultiroundStats:
    """多轮实验的统计量"""

    report: CorrelationReport
    fraction: np.ndarray
    round1: np.ndarray
    n_shots: int

    @property
    def late_start(self) -> int:
        return max(2, self.fraction.size // 2)


def multiround_stats(
    data: DatasetLike, circuit: Circuit, estimator: str = "exact"
) -> MultiroundStats:
    """
    由一次或多次运行计算统计量：相关矩阵先逐次计算再平均，比例曲线按 shot 汇总
    """
    runs = as_runs(data)
    tensors = [extract_detections(run, circuit) for run in runs]
    reports = [correlation_matrix(t, estimator) for t in tensors]
    report = reports[0] if len(reports) == 1 else average_reports(reports)
    shots = np.array([t.n_shots for t in tensors], dtype=np.float64)
    fraction = np.average(
        [detection_fraction(t) for t in tensors], axis=0, weights=shots
    )
    round1 = np.average(
        [ancilla_fraction(t, 1) for t in tensors], axis=0, weights=shots
    )
    return MultiroundStats(
        report=report, fraction=fraction, round1=round1, n_shots=int(shots.sum())
    )


def multiround_loss(
    sim: MultiroundStats, target: MultiroundStats, objective: Objective
) -> float:
    loss = 0.0
    if objective.needs_correlation:
        diff = sector_difference(sim.report, target.report)
        loss += (
            objective.w_time * diff.timelike
            + objective.w_space * diff.spacelike
            + objective.w_spacetime * diff.spacetime
            + objective.w_leak * diff.leakage_tail
        )
    if objective.w_fraction > 0:
        if objective.fraction_term == FractionTerm.SLOPE:
            start = target.late_start
            term = abs(
                fraction_slope(sim.fraction, start)
                - fraction_slope(target.fraction, start)
            )
        else:
            term = fraction_rms(sim.fraction, target.fraction)
        loss += objective.w_fraction * term
    if objective.w_prep > 0:
        loss += objective.w_prep * fraction_rms(sim.round1, target.round1)
    return float(loss)


def simulate(
    circuit: Circuit, model: NoiseModel, shots: int, seed: int, threads: int = 1
) -> Dataset:
    schedule = compile_schedule(circuit, model)
    return sample(
        circuit, schedule, SamplerConfig(shots=shots, master_seed=seed, threads=threads)
    )


class MaskedLoss(ABC):
    """
    参数向量 → 损失

    把向量写回模型、模拟、与目标比较。模型非法或模拟失败时返回 +inf。
    """

    def __init__(
        self,
        circuit: Circuit,
        base_model: NoiseModel,
        mask: ParamMask,
        shots: int,
        seed: int,
    ):
        self.circuit = circuit
        self.base_model = base_model
        self.mask = mask
        self.shots = shots
        self.seed = seed

    def model_at(self, vector) -> NoiseModel:
        return apply_vector(self.base_model, self.mask, vector)

    @abstractmethod
    def loss_of_model(self, model: NoiseModel, seed: int) -> float:
        """在给定评估种子下模拟 model 并返回损失"""
        pass

    def __call__(self, vector, seed: Optional[int] = None) -> float:
        try:
            model = self.model_at(vector)
            return self.loss_of_model(model, self.seed if seed is None else seed)
        except (AutoNoiseError, FloatingPointError) as e:
            logger.debug(f"候选不可行: {e}")
            return math.inf


class MultiroundLoss(MaskedLoss):
    def __init__(
        self,
        circuit: Circuit,
        base_model: NoiseModel,
        mask: ParamMask,
        target: MultiroundStats,
        objective: Objective,
        shots: int,
        seed: int,
        estimator: str = "exact",
    ):
        super().__init__(circuit, base_model, mask, shots, seed)
        self.target = target
        self.objective = objective
        self.estimator = estimator

    def loss_of_model(self, model: NoiseModel, seed: int) -> float:
        dataset = simulate(self.circuit, model, self.shots, seed)
        stats = multiround_stats(dataset, self.circuit, self.estimator)
        return multiround_loss(stats, self.target, self.objective)


class TvdLoss(MaskedLoss):
    def __init__(
        self,
        circuit: Circuit,
        base_model: NoiseModel,
        mask: ParamMask,
        target: StateDistribution,
        shots: int,
        seed: int,
    ):
        super().__init__(circuit, base_model, mask, shots, seed)
        self.target = target

    def loss_of_model(self, model: NoiseModel, seed: int) -> float:
        dataset = simulate(self.circuit, model, self.shots, seed)
        return tvd(state_distribution(dataset), self.target)
