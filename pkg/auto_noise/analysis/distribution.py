"""
输出态分布与总变差距离 (TVD)

2^N 远大于 shot 数，只保存出现过的比特串；缺失的比特串概率为 0。
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from auto_noise.errors import ValidationError
from auto_noise.models import Dataset


@dataclass(frozen=True)
class StateDistribution:
    """
    经验分布

    Attributes:
        probs: 比特串（测量顺序，'0'/'1'）→ 概率
        n_bits: 比特串长度
        n_shots: 样本数
    """

    probs: Dict[str, float] = field(default_factory=dict)
    n_bits: int = 0
    n_shots: int = 0

    def probability(self, bitstring: str) -> float:
        return self.probs.get(bitstring, 0.0)

    @property
    def all_zero(self) -> float:
        return self.probability("0" * self.n_bits)

    def to_dict(self) -> Dict[str, object]:
        return {
            "n_bits": self.n_bits,
            "n_shots": self.n_shots,
            "probs": dict(self.probs),
        }


def _from_counts(
    rows: np.ndarray, counts: np.ndarray, n_shots: int
) -> StateDistribution:
    probs = {
        "".join("1" if b else "0" for b in row): int(c) / n_shots
        for row, c in zip(rows, counts)
    }
    return StateDistribution(probs=probs, n_bits=int(rows.shape[1]), n_shots=n_shots)


def state_distribution(
    dataset: Dataset, columns: Optional[Sequence[int]] = None
) -> StateDistribution:
    """
    统计输出比特串的经验分布

    Args:
        dataset: 测量记录
        columns: 参与统计的测量编号（默认全部）
    """
    bits = dataset.bits if columns is None else dataset.bits[:, list(columns)]
    if bits.shape[0] == 0:
        raise ValidationError("空数据集没有输出分布")
    rows, counts = np.unique(bits, axis=0, return_counts=True)
    return _from_counts(rows, counts, bits.shape[0])


def tvd(p: StateDistribution, q: StateDistribution) -> float:
    """TVD = 1/2 Σ_s |p(s) - q(s)|，在两者出现过的比特串的并集上求和"""
    if p.n_bits != q.n_bits:
        raise ValidationError(f"比特数不一致: {p.n_bits} vs {q.n_bits}")
    keys = set(p.probs) | set(q.probs)
    total = 0.5 * math.fsum(abs(p.probability(k) - q.probability(k)) for k in keys)
    return min(1.0, max(0.0, total))


def statistical_tvd_floor(
    dist: StateDistribution, shots: int, seed: int = 0, resamples: int = 8
) -> float:
    """
    统计涨落下的 TVD 下限：从分布自身多项式重采样 shots 次，与原分布比较后取平均
    """
    if shots < 1 or resamples < 1:
        raise ValidationError("shots 与 resamples 必须 ≥ 1")
    keys = sorted(dist.probs)
    probs = np.array([dist.probs[k] for k in keys], dtype=np.float64)
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    values = []
    for _ in range(resamples):
        counts = rng.multinomial(shots, probs)
        resampled = StateDistribution(
            probs={k: c / shots for k, c in zip(keys, counts) if c},
            n_bits=dist.n_bits,
            n_shots=shots,
        )
        values.append(tvd(dist, resampled))
    return float(np.mean(values))
