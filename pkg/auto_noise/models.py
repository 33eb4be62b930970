"""
公共数据模型

采样、分析、读写模块之间共享的数据结构
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Sequence

import numpy as np

from auto_noise.errors import ValidationError


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    逐 shot 的测量记录

    Attributes:
        bits: uint8 数组 (n_shots, n_measurements)，取值 0/1，测量顺序与电路一致
        metadata: 运行元数据（电路描述、种子、模型种类、工具版本等）
    """

    bits: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if bits.ndim != 2:
            raise ValidationError(f"bits 必须是二维数组，实际维度 {bits.ndim}")
        if bits.size and bits.max() > 1:
            raise ValidationError("bits 只能包含 0/1")
        object.__setattr__(self, "bits", bits)

    @property
    def n_shots(self) -> int:
        return int(self.bits.shape[0])

    @property
    def n_measurements(self) -> int:
        return int(self.bits.shape[1])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(
            np.array_equal(self.bits, other.bits)
        )

    def __hash__(self) -> int:
        return hash((self.bits.shape, self.bits.tobytes()))

    @classmethod
    def concat(cls, parts: Sequence["Dataset"]) -> "Dataset":
        if not parts:
            raise ValidationError("至少需要一个数据集")
        widths = {p.n_measurements for p in parts}
        if len(widths) != 1:
            raise ValidationError(f"测量数不一致: {sorted(widths)}")
        bits = np.concatenate([p.bits for p in parts], axis=0)
        return cls(bits, dict(parts[0].metadata))

    def split_runs(self, run_size: int) -> List["Dataset"]:
        """按固定 shot 数切分成多次运行"""
        if run_size < 1 or self.n_shots % run_size != 0:
            raise ValidationError(f"shot 数 {self.n_shots} 不能被 run_size={run_size} 整除")
        return [
            Dataset(self.bits[i : i + run_size], dict(self.metadata, run=k))
            for k, i in enumerate(range(0, self.n_shots, run_size))
        ]

    def iter_batches(self, batch_shots: int) -> Iterator[np.ndarray]:
        for start in range(0, self.n_shots, batch_shots):
            yield self.bits[start : start + batch_shots]


@dataclass(frozen=True)
class StreamSummary:
    """流式采样的汇总信息"""

    shots_delivered: int
    batches: int
    seconds: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "shots_delivered": self.shots_delivered,
            "batches": self.batches,
            "seconds": self.seconds,
        }
