"""
探测事件提取与探测事件比例曲线
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from auto_noise.circuit.models import Circuit
from auto_noise.errors import ValidationError
from auto_noise.models import Dataset


@dataclass(frozen=True, eq=False)
class DetectionTensor:
    """
    探测事件张量

    Attributes:
        bits: uint8 (n_shots, n_ancilla, rounds)
        final_bits: 末轮数据奇偶探测器 uint8 (n_shots, n_ancilla)，电路未启用时为 None
    """

    bits: np.ndarray
    final_bits: Optional[np.ndarray] = None

    @property
    def n_shots(self) -> int:
        return int(self.bits.shape[0])

    @property
    def n_ancilla(self) -> int:
        return int(self.bits.shape[1])

    @property
    def rounds(self) -> int:
        return int(self.bits.shape[2])

    @property
    def n_detectors(self) -> int:
        extra = self.n_ancilla if self.final_bits is not None else 0
        return self.n_ancilla * self.rounds + extra

    def flat(self) -> np.ndarray:
        """按探测器编号排列的二维数组 (n_shots, n_detectors)：轮次优先，末轮探测器在最后"""
        rows = self.bits.transpose(0, 2, 1).reshape(self.n_shots, -1)
        if self.final_bits is not None:
            rows = np.concatenate([rows, self.final_bits], axis=1)
        return np.ascontiguousarray(rows)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DetectionTensor):
            return NotImplemented
        return self.bits.shape == other.bits.shape and np.array_equal(
            self.flat(), other.flat()
        )

    __hash__ = None


def extract_detections(dataset: Dataset, circuit: Circuit) -> DetectionTensor:
    """
    由测量记录计算探测事件

    每个探测器的值是其引用的测量 bit 的异或。

    Args:
        dataset: 测量记录
        circuit: 产生该记录的电路

    Returns:
        DetectionTensor
    """
    if dataset.n_measurements != circuit.measurement_count:
        raise ValidationError(
            f"数据集每 shot {dataset.n_measurements} 个测量，"
            f"电路需要 {circuit.measurement_count} 个"
        )
    detectors = circuit.detectors
    if not detectors:
        raise ValidationError("电路没有探测器定义")

    width = max(len(d.measurements) for d in detectors)
    zero_col = dataset.n_measurements
    index = np.full((len(detectors), width), zero_col, dtype=np.intp)
    for i, det in enumerate(detectors):
        index[i, : len(det.measurements)] = det.measurements
    padded = np.concatenate(
        [dataset.bits, np.zeros((dataset.n_shots, 1), dtype=np.uint8)], axis=1
    )
    values = np.bitwise_xor.reduce(padded[:, index], axis=2)

    n_anc, rounds = circuit.n_ancilla, circuit.rounds
    bits = np.zeros((dataset.n_shots, n_anc, rounds), dtype=np.uint8)
    final = (
        np.zeros((dataset.n_shots, n_anc), dtype=np.uint8)
        if circuit.final_detectors
        else None
    )
    for i, det in enumerate(detectors):
        if det.is_final:
            final[:, det.ancilla] = values[:, i]
        else:
            bits[:, det.ancilla, det.round - 1] = values[:, i]
    return DetectionTensor(bits=bits, final_bits=final)


def detection_fraction(tensor: DetectionTensor) -> np.ndarray:
    """每轮的平均探测事件概率（对 shot 与辅助比特取平均）"""
    total = tensor.n_shots * tensor.n_ancilla
    if total == 0:
        return np.zeros(tensor.rounds)
    counts = tensor.bits.sum(axis=(0, 1), dtype=np.int64)
    return counts / float(total)


def ancilla_fraction(tensor: DetectionTensor, round_: int = 1) -> np.ndarray:
    """指定轮次每个辅助比特的探测事件概率"""
    if not 1 <= round_ <= tensor.rounds:
        raise ValidationError(f"轮次 {round_} 超出 1..{tensor.rounds}")
    return tensor.bits[:, :, round_ - 1].mean(axis=0, dtype=np.float64)


def fraction_rms(a: np.ndarray, b: np.ndarray) -> float:
    """两条比例曲线的均方根差"""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError(f"曲线长度不一致: {a.shape} vs {b.shape}")
    if a.size == 0:
        return 0.0
    return float(np.sqrt(np.mean((a - b) ** 2)))


def fraction_slope(curve: np.ndarray, start: int = 1) -> float:
    """从第 start 轮（1 起）开始的线性拟合斜率；点数不足两点时为 0"""
    curve = np.asarray(curve, dtype=np.float64)
    tail = curve[max(0, start - 1) :]
    if tail.size < 2:
        return 0.0
    rounds = np.arange(tail.size, dtype=np.float64)
    slope, _ = np.polyfit(rounds, tail, 1)
    return float(slope)
