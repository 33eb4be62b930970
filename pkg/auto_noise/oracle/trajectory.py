"""
参考预言机：小规模态矢量蒙特卡洛轨迹

与帧采样器读取同一事件流（auto_noise.sampler.events），但把事件作为显式算符作用在
态矢量上，测量按 Born 规则坍缩。泄漏用每比特的经典标记表示：泄漏时比特被坍缩并与其余
比特解耦，回渗时重置到随机计算基态。坍缩使用同一 Philox 密钥下的独立流。

态矢量形状 (n_shots, 2**n_qubits)，比特 q 对应下标的第 q 位。
"""

import logging
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from auto_noise.analysis.detections import extract_detections
from auto_noise.circuit.builder import build_repetition_code
from auto_noise.circuit.models import Basis, Circuit, OpKind
from auto_noise.errors import AutoNoiseError, ValidationError
from auto_noise.models import Dataset
from auto_noise.noise.models import NoiseModel
from auto_noise.noise.schedule import (
    ChannelKind,
    ErrorSchedule,
    compile_schedule,
    scale_events,
)
from auto_noise.sampler.events import check_schedule, draw_layer, normalize_inject
from auto_noise.sampler.frame import SamplerConfig, dataset_metadata, sample
from auto_noise.sampler.rng import COLLAPSE_STREAM, block_generator, block_ranges

logger = logging.getLogger(__name__)

MAX_QUBITS = 10
NORM_TOLERANCE = 1e-10
_SQRT_HALF = np.sqrt(0.5)


class _Trajectories:
    """一块 shot 的态矢量集合"""

    def __init__(self, n_qubits: int, n_shots: int, collapse_rng: np.random.Generator):
        self.nq = n_qubits
        self.n = n_shots
        self.rng = collapse_rng
        self.psi = np.zeros((n_shots, 2**n_qubits), dtype=np.complex128)
        self.psi[:, 0] = 1.0
        self._cx_perm: Dict[Tuple[int, int], np.ndarray] = {}

    def _view(self, q: int) -> np.ndarray:
        return self.psi.reshape(self.n, 2 ** (self.nq - q - 1), 2, 2**q)

    def apply_x(self, q: int, mask: np.ndarray) -> None:
        if mask.any():
            v = self._view(q)
            v[mask] = v[mask][:, :, ::-1, :]

    def apply_z(self, q: int, mask: np.ndarray) -> None:
        if mask.any():
            v = self._view(q)
            v[mask, :, 1, :] *= -1

    def apply_h(self, q: int, mask: np.ndarray) -> None:
        if mask.any():
            v = self._view(q)
            a = v[mask, :, 0, :]
            b = v[mask, :, 1, :]
            v[mask, :, 0, :] = (a + b) * _SQRT_HALF
            v[mask, :, 1, :] = (a - b) * _SQRT_HALF

    def apply_cx(self, c: int, t: int, mask: np.ndarray) -> None:
        if not mask.any():
            return
        perm = self._cx_perm.get((c, t))
        if perm is None:
            idx = np.arange(2**self.nq)
            perm = idx ^ (((idx >> c) & 1) << t)
            self._cx_perm[(c, t)] = perm
        self.psi[mask] = self.psi[mask][:, perm]

    def collapse(self, q: int, mask: Optional[np.ndarray] = None) -> np.ndarray:
        """
        对比特 q 做计算基测量并坍缩（只作用于 mask 选中的 shot）

        每次调用都为全部 shot 消耗一个坍缩随机数。
        """
        if mask is None:
            mask = np.ones(self.n, dtype=bool)
        v = self._view(q)
        p1 = np.sum(np.abs(v[:, :, 1, :]) ** 2, axis=(1, 2))
        u = self.rng.random(self.n)
        outcome = u < p1
        v[mask & outcome, :, 0, :] = 0
        v[mask & ~outcome, :, 1, :] = 0
        norm = np.sqrt(np.where(outcome, p1, 1.0 - p1))
        norm = np.where(mask & (norm > 0), norm, 1.0)
        self.psi /= norm[:, None]
        return outcome

    def set_bit(self, q: int, bit: np.ndarray, mask: np.ndarray) -> None:
        """坍缩后把比特 q 置为 |bit>"""
        outcome = self.collapse(q, mask)
        self.apply_x(q, mask & (outcome != bit))

    def check_norm(self, layer: int) -> None:
        norms = np.sum(np.abs(self.psi) ** 2, axis=1)
        worst = float(np.max(np.abs(norms - 1.0))) if norms.size else 0.0
        if worst > NORM_TOLERANCE:
            raise AutoNoiseError(f"第 {layer} 层后态矢量范数偏离 1: {worst:.3e}")


def _simulate_block(
    circuit: Circuit,
    schedule: ErrorSchedule,
    master_seed: int,
    block: int,
    n_shots: int,
    inject: Optional[dict],
) -> np.ndarray:
    event_rng = block_generator(master_seed, block)
    state = _Trajectories(
        circuit.n_qubits, n_shots, block_generator(master_seed, block, COLLAPSE_STREAM)
    )
    nq = circuit.n_qubits
    leaked = np.zeros((nq, n_shots), dtype=bool)
    out = np.zeros((circuit.measurement_count, n_shots), dtype=bool)
    everyone = np.ones(n_shots, dtype=bool)

    for li, layer in enumerate(circuit.layers):
        groups = schedule.layer_groups[li]
        d = draw_layer(event_rng, circuit, groups, li, n_shots, inject)

        for q in range(nq):
            returning = leaked[q] & d.seep[q]
            if returning.any():
                state.set_bit(q, d.seep_x[q], returning)
                state.apply_z(q, returning & d.seep_z[q])
            leaked[q] &= ~d.seep[q]
            newly = d.leak[q] & ~leaked[q]
            if newly.any():
                state.collapse(q, newly)
            leaked[q] |= d.leak[q]

        for op in layer.operations:
            if op.kind == OpKind.RESET:
                q = op.targets[0]
                state.set_bit(q, np.zeros(n_shots, dtype=bool), everyone)
            elif op.kind == OpKind.HADAMARD:
                q = op.targets[0]
                state.apply_h(q, ~leaked[q])
            elif op.kind == OpKind.ENTANGLER:
                c, t = op.targets
                state.apply_cx(c, t, ~leaked[c] & ~leaked[t])
                for partner, other in ((c, t), (t, c)):
                    hit = leaked[other] & ~leaked[partner]
                    state.apply_x(partner, hit & d.partner_x[partner])
                    state.apply_z(partner, hit & d.partner_z[partner])

        for q in range(nq):
            active = ~leaked[q]
            # Y = iXZ：全局相位不影响测量统计
            state.apply_z(q, active & d.pauli_z[q])
            state.apply_x(q, active & d.pauli_x[q])

        for q, m in circuit.measure_sites(li):
            outcome = state.collapse(q)
            out[m] = np.where(leaked[q], d.leaked_bits[q], outcome ^ d.readout_flip[q])

        state.check_norm(li)

    return np.ascontiguousarray(out.T, dtype=np.uint8)


def oracle_sample(
    circuit: Circuit,
    schedule: ErrorSchedule,
    shots: int,
    seed: int,
    *,
    inject: Optional[dict] = None,
) -> Dataset:
    """
    用态矢量轨迹采样（慢，仅用于校验帧采样器）

    Args:
        circuit: 电路（n_qubits ≤ 10）
        schedule: 误差调度
        shots: shot 数
        seed: 主种子
        inject: 确定性 Pauli 注入 {(layer, qubit): "X"|"Y"|"Z"}

    Returns:
        Dataset，格式与 sample 相同
    """
    if circuit.n_qubits > MAX_QUBITS:
        raise ValidationError(
            f"预言机最多支持 {MAX_QUBITS} 个比特，实际 {circuit.n_qubits}"
        )
    cfg = SamplerConfig(shots=shots, master_seed=seed, threads=1)
    check_schedule(circuit, schedule)
    per_layer = normalize_inject(inject, circuit)
    parts = [
        _simulate_block(circuit, schedule, seed, k, stop - start, per_layer)
        for k, start, stop in block_ranges(shots)
    ]
    return Dataset(
        bits=np.concatenate(parts, axis=0),
        metadata=dataset_metadata(circuit, schedule, cfg, "oracle"),
    )


# ==================== 单通道交叉校验 ====================

CHECK_CHANNELS: Dict[str, Tuple[ChannelKind, ...]] = {
    "adc": (ChannelKind.ADC,),
    "sdc1": (ChannelKind.SDC1,),
    "sdc2": (ChannelKind.SDC2,),
    "spam": (ChannelKind.FLIP_X, ChannelKind.READOUT_FLIP),
    "leakage": (ChannelKind.LEAK, ChannelKind.SEEP),
    "full": tuple(ChannelKind),
}


@dataclass
class OracleCheckResult:
    """
    单通道交叉校验结果

    Attributes:
        channel: 通道类别
        marginal_z: 每个探测器边缘概率差的 z 分数
        pair_z_max: 每对探测器联合概率差的 z 分数中的最大绝对值
        threshold: 单次比较的 σ 阈值；多次比较时按 Bonferroni 校正放宽
    """

    channel: str
    n_qubits: int
    rounds: int
    shots: int
    seed: int
    marginal_z: List[float] = field(default_factory=list)
    pair_z_max: float = 0.0
    threshold: float = 3.0

    @property
    def max_marginal_z(self) -> float:
        return max((abs(z) for z in self.marginal_z), default=0.0)

    def _adjusted(self, comparisons: int) -> float:
        alpha = 2.0 * (1.0 - NormalDist().cdf(self.threshold))
        quantile = NormalDist().inv_cdf(1.0 - alpha / (2.0 * max(1, comparisons)))
        return max(self.threshold, quantile)

    @property
    def marginal_threshold(self) -> float:
        return self._adjusted(len(self.marginal_z))

    @property
    def pair_threshold(self) -> float:
        n = len(self.marginal_z)
        return self._adjusted(n * (n - 1) // 2)

    @property
    def passed(self) -> bool:
        return (
            self.max_marginal_z <= self.marginal_threshold
            and self.pair_z_max <= self.pair_threshold
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "channel": self.channel,
            "n_qubits": self.n_qubits,
            "rounds": self.rounds,
            "shots": self.shots,
            "seed": self.seed,
            "marginal_z": self.marginal_z,
            "max_marginal_z": self.max_marginal_z,
            "marginal_threshold": self.marginal_threshold,
            "pair_z_max": self.pair_z_max,
            "pair_threshold": self.pair_threshold,
            "passed": self.passed,
        }


def _two_sample_z(pa: np.ndarray, pb: np.ndarray, n: int) -> np.ndarray:
    pooled = 0.5 * (pa + pb)
    se = np.sqrt(np.maximum(pooled * (1.0 - pooled), 0.0) * 2.0 / n)
    diff = pa - pb
    degenerate = np.where(diff == 0, 0.0, np.inf)
    return np.where(se > 0, diff / np.where(se > 0, se, 1.0), degenerate)


def check_model(n_qubits: int) -> NoiseModel:
    """交叉校验使用的默认 PAEMS 模型（各通道都足够强以便统计上可见）"""
    return NoiseModel.uniform_paems(
        n_qubits,
        t1=20.0,
        t2=25.0,
        f1q=0.99,
        f2q=0.95,
        p_init=0.02,
        p_reset=0.03,
        p_readout=0.04,
        p_leak=0.02,
        p_seep=0.1,
    )


def oracle_check(
    n_qubits: int = 5,
    rounds: int = 2,
    channel: str = "full",
    shots: int = 100_000,
    seed: int = 0,
    basis: Basis = Basis.Z,
    model: Optional[NoiseModel] = None,
) -> OracleCheckResult:
    """
    隔离单个通道类别，分别用预言机和帧采样器采样，比较探测器边缘概率与两两联合概率

    Args:
        n_qubits: 链长（≤ 10）
        rounds: 轮数
        channel: adc / sdc1 / sdc2 / spam / leakage / full
        shots: 每个模拟器的 shot 数
        seed: 种子（两个模拟器使用不同种子，保证比较的是分布而非逐 shot 一致性）
        basis: 码基矢
        model: 覆盖默认的校验模型

    Returns:
        OracleCheckResult
    """

    if channel not in CHECK_CHANNELS:
        raise ValidationError(f"未知通道类别 {channel!r}，可选 {sorted(CHECK_CHANNELS)}")
    circuit = build_repetition_code(n_qubits, rounds, basis=basis)
    model = model or check_model(n_qubits)
    schedule = scale_events(compile_schedule(circuit, model), CHECK_CHANNELS[channel])

    frame = sample(circuit, schedule, SamplerConfig(shots=shots, master_seed=seed))
    oracle = oracle_sample(circuit, schedule, shots, seed + 1)
    a = extract_detections(frame, circuit).flat().astype(np.float64)
    b = extract_detections(oracle, circuit).flat().astype(np.float64)

    marginal = _two_sample_z(a.mean(axis=0), b.mean(axis=0), shots)
    joint_a = (a.T @ a) / shots
    joint_b = (b.T @ b) / shots
    iu = np.triu_indices(a.shape[1], k=1)
    pair = _two_sample_z(joint_a[iu], joint_b[iu], shots)

    result = OracleCheckResult(
        channel=channel,
        n_qubits=n_qubits,
        rounds=rounds,
        shots=shots,
        seed=seed,
        marginal_z=[float(z) for z in marginal],
        pair_z_max=float(np.max(np.abs(pair))) if pair.size else 0.0,
    )
    logger.info(
        f"预言机校验 channel={channel}: max|z| 边缘={result.max_marginal_z:.2f} "
        f"联合={result.pair_z_max:.2f} -> {'通过' if result.passed else '失败'}"
    )
    return result
