"""
误差事件调度

把 (Circuit, NoiseModel) 编译成按层对齐的随机误差事件序列。每层内事件按阶段排列：

    回渗试验 → 泄漏试验 →（理想门作用）→ X 翻转 → ADC → SDC1 → SDC2 →（测量）读出翻转

概率为 0 的事件同样保留，保证随机数消耗布局只由电路结构决定（候选模型之间可共用随机数）。
"""

import dataclasses
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Any, Dict, List, Tuple

import numpy as np

from auto_noise.circuit.models import Circuit, OpKind
from auto_noise.errors import ValidationError
from auto_noise.noise.channels import adc_from_decoherence, sdc_from_fidelity
from auto_noise.noise.models import LeakagePolicy, ModelKind, NoiseModel


class ChannelKind(str, Enum):
    """随机通道种类"""

    SEEP = "seep"
    LEAK = "leak"
    FLIP_X = "flip_x"
    ADC = "adc"
    SDC1 = "sdc1"
    SDC2 = "sdc2"
    READOUT_FLIP = "readout_flip"


class EventOrigin(str, Enum):
    """事件来源（同一通道种类下区分物理机制）"""

    LEAKAGE = "leakage"
    INIT = "init"
    RESET = "reset"
    DECOHERENCE = "decoherence"
    GATE_1Q = "gate_1q"
    GATE_2Q = "gate_2q"
    IDLE = "idle"
    RESONATOR_IDLE = "resonator_idle"
    DATA_ROUND = "data_round"
    MEASURE = "measure"


# 层内顺序
CHANNEL_RANK: Dict[ChannelKind, int] = {
    ChannelKind.SEEP: 0,
    ChannelKind.LEAK: 1,
    ChannelKind.FLIP_X: 2,
    ChannelKind.ADC: 3,
    ChannelKind.SDC1: 4,
    ChannelKind.SDC2: 5,
    ChannelKind.READOUT_FLIP: 6,
}

_ARITY = {ChannelKind.SDC2: 2}
_N_PROBS = {ChannelKind.ADC: 3}


@dataclass(frozen=True)
class ErrorEvent:
    """
    单个误差事件

    Attributes:
        layer: 层编号
        channel: 通道种类
        qubits: 作用比特（SDC2 为两个）
        probs: 概率（ADC 为 px,py,pz，其余为单个概率）
        origin: 物理来源
    """

    layer: int
    channel: ChannelKind
    qubits: Tuple[int, ...]
    probs: Tuple[float, ...]
    origin: EventOrigin

    def __post_init__(self):
        arity = _ARITY.get(self.channel, 1)
        if len(self.qubits) != arity:
            raise ValidationError(f"{self.channel.value} 需要 {arity} 个比特")
        if len(self.probs) != _N_PROBS.get(self.channel, 1):
            raise ValidationError(f"{self.channel.value} 概率个数不符: {self.probs}")
        out_of_range = any(not (0.0 <= p <= 1.0) for p in self.probs)
        if out_of_range or sum(self.probs) > 1.0 + 1e-12:
            raise ValidationError(
                f"第 {self.layer} 层 {self.channel.value}{self.qubits} 概率非法: {self.probs}"
            )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "layer": self.layer,
            "channel": self.channel.value,
            "qubits": list(self.qubits),
            "probs": list(self.probs),
            "origin": self.origin.value,
        }


@dataclass(frozen=True, eq=False)
class EventGroup:
    """同层、同通道、同来源的连续事件，向量化采样的最小单元"""

    layer: int
    channel: ChannelKind
    origin: EventOrigin
    qubits: np.ndarray  # (k, arity)
    probs: np.ndarray  # (k, n_probs)


@dataclass(frozen=True)
class ErrorSchedule:
    """
    编译后的误差调度

    Attributes:
        n_qubits: 比特数
        n_layers: 层数
        model_kind: 来源模型种类
        events: 按层、按阶段排序的事件
    """

    n_qubits: int
    n_layers: int
    model_kind: ModelKind
    events: Tuple[ErrorEvent, ...]

    @cached_property
    def layer_groups(self) -> Tuple[Tuple[EventGroup, ...], ...]:
        """每层的事件组（顺序即随机数消耗顺序）"""
        per_layer: List[List[EventGroup]] = [[] for _ in range(self.n_layers)]
        run: List[ErrorEvent] = []

        def flush():
            if not run:
                return
            head = run[0]
            per_layer[head.layer].append(
                EventGroup(
                    layer=head.layer,
                    channel=head.channel,
                    origin=head.origin,
                    qubits=np.array([e.qubits for e in run], dtype=np.intp),
                    probs=np.array([e.probs for e in run], dtype=np.float64),
                )
            )
            run.clear()

        for event in self.events:
            if run and (
                event.layer != run[0].layer
                or event.channel != run[0].channel
                or event.origin != run[0].origin
            ):
                flush()
            run.append(event)
        flush()
        return tuple(tuple(g) for g in per_layer)

    @property
    def measurement_sites(self) -> Tuple[ErrorEvent, ...]:
        return tuple(e for e in self.events if e.channel == ChannelKind.READOUT_FLIP)

    def events_in_layer(self, layer: int) -> List[ErrorEvent]:
        return [e for e in self.events if e.layer == layer]

    def summary(self) -> Dict[str, int]:
        """按 `通道/来源` 统计事件个数"""
        counts = Counter(f"{e.channel.value}/{e.origin.value}" for e in self.events)
        return dict(sorted(counts.items()))

    def dumps(self) -> str:
        """规范文本表示（相同输入字节一致）"""
        lines = [
            f"schedule n={self.n_qubits} layers={self.n_layers} "
            f"kind={self.model_kind.value}"
        ]
        for e in self.events:
            q = ",".join(str(x) for x in e.qubits)
            p = ",".join(repr(x) for x in e.probs)
            lines.append(f"{e.layer} {e.channel.value} {e.origin.value} {q} {p}")
        return "\n".join(lines) + "\n"


# ==================== 编译 ====================


def _require_paems_coverage(circuit: Circuit, model: NoiseModel) -> None:
    if model.n_qubits < circuit.n_qubits:
        raise ValidationError(
            f"缺少比特 {model.n_qubits} 的参数（电路共 {circuit.n_qubits} 个比特）"
        )
    for layer in circuit.layers:
        for op in layer.ops_of(OpKind.ENTANGLER):
            if model.coupler(*op.targets) is None:
                raise ValidationError(f"缺少耦合器 {op.targets[0]}-{op.targets[1]} 的参数")


def _compile_paems(circuit: Circuit, model: NoiseModel) -> List[ErrorEvent]:
    _require_paems_coverage(circuit, model)
    events: List[ErrorEvent] = []
    policy = model.leakage_policy
    all_qubits = range(circuit.n_qubits)
    adc_cache: Dict[Tuple[int, float], Tuple[float, float, float]] = {}

    for li, layer in enumerate(circuit.layers):
        cx_ops = layer.ops_of(OpKind.ENTANGLER)
        cx_qubits = [q for op in cx_ops for q in op.targets]
        resets = [op.targets[0] for op in layer.ops_of(OpKind.RESET)]

        if policy == LeakagePolicy.GATE_ONLY:
            seep_sites, leak_sites = list(cx_qubits), list(cx_qubits)
        elif policy == LeakagePolicy.EVERY_LAYER:
            seep_sites, leak_sites = list(all_qubits), list(all_qubits)
        else:
            seep_sites, leak_sites = list(all_qubits) + resets, list(cx_qubits)

        for q in seep_sites:
            events.append(
                ErrorEvent(
                    li,
                    ChannelKind.SEEP,
                    (q,),
                    (model.qubits[q].p_seep,),
                    EventOrigin.LEAKAGE,
                )
            )
        for q in leak_sites:
            events.append(
                ErrorEvent(
                    li,
                    ChannelKind.LEAK,
                    (q,),
                    (model.qubits[q].p_leak,),
                    EventOrigin.LEAKAGE,
                )
            )

        initial = layer.round == 0
        for q in resets:
            params = model.qubits[q]
            p = params.p_init if initial else params.p_reset
            origin = EventOrigin.INIT if initial else EventOrigin.RESET
            events.append(ErrorEvent(li, ChannelKind.FLIP_X, (q,), (p,), origin))

        duration = layer.duration_ns
        for q in all_qubits:
            key = (q, duration)
            if key not in adc_cache:
                params = model.qubits[q]
                adc_cache[key] = adc_from_decoherence(params.t1, params.t2, duration)
            events.append(
                ErrorEvent(
                    li, ChannelKind.ADC, (q,), adc_cache[key], EventOrigin.DECOHERENCE
                )
            )

        for op in layer.ops_of(OpKind.HADAMARD):
            q = op.targets[0]
            p = sdc_from_fidelity(model.qubits[q].f1q, 1)
            events.append(
                ErrorEvent(li, ChannelKind.SDC1, (q,), (p,), EventOrigin.GATE_1Q)
            )
        for op in cx_ops:
            p = sdc_from_fidelity(model.coupler(*op.targets).f2q, 2)
            events.append(
                ErrorEvent(li, ChannelKind.SDC2, op.targets, (p,), EventOrigin.GATE_2Q)
            )

        for q, _ in circuit.measure_sites(li):
            events.append(
                ErrorEvent(
                    li,
                    ChannelKind.READOUT_FLIP,
                    (q,),
                    (model.qubits[q].p_readout,),
                    EventOrigin.MEASURE,
                )
            )
    return events


def compile_schedule(circuit: Circuit, model: NoiseModel) -> ErrorSchedule:
    """
    编译误差调度（纯函数）

    Args:
        circuit: 电路
        model: 噪声模型（PAEMS 或基线）

    Returns:
        ErrorSchedule
    """
    if model.kind == ModelKind.PAEMS:
        events = _compile_paems(circuit, model)
    else:
        from auto_noise.noise.baselines import compile_baseline

        events = compile_baseline(circuit, model)
    events.sort(key=lambda e: (e.layer, CHANNEL_RANK[e.channel]))
    return ErrorSchedule(
        n_qubits=circuit.n_qubits,
        n_layers=len(circuit.layers),
        model_kind=model.kind,
        events=tuple(events),
    )


def scale_events(
    schedule: ErrorSchedule, channels: Tuple[ChannelKind, ...]
) -> ErrorSchedule:
    """只保留指定通道的概率，其余置 0（用于单通道隔离验证）"""
    kept = []
    for e in schedule.events:
        if e.channel in channels:
            kept.append(e)
        else:
            kept.append(dataclasses.replace(e, probs=tuple(0.0 for _ in e.probs)))
    return dataclasses.replace(schedule, events=tuple(kept))
