"""
基线噪声模型

各模型按其原始定义以全局错误率 p 的倍数给出每类位点的概率：

| 模型     | 1q 门 | 2q 门 | 门层空闲 | 测量/复位层空闲 | 复位翻转 | 测量翻转 | 每轮数据 X |
|----------|-------|-------|----------|-----------------|----------|----------|------------|
| circuit  | p     | p     | -        | -               | -        | p        | -          |
| cc       | -     | -     | -        | -               | -        | -        | p          |
| phe      | -     | -     | -        | -               | -        | p        | p          |
| sd6      | p     | p     | p        | p               | p        | p        | -          |
| si1000   | p/10  | p     | p/10     | 2p              | 2p       | 5p       | -          |

门误差为对称退极化（SDC，总概率如上），翻转为 X / 读出翻转；所有概率截断到 1。
"""

from typing import Dict, List, Optional

from auto_noise.circuit.models import Circuit, OpKind
from auto_noise.noise.models import ModelKind, NoiseModel
from auto_noise.noise.schedule import ChannelKind, ErrorEvent, EventOrigin

BASELINE_TABLE: Dict[ModelKind, Dict[str, Optional[float]]] = {
    ModelKind.CIRCUIT: {"gate_1q": 1.0, "gate_2q": 1.0, "measure": 1.0},
    ModelKind.CODE_CAPACITY: {"data_round": 1.0},
    ModelKind.PHENOMENOLOGICAL: {"data_round": 1.0, "measure": 1.0},
    ModelKind.SD6: {
        "gate_1q": 1.0,
        "gate_2q": 1.0,
        "idle": 1.0,
        "resonator_idle": 1.0,
        "reset": 1.0,
        "measure": 1.0,
    },
    ModelKind.SI1000: {
        "gate_1q": 0.1,
        "gate_2q": 1.0,
        "idle": 0.1,
        "resonator_idle": 2.0,
        "reset": 2.0,
        "measure": 5.0,
    },
}


def _prob(p: float, factor: Optional[float]) -> float:
    return min(1.0, p * factor) if factor is not None else 0.0


def compile_baseline(circuit: Circuit, model: NoiseModel) -> List[ErrorEvent]:
    """按上表为基线模型生成事件"""
    table = BASELINE_TABLE[model.kind]
    p = float(model.p)
    events: List[ErrorEvent] = []

    # 每轮开始前作用在数据比特上的码基翻转，放在数据比特处于计算基的位置：
    # 本轮以 Hadamard 层开头时放在该层之后，否则放在上一轮（或初始化层）的最后一层
    data_round_layers = set()
    if "data_round" in table:
        for r in range(1, circuit.rounds + 1):
            first = circuit.round_layers(r)[0]
            opens_with_h = bool(circuit.layers[first].ops_of(OpKind.HADAMARD))
            data_round_layers.add(first if opens_with_h else first - 1)

    for li, layer in enumerate(circuit.layers):
        touched = set(layer.touched)
        resonator = any(
            op.kind in (OpKind.MEASURE, OpKind.RESET) for op in layer.operations
        )
        idle = [q for q in range(circuit.n_qubits) if q not in touched]

        for op in layer.ops_of(OpKind.RESET):
            if "reset" in table:
                origin = EventOrigin.INIT if layer.round == 0 else EventOrigin.RESET
                events.append(
                    ErrorEvent(
                        li,
                        ChannelKind.FLIP_X,
                        op.targets,
                        (_prob(p, table["reset"]),),
                        origin,
                    )
                )
        if li in data_round_layers:
            for q in circuit.data_qubits:
                events.append(
                    ErrorEvent(
                        li,
                        ChannelKind.FLIP_X,
                        (q,),
                        (_prob(p, table["data_round"]),),
                        EventOrigin.DATA_ROUND,
                    )
                )

        if "gate_1q" in table:
            for op in layer.ops_of(OpKind.HADAMARD):
                events.append(
                    ErrorEvent(
                        li,
                        ChannelKind.SDC1,
                        op.targets,
                        (_prob(p, table["gate_1q"]),),
                        EventOrigin.GATE_1Q,
                    )
                )
        idle_key = "resonator_idle" if resonator else "idle"
        if idle_key in table:
            origin = EventOrigin.RESONATOR_IDLE if resonator else EventOrigin.IDLE
            for q in idle:
                events.append(
                    ErrorEvent(
                        li, ChannelKind.SDC1, (q,), (_prob(p, table[idle_key]),), origin
                    )
                )
        if "gate_2q" in table:
            for op in layer.ops_of(OpKind.ENTANGLER):
                events.append(
                    ErrorEvent(
                        li,
                        ChannelKind.SDC2,
                        op.targets,
                        (_prob(p, table["gate_2q"]),),
                        EventOrigin.GATE_2Q,
                    )
                )
        if "measure" in table:
            for q, _ in circuit.measure_sites(li):
                events.append(
                    ErrorEvent(
                        li,
                        ChannelKind.READOUT_FLIP,
                        (q,),
                        (_prob(p, table["measure"]),),
                        EventOrigin.MEASURE,
                    )
                )
    return events
