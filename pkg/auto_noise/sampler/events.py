"""
逐层事件抽样

把一层的事件组解码成按比特排列的布尔矩阵 (n_qubits, n_shots)。帧采样器与预言机共用此模块，
两者因此消耗完全相同的随机数。

每层的消耗顺序固定为：
    回渗组（均匀数 + 返回态 2 bit）→ 泄漏组 → 纠缠门伙伴随机化 bit →
    Pauli 误差组（X 翻转 / ADC / SDC1 / SDC2）→ 读出翻转组 → 泄漏比特测量结果
无论比特当前是否泄漏，所有随机数都会被抽取。
"""

from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from auto_noise.circuit.models import Circuit, OpKind
from auto_noise.errors import ValidationError
from auto_noise.noise.schedule import ChannelKind, ErrorSchedule, EventGroup

InjectMap = Mapping[Tuple[int, int], str]

_PAULI_BITS = {"X": (True, False), "Y": (True, True), "Z": (False, True)}


@dataclass
class LayerDraws:
    """
    一层的抽样结果，所有字段形状均为 (n_qubits, n_shots) 的 bool 数组

    Attributes:
        seep: 回渗试验成功
        seep_x / seep_z: 回渗返回时的随机态
        leak: 泄漏试验成功
        partner_x / partner_z: 纠缠门另一端泄漏时施加到本比特的随机翻转
        pauli_x / pauli_z: 本层 Pauli 误差（泄漏比特上由模拟器忽略）
        readout_flip: 读出翻转
        leaked_bits: 泄漏比特被测量时给出的随机结果
    """

    seep: np.ndarray
    seep_x: np.ndarray
    seep_z: np.ndarray
    leak: np.ndarray
    partner_x: np.ndarray
    partner_z: np.ndarray
    pauli_x: np.ndarray
    pauli_z: np.ndarray
    readout_flip: np.ndarray
    leaked_bits: np.ndarray


def check_schedule(circuit: Circuit, schedule: ErrorSchedule) -> None:
    """调度必须由同一电路编译而来"""
    if schedule.n_qubits != circuit.n_qubits or schedule.n_layers != len(
        circuit.layers
    ):
        raise ValidationError(
            f"调度 (n={schedule.n_qubits}, layers={schedule.n_layers}) 与电路 "
            f"(n={circuit.n_qubits}, layers={len(circuit.layers)}) 不匹配"
        )


def normalize_inject(inject: Optional[InjectMap], circuit: Circuit) -> Dict[int, list]:
    """{(layer, qubit): pauli} → {layer: [(qubit, x, z), ...]}"""
    per_layer: Dict[int, list] = {}
    for (layer, qubit), pauli in (inject or {}).items():
        key = str(pauli).upper()
        if key not in _PAULI_BITS:
            raise ValidationError(f"注入的 Pauli 必须是 X/Y/Z，实际 {pauli!r}")
        if not (0 <= layer < len(circuit.layers) and 0 <= qubit < circuit.n_qubits):
            raise ValidationError(f"注入位置越界: layer={layer}, qubit={qubit}")
        per_layer.setdefault(layer, []).append((qubit, *_PAULI_BITS[key]))
    return per_layer


def _xor_rows(target: np.ndarray, qubits: np.ndarray, values: np.ndarray) -> None:
    if np.unique(qubits).size == qubits.size:
        target[qubits] ^= values
    else:
        for q, row in zip(qubits, values):
            target[q] ^= row


def _pauli_bits(group: EventGroup, u: np.ndarray):
    """按通道把均匀数解码成 (x 翻转, z 翻转)；SDC2 返回两端各自的 bit"""
    probs = group.probs
    if group.channel == ChannelKind.FLIP_X:
        hit = u < probs[:, 0:1]
        return hit, np.zeros_like(hit)
    if group.channel == ChannelKind.ADC:
        px, py, pz = probs[:, 0:1], probs[:, 1:2], probs[:, 2:3]
        x = u < px + py
        z = (u >= px) & (u < px + py + pz)
        return x, z
    p = probs[:, 0:1]
    hit = u < p
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(p > 0, u / np.where(p > 0, p, 1.0), 0.0)
    if group.channel == ChannelKind.SDC1:
        k = np.minimum((scaled * 3).astype(np.int64), 2)
        return hit & (k <= 1), hit & (k >= 1)
    # SDC2：15 个非平凡双比特 Pauli，编码 idx = 4·c1 + c2（1=X, 2=Y, 3=Z）
    idx = np.minimum((scaled * 15).astype(np.int64), 14) + 1
    c1, c2 = idx // 4, idx % 4
    x1, z1 = hit & ((c1 == 1) | (c1 == 2)), hit & ((c1 == 2) | (c1 == 3))
    x2, z2 = hit & ((c2 == 1) | (c2 == 2)), hit & ((c2 == 2) | (c2 == 3))
    return (x1, x2), (z1, z2)


def draw_layer(
    rng: np.random.Generator,
    circuit: Circuit,
    groups: Sequence[EventGroup],
    layer_index: int,
    n_shots: int,
    inject: Optional[Dict[int, list]] = None,
) -> LayerDraws:
    """
    抽取一层的全部随机事件

    Args:
        rng: 当前 shot 块的生成器
        circuit: 电路
        groups: 本层事件组（ErrorSchedule.layer_groups[layer_index]）
        layer_index: 层编号
        n_shots: 本块 shot 数
        inject: normalize_inject 的结果，确定性 Pauli 注入

    Returns:
        LayerDraws
    """
    shape = (circuit.n_qubits, n_shots)
    seep = np.zeros(shape, dtype=bool)
    seep_x = np.zeros(shape, dtype=bool)
    seep_z = np.zeros(shape, dtype=bool)
    leak = np.zeros(shape, dtype=bool)
    partner_x = np.zeros(shape, dtype=bool)
    partner_z = np.zeros(shape, dtype=bool)
    pauli_x = np.zeros(shape, dtype=bool)
    pauli_z = np.zeros(shape, dtype=bool)
    readout_flip = np.zeros(shape, dtype=bool)
    leaked_bits = np.zeros(shape, dtype=bool)

    by_channel: Dict[ChannelKind, list] = {}
    for group in groups:
        by_channel.setdefault(group.channel, []).append(group)

    # 回渗：同一比特多次试验取“任一成功”，返回态取最后一次成功的抽样
    for group in by_channel.get(ChannelKind.SEEP, ()):
        k = group.qubits.shape[0]
        u = rng.random((k, n_shots))
        state = rng.integers(0, 4, size=(k, n_shots), dtype=np.uint8)
        hit = u < group.probs[:, 0:1]
        for row, q in enumerate(group.qubits[:, 0]):
            h = hit[row]
            seep[q] |= h
            seep_x[q] = np.where(h, (state[row] & 1).astype(bool), seep_x[q])
            seep_z[q] = np.where(h, (state[row] >> 1).astype(bool), seep_z[q])

    for group in by_channel.get(ChannelKind.LEAK, ()):
        u = rng.random((group.qubits.shape[0], n_shots))
        hit = u < group.probs[:, 0:1]
        for row, q in enumerate(group.qubits[:, 0]):
            leak[q] |= hit[row]

    cx_ops = circuit.layers[layer_index].ops_of(OpKind.ENTANGLER)
    if cx_ops:
        bits = rng.integers(0, 4, size=(len(cx_ops), 2, n_shots), dtype=np.uint8)
        for i, op in enumerate(cx_ops):
            for end, q in enumerate(op.targets):
                partner_x[q] = (bits[i, end] & 1).astype(bool)
                partner_z[q] = (bits[i, end] >> 1).astype(bool)

    pauli_channels = (
        ChannelKind.FLIP_X,
        ChannelKind.ADC,
        ChannelKind.SDC1,
        ChannelKind.SDC2,
    )
    for channel in pauli_channels:
        for group in by_channel.get(channel, ()):
            u = rng.random((group.qubits.shape[0], n_shots))
            x, z = _pauli_bits(group, u)
            if channel == ChannelKind.SDC2:
                for end in (0, 1):
                    _xor_rows(pauli_x, group.qubits[:, end], x[end])
                    _xor_rows(pauli_z, group.qubits[:, end], z[end])
            else:
                _xor_rows(pauli_x, group.qubits[:, 0], x)
                _xor_rows(pauli_z, group.qubits[:, 0], z)

    for group in by_channel.get(ChannelKind.READOUT_FLIP, ()):
        u = rng.random((group.qubits.shape[0], n_shots))
        _xor_rows(readout_flip, group.qubits[:, 0], u < group.probs[:, 0:1])

    sites = circuit.measure_sites(layer_index)
    if sites:
        outcomes = rng.integers(0, 2, size=(len(sites), n_shots), dtype=np.uint8)
        for row, (q, _) in enumerate(sites):
            leaked_bits[q] = outcomes[row].astype(bool)

    if inject and layer_index in inject:
        for q, x, z in inject[layer_index]:
            if x:
                pauli_x[q] ^= True
            if z:
                pauli_z[q] ^= True

    return LayerDraws(
        seep=seep,
        seep_x=seep_x,
        seep_z=seep_z,
        leak=leak,
        partner_x=partner_x,
        partner_z=partner_z,
        pauli_x=pauli_x,
        pauli_z=pauli_z,
        readout_flip=readout_flip,
        leaked_bits=leaked_bits,
    )
