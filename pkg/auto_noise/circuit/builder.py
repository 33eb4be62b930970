"""
重复码电路构造

Z 基：每轮两层纠缠门（辅助比特先与左侧、再与右侧数据比特耦合），随后测量并复位辅助比特。
X 基：初始化后对数据比特加一层 Hadamard 制备 |+>（第 0 轮）；每轮纠缠层前后对数据比特
各加一层 Hadamard，使辅助比特测量 XX 奇偶；末轮读出前再加一层 Hadamard。制备层与第 1 轮
开头的 Hadamard 层互逆，但两层都保留：每轮的层结构一致，且两层的门噪声与空闲噪声都计入日程，
与硬件上实际执行的序列相同。
"""

from typing import List

from auto_noise.circuit.detectors import build_detectors
from auto_noise.circuit.models import (
    Basis,
    Circuit,
    GateTimingTable,
    Layer,
    Operation,
    OpKind,
)
from auto_noise.errors import ValidationError


def _layer(kind: OpKind, targets, timing: GateTimingTable, round_: int) -> Layer:
    duration = timing.duration(kind)
    ops = tuple(Operation(kind, tuple(t), duration) for t in targets)
    return Layer(operations=ops, round=round_)


def build_repetition_code(
    n_qubits: int,
    rounds: int,
    basis: Basis = Basis.Z,
    timing: GateTimingTable = GateTimingTable(),
    final_detectors: bool = False,
) -> Circuit:
    """
    构造重复码电路

    Args:
        n_qubits: 链长（奇数，≥3）
        rounds: 测量轮数（≥1）
        basis: 码基矢
        timing: 门时长表
        final_detectors: 是否追加末轮数据奇偶探测器

    Returns:
        Circuit
    """
    if n_qubits < 3 or n_qubits % 2 == 0:
        raise ValidationError(f"n_qubits 必须为 ≥3 的奇数，实际 {n_qubits}")
    if rounds < 1:
        raise ValidationError(f"rounds 必须 ≥ 1，实际 {rounds}")
    basis = Basis(basis)

    data = list(range(0, n_qubits, 2))
    ancillas = list(range(1, n_qubits, 2))

    layers: List[Layer] = [
        _layer(OpKind.RESET, [(q,) for q in range(n_qubits)], timing, 0)
    ]
    if basis == Basis.X:
        layers.append(_layer(OpKind.HADAMARD, [(q,) for q in data], timing, 0))
    for r in range(1, rounds + 1):
        if basis == Basis.X:
            layers.append(_layer(OpKind.HADAMARD, [(q,) for q in data], timing, r))
        left = [(a - 1, a) for a in ancillas]
        layers.append(_layer(OpKind.ENTANGLER, left, timing, r))
        right = [(a + 1, a) for a in ancillas]
        layers.append(_layer(OpKind.ENTANGLER, right, timing, r))
        if basis == Basis.X:
            layers.append(_layer(OpKind.HADAMARD, [(q,) for q in data], timing, r))
        layers.append(_layer(OpKind.MEASURE, [(a,) for a in ancillas], timing, r))
        layers.append(_layer(OpKind.RESET, [(a,) for a in ancillas], timing, r))
    if basis == Basis.X:
        final_h = [(q,) for q in data]
        layers.append(_layer(OpKind.HADAMARD, final_h, timing, rounds + 1))
    layers.append(_layer(OpKind.MEASURE, [(q,) for q in data], timing, rounds + 1))

    detectors = build_detectors(
        n_qubits=n_qubits, rounds=rounds, final_detectors=final_detectors
    )
    return Circuit(
        n_qubits=n_qubits,
        basis=basis,
        rounds=rounds,
        layers=tuple(layers),
        detectors=detectors,
        final_detectors=final_detectors,
    )
