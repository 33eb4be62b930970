"""
电路中间表示 (IR) 数据模型

分层电路：每层由互不重叠的操作构成，未出现在某层的活跃比特视为在该层空闲。
所有对象构造后不可变，可以跨线程共享。
"""

import statistics
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from auto_noise.errors import ValidationError


class QubitRole(str, Enum):
    """比特角色（线性链上偶数位为数据比特，奇数位为辅助比特）"""

    DATA = "data"
    ANCILLA = "ancilla"


class OpKind(str, Enum):
    """门集合（值为文本格式中的助记符）"""

    RESET = "R"
    HADAMARD = "H"
    ENTANGLER = "CX"  # 纠缠门抽象为 CNOT，第一个目标为控制位
    IDLE = "I"
    MEASURE = "M"


class Basis(str, Enum):
    """重复码基矢"""

    X = "X"
    Z = "Z"


@dataclass(frozen=True)
class QubitId:
    """线性链上的比特标识"""

    index: int
    role: QubitRole

    @classmethod
    def at(cls, index: int) -> "QubitId":
        if index < 0:
            raise ValidationError(f"比特编号不能为负: {index}")
        role = QubitRole.DATA if index % 2 == 0 else QubitRole.ANCILLA
        return cls(index=index, role=role)


@dataclass(frozen=True)
class GateTimingTable:
    """
    各类操作的时长（纳秒）

    默认值取典型 transmon 数值，可由标定文件覆盖。
    """

    single_qubit_ns: float = 32.0
    two_qubit_ns: float = 68.0
    measure_ns: float = 600.0
    reset_ns: float = 160.0
    idle_ns: float = 0.0

    def __post_init__(self):
        for name in ("single_qubit_ns", "two_qubit_ns", "measure_ns", "reset_ns"):
            value = getattr(self, name)
            if value is None or value < 0:
                raise ValidationError(f"时长 {name}={value} 必须 ≥ 0")
        if self.idle_ns < 0:
            raise ValidationError(f"时长 idle_ns={self.idle_ns} 必须 ≥ 0")

    @classmethod
    def from_calibration(cls, cal: Any) -> "GateTimingTable":
        """各类操作取标定时长的中位数；未标定的类别保留默认值"""
        d = cls()

        def median(values: List[Optional[float]], fallback: float) -> float:
            known = sorted(v for v in values if v is not None)
            return float(statistics.median(known)) if known else fallback

        qubits = [cal.qubits[name] for name in cal.chain]
        return cls(
            single_qubit_ns=median([q.gate_ns for q in qubits], d.single_qubit_ns),
            two_qubit_ns=median([c.gate_ns for c in cal.couplers], d.two_qubit_ns),
            measure_ns=median([q.measure_ns for q in qubits], d.measure_ns),
            reset_ns=median([q.reset_ns for q in qubits], d.reset_ns),
        )

    def duration(self, kind: OpKind) -> float:
        return {
            OpKind.RESET: self.reset_ns,
            OpKind.HADAMARD: self.single_qubit_ns,
            OpKind.ENTANGLER: self.two_qubit_ns,
            OpKind.IDLE: self.idle_ns,
            OpKind.MEASURE: self.measure_ns,
        }[kind]

    def to_dict(self) -> Dict[str, float]:
        return {
            "single_qubit_ns": self.single_qubit_ns,
            "two_qubit_ns": self.two_qubit_ns,
            "measure_ns": self.measure_ns,
            "reset_ns": self.reset_ns,
            "idle_ns": self.idle_ns,
        }


@dataclass(frozen=True)
class Operation:
    """单个操作：种类、目标比特、时长"""

    kind: OpKind
    targets: Tuple[int, ...]
    duration_ns: float

    def __post_init__(self):
        arity = 2 if self.kind == OpKind.ENTANGLER else 1
        if len(self.targets) != arity:
            raise ValidationError(
                f"{self.kind.value} 需要 {arity} 个目标，实际 {self.targets}"
            )
        if len(set(self.targets)) != len(self.targets):
            raise ValidationError(f"操作目标重复: {self.targets}")
        if any(q < 0 for q in self.targets):
            raise ValidationError(f"比特编号不能为负: {self.targets}")
        if (
            self.kind == OpKind.ENTANGLER
            and abs(self.targets[0] - self.targets[1]) != 1
        ):
            raise ValidationError(f"纠缠门目标必须在链上相邻: {self.targets}")
        if self.duration_ns < 0:
            raise ValidationError(f"操作时长必须 ≥ 0: {self.duration_ns}")

    @property
    def qubit_ids(self) -> Tuple[QubitId, ...]:
        return tuple(QubitId.at(q) for q in self.targets)


@dataclass(frozen=True)
class Layer:
    """
    电路层

    Attributes:
        operations: 本层操作（同一比特至多出现一次）
        round: 所属轮次；0 为初始化层，1..R 为测量轮，R+1 为末轮数据读出
    """

    operations: Tuple[Operation, ...]
    round: int = 0

    def __post_init__(self):
        seen = set()
        for op in self.operations:
            for q in op.targets:
                if q in seen:
                    raise ValidationError(f"比特 {q} 在同一层中出现多次")
                seen.add(q)

    @property
    def duration_ns(self) -> float:
        if not self.operations:
            return 0.0
        return max(op.duration_ns for op in self.operations)

    @property
    def touched(self) -> Tuple[int, ...]:
        """本层被非 Idle 操作作用的比特"""
        return tuple(
            q for op in self.operations if op.kind != OpKind.IDLE for q in op.targets
        )

    def ops_of(self, kind: OpKind) -> List[Operation]:
        return [op for op in self.operations if op.kind == kind]


@dataclass(frozen=True)
class DetectorId:
    """
    探测器定义

    Attributes:
        index: 稠密编号（轮次优先，辅助比特次之；末轮奇偶探测器排在最后）
        ancilla: 辅助比特序号（0..n_ancilla-1，不是链上编号）
        round: 1..R；末轮奇偶探测器记为 R+1
        measurements: 参与异或的测量编号
        is_final: 是否为末轮数据奇偶探测器
    """

    index: int
    ancilla: int
    round: int
    measurements: Tuple[int, ...]
    is_final: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "ancilla": self.ancilla,
            "round": self.round,
            "measurements": list(self.measurements),
            "is_final": self.is_final,
        }


@dataclass(frozen=True)
class Circuit:
    """
    重复码实验电路

    Attributes:
        n_qubits: 链长（奇数，d 个数据比特 + d-1 个辅助比特）
        basis: 码基矢
        rounds: 测量轮数
        layers: 有序层列表
        detectors: 探测器定义
        final_detectors: 是否包含末轮数据奇偶探测器
    """

    n_qubits: int
    basis: Basis
    rounds: int
    layers: Tuple[Layer, ...]
    detectors: Tuple[DetectorId, ...] = ()
    final_detectors: bool = False
    _measure_sites: Tuple[Tuple[Tuple[int, int], ...], ...] = field(
        default=(), init=False, repr=False, compare=False
    )

    def __post_init__(self):
        if self.n_qubits < 3 or self.n_qubits % 2 == 0:
            raise ValidationError(f"n_qubits 必须为 ≥3 的奇数，实际 {self.n_qubits}")
        if self.rounds < 1:
            raise ValidationError(f"rounds 必须 ≥ 1，实际 {self.rounds}")
        sites = []
        counter = 0
        for li, layer in enumerate(self.layers):
            per_layer = []
            for op in layer.operations:
                for q in op.targets:
                    if q >= self.n_qubits:
                        raise ValidationError(f"第 {li} 层引用了越界比特 {q}")
                if op.kind == OpKind.MEASURE:
                    per_layer.append((op.targets[0], counter))
                    counter += 1
            sites.append(tuple(per_layer))
        object.__setattr__(self, "_measure_sites", tuple(sites))
        for det in self.detectors:
            for m in det.measurements:
                if not 0 <= m < counter:
                    raise ValidationError(f"探测器 {det.index} 引用了不存在的测量 {m}")

    # ==================== 结构信息 ====================

    @property
    def n_data(self) -> int:
        return (self.n_qubits + 1) // 2

    @property
    def n_ancilla(self) -> int:
        return self.n_qubits // 2

    @property
    def data_qubits(self) -> Tuple[int, ...]:
        return tuple(range(0, self.n_qubits, 2))

    @property
    def ancilla_qubits(self) -> Tuple[int, ...]:
        return tuple(range(1, self.n_qubits, 2))

    def qubit(self, index: int) -> QubitId:
        return QubitId.at(index)

    @property
    def measurement_count(self) -> int:
        return sum(len(s) for s in self._measure_sites)

    def measure_sites(self, layer_index: int) -> Tuple[Tuple[int, int], ...]:
        """第 layer_index 层的 (比特, 测量编号) 列表"""
        return self._measure_sites[layer_index]

    def measurement_index(self, ancilla: int, round_: int) -> int:
        """辅助比特序号 ancilla 在第 round_ 轮的测量编号（按构造规则）"""
        if not (0 <= ancilla < self.n_ancilla and 1 <= round_ <= self.rounds):
            raise ValidationError(f"不存在的测量 (a={ancilla}, r={round_})")
        return (round_ - 1) * self.n_ancilla + ancilla

    def final_measurement_index(self, data: int) -> int:
        """数据比特序号 data 的末轮读出编号"""
        if not 0 <= data < self.n_data:
            raise ValidationError(f"不存在的数据比特序号 {data}")
        return self.rounds * self.n_ancilla + data

    @property
    def operation_count(self) -> int:
        return sum(len(layer.operations) for layer in self.layers)

    @property
    def round_detectors(self) -> Tuple[DetectorId, ...]:
        return tuple(d for d in self.detectors if not d.is_final)

    def describe(self) -> Dict[str, Any]:
        return {
            "n_qubits": self.n_qubits,
            "basis": self.basis.value,
            "rounds": self.rounds,
            "layers": len(self.layers),
            "measurements": self.measurement_count,
            "detectors": len(self.detectors),
            "final_detectors": self.final_detectors,
        }

    def layer_signature(self, layer_index: int) -> Tuple[Any, ...]:
        """层的结构签名（不含轮次标签），用于轮次周期性检查"""
        layer = self.layers[layer_index]
        return tuple((op.kind, op.targets, op.duration_ns) for op in layer.operations)

    def round_layers(self, round_: int) -> List[int]:
        return [i for i, layer in enumerate(self.layers) if layer.round == round_]
