"""
噪声模型数据结构

PAEMS 模型逐比特、逐耦合器参数化；五种基线模型只有一个全局物理错误率 p。
"""

import dataclasses
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Tuple

from auto_noise.errors import ValidationError
from auto_noise.utils.validators import (
    check_fidelity,
    check_positive,
    check_probability,
)

# 比特级可拟合字段（顺序即参数向量中的顺序）
QUBIT_FIELDS: Tuple[str, ...] = (
    "t1",
    "t2",
    "f1q",
    "p_init",
    "p_reset",
    "p_readout",
    "p_leak",
    "p_seep",
)
COUPLER_FIELDS: Tuple[str, ...] = ("f2q",)
ALL_FIELDS: Tuple[str, ...] = QUBIT_FIELDS + COUPLER_FIELDS


class ModelKind(str, Enum):
    """模型种类"""

    PAEMS = "paems"
    CIRCUIT = "circuit"
    CODE_CAPACITY = "cc"
    PHENOMENOLOGICAL = "phe"
    SD6 = "sd6"
    SI1000 = "si1000"

    @property
    def is_baseline(self) -> bool:
        return self != ModelKind.PAEMS


class LeakagePolicy(str, Enum):
    """泄漏 / 回渗试验的放置策略"""

    GATE_AND_BOUNDARY = "gate_and_boundary"  # 两比特门处泄漏；每层边界与复位处回渗
    GATE_ONLY = "gate_only"  # 泄漏与回渗都只在两比特门处
    EVERY_LAYER = "every_layer"  # 每层边界对每个比特都做泄漏与回渗试验


@dataclass(frozen=True)
class QubitParams:
    """
    单比特参数

    Attributes:
        t1: 弛豫时间（微秒）
        t2: 退相位时间（微秒，≤ 2·t1）
        f1q: 单比特门保真度
        p_init: 初始制备翻转概率
        p_reset: 中途复位翻转概率
        p_readout: 读出分配翻转概率
        p_leak: 每个泄漏位点的泄漏概率
        p_seep: 每个回渗位点的回渗概率
    """

    t1: float
    t2: float
    f1q: float = 1.0
    p_init: float = 0.0
    p_reset: float = 0.0
    p_readout: float = 0.0
    p_leak: float = 0.0
    p_seep: float = 0.0

    def __post_init__(self):
        check_positive(self.t1, "t1")
        check_positive(self.t2, "t2")
        if self.t2 > 2.0 * self.t1 * (1.0 + 1e-12):
            raise ValidationError(
                f"t2={self.t2} 超过 2·t1={2.0 * self.t1}，请先截断（见 clamped）"
            )
        check_fidelity(self.f1q, "f1q")
        for name in ("p_init", "p_reset", "p_readout", "p_leak"):
            check_probability(getattr(self, name), name)
        check_probability(self.p_seep, "p_seep", inclusive_upper=True)

    @classmethod
    def clamped(cls, **kwargs) -> "QubitParams":
        """构造时将 t2 截断到 2·t1"""
        t1 = float(kwargs["t1"])
        kwargs["t2"] = min(float(kwargs["t2"]), 2.0 * t1)
        return cls(**kwargs)

    def to_dict(self) -> Dict[str, float]:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class CouplerParams:
    """耦合器（两比特门）参数"""

    endpoints: Tuple[int, int]
    f2q: float = 1.0

    def __post_init__(self):
        a, b = self.endpoints
        if abs(a - b) != 1:
            raise ValidationError(f"耦合器端点必须在链上相邻: {self.endpoints}")
        check_fidelity(self.f2q, f"f2q[{a}-{b}]")

    @property
    def key(self) -> Tuple[int, int]:
        return tuple(sorted(self.endpoints))  # type: ignore[return-value]

    def to_dict(self) -> Dict[str, Any]:
        return {"endpoints": list(self.endpoints), "f2q": self.f2q}


@dataclass(frozen=True)
class NoiseModel:
    """
    噪声模型

    Attributes:
        kind: 模型种类
        qubits: PAEMS 的逐比特参数
        couplers: PAEMS 的逐耦合器参数
        p: 基线模型的物理错误率
        leakage_policy: 泄漏位点放置策略（仅 PAEMS）
    """

    kind: ModelKind
    qubits: Tuple[QubitParams, ...] = ()
    couplers: Tuple[CouplerParams, ...] = ()
    p: Optional[float] = None
    leakage_policy: LeakagePolicy = LeakagePolicy.GATE_AND_BOUNDARY

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        object.__setattr__(self, "qubits", tuple(self.qubits))
        object.__setattr__(self, "couplers", tuple(self.couplers))
        if self.kind.is_baseline:
            if self.p is None:
                raise ValidationError(f"基线模型 {self.kind.value} 需要参数 p")
            check_probability(self.p, "p")
            if self.qubits or self.couplers:
                raise ValidationError("基线模型不接受逐比特参数")
        else:
            keys = [c.key for c in self.couplers]
            if len(set(keys)) != len(keys):
                raise ValidationError("耦合器重复定义")

    # ==================== 构造 ====================

    @classmethod
    def baseline(cls, kind: ModelKind, p: float) -> "NoiseModel":
        kind = ModelKind(kind)
        if not kind.is_baseline:
            raise ValidationError("baseline() 只能构造基线模型")
        return cls(kind=kind, p=float(p))

    @classmethod
    def uniform_paems(
        cls,
        n_qubits: int,
        *,
        t1: float = 100.0,
        t2: float = 100.0,
        f1q: float = 0.9995,
        f2q: float = 0.99,
        p_init: float = 0.0,
        p_reset: float = 0.0,
        p_readout: float = 0.0,
        p_leak: float = 0.0,
        p_seep: float = 0.0,
        leakage_policy: LeakagePolicy = LeakagePolicy.GATE_AND_BOUNDARY,
    ) -> "NoiseModel":
        """所有比特取相同参数的 PAEMS 模型"""
        qubit = QubitParams(
            t1=t1,
            t2=t2,
            f1q=f1q,
            p_init=p_init,
            p_reset=p_reset,
            p_readout=p_readout,
            p_leak=p_leak,
            p_seep=p_seep,
        )
        couplers = tuple(CouplerParams((i, i + 1), f2q) for i in range(n_qubits - 1))
        return cls(
            kind=ModelKind.PAEMS,
            qubits=(qubit,) * n_qubits,
            couplers=couplers,
            leakage_policy=leakage_policy,
        )

    # ==================== 访问 ====================

    @property
    def n_qubits(self) -> int:
        return len(self.qubits)

    def coupler(self, a: int, b: int) -> Optional[CouplerParams]:
        key = (min(a, b), max(a, b))
        for c in self.couplers:
            if c.key == key:
                return c
        return None

    def with_qubit(self, index: int, **changes) -> "NoiseModel":
        """替换单个比特的部分参数"""
        qubits = list(self.qubits)
        qubits[index] = dataclasses.replace(qubits[index], **changes)
        return dataclasses.replace(self, qubits=tuple(qubits))

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind.value}
        if self.kind.is_baseline:
            data["p"] = self.p
        else:
            data["leakage_policy"] = self.leakage_policy.value
            data["qubits"] = [q.to_dict() for q in self.qubits]
            data["couplers"] = [c.to_dict() for c in self.couplers]
        return data
