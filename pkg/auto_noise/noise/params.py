"""
参数向量化

在优化器使用的无约束坐标与物理参数之间转换：
- 时间（t1, t2）取对数
- 概率取 logit，保真度对不保真度 1-f 取 logit

向量顺序：逐比特按 QUBIT_FIELDS 顺序排列被选中的字段，然后逐耦合器排列 f2q。
"""

import dataclasses
import math
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Tuple

import numpy as np

from auto_noise.errors import ValidationError
from auto_noise.noise.models import (
    ALL_FIELDS,
    COUPLER_FIELDS,
    QUBIT_FIELDS,
    NoiseModel,
    QubitParams,
)

# logit 坐标不能表示严格的 0 和 1：编码时夹到 [FLOOR, 1-FLOOR]，解码时贴回端点
PROB_FLOOR = 1e-15
_SNAP = 1.5 * PROB_FLOOR

_LOG_FIELDS = {"t1", "t2"}
_FIDELITY_FIELDS = {"f1q", "f2q"}


@dataclass(frozen=True)
class ParamMask:
    """
    参数掩码

    Attributes:
        fields: 选中的字段名
        qubits: 限定比特（None 表示全部）；耦合器两端都在范围内才选中
    """

    fields: FrozenSet[str]
    qubits: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "fields", frozenset(self.fields))
        unknown = self.fields - set(ALL_FIELDS)
        if unknown:
            raise ValidationError(f"未知参数字段: {sorted(unknown)}")

    @classmethod
    def of(cls, *fields: str, qubits: Optional[Iterable[int]] = None) -> "ParamMask":
        return cls(frozenset(fields), tuple(qubits) if qubits is not None else None)

    def union(self, other: "ParamMask") -> "ParamMask":
        if self.qubits != other.qubits:
            raise ValidationError("只能合并比特范围相同的掩码")
        return ParamMask(self.fields | other.fields, self.qubits)

    def _selects(self, q: int) -> bool:
        return self.qubits is None or q in self.qubits

    def to_dict(self):
        return {
            "fields": sorted(self.fields),
            "qubits": list(self.qubits) if self.qubits is not None else None,
        }


# 预置掩码
EMPTY = ParamMask(frozenset())
LEAKAGE = ParamMask.of("p_leak", "p_seep")
DECOHERENCE = ParamMask.of("t1", "t2")
GATES = ParamMask.of("f1q", "f2q")
READOUT = ParamMask.of("p_readout", "p_reset")
PREPARATION = ParamMask.of("p_init")
CORE = ParamMask.of("t1", "t2", "f1q", "f2q", "p_init", "p_reset", "p_readout")
FULL = ParamMask(frozenset(ALL_FIELDS))


def _logit(p: float) -> float:
    p = min(max(p, PROB_FLOOR), 1.0 - PROB_FLOOR)
    return math.log(p) - math.log1p(-p)


def _expit(v: float) -> float:
    if v >= 0:
        p = 1.0 / (1.0 + math.exp(-v))
    else:
        e = math.exp(v)
        p = e / (1.0 + e)
    if p < _SNAP:
        return 0.0
    if p > 1.0 - _SNAP:
        return 1.0
    return p


def _encode(field: str, value: float) -> float:
    if field in _LOG_FIELDS:
        return math.log(value)
    if field in _FIDELITY_FIELDS:
        return _logit(1.0 - value)
    return _logit(value)


def _decode(field: str, coord: float) -> float:
    if field in _LOG_FIELDS:
        return math.exp(min(coord, 700.0))
    if field in _FIDELITY_FIELDS:
        return 1.0 - _expit(coord)
    value = _expit(coord)
    if field != "p_seep":
        # 除 p_seep 外概率上界不可取到
        value = min(value, 1.0 - PROB_FLOOR)
    return value


def _slots(model: NoiseModel, mask: ParamMask) -> List[Tuple[str, int]]:
    slots: List[Tuple[str, int]] = []
    for q in range(model.n_qubits):
        if not mask._selects(q):
            continue
        for name in QUBIT_FIELDS:
            if name in mask.fields:
                slots.append((name, q))
    for ci, c in enumerate(model.couplers):
        if all(mask._selects(q) for q in c.endpoints):
            for name in COUPLER_FIELDS:
                if name in mask.fields:
                    slots.append((name, ci))
    return slots


def _require_paems(model: NoiseModel, mask: ParamMask) -> None:
    if model.kind.is_baseline and mask.fields:
        raise ValidationError("基线模型没有可向量化的逐比特参数")


def describe_vector(model: NoiseModel, mask: ParamMask) -> List[str]:
    """每个坐标的标签，如 `t1[3]`、`f2q[2-3]`"""
    _require_paems(model, mask)
    labels = []
    for name, idx in _slots(model, mask):
        if name in COUPLER_FIELDS:
            a, b = model.couplers[idx].endpoints
            labels.append(f"{name}[{a}-{b}]")
        else:
            labels.append(f"{name}[{idx}]")
    return labels


def parameter_vector(model: NoiseModel, mask: ParamMask) -> np.ndarray:
    """模型 → 变换坐标下的扁平向量"""
    _require_paems(model, mask)
    values = []
    for name, idx in _slots(model, mask):
        source = model.couplers[idx] if name in COUPLER_FIELDS else model.qubits[idx]
        values.append(_encode(name, getattr(source, name)))
    return np.asarray(values, dtype=np.float64)


def apply_vector(model: NoiseModel, mask: ParamMask, vector) -> NoiseModel:
    """
    把向量写回模型（只修改掩码选中的字段）

    t1 或 t2 被选中时，写回后把 t2 截断到 2·t1。
    """
    _require_paems(model, mask)
    vector = np.asarray(vector, dtype=np.float64).ravel()
    slots = _slots(model, mask)
    if vector.shape[0] != len(slots):
        raise ValidationError(f"向量长度 {vector.shape[0]} 与掩码长度 {len(slots)} 不一致")
    if not slots:
        return model

    qubit_changes = [dict() for _ in range(model.n_qubits)]
    coupler_changes = [dict() for _ in range(len(model.couplers))]
    for (name, idx), coord in zip(slots, vector):
        value = _decode(name, float(coord))
        if name in COUPLER_FIELDS:
            coupler_changes[idx][name] = value
        else:
            qubit_changes[idx][name] = value

    qubits = []
    for params, changes in zip(model.qubits, qubit_changes):
        if not changes:
            qubits.append(params)
            continue
        merged = {**dataclasses.asdict(params), **changes}
        if "t1" in changes or "t2" in changes:
            qubits.append(QubitParams.clamped(**merged))
        else:
            qubits.append(QubitParams(**merged))
    couplers = [
        dataclasses.replace(c, **changes) if changes else c
        for c, changes in zip(model.couplers, coupler_changes)
    ]
    return dataclasses.replace(model, qubits=tuple(qubits), couplers=tuple(couplers))


def copy_masked(target: NoiseModel, source: NoiseModel, mask: ParamMask) -> NoiseModel:
    """把 source 中掩码选中的字段原样拷贝到 target（并行分支合并用）"""
    _require_paems(target, mask)
    if source.n_qubits != target.n_qubits or len(source.couplers) != len(
        target.couplers
    ):
        raise ValidationError("两个模型的比特或耦合器数目不一致")
    qubits = []
    for q, (mine, theirs) in enumerate(zip(target.qubits, source.qubits)):
        changes = {
            name: getattr(theirs, name)
            for name in QUBIT_FIELDS
            if name in mask.fields and mask._selects(q)
        }
        qubits.append(dataclasses.replace(mine, **changes) if changes else mine)
    couplers = []
    for mine, theirs in zip(target.couplers, source.couplers):
        selected = all(mask._selects(q) for q in mine.endpoints)
        changes = {
            name: getattr(theirs, name)
            for name in COUPLER_FIELDS
            if name in mask.fields and selected
        }
        couplers.append(dataclasses.replace(mine, **changes) if changes else mine)
    return dataclasses.replace(target, qubits=tuple(qubits), couplers=tuple(couplers))


def with_leakage_prior(model: NoiseModel, p_leak: float, p_seep: float) -> NoiseModel:
    """把恰为 0 的泄漏参数换成先验值（logit 坐标无法表示 0）"""
    qubits = tuple(
        dataclasses.replace(
            q,
            p_leak=q.p_leak if q.p_leak > 0 else p_leak,
            p_seep=q.p_seep if q.p_seep > 0 else p_seep,
        )
        for q in model.qubits
    )
    return dataclasses.replace(model, qubits=qubits)
