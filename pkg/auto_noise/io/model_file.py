"""
噪声模型文件（``paems-model v1``）

浮点数用 repr 写出，读回后逐位相同。
"""

from pathlib import Path
from typing import Dict, List, Union

from auto_noise.errors import FormatError, ValidationError
from auto_noise.io.kvtext import Block, dumps_kv, loads_kv
from auto_noise.noise.models import (
    COUPLER_FIELDS,
    QUBIT_FIELDS,
    CouplerParams,
    LeakagePolicy,
    ModelKind,
    NoiseModel,
    QubitParams,
)

MODEL_HEADER = "paems-model v1"


def dumps_model(model: NoiseModel, preamble: str = "") -> str:
    head: Dict[str, str] = {"kind": model.kind.value}
    blocks: List[Block] = [Block("model", values=head)]
    if model.kind.is_baseline:
        head["p"] = repr(float(model.p))
    else:
        head["leakage_policy"] = model.leakage_policy.value
        for i, q in enumerate(model.qubits):
            values = {name: repr(float(getattr(q, name))) for name in QUBIT_FIELDS}
            blocks.append(Block("qubit", str(i), values))
        for c in model.couplers:
            a, b = c.key
            values = {name: repr(float(getattr(c, name))) for name in COUPLER_FIELDS}
            blocks.append(Block("coupler", f"{a}-{b}", values))
    return dumps_kv(MODEL_HEADER, blocks, preamble)


def _float(block: Block, key: str) -> float:
    text = block.require(key)
    try:
        return float(text)
    except ValueError as e:
        raise FormatError(
            f"[{block.title}] {key} 不是数字: {text!r}", line=block.line
        ) from e


def loads_model(text: str) -> NoiseModel:
    doc = loads_kv(text, MODEL_HEADER)
    head = doc.single("model")
    try:
        kind = ModelKind(head.require("kind"))
    except ValueError as e:
        raise FormatError(f"未知模型种类 {head.values['kind']!r}", line=head.line) from e

    if kind.is_baseline:
        if doc.of_kind("qubit") or doc.of_kind("coupler"):
            raise FormatError(f"基线模型 {kind.value} 不接受逐比特块")
        return NoiseModel.baseline(kind, _float(head, "p"))

    indexed: Dict[int, QubitParams] = {}
    for block in doc.of_kind("qubit"):
        try:
            index = int(block.label)
        except ValueError as e:
            raise FormatError(f"比特编号非法: {block.label!r}", line=block.line) from e
        if index in indexed:
            raise FormatError(f"qubit {index} 重复", line=block.line)
        unknown = set(block.values) - set(QUBIT_FIELDS)
        if unknown:
            raise FormatError(f"qubit {index} 含未知字段 {sorted(unknown)}", line=block.line)
        try:
            indexed[index] = QubitParams(
                **{name: _float(block, name) for name in QUBIT_FIELDS}
            )
        except ValidationError as e:
            raise ValidationError(f"qubit {index}: {e}") from e
    if sorted(indexed) != list(range(len(indexed))):
        raise ValidationError(f"qubit 编号必须连续从 0 开始: {sorted(indexed)}")

    couplers = []
    for block in doc.of_kind("coupler"):
        a, _, b = block.label.partition("-")
        try:
            endpoints = (int(a), int(b))
        except ValueError as e:
            raise FormatError(f"耦合器标签非法: {block.label!r}", line=block.line) from e
        couplers.append(CouplerParams(endpoints, _float(block, "f2q")))

    try:
        policy = LeakagePolicy(head.values.get("leakage_policy", "gate_and_boundary"))
    except ValueError as e:
        raise FormatError(f"未知泄漏策略: {e}", line=head.line) from e
    return NoiseModel(
        kind=kind,
        qubits=tuple(indexed[i] for i in range(len(indexed))),
        couplers=tuple(couplers),
        leakage_policy=policy,
    )


def write_model(path: Union[str, Path], model: NoiseModel, preamble: str = "") -> None:
    Path(path).write_text(dumps_model(model, preamble), encoding="utf-8")


def read_model(path: Union[str, Path]) -> NoiseModel:
    return loads_model(Path(path).read_text(encoding="utf-8"))


def parse_model_spec(spec: str) -> NoiseModel:
    """
    命令行模型描述：模型文件路径，或基线的 ``<kind>:<p>``（如 ``si1000:0.015``）
    """
    kind, sep, p = spec.partition(":")
    if sep and not Path(spec).exists():
        try:
            model_kind = ModelKind(kind.strip())
            value = float(p)
        except ValueError as e:
            raise ValidationError(f"无法解析模型描述 {spec!r}") from e
        return NoiseModel.baseline(model_kind, value)
    return read_model(spec)
