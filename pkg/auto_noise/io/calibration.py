"""
平台标定数据的读取与初始模型映射

标定文件格式（``paems-calibration v1``）::

    paems-calibration v1
    [meta]
    platform = demo
    timestamp = 2024-05-01T00:00:00Z

    [layout]
    chain = Q12,Q13,Q14

    [qubit Q12]
    t1_us = 47.9
    t2_us = 42.3
    gate_error_1q = 0.0004
    readout_error = 0.012
    gate_ns = 32
    measure_ns = 600
    reset_ns = 160

    [coupler Q12-Q13]
    gate_error_2q = 0.006
    gate_ns = 68

``chain`` 按逻辑链顺序列出物理比特名；逻辑比特 i 取 chain[i] 的标定值。
"""

import csv
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from pydantic import BaseModel, Field, model_validator
from pydantic import ValidationError as PydanticValidationError

from auto_noise.errors import FormatError, ValidationError
from auto_noise.io.kvtext import Block, dumps_kv, loads_kv
from auto_noise.noise.models import (
    CouplerParams,
    ModelKind,
    NoiseModel,
    QubitParams,
)

logger = logging.getLogger(__name__)

CALIBRATION_HEADER = "paems-calibration v1"


class QubitCalibration(BaseModel):
    """单个物理比特的标定值"""

    name: str = Field(..., min_length=1)
    t1_us: float = Field(..., gt=0, description="弛豫时间（微秒）")
    t2_us: float = Field(..., gt=0, description="退相位时间（微秒）")
    gate_error_1q: float = Field(..., ge=0, lt=1, description="单比特门错误率")
    readout_error: float = Field(..., ge=0, lt=1, description="读出分配错误率")
    gate_ns: Optional[float] = Field(None, gt=0, description="单比特门时长")
    measure_ns: Optional[float] = Field(None, gt=0, description="测量时长")
    reset_ns: Optional[float] = Field(None, gt=0, description="复位时长")

    model_config = {"frozen": True, "extra": "forbid"}


class CouplerCalibration(BaseModel):
    """耦合器（两比特门）标定值"""

    a: str
    b: str
    gate_error_2q: float = Field(..., ge=0, lt=1, description="两比特门错误率")
    gate_ns: Optional[float] = Field(None, gt=0, description="两比特门时长")

    model_config = {"frozen": True, "extra": "forbid"}

    def joins(self, x: str, y: str) -> bool:
        return {self.a, self.b} == {x, y}


class CalibrationRecord(BaseModel):
    """一次平台标定"""

    platform: str = ""
    timestamp: str = ""
    chain: List[str] = Field(..., min_length=1, description="逻辑链顺序的物理比特名")
    qubits: Dict[str, QubitCalibration]
    couplers: List[CouplerCalibration] = Field(default_factory=list)

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def _check_layout(self) -> "CalibrationRecord":
        if len(set(self.chain)) != len(self.chain):
            raise ValueError(f"chain 中有重复的物理比特: {self.chain}")
        missing = [name for name in self.chain if name not in self.qubits]
        if missing:
            raise ValueError(f"chain 引用了未标定的比特: {missing}")
        return self

    @property
    def n_qubits(self) -> int:
        return len(self.chain)

    def coupler(self, x: str, y: str) -> Optional[CouplerCalibration]:
        for c in self.couplers:
            if c.joins(x, y):
                return c
        return None


def _field_error(e: PydanticValidationError, where: str) -> ValidationError:
    problems = []
    for err in e.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "?"
        problems.append(f"{loc}: {err['msg']}")
    return ValidationError(f"{where}: {'; '.join(problems)}")


def _qubit(name: str, values: Dict[str, object]) -> QubitCalibration:
    try:
        return QubitCalibration(name=name, **values)
    except PydanticValidationError as e:
        raise _field_error(e, f"qubit {name}") from e


def _coupler(a: str, b: str, values: Dict[str, object]) -> CouplerCalibration:
    try:
        return CouplerCalibration(a=a, b=b, **values)
    except PydanticValidationError as e:
        raise _field_error(e, f"coupler {a}-{b}") from e


def _record(**kwargs) -> CalibrationRecord:
    try:
        return CalibrationRecord(**kwargs)
    except PydanticValidationError as e:
        raise _field_error(e, "calibration") from e


def loads_calibration(text: str) -> CalibrationRecord:
    doc = loads_kv(text, CALIBRATION_HEADER)
    meta = doc.single("meta", required=False)
    layout = doc.single("layout")
    names = layout.require("chain").split(",")
    chain = [name.strip() for name in names if name.strip()]

    qubits: Dict[str, QubitCalibration] = {}
    for block in doc.of_kind("qubit"):
        if not block.label:
            raise FormatError("[qubit] 块缺少比特名", line=block.line)
        if block.label in qubits:
            raise FormatError(f"比特 {block.label} 重复标定", line=block.line)
        qubits[block.label] = _qubit(block.label, dict(block.values))

    couplers: List[CouplerCalibration] = []
    for block in doc.of_kind("coupler"):
        a, sep, b = block.label.partition("-")
        if not sep or not a or not b:
            raise FormatError(f"耦合器标签应为 a-b: {block.label!r}", line=block.line)
        couplers.append(_coupler(a, b, dict(block.values)))

    return _record(
        platform=meta.values.get("platform", "") if meta else "",
        timestamp=meta.values.get("timestamp", "") if meta else "",
        chain=chain,
        qubits=qubits,
        couplers=couplers,
    )


def load_calibration(path: Union[str, Path]) -> CalibrationRecord:
    """读取 ``paems-calibration v1`` 文件"""
    return loads_calibration(Path(path).read_text(encoding="utf-8"))


def dumps_calibration(cal: CalibrationRecord) -> str:
    blocks = [
        Block("meta", values={"platform": cal.platform, "timestamp": cal.timestamp}),
        Block("layout", values={"chain": ",".join(cal.chain)}),
    ]
    if not cal.platform and not cal.timestamp:
        blocks.pop(0)
    for name, q in cal.qubits.items():
        values = q.model_dump(exclude={"name"}, exclude_none=True)
        blocks.append(Block("qubit", name, {k: repr(v) for k, v in values.items()}))
    for c in cal.couplers:
        values = c.model_dump(exclude={"a", "b"}, exclude_none=True)
        blocks.append(
            Block("coupler", f"{c.a}-{c.b}", {k: repr(v) for k, v in values.items()})
        )
    return dumps_kv(CALIBRATION_HEADER, blocks)


def write_calibration(path: Union[str, Path], cal: CalibrationRecord) -> None:
    Path(path).write_text(dumps_calibration(cal), encoding="utf-8")


# IBM 风格导出表的列名 → QubitCalibration 字段
IBM_COLUMNS: Dict[str, str] = {
    "T1 (us)": "t1_us",
    "T2 (us)": "t2_us",
    "Readout assignment error": "readout_error",
    "√x (sx) error": "gate_error_1q",
    "Readout length (ns)": "measure_ns",
}
IBM_PAIR_COLUMNS = ("CZ error", "ECR error", "CNOT error")


def _pair_errors(cell: str) -> Dict[str, float]:
    """解析 ``0_1:0.0071;1_2:0.0065`` 形式的单元格"""
    result: Dict[str, float] = {}
    for item in cell.split(";"):
        item = item.strip()
        if not item:
            continue
        pair, _, value = item.partition(":")
        result[pair.strip()] = float(value)
    return result


def load_calibration_csv(
    path: Union[str, Path],
    chain: Optional[Sequence[str]] = None,
    platform: str = "ibm",
) -> CalibrationRecord:
    """
    读取 IBM 风格的标定导出 CSV

    Args:
        path: CSV 文件
        chain: 逻辑链顺序的比特名（默认按文件中的行序）
        platform: 写入记录的平台名
    """
    qubits: Dict[str, QubitCalibration] = {}
    pair_errors: Dict[str, float] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "Qubit" not in reader.fieldnames:
            raise FormatError("CSV 缺少 Qubit 列", line=1)
        for line_no, row in enumerate(reader, start=2):
            name = (row.get("Qubit") or "").strip()
            if not name:
                raise FormatError("Qubit 列为空", line=line_no)
            values: Dict[str, object] = {}
            for column, key in IBM_COLUMNS.items():
                cell = (row.get(column) or "").strip()
                if cell:
                    values[key] = cell
            qubits[name] = _qubit(name, values)
            for column in IBM_PAIR_COLUMNS:
                cell = (row.get(column) or "").strip()
                if cell:
                    try:
                        pair_errors.update(_pair_errors(cell))
                    except ValueError as e:
                        raise FormatError(
                            f"无法解析的两比特门错误 {cell!r}", line=line_no
                        ) from e

    couplers = []
    seen = set()
    for pair, error in pair_errors.items():
        a, _, b = pair.partition("_")
        key = frozenset((a, b))
        if key in seen:
            continue
        seen.add(key)
        couplers.append(_coupler(a, b, {"gate_error_2q": error}))

    return _record(
        platform=platform,
        chain=list(chain) if chain is not None else list(qubits),
        qubits=qubits,
        couplers=couplers,
    )


def init_model(cal: CalibrationRecord, n_qubits: Optional[int] = None) -> NoiseModel:
    """
    由标定记录得到 PAEMS 初始模型

    f = 1 − 错误率；p_readout 取读出错误；p_init = p_reset = 读出错误 / 2；
    泄漏与回渗初始化为 0。t2 > 2·t1 时截断并告警。

    Args:
        cal: 标定记录
        n_qubits: 只取链上前 n 个比特（默认整条链）
    """
    n = cal.n_qubits if n_qubits is None else n_qubits
    if n > cal.n_qubits:
        raise ValidationError(f"标定布局只有 {cal.n_qubits} 个比特，电路需要 {n} 个")

    qubits = []
    for i, name in enumerate(cal.chain[:n]):
        q = cal.qubits[name]
        if q.t2_us > 2.0 * q.t1_us:
            logger.warning(
                f"qubit {name} (逻辑 {i}): t2={q.t2_us} > 2·t1={2 * q.t1_us}，截断"
            )
        qubits.append(
            QubitParams.clamped(
                t1=q.t1_us,
                t2=q.t2_us,
                f1q=1.0 - q.gate_error_1q,
                p_init=q.readout_error / 2.0,
                p_reset=q.readout_error / 2.0,
                p_readout=q.readout_error,
            )
        )

    couplers = []
    for i in range(n - 1):
        a, b = cal.chain[i], cal.chain[i + 1]
        c = cal.coupler(a, b)
        if c is None:
            raise ValidationError(f"缺少耦合器 {a}-{b} 的标定（逻辑 {i}-{i + 1}）")
        couplers.append(CouplerParams((i, i + 1), 1.0 - c.gate_error_2q))

    return NoiseModel(
        kind=ModelKind.PAEMS, qubits=tuple(qubits), couplers=tuple(couplers)
    )
