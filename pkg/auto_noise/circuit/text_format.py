"""
电路文本格式（逐行，可精确往返）

    circuit v1 n=<n> basis=<X|Z> rounds=<R> final_detectors=<0|1>
    LAYER <dur_ns> r=<round>; <OP> <q>[,<q2>][ @<dur_ns>]; ...
    DET a=<ancilla> r=<round|final> m=<i>[,<j>...]

OP 取 R / H / CX / I / M；操作时长与层时长相同时省略 `@`。
测量编号按文件中 M 操作出现的顺序分配。以 `#` 开头的行为注释。
"""

from pathlib import Path
from typing import Dict, List, Union

from auto_noise.circuit.models import (
    Basis,
    Circuit,
    DetectorId,
    Layer,
    Operation,
    OpKind,
)
from auto_noise.errors import FormatError, ValidationError

HEADER = "circuit v1"


def _fmt(value: float) -> str:
    value = float(value)
    return str(int(value)) if value.is_integer() else repr(value)


def _kv(tokens: List[str], line_no: int) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for tok in tokens:
        if "=" not in tok:
            raise FormatError(f"无法解析的字段 {tok!r}", line=line_no)
        key, value = tok.split("=", 1)
        if key in out:
            raise FormatError(f"重复字段 {key!r}", line=line_no)
        out[key] = value
    return out


def dumps_circuit(circuit: Circuit) -> str:
    """电路序列化为文本"""
    lines = [
        f"{HEADER} n={circuit.n_qubits} basis={circuit.basis.value} "
        f"rounds={circuit.rounds} final_detectors={int(circuit.final_detectors)}"
    ]
    for layer in circuit.layers:
        dur = layer.duration_ns
        parts = [f"LAYER {_fmt(dur)} r={layer.round}"]
        for op in layer.operations:
            text = f"{op.kind.value} {','.join(str(q) for q in op.targets)}"
            if op.duration_ns != dur:
                text += f" @{_fmt(op.duration_ns)}"
            parts.append(text)
        lines.append("; ".join(parts))
    for det in circuit.detectors:
        r = "final" if det.is_final else str(det.round)
        refs = ",".join(str(m) for m in det.measurements)
        lines.append(f"DET a={det.ancilla} r={r} m={refs}")
    return "\n".join(lines) + "\n"


def _parse_op(text: str, layer_dur: float, line_no: int) -> Operation:
    body, _, dur_text = text.partition("@")
    tokens = body.split()
    if len(tokens) != 2:
        raise FormatError(f"无法解析的操作 {text!r}", line=line_no)
    try:
        kind = OpKind(tokens[0])
        targets = tuple(int(q) for q in tokens[1].split(","))
        duration = float(dur_text) if dur_text.strip() else layer_dur
        return Operation(kind, targets, duration)
    except (ValueError, ValidationError) as e:
        raise FormatError(f"非法操作 {text!r}: {e}", line=line_no) from e


def loads_circuit(text: str) -> Circuit:
    """从文本解析电路"""
    header: Dict[str, str] = {}
    layers: List[Layer] = []
    detectors: List[DetectorId] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header:
            if not line.startswith(HEADER + " "):
                raise FormatError(f"缺少文件头 {HEADER!r}", line=line_no)
            header = _kv(line[len(HEADER) :].split(), line_no)
            continue
        if line.startswith("LAYER"):
            parts = [p.strip() for p in line.split(";")]
            head = parts[0].split()
            if len(head) != 3 or not head[2].startswith("r="):
                raise FormatError(f"无法解析的层头 {parts[0]!r}", line=line_no)
            try:
                dur = float(head[1])
                round_ = int(head[2][2:])
            except ValueError as e:
                raise FormatError(f"无法解析的层头 {parts[0]!r}", line=line_no) from e
            ops = tuple(_parse_op(p, dur, line_no) for p in parts[1:] if p)
            try:
                layer = Layer(operations=ops, round=round_)
            except ValidationError as e:
                raise FormatError(str(e), line=line_no) from e
            if layer.duration_ns != dur:
                raise FormatError(
                    f"层时长 {dur} 与操作最大时长 {layer.duration_ns} 不一致",
                    line=line_no,
                )
            layers.append(layer)
        elif line.startswith("DET"):
            fields = _kv(line.split()[1:], line_no)
            try:
                is_final = fields["r"] == "final"
                refs = tuple(int(m) for m in fields["m"].split(","))
                detectors.append(
                    DetectorId(
                        index=len(detectors),
                        ancilla=int(fields["a"]),
                        round=-1 if is_final else int(fields["r"]),
                        measurements=refs,
                        is_final=is_final,
                    )
                )
            except (KeyError, ValueError) as e:
                raise FormatError(f"无法解析的探测器行 {line!r}", line=line_no) from e
        else:
            raise FormatError(f"无法识别的行 {line!r}", line=line_no)

    if not header:
        raise FormatError("空电路文件")
    try:
        rounds = int(header["rounds"])
        detectors = [
            DetectorId(d.index, d.ancilla, rounds + 1, d.measurements, True)
            if d.is_final
            else d
            for d in detectors
        ]
        return Circuit(
            n_qubits=int(header["n"]),
            basis=Basis(header["basis"]),
            rounds=rounds,
            layers=tuple(layers),
            detectors=tuple(detectors),
            final_detectors=header.get("final_detectors", "0") == "1",
        )
    except (KeyError, ValueError) as e:
        raise FormatError(f"文件头字段缺失或非法: {e}") from e


def write_circuit(path: Union[str, Path], circuit: Circuit, preamble: str = "") -> None:
    """写电路文件；preamble 作为注释行写在最前（用于溯源信息）"""
    text = dumps_circuit(circuit)
    if preamble:
        text = "".join(f"# {ln}\n" for ln in preamble.splitlines()) + text
    Path(path).write_text(text, encoding="utf-8")


def read_circuit(path: Union[str, Path]) -> Circuit:
    return loads_circuit(Path(path).read_text(encoding="utf-8"))

