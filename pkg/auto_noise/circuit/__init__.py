"""
电路中间表示：分层门级 IR、重复码构造、探测器枚举与文本格式
"""

from auto_noise.circuit.builder import build_repetition_code
from auto_noise.circuit.detectors import enumerate_detectors
from auto_noise.circuit.models import (
    Basis,
    Circuit,
    DetectorId,
    GateTimingTable,
    Layer,
    Operation,
    OpKind,
    QubitId,
    QubitRole,
)
from auto_noise.circuit.text_format import (
    dumps_circuit,
    loads_circuit,
    read_circuit,
    write_circuit,
)

__all__ = [
    "Basis",
    "Circuit",
    "DetectorId",
    "GateTimingTable",
    "Layer",
    "Operation",
    "OpKind",
    "QubitId",
    "QubitRole",
    "build_repetition_code",
    "enumerate_detectors",
    "dumps_circuit",
    "loads_circuit",
    "read_circuit",
    "write_circuit",
]
