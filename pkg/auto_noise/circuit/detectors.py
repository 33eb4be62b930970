"""
探测器枚举

第 1 轮探测器以确定的初值 0 为参照（只含一次测量），之后每轮与上一轮同一辅助比特的结果异或；
末轮探测器比较相邻两个数据比特的读出奇偶与该辅助比特最后一次测量。
"""

from typing import List, Tuple

from auto_noise.circuit.models import Circuit, DetectorId


def build_detectors(
    n_qubits: int, rounds: int, final_detectors: bool = False
) -> Tuple[DetectorId, ...]:
    n_anc = n_qubits // 2
    dets: List[DetectorId] = []
    for r in range(1, rounds + 1):
        for a in range(n_anc):
            current = (r - 1) * n_anc + a
            refs = (current,) if r == 1 else (current - n_anc, current)
            dets.append(
                DetectorId(index=len(dets), ancilla=a, round=r, measurements=refs)
            )
    if final_detectors:
        base = rounds * n_anc
        for a in range(n_anc):
            last = (rounds - 1) * n_anc + a
            refs = (last, base + a, base + a + 1)
            dets.append(
                DetectorId(
                    index=len(dets),
                    ancilla=a,
                    round=rounds + 1,
                    measurements=refs,
                    is_final=True,
                )
            )
    return tuple(dets)


def enumerate_detectors(circuit: Circuit) -> List[DetectorId]:
    """返回电路的稠密探测器列表（轮次优先、辅助比特次之）"""
    return list(circuit.detectors)
