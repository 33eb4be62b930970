"""
Pauli 帧采样器

逐层向量化传播 x/z 帧位与每比特泄漏状态机。每层的处理顺序：
1. 回渗 / 泄漏状态转移（返回的比特带随机态）
2. 理想操作：R 清零帧；H 交换 x/z；CX 在两端都未泄漏时传播，否则随机化未泄漏的一端
3. 对未泄漏比特施加 Pauli 误差
4. 测量：泄漏比特给出随机 bit，否则为 x 帧位异或读出翻转
"""

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, List, Optional

import numpy as np
from pydantic import BaseModel, Field

from auto_noise._version import __version__
from auto_noise.circuit.models import Circuit, OpKind
from auto_noise.errors import SinkError
from auto_noise.models import Dataset, StreamSummary
from auto_noise.noise.schedule import ErrorSchedule
from auto_noise.sampler.events import (
    InjectMap,
    check_schedule,
    draw_layer,
    normalize_inject,
)
from auto_noise.sampler.rng import SEED_MAX, block_generator, block_ranges

logger = logging.getLogger(__name__)

ShotSink = Callable[[np.ndarray], None]


def default_threads() -> int:
    """默认线程数：环境变量 AUTO_NOISE_THREADS，否则 1"""
    value = os.environ.get("AUTO_NOISE_THREADS", "")
    return max(1, int(value)) if value.strip().isdigit() else 1


class SamplerConfig(BaseModel):
    """采样配置"""

    shots: int = Field(..., ge=1, description="shot 数")
    master_seed: int = Field(0, ge=0, le=SEED_MAX, description="64 位主种子")
    batch_size: int = Field(4096, ge=1, description="流式交付的批大小（不影响结果）")
    threads: int = Field(default_factory=default_threads, ge=1, description="工作线程数")

    model_config = {"frozen": True}


def simulate_block(
    circuit: Circuit,
    schedule: ErrorSchedule,
    master_seed: int,
    block: int,
    n_shots: int,
    inject: Optional[dict] = None,
) -> np.ndarray:
    """
    模拟一个 shot 块

    Returns:
        uint8 数组 (n_shots, n_measurements)
    """
    rng = block_generator(master_seed, block)
    nq = circuit.n_qubits
    x = np.zeros((nq, n_shots), dtype=bool)
    z = np.zeros((nq, n_shots), dtype=bool)
    leaked = np.zeros((nq, n_shots), dtype=bool)
    out = np.zeros((circuit.measurement_count, n_shots), dtype=bool)

    for li, layer in enumerate(circuit.layers):
        d = draw_layer(rng, circuit, schedule.layer_groups[li], li, n_shots, inject)

        returning = leaked & d.seep
        x = np.where(returning, d.seep_x, x)
        z = np.where(returning, d.seep_z, z)
        leaked = (leaked & ~d.seep) | d.leak

        for op in layer.operations:
            if op.kind == OpKind.RESET:
                q = op.targets[0]
                x[q] = False
                z[q] = False
            elif op.kind == OpKind.HADAMARD:
                q = op.targets[0]
                x[q], z[q] = z[q].copy(), x[q].copy()
            elif op.kind == OpKind.ENTANGLER:
                c, t = op.targets
                both = ~leaked[c] & ~leaked[t]
                only_c = leaked[t] & ~leaked[c]
                only_t = leaked[c] & ~leaked[t]
                x[t] ^= x[c] & both
                z[c] ^= z[t] & both
                x[c] ^= d.partner_x[c] & only_c
                z[c] ^= d.partner_z[c] & only_c
                x[t] ^= d.partner_x[t] & only_t
                z[t] ^= d.partner_z[t] & only_t

        x ^= d.pauli_x & ~leaked
        z ^= d.pauli_z & ~leaked

        for q, m in circuit.measure_sites(li):
            out[m] = np.where(leaked[q], d.leaked_bits[q], x[q] ^ d.readout_flip[q])

    return np.ascontiguousarray(out.T, dtype=np.uint8)


def _iter_blocks(
    circuit: Circuit,
    schedule: ErrorSchedule,
    cfg: SamplerConfig,
    inject: Optional[InjectMap],
    simulate=simulate_block,
) -> Iterator[np.ndarray]:
    """按块顺序产出结果；同时最多 threads 个块在计算"""
    check_schedule(circuit, schedule)
    per_layer = normalize_inject(inject, circuit)
    ranges = block_ranges(cfg.shots)
    window = max(1, cfg.threads)
    if window == 1:
        for k, start, stop in ranges:
            n = stop - start
            yield simulate(circuit, schedule, cfg.master_seed, k, n, per_layer)
        return
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        for i in range(0, len(ranges), window):
            chunk = ranges[i : i + window]
            futures = [
                pool.submit(
                    simulate,
                    circuit,
                    schedule,
                    cfg.master_seed,
                    k,
                    stop - start,
                    per_layer,
                )
                for k, start, stop in chunk
            ]
            for future in futures:
                yield future.result()


def stream_rows(
    blocks: Iterator[np.ndarray], batch_size: int, sink: ShotSink
) -> StreamSummary:
    """把块重新切成 batch_size 行的批交给 sink"""
    started = time.perf_counter()
    delivered = 0
    batches = 0
    pending: List[np.ndarray] = []
    pending_rows = 0

    def deliver(batch: np.ndarray) -> None:
        nonlocal delivered, batches
        try:
            sink(batch)
        except Exception as e:
            raise SinkError(f"sink 处理失败: {e}", delivered_shots=delivered) from e
        delivered += batch.shape[0]
        batches += 1

    for block in blocks:
        pending.append(block)
        pending_rows += block.shape[0]
        while pending_rows >= batch_size:
            merged = np.concatenate(pending, axis=0)
            deliver(merged[:batch_size])
            rest = merged[batch_size:]
            pending = [rest] if rest.shape[0] else []
            pending_rows = rest.shape[0]
    if pending_rows:
        deliver(np.concatenate(pending, axis=0))

    return StreamSummary(
        shots_delivered=delivered,
        batches=batches,
        seconds=time.perf_counter() - started,
    )


def sample_streaming(
    circuit: Circuit,
    schedule: ErrorSchedule,
    cfg: SamplerConfig,
    sink: ShotSink,
    *,
    inject: Optional[InjectMap] = None,
) -> StreamSummary:
    """
    流式采样：按 batch_size 把记录分批交给 sink，不物化完整数据集

    Args:
        circuit: 电路
        schedule: 由该电路编译的误差调度
        cfg: 采样配置
        sink: 接收 uint8 数组 (batch, n_measurements) 的回调
        inject: 确定性 Pauli 注入 {(layer, qubit): "X"|"Y"|"Z"}

    Returns:
        StreamSummary

    Raises:
        SinkError: sink 抛出异常，附带已交付的 shot 数
    """
    summary = stream_rows(
        _iter_blocks(circuit, schedule, cfg, inject), cfg.batch_size, sink
    )
    logger.debug(
        f"采样完成: {summary.shots_delivered} shots, {summary.batches} 批, "
        f"{summary.seconds:.2f}s"
    )
    return summary


def dataset_metadata(
    circuit: Circuit, schedule: ErrorSchedule, cfg: SamplerConfig, simulator: str
) -> dict:
    return {
        "circuit": circuit.describe(),
        "model_kind": schedule.model_kind.value,
        "seed": cfg.master_seed,
        "shots": cfg.shots,
        "simulator": simulator,
        "version": __version__,
    }


def sample(
    circuit: Circuit,
    schedule: ErrorSchedule,
    cfg: SamplerConfig,
    *,
    inject: Optional[InjectMap] = None,
) -> Dataset:
    """
    采样并返回完整数据集

    相同 (circuit, schedule, master_seed, shots) 的结果与线程数、batch_size 无关。
    """
    parts: List[np.ndarray] = []
    sample_streaming(circuit, schedule, cfg, parts.append, inject=inject)
    return Dataset(
        bits=np.concatenate(parts, axis=0),
        metadata=dataset_metadata(circuit, schedule, cfg, "frame"),
    )
