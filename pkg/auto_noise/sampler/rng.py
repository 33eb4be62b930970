"""
计数器型随机数流

shot 按固定大小 SHOT_BLOCK 分块，第 k 块使用以 (master_seed, k) 为密钥的 Philox 生成器；
流编号放在计数器最高位，使事件流与预言机的坍缩流互不重叠。
分块与 batch_size、线程数无关，因此结果对两者不变。
"""

from typing import List, Tuple

import numpy as np

from auto_noise.errors import ValidationError

SHOT_BLOCK = 1024
SEED_MAX = 2**64 - 1

EVENT_STREAM = 0
COLLAPSE_STREAM = 1


def block_generator(
    master_seed: int, block: int, stream: int = EVENT_STREAM
) -> np.random.Generator:
    """第 block 块、第 stream 条流的生成器"""
    if not 0 <= master_seed <= SEED_MAX:
        raise ValidationError(f"master_seed 超出 64 位范围: {master_seed}")
    key = (int(master_seed) << 64) | int(block)
    counter = [0, 0, 0, int(stream)]
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def block_ranges(shots: int) -> List[Tuple[int, int, int]]:
    """[(block, start, stop), ...]"""
    return [
        (k, start, min(start + SHOT_BLOCK, shots))
        for k, start in enumerate(range(0, shots, SHOT_BLOCK))
    ]


def derive_seed(master_seed: int, *labels: int) -> int:
    """由主种子和若干整数标签派生子种子（用于代际公共随机数等）"""
    entropy = [int(master_seed) & SEED_MAX, *[int(x) for x in labels]]
    seq = np.random.SeedSequence(entropy)
    return int(seq.generate_state(1, dtype=np.uint64)[0])
