"""
shot 数据集的读写

prb1 二进制格式（小端）::

    偏移 0   4 字节   魔数 b"PRB1"
    偏移 4   uint32   版本号 1
    偏移 8   uint32   每 shot 测量数 n_meas
    偏移 12  uint32   shot 数 n_shots
    偏移 16  n_shots 行，每行 ceil(n_meas / 8) 字节；测量 j 位于第 j // 8 字节的
             第 j % 8 位（低位在前），行尾填充位必须为 0

p01 文本格式：每行一个 shot，由 '0' / '1' 组成。

按扩展名分派：``.prb1`` 为二进制，``.p01`` / ``.txt`` 为文本。元数据写在
``<文件名>.meta.json`` 旁注文件中。
"""

import logging
import struct
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, Optional, Union

import numpy as np

from auto_noise.errors import FormatError, ValidationError
from auto_noise.models import Dataset
from auto_noise.utils.serialization import from_json, to_json

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

PRB1_MAGIC = b"PRB1"
PRB1_VERSION = 1
_HEADER = struct.Struct("<4sIII")
HEADER_SIZE = _HEADER.size


def row_bytes(n_measurements: int) -> int:
    return (n_measurements + 7) // 8


def _pack(bits: np.ndarray) -> bytes:
    return np.packbits(bits, axis=1, bitorder="little").tobytes()


def _unpack(raw: bytes, n_rows: int, n_meas: int, base_offset: int) -> np.ndarray:
    width = row_bytes(n_meas)
    packed = np.frombuffer(raw, dtype=np.uint8).reshape(n_rows, width)
    bits = np.unpackbits(packed, axis=1, count=width * 8, bitorder="little")
    if n_meas % 8:
        padding = bits[:, n_meas:]
        bad = np.flatnonzero(padding.any(axis=1))
        if bad.size:
            offset = base_offset + int(bad[0]) * width + width - 1
            raise FormatError("行尾填充位不为 0", offset=offset)
    return np.ascontiguousarray(bits[:, :n_meas])


def _read_header(fh, path: PathLike) -> tuple:
    head = fh.read(HEADER_SIZE)
    if len(head) < HEADER_SIZE:
        raise FormatError(f"{path}: 文件头不完整", offset=len(head))
    magic, version, n_meas, n_shots = _HEADER.unpack(head)
    if magic != PRB1_MAGIC:
        raise FormatError(f"{path}: 魔数错误 {magic!r}", offset=0)
    if version != PRB1_VERSION:
        raise FormatError(f"{path}: 不支持的版本 {version}", offset=4)
    return n_meas, n_shots


def iter_prb1(path: PathLike, batch_shots: int = 4096) -> Iterator[np.ndarray]:
    """
    按批读取 prb1 文件，内存占用与文件大小无关

    Yields:
        uint8 数组 (≤batch_shots, n_measurements)
    """
    if batch_shots < 1:
        raise ValidationError(f"batch_shots 必须 ≥ 1，实际 {batch_shots}")
    with open(path, "rb") as fh:
        n_meas, n_shots = _read_header(fh, path)
        width = row_bytes(n_meas)
        offset = HEADER_SIZE
        remaining = n_shots
        while remaining:
            rows = min(batch_shots, remaining)
            raw = fh.read(rows * width)
            if len(raw) < rows * width:
                raise FormatError(
                    f"{path}: 文件被截断，头部声明 {n_shots} shots",
                    offset=offset + len(raw),
                )
            yield _unpack(raw, rows, n_meas, offset)
            offset += len(raw)
            remaining -= rows
        if fh.read(1):
            raise FormatError(f"{path}: 数据末尾有多余字节", offset=offset)


def read_prb1(path: PathLike) -> Dataset:
    with open(path, "rb") as fh:
        n_meas, _ = _read_header(fh, path)
    batches = list(iter_prb1(path))
    bits = (
        np.concatenate(batches, axis=0)
        if batches
        else np.zeros((0, n_meas), dtype=np.uint8)
    )
    return Dataset(bits, read_metadata(path))


class Prb1Writer:
    """
    prb1 流式写入器，可直接作为 sample_streaming 的 sink

    关闭时回写文件头中的 shot 数。
    """

    def __init__(self, path: PathLike, n_measurements: int):
        self.path = Path(path)
        self.n_measurements = n_measurements
        self.n_shots = 0
        self._fh = open(self.path, "wb")
        self._fh.write(_HEADER.pack(PRB1_MAGIC, PRB1_VERSION, n_measurements, 0))

    def __call__(self, batch: np.ndarray) -> None:
        if batch.ndim != 2 or batch.shape[1] != self.n_measurements:
            raise ValidationError(
                f"批的形状 {batch.shape} 与测量数 {self.n_measurements} 不符"
            )
        self._fh.write(_pack(batch))
        self.n_shots += batch.shape[0]

    def close(self) -> None:
        if self._fh.closed:
            return
        self._fh.seek(0)
        self._fh.write(
            _HEADER.pack(PRB1_MAGIC, PRB1_VERSION, self.n_measurements, self.n_shots)
        )
        self._fh.close()

    def __enter__(self) -> "Prb1Writer":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()


def write_prb1(path: PathLike, dataset: Dataset) -> None:
    with Prb1Writer(path, dataset.n_measurements) as writer:
        for batch in dataset.iter_batches(4096):
            writer(batch)


def read_p01(path: PathLike, n_measurements: Optional[int] = None) -> Dataset:
    rows = []
    width = n_measurements
    with open(path, "r", encoding="ascii") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if width is None:
                width = len(line)
            if len(line) != width or line.strip("01"):
                raise FormatError(
                    f"{path}: 第 {line_no} 行应为 {width} 个 0/1 字符", line=line_no
                )
            rows.append(np.frombuffer(line.encode("ascii"), dtype=np.uint8) - ord("0"))
    bits = np.array(rows, dtype=np.uint8).reshape(len(rows), width or 0)
    return Dataset(bits, read_metadata(path))


def format_p01(bits: np.ndarray) -> str:
    chars = (np.asarray(bits, dtype=np.uint8) + ord("0")).astype(np.uint8)
    return "".join(row.tobytes().decode("ascii") + "\n" for row in chars)


def write_p01(path: PathLike, dataset: Dataset) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for batch in dataset.iter_batches(4096):
            fh.write(format_p01(batch))


def metadata_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def write_metadata(path: PathLike, metadata: Dict[str, Any]) -> None:
    metadata_path(path).write_text(to_json(metadata) + "\n", encoding="utf-8")


def read_metadata(path: PathLike) -> Dict[str, Any]:
    sidecar = metadata_path(path)
    if not sidecar.exists():
        return {}
    return from_json(sidecar.read_text(encoding="utf-8"))


_READERS: Dict[str, Callable[[PathLike], Dataset]] = {
    ".prb1": read_prb1,
    ".p01": read_p01,
    ".txt": read_p01,
}
_WRITERS: Dict[str, Callable[[PathLike, Dataset], None]] = {
    ".prb1": write_prb1,
    ".p01": write_p01,
    ".txt": write_p01,
}


def _suffix(path: PathLike) -> str:
    suffix = Path(path).suffix.lower()
    if suffix not in _READERS:
        raise ValidationError(f"无法识别的数据集扩展名 {suffix!r}（支持 .prb1 / .p01）")
    return suffix


def read_dataset(path: PathLike) -> Dataset:
    """按扩展名读取数据集（含旁注元数据）"""
    dataset = _READERS[_suffix(path)](path)
    logger.debug(f"读取 {path}: {dataset.n_shots} shots × {dataset.n_measurements}")
    return dataset


def write_dataset(path: PathLike, dataset: Dataset, sidecar: bool = True) -> None:
    """按扩展名写数据集；sidecar=True 时同时写 .meta.json"""
    _WRITERS[_suffix(path)](path, dataset)
    if sidecar:
        write_metadata(path, dataset.metadata)
