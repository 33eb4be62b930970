"""
键值分块文本格式

标定文件、模型文件共用的格式::

    paems-model v1
    # 注释
    [model]
    kind = paems

    [qubit 0]
    t1 = 30.0

第一行非注释内容是带版本号的文件头；之后是 ``[节名 标签]`` 块与 ``key = value`` 行。
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

from auto_noise.errors import FormatError


@dataclass
class Block:
    """一个 ``[kind label]`` 块"""

    kind: str
    label: str = ""
    values: Dict[str, str] = field(default_factory=dict)
    line: int = 0

    @property
    def title(self) -> str:
        return f"{self.kind} {self.label}".strip()

    def require(self, key: str) -> str:
        if key not in self.values:
            raise FormatError(f"[{self.title}] 缺少字段 {key!r}", line=self.line)
        return self.values[key]


@dataclass
class KvDocument:
    header: str
    blocks: List[Block] = field(default_factory=list)

    def of_kind(self, kind: str) -> List[Block]:
        return [b for b in self.blocks if b.kind == kind]

    def single(self, kind: str, required: bool = True) -> Optional[Block]:
        found = self.of_kind(kind)
        if len(found) > 1:
            raise FormatError(f"[{kind}] 块重复", line=found[1].line)
        if not found:
            if required:
                raise FormatError(f"缺少 [{kind}] 块")
            return None
        return found[0]


def loads_kv(text: str, header: str) -> KvDocument:
    """
    解析键值分块文本

    Args:
        text: 文件内容
        header: 期望的文件头（如 ``paems-model v1``），名称或版本不符都会被拒绝

    Raises:
        FormatError: 带行号
    """
    doc: Optional[KvDocument] = None
    current: Optional[Block] = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if doc is None:
            if line != header:
                raise FormatError(
                    f"文件头应为 {header!r}，实际为 {line!r}", line=line_no
                )
            doc = KvDocument(header=line)
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise FormatError(f"无法解析的块头 {line!r}", line=line_no)
            kind, _, label = line[1:-1].strip().partition(" ")
            current = Block(kind=kind, label=label.strip(), line=line_no)
            doc.blocks.append(current)
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value or " " in key:
            raise FormatError(f"无法解析的行 {line!r}", line=line_no)
        if current is None:
            raise FormatError(f"键 {key!r} 出现在任何块之前", line=line_no)
        if key in current.values:
            raise FormatError(f"[{current.title}] 中键 {key!r} 重复", line=line_no)
        current.values[key] = value

    if doc is None:
        raise FormatError(f"空文件，缺少文件头 {header!r}")
    return doc


def dumps_kv(header: str, blocks: Iterable[Block], preamble: str = "") -> str:
    lines = [f"# {ln}" for ln in preamble.splitlines()]
    lines.append(header)
    for block in blocks:
        lines.append("")
        lines.append(f"[{block.title}]")
        lines.extend(f"{k} = {v}" for k, v in block.values.items())
    return "\n".join(lines) + "\n"
