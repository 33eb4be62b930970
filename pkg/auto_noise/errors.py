"""
异常定义

CLI 依据异常类型决定退出码：ValidationError → 2，FormatError / OSError → 3。
"""

from typing import Any, Dict, Optional


class AutoNoiseError(Exception):
    """auto_noise 的异常基类"""


class ValidationError(AutoNoiseError, ValueError):
    """输入不满足前置条件（电路尺寸、参数范围、向量长度、几何不匹配等）"""


class FormatError(AutoNoiseError):
    """文件格式错误，附带出错的字节偏移或行号"""

    def __init__(
        self, message: str, *, offset: Optional[int] = None, line: Optional[int] = None
    ):
        self.offset = offset
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"offset {offset}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")


class SinkError(AutoNoiseError):
    """流式采样时下游 sink 失败"""

    def __init__(self, message: str, *, delivered_shots: int):
        self.delivered_shots = delivered_shots
        super().__init__(f"{message} (已交付 {delivered_shots} shots)")


class OptimizationAborted(AutoNoiseError):
    """CMA-ES 整代候选全部不可行"""

    def __init__(self, message: str, diagnostic: Optional[Dict[str, Any]] = None):
        self.diagnostic = diagnostic or {}
        super().__init__(message)
