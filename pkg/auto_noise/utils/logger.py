"""
日志工具
"""

import logging
import sys

_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logger(name: str = "auto_noise", level: int = logging.INFO):
    """
    设置日志

    重复调用只调整级别，不会叠加处理器。

    Args:
        name: 日志名称
        level: 日志级别

    Returns:
        Logger 实例
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)

    for handler in logger.handlers:
        if getattr(handler, "_auto_noise", False):
            handler.setLevel(level)
            return logger

    # 控制台处理器
    handler = logging.StreamHandler(sys.stdout)
    handler.setLevel(level)
    handler._auto_noise = True  # type: ignore[attr-defined]

    # 格式化
    handler.setFormatter(logging.Formatter(_FORMAT))

    logger.addHandler(handler)

    return logger
