"""
Tracing Context - 追踪上下文管理

使用 ContextVar 传递当前 FitTrace；在线程池中执行的分支通过 contextvars.copy_context()
继承同一个追踪对象。
"""

import contextvars
from contextvars import ContextVar
from typing import Any, Callable, Dict, Optional, TypeVar

from auto_noise.tracing.models import (
    EventType,
    FitTrace,
    GenerationEvent,
    MessageEvent,
    StageAction,
    StageEvent,
)

_trace_ctx: ContextVar[Optional[FitTrace]] = ContextVar("fit_trace", default=None)
_stage_ctx: ContextVar[tuple] = ContextVar("fit_stage", default=("", ""))

T = TypeVar("T")


class Tracer:
    """
    追踪器

    使用示例：
        with Tracer.start("multiround") as trace:
            ...
        report = trace.to_dict()
    """

    @staticmethod
    def start(
        name: str = "", metadata: Optional[Dict[str, Any]] = None
    ) -> "TracerContextManager":
        return TracerContextManager(name, metadata)

    @staticmethod
    def get_current() -> Optional[FitTrace]:
        return _trace_ctx.get()


class TracerContextManager:
    """追踪上下文管理器（已有追踪时复用外层追踪）"""

    def __init__(self, name: str = "", metadata: Optional[Dict[str, Any]] = None):
        self.name = name
        self.metadata = metadata or {}
        self.trace: Optional[FitTrace] = None
        self._token = None
        self._owned = False

    def __enter__(self) -> FitTrace:
        current = _trace_ctx.get()
        if current is not None:
            self.trace = current
            return current
        self.trace = FitTrace(name=self.name, metadata=self.metadata)
        self._owned = True
        self._token = _trace_ctx.set(self.trace)
        return self.trace

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self._owned and self.trace:
            self.trace.end()
        if self._token is not None:
            _trace_ctx.reset(self._token)
        return False


class StageContextManager:
    """设置当前阶段 / 分支标签，并记录起止事件"""

    def __init__(self, stage: str, branch: str = "", dimension: int = 0):
        self.stage = stage
        self.branch = branch
        self.dimension = dimension
        self.loss: Optional[float] = None
        self._token = None

    def __enter__(self) -> "StageContextManager":
        self._token = _stage_ctx.set((self.stage, self.branch))
        _emit(StageEvent(action=StageAction.START, dimension=self.dimension))
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        _emit(
            StageEvent(
                action=StageAction.END, loss=self.loss, dimension=self.dimension
            )
        )
        if self._token is not None:
            _stage_ctx.reset(self._token)
        return False


# ==================== 便捷函数 ====================


def get_current_trace() -> Optional[FitTrace]:
    return _trace_ctx.get()


def current_stage() -> tuple:
    """(stage, branch)"""
    return _stage_ctx.get()


def stage(name: str, branch: str = "", dimension: int = 0) -> StageContextManager:
    return StageContextManager(name, branch, dimension)


def run_in_context(fn: Callable[..., T], *args, **kwargs) -> Callable[[], T]:
    """包装成在当前上下文副本中执行的无参调用，用于提交到线程池"""
    ctx = contextvars.copy_context()
    return lambda: ctx.run(fn, *args, **kwargs)


def _emit(event) -> None:
    trace = get_current_trace()
    if trace is None:
        return
    event.stage, event.branch = current_stage()
    trace.add_event(event)


def trace_generation(
    generation: int,
    best_loss: float,
    generation_best: float,
    sigma: float,
    evaluations: int,
) -> None:
    """记录一代 CMA-ES 的进度"""
    _emit(
        GenerationEvent(
            generation=generation,
            best_loss=best_loss,
            generation_best=generation_best,
            sigma=sigma,
            evaluations=evaluations,
        )
    )


def trace_restart(message: str, **metadata) -> None:
    _emit(
        MessageEvent(event_type=EventType.RESTART, message=message, metadata=metadata)
    )


def trace_warning(message: str, **metadata) -> None:
    _emit(
        MessageEvent(event_type=EventType.WARNING, message=message, metadata=metadata)
    )
