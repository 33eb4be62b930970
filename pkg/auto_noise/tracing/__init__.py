"""
拟合追踪系统

记录 CMA-ES 每一代的进度、阶段起止、重启与告警，嵌入 FitReport。

使用方式：
    from auto_noise.tracing import Tracer

    with Tracer.start("multiround") as trace:
        ...
    report = trace.to_dict()
"""

from auto_noise.tracing.context import (
    Tracer,
    current_stage,
    get_current_trace,
    run_in_context,
    stage,
    trace_generation,
    trace_restart,
    trace_warning,
)
from auto_noise.tracing.models import (
    EventType,
    FitTrace,
    GenerationEvent,
    MessageEvent,
    StageAction,
    StageEvent,
    TraceEvent,
)

__all__ = [
    # 数据模型
    "EventType",
    "FitTrace",
    "GenerationEvent",
    "MessageEvent",
    "StageAction",
    "StageEvent",
    "TraceEvent",
    # 追踪工具
    "Tracer",
    "current_stage",
    "get_current_trace",
    "run_in_context",
    "stage",
    "trace_generation",
    "trace_restart",
    "trace_warning",
]
