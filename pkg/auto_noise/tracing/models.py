"""
Tracing 数据模型

拟合过程的追踪事件：每代 CMA-ES 的进度、阶段起止、重启与告警
"""

import itertools
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from auto_noise.utils.serialization import to_json


class EventType(Enum):
    """事件类型"""

    GENERATION = "generation"
    STAGE = "stage"
    RESTART = "restart"
    WARNING = "warning"


class StageAction(Enum):
    START = "start"
    END = "end"


@dataclass
class TraceEvent:
    """追踪事件基类"""

    event_id: int = 0
    event_type: EventType = EventType.WARNING
    timestamp: float = field(default_factory=time.time)
    stage: str = ""
    branch: str = ""
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self, include_timing: bool = False) -> Dict[str, Any]:
        """
        转换为字典

        Args:
            include_timing: 是否包含墙钟时间（默认不含，保证相同输入的报告逐字节一致）
        """
        data = {
            "event_id": self.event_id,
            "event_type": self.event_type.value,
            "stage": self.stage,
            "branch": self.branch,
            "metadata": self.metadata,
        }
        if include_timing:
            data["timestamp"] = self.timestamp
        return data


@dataclass
class GenerationEvent(TraceEvent):
    """一代 CMA-ES 结束"""

    event_type: EventType = field(default=EventType.GENERATION)
    generation: int = 0
    best_loss: float = float("inf")
    generation_best: float = float("inf")
    sigma: float = 0.0
    evaluations: int = 0

    def to_dict(self, include_timing: bool = False) -> Dict[str, Any]:
        base = super().to_dict(include_timing)
        base.update(
            {
                "generation": self.generation,
                "best_loss": self.best_loss,
                "generation_best": self.generation_best,
                "sigma": self.sigma,
                "evaluations": self.evaluations,
            }
        )
        return base


@dataclass
class StageEvent(TraceEvent):
    """阶段开始 / 结束"""

    event_type: EventType = field(default=EventType.STAGE)
    action: StageAction = StageAction.START
    loss: Optional[float] = None
    dimension: int = 0

    def to_dict(self, include_timing: bool = False) -> Dict[str, Any]:
        base = super().to_dict(include_timing)
        base.update(
            {
                "action": self.action.value,
                "loss": self.loss,
                "dimension": self.dimension,
            }
        )
        return base


@dataclass
class MessageEvent(TraceEvent):
    """重启或告警"""

    message: str = ""

    def to_dict(self, include_timing: bool = False) -> Dict[str, Any]:
        base = super().to_dict(include_timing)
        base["message"] = self.message
        return base


@dataclass
class FitTrace:
    """
    一次拟合的完整追踪

    事件编号按记录顺序递增；并行分支的事件可能交错，按 (stage, branch) 过滤即可还原各自序列。
    """

    name: str = ""
    metadata: Dict[str, Any] = field(default_factory=dict)
    events: List[TraceEvent] = field(default_factory=list)
    start_time: float = field(default_factory=time.time)
    end_time: Optional[float] = None
    _ids: Any = field(default_factory=lambda: itertools.count(1), repr=False)
    _lock: Any = field(default_factory=threading.Lock, repr=False)

    def add_event(self, event: TraceEvent) -> None:
        with self._lock:
            event.event_id = next(self._ids)
            self.events.append(event)

    def end(self) -> None:
        self.end_time = time.time()

    @property
    def duration_ms(self) -> float:
        end = self.end_time or time.time()
        return (end - self.start_time) * 1000

    def generations(self, stage: str, branch: str = "") -> List[GenerationEvent]:
        return [
            e
            for e in self.events
            if isinstance(e, GenerationEvent)
            and e.stage == stage
            and e.branch == branch
        ]

    def best_so_far(self, stage: str, branch: str = "") -> List[float]:
        return [e.best_loss for e in self.generations(stage, branch)]

    @staticmethod
    def _order_key(event: TraceEvent) -> Tuple[Any, ...]:
        # 阶段内的事件由同一线程依次记录，保持记录顺序；阶段外的事件按内容排序
        if event.stage:
            return (event.stage, event.branch, event.event_id)
        body = {k: v for k, v in event.to_dict().items() if k != "event_id"}
        return (event.stage, event.branch, 0, event.event_type.value, to_json(body))

    def _ordered_events(self, include_timing: bool) -> List[Dict[str, Any]]:
        ordered = sorted(self.events, key=self._order_key)
        out = []
        for i, event in enumerate(ordered, start=1):
            data = event.to_dict(include_timing)
            data["event_id"] = i
            out.append(data)
        return out

    def to_dict(self, include_timing: bool = False) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "name": self.name,
            "metadata": self.metadata,
            "event_count": len(self.events),
            "events": self._ordered_events(include_timing),
        }
        if include_timing:
            data["duration_ms"] = self.duration_ms
        return data
