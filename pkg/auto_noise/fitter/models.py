"""
拟合相关的数据模型：配置、目标函数权重、阶段结果与拟合报告
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator

from auto_noise.errors import ValidationError
from auto_noise.noise.models import NoiseModel


class FitMode(str, Enum):
    MULTIROUND = "multiround"
    SINGLEROUND = "singleround"


class FractionTerm(str, Enum):
    """探测事件比例项的度量方式"""

    RMS = "rms"  # 整条曲线的均方根差
    SLOPE = "slope"  # 后半程线性斜率之差


@dataclass(frozen=True)
class Objective:
    """
    多轮拟合的加权损失

    loss = w_time·Δtimelike + w_space·Δspacelike + w_spacetime·Δspacetime
         + w_leak·Δleakage-tail + w_fraction·(比例曲线项) + w_prep·(第一轮逐辅助比特比例 RMS)
    """

    w_time: float = 0.0
    w_space: float = 0.0
    w_spacetime: float = 0.0
    w_leak: float = 0.0
    w_fraction: float = 0.0
    w_prep: float = 0.0
    fraction_term: FractionTerm = FractionTerm.RMS

    def __post_init__(self):
        weights = self.weights()
        if any(w < 0 for w in weights.values()):
            raise ValidationError(f"权重必须 ≥ 0: {weights}")
        if not any(w > 0 for w in weights.values()):
            raise ValidationError("至少需要一个正权重")
        object.__setattr__(self, "fraction_term", FractionTerm(self.fraction_term))

    def weights(self) -> Dict[str, float]:
        return {
            "w_time": self.w_time,
            "w_space": self.w_space,
            "w_spacetime": self.w_spacetime,
            "w_leak": self.w_leak,
            "w_fraction": self.w_fraction,
            "w_prep": self.w_prep,
        }

    @property
    def needs_correlation(self) -> bool:
        sector_weights = (self.w_time, self.w_space, self.w_spacetime, self.w_leak)
        return any(w > 0 for w in sector_weights)

    def to_dict(self) -> Dict[str, Any]:
        return {**self.weights(), "fraction_term": self.fraction_term.value}


DEFAULT_WEIGHTS: Dict[str, Dict[str, Any]] = {
    "stage1": dict(w_leak=1.0, w_fraction=1.0, fraction_term="slope"),
    "decoherence": dict(w_time=1.0, w_fraction=0.1),
    "gates": dict(w_space=1.0, w_spacetime=1.0),
    "readout": dict(w_time=1.0),
    "preparation": dict(w_prep=1.0),
    "stage3": dict(
        w_time=1.0, w_space=1.0, w_spacetime=1.0, w_leak=1.0, w_fraction=0.5
    ),
}


class FitConfig(BaseModel):
    """拟合配置"""

    mode: FitMode = Field(FitMode.MULTIROUND, description="multiround 或 singleround")
    stages: List[int] = Field(default_factory=lambda: [1, 2, 3], description="执行的阶段")
    stage1_budget: int = Field(300, ge=1, description="阶段 1 的目标函数调用预算")
    stage2_budget: int = Field(300, ge=1, description="阶段 2 每个分支的预算")
    stage3_budget: int = Field(400, ge=1, description="阶段 3 的预算")
    single_budget: int = Field(600, ge=1, description="单轮模式的预算")
    per_run_budget: int = Field(100, ge=1, description="逐次运行细化的预算")
    sigma0: float = Field(0.3, gt=0, description="变换坐标下的初始步长")
    popsize: Optional[int] = Field(None, ge=2, description="种群大小（默认按维度）")
    sim_shots: Optional[int] = Field(None, ge=2, description="每次评估的模拟 shot 数，默认与数据一致")
    sim_seed: int = Field(1, ge=0, description="验收评估使用的固定模拟种子")
    seed: int = Field(0, ge=0, description="CMA-ES 种子")
    crn: bool = Field(True, description="同一代候选共用模拟种子")
    threads: int = Field(1, ge=1, description="并行线程数")
    estimator: str = Field("exact", description="相关估计量 exact / first_order")
    weights: Dict[str, Dict[str, Any]] = Field(
        default_factory=dict, description="覆盖默认权重"
    )
    restart_stagnation_generations: int = Field(30, ge=1)
    restart_tolerance: float = Field(1e-9, ge=0)
    max_restarts: int = Field(1, ge=0)
    per_run_refinement: bool = Field(False, description="平均拟合后是否逐次运行细化")
    leak_prior: float = Field(1e-4, gt=0, lt=1, description="阶段 1 的 p_leak 起点")
    seep_prior: float = Field(1e-2, gt=0, lt=1, description="阶段 1 的 p_seep 起点")

    model_config = {"frozen": True}

    @field_validator("stages")
    @classmethod
    def _check_stages(cls, value: List[int]) -> List[int]:
        if not value or any(s not in (1, 2, 3) for s in value):
            raise ValueError(f"stages 只能是 1,2,3 的非空子集: {value}")
        return sorted(set(value))

    @field_validator("estimator")
    @classmethod
    def _check_estimator(cls, value: str) -> str:
        if value not in ("exact", "first_order"):
            raise ValueError(f"未知估计量 {value!r}")
        return value

    @field_validator("weights")
    @classmethod
    def _check_weights(
        cls, value: Dict[str, Dict[str, Any]]
    ) -> Dict[str, Dict[str, Any]]:
        unknown = set(value) - set(DEFAULT_WEIGHTS)
        if unknown:
            raise ValueError(f"未知权重组: {sorted(unknown)}")
        return value

    def objective(self, name: str) -> Objective:
        """某阶段 / 分支的目标函数（默认权重被配置覆盖）"""
        merged = {**DEFAULT_WEIGHTS[name], **self.weights.get(name, {})}
        return Objective(**merged)


@dataclass
class StageResult:
    """
    单个阶段（或阶段 2 的单个分支）的结果

    Attributes:
        name: 阶段名
        branch: 分支名（阶段 2）
        fields: 掩码字段
        dimension: 参数向量维度
        initial_loss / final_loss: 固定种子下起点与结果的损失
        trace: 每代历史最优损失（非增）
        evaluations: 目标函数调用次数
        exhausted: 是否耗尽预算
        accepted: 优化结果是否被采纳（否则保留起点）
    """

    name: str
    branch: str
    fields: List[str]
    dimension: int
    initial_loss: float
    final_loss: float
    trace: List[float] = field(default_factory=list)
    evaluations: int = 0
    restarts: int = 0
    exhausted: bool = False
    accepted: bool = True
    seed: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "branch": self.branch,
            "fields": list(self.fields),
            "dimension": self.dimension,
            "initial_loss": self.initial_loss,
            "final_loss": self.final_loss,
            "trace": list(self.trace),
            "evaluations": self.evaluations,
            "restarts": self.restarts,
            "exhausted": self.exhausted,
            "accepted": self.accepted,
            "seed": self.seed,
        }


@dataclass
class FitReport:
    """拟合报告"""

    mode: FitMode
    config: Dict[str, Any]
    initial_model: NoiseModel
    fitted_model: NoiseModel
    stages: List[StageResult] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    per_run_models: List[NoiseModel] = field(default_factory=list)
    trace: Dict[str, Any] = field(default_factory=dict)

    @property
    def evaluations(self) -> int:
        return sum(s.evaluations for s in self.stages)

    @property
    def budget_exhausted(self) -> bool:
        return any(s.exhausted for s in self.stages)

    def stage(self, name: str, branch: str = "") -> Optional[StageResult]:
        for s in self.stages:
            if s.name == name and s.branch == branch:
                return s
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode.value,
            "config": self.config,
            "initial_model": self.initial_model.to_dict(),
            "fitted_model": self.fitted_model.to_dict(),
            "stages": [s.to_dict() for s in self.stages],
            "evaluations": self.evaluations,
            "budget_exhausted": self.budget_exhausted,
            "warnings": list(self.warnings),
            "per_run_models": [m.to_dict() for m in self.per_run_models],
            "trace": self.trace,
        }
