"""
Auto-Noise 重复码噪声建模工具

面向超导量子比特线性链的电路级随机噪声模型（PAEMS）与五种基线模型。

核心特性：
- 🔗 电路 IR：分层门级重复码电路、探测器枚举、文本格式
- 🎲 帧采样器：Pauli 帧 + 泄漏标志的向量化采样，按块确定性随机数
- 🔬 参考预言机：小规模态矢量轨迹模拟，用于交叉校验
- 📈 统计分析：两点相关矩阵与扇区划分、探测事件比例曲线、TVD
- 🎯 参数拟合：CMA-ES 三阶段流水线，并行分支与追踪
- 💾 读写：标定文件、模型文件、prb1/p01 数据集、CSV/JSON 报告
"""

from auto_noise._version import __version__
from auto_noise.analysis.correlation import (
    CorrelationReport,
    SectorDiff,
    correlation_matrix,
    sector_difference,
)
from auto_noise.analysis.detections import DetectionTensor, extract_detections
from auto_noise.analysis.distribution import StateDistribution, state_distribution, tvd
from auto_noise.analysis.sectors import Sector
from auto_noise.circuit.builder import build_repetition_code
from auto_noise.circuit.models import Basis, Circuit, GateTimingTable
from auto_noise.errors import (
    AutoNoiseError,
    FormatError,
    OptimizationAborted,
    SinkError,
    ValidationError,
)
from auto_noise.fitter.baseline import select_baseline_p
from auto_noise.fitter.cma import cma_es
from auto_noise.fitter.models import FitConfig, FitMode, FitReport
from auto_noise.fitter.pipeline import fit, fit_multiround, fit_singleround
from auto_noise.io.calibration import CalibrationRecord, init_model, load_calibration
from auto_noise.io.dataset import read_dataset, write_dataset
from auto_noise.io.model_file import read_model, write_model
from auto_noise.models import Dataset, StreamSummary
from auto_noise.noise.models import (
    LeakagePolicy,
    ModelKind,
    NoiseModel,
    QubitParams,
)
from auto_noise.noise.params import ParamMask, apply_vector, parameter_vector
from auto_noise.noise.schedule import ErrorSchedule, compile_schedule
from auto_noise.oracle.trajectory import oracle_check, oracle_sample
from auto_noise.sampler.frame import SamplerConfig, sample, sample_streaming

__all__ = [
    "__version__",
    # 电路
    "Basis",
    "Circuit",
    "GateTimingTable",
    "build_repetition_code",
    # 噪声模型
    "LeakagePolicy",
    "ModelKind",
    "NoiseModel",
    "QubitParams",
    "ParamMask",
    "apply_vector",
    "parameter_vector",
    "ErrorSchedule",
    "compile_schedule",
    # 采样
    "Dataset",
    "StreamSummary",
    "SamplerConfig",
    "sample",
    "sample_streaming",
    "oracle_check",
    "oracle_sample",
    # 分析
    "CorrelationReport",
    "DetectionTensor",
    "Sector",
    "SectorDiff",
    "StateDistribution",
    "correlation_matrix",
    "extract_detections",
    "sector_difference",
    "state_distribution",
    "tvd",
    # 拟合
    "FitConfig",
    "FitMode",
    "FitReport",
    "cma_es",
    "fit",
    "fit_multiround",
    "fit_singleround",
    "select_baseline_p",
    # 读写
    "CalibrationRecord",
    "init_model",
    "load_calibration",
    "read_dataset",
    "write_dataset",
    "read_model",
    "write_model",
    # 异常
    "AutoNoiseError",
    "FormatError",
    "OptimizationAborted",
    "SinkError",
    "ValidationError",
]
