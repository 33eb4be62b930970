"""
拟合：CMA-ES 优化器与三阶段 PAEMS 参数拟合流水线
"""

from auto_noise.fitter.baseline import (
    BaselineSelection,
    baseline_grid,
    select_baseline_p,
)
from auto_noise.fitter.cma import CmaResult, CmaState, cma_es
from auto_noise.fitter.models import (
    FitConfig,
    FitMode,
    FitReport,
    Objective,
    StageResult,
)
from auto_noise.fitter.objective import MultiroundStats, multiround_stats
from auto_noise.fitter.pipeline import fit, fit_multiround, fit_singleround

__all__ = [
    "BaselineSelection",
    "baseline_grid",
    "select_baseline_p",
    "CmaResult",
    "CmaState",
    "cma_es",
    "FitConfig",
    "FitMode",
    "FitReport",
    "Objective",
    "StageResult",
    "MultiroundStats",
    "multiround_stats",
    "fit",
    "fit_multiround",
    "fit_singleround",
]
