"""
CMA-ES 与拟合流水线测试
"""

import math

import numpy as np
import pytest

from auto_noise.circuit.builder import build_repetition_code
from auto_noise.errors import OptimizationAborted, ValidationError
from auto_noise.fitter.baseline import baseline_grid, select_baseline_p
from auto_noise.fitter.cma import cma_es, default_popsize
from auto_noise.fitter.models import FitConfig, FitMode, Objective
from auto_noise.fitter.objective import MaskedLoss, simulate
from auto_noise.fitter.pipeline import fit, fit_multiround, fit_singleround
from auto_noise.noise.models import ModelKind, NoiseModel
from auto_noise.noise.params import LEAKAGE
from auto_noise.utils.serialization import to_json


def _sphere(x):
    return float(np.sum(np.asarray(x) ** 2))


def _rosenbrock(x):
    x = np.asarray(x)
    return float(100.0 * (x[1] - x[0] ** 2) ** 2 + (1.0 - x[0]) ** 2)


def _truth(n_qubits: int) -> NoiseModel:
    return NoiseModel.uniform_paems(
        n_qubits,
        t1=20.0,
        t2=25.0,
        f1q=0.995,
        f2q=0.97,
        p_init=0.01,
        p_reset=0.02,
        p_readout=0.03,
        p_leak=0.003,
        p_seep=0.1,
    )


def _init(n_qubits: int) -> NoiseModel:
    return NoiseModel.uniform_paems(
        n_qubits,
        t1=40.0,
        t2=30.0,
        f1q=0.999,
        f2q=0.99,
        p_init=0.005,
        p_reset=0.005,
        p_readout=0.01,
    )


class TestCmaEs:
    """CMA-ES 测试"""

    def test_sphere(self):
        """球函数收敛到原点"""
        result = cma_es(_sphere, [1.0, -2.0, 0.5], 0.5, budget=3000, seed=0)
        assert result.f_best < 1e-8
        assert np.allclose(result.x_best, 0.0, atol=1e-3)

    def test_rosenbrock(self):
        """二维 Rosenbrock 收敛到 (1, 1)"""
        result = cma_es(_rosenbrock, [-1.0, 1.5], 0.5, budget=6000, seed=3)
        assert result.f_best < 1e-4
        assert np.allclose(result.x_best, 1.0, atol=0.05)

    def test_one_dimension(self):
        """一维问题"""
        result = cma_es(lambda x: (x[0] - 2.0) ** 2, [5.0], 1.0, budget=500)
        assert abs(result.x_best[0] - 2.0) < 1e-3

    def test_trace_non_increasing_and_budget(self):
        """历史最优非增，调用次数不超过预算"""
        result = cma_es(_rosenbrock, [0.0, 0.0], 0.3, budget=200, seed=1)
        assert all(b <= a for a, b in zip(result.trace, result.trace[1:]))
        assert result.evaluations <= 200
        x_best, trace = result
        assert trace is result.trace

    def test_deterministic(self):
        """相同种子结果相同，与线程数无关"""
        a = cma_es(_sphere, [1.0, 1.0], 0.5, budget=300, seed=4)
        b = cma_es(_sphere, [1.0, 1.0], 0.5, budget=300, seed=4, threads=3)
        assert np.array_equal(a.x_best, b.x_best)
        assert a.trace == b.trace

    def test_infeasible_candidates_are_skipped(self):
        """非有限目标值被视为 +inf，优化继续"""

        def half_plane(x):
            return math.nan if x[0] < 0 else _sphere(x - 1.0)

        result = cma_es(half_plane, [2.0, 2.0], 0.5, budget=1500, seed=2)
        assert result.f_best < 1e-4

    def test_all_infeasible_aborts(self):
        """整代都不可行时中止并给出诊断"""
        with pytest.raises(OptimizationAborted) as exc:
            cma_es(lambda x: math.inf, [0.0, 0.0], 0.5, budget=100)
        assert exc.value.diagnostic["generation"] == 1

    def test_common_random_numbers(self):
        """crn 模式下同一代候选收到同一个种子"""
        seen = []

        def noisy(x, seed):
            seen.append(seed)
            return _sphere(x)

        lam = default_popsize(2)
        result = cma_es(noisy, [1.0, 1.0], 0.5, budget=1 + 3 * lam, crn=True)
        generations = [seen[1 + g * lam : 1 + (g + 1) * lam] for g in range(3)]
        assert result.generations == 3
        assert all(len(set(g)) == 1 for g in generations)
        assert len({g[0] for g in generations}) == 3

    def test_rejects_bad_arguments(self):
        """预算不足一代、非正步长"""
        with pytest.raises(ValidationError):
            cma_es(_sphere, [0.0, 0.0], 0.5, budget=2)
        with pytest.raises(ValidationError):
            cma_es(_sphere, [0.0], 0.0, budget=100)

    def test_budget_must_cover_start_and_one_generation(self):
        """预算等于种群大小时拒绝；多一次评估时恰好跑一代"""
        x0 = [3.0, -3.0]
        lam = default_popsize(2)
        with pytest.raises(ValidationError):
            cma_es(_sphere, x0, 0.5, budget=lam, seed=0)
        result = cma_es(_sphere, x0, 0.5, budget=lam + 1, seed=0)
        assert result.generations == 1
        assert result.evaluations == lam + 1
        assert len(result.trace) == 1


class TestObjective:
    """目标函数权重测试"""

    def test_needs_positive_weight(self):
        """至少一个正权重且全部非负"""
        with pytest.raises(ValidationError):
            Objective()
        with pytest.raises(ValidationError):
            Objective(w_time=1.0, w_space=-0.5)
        assert Objective(w_fraction=1.0).needs_correlation is False

    def test_config_overrides_defaults(self):
        """配置中的权重覆盖默认值"""
        cfg = FitConfig(weights={"gates": {"w_space": 2.0}})
        objective = cfg.objective("gates")
        assert objective.w_space == 2.0
        assert objective.w_spacetime == 1.0

    def test_config_validation(self):
        """阶段与估计量取值"""
        with pytest.raises(ValueError):
            FitConfig(stages=[4])
        with pytest.raises(ValueError):
            FitConfig(estimator="median")
        with pytest.raises(ValueError):
            FitConfig(weights={"stage9": {}})
        assert FitConfig(stages=[3, 1, 3]).stages == [1, 3]

    def test_masked_loss_is_abstract(self):
        """未实现 loss_of_model 的子类不能实例化"""
        circuit = build_repetition_code(3, 1)
        with pytest.raises(TypeError):
            MaskedLoss(circuit, _init(3), LEAKAGE, 100, 0)

        class Constant(MaskedLoss):
            def loss_of_model(self, model, seed):
                return 0.5

        loss = Constant(circuit, _init(3), LEAKAGE, 100, 0)
        assert loss.loss_of_model(_init(3), 0) == 0.5


class TestFitMultiround:
    """多轮拟合流水线测试"""

    def setup_method(self):
        self.circuit = build_repetition_code(3, 4)
        self.data = simulate(self.circuit, _truth(3), 1500, seed=7)
        self.cfg = FitConfig(
            stage1_budget=13,
            stage2_budget=13,
            stage3_budget=13,
            popsize=4,
            sim_shots=800,
            seed=5,
        )

    def test_stages_and_acceptance(self):
        """三个阶段依次执行，每个阶段的结果都不劣于起点"""
        report = fit_multiround(self.data, self.circuit, _init(3), self.cfg)
        assert report.mode == FitMode.MULTIROUND
        names = [(s.name, s.branch) for s in report.stages]
        assert names == [
            ("stage1", ""),
            ("stage2", "decoherence"),
            ("stage2", "gates"),
            ("stage2", "readout"),
            ("stage2", "preparation"),
            ("stage2", "merge"),
            ("stage3", ""),
        ]
        for s in report.stages:
            assert s.final_loss <= s.initial_loss
            assert all(b <= a for a, b in zip(s.trace, s.trace[1:]))
        assert report.stage("stage1").fields == ["p_leak", "p_seep"]
        assert report.fitted_model.n_qubits == 3
        assert report.evaluations > 0

    def test_report_is_serializable(self):
        """报告可序列化，配置中不含线程数"""
        report = fit_multiround(self.data, self.circuit, _init(3), self.cfg)
        text = to_json(report.to_dict())
        assert '"threads"' not in text
        assert report.trace["events"]
        assert report.trace["name"] == "multiround"

    def test_thread_invariance(self):
        """拟合结果与线程数无关"""
        a = fit_multiround(self.data, self.circuit, _init(3), self.cfg)
        for threads in (4, 4, 8):
            threaded = self.cfg.model_copy(update={"threads": threads})
            b = fit_multiround(self.data, self.circuit, _init(3), threaded)
            assert a.fitted_model == b.fitted_model
            assert to_json(a.to_dict()) == to_json(b.to_dict())

    def test_stage_selection(self):
        """只执行选中的阶段"""
        cfg = self.cfg.model_copy(update={"stages": [3]})
        report = fit_multiround(self.data, self.circuit, _init(3), cfg)
        assert [s.name for s in report.stages] == ["stage3"]

    def test_multiple_runs_and_per_run_refinement(self):
        """多次运行：相关矩阵逐次平均，并可逐次细化"""
        runs = self.data.split_runs(500)
        cfg = self.cfg.model_copy(
            update={"stages": [1], "per_run_refinement": True, "per_run_budget": 9}
        )
        report = fit_multiround(runs, self.circuit, _init(3), cfg)
        assert len(report.per_run_models) == 3
        assert [s.branch for s in report.stages if s.name == "per_run"] == [
            "run0",
            "run1",
            "run2",
        ]

    def test_small_budget_warns(self):
        """预算耗尽时记录告警"""
        report = fit_multiround(self.data, self.circuit, _init(3), self.cfg)
        assert report.budget_exhausted
        assert report.warnings
        recorded = [e for e in report.trace["events"] if e["event_type"] == "warning"]
        assert len(recorded) == len(report.warnings)
        assert all(e["stage"] for e in recorded)

    def test_rejects_baseline_init(self):
        """只能拟合 PAEMS 模型"""
        with pytest.raises(ValidationError):
            fit_multiround(
                self.data, self.circuit, NoiseModel.baseline("sd6", 0.01), self.cfg
            )


class TestFitSingleround:
    """单轮拟合测试"""

    def setup_method(self):
        self.circuit = build_repetition_code(3, 1)
        self.data = simulate(self.circuit, _truth(3), 2000, seed=3)
        self.cfg = FitConfig(
            mode=FitMode.SINGLEROUND, single_budget=25, popsize=4, sim_shots=1000
        )

    def test_smoke(self):
        """单阶段 TVD 拟合，泄漏参数固定为 0"""
        report = fit(self.data, self.circuit, _init(3), self.cfg)
        assert report.mode == FitMode.SINGLEROUND
        assert [s.name for s in report.stages] == ["single"]
        stage = report.stages[0]
        assert stage.final_loss <= stage.initial_loss
        qubits = report.fitted_model.qubits
        assert all(q.p_leak == 0.0 and q.p_seep == 0.0 for q in qubits)

    def test_requires_single_round(self):
        """多轮电路不能做单轮拟合"""
        with pytest.raises(ValidationError):
            circuit = build_repetition_code(3, 2)
            fit_singleround(self.data, circuit, _init(3), self.cfg)


class TestSelectBaselineP:
    """基线模型 p 选择测试"""

    def test_recovers_generating_p_multiround(self):
        """由某个 p 生成的数据在网格上选回该 p"""
        circuit = build_repetition_code(5, 4)
        data = simulate(circuit, NoiseModel.baseline("si1000", 0.01), 8000, seed=21)
        grid = [0.0025, 0.005, 0.01, 0.02, 0.04]
        result = select_baseline_p(ModelKind.SI1000, data, circuit, grid, seed=2)
        assert result.p_opt == 0.01
        assert result.metric == "sector"
        assert set(result.losses) == set(grid)

    def test_single_round_uses_tvd(self):
        """单轮电路用 TVD"""
        circuit = build_repetition_code(5, 1)
        data = simulate(circuit, NoiseModel.baseline("cc", 0.1), 8000, seed=22)
        grid = [0.025, 0.05, 0.1, 0.2, 0.4]
        result = select_baseline_p("cc", data, circuit, grid, seed=3)
        assert result.metric == "tvd"
        assert result.p_opt == 0.1

    def test_rejects_paems_and_empty_grid(self):
        """非基线模型或空网格"""
        circuit = build_repetition_code(3, 2)
        data = simulate(circuit, NoiseModel.baseline("sd6", 0.01), 100, seed=0)
        with pytest.raises(ValidationError):
            select_baseline_p("paems", data, circuit, [0.01])
        with pytest.raises(ValidationError):
            select_baseline_p("sd6", data, circuit, [])

    def test_default_grids(self):
        """每种基线模型都有默认网格"""
        for kind in ModelKind:
            if kind.is_baseline:
                grid = baseline_grid(kind)
                assert len(grid) == 7
                assert grid == sorted(grid)
