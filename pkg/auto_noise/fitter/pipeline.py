"""
PAEMS 参数拟合流水线

多轮模式（阶段 0 为标定映射，由 io.calibration.init_model 完成）：
    阶段 1  只优化泄漏参数 {p_leak, p_seep}
    阶段 2  并行分支：退相干 (t1,t2) / 门保真度 / 读出与复位 / 态制备 (p_init)，
            各分支只采纳自己掩码内的字段
    阶段 3  全参数全局微调
单轮模式：核心参数（不含泄漏）联合优化，目标为输出态分布的 TVD。

每个阶段结束时在固定模拟种子下比较起点与结果，只在结果不劣于起点时采纳。
"""

import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

from auto_noise.analysis.distribution import state_distribution
from auto_noise.circuit.models import Circuit
from auto_noise.errors import ValidationError
from auto_noise.fitter.cma import cma_es, default_popsize
from auto_noise.fitter.models import FitConfig, FitMode, FitReport, StageResult
from auto_noise.fitter.objective import (
    DatasetLike,
    MaskedLoss,
    MultiroundLoss,
    TvdLoss,
    as_runs,
    multiround_stats,
)
from auto_noise.noise.models import NoiseModel
from auto_noise.noise.params import (
    CORE,
    DECOHERENCE,
    FULL,
    GATES,
    LEAKAGE,
    PREPARATION,
    READOUT,
    ParamMask,
    copy_masked,
    parameter_vector,
    with_leakage_prior,
)
from auto_noise.sampler.rng import derive_seed
from auto_noise.tracing import Tracer, run_in_context, stage, trace_warning

logger = logging.getLogger(__name__)

STAGE2_BRANCHES: Tuple[Tuple[str, ParamMask], ...] = (
    ("decoherence", DECOHERENCE),
    ("gates", GATES),
    ("readout", READOUT),
    ("preparation", PREPARATION),
)


def _run_stage(
    name: str,
    branch: str,
    loss: MaskedLoss,
    cfg: FitConfig,
    budget: int,
    seed: int,
    warnings: List[str],
    threads: int = 1,
    reference: Optional[NoiseModel] = None,
) -> Tuple[NoiseModel, StageResult]:
    """
    运行一个 CMA-ES 阶段

    Args:
        reference: 验收时与结果比较的模型（默认为优化起点）
    """
    start = loss.base_model
    reference = reference or start
    x0 = parameter_vector(start, loss.mask)
    dim = int(x0.size)
    fields = sorted(loss.mask.fields)

    with stage(name, branch, dimension=dim) as st:
        initial = loss.loss_of_model(reference, loss.seed)
        if dim == 0:
            st.loss = initial
            result = StageResult(name, branch, fields, 0, initial, initial, seed=seed)
            return reference, result

        lam = cfg.popsize or default_popsize(dim)
        if budget < lam + 1:
            logger.warning(f"{name}/{branch} 预算 {budget} 不足一代，提升到 {lam + 1}")
            budget = lam + 1
        logger.info(f"{name}{'/' + branch if branch else ''} 开始: 维度 {dim}, 预算 {budget}")

        result = cma_es(
            loss,
            x0,
            cfg.sigma0,
            budget,
            seed,
            popsize=cfg.popsize,
            threads=threads,
            crn=cfg.crn,
            stagnation_generations=cfg.restart_stagnation_generations,
            tolerance=cfg.restart_tolerance,
            max_restarts=cfg.max_restarts,
        )
        candidate = loss.model_at(result.x_best)
        final = loss.loss_of_model(candidate, loss.seed)
        accepted = final <= initial
        chosen = candidate if accepted else reference
        st.loss = min(final, initial)
        if result.exhausted:
            label = f"{name}/{branch}" if branch else name
            message = f"{label} 预算耗尽，返回当前最优结果"
            logger.warning(message)
            trace_warning(message)
            warnings.append(message)

    logger.info(
        f"{name}{'/' + branch if branch else ''} 结束: "
        f"{initial:.6g} -> {min(final, initial):.6g}"
        f"{'' if accepted else '（未采纳）'}"
    )
    return chosen, StageResult(
        name=name,
        branch=branch,
        fields=fields,
        dimension=dim,
        initial_loss=initial,
        final_loss=min(final, initial),
        trace=list(result.trace),
        evaluations=result.evaluations,
        restarts=result.restarts,
        exhausted=result.exhausted,
        accepted=accepted,
        seed=seed,
    )


def _require_paems(model: NoiseModel, circuit: Circuit) -> None:
    if model.kind.is_baseline:
        raise ValidationError("只能拟合 PAEMS 模型")
    if model.n_qubits < circuit.n_qubits:
        raise ValidationError(
            f"模型只有 {model.n_qubits} 个比特，电路需要 {circuit.n_qubits} 个"
        )


def fit_multiround(
    data: DatasetLike,
    circuit: Circuit,
    init: NoiseModel,
    cfg: Optional[FitConfig] = None,
) -> FitReport:
    """
    三阶段多轮拟合

    Args:
        data: 一次或多次运行的数据集（多次运行时相关矩阵先逐次计算再平均）
        circuit: 多轮重复码电路
        init: 由标定映射得到的初始模型
        cfg: 拟合配置

    Returns:
        FitReport
    """
    cfg = cfg or FitConfig()
    _require_paems(init, circuit)
    runs = as_runs(data)
    target = multiround_stats(runs, circuit, cfg.estimator)
    shots = cfg.sim_shots or target.n_shots
    warnings: List[str] = []
    stages: List[StageResult] = []
    model = init

    def loss_for(base: NoiseModel, mask: ParamMask, objective_name: str, tgt=target):
        return MultiroundLoss(
            circuit,
            base,
            mask,
            tgt,
            cfg.objective(objective_name),
            shots,
            cfg.sim_seed,
            cfg.estimator,
        )

    with Tracer.start("multiround", {"shots": shots, "runs": len(runs)}) as trace:
        if 1 in cfg.stages:
            start = with_leakage_prior(model, cfg.leak_prior, cfg.seep_prior)
            model, result = _run_stage(
                "stage1",
                "",
                loss_for(start, LEAKAGE, "stage1"),
                cfg,
                cfg.stage1_budget,
                derive_seed(cfg.seed, 1),
                warnings,
                threads=cfg.threads,
                reference=model,
            )
            stages.append(result)

        if 2 in cfg.stages:
            base = model
            workers = min(len(STAGE2_BRANCHES), cfg.threads)
            inner = max(1, cfg.threads // len(STAGE2_BRANCHES))
            jobs = [
                run_in_context(
                    _run_stage,
                    "stage2",
                    branch,
                    loss_for(base, mask, branch),
                    cfg,
                    cfg.stage2_budget,
                    derive_seed(cfg.seed, 2, i),
                    warnings,
                    inner,
                )
                for i, (branch, mask) in enumerate(STAGE2_BRANCHES)
            ]
            if workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    outcomes = list(pool.map(lambda job: job(), jobs))
            else:
                outcomes = [job() for job in jobs]

            merged = base
            for (_, mask), (branch_model, result) in zip(STAGE2_BRANCHES, outcomes):
                merged = copy_masked(merged, branch_model, mask)
                stages.append(result)

            check = loss_for(base, FULL, "stage3")
            before = check.loss_of_model(base, cfg.sim_seed)
            after = check.loss_of_model(merged, cfg.sim_seed)
            keep = after <= before
            model = merged if keep else base
            if not keep:
                logger.info(f"stage2 合并结果劣于起点 ({after:.6g} > {before:.6g})，保留起点")
            stages.append(
                StageResult(
                    "stage2",
                    "merge",
                    sorted(set().union(*(m.fields for _, m in STAGE2_BRANCHES))),
                    0,
                    before,
                    min(before, after),
                    accepted=keep,
                )
            )

        if 3 in cfg.stages:
            model, result = _run_stage(
                "stage3",
                "",
                loss_for(model, FULL, "stage3"),
                cfg,
                cfg.stage3_budget,
                derive_seed(cfg.seed, 3),
                warnings,
                threads=cfg.threads,
            )
            stages.append(result)

        per_run: List[NoiseModel] = []
        if cfg.per_run_refinement and len(runs) > 1:
            for k, run in enumerate(runs):
                run_target = multiround_stats(run, circuit, cfg.estimator)
                refined, result = _run_stage(
                    "per_run",
                    f"run{k}",
                    loss_for(model, CORE, "stage3", tgt=run_target),
                    cfg,
                    cfg.per_run_budget,
                    derive_seed(cfg.seed, 4, k),
                    warnings,
                    threads=cfg.threads,
                )
                per_run.append(refined)
                stages.append(result)

    return FitReport(
        mode=FitMode.MULTIROUND,
        config=cfg.model_dump(mode="json", exclude={"threads"}),
        initial_model=init,
        fitted_model=model,
        stages=stages,
        warnings=sorted(warnings),
        per_run_models=per_run,
        trace=trace.to_dict(),
    )


def _without_leakage(model: NoiseModel) -> NoiseModel:
    qubits = tuple(dataclasses.replace(q, p_leak=0.0, p_seep=0.0) for q in model.qubits)
    return dataclasses.replace(model, qubits=qubits)


def fit_singleround(
    data: DatasetLike,
    circuit: Circuit,
    init: NoiseModel,
    cfg: Optional[FitConfig] = None,
) -> FitReport:
    """
    单轮拟合：泄漏参数固定为 0，核心参数联合优化，目标为 TVD

    Args:
        data: 单轮实验数据集（多次运行会被合并）
        circuit: rounds = 1 的电路
        init: 初始模型
        cfg: 拟合配置

    Returns:
        FitReport
    """
    cfg = cfg or FitConfig(mode=FitMode.SINGLEROUND)
    if circuit.rounds != 1:
        raise ValidationError(f"单轮拟合要求 rounds = 1，实际 {circuit.rounds}")
    _require_paems(init, circuit)
    runs = as_runs(data)
    merged = runs[0] if len(runs) == 1 else runs[0].concat(runs)
    target = state_distribution(merged)
    shots = cfg.sim_shots or merged.n_shots
    warnings: List[str] = []
    start = _without_leakage(init)

    with Tracer.start("singleround", {"shots": shots}) as trace:
        loss = TvdLoss(circuit, start, CORE, target, shots, cfg.sim_seed)
        model, result = _run_stage(
            "single",
            "",
            loss,
            cfg,
            cfg.single_budget,
            derive_seed(cfg.seed, 5),
            warnings,
            threads=cfg.threads,
        )

    return FitReport(
        mode=FitMode.SINGLEROUND,
        config=cfg.model_dump(mode="json", exclude={"threads"}),
        initial_model=init,
        fitted_model=model,
        stages=[result],
        warnings=warnings,
        trace=trace.to_dict(),
    )


def fit(
    data: DatasetLike, circuit: Circuit, init: NoiseModel, cfg: FitConfig
) -> FitReport:
    """按 cfg.mode 分派"""
    if cfg.mode == FitMode.SINGLEROUND:
        return fit_singleround(data, circuit, init, cfg)
    return fit_multiround(data, circuit, init, cfg)
