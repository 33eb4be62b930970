"""
(μ/μ_w, λ)-CMA-ES

标准的加权重组 CMA-ES：秩一与秩 μ 协方差更新、累积步长自适应（CSA）。
- 先评估 x0，保证返回点不劣于起点
- 非有限目标值记为 +inf；整代全为 +inf 时中止
- 停滞（连续若干代最优值改进不超过阈值）时从最优点以加倍种群重启一次
- 同一代的候选可并行评估，结果顺序与串行一致
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional

import numpy as np

from auto_noise.errors import OptimizationAborted, ValidationError
from auto_noise.sampler.rng import derive_seed
from auto_noise.tracing import run_in_context, trace_generation, trace_restart

logger = logging.getLogger(__name__)

Objective = Callable[..., float]


@dataclass
class CmaState:
    """
    CMA-ES 内部状态

    Attributes:
        mean: 分布均值
        sigma: 全局步长
        C: 协方差矩阵（对称正定）
        p_sigma / p_c: 步长与协方差演化路径
        B / D: C 的特征向量与特征值平方根
        generation: 已完成代数
        lam: 种群大小
    """

    mean: np.ndarray
    sigma: float
    lam: int
    C: np.ndarray = None
    p_sigma: np.ndarray = None
    p_c: np.ndarray = None
    B: np.ndarray = None
    D: np.ndarray = None
    generation: int = 0

    def __post_init__(self):
        n = self.mean.size
        self.mu = self.lam // 2
        w = math.log(self.mu + 0.5) - np.log(np.arange(1, self.mu + 1))
        self.weights = w / w.sum()
        self.mueff = 1.0 / float(np.sum(self.weights**2))
        self.cc = (4 + self.mueff / n) / (n + 4 + 2 * self.mueff / n)
        self.cs = (self.mueff + 2) / (n + self.mueff + 5)
        self.c1 = 2 / ((n + 1.3) ** 2 + self.mueff)
        self.cmu = min(
            1 - self.c1,
            2 * (self.mueff - 2 + 1 / self.mueff) / ((n + 2) ** 2 + self.mueff),
        )
        excess = max(0.0, math.sqrt((self.mueff - 1) / (n + 1)) - 1)
        self.damps = 1 + 2 * excess + self.cs
        self.chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n**2))
        if self.C is None:
            self.C = np.eye(n)
        if self.p_sigma is None:
            self.p_sigma = np.zeros(n)
        if self.p_c is None:
            self.p_c = np.zeros(n)
        self._decompose()

    @property
    def dim(self) -> int:
        return int(self.mean.size)

    def _decompose(self) -> None:
        self.C = 0.5 * (self.C + self.C.T)
        eigvals, B = np.linalg.eigh(self.C)
        top = float(np.max(eigvals))
        if not np.isfinite(top) or top <= 0:
            # 协方差失效：退回各向同性
            self.C = np.eye(self.dim)
            eigvals, B = np.ones(self.dim), np.eye(self.dim)
        elif np.min(eigvals) <= top * 1e-14:
            eigvals = np.maximum(eigvals, top * 1e-14)
            self.C = (B * eigvals) @ B.T
        self.B = B
        self.D = np.sqrt(eigvals)

    def ask(self, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal((self.lam, self.dim))
        y = (z * self.D) @ self.B.T
        return self.mean + self.sigma * y

    def tell(self, candidates: np.ndarray, fitness: np.ndarray) -> None:
        order = np.argsort(fitness, kind="stable")
        selected = candidates[order[: self.mu]]
        old = self.mean
        self.mean = self.weights @ selected
        y_w = (self.mean - old) / self.sigma

        inv_sqrt = (self.B / self.D) @ self.B.T
        self.p_sigma = (1 - self.cs) * self.p_sigma + math.sqrt(
            self.cs * (2 - self.cs) * self.mueff
        ) * (inv_sqrt @ y_w)
        norm_ps = float(np.linalg.norm(self.p_sigma))
        denom = math.sqrt(1 - (1 - self.cs) ** (2 * (self.generation + 1)))
        hsig = norm_ps / denom / self.chi_n < 1.4 + 2 / (self.dim + 1)
        self.p_c = (1 - self.cc) * self.p_c + hsig * math.sqrt(
            self.cc * (2 - self.cc) * self.mueff
        ) * y_w

        steps = (selected - old) / self.sigma
        rank_mu = (steps.T * self.weights) @ steps
        rank_one = np.outer(self.p_c, self.p_c)
        if not hsig:
            rank_one = rank_one + self.cc * (2 - self.cc) * self.C
        self.C = (
            (1 - self.c1 - self.cmu) * self.C
            + self.c1 * rank_one
            + self.cmu * rank_mu
        )

        step = (self.cs / self.damps) * (norm_ps / self.chi_n - 1)
        self.sigma *= math.exp(min(1.0, step))
        self.generation += 1
        self._decompose()


@dataclass
class CmaResult:
    """
    优化结果，可按 (x_best, trace) 解包

    Attributes:
        x_best: 历史最优点
        f_best: 历史最优值
        trace: 每代结束时的历史最优值（非增）
        evaluations: 目标函数调用次数
        generations: 总代数
        restarts: 重启次数
        exhausted: 是否因预算耗尽而停止
    """

    x_best: np.ndarray
    f_best: float
    trace: List[float] = field(default_factory=list)
    evaluations: int = 0
    generations: int = 0
    restarts: int = 0
    exhausted: bool = False

    def __iter__(self) -> Iterator:
        yield self.x_best
        yield self.trace

    def to_dict(self):
        return {
            "x_best": [float(v) for v in self.x_best],
            "f_best": self.f_best,
            "trace": list(self.trace),
            "evaluations": self.evaluations,
            "generations": self.generations,
            "restarts": self.restarts,
            "exhausted": self.exhausted,
        }


def default_popsize(dim: int) -> int:
    return 4 + int(math.floor(3 * math.log(dim)))


def _safe(value) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        return math.inf
    return value if math.isfinite(value) else math.inf


def cma_es(
    objective: Objective,
    x0,
    sigma0: float,
    budget: int,
    seed: int = 0,
    *,
    popsize: Optional[int] = None,
    threads: int = 1,
    crn: bool = False,
    stagnation_generations: int = 30,
    tolerance: float = 1e-9,
    max_restarts: int = 1,
) -> CmaResult:
    """
    最小化 objective

    Args:
        objective: f(x)；crn=True 时为 f(x, seed)，同一代所有候选使用同一 seed
        x0: 起点
        sigma0: 初始步长
        budget: 目标函数调用次数上限，含起点的一次评估（≥ 种群大小 + 1）
        seed: 随机种子
        popsize: 种群大小，默认 4 + ⌊3 ln dim⌋
        threads: 并行评估线程数
        crn: 是否使用公共随机数
        stagnation_generations / tolerance: 停滞判据
        max_restarts: 停滞后最多重启次数

    Returns:
        CmaResult
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64)).ravel()
    dim = x0.size
    if dim < 1:
        raise ValidationError("维度必须 ≥ 1")
    if not sigma0 > 0:
        raise ValidationError(f"sigma0 必须 > 0，实际 {sigma0}")
    lam = popsize or default_popsize(dim)
    if budget < lam + 1:
        raise ValidationError(f"预算 {budget} 不足起点加一代（需 ≥ {lam + 1}）")

    rng = np.random.default_rng(seed)
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None

    def evaluate(points: np.ndarray, gen_seed: int) -> np.ndarray:
        def one(x):
            return _safe(objective(x, gen_seed) if crn else objective(x))

        if pool is None:
            return np.array([one(x) for x in points])
        calls = [run_in_context(one, x) for x in points]
        return np.array(list(pool.map(lambda call: call(), calls)))

    total_generations = 0
    evaluations = 0
    try:
        f0 = evaluate(x0[None, :], derive_seed(seed, 0))[0]
        evaluations = 1
        x_best, f_best = x0.copy(), f0
        trace: List[float] = []
        restarts = 0
        state = CmaState(mean=x0.copy(), sigma=float(sigma0), lam=lam)
        history: List[float] = []
        exhausted = True

        while evaluations + state.lam <= budget:
            gen_seed = derive_seed(seed, total_generations)
            candidates = state.ask(rng)
            fitness = evaluate(candidates, gen_seed)
            evaluations += candidates.shape[0]
            total_generations += 1

            if not np.isfinite(fitness).any():
                raise OptimizationAborted(
                    f"第 {total_generations} 代所有候选的目标值均非有限",
                    {
                        "generation": total_generations,
                        "sigma": state.sigma,
                        "mean": state.mean.tolist(),
                        "evaluations": evaluations,
                    },
                )
            i = int(np.argmin(fitness))
            if fitness[i] < f_best:
                x_best, f_best = candidates[i].copy(), float(fitness[i])
            state.tell(candidates, fitness)
            trace.append(f_best)
            history.append(f_best)
            trace_generation(
                total_generations, f_best, float(fitness[i]), state.sigma, evaluations
            )
            logger.debug(
                f"CMA-ES 第 {total_generations} 代: best={f_best:.6g} sigma={state.sigma:.3g}"
            )

            stalled = (
                len(history) > stagnation_generations
                and history[-stagnation_generations - 1] - f_best <= tolerance
            )
            degenerate = state.sigma * float(np.max(state.D)) < 1e-20
            if stalled or degenerate:
                if restarts >= max_restarts:
                    exhausted = False
                    break
                restarts += 1
                lam = state.lam * 2
                logger.warning(
                    f"CMA-ES 停滞，从最优点以种群 {lam} 重启（第 {restarts} 次）"
                )
                trace_restart(f"停滞重启，种群 {lam}", popsize=lam, best=f_best)
                state = CmaState(mean=x_best.copy(), sigma=float(sigma0), lam=lam)
                history = []
    finally:
        if pool is not None:
            pool.shutdown(wait=True)

    return CmaResult(
        x_best=x_best,
        f_best=float(f_best),
        trace=trace,
        evaluations=evaluations,
        generations=total_generations,
        restarts=restarts,
        exhausted=exhausted,
    )
