"""
命令行入口

    auto-noise build --qubits 7 --rounds 10 --output c.txt
    auto-noise sample --circuit c.txt --model m.paems --shots 4096 --seed 7 --output d.prb1
    auto-noise compare --circuit c.txt --experiment d.prb1 --models m.paems si1000:0.015 \\
        --output diff.csv --fraction-output fraction.csv

退出码：0 成功；1 校验未通过（oracle-check）或优化中止；2 输入校验失败；
3 文件格式错误或 I/O 错误。失败时删除本次命令已写出的部分产物。
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from pydantic import BaseModel, Field, field_validator
from pydantic import ValidationError as PydanticValidationError

from auto_noise._version import __version__
from auto_noise.analysis.correlation import (
    average_reports,
    correlation_matrix,
    sector_difference,
)
from auto_noise.analysis.detections import detection_fraction, extract_detections
from auto_noise.analysis.distribution import (
    state_distribution,
    statistical_tvd_floor,
    tvd,
)
from auto_noise.circuit.builder import build_repetition_code
from auto_noise.circuit.models import Basis, GateTimingTable
from auto_noise.circuit.text_format import read_circuit, write_circuit
from auto_noise.errors import (
    AutoNoiseError,
    FormatError,
    SinkError,
    ValidationError,
)
from auto_noise.fitter.baseline import baseline_grid, select_baseline_p
from auto_noise.fitter.models import FitConfig, FitMode
from auto_noise.fitter.objective import multiround_stats, simulate
from auto_noise.fitter.pipeline import fit
from auto_noise.io.calibration import init_model, load_calibration
from auto_noise.io.dataset import (
    Prb1Writer,
    metadata_path,
    read_dataset,
    write_dataset,
    write_metadata,
)
from auto_noise.io.fit_config import read_fit_config
from auto_noise.io.model_file import parse_model_spec, write_model
from auto_noise.models import Dataset
from auto_noise.noise.models import ModelKind
from auto_noise.noise.schedule import compile_schedule
from auto_noise.oracle.trajectory import CHECK_CHANNELS, oracle_check, oracle_sample
from auto_noise.report.generator import (
    ReportGenerator,
    write_correlation_csv,
    write_fraction_csv,
    write_sector_diff_csv,
    write_summary_json,
)
from auto_noise.sampler.frame import (
    SamplerConfig,
    dataset_metadata,
    default_threads,
    sample,
    sample_streaming,
)
from auto_noise.utils.logger import setup_logger
from auto_noise.utils.serialization import config_hash, to_json

logger = logging.getLogger(__name__)

SUBCOMMANDS = (
    "build",
    "sample",
    "detect",
    "correlate",
    "fraction",
    "tvd",
    "fit",
    "select-p",
    "compare",
    "oracle-check",
)

INPUT_KEYS = (
    "circuit",
    "model",
    "models",
    "data",
    "experiment",
    "reference",
    "calibration",
    "init_model",
    "config",
    "weights",
)
OUTPUT_KEYS = ("output", "model_out", "fraction_output", "summary")
# 不影响结果的参数不进入配置摘要
_RUNTIME_KEYS = ("command", "handler", "threads", "log_level")

FORMATS_HELP = """\
文件格式:
  电路        circuit v1 文本（LAYER / DET 行）
  模型        paems-model v1 键值分块文本；命令行也接受 <kind>:<p>，
              如 si1000:0.015、sd6:0.02、circuit:0.025、cc:0.15、phe:0.075
  标定        paems-calibration v1 键值分块文本
  拟合配置    paems-fit v1 键值分块文本（[fit] 与 [weights <stage>] 块）
  数据集      .prb1 二进制（小端，16 字节头 + 按行位打包）或 .p01 文本
              （每行一个 0/1 串），旁注元数据写在 <文件>.meta.json
  报告        CSV 首行为 '# auto-noise <版本> seed=<s> config=<摘要>'；
              JSON 含 provenance 字段
"""


class CommandConfig(BaseModel):
    """一次命令调用的完整解析后配置"""

    command: str = Field(..., description="子命令")
    inputs: Dict[str, Any] = Field(default_factory=dict, description="输入文件")
    outputs: Dict[str, str] = Field(default_factory=dict, description="输出文件")
    seed: Optional[int] = Field(None, ge=0, description="随机种子")
    shots: Optional[int] = Field(None, ge=1, description="模拟 shot 数")
    options: Dict[str, Any] = Field(default_factory=dict, description="其余选项")
    threads: int = Field(1, ge=1, description="工作线程数（不影响结果）")

    model_config = {"frozen": True}

    @field_validator("command")
    @classmethod
    def _check_command(cls, value: str) -> str:
        if value not in SUBCOMMANDS:
            raise ValueError(f"未知子命令 {value!r}")
        return value

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "CommandConfig":
        values = {k: v for k, v in vars(args).items() if v is not None}
        return cls(
            command=args.command,
            inputs={k: values[k] for k in INPUT_KEYS if k in values},
            outputs={k: str(values[k]) for k in OUTPUT_KEYS if k in values},
            seed=values.get("seed"),
            shots=values.get("shots"),
            options={
                k: v
                for k, v in values.items()
                if k not in INPUT_KEYS + OUTPUT_KEYS + _RUNTIME_KEYS
                and k not in ("seed", "shots")
            },
            threads=values.get("threads", 1),
        )

    def resolved(self) -> Dict[str, Any]:
        """写入产物的配置（不含线程数）"""
        return self.model_dump(mode="json", exclude={"threads"})

    @property
    def hash(self) -> str:
        return config_hash(self.resolved())

    def input(self, key: str) -> Any:
        if key not in self.inputs:
            raise ValidationError(f"{self.command} 需要 --{key.replace('_', '-')}")
        return self.inputs[key]

    def output(self, key: str = "output") -> str:
        if key not in self.outputs:
            raise ValidationError(f"{self.command} 需要 --{key.replace('_', '-')}")
        return self.outputs[key]


class OutputTracker:
    """记录本次命令写出的文件，失败时统一删除"""

    def __init__(self):
        self.paths: List[Path] = []

    def claim(self, path: str) -> Path:
        p = Path(path)
        self.paths.append(p)
        sidecar = metadata_path(p)
        if not sidecar.exists():
            self.paths.append(sidecar)
        return p

    def discard(self) -> None:
        for p in self.paths:
            if p.exists():
                p.unlink()
                logger.info(f"已删除部分输出 {p}")


# ==================== 子命令 ====================


def _runs(cfg: CommandConfig, key: str = "data") -> List[Dataset]:
    runs = [read_dataset(p) for p in cfg.input(key)]
    run_size = cfg.options.get("run_size")
    if run_size:
        runs = [part for run in runs for part in run.split_runs(run_size)]
    return runs


def _provenance(cfg: CommandConfig) -> Dict[str, Any]:
    provenance = ReportGenerator.provenance(cfg.seed, cfg.resolved())
    return dict(provenance, command=cfg.command)


def cmd_build(cfg: CommandConfig, out: OutputTracker) -> int:
    opts = cfg.options
    timing = GateTimingTable()
    if "calibration" in cfg.inputs:
        cal = load_calibration(cfg.inputs["calibration"])
        timing = GateTimingTable.from_calibration(cal)
    circuit = build_repetition_code(
        opts["qubits"],
        opts["rounds"],
        basis=Basis(opts["basis"]),
        timing=timing,
        final_detectors=opts.get("final_detectors", False),
    )
    path = out.claim(cfg.output())
    stamp = ReportGenerator.stamp(cfg.seed, cfg.resolved())
    write_circuit(path, circuit, preamble=stamp)
    summary: Dict[str, Any] = {"circuit": circuit.describe()}
    if "model" in cfg.inputs:
        schedule = compile_schedule(circuit, parse_model_spec(cfg.inputs["model"]))
        summary["schedule"] = schedule.summary()
    print(to_json(summary))
    return 0


def cmd_sample(cfg: CommandConfig, out: OutputTracker) -> int:
    circuit = read_circuit(cfg.input("circuit"))
    schedule = compile_schedule(circuit, parse_model_spec(cfg.input("model")))
    shots = cfg.shots or 4096
    seed = cfg.seed or 0
    path = out.claim(cfg.output())

    if cfg.options.get("oracle"):
        dataset = oracle_sample(circuit, schedule, shots, seed)
        metadata = dict(dataset.metadata)
        write_dataset(path, dataset, sidecar=False)
    else:
        sampler_cfg = SamplerConfig(
            shots=shots,
            master_seed=seed,
            batch_size=cfg.options.get("batch_size", 4096),
            threads=cfg.threads,
        )
        metadata = dataset_metadata(circuit, schedule, sampler_cfg, "frame")
        if path.suffix.lower() == ".prb1":
            with Prb1Writer(path, circuit.measurement_count) as writer:
                sample_streaming(circuit, schedule, sampler_cfg, writer)
        else:
            dataset = sample(circuit, schedule, sampler_cfg)
            write_dataset(path, dataset, sidecar=False)
    metadata["provenance"] = _provenance(cfg)
    write_metadata(path, metadata)
    logger.info(f"已写出 {shots} shots 到 {path}")
    return 0


def cmd_detect(cfg: CommandConfig, out: OutputTracker) -> int:
    circuit = read_circuit(cfg.input("circuit"))
    dataset = read_dataset(cfg.input("data")[0])
    tensor = extract_detections(dataset, circuit)
    detections = Dataset(
        tensor.flat(),
        {**dataset.metadata, "kind": "detections", "provenance": _provenance(cfg)},
    )
    write_dataset(out.claim(cfg.output()), detections)
    return 0


def cmd_correlate(cfg: CommandConfig, out: OutputTracker) -> int:
    circuit = read_circuit(cfg.input("circuit"))
    estimator = cfg.options.get("estimator", "exact")
    reports = [
        correlation_matrix(extract_detections(run, circuit), estimator)
        for run in _runs(cfg)
    ]
    report = reports[0] if len(reports) == 1 else average_reports(reports)
    write_correlation_csv(
        out.claim(cfg.output()), report, cfg.seed, cfg.resolved()
    )
    return 0


def cmd_fraction(cfg: CommandConfig, out: OutputTracker) -> int:
    circuit = read_circuit(cfg.input("circuit"))
    curves = []
    for path in cfg.input("data"):
        tensor = extract_detections(read_dataset(path), circuit)
        curves.append((Path(path).stem, detection_fraction(tensor)))
    write_fraction_csv(out.claim(cfg.output()), curves, cfg.seed, cfg.resolved())
    return 0


def cmd_tvd(cfg: CommandConfig, out: OutputTracker) -> int:
    a = state_distribution(read_dataset(cfg.input("data")[0]))
    b = state_distribution(read_dataset(cfg.input("reference")))
    payload: Dict[str, Any] = {
        "tvd": tvd(a, b),
        "n_shots": a.n_shots,
        "reference_shots": b.n_shots,
        "floor": statistical_tvd_floor(b, a.n_shots, seed=cfg.seed or 0),
    }
    text = ReportGenerator.summary_json(payload, cfg.seed, cfg.resolved())
    if "output" in cfg.outputs:
        out.claim(cfg.outputs["output"]).write_text(text, encoding="utf-8")
    print(text, end="")
    return 0


def _fit_config(cfg: CommandConfig) -> FitConfig:
    base = FitConfig()
    if "config" in cfg.inputs:
        base = read_fit_config(cfg.inputs["config"])
    overrides: Dict[str, Any] = {"threads": cfg.threads}
    opts = cfg.options
    if "mode" in opts:
        overrides["mode"] = FitMode(opts["mode"])
    if "stages" in opts:
        overrides["stages"] = [int(s) for s in opts["stages"].split(",") if s.strip()]
    if cfg.seed is not None:
        overrides["seed"] = cfg.seed
    if cfg.shots is not None:
        overrides["sim_shots"] = cfg.shots
    if "weights" in cfg.inputs:
        overrides["weights"] = read_fit_config(cfg.inputs["weights"]).weights
    if opts.get("per_run_refinement"):
        overrides["per_run_refinement"] = True
    return FitConfig(**{**base.model_dump(), **overrides})


def cmd_fit(cfg: CommandConfig, out: OutputTracker) -> int:
    circuit = read_circuit(cfg.input("circuit"))
    runs = _runs(cfg)
    if "calibration" in cfg.inputs:
        init = init_model(load_calibration(cfg.inputs["calibration"]), circuit.n_qubits)
    else:
        init = parse_model_spec(cfg.input("init_model"))
    fit_cfg = _fit_config(cfg)
    report = fit(runs, circuit, init, fit_cfg)

    write_summary_json(
        out.claim(cfg.output()), report.to_dict(), fit_cfg.seed, cfg.resolved()
    )
    if "model_out" in cfg.outputs:
        write_model(
            out.claim(cfg.outputs["model_out"]),
            report.fitted_model,
            preamble=ReportGenerator.stamp(fit_cfg.seed, cfg.resolved()),
        )
    if "summary" in cfg.outputs:
        out.claim(cfg.outputs["summary"]).write_text(
            ReportGenerator.fit_markdown(report), encoding="utf-8"
        )
    for warning in report.warnings:
        logger.warning(warning)
    return 0


def cmd_select_p(cfg: CommandConfig, out: OutputTracker) -> int:
    circuit = read_circuit(cfg.input("circuit"))
    kind = ModelKind(cfg.options["kind"])
    grid = cfg.options.get("grid")
    p_grid = [float(p) for p in grid.split(",")] if grid else baseline_grid(kind)
    selection = select_baseline_p(
        kind,
        _runs(cfg),
        circuit,
        p_grid,
        shots=cfg.shots,
        seed=1 if cfg.seed is None else cfg.seed,
        estimator=cfg.options.get("estimator", "exact"),
        threads=cfg.threads,
    )
    write_summary_json(
        out.claim(cfg.output()), selection.to_dict(), cfg.seed, cfg.resolved()
    )
    return 0


def cmd_compare(cfg: CommandConfig, out: OutputTracker) -> int:
    circuit = read_circuit(cfg.input("circuit"))
    estimator = cfg.options.get("estimator", "exact")
    target = multiround_stats(_runs(cfg, "experiment"), circuit, estimator)
    shots = cfg.shots or target.n_shots
    seed = 1 if cfg.seed is None else cfg.seed

    diffs = []
    curves = [("experiment", target.fraction)]
    for spec in cfg.input("models"):
        model = parse_model_spec(spec)
        stats = multiround_stats(
            simulate(circuit, model, shots, seed, cfg.threads), circuit, estimator
        )
        diff = sector_difference(stats.report, target.report)
        logger.info(f"{spec}: 扇区差之和 {diff.total():.6g}")
        diffs.append((spec, diff))
        curves.append((spec, stats.fraction))

    write_sector_diff_csv(out.claim(cfg.output()), diffs, seed, cfg.resolved())
    if "fraction_output" in cfg.outputs:
        write_fraction_csv(
            out.claim(cfg.outputs["fraction_output"]), curves, seed, cfg.resolved()
        )
    return 0


def cmd_oracle_check(cfg: CommandConfig, out: OutputTracker) -> int:
    opts = cfg.options
    results = []
    for n in opts.get("qubits", [3, 5]):
        for rounds in opts.get("rounds", [1, 2]):
            for channel in opts.get("channels", list(CHECK_CHANNELS)):
                result = oracle_check(
                    n_qubits=n,
                    rounds=rounds,
                    channel=channel,
                    shots=cfg.shots or 20_000,
                    seed=cfg.seed or 0,
                )
                status = "通过" if result.passed else "未通过"
                logger.info(
                    f"n={n} rounds={rounds} {channel}: {status} "
                    f"(marginal {result.max_marginal_z:.2f}σ, "
                    f"pair {result.pair_z_max:.2f}σ)"
                )
                results.append(result)

    passed = all(r.passed for r in results)
    payload = {"passed": passed, "results": [r.to_dict() for r in results]}
    text = ReportGenerator.summary_json(payload, cfg.seed, cfg.resolved())
    if "output" in cfg.outputs:
        out.claim(cfg.outputs["output"]).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return 0 if passed else 1


# ==================== 参数解析 ====================


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--threads",
        type=int,
        default=default_threads(),
        help="工作线程数（默认取环境变量 AUTO_NOISE_THREADS，否则 1；不影响结果）",
    )
    common.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="日志级别",
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="auto-noise",
        description="重复码实验的电路级噪声模型：采样、相关分析与参数拟合",
        epilog=FORMATS_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--version", action="version", version=f"auto-noise {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()

    def add(name: str, handler: Callable, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(
            name,
            parents=[common],
            help=help_text,
            description=help_text,
            epilog=FORMATS_HELP,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        p.set_defaults(handler=handler)
        return p

    p = add("build", cmd_build, "构造重复码电路并写出电路文件")
    p.add_argument("--qubits", type=int, required=True, help="链长（奇数）")
    p.add_argument("--rounds", type=int, required=True, help="测量轮数")
    p.add_argument("--basis", default="Z", choices=["X", "Z"])
    p.add_argument("--final-detectors", action="store_true", help="追加末轮奇偶探测器")
    p.add_argument("--calibration", help="从标定文件取门时长中位数")
    p.add_argument("--model", help="额外打印该模型编译后的事件统计")
    p.add_argument("--output", required=True)

    p = add("sample", cmd_sample, "按噪声模型采样 shot 数据集")
    p.add_argument("--circuit", required=True)
    p.add_argument("--model", required=True, help="模型文件或 <kind>:<p>")
    p.add_argument("--shots", type=int, default=4096)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--batch-size", type=int, default=4096)
    p.add_argument("--oracle", action="store_true", help="改用态矢量预言机（≤10 比特）")
    p.add_argument("--output", required=True, help=".prb1 或 .p01")

    p = add("detect", cmd_detect, "提取探测事件，写成 p01")
    p.add_argument("--circuit", required=True)
    p.add_argument("--data", nargs=1, required=True)
    p.add_argument("--output", required=True)

    p = add("correlate", cmd_correlate, "计算两点相关矩阵，写成 CSV")
    p.add_argument("--circuit", required=True)
    p.add_argument("--data", nargs="+", required=True, help="一次或多次运行")
    p.add_argument("--run-size", type=int, help="把单个数据集按 shot 数切成多次运行")
    p.add_argument("--estimator", default="exact", choices=["exact", "first_order"])
    p.add_argument("--output", required=True)

    p = add("fraction", cmd_fraction, "计算每轮探测事件比例，写成 CSV")
    p.add_argument("--circuit", required=True)
    p.add_argument("--data", nargs="+", required=True)
    p.add_argument("--output", required=True)

    p = add("tvd", cmd_tvd, "两个数据集输出态分布的 TVD")
    p.add_argument("--data", nargs=1, required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--seed", type=int, default=0, help="统计下限重采样的种子")
    p.add_argument("--output")

    p = add("fit", cmd_fit, "拟合 PAEMS 模型参数")
    p.add_argument("--circuit", required=True)
    p.add_argument("--data", nargs="+", required=True)
    p.add_argument("--run-size", type=int)
    init = p.add_mutually_exclusive_group(required=True)
    init.add_argument("--calibration", help="标定文件（初始模型由标定映射得到）")
    init.add_argument("--init-model", help="初始模型文件")
    p.add_argument("--mode", choices=[m.value for m in FitMode])
    p.add_argument("--stages", help="执行的阶段，如 1,2,3")
    p.add_argument("--config", help="paems-fit v1 拟合配置文件")
    p.add_argument("--weights", help="只取其中 [weights] 块的拟合配置文件")
    p.add_argument("--shots", type=int, help="每次评估的模拟 shot 数")
    p.add_argument("--seed", type=int)
    p.add_argument("--per-run-refinement", action="store_true")
    p.add_argument("--output", required=True, help="FitReport JSON")
    p.add_argument("--model-out", help="拟合后的模型文件")
    p.add_argument("--summary", help="Markdown 摘要")

    p = add("select-p", cmd_select_p, "为基线模型选择最优 p")
    p.add_argument("--circuit", required=True)
    p.add_argument("--data", nargs="+", required=True)
    p.add_argument("--run-size", type=int)
    p.add_argument("--kind", required=True, choices=[k.value for k in ModelKind][1:])
    p.add_argument("--grid", help="逗号分隔的候选 p（默认按模型种类）")
    p.add_argument("--estimator", default="exact", choices=["exact", "first_order"])
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output", required=True)

    p = add("compare", cmd_compare, "比较多个模型与实验的逐扇区相关差与比例曲线")
    p.add_argument("--circuit", required=True)
    p.add_argument("--experiment", nargs="+", required=True)
    p.add_argument("--run-size", type=int)
    p.add_argument("--models", nargs="+", required=True, help="模型文件或 <kind>:<p>")
    p.add_argument("--estimator", default="exact", choices=["exact", "first_order"])
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output", required=True, help="扇区差 CSV")
    p.add_argument("--fraction-output", help="比例曲线 CSV")

    p = add("oracle-check", cmd_oracle_check, "帧采样器与态矢量预言机的交叉校验")
    p.add_argument("--qubits", type=int, nargs="+", default=[3, 5])
    p.add_argument("--rounds", type=int, nargs="+", default=[1, 2])
    p.add_argument("--channels", nargs="+", choices=list(CHECK_CHANNELS))
    p.add_argument("--shots", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logger(level=getattr(logging, args.log_level))
    outputs = OutputTracker()
    try:
        cfg = CommandConfig.from_args(args)
        return args.handler(cfg, outputs)
    except (ValidationError, PydanticValidationError) as e:
        outputs.discard()
        logger.error(f"输入非法: {e}")
        return 2
    except (FormatError, SinkError, OSError) as e:
        outputs.discard()
        logger.error(f"读写失败: {e}")
        return 3
    except AutoNoiseError as e:
        outputs.discard()
        logger.error(f"{args.command} 失败: {e}")
        return 1
    except BaseException:
        outputs.discard()
        raise


if __name__ == "__main__":
    sys.exit(main())
