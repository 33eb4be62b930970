"""
报告生成器

把分析与拟合结果整理成 CSV / JSON / Markdown。每个产物都带溯源信息
（工具版本、种子、配置摘要）：文本产物写在首行注释，JSON 写在 provenance 字段。
相同输入产生逐字节相同的输出。
"""

import csv
import io
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from auto_noise._version import __version__
from auto_noise.analysis.correlation import CorrelationReport, SectorDiff
from auto_noise.fitter.models import FitReport
from auto_noise.utils.serialization import config_hash, to_json

PathLike = Union[str, Path]


def _num(value: float) -> str:
    value = float(value)
    return "nan" if math.isnan(value) else repr(value)


class ReportGenerator:
    """CSV / JSON / Markdown 报告"""

    @staticmethod
    def provenance(seed: Optional[int], config: Any) -> Dict[str, Any]:
        return {
            "tool": "auto-noise",
            "version": __version__,
            "seed": seed,
            "config_hash": config_hash(config),
        }

    @staticmethod
    def stamp(seed: Optional[int], config: Any) -> str:
        return f"auto-noise {__version__} seed={seed} config={config_hash(config)}"

    @staticmethod
    def provenance_line(seed: Optional[int], config: Any) -> str:
        return f"# {ReportGenerator.stamp(seed, config)}\n"

    @staticmethod
    def _csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buf.getvalue()

    @staticmethod
    def correlation_csv(report: CorrelationReport) -> str:
        """上三角逐项列出 p_ij 及两个探测器的坐标与所属扇区"""
        rows = []
        for i, j, sector, value in report.rows():
            rows.append(
                (
                    i,
                    j,
                    int(report.ancillas[i]),
                    int(report.rounds[i]),
                    int(report.ancillas[j]),
                    int(report.rounds[j]),
                    sector,
                    _num(value),
                )
            )
        header = (
            "i",
            "j",
            "ancilla_i",
            "round_i",
            "ancilla_j",
            "round_j",
            "sector",
            "p",
        )
        return ReportGenerator._csv(header, rows)

    @staticmethod
    def sector_diff_csv(diffs: Sequence[Tuple[str, SectorDiff]]) -> str:
        """每个模型一行：各扇区平均绝对差及 timelike+spacelike+spacetime 之和"""
        rows = [
            (
                name,
                _num(d.timelike),
                _num(d.spacelike),
                _num(d.spacetime),
                _num(d.leakage_tail),
                _num(d.total()),
            )
            for name, d in diffs
        ]
        header = (
            "model",
            "timelike",
            "spacelike",
            "spacetime",
            "leakage_tail",
            "total",
        )
        return ReportGenerator._csv(header, rows)

    @staticmethod
    def fraction_csv(curves: Sequence[Tuple[str, np.ndarray]]) -> str:
        """探测事件比例曲线：每轮一行，每条曲线一列"""
        if not curves:
            return ReportGenerator._csv(("round",), [])
        length = max(len(c) for _, c in curves)
        rows = []
        for r in range(length):
            row: List[Any] = [r + 1]
            row.extend(_num(c[r]) if r < len(c) else "" for _, c in curves)
            rows.append(row)
        return ReportGenerator._csv(["round", *(name for name, _ in curves)], rows)

    @staticmethod
    def summary_json(
        payload: Dict[str, Any], seed: Optional[int], config: Any
    ) -> str:
        body = dict(payload)
        body["provenance"] = ReportGenerator.provenance(seed, config)
        return to_json(body) + "\n"

    @staticmethod
    def fit_markdown(report: FitReport) -> str:
        """拟合过程的 Markdown 摘要"""
        lines = [
            f"# Fit report ({report.mode.value})",
            "",
            f"- evaluations: {report.evaluations}",
            f"- budget exhausted: {report.budget_exhausted}",
            "",
            "| stage | branch | dim | initial | final | evals | accepted |",
            "|---|---|---|---|---|---|---|",
        ]
        for s in report.stages:
            lines.append(
                f"| {s.name} | {s.branch or '-'} | {s.dimension} | "
                f"{s.initial_loss:.6g} | {s.final_loss:.6g} | {s.evaluations} | "
                f"{'yes' if s.accepted else 'no'} |"
            )
        if report.warnings:
            lines += ["", "## Warnings", ""]
            lines += [f"- {w}" for w in report.warnings]
        return "\n".join(lines) + "\n"


def _write(path: PathLike, header: str, body: str) -> None:
    Path(path).write_text(header + body, encoding="utf-8")


def write_correlation_csv(
    path: PathLike, report: CorrelationReport, seed: Optional[int], config: Any
) -> None:
    _write(
        path,
        ReportGenerator.provenance_line(seed, config),
        ReportGenerator.correlation_csv(report),
    )


def write_sector_diff_csv(
    path: PathLike,
    diffs: Sequence[Tuple[str, SectorDiff]],
    seed: Optional[int],
    config: Any,
) -> None:
    _write(
        path,
        ReportGenerator.provenance_line(seed, config),
        ReportGenerator.sector_diff_csv(diffs),
    )


def write_fraction_csv(
    path: PathLike,
    curves: Sequence[Tuple[str, np.ndarray]],
    seed: Optional[int],
    config: Any,
) -> None:
    _write(
        path,
        ReportGenerator.provenance_line(seed, config),
        ReportGenerator.fraction_csv(curves),
    )


def write_summary_json(
    path: PathLike, payload: Dict[str, Any], seed: Optional[int], config: Any
) -> None:
    _write(path, "", ReportGenerator.summary_json(payload, seed, config))
