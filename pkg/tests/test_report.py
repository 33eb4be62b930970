"""
报告生成器测试
"""

import numpy as np

from auto_noise._version import __version__
from auto_noise.analysis.correlation import SectorDiff, correlation_matrix
from auto_noise.analysis.detections import DetectionTensor
from auto_noise.fitter.models import FitMode, FitReport, StageResult
from auto_noise.noise.models import NoiseModel
from auto_noise.report.generator import (
    ReportGenerator,
    write_correlation_csv,
    write_summary_json,
)
from auto_noise.utils.serialization import config_hash, from_json


def _report():
    rng = np.random.default_rng(0)
    bits = (rng.random((400, 2, 3)) < 0.2).astype(np.uint8)
    return correlation_matrix(DetectionTensor(bits=bits))


class TestProvenance:
    """溯源信息测试"""

    def test_line(self):
        """首行注释包含版本、种子与配置摘要"""
        config = {"command": "correlate", "seed": 3}
        line = ReportGenerator.provenance_line(3, config)
        expected = f"# auto-noise {__version__} seed=3 config={config_hash(config)}\n"
        assert line == expected

    def test_hash_ignores_key_order(self):
        """配置摘要与键顺序无关"""
        left = config_hash({"a": 1, "b": [1, 2]})
        assert left == config_hash({"b": [1, 2], "a": 1})
        assert config_hash({"a": 1}) != config_hash({"a": 2})


class TestCsv:
    """CSV 产物测试"""

    def test_correlation_csv(self, tmp_path):
        """上三角逐项一行，相同输入逐字节相同"""
        report = _report()
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_correlation_csv(a, report, 1, {"k": 1})
        write_correlation_csv(b, _report(), 1, {"k": 1})
        assert a.read_bytes() == b.read_bytes()
        lines = a.read_text().splitlines()
        assert lines[0].startswith("# auto-noise")
        assert lines[1] == "i,j,ancilla_i,round_i,ancilla_j,round_j,sector,p"
        n = report.n_detectors
        assert len(lines) == 2 + n * (n - 1) // 2
        assert lines[2].startswith("0,1,0,1,1,1,spacelike,")

    def test_nan_written_as_text(self):
        """未定义的相关写成 nan"""
        bits = np.zeros((10, 2, 1), dtype=np.uint8)
        bits[:5, 0, 0] = 1
        text = ReportGenerator.correlation_csv(
            correlation_matrix(DetectionTensor(bits=bits))
        )
        assert text.splitlines()[1].endswith(",nan")

    def test_sector_diff_csv(self):
        """每个模型一行"""
        diff = SectorDiff(0.5, 0.25, 0.125, 1.0, max_abs={})
        text = ReportGenerator.sector_diff_csv([("si1000:0.01", diff)])
        assert text.splitlines() == [
            "model,timelike,spacelike,spacetime,leakage_tail,total",
            "si1000:0.01,0.5,0.25,0.125,1.0,0.875",
        ]

    def test_fraction_csv_ragged(self):
        """长度不同的曲线以空单元格补齐"""
        text = ReportGenerator.fraction_csv(
            [("exp", np.array([0.1, 0.2])), ("sim", np.array([0.15]))]
        )
        assert text.splitlines() == ["round,exp,sim", "1,0.1,0.15", "2,0.2,"]
        assert ReportGenerator.fraction_csv([]) == "round\n"


class TestJsonAndMarkdown:
    """JSON 与 Markdown 产物测试"""

    def test_summary_json(self, tmp_path):
        """JSON 含 provenance 字段，NaN 写成 null"""
        path = tmp_path / "s.json"
        write_summary_json(path, {"tvd": float("nan"), "n": 3}, 9, {"x": 1})
        data = from_json(path.read_text())
        assert data["tvd"] is None
        assert data["provenance"]["seed"] == 9
        assert data["provenance"]["version"] == __version__

    def test_fit_markdown(self):
        """阶段表与告警"""
        model = NoiseModel.uniform_paems(2)
        report = FitReport(
            mode=FitMode.MULTIROUND,
            config={},
            initial_model=model,
            fitted_model=model,
            stages=[
                StageResult("stage1", "", ["p_leak"], 2, 0.5, 0.25, evaluations=10),
                StageResult("stage2", "merge", [], 0, 0.25, 0.25, accepted=False),
            ],
            warnings=["stage1 预算耗尽"],
        )
        text = ReportGenerator.fit_markdown(report)
        assert "| stage1 | - | 2 | 0.5 | 0.25 | 10 | yes |" in text
        assert "| stage2 | merge | 0 | 0.25 | 0.25 | 0 | no |" in text
        assert text.endswith("- stage1 预算耗尽\n")
