"""
命令行测试：各子命令端到端运行、退出码与失败时的产物清理
"""

import json

import pytest

from auto_noise.circuit.text_format import read_circuit
from auto_noise.cli import OutputTracker, main
from auto_noise.io.dataset import metadata_path, read_dataset
from auto_noise.io.model_file import write_model
from auto_noise.noise.models import NoiseModel
from auto_noise.utils.serialization import from_json


def _paems(n_qubits: int) -> NoiseModel:
    return NoiseModel.uniform_paems(
        n_qubits,
        t1=25.0,
        t2=30.0,
        f1q=0.998,
        f2q=0.98,
        p_init=0.01,
        p_reset=0.01,
        p_readout=0.02,
        p_leak=0.002,
        p_seep=0.1,
    )


def _build(tmp_path, qubits=5, rounds=2) -> str:
    path = tmp_path / f"c{qubits}x{rounds}.txt"
    argv = ["build", "--qubits", str(qubits), "--rounds", str(rounds)]
    assert main(argv + ["--output", str(path)]) == 0
    return str(path)


def _sample(tmp_path, circuit: str, model: str, name: str, shots=1000, seed=7) -> str:
    path = tmp_path / name
    code = main(
        [
            "sample",
            "--circuit",
            circuit,
            "--model",
            model,
            "--shots",
            str(shots),
            "--seed",
            str(seed),
            "--output",
            str(path),
        ]
    )
    assert code == 0
    return str(path)


class TestBuildAndSample:
    """build / sample 子命令测试"""

    def test_build(self, tmp_path, capsys):
        """写出电路文件，首行为溯源注释；给出模型时打印事件统计"""
        path = tmp_path / "c.txt"
        argv = ["build", "--qubits", "5", "--rounds", "3", "--output", str(path)]
        argv += ["--log-level", "WARNING"]
        capsys.readouterr()
        assert main(argv + ["--model", "si1000:0.01"]) == 0
        assert path.read_text().startswith("# auto-noise")
        circuit = read_circuit(path)
        assert circuit.n_qubits == 5 and circuit.rounds == 3
        summary = json.loads(capsys.readouterr().out)
        assert summary["circuit"]["rounds"] == 3
        assert summary["schedule"]

    def test_build_rejects_even_chain(self, tmp_path):
        """偶数链长为输入校验错误，退出码 2"""
        path = tmp_path / "c.txt"
        argv = ["build", "--qubits", "4", "--rounds", "2", "--output", str(path)]
        assert main(argv) == 2
        assert not path.exists()

    def test_sample_is_reproducible(self, tmp_path):
        """相同参数两次采样输出逐字节相同，且与线程数无关"""
        circuit = _build(tmp_path)
        path = _sample(tmp_path, circuit, "sd6:0.01", "d.prb1")
        first = open(path, "rb").read()
        first_meta = metadata_path(path).read_text()
        _sample(tmp_path, circuit, "sd6:0.01", "d.prb1")
        assert open(path, "rb").read() == first
        assert metadata_path(path).read_text() == first_meta

        threaded = tmp_path / "t.prb1"
        argv = ["sample", "--circuit", circuit, "--model", "sd6:0.01", "--shots"]
        argv += ["1000", "--seed", "7", "--threads", "3", "--output", str(threaded)]
        assert main(argv) == 0
        assert threaded.read_bytes() == first

    def test_sample_metadata_and_text_format(self, tmp_path):
        """旁注元数据带溯源信息；文本格式与二进制内容一致"""
        circuit = _build(tmp_path)
        binary = _sample(tmp_path, circuit, "si1000:0.02", "d.prb1")
        text = _sample(tmp_path, circuit, "si1000:0.02", "d.p01")
        meta = from_json(metadata_path(binary).read_text())
        assert meta["simulator"] == "frame"
        assert meta["provenance"]["command"] == "sample"
        assert read_dataset(binary) == read_dataset(text)

    def test_sample_missing_circuit(self, tmp_path):
        """电路文件不存在时退出码 3"""
        argv = ["sample", "--circuit", str(tmp_path / "none.txt")]
        argv += ["--model", "sd6:0.01", "--output", str(tmp_path / "d.prb1")]
        assert main(argv) == 3

    def test_sample_bad_model_file(self, tmp_path):
        """模型文件格式错误时退出码 3，不留下输出"""
        circuit = _build(tmp_path)
        bad = tmp_path / "bad.model"
        bad.write_text("paems-model v2\n")
        out = tmp_path / "d.prb1"
        argv = ["sample", "--circuit", circuit, "--model", str(bad)]
        assert main(argv + ["--output", str(out)]) == 3
        assert not out.exists()


class TestAnalysisCommands:
    """detect / correlate / fraction / tvd / compare 子命令测试"""

    def test_detect(self, tmp_path):
        """探测事件按 (轮, 辅助比特) 展平写出"""
        circuit = _build(tmp_path)
        data = _sample(tmp_path, circuit, "sd6:0.01", "d.prb1")
        out = tmp_path / "det.p01"
        argv = ["detect", "--circuit", circuit, "--data", data, "--output", str(out)]
        assert main(argv) == 0
        detections = read_dataset(out)
        assert detections.bits.shape == (1000, 4)
        assert detections.metadata["kind"] == "detections"

    def test_correlate_multiple_runs(self, tmp_path):
        """单个数据集切成多次运行后平均"""
        circuit = _build(tmp_path)
        data = _sample(tmp_path, circuit, "sd6:0.01", "d.prb1")
        out = tmp_path / "corr.csv"
        argv = ["correlate", "--circuit", circuit, "--data", data]
        assert main(argv + ["--run-size", "500", "--output", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# auto-noise")
        assert len(lines) == 2 + 4 * 3 // 2

    def test_correlate_bad_run_size(self, tmp_path):
        """run-size 不能整除 shot 数"""
        circuit = _build(tmp_path)
        data = _sample(tmp_path, circuit, "sd6:0.01", "d.prb1")
        out = tmp_path / "corr.csv"
        argv = ["correlate", "--circuit", circuit, "--data", data]
        assert main(argv + ["--run-size", "300", "--output", str(out)]) == 2

    def test_fraction(self, tmp_path):
        """每个数据集一列"""
        circuit = _build(tmp_path, rounds=3)
        a = _sample(tmp_path, circuit, "sd6:0.01", "a.prb1")
        b = _sample(tmp_path, circuit, "sd6:0.02", "b.prb1")
        out = tmp_path / "f.csv"
        argv = ["fraction", "--circuit", circuit, "--data", a, b]
        assert main(argv + ["--output", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[1] == "round,a,b"
        assert len(lines) == 5

    def test_tvd(self, tmp_path, capsys):
        """与自身的 TVD 为 0，并给出统计下限"""
        circuit = _build(tmp_path, rounds=1)
        data = _sample(tmp_path, circuit, "cc:0.1", "d.p01")
        capsys.readouterr()
        argv = ["tvd", "--data", data, "--reference", data, "--log-level", "WARNING"]
        assert main(argv) == 0
        result = json.loads(capsys.readouterr().out)
        assert result["tvd"] == 0.0
        assert result["floor"] > 0.0
        assert "provenance" in result

    def test_compare(self, tmp_path):
        """每个模型一行扇区差，外加比例曲线"""
        circuit = _build(tmp_path, rounds=3)
        experiment = _sample(tmp_path, circuit, "si1000:0.01", "e.prb1")
        out = tmp_path / "diff.csv"
        fraction = tmp_path / "frac.csv"
        argv = ["compare", "--circuit", circuit, "--experiment", experiment]
        argv += ["--models", "si1000:0.01", "sd6:0.01", "--output", str(out)]
        argv += ["--fraction-output", str(fraction)]
        assert main(argv) == 0
        rows = out.read_text().splitlines()
        assert rows[1].startswith("model,")
        assert [r.split(",")[0] for r in rows[2:]] == ["si1000:0.01", "sd6:0.01"]
        assert fraction.read_text().splitlines()[1] == (
            "round,experiment,si1000:0.01,sd6:0.01"
        )


class TestFittingCommands:
    """fit / select-p 子命令测试"""

    def setup_method(self):
        self.config_text = (
            "paems-fit v1\n"
            "[fit]\n"
            "stages = 1\n"
            "stage1_budget = 9\n"
            "popsize = 4\n"
            "sim_shots = 300\n"
        )

    def _fit_inputs(self, tmp_path):
        circuit = _build(tmp_path, qubits=3, rounds=3)
        truth = tmp_path / "truth.model"
        write_model(truth, _paems(3))
        data = _sample(tmp_path, circuit, str(truth), "d.prb1", shots=600)
        init = tmp_path / "init.model"
        write_model(init, NoiseModel.uniform_paems(3, t1=40.0, t2=40.0))
        config = tmp_path / "fit.cfg"
        config.write_text(self.config_text)
        return circuit, data, str(init), str(config)

    def test_fit(self, tmp_path):
        """写出报告、拟合模型与摘要"""
        circuit, data, init, config = self._fit_inputs(tmp_path)
        out = tmp_path / "report.json"
        model_out = tmp_path / "fitted.model"
        summary = tmp_path / "fit.md"
        argv = ["fit", "--circuit", circuit, "--data", data, "--init-model", init]
        argv += ["--config", config, "--output", str(out)]
        argv += ["--model-out", str(model_out), "--summary", str(summary)]
        assert main(argv) == 0
        report = from_json(out.read_text())
        assert [s["name"] for s in report["stages"]] == ["stage1"]
        assert report["provenance"]["tool"] == "auto-noise"
        assert model_out.read_text().startswith("# auto-noise")
        assert summary.read_text().startswith("# Fit report")

    def test_fit_removes_partial_outputs(self, tmp_path):
        """后续产物写入失败时删除已写出的报告，退出码 3"""
        circuit, data, init, config = self._fit_inputs(tmp_path)
        out = tmp_path / "report.json"
        model_out = tmp_path / "missing" / "fitted.model"
        argv = ["fit", "--circuit", circuit, "--data", data, "--init-model", init]
        argv += ["--config", config, "--output", str(out)]
        assert main(argv + ["--model-out", str(model_out)]) == 3
        assert not out.exists()

    def test_fit_rejects_baseline_init(self, tmp_path):
        """基线模型不能作为拟合起点，退出码 2"""
        circuit, data, _, config = self._fit_inputs(tmp_path)
        out = tmp_path / "report.json"
        argv = ["fit", "--circuit", circuit, "--data", data, "--init-model"]
        argv += ["sd6:0.01", "--config", config, "--output", str(out)]
        assert main(argv) == 2
        assert not out.exists()

    def test_select_p(self, tmp_path):
        """在给定网格上选回生成数据的 p"""
        circuit = _build(tmp_path, rounds=3)
        data = _sample(tmp_path, circuit, "si1000:0.01", "d.prb1", shots=3000)
        out = tmp_path / "p.json"
        argv = ["select-p", "--circuit", circuit, "--data", data, "--kind", "si1000"]
        argv += ["--grid", "0.001,0.01,0.1", "--output", str(out)]
        assert main(argv) == 0
        result = from_json(out.read_text())
        assert result["p_opt"] == 0.01
        assert len(result["grid"]) == 3


class TestOracleCheckCommand:
    """oracle-check 子命令测试"""

    def test_single_channel(self, tmp_path):
        """单个通道类别校验通过，退出码 0"""
        out = tmp_path / "check.json"
        argv = ["oracle-check", "--qubits", "3", "--rounds", "2", "--channels"]
        argv += ["spam", "--shots", "6000", "--seed", "11", "--output", str(out)]
        assert main(argv) == 0
        result = from_json(out.read_text())
        assert result["passed"] is True
        assert len(result["results"]) == 1

    def test_unknown_channel(self):
        """未知通道由参数解析拒绝"""
        with pytest.raises(SystemExit):
            main(["oracle-check", "--channels", "crosstalk"])


class TestOutputTracker:
    """失败时的产物清理测试"""

    def test_keeps_preexisting_sidecar(self, tmp_path):
        """运行前已存在的旁注文件不被删除，本次新建的输出与旁注被删除"""
        old = tmp_path / "old.prb1"
        metadata_path(old).write_text("{}")
        new = tmp_path / "new.prb1"

        tracker = OutputTracker()
        tracker.claim(str(old)).write_bytes(b"partial")
        tracker.claim(str(new)).write_bytes(b"partial")
        metadata_path(new).write_text("{}")
        tracker.discard()

        assert not old.exists()
        assert metadata_path(old).read_text() == "{}"
        assert not new.exists()
        assert not metadata_path(new).exists()
