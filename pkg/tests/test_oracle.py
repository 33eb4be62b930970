"""
参考预言机测试
"""

import numpy as np
import pytest

from auto_noise.analysis.detections import extract_detections
from auto_noise.circuit.builder import build_repetition_code
from auto_noise.circuit.models import Basis
from auto_noise.errors import ValidationError
from auto_noise.noise.models import NoiseModel
from auto_noise.noise.schedule import compile_schedule
from auto_noise.oracle.trajectory import (
    CHECK_CHANNELS,
    OracleCheckResult,
    oracle_check,
    oracle_sample,
)
from auto_noise.sampler.frame import SamplerConfig, sample


class TestOracleSample:
    """态矢量轨迹采样测试"""

    def test_zero_noise(self):
        """零噪声时两种码基的所有测量都为 0"""
        for basis in (Basis.Z, Basis.X):
            circuit = build_repetition_code(5, 2, basis=basis)
            schedule = compile_schedule(circuit, NoiseModel.baseline("sd6", 0.0))
            data = oracle_sample(circuit, schedule, 64, seed=0)
            assert data.metadata["simulator"] == "oracle"
            assert not data.bits.any()

    def test_injection_matches_frame(self):
        """确定性注入下预言机与帧采样器逐 shot 一致"""
        circuit = build_repetition_code(5, 3, final_detectors=True)
        schedule = compile_schedule(circuit, NoiseModel.baseline("sd6", 0.0))
        inject = {(0, 2): "X", (5, 4): "Y"}
        frame = sample(circuit, schedule, SamplerConfig(shots=8), inject=inject)
        oracle = oracle_sample(circuit, schedule, 8, seed=3, inject=inject)
        assert frame == oracle
        det = extract_detections(oracle, circuit)
        assert np.all(det.bits[:, :, 0] == 1)

    def test_too_many_qubits(self):
        """超过比特上限被拒绝"""
        circuit = build_repetition_code(11, 1)
        schedule = compile_schedule(circuit, NoiseModel.baseline("sd6", 0.0))
        with pytest.raises(ValidationError):
            oracle_sample(circuit, schedule, 4, seed=0)


class TestOracleCheck:
    """单通道交叉校验测试"""

    @pytest.mark.parametrize("channel", ["spam", "sdc1", "adc"])
    def test_single_channel_agrees(self, channel):
        """小规模单通道校验通过"""
        result = oracle_check(
            n_qubits=3,
            rounds=2,
            channel=channel,
            shots=6000,
            seed=11,
            basis=Basis.X if channel == "sdc1" else Basis.Z,
        )
        assert result.passed, result.to_dict()
        assert len(result.marginal_z) == 2

    def test_unknown_channel(self):
        """未知通道类别"""
        with pytest.raises(ValidationError):
            oracle_check(channel="crosstalk")

    def test_bonferroni_threshold(self):
        """多次比较时阈值放宽，不低于单次阈值"""
        result = OracleCheckResult(
            channel="full", n_qubits=5, rounds=2, shots=1, seed=0, marginal_z=[0.0] * 4
        )
        assert result.marginal_threshold > result.threshold
        assert result.pair_threshold > result.marginal_threshold
        assert result.passed

    @pytest.mark.slow
    @pytest.mark.parametrize("channel", sorted(CHECK_CHANNELS))
    def test_all_channels_acceptance(self, channel):
        """验收规模：n=5、两轮、每个通道类别 10^5 shots"""
        result = oracle_check(
            n_qubits=5, rounds=2, channel=channel, shots=100_000, seed=0
        )
        assert result.passed, result.to_dict()
