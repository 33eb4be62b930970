"""
噪声模型、误差通道、调度编译与参数向量化测试
"""

import math

import numpy as np
import pytest

from auto_noise.circuit.builder import build_repetition_code
from auto_noise.errors import ValidationError
from auto_noise.noise.baselines import BASELINE_TABLE
from auto_noise.noise.channels import adc_from_decoherence, sdc_from_fidelity
from auto_noise.noise.models import (
    CouplerParams,
    LeakagePolicy,
    ModelKind,
    NoiseModel,
    QubitParams,
)
from auto_noise.noise.params import (
    CORE,
    DECOHERENCE,
    FULL,
    LEAKAGE,
    ParamMask,
    apply_vector,
    copy_masked,
    describe_vector,
    parameter_vector,
    with_leakage_prior,
)
from auto_noise.noise.schedule import (
    CHANNEL_RANK,
    ChannelKind,
    EventOrigin,
    compile_schedule,
    scale_events,
)


class TestChannels:
    """通道参数映射测试"""

    def test_adc_values(self):
        """px = py = (1-e^{-t/T1})/4，pz 按 T2 扣除"""
        px, py, pz = adc_from_decoherence(20.0, 25.0, 600.0)
        decay_1 = 1.0 - math.exp(-0.6 / 20.0)
        decay_2 = 1.0 - math.exp(-0.6 / 25.0)
        assert px == py == pytest.approx(decay_1 / 4.0)
        assert pz == pytest.approx(decay_2 / 2.0 - decay_1 / 4.0)

    def test_adc_clamps_negative_dephasing(self):
        """T2 > 2·T1 时 pz 截断为 0 而不是负数"""
        _, _, pz = adc_from_decoherence(10.0, 30.0, 100.0)
        assert pz == 0.0

    def test_adc_zero_duration_and_infinite_times(self):
        """零时长或无穷 T1/T2 没有误差"""
        assert adc_from_decoherence(10.0, 10.0, 0.0) == (0.0, 0.0, 0.0)
        assert adc_from_decoherence(math.inf, math.inf, 500.0) == (0.0, 0.0, 0.0)

    def test_adc_rejects_bad_input(self):
        """非正 T1 或负时长"""
        with pytest.raises(ValidationError):
            adc_from_decoherence(0.0, 10.0, 10.0)
        with pytest.raises(ValidationError):
            adc_from_decoherence(10.0, 10.0, -1.0)

    def test_sdc_from_fidelity(self):
        """单比特 p = 1.5(1-F)，两比特 p = 1.25(1-F)，并截断到最大退极化"""
        assert sdc_from_fidelity(0.99, 1) == pytest.approx(0.015)
        assert sdc_from_fidelity(0.99, 2) == pytest.approx(0.0125)
        assert sdc_from_fidelity(1.0, 2) == 0.0
        assert sdc_from_fidelity(0.1, 1) == 0.75
        assert sdc_from_fidelity(0.01, 2) == 15.0 / 16.0
        with pytest.raises(ValidationError):
            sdc_from_fidelity(0.0, 1)


class TestNoiseModel:
    """噪声模型数据结构测试"""

    def test_t2_must_not_exceed_twice_t1(self):
        """t2 > 2·t1 直接构造被拒绝，clamped 截断"""
        with pytest.raises(ValidationError):
            QubitParams(t1=10.0, t2=30.0)
        q = QubitParams.clamped(t1=10.0, t2=30.0)
        assert q.t2 == 20.0

    def test_probability_ranges(self):
        """p_leak 不可取 1，p_seep 可以"""
        with pytest.raises(ValidationError):
            QubitParams(t1=10.0, t2=10.0, p_leak=1.0)
        assert QubitParams(t1=10.0, t2=10.0, p_seep=1.0).p_seep == 1.0

    def test_coupler_must_be_adjacent(self):
        """耦合器端点必须相邻"""
        with pytest.raises(ValidationError):
            CouplerParams((0, 2), 0.99)

    def test_baseline_requires_p(self):
        """基线模型需要 p 且不接受逐比特参数"""
        with pytest.raises(ValidationError):
            NoiseModel(kind=ModelKind.SD6)
        with pytest.raises(ValidationError):
            NoiseModel(
                kind=ModelKind.SD6, p=0.01, qubits=(QubitParams(t1=1.0, t2=1.0),)
            )
        assert NoiseModel.baseline("si1000", 0.002).kind == ModelKind.SI1000

    def test_uniform_paems(self):
        """均匀模型：n 个比特、n-1 个相邻耦合器"""
        model = NoiseModel.uniform_paems(5, f2q=0.98)
        assert model.n_qubits == 5
        assert [c.endpoints for c in model.couplers] == [
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 4),
        ]
        assert model.coupler(3, 2).f2q == 0.98
        assert model.coupler(0, 2) is None


class TestCompileSchedule:
    """调度编译测试"""

    def setup_method(self):
        self.circuit = build_repetition_code(5, 2)
        self.model = NoiseModel.uniform_paems(
            5, t1=30.0, t2=40.0, p_readout=0.02, p_init=0.01, p_reset=0.03
        )

    def test_event_order_within_layer(self):
        """层内事件按 回渗→泄漏→X 翻转→ADC→SDC1→SDC2→读出翻转 排序"""
        schedule = compile_schedule(self.circuit, self.model)
        for layer in range(schedule.n_layers):
            ranks = [CHANNEL_RANK[e.channel] for e in schedule.events_in_layer(layer)]
            assert ranks == sorted(ranks)
        layers = [e.layer for e in schedule.events]
        assert layers == sorted(layers)

    def test_summary_counts(self):
        """零概率位点同样保留，事件数只取决于电路结构"""
        summary = compile_schedule(self.circuit, self.model).summary()
        n_layers = len(self.circuit.layers)
        assert summary["adc/decoherence"] == 5 * n_layers
        assert summary["leak/leakage"] == 4 * 4
        assert summary["seep/leakage"] == 5 * n_layers + 5 + 2 * 2
        assert summary["sdc2/gate_2q"] == 2 * 4
        assert summary["flip_x/init"] == 5
        assert summary["flip_x/reset"] == 4
        assert summary["readout_flip/measure"] == self.circuit.measurement_count

    def test_probabilities_from_model(self):
        """初始化层用 p_init，中途复位用 p_reset，测量用 p_readout"""
        schedule = compile_schedule(self.circuit, self.model)
        init = [e for e in schedule.events if e.origin == EventOrigin.INIT]
        reset = [e for e in schedule.events if e.origin == EventOrigin.RESET]
        assert all(e.probs == (0.01,) for e in init)
        assert all(e.probs == (0.03,) for e in reset)
        assert all(e.probs == (0.02,) for e in schedule.measurement_sites)

    def test_leakage_policies(self):
        """gate_only 只在纠缠门上放置泄漏与回渗；every_layer 每层每个比特都放置"""
        gate_only = NoiseModel.uniform_paems(
            5, leakage_policy=LeakagePolicy.GATE_ONLY
        )
        summary = compile_schedule(self.circuit, gate_only).summary()
        assert summary["seep/leakage"] == summary["leak/leakage"] == 16
        every = NoiseModel.uniform_paems(5, leakage_policy=LeakagePolicy.EVERY_LAYER)
        summary = compile_schedule(self.circuit, every).summary()
        n_layers = len(self.circuit.layers)
        assert summary["leak/leakage"] == 5 * n_layers

    def test_dumps_is_deterministic(self):
        """相同输入编译出字节一致的文本"""
        a = compile_schedule(self.circuit, self.model).dumps()
        b = compile_schedule(self.circuit, self.model).dumps()
        assert a == b
        assert a.startswith("schedule n=5 layers=10 kind=paems\n")

    def test_missing_parameters(self):
        """模型比特数不足时报错"""
        with pytest.raises(ValidationError):
            compile_schedule(self.circuit, NoiseModel.uniform_paems(3))

    def test_layer_groups_cover_events(self):
        """事件组覆盖全部事件"""
        schedule = compile_schedule(self.circuit, self.model)
        total = sum(
            g.qubits.shape[0] for groups in schedule.layer_groups for g in groups
        )
        assert total == len(schedule.events)

    def test_scale_events(self):
        """隔离单个通道时其余事件概率置 0，位点不变"""
        schedule = compile_schedule(self.circuit, self.model)
        isolated = scale_events(schedule, (ChannelKind.READOUT_FLIP,))
        assert len(isolated.events) == len(schedule.events)
        for e in isolated.events:
            if e.channel != ChannelKind.READOUT_FLIP:
                assert sum(e.probs) == 0.0
        assert isolated.measurement_sites == schedule.measurement_sites


class TestBaselines:
    """基线模型编译测试"""

    def setup_method(self):
        self.circuit = build_repetition_code(5, 3)

    def test_si1000_multipliers(self):
        """SI1000：测量 5p、复位 2p、两比特门 p"""
        p = 0.01
        schedule = compile_schedule(self.circuit, NoiseModel.baseline("si1000", p))
        measure = [e.probs[0] for e in schedule.measurement_sites]
        assert measure and all(m == pytest.approx(5 * p) for m in measure)
        resets = [e for e in schedule.events if e.origin == EventOrigin.RESET]
        assert resets and all(e.probs[0] == pytest.approx(2 * p) for e in resets)
        gates = [e for e in schedule.events if e.channel == ChannelKind.SDC2]
        assert len(gates) == 2 * 2 * 3
        assert all(e.probs[0] == pytest.approx(p) for e in gates)

    def test_code_capacity_only_data_flips(self):
        """cc：只有每轮开始前的数据比特 X 翻转"""
        schedule = compile_schedule(self.circuit, NoiseModel.baseline("cc", 0.1))
        assert {e.origin for e in schedule.events} == {EventOrigin.DATA_ROUND}
        assert len(schedule.events) == 3 * self.circuit.n_data

    def test_phenomenological(self):
        """phe：数据翻转加测量翻转"""
        schedule = compile_schedule(self.circuit, NoiseModel.baseline("phe", 0.05))
        assert set(schedule.summary()) == {
            "flip_x/data_round",
            "readout_flip/measure",
        }

    def test_probabilities_clamped(self):
        """倍数后超过 1 的概率截断到 1"""
        schedule = compile_schedule(self.circuit, NoiseModel.baseline("si1000", 0.5))
        assert all(e.probs[0] <= 1.0 for e in schedule.events)
        assert {e.probs[0] for e in schedule.measurement_sites} == {1.0}

    def test_every_baseline_compiles(self):
        """五种基线模型都能编译"""
        for kind in BASELINE_TABLE:
            schedule = compile_schedule(self.circuit, NoiseModel.baseline(kind, 0.01))
            assert schedule.model_kind == kind
            assert schedule.events


class TestParameterVector:
    """参数向量化测试"""

    def setup_method(self):
        self.model = NoiseModel.uniform_paems(
            3,
            t1=30.0,
            t2=45.0,
            f1q=0.999,
            f2q=0.98,
            p_init=0.01,
            p_reset=0.02,
            p_readout=0.03,
            p_leak=0.001,
            p_seep=0.05,
        )

    def test_labels_and_length(self):
        """CORE 掩码：每比特 6 个字段，每个耦合器 1 个"""
        labels = describe_vector(self.model, CORE)
        vector = parameter_vector(self.model, CORE)
        assert len(labels) == vector.size == 3 * 6 + 2
        assert labels[0] == "t1[0]"
        assert labels[-1] == "f2q[1-2]"

    def test_round_trip(self):
        """向量写回后参数不变"""
        vector = parameter_vector(self.model, FULL)
        restored = apply_vector(self.model, FULL, vector)
        for a, b in zip(restored.qubits, self.model.qubits):
            for name, value in a.to_dict().items():
                assert value == pytest.approx(getattr(b, name), rel=1e-9)
        assert restored.couplers[0].f2q == pytest.approx(0.98, rel=1e-12)

    def test_only_masked_fields_change(self):
        """掩码外的字段保持原值"""
        vector = parameter_vector(self.model, LEAKAGE) + 1.0
        updated = apply_vector(self.model, LEAKAGE, vector)
        for q in updated.qubits:
            assert q.t1 == 30.0
            assert q.p_readout == 0.03
            assert q.p_leak > 0.001

    def test_t2_clamped_after_apply(self):
        """写回后 t2 截断到 2·t1"""
        vector = parameter_vector(self.model, DECOHERENCE)
        vector[1::2] += 5.0
        updated = apply_vector(self.model, DECOHERENCE, vector)
        assert all(q.t2 == pytest.approx(2.0 * q.t1) for q in updated.qubits)

    def test_length_mismatch(self):
        """向量长度与掩码不一致"""
        with pytest.raises(ValidationError):
            apply_vector(self.model, CORE, np.zeros(3))

    def test_qubit_restricted_mask(self):
        """限定比特的掩码只选中范围内比特与两端都在范围内的耦合器"""
        mask = ParamMask.of("t1", "f2q", qubits=[0, 1])
        assert describe_vector(self.model, mask) == ["t1[0]", "t1[1]", "f2q[0-1]"]

    def test_unknown_field(self):
        """未知字段名"""
        with pytest.raises(ValidationError):
            ParamMask.of("t3")

    def test_baseline_has_no_vector(self):
        """基线模型不能向量化"""
        with pytest.raises(ValidationError):
            parameter_vector(NoiseModel.baseline("sd6", 0.01), CORE)

    def test_copy_masked(self):
        """只拷贝掩码选中的字段"""
        other = NoiseModel.uniform_paems(3, t1=10.0, t2=12.0, p_readout=0.2)
        merged = copy_masked(self.model, other, DECOHERENCE)
        assert merged.qubits[0].t1 == 10.0
        assert merged.qubits[0].t2 == 12.0
        assert merged.qubits[0].p_readout == 0.03

    def test_with_leakage_prior(self):
        """只替换恰为 0 的泄漏参数"""
        model = self.model.with_qubit(1, p_leak=0.0, p_seep=0.0)
        primed = with_leakage_prior(model, 1e-4, 1e-2)
        assert primed.qubits[0].p_leak == 0.001
        assert primed.qubits[1].p_leak == 1e-4
        assert primed.qubits[1].p_seep == 1e-2
