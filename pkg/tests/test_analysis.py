"""
统计分析测试：探测事件、相关矩阵、扇区划分、比例曲线与 TVD
"""

import math

import numpy as np
import pytest

from auto_noise.analysis.correlation import (
    average_reports,
    correlation_matrix,
    correlation_strength,
    sector_difference,
    timelike_profile,
)
from auto_noise.analysis.detections import (
    DetectionTensor,
    ancilla_fraction,
    detection_fraction,
    extract_detections,
    fraction_rms,
    fraction_slope,
)
from auto_noise.analysis.distribution import (
    StateDistribution,
    state_distribution,
    statistical_tvd_floor,
    tvd,
)
from auto_noise.analysis.sectors import (
    SECTOR_CODES,
    Sector,
    classify_sectors,
    expected_sector_counts,
    sector_codes,
    sector_of,
)
from auto_noise.circuit.builder import build_repetition_code
from auto_noise.errors import ValidationError
from auto_noise.models import Dataset


def _planted_tensor(
    n_shots: int, n_anc: int, rounds: int, edges, background: float, seed: int = 0
) -> DetectionTensor:
    """
    由独立机制构造探测事件：每个探测器有本底翻转，每条边以概率 p 同时翻转两端

    edges: [((a, r), (a, r), p), ...]
    """
    rng = np.random.default_rng(seed)
    bits = (rng.random((n_shots, n_anc, rounds)) < background).astype(np.uint8)
    for (a1, r1), (a2, r2), p in edges:
        hit = (rng.random(n_shots) < p).astype(np.uint8)
        bits[:, a1, r1 - 1] ^= hit
        bits[:, a2, r2 - 1] ^= hit
    return DetectionTensor(bits=bits)


def _index(n_anc: int, a: int, r: int) -> int:
    return (r - 1) * n_anc + a


class TestExtractDetections:
    """探测事件提取测试"""

    def test_xor_of_measurements(self):
        """探测器值为所引用测量的异或"""
        circuit = build_repetition_code(5, 2, final_detectors=True)
        bits = np.zeros((2, circuit.measurement_count), dtype=np.uint8)
        bits[0, 0] = 1  # 辅助比特 0 第 1 轮
        bits[1, 3] = 1  # 辅助比特 1 第 2 轮
        det = extract_detections(Dataset(bits), circuit)
        assert det.bits[0].tolist() == [[1, 1], [0, 0]]
        assert det.bits[1].tolist() == [[0, 0], [0, 1]]
        assert det.final_bits[1].tolist() == [0, 1]
        assert det.n_detectors == 6
        assert det.flat().shape == (2, 6)

    def test_measurement_count_mismatch(self):
        """测量数与电路不一致"""
        circuit = build_repetition_code(5, 2)
        with pytest.raises(ValidationError):
            extract_detections(Dataset(np.zeros((3, 4), dtype=np.uint8)), circuit)

    def test_fractions(self):
        """逐轮比例与第一轮逐辅助比特比例"""
        bits = np.zeros((4, 2, 3), dtype=np.uint8)
        bits[:, 0, 0] = 1
        bits[:2, 1, 2] = 1
        tensor = DetectionTensor(bits=bits)
        assert detection_fraction(tensor).tolist() == [0.5, 0.0, 0.25]
        assert ancilla_fraction(tensor, 1).tolist() == [1.0, 0.0]
        with pytest.raises(ValidationError):
            ancilla_fraction(tensor, 4)

    def test_fraction_metrics(self):
        """均方根差与线性斜率"""
        a = np.array([0.1, 0.2, 0.3, 0.4])
        assert fraction_rms(a, a) == 0.0
        assert fraction_rms(a, a + 0.1) == pytest.approx(0.1)
        assert fraction_slope(a) == pytest.approx(0.1)
        assert fraction_slope(a, start=4) == 0.0
        with pytest.raises(ValidationError):
            fraction_rms(a, a[:2])


class TestCorrelationMatrix:
    """两点相关矩阵测试"""

    def setup_method(self):
        self.edges = [((0, 1), (0, 2), 0.08), ((0, 2), (1, 2), 0.05)]
        self.tensor = _planted_tensor(200_000, 3, 4, self.edges, background=0.04)
        self.report = correlation_matrix(self.tensor)

    def test_recovers_planted_edges(self):
        """独立机制模型下估计量恢复边概率"""
        n = 3
        i, j = _index(n, 0, 1), _index(n, 0, 2)
        assert self.report.p[i, j] == pytest.approx(0.08, abs=0.006)
        i, j = _index(n, 0, 2), _index(n, 1, 2)
        assert self.report.p[i, j] == pytest.approx(0.05, abs=0.006)
        assert self.report.sector(i, j) == Sector.SPACELIKE

    def test_unrelated_pairs_near_zero(self):
        """无共同机制的探测器对 p ≈ 0"""
        n = 3
        i, j = _index(n, 2, 1), _index(n, 1, 4)
        assert abs(self.report.p[i, j]) < 0.006

    def test_symmetric_with_mean_on_diagonal(self):
        """矩阵对称，对角线为 <x_i>"""
        p = self.report.p
        assert np.allclose(p, p.T, equal_nan=True)
        assert np.allclose(np.diag(p), self.tensor.flat().mean(axis=0))

    def test_first_order_estimator(self):
        """一阶估计量给出 p(1-p)/(1-2p)^2，弱相关时趋于精确估计量"""
        approx = correlation_matrix(self.tensor, estimator="first_order")
        n = 3
        i, j = _index(n, 0, 1), _index(n, 0, 2)
        p = 0.08
        expected = p * (1 - p) / (1 - 2 * p) ** 2
        assert approx.p[i, j] == pytest.approx(expected, abs=0.008)
        assert approx.p[i, j] > self.report.p[i, j]
        with pytest.raises(ValidationError):
            correlation_matrix(self.tensor, estimator="second_order")

    @pytest.mark.parametrize("c", [0.01, 0.05, 0.2])
    def test_estimators_on_common_cause(self, c):
        """同一份数据：精确估计量恢复 c，一阶估计量等于 c(1-c)/(1-2c)^2"""
        tensor = _planted_tensor(200_000, 1, 2, [((0, 1), (0, 2), c)], 0.0, seed=5)
        exact = correlation_matrix(tensor)
        approx = correlation_matrix(tensor, estimator="first_order")
        assert exact.estimator == "exact"
        assert exact.p[0, 1] == pytest.approx(c, abs=0.004)
        assert approx.p[0, 1] == pytest.approx(
            c * (1 - c) / (1 - 2 * c) ** 2, rel=0.05
        )
        if c == 0.2:
            assert abs(approx.p[0, 1] - c) > 0.2

    def test_constant_detector_is_undefined(self):
        """恒定不变的探测器相关未定义（NaN），不会中断计算"""
        bits = self.tensor.bits.copy()
        bits[:, 2, 3] = 0
        report = correlation_matrix(DetectionTensor(bits=bits))
        k = _index(3, 2, 4)
        off_diagonal = np.delete(report.p[k], k)
        assert np.all(np.isnan(off_diagonal))
        assert report.p[k, k] == 0.0

    def test_needs_two_shots(self):
        """至少 2 个 shot"""
        with pytest.raises(ValidationError):
            correlation_matrix(DetectionTensor(bits=np.zeros((1, 2, 2), np.uint8)))

    def test_rows_cover_upper_triangle(self):
        """rows 逐项列出上三角"""
        n = self.report.n_detectors
        assert len(self.report.rows()) == n * (n - 1) // 2

    def test_timelike_profile(self):
        """相邻轮次 p_ij 序列"""
        profile = timelike_profile(self.report, 0)
        assert profile.shape == (3,)
        assert profile[0] == pytest.approx(0.08, abs=0.006)
        with pytest.raises(ValidationError):
            timelike_profile(self.report, 7)

    def test_strength(self):
        """扇区内均值与标准差"""
        mean, std = correlation_strength(self.report, Sector.TIMELIKE)
        assert 0.0 < mean < 0.08
        assert std > 0


class TestSectorDifference:
    """逐扇区差异测试"""

    def setup_method(self):
        edges = [((0, 1), (0, 2), 0.08)]
        self.a = correlation_matrix(_planted_tensor(50_000, 2, 3, edges, 0.03, seed=1))
        self.b = correlation_matrix(_planted_tensor(50_000, 2, 3, [], 0.03, seed=2))

    def test_self_difference_is_zero(self):
        """与自身差为 0"""
        diff = sector_difference(self.a, self.a)
        assert diff.total() == 0.0
        assert diff.leakage_tail == 0.0

    def test_timelike_dominates(self):
        """只在 timelike 扇区植入相关时该扇区差异最大"""
        diff = sector_difference(self.a, self.b)
        assert diff.timelike > diff.spacelike
        assert diff.max_abs["timelike"] == pytest.approx(0.08, abs=0.01)
        assert diff.total() == pytest.approx(
            diff.timelike + diff.spacelike + diff.spacetime
        )
        assert diff.total({"leakage_tail": 1.0}) == diff.leakage_tail

    def test_geometry_mismatch(self):
        """几何不一致的矩阵不能比较"""
        other = correlation_matrix(_planted_tensor(100, 3, 3, [], 0.2))
        with pytest.raises(ValidationError):
            sector_difference(self.a, other)

    def test_average_reports(self):
        """逐项平均多次运行"""
        avg = average_reports([self.a, self.b])
        assert avg.n_shots == 100_000
        expected = 0.5 * (self.a.p + self.b.p)
        assert np.allclose(avg.p, expected, equal_nan=True)


class TestSectors:
    """扇区划分测试"""

    def test_sector_of(self):
        """按 Δa、Δr 分类"""
        assert sector_of(0, 1, 0, 2) == Sector.TIMELIKE
        assert sector_of(0, 3, 1, 3) == Sector.SPACELIKE
        assert sector_of(1, 2, 0, 3) == Sector.SPACETIME
        assert sector_of(1, 1, 1, 4) == Sector.LEAKAGE_TAIL
        assert sector_of(0, 1, 2, 1) == Sector.OTHER

    @pytest.mark.parametrize("n,rounds", [(5, 1), (7, 5), (11, 8)])
    def test_counts_match_closed_form(self, n, rounds):
        """上三角各扇区计数与闭式公式一致"""
        circuit = build_repetition_code(n, rounds)
        labels = classify_sectors(circuit)
        upper = labels[np.triu_indices(labels.shape[0], k=1)]
        expected = expected_sector_counts(n // 2, rounds)
        for sector, count in expected.items():
            assert int(np.sum(upper == sector.value)) == count
        assert sum(expected.values()) == upper.size
        assert labels.dtype.kind == "U"
        assert np.array_equal(labels, labels.T)

    def test_vectorized_matches_scalar(self):
        """向量化分类与逐对分类一致"""
        ancillas = np.array([0, 1, 2, 0, 1, 2])
        rounds = np.array([1, 1, 1, 3, 3, 3])
        codes = sector_codes(ancillas, rounds)
        for i in range(6):
            for j in range(6):
                if i != j:
                    s = sector_of(ancillas[i], rounds[i], ancillas[j], rounds[j])
                    assert codes[i, j] == SECTOR_CODES[s]


class TestDistribution:
    """输出态分布与 TVD 测试"""

    def setup_method(self):
        bits = np.array([[0, 0], [0, 0], [0, 1], [1, 1]], dtype=np.uint8)
        self.dist = state_distribution(Dataset(bits))

    def test_state_distribution(self):
        """经验概率"""
        assert self.dist.probability("00") == 0.5
        assert self.dist.probability("10") == 0.0
        assert self.dist.all_zero == 0.5
        assert math.fsum(self.dist.probs.values()) == pytest.approx(1.0)

    def test_columns(self):
        """只统计选中的测量"""
        bits = np.array([[0, 1], [1, 1]], dtype=np.uint8)
        dist = state_distribution(Dataset(bits), columns=[1])
        assert dist.probs == {"1": 1.0}

    def test_tvd_axioms(self):
        """TVD ∈ [0,1]，对称，自身为 0，支撑不交时为 1"""
        other = StateDistribution({"11": 0.5, "10": 0.5}, n_bits=2, n_shots=2)
        disjoint = StateDistribution({"10": 1.0}, n_bits=2, n_shots=1)
        assert tvd(self.dist, self.dist) == 0.0
        assert tvd(self.dist, other) == tvd(other, self.dist)
        assert tvd(self.dist, other) == pytest.approx(0.75)
        assert tvd(self.dist, disjoint) == 1.0
        with pytest.raises(ValidationError):
            tvd(self.dist, StateDistribution({"1": 1.0}, n_bits=1, n_shots=1))

    def test_statistical_floor(self):
        """重采样下限为正且随 shot 数减小"""
        small = statistical_tvd_floor(self.dist, 50, seed=1)
        large = statistical_tvd_floor(self.dist, 50_000, seed=1)
        assert 0.0 < large < small
        assert statistical_tvd_floor(self.dist, 50, seed=1) == small
