import numpy as np
import pytest

from tsseg import (
    BenchTable,
    GenSpec,
    StateSequence,
    accuracy,
    generate,
    p_for_expected_length,
    run_benchmark,
)


class TestGenerate:
    def test_noiseless_values_are_the_means(self):
        x, z = generate(GenSpec(K=5, p=0.9, sigma=0.0, seed=0))
        assert set(np.unique(x.values)) <= {1.0, -1.0}
        signs = np.sign(x.values)
        assert int(np.count_nonzero(signs[1:] != signs[:-1])) == 4

    def test_exactly_k_segments_and_nondecreasing(self):
        for seed in range(25):
            x, z = generate(GenSpec(K=5, p=0.95, sigma=0.7, seed=seed))
            assert np.all(np.diff(z.states) >= 0)
            changes = int(np.count_nonzero(np.diff(z.states))) + 1
            assert changes == 5
            assert len(x) == len(z)

    def test_deterministic_given_seed(self):
        a = generate(GenSpec(K=5, p=0.97, sigma=1.0, seed=123))
        b = generate(GenSpec(K=5, p=0.97, sigma=1.0, seed=123))
        assert np.array_equal(a[0].values, b[0].values)
        assert np.array_equal(a[1].states, b[1].states)

    def test_expected_length(self):
        lengths = [
            len(generate(GenSpec(K=5, p=0.975, sigma=0.0, seed=s))[0])
            for s in range(1000)
        ]
        mean = float(np.mean(lengths))
        assert abs(mean - 200.0) / 200.0 <= 0.05

    def test_validation(self):
        with pytest.raises(ValueError):
            GenSpec(K=3, p=0.9, means=(1.0, -1.0), sigma=0.5, seed=0)
        with pytest.raises(ValueError):
            GenSpec(K=5, p=1.0, sigma=0.5, seed=0)


class TestPForExpectedLength:
    def test_paper_grid_values(self):
        assert p_for_expected_length(200, 5) == pytest.approx(0.975)
        assert p_for_expected_length(500, 5) == pytest.approx(0.99)

    def test_short_series_boundary(self):
        assert p_for_expected_length(5.5, 5) == pytest.approx(1 - 5 / 5.5)
        with pytest.raises(ValueError):
            p_for_expected_length(5, 5)


class TestAccuracy:
    def test_identical(self):
        z = StateSequence([1, 1, 2, 3])
        assert accuracy(z, z) == 1.0

    def test_half(self):
        assert accuracy(
            StateSequence([1, 1, 2, 2]), StateSequence([1, 1, 3, 3])
        ) == pytest.approx(0.5)

    def test_two_thirds(self):
        assert accuracy(
            StateSequence([1, 1, 2]), StateSequence([1, 2, 2])
        ) == pytest.approx(2 / 3)

    def test_symmetric(self):
        a = StateSequence([1, 2, 2, 3, 3])
        b = StateSequence([1, 1, 2, 2, 3])
        assert accuracy(a, b) == accuracy(b, a)

    def test_one_iff_identical(self):
        a = StateSequence([1, 2, 3])
        b = StateSequence([1, 2, 4])
        assert accuracy(a, b) < 1.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            accuracy(StateSequence([1, 1]), StateSequence([1, 1, 2]))


class TestBenchmark:
    def test_deterministic_with_injected_clock(self):
        kwargs = dict(
            lengths=[100, 200], sigmas=[0.0, 1.0], replicates=3, seed=5,
            clock=lambda: 0.0,
        )
        a = run_benchmark(**kwargs)
        b = run_benchmark(**kwargs)
        assert a == b
        assert a.to_csv() == b.to_csv()

    def test_csv_shape(self):
        table = run_benchmark([100, 200], [0.0, 1.0], 2, seed=1)
        lines = table.to_csv().strip().split("\n")
        assert lines[0] == "T,sigma,mean_accuracy,mean_time_ms"
        assert len(lines) == 5

    def test_noiseless_accuracy_is_high(self):
        table = run_benchmark([200], [0.0], 10, seed=2)
        assert table.rows[0].mean_accuracy >= 0.99

    def test_monotone_degradation(self):
        # accuracy decays with noise, up to 2 points of sampling slack
        sigmas = [0.1, 0.5, 1.0, 2.0]
        table = run_benchmark([200], sigmas, 100, seed=3)
        acc = [r.mean_accuracy for r in table.rows]
        for lo, hi in zip(acc[1:], acc[:-1]):
            assert lo <= hi + 0.02

    def test_dp_algorithm_supported(self):
        table = run_benchmark([80], [0.5], 3, algorithm="dp", seed=4)
        assert table.rows[0].mean_accuracy >= 0.9

    def test_text_tables(self):
        table = run_benchmark([100, 150], [0.0, 0.5], 2, seed=6)
        acc_table = table.format_accuracy_table()
        assert "100" in acc_table and "150" in acc_table
        assert acc_table.count("\n") == 3
        time_table = table.format_time_table()
        assert time_table.startswith("T")

    def test_validation(self):
        with pytest.raises(ValueError):
            run_benchmark([100], [0.5], 0)
        with pytest.raises(ValueError):
            run_benchmark([100], [0.5], 1, algorithm="magic")
