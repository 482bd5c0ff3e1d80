import math

import numpy as np
import pytest
from statsmodels.stats.diagnostic import normal_ad

from walkhull.stats import (
    DEFAULT_SIGMA_VALUES,
    DegenerateSampleError,
    GridConfig,
    P_FLOOR,
    PValueGrid,
    _combine,
    normality_pvalue,
    pvalue_grid,
)
from walkhull.montecarlo import ExperimentConfig, run_experiment
from walkhull.walks import RngStream, StepDistribution, TAG_CELL, derive_seed


def normal_sample(n=1000, seed=20240601):
    return RngStream.from_lineage(seed, 1).standard_normals(n)


def exponential_sample(n=1000, seed=20240601):
    u = RngStream.from_lineage(seed, 2).uniforms(n)
    return -np.log1p(-u)


class TestNormalityPvalue:
    def test_matches_reference_implementation(self):
        # same published formulas as statsmodels' estimated-parameters test
        for seed in (1, 2, 3, 4):
            x = RngStream.from_lineage(555, seed).standard_normals(800)
            mine = normality_pvalue(x)
            _, ref = normal_ad(np.asarray(x))
            assert mine == pytest.approx(float(ref), abs=1e-12)

    def test_normal_sample_not_rejected(self):
        assert normality_pvalue(normal_sample()) > 0.01

    def test_exponential_sample_rejected_hard(self):
        assert normality_pvalue(exponential_sample()) < 1e-10

    def test_affine_invariance_power_of_two_exact(self):
        x = np.asarray(normal_sample(500))
        assert normality_pvalue(x) == normality_pvalue(2.0 * x + 4.0)

    def test_affine_invariance_general(self):
        x = np.asarray(normal_sample(500))
        p = normality_pvalue(x)
        assert normality_pvalue(3.7 * x - 11.0) == pytest.approx(p, rel=1e-9)
        assert normality_pvalue(-2.3 * x + 0.5) == pytest.approx(p, rel=1e-6)

    def test_constant_sample_rejected_as_degenerate(self):
        with pytest.raises(DegenerateSampleError):
            normality_pvalue([3.0] * 100)

    def test_minimum_sample_size(self):
        with pytest.raises(ValueError):
            normality_pvalue([1.0, 2.0, 3.0])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            normality_pvalue([1.0, 2.0, math.nan] + [0.5] * 10)

    def test_floor_keeps_neglog_finite(self):
        # wildly bimodal sample pushes the statistic far out; the p-value
        # floors at 1e-300 so -log stays below ~690.8
        x = np.concatenate([np.zeros(500), np.ones(500)]) + np.linspace(0, 1e-6, 1000)
        p = normality_pvalue(x)
        assert p >= P_FLOOR
        assert -math.log(p) <= 690.8

    def test_calibration_at_nominal_levels(self):
        stream = RngStream.from_lineage(123456, 1000, 1)
        trials = 1000
        rej = {0.01: 0, 0.05: 0}
        for _ in range(trials):
            p = normality_pvalue(stream.standard_normals(1000))
            for alpha in rej:
                rej[alpha] += p < alpha
        for alpha, count in rej.items():
            tol = 3 * math.sqrt(alpha * (1 - alpha) / trials)
            assert abs(count / trials - alpha) <= tol

    def test_lilliefors_variant(self):
        assert normality_pvalue(normal_sample(), method="lilliefors") > 0.01
        assert normality_pvalue(exponential_sample(), method="lilliefors") < 1e-6

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            normality_pvalue(normal_sample(), method="shapiro")


class TestCombine:
    def test_log_of_mean_order(self):
        avg, neglog = _combine([0.1, 0.001], "log-of-mean")
        assert avg == pytest.approx(0.0505)
        assert neglog == pytest.approx(-math.log(0.0505))

    def test_mean_of_logs_alternative(self):
        avg, neglog = _combine([0.1, 0.001], "mean-of-logs")
        assert neglog == pytest.approx((-math.log(0.1) - math.log(0.001)) / 2)
        assert avg == pytest.approx(math.exp(-neglog))

    def test_orders_differ(self):
        _, a = _combine([0.5, 1e-8], "log-of-mean")
        _, b = _combine([0.5, 1e-8], "mean-of-logs")
        assert abs(a - b) > 1.0


class TestPvalueGrid:
    def test_default_sigma_set_is_the_published_eight(self):
        assert DEFAULT_SIGMA_VALUES == (0.1, 0.5, 1.0, 5.0, 10.0, 50.0, 100.0, 500.0)

    def test_grid_dimensions(self):
        cfg = GridConfig((1, 0), (0, 1), sigma_values=(0.5, 1.0, 2.0), n=60, reps=20, repeats=1, master_seed=3)
        grid = pvalue_grid(cfg)
        assert len(grid.cells) == 9
        assert grid.cell(2, 1).sigma1 == 2.0
        assert grid.cell(2, 1).sigma2 == 1.0

    def test_repeats_one_equals_single_experiment(self):
        cfg = GridConfig((1, 0), (0, 1), sigma_values=(1.0,), n=80, reps=40, repeats=1, master_seed=11)
        grid = pvalue_grid(cfg)
        cell = grid.cell(0, 0)
        seed = derive_seed(11, TAG_CELL, 0, 0, 0)
        exp = ExperimentConfig(
            (
                StepDistribution.isotropic_gaussian((1, 0), 1.0),
                StepDistribution.isotropic_gaussian((0, 1), 1.0),
            ),
            n=80,
            reps=40,
            master_seed=seed,
        )
        samples = run_experiment(exp)
        assert cell.avg_p_l == normality_pvalue(samples.l_values)
        assert cell.neglog_l == -math.log(cell.avg_p_l)

    def test_grid_reproducible(self):
        cfg = GridConfig((1, 0), (0, 1), sigma_values=(0.5, 5.0), n=50, reps=24, repeats=2, master_seed=7)
        a = pvalue_grid(cfg)
        b = pvalue_grid(cfg)
        assert a.to_csv() == b.to_csv()

    def test_degenerate_cell_marked_invalid(self):
        # zero variance + deterministic drift: constant samples
        cfg = GridConfig((1, 0), (2, 0), sigma_values=(0.0,), n=20, reps=10, repeats=1, master_seed=1)
        grid = pvalue_grid(cfg)
        cell = grid.cell(0, 0)
        assert not cell.valid
        assert math.isnan(cell.avg_p_l)
        csv = grid.to_csv()
        assert "nan,nan,nan,nan" in csv

    def test_csv_schema(self):
        cfg = GridConfig((1, 0), (0, 1), sigma_values=(1.0,), n=50, reps=16, repeats=1, master_seed=2)
        lines = pvalue_grid(cfg).to_csv().splitlines()
        assert lines[0] == "sigma1,sigma2,avg_p_L,neglog_L,avg_p_D,neglog_D"
        assert len(lines) == 2

    def test_json_payload_roundtrips_config(self):
        cfg = GridConfig((1, 0), (0, 1), sigma_values=(1.0, 2.0), n=50, reps=16, repeats=1, master_seed=4)
        payload = pvalue_grid(cfg).as_dict()
        assert payload["config"]["sigma_values"] == [1.0, 2.0]
        assert len(payload["cells"]) == 4
        assert all(c["valid"] for c in payload["cells"])
