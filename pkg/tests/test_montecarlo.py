"""Monte Carlo experiments: draw contract, reproducibility, dominance, sweeps.

RMSE anchors are frozen from fixed-seed runs; the generator contract keys
every trial to (master_seed, row), so these values are stable by design.
"""

import math

import numpy as np
import pytest
from scipy import stats

from mapbound.bounds import bcrb, ezzb_1d, prior_fim_1d, wwb_1d, CondFim, PriorFim
from mapbound.errors import UnknownParam, ValidationError
from mapbound.estimators import GaussianObsModel, RangingObsModel
from mapbound.montecarlo import (
    ESTIMATORS,
    SWEEP_PARAMS,
    ExperimentConfig,
    ExperimentResult,
    bounds_for,
    run_experiment,
    sample_uniform,
    sweep,
)
from mapbound.presets import (
    TwoSegmentGeometry,
    corner_anchors,
    floor_map,
    map1_support,
    map2_map,
)

GAUSS3 = GaussianObsModel.isotropic(3.0)
MAP1 = map1_support(1.0, 1.0)
MAP2 = map2_map()


class TestConfigValidation:
    def test_accepts_both_support_kinds(self):
        ExperimentConfig(MAP1, GAUSS3)
        ExperimentConfig(MAP2, GAUSS3)

    def test_rejects_wrong_support_type(self):
        with pytest.raises(ValidationError):
            ExperimentConfig((0.0, 1.0), GAUSS3)

    def test_rejects_unknown_estimator(self):
        with pytest.raises(ValidationError, match="estimator"):
            ExperimentConfig(MAP1, GAUSS3, estimator="BLUE")

    @pytest.mark.parametrize("n", [0, -3, 2.5])
    def test_rejects_bad_run_counts(self, n):
        with pytest.raises(ValidationError):
            ExperimentConfig(MAP1, GAUSS3, n_runs=n)

    def test_rejects_out_of_range_seed(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(MAP1, GAUSS3, master_seed=-1)
        with pytest.raises(ValidationError):
            ExperimentConfig(MAP1, GAUSS3, master_seed=2**64)

    def test_rejects_ranging_on_1d(self):
        model = RangingObsModel(((0, 0), (1, 0), (0, 1)), 1.0)
        with pytest.raises(ValidationError):
            ExperimentConfig(MAP1, model)

    def test_rejects_mmse_with_ranging(self):
        model = RangingObsModel(corner_anchors(MAP2), 1.0)
        with pytest.raises(ValidationError, match="MAP or ML"):
            ExperimentConfig(MAP2, model, estimator="MMSE")

    def test_is_1d(self):
        assert ExperimentConfig(MAP1, GAUSS3).is_1d
        assert not ExperimentConfig(MAP2, GAUSS3).is_1d

    def test_constants(self):
        assert ESTIMATORS == ("MMSE", "MAP", "ML")
        assert SWEEP_PARAMS == ("sigma", "dx", "w", "w2", "rho")


class TestResultValidation:
    def test_total_must_match_components(self):
        with pytest.raises(ValidationError):
            ExperimentResult(10, 0, rmse_x=1.0, stderr_x=0.1, rmse_y=1.0,
                             stderr_y=0.1, rmse_total=5.0, stderr_total=0.1)

    def test_mse_properties(self):
        r = ExperimentResult(10, 0, rmse_x=2.0, stderr_x=0.1,
                             rmse_total=2.0, stderr_total=0.1)
        assert r.mse_x == pytest.approx(4.0)
        assert r.mse_y is None


class TestSampleUniform:
    def test_1d_moments_and_component_split(self):
        rng = np.random.default_rng(3)
        xs = np.array([sample_uniform(MAP1, rng) for _ in range(20_000)])
        in_first = (xs >= 0.0) & (xs <= 1.0)
        in_second = (xs >= 2.0) & (xs <= 3.0)
        assert np.all(in_first | in_second)
        # equal widths: about half the mass in each segment
        assert abs(in_first.mean() - 0.5) < 0.02
        assert xs.mean() == pytest.approx(1.5, abs=0.03)

    def test_2d_area_weighting(self):
        # lower rect has twice the area of the upper one
        rng = np.random.default_rng(4)
        pts = np.array([sample_uniform(MAP2, rng) for _ in range(15_000)])
        frac_lower = (pts[:, 1] <= 5.0).mean()
        assert abs(frac_lower - 2.0 / 3.0) < 0.02

    def test_2d_uniformity_chi_square(self):
        # occupancy over a 10x10 partition of one rect must be flat
        rng = np.random.default_rng(5)
        from mapbound.geometry import build_map

        box = build_map([(0.0, 0.0, 10.0, 10.0)])
        pts = np.array([sample_uniform(box, rng) for _ in range(40_000)])
        ix = np.minimum((pts[:, 0]).astype(int), 9)
        iy = np.minimum((pts[:, 1]).astype(int), 9)
        counts = np.bincount(ix * 10 + iy, minlength=100)
        p = stats.chisquare(counts).pvalue
        assert p > 0.001


class TestRunExperiment:
    def test_ml_gaussian_rmse_tracks_sigma(self):
        # unconstrained estimate: error is the raw noise, RMSE ~ sigma
        cfg = ExperimentConfig(MAP1, GAUSS3, "ML", 10_000, 1234)
        r = run_experiment(cfg)
        assert r.rmse_x == pytest.approx(3.0, abs=0.05)
        assert r.rmse_y is None
        assert r.rmse_total == r.rmse_x

    def test_mmse_far_segments_approach_uniform_spread(self):
        # widely separated unit segments: posterior spread ~ 1/sqrt(12)
        m = TwoSegmentGeometry(1.0, 30.0).build()
        cfg = ExperimentConfig(m, GAUSS3, "MMSE", 10_000, 1234)
        r = run_experiment(cfg)
        assert r.rmse_x == pytest.approx(1.0 / math.sqrt(12.0), abs=0.01)

    def test_single_run_has_no_spread_estimate(self):
        cfg = ExperimentConfig(MAP1, GAUSS3, "ML", 1, 99)
        r = run_experiment(cfg)
        assert r.n_runs == 1
        assert r.rmse_x > 0.0
        assert math.isnan(r.stderr_x)

    def test_repeat_runs_identical(self):
        cfg = ExperimentConfig(MAP2, GAUSS3, "MMSE", 3000, 42)
        assert run_experiment(cfg) == run_experiment(cfg)

    def test_row_changes_draws(self):
        cfg = ExperimentConfig(MAP1, GAUSS3, "MMSE", 2000, 42)
        assert run_experiment(cfg, row=0) != run_experiment(cfg, row=1)

    def test_thread_count_does_not_change_result(self, monkeypatch):
        model = RangingObsModel(corner_anchors(MAP2), 1.0)
        cfg = ExperimentConfig(MAP2, model, "MAP", 300, 8)
        monkeypatch.setenv("MAPBOUND_THREADS", "1")
        serial = run_experiment(cfg)
        monkeypatch.setenv("MAPBOUND_THREADS", "5")
        threaded = run_experiment(cfg)
        assert serial == threaded

    def test_ranging_map_beats_noise_floor_on_floor_plan(self):
        support = floor_map()
        model = RangingObsModel(corner_anchors(support), 1.0)
        cfg = ExperimentConfig(support, model, "MAP", 250, 17)
        r = run_experiment(cfg)
        assert r.n_underflow == 0
        # four-anchor ranging at sigma=1 lands well under a meter per axis
        assert r.rmse_total < 1.5

    def test_total_combines_axes(self):
        cfg = ExperimentConfig(MAP2, GAUSS3, "MAP", 2000, 5)
        r = run_experiment(cfg)
        assert r.rmse_total == pytest.approx(
            math.hypot(r.rmse_x, r.rmse_y), rel=1e-12
        )


@pytest.fixture(scope="module")
def results_1d():
    return {
        e: run_experiment(ExperimentConfig(MAP1, GAUSS3, e, 10_000, 7))
        for e in ESTIMATORS
    }


class TestEstimatorDominance:
    """Minimum-MSE estimator must win in MSE up to sampling noise."""

    def test_mmse_beats_map_1d(self, results_1d):
        r = results_1d
        assert r["MMSE"].rmse_x <= r["MAP"].rmse_x + 2.0 * r["MAP"].stderr_x

    def test_mmse_beats_ml_1d(self, results_1d):
        r = results_1d
        assert r["MMSE"].rmse_x <= r["ML"].rmse_x + 2.0 * r["ML"].stderr_x

    def test_map_beats_ml_here(self, results_1d):
        # projection onto the support can only help against raw noise
        r = results_1d
        assert r["MAP"].rmse_x <= r["ML"].rmse_x + 2.0 * r["ML"].stderr_x

    def test_ordering_2d(self):
        r = {
            e: run_experiment(ExperimentConfig(MAP2, GAUSS3, e, 4000, 7))
            for e in ESTIMATORS
        }
        assert r["MMSE"].rmse_total <= r["MAP"].rmse_total + 2.0 * r["MAP"].stderr_total
        assert r["MAP"].rmse_total <= r["ML"].rmse_total + 2.0 * r["ML"].stderr_total


class TestBoundConsistency:
    """Every bound must sit below the empirical MMSE MSE plus sampling slack.

    The separation sweep stresses the hard regimes: near-merged segments,
    maximal confusion around dx ~ 2 sigma, and the far plateau where the
    tightest bound comes within a percent of the true Bayesian MSE.
    """

    def test_bounds_below_mmse_mse_across_separations(self):
        geom = TwoSegmentGeometry(1.0, 1.0)
        cfg = ExperimentConfig(geom.build(), GAUSS3, n_runs=4000,
                               master_seed=11, geometry=geom)
        rows = sweep(cfg, "dx", (0.5, 1.0, 2.0, 4.0, 8.0, 15.0, 30.0),
                     estimators=("MMSE",))
        for row in rows:
            r = row.results["MMSE"]
            mse = r.mse_x
            se_mse = 2.0 * r.rmse_x * r.stderr_x
            slack = mse + 3.0 * se_mse
            assert float(row.bounds["bcrb"]) <= slack, f"bcrb at dx={row.value}"
            assert float(row.bounds["ezzb"]) <= slack, f"ezzb at dx={row.value}"
            assert row.bounds["wwb"].value <= slack, f"wwb at dx={row.value}"


class TestBoundsFor:
    def test_matches_direct_evaluation_1d(self):
        out = bounds_for(MAP1, GAUSS3)
        assert set(out) == {"bcrb", "ezzb", "wwb"}
        prior = PriorFim(j_x=prior_fim_1d(MAP1))
        assert float(out["bcrb"]) == pytest.approx(
            bcrb(prior, CondFim(j_zx=1.0 / 9.0)).b_x, rel=1e-12
        )
        assert float(out["ezzb"]) == pytest.approx(ezzb_1d(MAP1, 3.0), rel=1e-12)
        assert out["wwb"].value == pytest.approx(wwb_1d(MAP1, 3.0).value, rel=1e-12)

    def test_2d_returns_pairs(self):
        out = bounds_for(MAP2, GAUSS3)
        assert out["bcrb"].b_x > 0 and out["bcrb"].b_y > 0

    def test_ranging_has_no_bounds(self):
        model = RangingObsModel(corner_anchors(MAP2), 1.0)
        assert bounds_for(MAP2, model) == {}


class TestSweep:
    def test_unknown_param_rejected(self):
        cfg = ExperimentConfig(MAP1, GAUSS3, n_runs=10)
        with pytest.raises(UnknownParam):
            sweep(cfg, "gamma", (1.0,))

    def test_empty_values(self):
        cfg = ExperimentConfig(MAP1, GAUSS3, n_runs=10)
        assert sweep(cfg, "sigma", ()) == []

    def test_geometry_required_for_shape_params(self):
        cfg = ExperimentConfig(MAP1, GAUSS3, n_runs=10)
        with pytest.raises(ValidationError, match="geometry"):
            sweep(cfg, "dx", (1.0,))

    def test_rho_needs_geometry_width(self):
        cfg = ExperimentConfig(MAP1, GAUSS3, n_runs=10)
        with pytest.raises(ValidationError):
            sweep(cfg, "rho", (1.0,))

    def test_sigma_sweep_needs_no_geometry(self):
        cfg = ExperimentConfig(MAP1, GAUSS3, n_runs=50, master_seed=3)
        rows = sweep(cfg, "sigma", (1.0, 2.0))
        assert [row.value for row in rows] == [1.0, 2.0]
        assert all(set(row.results) == {"MMSE"} for row in rows)

    def test_rho_sets_noise_from_width(self):
        geom = TwoSegmentGeometry(2.0, 1.0)
        cfg = ExperimentConfig(geom.build(), GAUSS3, "ML", 4000,
                               master_seed=3, geometry=geom)
        rows = sweep(cfg, "rho", (4.0,))
        # rho = w / sigma, so sigma = 0.5 here; ML RMSE tracks it
        assert rows[0].results["ML"].rmse_x == pytest.approx(0.5, abs=0.02)

    def test_row_seeds_differ_and_are_deterministic(self):
        cfg = ExperimentConfig(MAP1, GAUSS3, n_runs=20, master_seed=9)
        rows = sweep(cfg, "sigma", (1.0, 2.0, 3.0))
        seeds = [row.master_seed for row in rows]
        assert len(set(seeds)) == 3
        again = sweep(cfg, "sigma", (1.0, 2.0, 3.0))
        assert [row.master_seed for row in again] == seeds

    def test_multiple_estimators_share_draws(self):
        geom = TwoSegmentGeometry(1.0, 1.0)
        cfg = ExperimentConfig(geom.build(), GAUSS3, n_runs=500,
                               master_seed=21, geometry=geom)
        rows = sweep(cfg, "dx", (2.0,), estimators=("MMSE", "ML"))
        row = rows[0]
        assert set(row.results) == {"MMSE", "ML"}
        solo = ExperimentConfig(TwoSegmentGeometry(1.0, 2.0).build(), GAUSS3,
                                "ML", 500, row.master_seed)
        assert run_experiment(solo) == row.results["ML"]

    def test_ranging_rows_have_no_bounds(self):
        model = RangingObsModel(corner_anchors(MAP2), 2.0)
        cfg = ExperimentConfig(MAP2, model, "MAP", 60, 4)
        rows = sweep(cfg, "sigma", (2.0,))
        assert rows[0].bounds == {}
        assert rows[0].results["MAP"].rmse_total > 0.0
