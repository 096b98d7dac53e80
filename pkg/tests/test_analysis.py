"""Unit tests for the experiment runners and verification checks."""

import math

import numpy as np
import pytest
from scipy import stats

from harmstable import (
    ConfigError,
    ModelParams,
    ParameterError,
    QuadratureError,
    QuadratureSpec,
    envelope_kernel,
    envelope_quadrature,
    identity_suite,
    iid_stable_qv_experiment,
    kernel_limit_check,
    ks_two_sample,
    loglog_slope,
    run_clt_experiment,
    run_lln_experiment,
)

P = ModelParams(alpha=1.2, hurst=0.75)


class TestKsTwoSample:
    def test_hand_value(self):
        # ECDFs of {1,2} and {1.5,2.5} differ by 1/2 on [1,1.5) and [2,2.5)
        assert ks_two_sample([1.0, 2.0], [1.5, 2.5]) == pytest.approx(0.5)

    def test_identical_samples(self):
        x = [0.3, 1.7, -2.0, 5.0]
        assert ks_two_sample(x, x) == 0.0

    def test_matches_reference_implementation(self, rng):
        a = rng.normal(size=257)
        b = rng.normal(loc=0.3, size=401)
        ref = stats.ks_2samp(a, b).statistic
        assert ks_two_sample(a, b) == pytest.approx(ref, rel=1e-12)

    def test_rejects_empty(self):
        with pytest.raises(ParameterError):
            ks_two_sample([], [1.0])


class TestLoglogSlope:
    def test_exact_power_law(self):
        pts = [(n, 3.0 * n**-2.0) for n in (4, 16, 64, 256)]
        slope, stderr = loglog_slope(pts)
        assert slope == pytest.approx(-2.0, abs=1e-12)
        assert stderr == pytest.approx(0.0, abs=1e-12)

    def test_noisy_fit_reports_spread(self):
        pts = [(4, 1.0), (16, 0.3), (64, 0.05)]
        slope, stderr = loglog_slope(pts)
        assert slope < 0.0 and stderr > 0.0

    def test_rejects_degenerate_input(self):
        with pytest.raises(ParameterError):
            loglog_slope([(4, 1.0), (16, 0.5)])
        with pytest.raises(ParameterError):
            loglog_slope([(4, 1.0), (4, 0.5), (16, 0.2)])
        with pytest.raises(ParameterError):
            loglog_slope([(4, 1.0), (16, 0.0), (64, 0.1)])


class TestRunLlnExperiment:
    def test_report_shape_and_decay(self):
        rep = run_lln_experiment(P, 5.0, 400, (8, 16, 32), 50, seed=9, threads=1)
        assert rep.kind == "lln"
        assert rep.config["n_list"] == [8, 16, 32] and rep.config["seed"] == 9
        assert [row["n"] for row in rep.per_n] == [8, 16, 32]
        for row in rep.per_n:
            assert 0.0 <= row["q25"] <= row["median"] <= row["q75"]
        assert len(rep.raw) == 50 * 3
        assert rep.slope < 0.0 and rep.slope_stderr > 0.0
        # the statistic itself grows essentially linearly in n
        assert rep.extras["q_slope"] == pytest.approx(1.0, abs=0.2)

    def test_deterministic_across_thread_counts(self):
        a = run_lln_experiment(P, 5.0, 400, (8, 16, 32), 50, seed=9, threads=1)
        b = run_lln_experiment(P, 5.0, 400, (8, 16, 32), 50, seed=9, threads=4)
        assert a.raw == b.raw
        assert a.slope == b.slope

    def test_single_atom_degeneracy_reports_no_slope(self):
        # one atom makes |Y_j| constant in j, so Q_m/m - U sits at rounding
        # level and no decay rate is measurable
        rep = run_lln_experiment(
            P, 5.0, 1, (8, 16, 32), 50, seed=9, threads=1, enforce_resolution=False
        )
        assert rep.slope is None and rep.slope_stderr is None
        q_by_n = {row["n"]: row["q_median"] for row in rep.extras["q_median_per_n"]}
        for row in rep.per_n:
            assert row["median"] <= 1e-12 * q_by_n[row["n"]] / row["n"]

    def test_resolution_guard(self):
        with pytest.raises(ConfigError, match="resolution"):
            run_lln_experiment(P, 5.0, 400, (8, 64), 50, seed=9, threads=1)
        rep = run_lln_experiment(
            P, 5.0, 400, (8, 64), 50, seed=9, threads=1, enforce_resolution=False
        )
        assert [row["n"] for row in rep.per_n] == [8, 64]

    def test_rejects_bad_config(self):
        with pytest.raises(ParameterError):
            run_lln_experiment(P, 5.0, 400, (8, 16, 32), 10, seed=9)
        with pytest.raises(ParameterError):
            run_lln_experiment(P, 5.0, 400, (16, 8), 50, seed=9)
        with pytest.raises(ParameterError):
            run_lln_experiment(P, 5.0, 400, (8, 16, 32), 50, seed=9, threads=-1)


class TestRunCltExperiment:
    def test_report_shape(self):
        rep = run_clt_experiment(P, 5.0, 400, 16, 8, seed=10, threads=1, t_nodes=64)
        assert rep.kind == "clt"
        assert 0.0 <= rep.ks_distance <= 1.0
        assert len(rep.raw) == 16
        assert len(rep.extras["normalized_errors"]) == 8
        assert len(rep.extras["limit_draws"]) == 8
        # the two samples come from disjoint substreams
        assert rep.extras["normalized_errors"] != rep.extras["limit_draws"]

    def test_deterministic(self):
        a = run_clt_experiment(P, 5.0, 400, 16, 8, seed=10, threads=1, t_nodes=64)
        b = run_clt_experiment(P, 5.0, 400, 16, 8, seed=10, threads=3, t_nodes=64)
        assert a.raw == b.raw and a.ks_distance == b.ks_distance

    @pytest.mark.parametrize("alpha,hurst", [(1.8, 0.55), (1.2, 0.4)])
    def test_rejects_parameters_outside_limit_regime(self, alpha, hurst):
        with pytest.raises(ConfigError):
            run_clt_experiment(
                ModelParams(alpha, hurst), 5.0, 400, 16, 8, seed=10
            )

    def test_resolution_guard(self):
        with pytest.raises(ConfigError):
            run_clt_experiment(P, 5.0, 400, 64, 8, seed=10)


class TestIidStableQvExperiment:
    def test_superlinear_growth_rate(self):
        rep = iid_stable_qv_experiment(1.5, (64, 256, 1024), 100, seed=7, threads=1)
        assert rep.kind == "iid"
        assert rep.slope == pytest.approx(2.0 / 1.5, abs=0.25)
        assert len(rep.raw) == 300

    def test_gaussian_case_grows_linearly(self):
        rep = iid_stable_qv_experiment(2.0, (64, 256, 1024), 100, seed=8, threads=1)
        assert rep.slope == pytest.approx(1.0, abs=0.1)

    def test_rejects_small_replication_count(self):
        with pytest.raises(ParameterError):
            iid_stable_qv_experiment(1.5, (64, 256, 1024), 99, seed=7)


class TestIdentitySuite:
    def test_residuals_at_machine_precision(self):
        out = identity_suite(6, seed=11, n_terms=200, j_max=4, n_increments=16,
                             threads=1)
        assert out["max_square_decomposition_residual"] < 1e-12
        assert out["max_error_representation_residual"] < 1e-12
        assert out["trials"] == 6 and out["seed"] == 11
        assert out["alphas"] == [0.8, 1.2, 1.6]

    def test_rejects_bad_counts(self):
        with pytest.raises(ParameterError):
            identity_suite(0, seed=11)
        with pytest.raises(ParameterError):
            identity_suite(1, seed=11, n_increments=0)


class TestKernelLimitCheck:
    def test_deviations_shrink_like_one_over_n(self):
        devs = kernel_limit_check(1.0, -0.5, P, (64, 256, 1024, 4096))
        assert np.all(np.diff(devs) < 0.0)
        assert devs[-1] < 1e-3
        ratios = devs[:-1] / devs[1:]
        np.testing.assert_allclose(ratios, 4.0, rtol=0.2)

    def test_rejects_invalid_pairs(self):
        with pytest.raises(ParameterError):
            kernel_limit_check(1.0, 1.0, P, (64,))
        with pytest.raises(ParameterError):
            kernel_limit_check(1.0, 0.0, P, (64,))

    def test_rejects_lattice_gap(self):
        s = 0.5 + 2.0 * math.pi
        with pytest.raises(ParameterError, match="lattice"):
            kernel_limit_check(s, 0.5, P, (64,))
        with pytest.raises(ParameterError, match="lattice"):
            kernel_limit_check(s + 5e-10, 0.5, P, (64,))
        # a gap of pi is fine
        kernel_limit_check(0.5 + math.pi, 0.5, P, (64,))


class TestEnvelopeKernel:
    def test_point_values(self):
        f = envelope_kernel(0.7, 1.2).evaluator
        assert f(3.0, 2.5) == pytest.approx((3.0 * 2.5) ** -0.7)
        assert f(3.0, 1.0) == pytest.approx(3.0**-0.7 * 2.0**-1.2)
        assert f(2.0, 2.0) == 0.0 and f(1.0, 2.0) == 0.0

    def test_amplitude_scaling(self):
        base = envelope_kernel(0.7, 1.2).evaluator(3.0, 2.5)
        double = envelope_kernel(0.7, 1.2, amplitude=2.0).evaluator(3.0, 2.5)
        zero = envelope_kernel(0.7, 1.2, amplitude=0.0).evaluator(3.0, 2.5)
        assert double == pytest.approx(2.0 * base)
        assert zero == 0.0

    def test_rejects_bad_exponents(self):
        with pytest.raises(ParameterError):
            envelope_kernel(0.0, 1.2)
        with pytest.raises(ParameterError):
            envelope_kernel(0.7, -1.0)


class TestEnvelopeQuadrature:
    def test_integrable_exponents_stabilize(self):
        vals = envelope_quadrature(0.7, 1.2, (50.0, 100.0))
        assert vals[1] / vals[0] - 1.0 < 0.05

    def test_borderline_exponents_keep_growing(self):
        vals = envelope_quadrature(0.4, 1.2, (50.0, 100.0))
        assert vals[1] / vals[0] - 1.0 > 0.2

    def test_amplitude(self):
        one = envelope_quadrature(0.7, 1.2, (20.0,))
        two = envelope_quadrature(0.7, 1.2, (20.0,), amplitude=2.0)
        zero = envelope_quadrature(0.7, 1.2, (20.0,), amplitude=0.0)
        assert two[0] == pytest.approx(2.0 * one[0], rel=1e-12)
        assert zero[0] == 0.0

    def test_band_divergence_rejected(self):
        with pytest.raises(QuadratureError, match="diverges"):
            envelope_quadrature(1.0, 1.2, (50.0,))

    def test_rejects_bad_windows(self):
        with pytest.raises(ParameterError):
            envelope_quadrature(0.7, 1.2, (0.5,))
        with pytest.raises(ParameterError):
            envelope_quadrature(0.7, 1.2, ())

    def test_custom_grid_agrees(self):
        fine = envelope_quadrature(0.7, 1.2, (20.0,))
        coarse = envelope_quadrature(
            0.7, 1.2, (20.0,), quad=QuadratureSpec(cells_per_decade=8)
        )
        assert coarse[0] == pytest.approx(fine[0], rel=0.05)
