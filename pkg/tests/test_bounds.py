"""Mutual information, the regret bounds and the scaling diagnostics."""

import math

import numpy as np
import pytest

from tvbospec.errors import ScaleMismatch
from tvbospec.bounds import (
    bound_report,
    c1_constant,
    lower_bound,
    mutual_info_exact,
    mutual_info_spectral,
    scaling_diagnostic,
    truncated_gaussian_mean,
    upper_bound,
    upper_bound_curve,
)
from tvbospec.kernels import SpatialKernel, TemporalKernel
from tvbospec.spectral import (
    Scale,
    Spectrum,
    SymMatrix,
    approx_product_spectrum,
    build_spatiotemporal_matrix,
    eig_sym,
)
from tvbospec.tvbo import TVBOConfig, RegretTrace, run_replications, run_tvbo


def _spatiotemporal(rng, spatial, temporal, n, delta=0.1):
    xs = rng.uniform(0, 1, (n, spatial.dimension))
    ts = (np.arange(n) + 1) * delta
    return build_spatiotemporal_matrix(spatial, temporal, xs, ts), xs, ts


class TestMutualInformation:
    def test_scalar_case(self):
        assert mutual_info_exact([[1.0]], 1.0) == pytest.approx(0.5 * math.log(2))

    def test_zero_matrix(self):
        assert mutual_info_exact(np.zeros((4, 4)), 0.5) == 0.0

    def test_logdet_oracle(self, rng):
        # 1/2 log det(I + K/noise) via an independent slogdet call
        sp, tp = SpatialKernel.rbf([0.3]), TemporalKernel.rbf(1.0)
        m, _, _ = _spatiotemporal(rng, sp, tp, 20)
        noise = 0.05
        _, logdet = np.linalg.slogdet(np.eye(20) + m.values / noise)
        assert mutual_info_exact(m, noise) == pytest.approx(0.5 * logdet, abs=1e-8)

    def test_monotone_under_growth(self, rng):
        sp, tp = SpatialKernel.rbf([0.3]), TemporalKernel.matern(1.5, 0.9)
        for _ in range(50):
            n = int(rng.integers(3, 25))
            m, _, _ = _spatiotemporal(rng, sp, tp, n)
            k = int(rng.integers(1, n))
            sub = SymMatrix(m.values[:k, :k])
            assert mutual_info_exact(sub, 0.01) <= mutual_info_exact(m, 0.01) + 1e-12

    def test_spectral_scalar_agrees(self):
        spec = Spectrum(np.array([1.0]), scale=Scale.OPERATOR)
        assert mutual_info_spectral(spec, 1, 1.0) == pytest.approx(0.5 * math.log(2))

    def test_spectral_zero(self):
        spec = Spectrum(np.zeros(5), scale=Scale.OPERATOR)
        assert mutual_info_spectral(spec, 5, 0.3) == 0.0

    def test_scale_mismatch(self):
        spec = Spectrum(np.array([2.0, 1.0]), scale=Scale.MATRIX)
        with pytest.raises(ScaleMismatch):
            mutual_info_spectral(spec, 2, 1.0)

    def test_product_estimate_converges_for_discrete_kernels(self, rng):
        # Cor.-style product estimate of the operator spectrum: its mutual
        # information approaches the exact value as n grows for the
        # discrete-support classes (the broadband classes accumulate one
        # approximation error per eigenvalue and their relative gap
        # plateaus instead; see the decisions ledger)
        sp = SpatialKernel.rbf([0.7])
        for tp in (TemporalKernel.periodic(period=0.3, lengthscale=0.8),
                   TemporalKernel.cosine_sum([(0.0, 0.4), (1.3, 0.6)])):
            gaps = {}
            for n in (50, 200):
                m, xs, ts = _spatiotemporal(rng, sp, tp, n)
                exact = mutual_info_exact(m, 0.01)
                spec_s = eig_sym(SymMatrix(sp.pairwise(xs, xs)))
                from tvbospec.kernels import eval_temporal
                kt = eval_temporal(tp, np.abs(ts[:, None] - ts[None, :]))
                spec_t = eig_sym(SymMatrix(kt))
                prod = approx_product_spectrum(spec_s, spec_t, n)
                approx = mutual_info_spectral(prod.spectrum.to_operator(n), n, 0.01)
                gaps[n] = abs(approx - exact) / exact
            assert gaps[200] < gaps[50], (tp.family, gaps)

    def test_rbf_periodic_gap_direction(self, rng):
        sp = SpatialKernel.rbf([0.7])
        tp = TemporalKernel.periodic(period=0.3, lengthscale=0.8)
        gaps = {}
        for n in (50, 150):
            m, xs, ts = _spatiotemporal(rng, sp, tp, n)
            exact = mutual_info_exact(m, 0.01)
            spec_s = eig_sym(SymMatrix(sp.pairwise(xs, xs)))
            from tvbospec.kernels import eval_temporal
            kt = eval_temporal(tp, np.abs(ts[:, None] - ts[None, :]))
            prod = approx_product_spectrum(spec_s, eig_sym(SymMatrix(kt)), n)
            gaps[n] = abs(mutual_info_spectral(prod.spectrum.to_operator(n),
                                               n, 0.01) - exact) / exact
        assert gaps[150] < gaps[50]


class TestUpperBound:
    def test_zero_information_floor(self):
        assert upper_bound(10, 5.0, 0.01, 0.0) == pytest.approx(math.pi ** 2 / 6)

    def test_doubling_information_scales_radical(self):
        base = upper_bound(10, 5.0, 0.01, 3.0) - math.pi ** 2 / 6
        double = upper_bound(10, 5.0, 0.01, 6.0) - math.pi ** 2 / 6
        assert double == pytest.approx(math.sqrt(2) * base, rel=1e-12)

    def test_c1_constant(self):
        assert c1_constant(0.01) == pytest.approx(100.0 / math.log(101.0), rel=1e-12)

    def test_negative_inputs_rejected(self):
        with pytest.raises(ValueError):
            upper_bound(10, -1.0, 0.01, 3.0)

    def test_sublinear_for_periodic_run(self):
        cfg = TVBOConfig(spatial=SpatialKernel.rbf([0.4]),
                         temporal=TemporalKernel.periodic(period=0.5,
                                                          lengthscale=0.8),
                         seed=0)
        trace = run_tvbo(cfg)
        curve, _ = upper_bound_curve(trace)
        per_step = [curve[n - 1] / n for n in (50, 100, 200)]
        assert per_step[0] > per_step[1] > per_step[2], per_step


class TestTruncatedGaussianMean:
    def test_standard_normal(self):
        assert truncated_gaussian_mean(0.0, 1.0) == pytest.approx(
            1 / math.sqrt(2 * math.pi), rel=1e-12)

    def test_degenerate(self):
        assert truncated_gaussian_mean(3.0, 0.0) == 3.0
        assert truncated_gaussian_mean(-2.0, 0.0) == 0.0

    def test_monte_carlo_oracle(self):
        rng = np.random.default_rng(99)
        draws = rng.normal(1.0, 2.0, 1_000_000)
        clipped = np.maximum(draws, 0.0)
        mc = clipped.mean()
        se = clipped.std(ddof=1) / math.sqrt(len(draws))
        assert abs(truncated_gaussian_mean(1.0, 2.0) - mc) <= 3 * se

    def test_dominates_relu_of_mean(self, rng):
        for _ in range(200):
            mu = float(rng.uniform(-5, 5))
            sigma = float(rng.uniform(0, 4))
            assert truncated_gaussian_mean(mu, sigma) >= max(0.0, mu) - 1e-12

    def test_increasing_in_sigma(self, rng):
        for _ in range(200):
            mu = float(rng.uniform(-5, 5))
            s1, s2 = sorted(rng.uniform(0.01, 4, 2))
            assert truncated_gaussian_mean(mu, s2) >= \
                truncated_gaussian_mean(mu, float(s1)) - 1e-12


class TestLowerBound:
    def test_first_step_convention(self):
        cfg = TVBOConfig(spatial=SpatialKernel.rbf([0.4]),
                         temporal=TemporalKernel.rbf(1.0), horizon=5, seed=1)
        trace = run_tvbo(cfg)
        report = lower_bound(cfg.spatial, cfg.temporal, trace)
        assert report.terms[0] == pytest.approx(math.sqrt(2 / (2 * math.pi)),
                                                rel=1e-12)
        assert report.mu_hat[0] == 0.0
        assert report.sigma_hat[0] == pytest.approx(math.sqrt(2.0))

    def test_identical_points_cancel_mean(self):
        # force the oracle optimum to coincide with every chosen point: the
        # mean proxy vanishes and only the sigma terms remain
        cfg = TVBOConfig(spatial=SpatialKernel.rbf([0.4]),
                         temporal=TemporalKernel.rbf(1.0), horizon=12, seed=2)
        trace = run_tvbo(cfg)
        rigged = RegretTrace(
            config=trace.config, grid=trace.grid, times=trace.times,
            chosen_idx=trace.chosen_idx, star_idx=trace.chosen_idx.copy(),
            instantaneous=np.zeros_like(trace.instantaneous), ys=trace.ys,
            posterior_sd=trace.posterior_sd, betas=trace.betas,
            objective=trace.objective)
        report = lower_bound(cfg.spatial, cfg.temporal, rigged)
        assert np.allclose(report.mu_hat, 0.0, atol=1e-9)
        phi0 = 1 / math.sqrt(2 * math.pi)
        assert report.total == pytest.approx(
            float(np.sum(report.sigma_hat * phi0)), rel=1e-9)

    def test_sigma_within_bounds(self):
        cfg = TVBOConfig(spatial=SpatialKernel.rbf([0.4]),
                         temporal=TemporalKernel.periodic(period=0.5,
                                                          lengthscale=0.8),
                         horizon=40, seed=3)
        trace = run_tvbo(cfg)
        report = lower_bound(cfg.spatial, cfg.temporal, trace)
        assert np.all(report.sigma_hat >= 0.0)
        assert np.all(report.sigma_hat <= math.sqrt(2.0) + 1e-12)

    def test_below_empirical_mean_small_runs(self):
        # one-sided validity on short broadband runs (the acceptance suite
        # repeats this at full scale)
        cfg = TVBOConfig(spatial=SpatialKernel.rbf([0.4]),
                         temporal=TemporalKernel.rbf(1.0), horizon=60, seed=0)
        traces = run_replications(cfg, [0, 1, 2, 3], jobs=1)
        totals = np.array([t.total for t in traces])
        lows = np.array([lower_bound(cfg.spatial, cfg.temporal, t).total
                         for t in traces])
        sem = totals.std(ddof=1) / math.sqrt(len(totals))
        assert totals.mean() >= lows.mean() - 3 * sem

    def test_report_serializes(self):
        cfg = TVBOConfig(spatial=SpatialKernel.rbf([0.4]),
                         temporal=TemporalKernel.rbf(1.0), horizon=8, seed=4)
        trace = run_tvbo(cfg)
        report = bound_report(trace)
        payload = report.to_json()
        assert '"upper_bound"' in payload
        assert '"total_full_covariance"' in payload
        assert 0.0 <= report.c1_violation_fraction <= 1.0


class TestScalingDiagnostic:
    def test_discrete_count_stable(self):
        sp = SpatialKernel.rbf([0.7])
        tp = TemporalKernel.cosine_sum([(0.0, 0.4), (1.3, 0.6)])
        rows = scaling_diagnostic(sp, tp, [50, 100, 150, 200], seed=0)
        counts = [r["count"] for r in rows if r["n"] >= 100]
        assert len(set(counts)) == 1

    def test_broadband_count_grows(self):
        sp = SpatialKernel.rbf([0.7])
        tp = TemporalKernel.rbf(1.0)
        rows = {r["n"]: r for r in scaling_diagnostic(sp, tp, [100, 200], seed=0)}
        assert rows[200]["count"] >= 1.5 * rows[100]["count"]

    def test_interval_above_spectrum(self):
        sp = SpatialKernel.rbf([0.7])
        tp = TemporalKernel.rbf(1.0)
        rows = scaling_diagnostic(sp, tp, [40, 80], interval=(1e9, 2e9), seed=0)
        assert all(r["count"] == 0 for r in rows)

    def test_rows_report_information(self):
        sp = SpatialKernel.rbf([0.7])
        tp = TemporalKernel.rbf(1.0)
        rows = scaling_diagnostic(sp, tp, [60], seed=1)
        assert rows[0]["info"] > 0
        assert rows[0]["info_per_n"] == pytest.approx(rows[0]["info"] / 60)
        assert rows[0]["n0_proxy"] >= 1
