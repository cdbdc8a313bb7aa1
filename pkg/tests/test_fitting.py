"""Normalization, circle initialization, and least-squares refinement."""

import json

import numpy as np
import pytest

from qbartools.bvd import ResonanceParams, s21_inverse_model, s21_model
from qbartools.errors import (DataError, DegenerateFitError, NoResonanceError,
                              NormalizationError, ValidationError)
from qbartools.fitting import (BaselineModel, ComplexTrace, circle_init,
                               fit_report, fit_resonance, fit_trace,
                               normalize_trace)
from qbartools.synth import resonance_grid, synth_trace

PAPER_LIKE = ResonanceParams(f0=4.88e9, Qi=4.3e4, Qc=1.0e4, phi=0.2)


def _max_rel_err(got: ResonanceParams, truth: ResonanceParams) -> float:
    return max(abs(got.f0 - truth.f0) / truth.f0,
               abs(got.Qi - truth.Qi) / truth.Qi,
               abs(got.Qc - truth.Qc) / truth.Qc,
               abs(got.phi - truth.phi) / max(abs(truth.phi), 1.0))


class TestComplexTrace:
    def test_rejects_unequal_lengths(self):
        with pytest.raises(ValidationError):
            ComplexTrace(np.arange(5.0) + 1, np.ones(4, complex))

    def test_rejects_non_increasing(self):
        f = np.array([1.0, 2.0, 2.0, 3.0])
        with pytest.raises(ValidationError):
            ComplexTrace(f, np.ones(4, complex))

    def test_rejects_non_finite(self):
        f = np.arange(4.0) + 1
        v = np.ones(4, complex)
        v[2] = np.nan
        with pytest.raises(ValidationError):
            ComplexTrace(f, v)


class TestNormalizeTrace:
    def test_clean_model_passes_through(self):
        grid = resonance_grid(PAPER_LIKE.f0, PAPER_LIKE.Qi)
        raw = synth_trace(PAPER_LIKE, grid)
        norm, baseline = normalize_trace(raw)
        assert np.max(np.abs(norm.values - raw.values)) < 1e-5
        assert baseline.amplitude_offset == pytest.approx(1.0, abs=1e-6)
        assert abs(baseline.group_delay) < 1e-13

    def test_known_baseline_round_trip(self):
        # uniform grid so "sample period" is well defined
        truth = ResonanceParams(f0=4.88e9, Qi=4.3e4, Qc=4.3e4, phi=0.0)
        span = 600.0 * truth.f0 / truth.Qi
        grid = np.linspace(truth.f0 - span / 2, truth.f0 + span / 2, 2001)
        sample_period = 1.0 / span
        tau = 0.4 * sample_period
        applied = BaselineModel(amplitude_offset=0.8, amplitude_slope=1e-12,
                                phase_offset=0.7, group_delay=tau,
                                reference_freq=truth.f0)
        raw = synth_trace(truth, grid, baseline=applied)
        norm, recovered = normalize_trace(raw)
        assert abs(recovered.group_delay - tau) < 0.01 * sample_period
        clean = s21_model(truth, grid)
        assert np.max(np.abs(norm.values - clean)) < 1e-3

    def test_pure_noise_normalizes_to_unit_magnitude(self):
        rng = np.random.default_rng(5)
        grid = np.linspace(4.8e9, 4.9e9, 400)
        sigma = 0.01
        values = 0.7 * np.exp(1j * 0.3) + sigma / np.sqrt(2) * (
            rng.standard_normal(400) + 1j * rng.standard_normal(400))
        norm, _ = normalize_trace(ComplexTrace(grid, values))
        assert abs(np.mean(np.abs(norm.values)) - 1.0) < sigma

    def test_narrow_edge_window_raises(self):
        grid = np.linspace(4.8e9, 4.9e9, 30)
        trace = ComplexTrace(grid, np.ones(30, complex))
        with pytest.raises(NormalizationError):
            normalize_trace(trace, edge_fraction=0.1)  # 3 samples per side

    def test_zero_magnitude_sample_raises(self):
        grid = np.linspace(4.8e9, 4.9e9, 100)
        values = np.ones(100, complex)
        values[50] = 0.0
        with pytest.raises(DataError):
            normalize_trace(ComplexTrace(grid, values))

    def test_edge_fraction_domain(self):
        grid = np.linspace(4.8e9, 4.9e9, 100)
        trace = ComplexTrace(grid, np.ones(100, complex))
        with pytest.raises(ValidationError):
            normalize_trace(trace, edge_fraction=0.0)
        with pytest.raises(ValidationError):
            normalize_trace(trace, edge_fraction=0.5)


class TestCircleInit:
    def test_noise_free_recovery_within_one_percent(self):
        grid = resonance_grid(PAPER_LIKE.f0, PAPER_LIKE.Qi)
        norm = synth_trace(PAPER_LIKE, grid)
        init = circle_init(norm)
        assert _max_rel_err(init, PAPER_LIKE) < 0.01

    def test_symmetric_trace_gives_small_phi(self):
        truth = ResonanceParams(f0=4.88e9, Qi=4.3e4, Qc=2e4, phi=0.0)
        grid = resonance_grid(truth.f0, truth.Qi)
        init = circle_init(synth_trace(truth, grid))
        assert abs(init.phi) < 1e-3

    def test_on_resonance_inverse_point_distance(self):
        truth = ResonanceParams(f0=4.88e9, Qi=9e4, Qc=1e4, phi=0.0)  # ratio 9
        grid = resonance_grid(truth.f0, truth.Qi)
        norm = synth_trace(truth, grid)
        w = 1.0 / norm.values
        assert np.max(np.abs(w - 1.0)) == pytest.approx(9.0, rel=1e-6)

    def test_no_resonance_raises(self):
        rng = np.random.default_rng(11)
        grid = np.linspace(4.8e9, 4.9e9, 500)
        values = 1.0 + 1e-3 / np.sqrt(2) * (rng.standard_normal(500)
                                            + 1j * rng.standard_normal(500))
        with pytest.raises(NoResonanceError):
            circle_init(ComplexTrace(grid, values))


class TestFitResonance:
    def test_noise_free_recovery_to_1e6(self):
        grid = resonance_grid(PAPER_LIKE.f0, PAPER_LIKE.Qi)
        norm = synth_trace(PAPER_LIKE, grid)
        result = fit_resonance(norm, circle_init(norm))
        assert result.converged
        assert _max_rel_err(result.params, PAPER_LIKE) < 1e-6

    def test_room_temperature_regime(self):
        truth = ResonanceParams(f0=4.88e9, Qi=1.0e3, Qc=2.0e3, phi=0.1)
        grid = resonance_grid(truth.f0, truth.Qi)
        norm = synth_trace(truth, grid)
        result = fit_resonance(norm, circle_init(norm))
        assert abs(result.params.Qi - truth.Qi) / truth.Qi < 0.01

    def test_cost_history_never_increases(self):
        grid = resonance_grid(PAPER_LIKE.f0, PAPER_LIKE.Qi)
        raw = synth_trace(PAPER_LIKE, grid, noise_sigma=0.01, seed=3)
        norm, _ = normalize_trace(raw)
        result = fit_resonance(norm, circle_init(norm))
        costs = result.cost_history
        assert len(costs) >= 2
        assert all(a >= b for a, b in zip(costs, costs[1:]))

    def test_covariance_is_symmetric_psd(self):
        grid = resonance_grid(PAPER_LIKE.f0, PAPER_LIKE.Qi)
        raw = synth_trace(PAPER_LIKE, grid, noise_sigma=0.01, seed=4)
        norm, _ = normalize_trace(raw)
        result = fit_resonance(norm, circle_init(norm))
        cov = result.covariance
        np.testing.assert_allclose(cov, cov.T, rtol=1e-9)
        assert np.min(np.linalg.eigvalsh(cov)) > -1e-20

    def test_max_iter_exhaustion_flags_not_converged(self):
        grid = resonance_grid(PAPER_LIKE.f0, PAPER_LIKE.Qi)
        norm = synth_trace(PAPER_LIKE, grid)
        rough = ResonanceParams(f0=PAPER_LIKE.f0 * (1 + 3e-5), Qi=2e4, Qc=3e4, phi=-0.4)
        result = fit_resonance(norm, rough, max_iter=1)
        assert not result.converged  # partial output, no exception

    def test_singular_normal_matrix_raises(self):
        grid = np.linspace(4.8e9, 4.9e9, 64)
        norm = ComplexTrace(grid, np.ones(64, complex))
        # Qc so large the model has no visible feature: all columns vanish
        flat = ResonanceParams(f0=4.85e9, Qi=1e4, Qc=1e30, phi=0.0)
        with pytest.raises(DegenerateFitError):
            fit_resonance(norm, flat)

    def test_uniform_weighting_mode_available(self):
        grid = resonance_grid(PAPER_LIKE.f0, PAPER_LIKE.Qi)
        norm = synth_trace(PAPER_LIKE, grid)
        result = fit_resonance(norm, circle_init(norm), weighting="uniform")
        assert _max_rel_err(result.params, PAPER_LIKE) < 1e-6
        with pytest.raises(ValidationError):
            fit_resonance(norm, circle_init(norm), weighting="fancy")


class TestPipeline:
    def test_round_trip_property(self):
        # Qi in [1e2, 1e6], Qi/Qc in [0.01, 100] restricted to Qc >= 10 so the
        # off-resonant wings exist inside the physical band (see ledger)
        rng = np.random.default_rng(20240105)
        for _ in range(25):
            qi = 10 ** rng.uniform(2, 6)
            ratio = 10 ** rng.uniform(-2, np.log10(min(100.0, qi / 10.0)))
            phi = rng.uniform(-1, 1)
            truth = ResonanceParams(f0=4.88e9, Qi=qi, Qc=qi / ratio, phi=phi)
            raw = synth_trace(truth, resonance_grid(truth.f0, truth.Qi))
            result, _ = fit_trace(raw)
            assert result.converged
            assert _max_rel_err(result.params, truth) < 1e-5

    def test_f0_invariant_under_scale_and_delay(self):
        truth = PAPER_LIKE
        span_grid = resonance_grid(truth.f0, truth.Qi)
        raw = synth_trace(truth, span_grid)
        base, _ = fit_trace(raw)
        sample_period = 1.0 / (span_grid[-1] - span_grid[0])
        scaled = ComplexTrace(
            raw.freqs,
            raw.values * (0.37 - 0.18j)
            * np.exp(-2j * np.pi * raw.freqs * 0.6 * sample_period))
        moved, _ = fit_trace(scaled)
        linewidth = truth.f0 / truth.Qi
        assert abs(moved.params.f0 - base.params.f0) < 1e-3 * linewidth

    def test_sigma_scales_inverse_sqrt_n(self):
        truth = ResonanceParams(f0=4.88e9, Qi=4.3e4, Qc=4.3e4, phi=0.0)
        span = 400.0 * truth.f0 / truth.Qi
        sigmas = {}
        for n in (256, 1024, 4096):
            vals = []
            for seed in range(3):
                grid = np.linspace(truth.f0 - span / 2, truth.f0 + span / 2, n)
                raw = synth_trace(truth, grid, noise_sigma=0.01, seed=100 + seed)
                result, _ = fit_trace(raw)
                vals.append(result.uncertainties["Qi"])
            sigmas[n] = np.mean(vals)
        assert sigmas[256] / sigmas[1024] == pytest.approx(2.0, rel=0.25)
        assert sigmas[1024] / sigmas[4096] == pytest.approx(2.0, rel=0.25)

    def test_monte_carlo_smoke_coverage(self):
        # 60-rep smoke version of the full 500-rep acceptance calibration
        truth = ResonanceParams(f0=4.88e9, Qi=4.3e4, Qc=4.3e4, phi=0.2)
        grid = resonance_grid(truth.f0, truth.Qi)
        tvals = np.array([truth.f0, truth.Qi, truth.Qc, truth.phi])
        hits = total = 0
        for seed in range(60):
            raw = synth_trace(truth, grid, noise_sigma=0.01, seed=seed)
            result, _ = fit_trace(raw)
            est = np.array([result.params.f0, result.params.Qi,
                            result.params.Qc, result.params.phi])
            sig = np.array([result.uncertainties[k] for k in ("f0", "Qi", "Qc", "phi")])
            hits += int(np.sum(np.abs(est - tvals) <= 3 * sig))
            total += 4
        assert hits / total >= 0.95


class TestFitReport:
    def _result(self, noise=0.0, seed=None):
        grid = resonance_grid(PAPER_LIKE.f0, PAPER_LIKE.Qi)
        raw = synth_trace(PAPER_LIKE, grid, noise_sigma=noise, seed=seed)
        return fit_trace(raw)[0]

    def test_report_round_trips_parameters(self):
        result = self._result()
        report = fit_report(result)
        assert report["params"]["f0"] == result.params.f0
        assert report["params"]["Qi"] == result.params.Qi
        assert report["converged"] is True

    def test_exact_data_has_negligible_residual(self):
        result = self._result()
        assert result.residual_rms < 1e-9

    def test_model_curve_matches_fitted_params(self):
        result = self._result()
        report = fit_report(result)
        freqs = np.array(report["model"]["freqs"])
        curve = np.array([complex(a, b) for a, b in report["model"]["s21_inverse"]])
        np.testing.assert_allclose(curve, s21_inverse_model(result.params, freqs),
                                   rtol=1e-12)

    def test_report_is_json_serializable(self):
        report = fit_report(self._result(noise=0.01, seed=8))
        text = json.dumps(report)
        assert "uncertainties" in json.loads(text)

    def test_converged_flag_propagates(self):
        grid = resonance_grid(PAPER_LIKE.f0, PAPER_LIKE.Qi)
        norm = synth_trace(PAPER_LIKE, grid)
        rough = ResonanceParams(f0=PAPER_LIKE.f0 * (1 + 3e-5), Qi=2e4, Qc=3e4, phi=-0.4)
        result = fit_resonance(norm, rough, max_iter=1)
        assert fit_report(result)["converged"] is False
