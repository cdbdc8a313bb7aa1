"""Forward-model tests: exact circuit, near-resonance approximation, and the
inverse-transmission line shape."""

import cmath
import math

import numpy as np
import pytest

from qbartools.bvd import (BvdParams, LineImpedance, ResonanceParams,
                           bvd_from_resonance, default_bvd_params,
                           default_resonance, impedance_approx,
                           impedance_exact, internal_q, parallel_resonance,
                           resonance_from_bvd, s21_inverse_model, s21_model,
                           series_resonance, z1_factor)
from qbartools.errors import DomainError, ValidationError

REF = BvdParams(R=1.0, L=1e-6, C=1e-12, C0=10e-12)


class TestImpedanceExact:
    def test_series_branch_real_at_series_resonance(self):
        # reactances cancel at fs = 1/(2 pi sqrt(LC)), leaving exactly R
        fs = series_resonance(REF)
        w = 2 * math.pi * fs
        z_series = REF.R + 1j * w * REF.L + 1.0 / (1j * w * REF.C)
        assert z_series.imag == pytest.approx(0.0, abs=1e-9)
        assert z_series.real == pytest.approx(REF.R, rel=1e-12)

    def test_frozen_direct_arithmetic_value(self):
        # independent parallel-combination arithmetic, evaluated beforehand:
        # 1 / (1/(R + iwL + 1/(iwC)) + 1/(1/(iwC0))) at 1 MHz
        z = impedance_exact(REF, 1e6)
        assert z == pytest.approx(0.008265056055973675 - 14468.579261204513j, rel=1e-12)

    def test_magnitude_peaks_at_parallel_resonance(self):
        # the loss-induced peak shift is O(f0/Qi^2) ~ 0.8 kHz here, so a 1.7 kHz
        # scan step still resolves the 159 kHz linewidth while the argmax lands
        # within one step of the lossless parallel-resonance frequency
        f0 = parallel_resonance(REF)
        grid = np.linspace(0.98 * f0, 1.02 * f0, 4001)
        mags = np.abs(impedance_exact(REF, grid))
        step = grid[1] - grid[0]
        assert abs(grid[np.argmax(mags)] - f0) <= step

    def test_rejects_nonpositive_frequency(self):
        with pytest.raises(DomainError):
            impedance_exact(REF, 0.0)
        with pytest.raises(DomainError):
            impedance_exact(REF, np.array([1e6, -1e6]))

    def test_array_and_scalar_agree(self):
        grid = np.array([1e6, 2e6, 3e6])
        zs = impedance_exact(REF, grid)
        for f, z in zip(grid, zs):
            assert impedance_exact(REF, float(f)) == z


class TestParallelResonance:
    def test_hand_evaluated_closed_form(self):
        # sqrt((11 pF) / (1 uH * 1 pF * 10 pF)) / 2 pi = sqrt(1.1e18) / 2 pi
        assert parallel_resonance(REF) == pytest.approx(166923112.54479676, rel=1e-12)

    def test_large_shunt_capacitance_approaches_series_value(self):
        huge_c0 = BvdParams(R=1.0, L=1e-6, C=1e-12, C0=1e-3)
        assert parallel_resonance(huge_c0) == pytest.approx(series_resonance(huge_c0),
                                                            rel=1e-9)

    def test_always_above_series_resonance(self):
        assert parallel_resonance(REF) > series_resonance(REF)

    def test_default_device_frequency(self):
        assert parallel_resonance(default_bvd_params()) == pytest.approx(4.88e9, rel=1e-9)


class TestInternalQ:
    def test_hand_evaluated_value(self):
        # sqrt(1 uH * 11 pF / (1 pF * 10 pF)) / 1 ohm = sqrt(1.1e6)
        assert internal_q(REF) == pytest.approx(1048.8088481701516, rel=1e-12)

    def test_doubling_resistance_halves_q(self):
        doubled = BvdParams(R=2 * REF.R, L=REF.L, C=REF.C, C0=REF.C0)
        assert internal_q(doubled) == pytest.approx(internal_q(REF) / 2, rel=1e-12)

    def test_default_device_value(self):
        assert internal_q(default_bvd_params()) == pytest.approx(4.3e4, rel=1e-9)


class TestZ1Factor:
    def test_frozen_value_and_independent_recompute(self):
        z1, qc = z1_factor(REF)
        assert z1.value == pytest.approx(-8.667841720414446 + 0.09090909090909093j,
                                         rel=1e-12)
        # independent recompute with scalar cmath arithmetic
        w0 = math.sqrt((REF.C + REF.C0) / (REF.L * REF.C * REF.C0))
        z1_oracle = (1 + 1j * w0 * REF.R * REF.C - w0 ** 2 * REF.L * REF.C) / (w0 * (REF.C + REF.C0))
        assert z1.value == pytest.approx(z1_oracle, rel=1e-12)
        assert qc == pytest.approx(abs(z1_oracle) / 100.0, rel=1e-12)

    def test_doubling_line_impedance_halves_qc(self):
        z1_a, qc_a = z1_factor(REF, LineImpedance(50.0))
        z1_b, qc_b = z1_factor(REF, LineImpedance(100.0))
        assert z1_b.value == z1_a.value
        assert qc_b == pytest.approx(qc_a / 2, rel=1e-12)

    def test_vanishing_resistance_gives_real_z1(self):
        lossless = BvdParams(R=1e-30, L=REF.L, C=REF.C, C0=REF.C0)
        z1, _ = z1_factor(lossless)
        assert abs(z1.value.imag) < 1e-25
        w0 = 2 * math.pi * parallel_resonance(lossless)
        expected = (1 - w0 ** 2 * lossless.L * lossless.C) / (w0 * (lossless.C + lossless.C0))
        assert z1.value.real == pytest.approx(expected, rel=1e-12)


class TestImpedanceApprox:
    def test_on_resonance_value(self):
        rp = resonance_from_bvd(REF)
        z1, _ = z1_factor(REF)
        z = impedance_approx(rp, z1.magnitude, rp.f0)
        assert z == pytest.approx(rp.Qi * z1.magnitude * cmath.exp(1j * rp.phi), rel=1e-12)

    def test_half_bandwidth_magnitude(self):
        rp = resonance_from_bvd(REF)
        z1, _ = z1_factor(REF)
        f_half = rp.f0 * (1 + 1.0 / (2 * rp.Qi))
        peak = rp.Qi * z1.magnitude
        assert abs(impedance_approx(rp, z1.magnitude, f_half)) == pytest.approx(
            peak / math.sqrt(2), rel=1e-9)

    def test_agreement_with_exact_improves_towards_resonance(self):
        p = default_bvd_params()
        rp = resonance_from_bvd(p)
        z1, _ = z1_factor(p)
        rel_errs = []
        for detuning in (1e-2, 1e-3, 1e-4, 1e-5):
            f = rp.f0 * (1 + detuning)
            exact = impedance_exact(p, f)
            approx = impedance_approx(rp, z1.magnitude, f)
            rel_errs.append(abs(approx - exact) / abs(exact))
        assert all(a > b for a, b in zip(rel_errs, rel_errs[1:]))


def _circumcircle(a: complex, b: complex, c: complex):
    """Exact circle through three points (independent geometric oracle)."""
    ax, ay, bx, by, cx, cy = a.real, a.imag, b.real, b.imag, c.real, c.imag
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    ux = ((ax ** 2 + ay ** 2) * (by - cy) + (bx ** 2 + by ** 2) * (cy - ay)
          + (cx ** 2 + cy ** 2) * (ay - by)) / d
    uy = ((ax ** 2 + ay ** 2) * (cx - bx) + (bx ** 2 + by ** 2) * (ax - cx)
          + (cx ** 2 + cy ** 2) * (bx - ax)) / d
    center = complex(ux, uy)
    return center, abs(a - center)


class TestInverseTransmission:
    def test_on_resonance_depth(self):
        rp = ResonanceParams(f0=4.88e9, Qi=9e4, Qc=1e4, phi=0.0)  # Qi/Qc = 9
        w = s21_inverse_model(rp, rp.f0)
        assert w == pytest.approx(10.0 + 0j, rel=1e-12)
        assert abs(s21_model(rp, rp.f0)) == pytest.approx(0.1, rel=1e-12)

    def test_far_detuning_bound(self):
        rp = ResonanceParams(f0=4.88e9, Qi=4.3e4, Qc=1e4, phi=0.3)
        for sign in (-1, 1):
            f = rp.f0 * (1 + sign * 100.0 / rp.Qi)  # 100 linewidths out
            w = s21_inverse_model(rp, f)
            assert abs(w - 1.0) < rp.Qi / (rp.Qc * 200.0)

    def test_locus_is_rotated_circle_about_one(self):
        rp = ResonanceParams(f0=4.88e9, Qi=4.3e4, Qc=8.6e3, phi=0.4)
        grid = rp.f0 * (1 + np.linspace(-30, 30, 3001) / rp.Qi)
        w = s21_inverse_model(rp, grid)
        center, radius = _circumcircle(w[0], w[1500], w[-1])
        assert np.max(np.abs(np.abs(w - center) - radius)) < 1e-9 * radius
        diameter = 2 * radius
        assert diameter == pytest.approx(rp.Qi / rp.Qc, rel=1e-3)
        assert cmath.phase(center - 1.0) == pytest.approx(rp.phi, abs=1e-3)

    def test_reciprocal_locus(self):
        rp = ResonanceParams(f0=4.88e9, Qi=4.3e4, Qc=8.6e3, phi=0.4)
        grid = rp.f0 * (1 + np.linspace(-30, 30, 301) / rp.Qi)
        s = s21_model(rp, grid)
        # reciprocals of circle points lie on a circle as well
        center, radius = _circumcircle(s[0], s[150], s[-1])
        assert np.max(np.abs(np.abs(s - center) - radius)) < 1e-9 * radius

    def test_product_of_model_and_inverse_is_one(self):
        rp = default_resonance(phi=0.25)
        grid = rp.f0 * (1 + np.linspace(-50, 50, 1001) / rp.Qi)
        prod = s21_model(rp, grid) * s21_inverse_model(rp, grid)
        np.testing.assert_allclose(prod, 1.0, rtol=0, atol=1e-15)

    def test_symmetric_line_shape_is_conjugate_at_zero_phi(self):
        rp = default_resonance(phi=0.0)
        for k in (0.3, 1.0, 5.0, 20.0):
            upper = s21_inverse_model(rp, rp.f0 * (1 + k / rp.Qi))
            lower = s21_inverse_model(rp, rp.f0 * (1 - k / rp.Qi))
            assert upper == pytest.approx(np.conj(lower), rel=1e-9)

    def test_depth_depends_only_on_q_ratio(self):
        base = ResonanceParams(f0=4.88e9, Qi=4.3e4, Qc=1e4, phi=0.0)
        scaled = ResonanceParams(f0=4.88e9, Qi=3 * 4.3e4, Qc=3e4, phi=0.0)
        assert abs(s21_model(base, base.f0)) == pytest.approx(
            abs(s21_model(scaled, scaled.f0)), rel=1e-12)


class TestEq1VsExactInvariant:
    def test_hundred_random_parameter_sets(self):
        rng = np.random.default_rng(20230817)
        for _ in range(100):
            c0 = 10 ** rng.uniform(-17, -11)
            ratio = 10 ** rng.uniform(-3, -0.7)
            c = ratio * c0
            f0 = 10 ** rng.uniform(8.5, 10)
            w0 = 2 * np.pi * f0
            ell = (c + c0) / (w0 ** 2 * c * c0)
            qi = 10 ** rng.uniform(2, 5)
            r = w0 * ell / qi
            p = BvdParams(R=r, L=ell, C=c, C0=c0)
            rp = resonance_from_bvd(p)
            z1, _ = z1_factor(p)
            approx = impedance_approx(rp, z1.magnitude, rp.f0)
            exact = impedance_exact(p, rp.f0)
            assert abs(approx - exact) / abs(exact) < 0.5 / rp.Qi


class TestConversions:
    def test_bvd_from_resonance_round_trip(self):
        target = ResonanceParams(f0=4.88e9, Qi=4.3e4, Qc=1e4, phi=0.0)
        p = bvd_from_resonance(target, c0=1e-17)
        back = resonance_from_bvd(p)
        assert back.f0 == pytest.approx(target.f0, rel=1e-10)
        assert back.Qi == pytest.approx(target.Qi, rel=1e-10)
        assert back.Qc == pytest.approx(target.Qc, rel=1e-10)
        assert abs(back.phi) < 1e-4  # circuit-implied asymmetry is small

    def test_infeasible_shunt_capacitance_raises(self):
        target = ResonanceParams(f0=4.88e9, Qi=4.3e4, Qc=1e4, phi=0.0)
        with pytest.raises(DomainError):
            bvd_from_resonance(target, c0=1e-9)   # beta >> 1
        with pytest.raises(DomainError):
            bvd_from_resonance(target, c0=1e-25)  # beta < 1/Qi


class TestValidation:
    @pytest.mark.parametrize("field", ["R", "L", "C", "C0"])
    def test_bvd_params_must_be_positive(self, field):
        kwargs = dict(R=1.0, L=1e-6, C=1e-12, C0=1e-11)
        kwargs[field] = 0.0
        with pytest.raises(ValidationError):
            BvdParams(**kwargs)

    def test_resonance_params_positive(self):
        with pytest.raises(ValidationError):
            ResonanceParams(f0=-1.0, Qi=1e3, Qc=1e3, phi=0.0)
        with pytest.raises(ValidationError):
            ResonanceParams(f0=1e9, Qi=0.0, Qc=1e3, phi=0.0)

    def test_phi_wraps_into_half_open_interval(self):
        rp = ResonanceParams(f0=1e9, Qi=1e3, Qc=1e3, phi=4.0)
        assert -math.pi < rp.phi <= math.pi
        assert rp.phi == pytest.approx(4.0 - 2 * math.pi, rel=1e-12)
        assert ResonanceParams(f0=1e9, Qi=1e3, Qc=1e3, phi=-math.pi).phi == pytest.approx(math.pi)

    def test_line_impedance_positive(self):
        with pytest.raises(ValidationError):
            LineImpedance(0.0)
