"""Butterworth-van Dyke forward models for a piezoelectric resonance.

The circuit is a series R-L-C motional branch shunted by a static
capacitance C0.  Near the parallel (anti-)resonance

    f0 = sqrt((C + C0) / (L C C0)) / 2 pi

the impedance reduces to a Lorentzian

    Zr(f) ~= Qi |Z1| e^{i phi} / (1 + 2 i Qi (f - f0) / f0),

with Z1 = (1 + i 2 pi f0 R C - 4 pi^2 f0^2 L C) / (2 pi f0 (C + C0)) and
Qi = sqrt(L (C + C0) / (C C0)) / R.  Inserted as a series element in a
matched line of impedance Z0 this gives the normalized inverse
transmission

    1 / S21(f) = 1 + e^{i phi} (Qi / Qc) / (1 + 2 i Qi (f - f0) / f0),

with Qc = |Z1| / (2 Z0).  All frequencies are in Hz, impedances in ohm.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError

TWO_PI = 2.0 * np.pi


def wrap_phase(phi: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    w = (phi + np.pi) % TWO_PI - np.pi
    if w == -np.pi:
        w = np.pi
    return float(w)


@dataclass(frozen=True)
class BvdParams:
    """Lumped-element values of one mechanical resonance (synthetic use only;
    measured traces determine (f0, Qi, Qc, phi) directly)."""

    R: float   # motional resistance, ohm
    L: float   # motional inductance, henry
    C: float   # motional capacitance, farad
    C0: float  # shunt (electrode) capacitance, farad

    def __post_init__(self):
        for name in ("R", "L", "C", "C0"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValidationError("BvdParams.%s must be finite and > 0, got %r" % (name, v))


@dataclass(frozen=True)
class ResonanceParams:
    """Phenomenological line-shape parameters of the inverse-transmission model."""

    f0: float   # parallel resonant frequency, Hz
    Qi: float   # internal quality factor
    Qc: float   # coupling quality factor
    phi: float  # asymmetry phase, rad, stored in (-pi, pi]

    def __post_init__(self):
        for name in ("f0", "Qi", "Qc"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValidationError("ResonanceParams.%s must be finite and > 0, got %r" % (name, v))
        if not np.isfinite(self.phi):
            raise ValidationError("ResonanceParams.phi must be finite")
        object.__setattr__(self, "phi", wrap_phase(self.phi))

    def replace(self, **kwargs) -> "ResonanceParams":
        return dataclasses.replace(self, **kwargs)


@dataclass(frozen=True)
class LineImpedance:
    """Reference impedance of the feed line."""

    Z0: float = 50.0  # ohm

    def __post_init__(self):
        if not (np.isfinite(self.Z0) and self.Z0 > 0):
            raise ValidationError("LineImpedance.Z0 must be finite and > 0")


@dataclass(frozen=True)
class Z1Factor:
    """Complex impedance-like prefactor of the near-resonance expansion."""

    value: complex  # ohm

    def __post_init__(self):
        if not (np.isfinite(self.value.real) and np.isfinite(self.value.imag)):
            raise ValidationError("Z1Factor.value must be finite")
        if abs(self.value) == 0:
            raise ValidationError("Z1Factor.value must be nonzero")

    @property
    def magnitude(self) -> float:
        return abs(self.value)


# Default line-shape values used for synthetic traces: measured resonance at
# 4.88 GHz with cryogenic internal Q; the coupling Q is a representative
# fit-scale value, not a measured one.
DEFAULT_F0 = 4.88e9
DEFAULT_QI_CRYO = 4.3e4
DEFAULT_QI_ROOM = 1.0e3
DEFAULT_QC = 1.0e4
MODE_FREQUENCIES = (1.69e9, 4.88e9, 8.50e9)  # observed mechanical modes, Hz


def default_resonance(qi: float = DEFAULT_QI_CRYO, qc: float = DEFAULT_QC,
                      phi: float = 0.0) -> ResonanceParams:
    return ResonanceParams(f0=DEFAULT_F0, Qi=qi, Qc=qc, phi=phi)


def _check_freqs(f):
    f = np.asarray(f, dtype=float)
    if f.size == 0 or np.any(f <= 0) or not np.all(np.isfinite(f)):
        raise DomainError("frequencies must be finite and > 0")
    return f


def series_resonance(p: BvdParams) -> float:
    """Series resonance 1 / (2 pi sqrt(L C)), where the motional branch is purely real."""
    return 1.0 / (TWO_PI * np.sqrt(p.L * p.C))


def parallel_resonance(p: BvdParams) -> float:
    """Parallel (anti-)resonance sqrt((C + C0) / (L C C0)) / 2 pi; always above the series value."""
    return float(np.sqrt((p.C + p.C0) / (p.L * p.C * p.C0)) / TWO_PI)


def internal_q(p: BvdParams) -> float:
    """Internal quality factor sqrt(L (C + C0) / (C C0)) / R; scales as 1/R."""
    return float(np.sqrt(p.L * (p.C + p.C0) / (p.C * p.C0)) / p.R)


def z1_factor(p: BvdParams, line: LineImpedance = LineImpedance()) -> tuple[Z1Factor, float]:
    """Near-resonance prefactor Z1 and the coupling quality factor Qc = |Z1| / (2 Z0).

    Z1 = (1 + i 2 pi f0 R C - 4 pi^2 f0^2 L C) / (2 pi f0 (C + C0)), evaluated
    verbatim; Qc is taken as defined from its magnitude.
    """
    w0 = TWO_PI * parallel_resonance(p)
    z1 = (1.0 + 1j * w0 * p.R * p.C - w0 ** 2 * p.L * p.C) / (w0 * (p.C + p.C0))
    qc = abs(z1) / (2.0 * line.Z0)
    return Z1Factor(complex(z1)), float(qc)


def impedance_exact(p: BvdParams, f):
    """Full circuit impedance: (R + i w L + 1/(i w C)) in parallel with 1/(i w C0).

    Accepts a scalar or array of frequencies in Hz; raises DomainError for f <= 0.
    """
    farr = _check_freqs(f)
    w = TWO_PI * farr
    z_series = p.R + 1j * w * p.L + 1.0 / (1j * w * p.C)
    z = 1.0 / (1.0 / z_series + 1j * w * p.C0)
    return complex(z) if np.isscalar(f) else z


def impedance_approx(rp: ResonanceParams, z1_mag: float, f):
    """Lorentzian near-resonance impedance Qi |Z1| e^{i phi} / (1 + 2 i Qi (f - f0)/f0)."""
    farr = _check_freqs(f)
    # detuning formed before the Qi product: Qi (f - f0)/f0 is O(1) near resonance
    d = (farr - rp.f0) / rp.f0
    z = rp.Qi * z1_mag * np.exp(1j * rp.phi) / (1.0 + 2j * rp.Qi * d)
    return complex(z) if np.isscalar(f) else z


def s21_inverse_model(rp: ResonanceParams, f):
    """Normalized inverse transmission 1 + e^{i phi} (Qi/Qc) / (1 + 2 i Qi (f - f0)/f0).

    Tends to 1 far from resonance; its locus over frequency is a circle of
    diameter Qi/Qc rotated by phi about the point 1.
    """
    farr = _check_freqs(f)
    d = (farr - rp.f0) / rp.f0
    w = 1.0 + np.exp(1j * rp.phi) * (rp.Qi / rp.Qc) / (1.0 + 2j * rp.Qi * d)
    return complex(w) if np.isscalar(f) else w


def s21_model(rp: ResonanceParams, f):
    """Normalized transmission; elementwise reciprocal of the inverse model."""
    w = s21_inverse_model(rp, f)
    return 1.0 / w


def s21_from_bvd(p: BvdParams, f, line: LineImpedance = LineImpedance()):
    """Raw transmission of the full circuit as a series element in a matched line:
    S21 = 2 Z0 / (2 Z0 + Z(f)).  Includes the shunt-capacitor background, so the
    off-resonant level is generally not 1 (normalization removes it)."""
    z = impedance_exact(p, f)
    return 2.0 * line.Z0 / (2.0 * line.Z0 + z)


def resonance_from_bvd(p: BvdParams, line: LineImpedance = LineImpedance()) -> ResonanceParams:
    """Phenomenological (f0, Qi, Qc, phi) equivalent to a circuit parameter set.

    The asymmetry phase is arg(-Z1): the near-resonance expansion of the exact
    impedance is -Qi Z1 / (1 + 2 i Qi (f - f0)/f0).
    """
    z1, qc = z1_factor(p, line)
    phi = wrap_phase(float(np.angle(-z1.value)))
    return ResonanceParams(f0=parallel_resonance(p), Qi=internal_q(p), Qc=qc, phi=phi)


def bvd_from_resonance(rp: ResonanceParams, c0: float = 1e-17,
                       line: LineImpedance = LineImpedance()) -> BvdParams:
    """Circuit values reproducing (f0, Qi, Qc) for a chosen shunt capacitance.

    Solves, with x = C/C0 and beta = 2 Z0 Qc w0 C0,

        x / (1 + x) = sqrt(beta^2 - 1/Qi^2),

    then L and R follow from the resonance and Qi = w0 L / R.  The asymmetry
    phase of the resulting circuit is the small value implied by Z1; rp.phi is
    not representable by the circuit alone and is ignored.  Feasible only for
    1/Qi < beta < sqrt(1 + 1/Qi^2); pick a smaller c0 for larger Qc.
    """
    if not (np.isfinite(c0) and c0 > 0):
        raise DomainError("c0 must be finite and > 0")
    w0 = TWO_PI * rp.f0
    beta = 2.0 * line.Z0 * rp.Qc * w0 * c0
    disc = beta ** 2 - 1.0 / rp.Qi ** 2
    if disc <= 0:
        raise DomainError("no circuit solution: beta <= 1/Qi (increase c0)")
    s = np.sqrt(disc)
    if s >= 1.0:
        raise DomainError("no circuit solution: beta too large (decrease c0)")
    x = s / (1.0 - s)
    c = x * c0
    ell = (c + c0) / (w0 ** 2 * c * c0)
    r = w0 * ell / rp.Qi
    return BvdParams(R=float(r), L=float(ell), C=float(c), C0=float(c0))


def default_bvd_params() -> BvdParams:
    """Synthetic circuit realizing the default (f0, Qi, Qc)."""
    return bvd_from_resonance(default_resonance())
