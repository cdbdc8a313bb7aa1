"""Inverse problem: recover line-shape parameters from a measured trace.

Pipeline: edge-window baseline normalization, algebraic circle-fit
initialization in the inverse-transmission plane, then damped complex least
squares against the inverse-transmission model.  The fit minimizes uniform-
weighted residuals of 1/S21; reported uncertainties come from the residual-
variance-scaled inverse normal matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bvd import TWO_PI, ResonanceParams, s21_inverse_model, s21_model, wrap_phase
from .errors import (DataError, DegenerateFitError, NoResonanceError,
                     NormalizationError, ValidationError)
from .leastsq import covariance_from_fit, solve_lm

PARAM_NAMES = ("f0", "Qi", "Qc", "phi")
MIN_FIT_POINTS = 16


@dataclass
class ComplexTrace:
    """Frequency-indexed complex transmission samples."""

    freqs: np.ndarray           # Hz, strictly increasing
    values: np.ndarray          # complex S21
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.freqs = np.asarray(self.freqs, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.freqs.ndim != 1 or self.values.ndim != 1:
            raise ValidationError("trace arrays must be one-dimensional")
        if self.freqs.size != self.values.size:
            raise ValidationError("freqs and values must have equal length")
        if self.freqs.size < 1:
            raise ValidationError("trace must contain at least one sample")
        if not np.all(np.isfinite(self.freqs)) or not np.all(np.isfinite(self.values)):
            raise ValidationError("trace contains non-finite samples")
        if np.any(np.diff(self.freqs) <= 0):
            raise ValidationError("frequencies must be strictly increasing")

    def __len__(self):
        return self.freqs.size


@dataclass(frozen=True)
class BaselineModel:
    """Slowly-varying instrument response divided out before fitting.

    Evaluated about a reference frequency (the window center, by default the
    origin) to keep the offsets well-conditioned at GHz carriers:

        (amplitude_offset + amplitude_slope (f - f_ref))
            * exp(i (phase_offset - 2 pi group_delay (f - f_ref)))
    """

    amplitude_offset: float = 1.0   # dimensionless, at the reference frequency
    amplitude_slope: float = 0.0    # per Hz
    phase_offset: float = 0.0       # rad, at the reference frequency
    group_delay: float = 0.0        # s
    reference_freq: float = 0.0     # Hz

    def __post_init__(self):
        for name in ("amplitude_offset", "amplitude_slope", "phase_offset",
                     "group_delay", "reference_freq"):
            if not np.isfinite(getattr(self, name)):
                raise ValidationError("BaselineModel.%s must be finite" % name)
        if self.amplitude_offset <= 0:
            raise ValidationError("BaselineModel.amplitude_offset must be > 0")

    def __call__(self, f):
        df = np.asarray(f, dtype=float) - self.reference_freq
        amp = self.amplitude_offset + self.amplitude_slope * df
        ph = self.phase_offset - TWO_PI * self.group_delay * df
        return amp * np.exp(1j * ph)


@dataclass
class FitResult:
    params: ResonanceParams
    uncertainties: dict             # one-sigma per parameter, keys as PARAM_NAMES
    residual_rms: float             # rms complex residual in the inverse plane
    iterations: int
    converged: bool
    covariance: np.ndarray          # 4x4, parameter order (f0, Qi, Qc, phi)
    cost_history: list = field(default_factory=list)
    freqs: np.ndarray | None = None  # grid the fit ran on, kept for reporting


def _require_fit_length(trace: ComplexTrace):
    if len(trace) < MIN_FIT_POINTS:
        raise DataError("need at least %d samples to fit, got %d"
                        % (MIN_FIT_POINTS, len(trace)))


def normalize_trace(raw: ComplexTrace, edge_fraction: float = 0.2
                    ) -> tuple[ComplexTrace, BaselineModel]:
    """Divide out a complex baseline fitted to the off-resonant window edges.

    Amplitude is fitted linearly in f, phase as offset plus a linear delay
    term, both on the outer edge_fraction of samples at each end.  The
    returned trace tends to 1 at the window edges within the residual noise.
    Assumes the window shows visible off-resonant wings and the resonance is
    densely sampled (the phase is unwrapped across the full trace).
    """
    if not (0.0 < edge_fraction <= 0.4):
        raise ValidationError("edge_fraction must lie in (0, 0.4]")
    _require_fit_length(raw)
    n = len(raw)
    k = int(round(edge_fraction * n))
    if k < 8:
        raise NormalizationError(
            "edge window too narrow: %d samples per side (need >= 8)" % k)
    mag = np.abs(raw.values)
    if np.any(mag == 0):
        raise DataError("trace contains zero-magnitude samples")

    edges = np.r_[0:k, n - k:n]
    f_edge = raw.freqs[edges]
    f_mid = 0.5 * (raw.freqs[0] + raw.freqs[-1])
    design = np.column_stack([np.ones(edges.size), f_edge - f_mid])

    amp_c, amp_slope = np.linalg.lstsq(design, mag[edges], rcond=None)[0]
    phase = np.unwrap(np.angle(raw.values))
    ph_c, ph_slope = np.linalg.lstsq(design, phase[edges], rcond=None)[0]

    if amp_c <= 0:
        raise NormalizationError("edge amplitude fit is not positive")
    baseline = BaselineModel(
        amplitude_offset=float(amp_c),
        amplitude_slope=float(amp_slope),
        phase_offset=float(wrap_phase(ph_c)),
        group_delay=float(-ph_slope / TWO_PI),
        reference_freq=float(f_mid),
    )
    normalized = raw.values / baseline(raw.freqs)
    meta = dict(raw.metadata)
    meta["normalized"] = True
    meta["edge_fraction"] = edge_fraction
    return ComplexTrace(raw.freqs.copy(), normalized, meta), baseline


def _fit_circle_taubin(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Algebraic (Taubin) circle fit; returns center (xc, yc) and radius."""
    xm, ym = x.mean(), y.mean()
    u, v = x - xm, y - ym
    z = u * u + v * v
    mxx, myy, mxy = (u * u).mean(), (v * v).mean(), (u * v).mean()
    mxz, myz, mzz = (u * z).mean(), (v * z).mean(), (z * z).mean()
    mz = mxx + myy
    cov_xy = mxx * myy - mxy * mxy
    a3 = 4.0 * mz
    a2 = -3.0 * mz * mz - mzz
    a1 = mzz * mz + 4.0 * cov_xy * mz - mxz * mxz - myz * myz - mz ** 3
    a0 = (mxz * mxz * myy + myz * myz * mxx - mzz * cov_xy
          - 2.0 * mxz * myz * mxy + mz * mz * cov_xy)

    # Newton iteration from 0 for the smallest root of the characteristic poly
    t, ft = 0.0, a0
    for _ in range(30):
        df = a1 + t * (2.0 * a2 + 3.0 * a3 * t)
        if df == 0:
            break
        t_new = t - ft / df
        if not np.isfinite(t_new) or t_new == t:
            break
        ft_new = a0 + t_new * (a1 + t_new * (a2 + t_new * a3))
        if abs(ft_new) >= abs(ft):
            break
        t, ft = t_new, ft_new

    det = t * t - t * mz + cov_xy
    if det == 0:
        raise NoResonanceError("degenerate circle fit (collinear data)")
    xc = (mxz * (myy - t) - myz * mxy) / det / 2.0
    yc = (myz * (mxx - t) - mxz * mxy) / det / 2.0
    radius = float(np.sqrt(xc * xc + yc * yc + mz))
    return float(xc + xm), float(yc + ym), radius


def _noise_sigma(w: np.ndarray) -> float:
    """Per-sample complex noise scale from successive differences.

    For white complex Gaussian noise |dw|^2 is exponential with mean
    4 sigma^2; the median is robust against the resonance excursion.
    """
    dw = np.abs(np.diff(w)) ** 2
    return float(np.sqrt(np.median(dw) / (4.0 * np.log(2.0))))


def _fwhm(freqs: np.ndarray, y: np.ndarray, i_peak: int) -> float:
    """Full width of y at half its peak value, by linear interpolation."""
    half = 0.5 * y[i_peak]

    def cross(side):
        if side < 0:
            idx = np.where(y[:i_peak] <= half)[0]
            if idx.size == 0:
                return None
            i = idx[-1]
            j = i + 1
        else:
            idx = np.where(y[i_peak + 1:] <= half)[0]
            if idx.size == 0:
                return None
            j = i_peak + 1 + idx[0]
            i = j - 1
        frac = (half - y[i]) / (y[j] - y[i])
        return freqs[i] + frac * (freqs[j] - freqs[i])

    lo, hi = cross(-1), cross(+1)
    f_peak = freqs[i_peak]
    if lo is None and hi is None:
        raise NoResonanceError("resonance width exceeds the scan window")
    if lo is None:
        lo = 2.0 * f_peak - hi
    if hi is None:
        hi = 2.0 * f_peak - lo
    return float(hi - lo)


def circle_init(norm: ComplexTrace) -> ResonanceParams:
    """Initial (f0, Qi, Qc, phi) from the circular locus of 1/S21.

    The inverse trace is a circle through the off-resonant point 1; its
    diameter is Qi/Qc and its rotation about 1 is phi.  f0 starts at the
    sample farthest from 1, and Qi comes from the full width at half maximum
    of |1/S21 - 1|^2, which is f0/Qi independent of phi.
    """
    _require_fit_length(norm)
    if np.any(np.abs(norm.values) == 0):
        raise DataError("trace contains zero-magnitude samples")
    w = 1.0 / norm.values

    xc, yc, radius = _fit_circle_taubin(w.real, w.imag)
    sigma = _noise_sigma(w)
    if 2.0 * radius < 5.0 * sigma:
        raise NoResonanceError(
            "no resonance: inverse-plane circle diameter %.3g below 5x noise %.3g"
            % (2.0 * radius, sigma))

    dist = np.abs(w - 1.0)
    i_peak = int(np.argmax(dist))
    f0 = float(norm.freqs[i_peak])

    width = _fwhm(norm.freqs, dist ** 2, i_peak)
    if width <= 0:
        raise NoResonanceError("could not resolve the resonance width")
    qi = f0 / width

    diameter = 2.0 * radius
    phi = wrap_phase(float(np.angle(complex(xc, yc) - 1.0)))
    return ResonanceParams(f0=f0, Qi=qi, Qc=qi / diameter, phi=phi)


def _model_and_jacobian(x: np.ndarray, f: np.ndarray):
    """Inverse-transmission model and its analytic parameter derivatives."""
    f0, qi, qc, phi = x
    d = (f - f0) / f0
    den = 1.0 + 2j * qi * d
    e = np.exp(1j * phi)
    m = 1.0 + e * (qi / qc) / den
    dm_df0 = e * (qi / qc) * (2j * qi * f / f0 ** 2) / den ** 2
    dm_dqi = e / (qc * den ** 2)
    dm_dqc = -e * qi / (qc ** 2 * den)
    dm_dphi = 1j * e * (qi / qc) / den
    return m, np.column_stack([dm_df0, dm_dqi, dm_dqc, dm_dphi])


def fit_resonance(norm: ComplexTrace, init: ResonanceParams,
                  tol: float = 1e-10, max_iter: int = 200,
                  weighting: str = "inverse-variance") -> FitResult:
    """Refine line-shape parameters by damped least squares on 1/S21.

    Residuals are the real and imaginary parts of the model-minus-data
    inverse transmission.  With the default "inverse-variance" weighting each
    point is scaled by |S21|^2: additive noise on the measured transmission
    maps to noise on its reciprocal amplified by 1/|S21|^2, so this whitens
    the residuals and makes the reported uncertainties track the true scatter
    even for deep dips.  "uniform" weighting is available for comparison but
    its uncertainties are underestimated near deep resonances.  Hitting
    max_iter returns a result flagged converged=False rather than raising.
    """
    _require_fit_length(norm)
    if tol <= 0:
        raise ValidationError("tol must be > 0")
    if weighting not in ("inverse-variance", "uniform"):
        raise ValidationError("weighting must be 'inverse-variance' or 'uniform'")
    if np.any(np.abs(norm.values) == 0):
        raise DataError("trace contains zero-magnitude samples")
    w = 1.0 / norm.values
    f = norm.freqs
    if weighting == "inverse-variance":
        weights = np.abs(norm.values) ** 2
    else:
        weights = np.ones(f.size)
    w_split = np.concatenate([w.real, w.imag])
    wt_split = np.concatenate([weights, weights])

    def residual(x):
        m, _ = _model_and_jacobian(x, f)
        return wt_split * (np.concatenate([m.real, m.imag]) - w_split)

    def jacobian(x):
        _, jc = _model_and_jacobian(x, f)
        return wt_split[:, None] * np.vstack([jc.real, jc.imag])

    def physical(x):
        f0, qi, qc, _ = x
        return f0 > 0 and qi > 0 and qc > 0

    x0 = np.array([init.f0, init.Qi, init.Qc, init.phi], dtype=float)
    res = solve_lm(residual, jacobian, x0, tol=tol, max_iter=max_iter,
                   accept_fn=physical)

    cov = covariance_from_fit(res.jacobian, res.cost, n_params=4)
    sigmas = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    params = ResonanceParams(f0=res.x[0], Qi=res.x[1], Qc=res.x[2],
                             phi=wrap_phase(res.x[3]))
    return FitResult(
        params=params,
        uncertainties=dict(zip(PARAM_NAMES, sigmas.tolist())),
        residual_rms=float(np.sqrt(res.cost / len(norm))),
        iterations=res.n_iter,
        converged=res.converged,
        covariance=cov,
        cost_history=res.cost_history,
        freqs=f.copy(),
    )


def fit_trace(raw: ComplexTrace, edge_fraction: float = 0.2,
              tol: float = 1e-10, max_iter: int = 200, refine: int = 14
              ) -> tuple[FitResult, BaselineModel]:
    """Full pipeline: normalize, initialize, fit, and re-fit the baseline.

    A single edge-window normalization absorbs part of the resonance tails
    into the baseline, which biases deep-dip fits.  Each refinement pass
    divides the raw trace by the current model curve, re-fits the baseline on
    the (now featureless) edges, renormalizes, and refits; the residual
    baseline error shrinks with the model error each pass.  Passes stop early
    once the parameters move by less than 100 * tol relative.
    """
    norm, baseline = normalize_trace(raw, edge_fraction)
    init = circle_init(norm)
    result = fit_resonance(norm, init, tol=tol, max_iter=max_iter)
    for _ in range(max(refine, 0)):
        model = s21_model(result.params, raw.freqs)
        flattened = ComplexTrace(raw.freqs, raw.values / model, dict(raw.metadata))
        _, baseline = normalize_trace(flattened, edge_fraction)
        renorm = ComplexTrace(raw.freqs, raw.values / baseline(raw.freqs),
                              dict(norm.metadata))
        previous = result.params
        result = fit_resonance(renorm, previous, tol=tol, max_iter=max_iter)
        p = result.params
        move = max(abs(p.f0 - previous.f0) / previous.f0,
                   abs(p.Qi - previous.Qi) / previous.Qi,
                   abs(p.Qc - previous.Qc) / previous.Qc,
                   abs(p.phi - previous.phi) / max(abs(previous.phi), 1.0))
        if move < 100.0 * tol:
            break
    return result, baseline


def fit_report(result: FitResult) -> dict:
    """JSON-serializable record of a fit, including the model curve
    resampled on the input grid (complex values as [re, im] pairs)."""
    p = result.params
    report = {
        "params": {"f0": p.f0, "Qi": p.Qi, "Qc": p.Qc, "phi": p.phi},
        "uncertainties": dict(result.uncertainties),
        "residual_rms": result.residual_rms,
        "iterations": result.iterations,
        "converged": bool(result.converged),
        "covariance": np.asarray(result.covariance).tolist(),
        "parameter_order": list(PARAM_NAMES),
    }
    if result.freqs is not None:
        s21 = s21_model(p, result.freqs)
        s21_inv = s21_inverse_model(p, result.freqs)
        report["model"] = {
            "freqs": result.freqs.tolist(),
            "s21": [[v.real, v.imag] for v in s21],
            "s21_inverse": [[v.real, v.imag] for v in s21_inv],
        }
    return report
