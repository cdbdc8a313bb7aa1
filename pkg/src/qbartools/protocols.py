"""Pulse-sequence presets: spectroscopy map, phonon-T1 swap, Rabi chevron.

Sequences are lists of segments executed on the master-equation engine.
Coupler-off segments evolve with both couplings at zero; the qubit
excitation pulse is an ideal instantaneous flip by default, with a
finite-duration resonant drive available as a segment.  Drive segments run
in the frame of their own tone; relative frame phases between segments are
not tracked, which is exact for the population-based protocols here (no
multi-pulse interference sequences are modeled).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceError, ValidationError
from .leastsq import covariance_from_fit, solve_lm
from .quantum import (DT_DEFAULT, DriveParams, HilbertConfig, Propagator,
                      SystemParams, TWO_PI, build_hamiltonian,
                      collapse_operators, ensure_physical, excited_projector,
                      ground_state, measure_pe, qubit_drive_term,
                      qubit_sigma_x)

MAX_SCAN_POINTS = 20000


# ---------------------------------------------------------------------------
# protocol segments


@dataclass(frozen=True)
class PiPulse:
    """Ideal instantaneous qubit flip (couplings irrelevant)."""


@dataclass(frozen=True)
class Drive:
    """Finite-duration resonant tone on the qubit, couplings off."""

    params: DriveParams


@dataclass(frozen=True)
class CouplerOn:
    """Qubit-mode interaction window with the given half-splittings."""

    g: float
    g_spur: float
    duration: float

    def __post_init__(self):
        if self.g < 0 or self.g_spur < 0:
            raise ValidationError("couplings must be >= 0")
        if not (np.isfinite(self.duration) and self.duration > 0):
            raise ValidationError("CouplerOn.duration must be > 0")


@dataclass(frozen=True)
class Idle:
    """Free evolution with the coupler off."""

    duration: float

    def __post_init__(self):
        if not (np.isfinite(self.duration) and self.duration > 0):
            raise ValidationError("Idle.duration must be > 0")


@dataclass(frozen=True)
class Measure:
    """Terminal qubit population readout."""


@dataclass
class Protocol:
    segments: list = field(default_factory=list)

    def __post_init__(self):
        kinds = [type(s) for s in self.segments]
        if kinds.count(Measure) != 1 or kinds[-1] is not Measure:
            raise ValidationError("protocol needs exactly one terminal Measure")


def run_protocol(protocol: Protocol, sp: SystemParams, hc: HilbertConfig,
                 dt: float = DT_DEFAULT, coupler_on_qubit_loss: float = 0.0) -> float:
    """Evolve from the global ground state through all segments; return P_e.

    coupler_on_qubit_loss (1/s) adds qubit energy loss only while the coupler
    is energized, modeling the extra damping seen with the coupler left on.
    """
    frame = sp.f_r
    state = ground_state(hc).matrix
    sx = qubit_sigma_x(hc)
    off = sp.replace(g=0.0, g_spur=0.0)

    for seg in protocol.segments:
        if isinstance(seg, PiPulse):
            state = sx @ state @ sx
        elif isinstance(seg, Drive):
            h = (build_hamiltonian(off, hc, frame_freq=seg.params.frequency)
                 + qubit_drive_term(hc, seg.params.amplitude))
            prop = Propagator(h, collapse_operators(off, hc), dt)
            state = prop.advance(state, seg.params.duration)
        elif isinstance(seg, CouplerOn):
            on = sp.replace(g=seg.g, g_spur=seg.g_spur)
            h = build_hamiltonian(on, hc, frame_freq=frame)
            prop = Propagator(h, collapse_operators(on, hc, coupler_on_qubit_loss), dt)
            state = prop.advance(state, seg.duration)
        elif isinstance(seg, Idle):
            h = build_hamiltonian(off, hc, frame_freq=frame)
            prop = Propagator(h, collapse_operators(off, hc), dt)
            state = prop.advance(state, seg.duration)
        elif isinstance(seg, Measure):
            return measure_pe(ensure_physical(state, hc.dims, dt))
        else:
            raise ValidationError("unknown protocol segment %r" % (seg,))
    raise ValidationError("protocol ended without Measure")  # unreachable


def swap_duration(sp: SystemParams) -> float:
    """Half vacuum-Rabi period 1/(2 (2g)) at the primary coupling."""
    if sp.g <= 0:
        raise ValidationError("swap duration undefined for g = 0")
    return 1.0 / (4.0 * sp.g)


def phonon_t1_scan(sp: SystemParams, hc: HilbertConfig, delays,
                   dt: float = DT_DEFAULT,
                   coupler_on_qubit_loss: float = 0.0) -> np.ndarray:
    """P_e versus storage delay for the excite / swap / hold / swap sequence.

    Per delay: ideal pi pulse, swap into the primary mode (spurious coupling
    left on, as in the experiment), idle with the coupler off, swap back,
    measure.  The decay constant of the returned curve tracks the
    phonon lifetime.
    """
    delays = np.asarray(delays, dtype=float)
    if delays.size == 0:
        raise ValidationError("delay grid is empty")
    if np.any(delays < 0) or not np.all(np.isfinite(delays)):
        raise ValidationError("delays must be finite and >= 0")

    t_swap = swap_duration(sp)
    frame = sp.f_r
    h_on = build_hamiltonian(sp, hc, frame)
    prop_on = Propagator(h_on, collapse_operators(sp, hc, coupler_on_qubit_loss), dt)
    off = sp.replace(g=0.0, g_spur=0.0)
    h_off = build_hamiltonian(off, hc, frame)
    prop_off = Propagator(h_off, collapse_operators(off, hc), dt)

    # state after pi pulse + swap-in is shared by all delays
    sx = qubit_sigma_x(hc)
    g0 = ground_state(hc).matrix
    stored = prop_on.advance(sx @ g0 @ sx, t_swap)

    order = np.argsort(delays, kind="stable")
    out = np.empty(delays.size)
    held = stored
    prev = 0.0
    for idx in order:
        held = prop_off.advance(held, delays[idx] - prev)
        prev = delays[idx]
        back = prop_on.advance(held, t_swap)
        out[idx] = measure_pe(ensure_physical(back, hc.dims, dt))
    return out


def rabi_chevron(sp: SystemParams, hc: HilbertConfig, f_q_grid, times,
                 dt: float = DT_DEFAULT, coupler_on_qubit_loss: float = 0.0,
                 workers: int | None = None) -> np.ndarray:
    """P_e map over interaction time (rows) and qubit frequency (columns).

    Per column: excite the qubit at f_q, hold the coupler on, record P_e at
    each requested time.  The spurious mode stays coupled throughout.
    """
    from .parallel import indexed_map

    f_q_grid = np.asarray(f_q_grid, dtype=float)
    times = np.asarray(times, dtype=float)
    if f_q_grid.size == 0 or times.size == 0:
        raise ValidationError("chevron grids must be non-empty")
    if np.any(np.diff(times) < 0) or times[0] < 0:
        raise ValidationError("times must be ascending and >= 0")
    if f_q_grid.size * times.size > MAX_SCAN_POINTS:
        raise ResourceError("chevron grid has %d points, budget is %d"
                            % (f_q_grid.size * times.size, MAX_SCAN_POINTS))

    pe_op = excited_projector(hc)
    sx = qubit_sigma_x(hc)
    g0 = ground_state(hc).matrix
    excited = sx @ g0 @ sx

    def run_column(fq):
        col_sp = sp.replace(f_q=float(fq))
        h = build_hamiltonian(col_sp, hc, frame_freq=sp.f_r)
        prop = Propagator(h, collapse_operators(col_sp, hc, coupler_on_qubit_loss), dt)
        return prop.advance_collect(excited, times, pe_op)

    columns = indexed_map(run_column, list(f_q_grid), workers)
    return np.column_stack(columns)


# ---------------------------------------------------------------------------
# decay-curve extraction


@dataclass
class DecayFit:
    """Exponential decay y = offset + amplitude exp(-x / T1)."""

    T1: float
    amplitude: float
    offset: float
    uncertainties: dict
    degenerate: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.T1) and self.T1 > 0):
            raise ValidationError("DecayFit.T1 must be finite and > 0")


def fit_exponential(x, y) -> DecayFit:
    """Least-squares fit of offset + amplitude exp(-x/T1) to a decay curve.

    Points may arrive in any order.  Uncertainties come from the
    residual-variance-scaled inverse normal matrix.  Data with no resolvable
    decay (best-fit T1 beyond 1e6 times the span) is returned with the
    degenerate flag set.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValidationError("x and y must be 1-D arrays of equal length")
    if x.size < 5:
        raise ValidationError("need at least 5 points, got %d" % x.size)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("decay data must be finite")
    if np.any(y < -1e-9) or np.any(y > 1.0 + 1e-9):
        raise ValidationError("y values must lie in [0, 1]")
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]
    span = x[-1] - x[0]
    if span <= 0:
        raise ValidationError("x values must span a nonzero range")

    tail = max(3, x.size // 10)
    offset0 = float(np.mean(y[-tail:]))
    amp0 = float(y[0] - offset0)
    if amp0 <= 0:
        amp0 = max(float(np.max(y) - np.min(y)), 1e-6)
    # first crossing of amp0/e sets the time-constant guess
    below = np.where(y - offset0 <= amp0 / np.e)[0]
    t1_0 = float(x[below[0]] - x[0]) if below.size else span / 3.0
    t1_0 = max(t1_0, span * 1e-3)

    def model(p):
        t1, amp, off = p
        return off + amp * np.exp(-(x - x[0]) / t1)

    def residual(p):
        return model(p) - y

    def jacobian(p):
        t1, amp, off = p
        e = np.exp(-(x - x[0]) / t1)
        return np.column_stack([amp * e * (x - x[0]) / t1 ** 2, e, np.ones_like(x)])

    res = solve_lm(residual, jacobian, np.array([t1_0, amp0, offset0]),
                   tol=1e-12, max_iter=200, accept_fn=lambda p: p[0] > 0)
    t1, amp, off = res.x
    degenerate = bool(t1 > 1e6 * span) or not res.converged
    try:
        cov = covariance_from_fit(res.jacobian, res.cost, n_params=3)
        sig = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except Exception:
        sig = np.full(3, np.inf)
        degenerate = True
    # decay measured from the first sample; shift the offset reference to x=0
    amp_at_zero = amp * np.exp(x[0] / t1) if t1 < 1e6 * span else amp
    return DecayFit(T1=float(t1), amplitude=float(amp_at_zero), offset=float(off),
                    uncertainties={"T1": float(sig[0]), "amplitude": float(sig[1]),
                                   "offset": float(sig[2])},
                    degenerate=degenerate)


def phonon_q_from_t1(f: float, t1: float) -> float:
    """Single-phonon quality factor 2 pi f T1."""
    if not (np.isfinite(f) and f > 0 and np.isfinite(t1) and t1 > 0):
        raise ValidationError("f and t1 must be finite and > 0")
    return TWO_PI * f * t1


# ---------------------------------------------------------------------------
# named presets (CLI surface)


def preset_t1_swap(sp: SystemParams, hc: HilbertConfig, delays=None,
                   dt: float = DT_DEFAULT, coupler_on_qubit_loss: float = 0.0) -> dict:
    """Swap-store-swap lifetime measurement with an exponential fit.

    The default delay grid reaches 1 us so the fit averages over the early
    spurious-mode beats and resolves the tail; shorter grids bias the
    extracted lifetime upward by several percent.
    """
    if delays is None:
        delays = np.linspace(0.0, 1000e-9, 51)
    delays = np.asarray(delays, dtype=float)
    pe = phonon_t1_scan(sp, hc, delays, dt=dt,
                        coupler_on_qubit_loss=coupler_on_qubit_loss)
    decay = fit_exponential(delays, pe)
    return {
        "delays": delays,
        "pe": pe,
        "fit": decay,
        "phonon_q": phonon_q_from_t1(sp.f_r, decay.T1),
        "swap_duration": swap_duration(sp),
    }


def preset_chevron(sp: SystemParams, hc: HilbertConfig, f_q_grid=None,
                   times=None, dt: float = DT_DEFAULT,
                   coupler_on_qubit_loss: float = 0.0,
                   workers: int | None = None) -> dict:
    """Rabi-swap map versus qubit detuning and interaction time."""
    if f_q_grid is None:
        f_q_grid = sp.f_r + np.linspace(-25e6, 25e6, 41)
    if times is None:
        times = np.linspace(0.0, 400e-9, 101)
    pe = rabi_chevron(sp, hc, f_q_grid, times, dt=dt,
                      coupler_on_qubit_loss=coupler_on_qubit_loss, workers=workers)
    return {"f_q_grid": np.asarray(f_q_grid, float),
            "times": np.asarray(times, float), "pe": pe}


def preset_spectroscopy(sp: SystemParams, hc: HilbertConfig, drive=None,
                        f_q_grid=None, f_drive_grid=None,
                        dt: float = DT_DEFAULT,
                        workers: int | None = None) -> dict:
    """Weak-tone spectroscopy map across the avoided crossings."""
    from .quantum import spectroscopy_scan

    if f_q_grid is None:
        f_q_grid = np.linspace(sp.f_r - 15e6, sp.f_spur + 15e6, 13)
    if f_drive_grid is None:
        f_drive_grid = np.linspace(sp.f_r - 15e6, sp.f_spur + 15e6, 41)
    pe = spectroscopy_scan(sp, hc, drive, f_q_grid, f_drive_grid,
                           dt=dt, workers=workers)
    return {"f_q_grid": np.asarray(f_q_grid, float),
            "f_drive_grid": np.asarray(f_drive_grid, float), "pe": pe}


PRESETS = {
    "spectroscopy": preset_spectroscopy,
    "t1-swap": preset_t1_swap,
    "chevron": preset_chevron,
}
