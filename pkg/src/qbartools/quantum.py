"""Master-equation engine for a qubit coupled to two mechanical modes.

Hilbert space: qubit (2) x primary mode (d1) x spurious mode (d2), row-major
kron ordering.  The Hamiltonian is the excitation-conserving two-mode
Jaynes-Cummings form in a rotating frame, in angular units (rad/s):

    H = 2 pi [ (f_q - f_frame) s+ s-  +  (f_r - f_frame) a1' a1
             + (f_spur - f_frame) a2' a2
             + g (s+ a1 + s- a1') + g_spur (s+ a2 + s- a2') ]

Decoherence enters as zero-temperature Lindblad channels: qubit decay at
1/T1_qb, qubit pure dephasing at 1/T2_qb - 1/(2 T1_qb), and mode decay at
1/T1_r and 1/T1_spur.  Time evolution is classic fixed-step 4th-order
(RK4) integration; for a piecewise-constant generator each RK4 step equals
the degree-4 Taylor polynomial of exp(dt L) applied to the vectorized
density matrix, which is what the Propagator precomputes.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import (ConfigurationError, InstabilityError, ResourceError,
                     ValidationError)

TWO_PI = 2.0 * np.pi

# Default integrator step.  At the largest frame detunings used by the
# protocols (~2 pi * 30 MHz) the RK4 error per simulated microsecond is below
# 1e-6 at this step; halving it changes populations by < 1e-6.
DT_DEFAULT = 1e-10  # s

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-9
EIGENVALUE_FLOOR = -1e-9
INSTABILITY_FLOOR = -1e-6
MAX_TOTAL_DIM = 128


@dataclass(frozen=True)
class SystemParams:
    """Qubit / two-mode frequencies, couplings, and decoherence times.

    Couplings are stored as half-splittings: a resonant avoided crossing has
    total size 2 g.  Defaults are the measured device values; the spurious
    lifetime is a model extraction, not a direct measurement.
    """

    f_q: float = 4.86e9       # qubit frequency, Hz
    f_r: float = 4.86e9       # primary mechanical mode, Hz
    f_spur: float = 4.87e9    # spurious mechanical mode, Hz
    g: float = 5.6e6          # half-splitting of the primary mode, Hz (2g = 11.2 MHz)
    g_spur: float = 1.75e6    # half-splitting of the spurious mode, Hz (2g = 3.5 MHz)
    T1_qb: float = 10e-6      # qubit energy relaxation, s
    T2_qb: float = 1e-6       # qubit Ramsey dephasing, s
    T1_r: float = 178e-9      # primary-mode phonon lifetime, s
    T1_spur: float = 70e-9    # spurious-mode lifetime, s

    def __post_init__(self):
        for name in ("f_q", "f_r", "f_spur"):
            if not (np.isfinite(getattr(self, name)) and getattr(self, name) > 0):
                raise ValidationError("SystemParams.%s must be finite and > 0" % name)
        for name in ("T1_qb", "T2_qb", "T1_r", "T1_spur"):
            if not (np.isfinite(getattr(self, name)) and getattr(self, name) > 0):
                raise ValidationError("SystemParams.%s must be finite and > 0" % name)
        for name in ("g", "g_spur"):
            if not (np.isfinite(getattr(self, name)) and getattr(self, name) >= 0):
                raise ValidationError("SystemParams.%s must be finite and >= 0" % name)
        if self.T2_qb > 2.0 * self.T1_qb * (1.0 + 1e-12):
            raise ValidationError("SystemParams requires T2_qb <= 2 T1_qb")

    def replace(self, **kwargs) -> "SystemParams":
        return dataclasses.replace(self, **kwargs)


@dataclass(frozen=True)
class HilbertConfig:
    """Fock-space truncation per mechanical mode.

    Three levels per mode are enough for single-excitation protocols with
    weak drive leakage; adequacy is asserted in tests by re-running at four.
    """

    fock_dim_primary: int = 3
    fock_dim_spur: int = 3

    def __post_init__(self):
        for name in ("fock_dim_primary", "fock_dim_spur"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 2:
                raise ValidationError("HilbertConfig.%s must be an int >= 2" % name)
        if self.dim > MAX_TOTAL_DIM:
            raise ConfigurationError(
                "total Hilbert dimension %d exceeds %d" % (self.dim, MAX_TOTAL_DIM))

    @property
    def dims(self) -> tuple[int, int, int]:
        return (2, self.fock_dim_primary, self.fock_dim_spur)

    @property
    def dim(self) -> int:
        return 2 * self.fock_dim_primary * self.fock_dim_spur


@dataclass(frozen=True)
class DriveParams:
    """Weak microwave tone applied to the qubit raising/lowering operators."""

    amplitude: float = 0.1e6   # on-resonance Rabi rate, Hz
    frequency: float = 4.86e9  # drive frequency, Hz
    duration: float = 1e-6     # s

    def __post_init__(self):
        if not (np.isfinite(self.amplitude) and self.amplitude >= 0):
            raise ValidationError("DriveParams.amplitude must be >= 0")
        if not (np.isfinite(self.frequency) and self.frequency > 0):
            raise ValidationError("DriveParams.frequency must be > 0")
        if not (np.isfinite(self.duration) and self.duration > 0):
            raise ValidationError("DriveParams.duration must be > 0")


class DensityState:
    """Density matrix over the ordered qubit x mode1 x mode2 basis."""

    def __init__(self, matrix, dims, validate: bool = True):
        self.matrix = np.asarray(matrix, dtype=complex)
        self.dims = tuple(int(d) for d in dims)
        n = int(np.prod(self.dims))
        if self.matrix.shape != (n, n):
            raise ValidationError("density matrix shape %s does not match dims %s"
                                  % (self.matrix.shape, self.dims))
        if validate:
            self.validate()

    def validate(self):
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
            raise ValidationError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError("density matrix trace %.12g deviates from 1" % tr)
        if np.min(np.linalg.eigvalsh(m)) < EIGENVALUE_FLOOR:
            raise ValidationError("density matrix has a negative eigenvalue")

    def copy(self) -> "DensityState":
        return DensityState(self.matrix.copy(), self.dims, validate=False)

    def expect(self, op: np.ndarray) -> float:
        return float(np.trace(op @ self.matrix).real)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    @property
    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(self.matrix)))


# ---------------------------------------------------------------------------
# operator construction


def _destroy(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d)), 1).astype(complex)


def qubit_lower(hc: HilbertConfig) -> np.ndarray:
    sm = np.array([[0, 1], [0, 0]], dtype=complex)  # |g><e|
    return np.kron(sm, np.eye(hc.fock_dim_primary * hc.fock_dim_spur, dtype=complex))


def qubit_sigma_z(hc: HilbertConfig) -> np.ndarray:
    sz = np.diag([-1.0, 1.0]).astype(complex)  # +1 on the excited state
    return np.kron(sz, np.eye(hc.fock_dim_primary * hc.fock_dim_spur, dtype=complex))


def qubit_sigma_x(hc: HilbertConfig) -> np.ndarray:
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    return np.kron(sx, np.eye(hc.fock_dim_primary * hc.fock_dim_spur, dtype=complex))


def mode_lower(hc: HilbertConfig, which: int) -> np.ndarray:
    d1, d2 = hc.fock_dim_primary, hc.fock_dim_spur
    if which == 1:
        return np.kron(np.eye(2, dtype=complex), np.kron(_destroy(d1), np.eye(d2, dtype=complex)))
    if which == 2:
        return np.kron(np.eye(2, dtype=complex), np.kron(np.eye(d1, dtype=complex), _destroy(d2)))
    raise ValidationError("mode index must be 1 or 2")


def excited_projector(hc: HilbertConfig) -> np.ndarray:
    pe = np.diag([0.0, 1.0]).astype(complex)
    return np.kron(pe, np.eye(hc.fock_dim_primary * hc.fock_dim_spur, dtype=complex))


def total_excitation(hc: HilbertConfig) -> np.ndarray:
    sp = qubit_lower(hc).conj().T
    a1, a2 = mode_lower(hc, 1), mode_lower(hc, 2)
    return sp @ sp.conj().T + a1.conj().T @ a1 + a2.conj().T @ a2


def ground_state(hc: HilbertConfig) -> DensityState:
    n = hc.dim
    m = np.zeros((n, n), dtype=complex)
    # basis index 0 is |g, 0, 0> in the qubit-first ordering
    m[0, 0] = 1.0
    return DensityState(m, hc.dims, validate=False)


def qubit_excited_state(hc: HilbertConfig) -> DensityState:
    n = hc.dim
    m = np.zeros((n, n), dtype=complex)
    i = hc.fock_dim_primary * hc.fock_dim_spur  # |e, 0, 0>
    m[i, i] = 1.0
    return DensityState(m, hc.dims, validate=False)


def build_hamiltonian(sp: SystemParams, hc: HilbertConfig, frame_freq: float) -> np.ndarray:
    """Rotating-frame two-mode Jaynes-Cummings Hamiltonian in rad/s.

    Conserves the total excitation number; Hermitian by construction.
    """
    if not np.isfinite(frame_freq):
        raise ValidationError("frame_freq must be finite")
    sm = qubit_lower(hc)
    spl = sm.conj().T
    a1, a2 = mode_lower(hc, 1), mode_lower(hc, 2)
    h = ((sp.f_q - frame_freq) * (spl @ sm)
         + (sp.f_r - frame_freq) * (a1.conj().T @ a1)
         + (sp.f_spur - frame_freq) * (a2.conj().T @ a2)
         + sp.g * (spl @ a1 + sm @ a1.conj().T)
         + sp.g_spur * (spl @ a2 + sm @ a2.conj().T))
    return TWO_PI * h


def qubit_drive_term(hc: HilbertConfig, amplitude: float) -> np.ndarray:
    """Drive Hamiltonian (rad/s) in the frame rotating at the drive tone:
    pi * amplitude * (s+ + s-), giving a full population cycle at 1/amplitude."""
    sm = qubit_lower(hc)
    return TWO_PI * (amplitude / 2.0) * (sm + sm.conj().T)


def collapse_operators(sp: SystemParams, hc: HilbertConfig,
                       extra_qubit_rate: float = 0.0) -> list[np.ndarray]:
    """Rate-scaled Lindblad operators for the zero-temperature channels.

    extra_qubit_rate adds qubit energy loss (1/s), used to model extra
    damping while the tunable coupler is energized.
    """
    if extra_qubit_rate < 0:
        raise ValidationError("extra_qubit_rate must be >= 0")
    ops = []
    gamma1 = 1.0 / sp.T1_qb + extra_qubit_rate
    ops.append(np.sqrt(gamma1) * qubit_lower(hc))
    gamma_phi = 1.0 / sp.T2_qb - 0.5 / sp.T1_qb
    if gamma_phi > 0:
        ops.append(np.sqrt(gamma_phi / 2.0) * qubit_sigma_z(hc))
    ops.append(np.sqrt(1.0 / sp.T1_r) * mode_lower(hc, 1))
    ops.append(np.sqrt(1.0 / sp.T1_spur) * mode_lower(hc, 2))
    return ops


def lindblad_rhs(rho: np.ndarray, h: np.ndarray, c_ops: list[np.ndarray]) -> np.ndarray:
    """d rho / dt = -i [H, rho] + sum_k (L rho L' - {L'L, rho}/2)."""
    out = -1j * (h @ rho - rho @ h)
    for c in c_ops:
        cd = c.conj().T
        cdc = cd @ c
        out += c @ rho @ cd - 0.5 * (cdc @ rho + rho @ cdc)
    return out


class Propagator:
    """Fixed-step RK4 propagator for one piecewise-constant generator.

    Builds the Liouvillian superoperator once; a step of size h is the linear
    map I + h L + (h L)^2/2 + (h L)^3/6 + (h L)^4/24, identical to a classic
    RK4 step for this linear autonomous system.  The density matrix is
    re-symmetrized after every step.
    """

    def __init__(self, h: np.ndarray, c_ops: list[np.ndarray], dt: float = DT_DEFAULT):
        if dt <= 0:
            raise ValidationError("dt must be > 0")
        self.dim = h.shape[0]
        self.dt = float(dt)
        n = self.dim
        eye = np.eye(n, dtype=complex)
        lsup = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
        for c in c_ops:
            cdc = c.conj().T @ c
            lsup += (np.kron(c, c.conj())
                     - 0.5 * np.kron(cdc, eye)
                     - 0.5 * np.kron(eye, cdc.T))
        p2 = lsup @ lsup
        self._powers = [np.eye(n * n, dtype=complex), lsup, p2, p2 @ lsup, p2 @ p2]
        self._steps = {}

    def step_matrix(self, h_step: float) -> np.ndarray:
        key = float(h_step)
        cached = self._steps.get(key)
        if cached is None:
            coeff = [1.0, key, key ** 2 / 2.0, key ** 3 / 6.0, key ** 4 / 24.0]
            cached = sum(c * p for c, p in zip(coeff, self._powers))
            self._steps[key] = cached
        return cached

    def _resym(self, vec: np.ndarray) -> np.ndarray:
        m = vec.reshape(self.dim, self.dim)
        m = 0.5 * (m + m.conj().T)
        return m.reshape(-1)

    def advance(self, rho_mat: np.ndarray, duration: float) -> np.ndarray:
        """Evolve by duration using full dt steps plus one remainder step."""
        if duration < 0:
            raise ValidationError("duration must be >= 0")
        vec = rho_mat.reshape(-1).copy()
        n_full = int(np.floor(duration / self.dt + 1e-9))
        rem = duration - n_full * self.dt
        if rem < 1e-9 * self.dt:
            rem = 0.0
        a_full = self.step_matrix(self.dt)
        for _ in range(n_full):
            vec = self._resym(a_full @ vec)
        if rem > 0.0:
            vec = self._resym(self.step_matrix(rem) @ vec)
        return vec.reshape(self.dim, self.dim)

    def advance_collect(self, rho_mat: np.ndarray, times, observable: np.ndarray
                        ) -> np.ndarray:
        """Expectation of observable at each requested time (sorted ascending)."""
        times = np.asarray(times, dtype=float)
        if times.size and (np.any(np.diff(times) < 0) or times[0] < 0):
            raise ValidationError("times must be ascending and >= 0")
        out = np.empty(times.size)
        m = rho_mat
        prev = 0.0
        for i, t in enumerate(times):
            m = self.advance(m, t - prev)
            prev = t
            out[i] = np.trace(observable @ m).real
        return out


def ensure_physical(mat: np.ndarray, dims, dt: float) -> DensityState:
    """Wrap an evolved matrix, raising InstabilityError on eigenvalues below
    the instability floor (in which case a smaller dt is advised)."""
    state = DensityState(mat, dims, validate=False)
    if state.min_eigenvalue < INSTABILITY_FLOOR:
        raise InstabilityError(
            "density matrix eigenvalue %.3g below %.0e; reduce dt (currently %g s)"
            % (state.min_eigenvalue, INSTABILITY_FLOOR, dt))
    return state


def evolve(rho: DensityState, h: np.ndarray, sp: SystemParams, t: float,
           dt: float = DT_DEFAULT, extra_qubit_rate: float = 0.0) -> DensityState:
    """Evolve a state under H plus the decoherence channels of sp for time t."""
    if t < 0:
        raise ValidationError("t must be >= 0")
    d1 = rho.dims[1]
    d2 = rho.dims[2]
    hc = HilbertConfig(fock_dim_primary=d1, fock_dim_spur=d2)
    c_ops = collapse_operators(sp, hc, extra_qubit_rate)
    prop = Propagator(h, c_ops, dt)
    return ensure_physical(prop.advance(rho.matrix, t), rho.dims, dt)


def lindblad_step(rho: DensityState, h: np.ndarray, sp: SystemParams,
                  dt: float = DT_DEFAULT) -> DensityState:
    """Single fixed-step RK4 update."""
    return evolve(rho, h, sp, t=dt, dt=dt)


def measure_pe(rho: DensityState) -> float:
    """Qubit excited-state probability, clamped to [0, 1]."""
    d1, d2 = rho.dims[1], rho.dims[2]
    hc = HilbertConfig(fock_dim_primary=d1, fock_dim_spur=d2)
    pe = rho.expect(excited_projector(hc))
    if pe < -1e-9 or pe > 1.0 + 1e-9:
        raise ValidationError("excited-state probability %.12g outside [0, 1]" % pe)
    return float(min(max(pe, 0.0), 1.0))


def single_excitation_eigenfrequencies(sp: SystemParams) -> np.ndarray:
    """Eigenfrequencies (Hz, ascending) of the single-excitation block.

    These are the spectroscopy branch positions of the coupled
    qubit / primary / spurious system.
    """
    m = np.array([[sp.f_q, sp.g, sp.g_spur],
                  [sp.g, sp.f_r, 0.0],
                  [sp.g_spur, 0.0, sp.f_spur]])
    return np.sort(np.linalg.eigvalsh(m))


def spectroscopy_scan(sp: SystemParams, hc: HilbertConfig,
                      drive: DriveParams | None = None,
                      f_q_grid=None, f_drive_grid=None,
                      dt: float = DT_DEFAULT, max_points: int = 20000,
                      workers: int | None = None) -> np.ndarray:
    """Final P_e after a weak tone, on a (qubit frequency) x (drive frequency) grid.

    Each grid point evolves the ground state for the drive duration in the
    frame rotating at the drive tone, with all decoherence channels active.
    Returns an array of shape (len(f_q_grid), len(f_drive_grid)).
    """
    from .parallel import indexed_map  # local import to avoid cycle at module load

    if drive is None:
        drive = DriveParams()
    f_q_grid = np.asarray(f_q_grid, dtype=float)
    f_drive_grid = np.asarray(f_drive_grid, dtype=float)
    if f_q_grid.size == 0 or f_drive_grid.size == 0:
        raise ValidationError("spectroscopy grids must be non-empty")
    n_points = f_q_grid.size * f_drive_grid.size
    if n_points > max_points:
        raise ResourceError("spectroscopy grid has %d points, budget is %d"
                            % (n_points, max_points))
    jobs = [(float(fq), float(fd)) for fq in f_q_grid for fd in f_drive_grid]

    def run_point(args):
        fq, fd = args
        sp_point = sp.replace(f_q=fq)
        h = build_hamiltonian(sp_point, hc, frame_freq=fd)
        h = h + qubit_drive_term(hc, drive.amplitude)
        prop = Propagator(h, collapse_operators(sp_point, hc), dt)
        final = prop.advance(ground_state(hc).matrix, drive.duration)
        return measure_pe(ensure_physical(final, hc.dims, dt))

    results = indexed_map(run_point, jobs, workers)
    return np.array(results).reshape(f_q_grid.size, f_drive_grid.size)
