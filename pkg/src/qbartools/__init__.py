"""Bulk-acoustic-resonator fitting and qubit-phonon simulation toolkit."""

from .bvd import (BvdParams, LineImpedance, ResonanceParams, Z1Factor,
                  bvd_from_resonance, default_bvd_params, default_resonance,
                  impedance_approx, impedance_exact, internal_q,
                  parallel_resonance, resonance_from_bvd, s21_from_bvd,
                  s21_inverse_model, s21_model, series_resonance, z1_factor)
from .errors import (ConfigurationError, DataError, DegenerateFitError,
                     DomainError, InstabilityError, NoResonanceError,
                     NormalizationError, ParseError, QbarError, ResourceError,
                     ValidationError)
from .fitting import (BaselineModel, ComplexTrace, FitResult, circle_init,
                      fit_report, fit_resonance, fit_trace, normalize_trace)
from .protocols import (CouplerOn, DecayFit, Drive, Idle, Measure, PiPulse,
                        Protocol, fit_exponential, phonon_q_from_t1,
                        phonon_t1_scan, preset_chevron, preset_spectroscopy,
                        preset_t1_swap, rabi_chevron, run_protocol,
                        swap_duration, PRESETS)
from .quantum import (DT_DEFAULT, DensityState, DriveParams, HilbertConfig,
                      Propagator, SystemParams, build_hamiltonian,
                      collapse_operators, evolve, ground_state, lindblad_rhs,
                      lindblad_step, measure_pe, qubit_excited_state,
                      single_excitation_eigenfrequencies, spectroscopy_scan)
from .synth import resonance_grid, synth_trace
from .touchstone import parse_touchstone, read_touchstone, write_touchstone

__version__ = "0.1.0"
