"""Command-line interface.

Subcommands: synth, fit, sim-eigen, sim-spectroscopy, sim-t1, sim-chevron,
report.  Every numeric result is written as CSV, scalar results as JSON,
and plots as optional SVG (enable with --format csv,json,svg).  Options can
come from a flat key=value config file (--config); explicit flags win over
the file, which wins over defaults.  Defaults carry their provenance in the
help text: device-measured values, model extractions, or synthetic choices.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bvd
from .bvd import BvdParams, LineImpedance, ResonanceParams
from .emit import (format_number, read_trace_csv, write_csv, write_json,
                   write_map_csv, write_trace_csv)
from .errors import ParseError, QbarError, ValidationError
from .fitting import fit_report, fit_trace
from .protocols import (fit_exponential, phonon_q_from_t1, preset_chevron,
                        preset_spectroscopy, preset_t1_swap, swap_duration)
from .quantum import (DT_DEFAULT, DriveParams, HilbertConfig, SystemParams,
                      single_excitation_eigenfrequencies)
from .synth import resonance_grid, synth_trace
from .touchstone import read_touchstone, write_touchstone
from . import svg

FORMATS = ("csv", "json", "svg")


def load_config(path) -> dict:
    """Flat key = value file with # comments; keys use underscores."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError("expected key = value", lineno)
            key, _, value = line.partition("=")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


class Options:
    """Merged view of CLI flags, config file entries, and defaults."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = load_config(args.config) if getattr(args, "config", None) else {}

    def _lookup(self, name, cast, default):
        flag = getattr(self.args, name, None)
        if flag is not None:
            return flag
        if name in self.config:
            try:
                return cast(self.config[name])
            except ValueError:
                raise ValidationError("config key %s=%r is not a valid %s"
                                      % (name, self.config[name], cast.__name__))
        return default

    def f(self, name, default):
        return self._lookup(name, float, default)

    def i(self, name, default):
        v = self._lookup(name, lambda s: int(float(s)), default)
        return int(v) if v is not None else None

    def s(self, name, default):
        return self._lookup(name, str, default)


def _formats(opt: Options):
    raw = opt.s("format", "csv,json")
    chosen = tuple(x.strip() for x in raw.split(",") if x.strip())
    for c in chosen:
        if c not in FORMATS:
            raise ValidationError("unknown format %r (choose from %s)" % (c, ",".join(FORMATS)))
    return chosen


def _out_dir(opt: Options) -> Path:
    d = Path(opt.s("out_dir", "."))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _system_params(opt: Options) -> SystemParams:
    return SystemParams(
        f_q=opt.f("f_q", 4.86e9),
        f_r=opt.f("f_r", 4.86e9),
        f_spur=opt.f("f_spur", 4.87e9),
        g=opt.f("splitting", 11.2e6) / 2.0,
        g_spur=opt.f("splitting_spur", 3.5e6) / 2.0,
        T1_qb=opt.f("t1_qb", 10e-6),
        T2_qb=opt.f("t2_qb", 1e-6),
        T1_r=opt.f("t1_r", 178e-9),
        T1_spur=opt.f("t1_spur", 70e-9),
    )


def _hilbert(opt: Options, default_fock: int = 3) -> HilbertConfig:
    return HilbertConfig(fock_dim_primary=opt.i("fock_primary", default_fock),
                         fock_dim_spur=opt.i("fock_spur", default_fock))


# ---------------------------------------------------------------------------
# subcommand implementations


def cmd_synth(opt: Options) -> int:
    out = _out_dir(opt)
    formats = _formats(opt)
    seed = opt.i("seed", None)
    noise = opt.f("noise_sigma", 0.0)
    f0 = opt.f("f0", bvd.DEFAULT_F0)
    qi = opt.f("qi", bvd.DEFAULT_QI_CRYO)
    qc = opt.f("qc", bvd.DEFAULT_QC)
    phi = opt.f("phi", 0.0)
    model_kind = opt.s("model", "lineshape")

    grid = resonance_grid(f0, qi,
                          core_halfwidth=opt.f("core_linewidths", 25.0),
                          wing_halfwidth=opt.f("wing_linewidths", 2000.0),
                          n_core=opt.i("core_points", 601),
                          n_wing=opt.i("wing_points", 300))
    from .fitting import BaselineModel
    baseline = BaselineModel(
        amplitude_offset=opt.f("baseline_amp", 1.0),
        amplitude_slope=opt.f("baseline_slope", 0.0),
        phase_offset=opt.f("baseline_phase", 0.0),
        group_delay=opt.f("baseline_delay", 0.0),
        reference_freq=f0,
    )
    rp = ResonanceParams(f0=f0, Qi=qi, Qc=qc, phi=phi)
    if model_kind == "lineshape":
        model = rp
    elif model_kind == "bvd":
        model = bvd.bvd_from_resonance(rp, c0=opt.f("c0", 1e-17))
    else:
        raise ValidationError("model must be 'lineshape' or 'bvd'")

    trace = synth_trace(model, grid, baseline=baseline, noise_sigma=noise, seed=seed)
    config_echo = {
        "mode": "synth", "model": model_kind, "f0": f0, "Qi": qi, "Qc": qc,
        "phi": rp.phi, "noise_sigma": noise, "seed": seed, "points": len(trace),
    }
    if "csv" in formats:
        write_trace_csv(out / "synth_trace.csv", trace,
                        comments=["synthetic transmission trace"])
    if "json" in formats:
        write_json(out / "synth_config.json", config_echo)
    if opt.s("touchstone", "") == "s2p":
        from .emit import atomic_write_text
        atomic_write_text(out / "synth_trace.s2p", write_touchstone(trace, ports=2))
    if "svg" in formats:
        svg.line_plot(out / "synth_magnitude.svg",
                      [(trace.freqs, np.abs(trace.values), "#1f77b4", None)],
                      xlabel="frequency (Hz)", ylabel="|S21|",
                      title="synthetic trace")
    return 0


def _load_trace(path: Path):
    suffix = path.suffix.lower()
    if suffix in (".s1p", ".s2p"):
        return read_touchstone(path)
    return read_trace_csv(path)


def cmd_fit(opt: Options) -> int:
    out = _out_dir(opt)
    formats = _formats(opt)
    input_path = opt.s("input", None)
    if not input_path:
        raise ValidationError("fit requires --input PATH")
    trace = _load_trace(Path(input_path))
    result, baseline = fit_trace(
        trace,
        edge_fraction=opt.f("edge_fraction", 0.2),
        tol=opt.f("tol", 1e-10),
        max_iter=opt.i("max_iter", 200),
    )
    report = fit_report(result)
    report["baseline"] = {
        "amplitude_offset": baseline.amplitude_offset,
        "amplitude_slope": baseline.amplitude_slope,
        "phase_offset": baseline.phase_offset,
        "group_delay": baseline.group_delay,
        "reference_freq": baseline.reference_freq,
    }
    report["input"] = str(input_path)
    report["window"] = {"f_start": trace.freqs[0], "f_stop": trace.freqs[-1],
                        "points": len(trace),
                        "edge_fraction": opt.f("edge_fraction", 0.2)}
    if "json" in formats:
        write_json(out / "fit_report.json", report)
    model = np.array([complex(a, b) for a, b in report["model"]["s21"]])
    norm_values = trace.values / baseline(trace.freqs)
    if "csv" in formats:
        rows = zip(trace.freqs, norm_values.real, norm_values.imag,
                   model.real, model.imag)
        write_csv(out / "fit_curve.csv",
                  ["freq_hz", "data_re", "data_im", "model_re", "model_im"],
                  rows, comments=["normalized data and fitted model"])
    if "svg" in formats:
        svg.line_plot(out / "fit_magnitude.svg",
                      [(trace.freqs, np.abs(norm_values), "#1f77b4", None),
                       (trace.freqs, np.abs(model), "#d62728", "5,3")],
                      xlabel="frequency (Hz)", ylabel="|S21| (normalized)",
                      title="fit")
        svg.plane_plot(out / "fit_plane.svg", 1.0 / norm_values,
                       curve=np.array([complex(a, b)
                                       for a, b in report["model"]["s21_inverse"]]),
                       title="inverse plane")
    p = result.params
    print("fit: f0=%s Hz  Qi=%s  Qc=%s  phi=%s  (converged=%s)"
          % (format_number(p.f0), format_number(p.Qi), format_number(p.Qc),
             format_number(p.phi), result.converged))
    return 0


def cmd_sim_eigen(opt: Options) -> int:
    out = _out_dir(opt)
    formats = _formats(opt)
    sp = _system_params(opt)
    start = opt.f("fq_start", sp.f_r - 35e6)
    stop = opt.f("fq_stop", sp.f_spur + 35e6)
    points = opt.i("fq_points", 281)
    fq_grid = np.linspace(start, stop, points)
    branches = np.array([single_excitation_eigenfrequencies(sp.replace(f_q=fq))
                         for fq in fq_grid])

    gap12 = branches[:, 1] - branches[:, 0]
    gap23 = branches[:, 2] - branches[:, 1]
    i12, i23 = int(np.argmin(gap12)), int(np.argmin(gap23))
    summary = {
        "mode": "sim-eigen",
        "splitting": 2 * sp.g, "splitting_spur": 2 * sp.g_spur,
        "min_gap_low_pair": gap12[i12], "min_gap_low_pair_at": fq_grid[i12],
        "min_gap_high_pair": gap23[i23], "min_gap_high_pair_at": fq_grid[i23],
        "grid_step": float(fq_grid[1] - fq_grid[0]) if points > 1 else 0.0,
    }
    if "csv" in formats:
        rows = zip(fq_grid, branches[:, 0], branches[:, 1], branches[:, 2])
        write_csv(out / "eigen_branches.csv",
                  ["f_q_hz", "branch1_hz", "branch2_hz", "branch3_hz"], rows,
                  comments=["single-excitation eigenfrequencies"])
    if "json" in formats:
        write_json(out / "eigen_summary.json", summary)
    if "svg" in formats:
        svg.line_plot(out / "eigen_branches.svg",
                      [(fq_grid, branches[:, 0], "#1f77b4", None),
                       (fq_grid, branches[:, 1], "#2ca02c", None),
                       (fq_grid, branches[:, 2], "#d62728", None)],
                      xlabel="qubit frequency (Hz)", ylabel="branch (Hz)",
                      title="avoided crossings")
    print("sim-eigen: min gaps %s Hz and %s Hz"
          % (format_number(gap12[i12]), format_number(gap23[i23])))
    return 0


def cmd_sim_spectroscopy(opt: Options) -> int:
    out = _out_dir(opt)
    formats = _formats(opt)
    sp = _system_params(opt)
    hc = _hilbert(opt, default_fock=2)  # weak drive: two levels per mode suffice
    drive = DriveParams(amplitude=opt.f("amplitude", 0.1e6),
                        frequency=sp.f_r,
                        duration=opt.f("duration", 1e-6))
    fq_grid = np.linspace(opt.f("fq_start", sp.f_r - 15e6),
                          opt.f("fq_stop", sp.f_spur + 15e6),
                          opt.i("fq_points", 13))
    drive_grid = np.linspace(opt.f("drive_start", sp.f_r - 15e6),
                             opt.f("drive_stop", sp.f_spur + 15e6),
                             opt.i("drive_points", 41))
    res = preset_spectroscopy(sp, hc, drive, fq_grid, drive_grid,
                              dt=opt.f("dt", DT_DEFAULT),
                              workers=opt.i("workers", None))
    pe = res["pe"]
    if "csv" in formats:
        write_map_csv(out / "spectroscopy_map.csv", "f_q_hz", fq_grid,
                      "f_drive_hz", drive_grid, "pe", pe,
                      comments=["qubit spectroscopy map"])
    if "json" in formats:
        write_json(out / "spectroscopy_summary.json",
                   {"mode": "sim-spectroscopy", "max_pe": float(np.max(pe)),
                    "drive_amplitude": drive.amplitude,
                    "drive_duration": drive.duration,
                    "fq_points": int(fq_grid.size),
                    "drive_points": int(drive_grid.size)})
    if "svg" in formats:
        svg.heatmap(out / "spectroscopy_map.svg", fq_grid, drive_grid, pe.T,
                    xlabel="qubit frequency (Hz)", ylabel="drive frequency (Hz)",
                    title="spectroscopy")
    print("sim-spectroscopy: %dx%d map, max P_e %s"
          % (fq_grid.size, drive_grid.size, format_number(float(np.max(pe)))))
    return 0


def cmd_sim_t1(opt: Options) -> int:
    out = _out_dir(opt)
    formats = _formats(opt)
    sp = _system_params(opt)
    hc = _hilbert(opt)
    delays = np.linspace(0.0, opt.f("delay_max", 1000e-9), opt.i("delay_points", 51))
    res = preset_t1_swap(sp, hc, delays, dt=opt.f("dt", DT_DEFAULT),
                         coupler_on_qubit_loss=opt.f("coupler_loss", 0.0))
    decay = res["fit"]
    if "csv" in formats:
        write_csv(out / "t1_curve.csv", ["delay_s", "pe"],
                  zip(res["delays"], res["pe"]),
                  comments=["phonon lifetime swap sequence"])
    if "json" in formats:
        write_json(out / "t1_fit.json", {
            "mode": "sim-t1",
            "T1_fit": decay.T1, "T1_sigma": decay.uncertainties["T1"],
            "amplitude": decay.amplitude, "offset": decay.offset,
            "degenerate": decay.degenerate,
            "configured_T1_r": sp.T1_r,
            "phonon_q": res["phonon_q"],
            "swap_duration": res["swap_duration"],
        })
    if "svg" in formats:
        fitted = decay.offset + decay.amplitude * np.exp(-res["delays"] / decay.T1)
        svg.line_plot(out / "t1_curve.svg",
                      [(res["delays"], res["pe"], "#1f77b4", None),
                       (res["delays"], fitted, "#d62728", "5,3")],
                      xlabel="storage delay (s)", ylabel="P_e",
                      title="phonon lifetime")
    print("sim-t1: fitted T1 = %s s (sigma %s)"
          % (format_number(decay.T1), format_number(decay.uncertainties["T1"])))
    return 0


def cmd_sim_chevron(opt: Options) -> int:
    out = _out_dir(opt)
    formats = _formats(opt)
    sp = _system_params(opt)
    hc = _hilbert(opt)
    span = opt.f("detuning_span", 50e6)
    fq_grid = sp.f_r + np.linspace(-span / 2, span / 2, opt.i("fq_points", 41))
    times = np.linspace(0.0, opt.f("time_max", 400e-9), opt.i("time_points", 101))
    res = preset_chevron(sp, hc, fq_grid, times, dt=opt.f("dt", DT_DEFAULT),
                         coupler_on_qubit_loss=opt.f("coupler_loss", 0.0),
                         workers=opt.i("workers", None))
    pe = res["pe"]
    if "csv" in formats:
        write_map_csv(out / "chevron_map.csv", "time_s", times, "f_q_hz", fq_grid,
                      "pe", pe, comments=["qubit-resonator swap map"])
    if "json" in formats:
        write_json(out / "chevron_summary.json",
                   {"mode": "sim-chevron", "splitting": 2 * sp.g,
                    "splitting_spur": 2 * sp.g_spur,
                    "min_pe": float(np.min(pe)), "max_pe": float(np.max(pe)),
                    "time_points": int(times.size), "fq_points": int(fq_grid.size)})
    if "svg" in formats:
        svg.heatmap(out / "chevron_map.svg", fq_grid, times, pe,
                    xlabel="qubit frequency (Hz)", ylabel="interaction time (s)",
                    title="Rabi swaps")
    print("sim-chevron: %dx%d map, min P_e %s"
          % (times.size, fq_grid.size, format_number(float(np.min(pe)))))
    return 0


def cmd_report(opt: Options) -> int:
    out = _out_dir(opt)
    input_path = opt.s("input", None)
    if not input_path:
        raise ValidationError("report requires --input fit_report.json")
    with open(input_path) as fh:
        report = json.load(fh)
    freqs = np.array(report["model"]["freqs"], dtype=float)
    model = np.array([complex(a, b) for a, b in report["model"]["s21"]])
    model_inv = np.array([complex(a, b) for a, b in report["model"]["s21_inverse"]])
    series = [(freqs, np.abs(model), "#d62728", "5,3")]
    plane_points = model_inv
    trace_path = opt.s("trace", None)
    if trace_path:
        trace = _load_trace(Path(trace_path))
        series.insert(0, (trace.freqs, np.abs(trace.values), "#1f77b4", None))
        plane_points = 1.0 / trace.values
    svg.line_plot(out / "report_magnitude.svg", series,
                  xlabel="frequency (Hz)", ylabel="|S21|", title="fit report")
    svg.line_plot(out / "report_phase.svg",
                  [(freqs, np.angle(model), "#d62728", "5,3")],
                  xlabel="frequency (Hz)", ylabel="phase (rad)", title="fit report")
    svg.plane_plot(out / "report_plane.svg", plane_points, curve=model_inv,
                   title="inverse plane")
    p = report["params"]
    u = report["uncertainties"]
    print("report: f0 = %s +- %s Hz" % (format_number(p["f0"]), format_number(u["f0"])))
    print("        Qi = %s +- %s" % (format_number(p["Qi"]), format_number(u["Qi"])))
    print("        Qc = %s +- %s" % (format_number(p["Qc"]), format_number(u["Qc"])))
    print("        phi = %s +- %s rad" % (format_number(p["phi"]), format_number(u["phi"])))
    print("        residual rms = %s, converged = %s"
          % (format_number(report["residual_rms"]), report["converged"]))
    return 0


# ---------------------------------------------------------------------------
# argument plumbing


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--out-dir", dest="out_dir", help="output directory (default .)")
    p.add_argument("--format", help="comma list from csv,json,svg (default csv,json)")


def _add_system(p: argparse.ArgumentParser):
    p.add_argument("--f-q", dest="f_q", type=float,
                   help="qubit frequency Hz (default 4.86e9, device-measured)")
    p.add_argument("--f-r", dest="f_r", type=float,
                   help="primary mode frequency Hz (default 4.86e9, device-measured)")
    p.add_argument("--f-spur", dest="f_spur", type=float,
                   help="spurious mode frequency Hz (default 4.87e9, device-measured)")
    p.add_argument("--splitting", type=float,
                   help="primary splitting 2g in Hz (default 11.2e6, device-measured maximum)")
    p.add_argument("--splitting-spur", dest="splitting_spur", type=float,
                   help="spurious splitting in Hz (default 3.5e6, device-measured)")
    p.add_argument("--t1-qb", dest="t1_qb", type=float,
                   help="qubit T1 in s (default 10e-6, device-measured)")
    p.add_argument("--t2-qb", dest="t2_qb", type=float,
                   help="qubit Ramsey T2 in s (default 1e-6, device-measured)")
    p.add_argument("--t1-r", dest="t1_r", type=float,
                   help="phonon lifetime in s (default 178e-9, device-measured)")
    p.add_argument("--t1-spur", dest="t1_spur", type=float,
                   help="spurious lifetime in s (default 70e-9, model extraction)")
    p.add_argument("--fock-primary", dest="fock_primary", type=int,
                   help="Fock levels for the primary mode")
    p.add_argument("--fock-spur", dest="fock_spur", type=int,
                   help="Fock levels for the spurious mode")
    p.add_argument("--dt", type=float, help="integrator step in s (default 1e-10)")
    p.add_argument("--coupler-loss", dest="coupler_loss", type=float,
                   help="extra qubit loss rate 1/s while the coupler is on (default 0)")
    p.add_argument("--workers", type=int,
                   help="scan worker threads (QBARTOOLS_WORKERS overrides)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qbar",
        description="Acoustic-resonator transmission fitting and qubit-phonon simulation")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic transmission trace")
    _add_common(p)
    p.add_argument("--model", help="lineshape (default) or bvd")
    p.add_argument("--f0", type=float, help="resonance Hz (default 4.88e9, device-measured)")
    p.add_argument("--qi", type=float,
                   help="internal Q (default 4.3e4 cryogenic device value; 1.0e3 at room temperature)")
    p.add_argument("--qc", type=float, help="coupling Q (default 1e4, synthetic)")
    p.add_argument("--phi", type=float, help="asymmetry phase rad (default 0, synthetic)")
    p.add_argument("--c0", type=float, help="shunt capacitance F for --model bvd (synthetic)")
    p.add_argument("--noise-sigma", dest="noise_sigma", type=float,
                   help="complex noise scale (default 0)")
    p.add_argument("--seed", type=int, help="RNG seed, required when noise > 0")
    p.add_argument("--core-linewidths", dest="core_linewidths", type=float)
    p.add_argument("--wing-linewidths", dest="wing_linewidths", type=float)
    p.add_argument("--core-points", dest="core_points", type=int)
    p.add_argument("--wing-points", dest="wing_points", type=int)
    p.add_argument("--baseline-amp", dest="baseline_amp", type=float)
    p.add_argument("--baseline-slope", dest="baseline_slope", type=float)
    p.add_argument("--baseline-phase", dest="baseline_phase", type=float)
    p.add_argument("--baseline-delay", dest="baseline_delay", type=float)
    p.add_argument("--touchstone", help="also write s2p when set to 's2p'")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="fit a measured or synthetic trace")
    _add_common(p)
    p.add_argument("--input", help="trace file (.csv, .s1p, .s2p)")
    p.add_argument("--edge-fraction", dest="edge_fraction", type=float,
                   help="edge fraction for baseline windows (default 0.2)")
    p.add_argument("--tol", type=float, help="fit tolerance (default 1e-10)")
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sim-eigen", help="single-excitation branch frequencies")
    _add_common(p)
    _add_system(p)
    p.add_argument("--fq-start", dest="fq_start", type=float)
    p.add_argument("--fq-stop", dest="fq_stop", type=float)
    p.add_argument("--fq-points", dest="fq_points", type=int)
    p.set_defaults(func=cmd_sim_eigen)

    p = sub.add_parser("sim-spectroscopy", help="weak-tone spectroscopy map")
    _add_common(p)
    _add_system(p)
    p.add_argument("--amplitude", type=float,
                   help="drive Rabi rate Hz (default 1e5: gentle tone)")
    p.add_argument("--duration", type=float, help="tone length s (default 1e-6)")
    p.add_argument("--fq-start", dest="fq_start", type=float)
    p.add_argument("--fq-stop", dest="fq_stop", type=float)
    p.add_argument("--fq-points", dest="fq_points", type=int)
    p.add_argument("--drive-start", dest="drive_start", type=float)
    p.add_argument("--drive-stop", dest="drive_stop", type=float)
    p.add_argument("--drive-points", dest="drive_points", type=int)
    p.set_defaults(func=cmd_sim_spectroscopy)

    p = sub.add_parser("sim-t1", help="phonon lifetime swap sequence")
    _add_common(p)
    _add_system(p)
    p.add_argument("--delay-max", dest="delay_max", type=float,
                   help="largest storage delay s (default 1e-6)")
    p.add_argument("--delay-points", dest="delay_points", type=int)
    p.set_defaults(func=cmd_sim_t1)

    p = sub.add_parser("sim-chevron", help="qubit-resonator Rabi swap map")
    _add_common(p)
    _add_system(p)
    p.add_argument("--detuning-span", dest="detuning_span", type=float,
                   help="full qubit detuning span Hz (default 50e6)")
    p.add_argument("--fq-points", dest="fq_points", type=int)
    p.add_argument("--time-max", dest="time_max", type=float)
    p.add_argument("--time-points", dest="time_points", type=int)
    p.set_defaults(func=cmd_sim_chevron)

    p = sub.add_parser("report", help="render plots from a stored fit report")
    _add_common(p)
    p.add_argument("--input", help="fit_report.json")
    p.add_argument("--trace", help="optional trace file to overlay")
    p.set_defaults(func=cmd_report)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        opt = Options(args)
        return args.func(opt)
    except QbarError as exc:
        json.dump({"error": type(exc).__name__, "detail": str(exc)},
                  sys.stderr, sort_keys=True)
        sys.stderr.write("\n")
        return 1
    except OSError as exc:
        json.dump({"error": type(exc).__name__, "detail": str(exc)},
                  sys.stderr, sort_keys=True)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
