"""Synthetic trace generation for tests, demos, and calibration runs."""

from __future__ import annotations

import numpy as np

from .bvd import BvdParams, LineImpedance, ResonanceParams, s21_from_bvd, s21_model
from .errors import ValidationError
from .fitting import BaselineModel, ComplexTrace


def resonance_grid(f0: float, qi: float, core_halfwidth: float = 25.0,
                   wing_halfwidth: float = 2000.0, n_core: int = 601,
                   n_wing: int = 300) -> np.ndarray:
    """Scan grid in Hz: a dense uniform core plus geometric far wings.

    Widths are in units of the linewidth f0/qi.  The wings put the window
    edges far enough out that the line shape is indistinguishable from 1
    there, which is what the edge-window normalization assumes.  The wing
    reach is clamped to 0.45 qi linewidths so the grid stays at positive
    frequencies for low-Q resonances.
    """
    wing_halfwidth = min(wing_halfwidth, 0.45 * qi)
    if core_halfwidth <= 0 or wing_halfwidth <= core_halfwidth:
        raise ValidationError("need 0 < core_halfwidth < wing_halfwidth")
    if n_core < 2 or n_wing < 0:
        raise ValidationError("need n_core >= 2 and n_wing >= 0")
    lw = f0 / qi
    core = np.linspace(-core_halfwidth, core_halfwidth, n_core)
    if n_wing:
        wing = np.geomspace(core_halfwidth, wing_halfwidth, n_wing + 1)[1:]
        offsets = np.concatenate([-wing[::-1], core, wing])
    else:
        offsets = core
    return f0 + offsets * lw


def synth_trace(model, grid, baseline: BaselineModel | None = None,
                noise_sigma: float = 0.0, seed=None,
                line: LineImpedance = LineImpedance()) -> ComplexTrace:
    """Sample a line-shape model on a grid, with optional baseline and noise.

    model is either ResonanceParams (normalized transmission) or BvdParams
    (raw circuit transmission in a matched line).  Noise is complex Gaussian,
    independent per point, with E|n|^2 = noise_sigma^2, added after the
    baseline is applied.  Deterministic for a fixed seed.
    """
    grid = np.asarray(grid, dtype=float)
    if isinstance(model, ResonanceParams):
        values = s21_model(model, grid)
        label = "synthetic-lineshape"
    elif isinstance(model, BvdParams):
        values = s21_from_bvd(model, grid, line)
        label = "synthetic-bvd"
    else:
        raise ValidationError("model must be ResonanceParams or BvdParams")

    if baseline is not None:
        values = values * baseline(grid)
    if noise_sigma < 0:
        raise ValidationError("noise_sigma must be >= 0")
    if noise_sigma > 0:
        if seed is None:
            raise ValidationError("a seed is required for noisy synthesis")
        rng = np.random.default_rng(seed)
        noise = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
        values = values + noise_sigma / np.sqrt(2.0) * noise

    meta = {"source": label, "reference_impedance": line.Z0,
            "noise_sigma": noise_sigma}
    if seed is not None:
        meta["seed"] = seed
    return ComplexTrace(grid, values, meta)
