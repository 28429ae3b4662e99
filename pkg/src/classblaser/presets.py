"""Named parameter sets covering the four laser size regimes.

Each preset fixes the device rates (in units of the spontaneous decay
rate big_gamma), the RK4 step they are known to integrate accurately,
and a pair of starting Fock cutoffs: a small ladder suffices below
threshold, while near and above threshold the photon distribution needs
room before auto-growth takes over.  ``preset_options`` picks the right
starting cutoff for a given pump from the device's own threshold.

single-atom      one emitter in a leaky cavity; no threshold at all
nanoscopic       ten strongly coupled atoms; thresholds blur and shift
mesoscopic       1e5 atoms; sharp kink, visible finite-size correction
thermodynamic    1e6 weakly coupled atoms; textbook limit, beta -> 0
"""

from __future__ import annotations

from dataclasses import dataclass

from .analytics import class_a_like_threshold
from .errors import ConfigError
from .integrate import IntegrationOptions
from .model import ModelParams


@dataclass(frozen=True)
class RegimePreset:
    name: str
    params: ModelParams        # pump left at 0; set per run
    h: float                   # RK4 step adequate for these rates
    cutoff_low: int            # starting ladder below threshold
    cutoff_high: int           # starting ladder near/above threshold
    switch_frac: float | None  # pump / lambda_th0 above which "high" applies
    note: str


PRESETS = {
    "single-atom": RegimePreset(
        name="single-atom",
        params=ModelParams(kappa=100.0, gamma_h=1e3, big_gamma=1.0,
                           g=10.0, n_atoms=1.0),
        h=1e-5, cutoff_low=50, cutoff_high=50, switch_frac=None,
        note="one atom: thresholdless, sub-Poissonian at strong pumping"),
    "nanoscopic": RegimePreset(
        name="nanoscopic",
        params=ModelParams(kappa=10.0, gamma_h=1e3, big_gamma=1.0,
                           g=50.0, n_atoms=10.0),
        h=1e-5, cutoff_low=50, cutoff_high=100, switch_frac=0.75,
        note="ten atoms, strong coupling: smeared threshold"),
    "mesoscopic": RegimePreset(
        name="mesoscopic",
        params=ModelParams(kappa=100.0, gamma_h=1e4, big_gamma=1.0,
                           g=10.0, n_atoms=1e5),
        h=1e-5, cutoff_low=50, cutoff_high=300, switch_frac=0.75,
        note="1e5 atoms: sharp threshold with finite-size shift"),
    "thermodynamic": RegimePreset(
        name="thermodynamic",
        params=ModelParams(kappa=100.0, gamma_h=1e4, big_gamma=1.0,
                           g=1.0, n_atoms=1e6),
        h=2e-6, cutoff_low=50, cutoff_high=2200, switch_frac=1.0,
        note="1e6 atoms, weak coupling: textbook limit"),
}


def get_preset(name: str) -> RegimePreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; "
                          f"choose from {sorted(PRESETS)}") from None


def preset_options(preset: RegimePreset | str, pump: float,
                   **overrides) -> IntegrationOptions:
    """Integrator options tuned to a preset at the given pump.

    Starts from the preset step and the pump-appropriate cutoff; any
    keyword accepted by :class:`IntegrationOptions` overrides.
    """
    if isinstance(preset, str):
        preset = get_preset(preset)
    cutoff = preset.cutoff_low
    if preset.switch_frac is not None:
        lam0 = class_a_like_threshold(preset.params)
        if lam0 is not None and pump > preset.switch_frac * lam0:
            cutoff = preset.cutoff_high
    fields = dict(h=preset.h, cutoff=cutoff)
    fields.update(overrides)
    return IntegrationOptions(**fields)
