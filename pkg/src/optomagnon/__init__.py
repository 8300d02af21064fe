"""Linear probe response of a squeezed-magnon opto-magnomechanical system."""
from .model import (ConfigError, DetuningMode, FirstPrinciples, Prescribed, PRESETS,
                    SweepSpec, SystemParams, build_params, emit_config, paper_preset,
                    with_config_value)
from .steady_state import DerivedState, derive_state, freeze_prescribed, solve_self_consistent
from .response import (Spectrum, evaluate, group_delay, output_field, phase, probe_sideband,
                       spectrum, susceptibility, sweep_spectra, transmission)
from .oracle import solve_sidebands, verify_closed_form
from .analysis import delay_extrema, fano_asymmetry, find_windows

__version__ = "0.1.0"
