"""
Group delay and slow/fast light
===============================

tau = Im[T'/T] is taken from a central difference of the complex
transmission, so no phase unwrapping is needed.  tau > 0 is slow light.
"""
import numpy as np

from optomagnon import (delay_extrema, derive_state, paper_preset, sweep_spectra,
                        with_config_value)
from optomagnon.analysis import near_resonance_delay
from optomagnon.oracle import oracle_group_delay, response_poles
from optomagnon.response import step_halving_ratio

# %%
# Delay near the mechanical resonance for several microwave-magnon couplings.
params, sweep = paper_preset("fig6a")
for g_a, sp in sweep_spectra(params, sweep):
    x, tau = near_resonance_delay(sp.state)
    print(f"g_a = {g_a / 1e6:.1f} MHz: tau = {tau * 1e6:+.4f} us at delta/omega_b = {x:.4f}")

# %%
# All local extrema over the full grid, refined by golden-section search,
# with a step-halving self-check of the finite difference.
state = derive_state(with_config_value(params, "g_a", 3e6))
ext = delay_extrema(state, sweep)
ratios = step_halving_ratio(state, np.array([d for d, _, _ in ext]))
for (d, tau, kind), r in zip(ext, ratios):
    print(f"{kind:>9} at {d / params.omega_b1:.5f}: {tau * 1e6:+.4f} us (halving {r:.1e})")

# %%
# The sideband solve gives an exact derivative to compare with.
d = np.array([e[0] for e in ext])
print("exact:", oracle_group_delay(state, d) * 1e6)

# %%
# Poles of the linearised dynamics; a positive imaginary part means the
# steady state is not dynamically stable and the response is formal.
poles = response_poles(state)
print(f"largest Im(pole)/omega_b = {poles.imag.max() / params.omega_b1:+.4f}")
