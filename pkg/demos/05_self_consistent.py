"""
Self-consistent steady state
============================

Starting from bare detunings and single-photon couplings, the static
mechanical displacements shift the cavity and magnon detunings.  A damped
fixed-point iteration closes the loop.
"""
import warnings

from optomagnon import build_params, derive_state
from optomagnon.steady_state import (ApproximationWarning, magnon_steady_approx,
                                     magnon_steady_closed_form, magnon_steady_exact,
                                     steady_state_residuals)

config = {
    "omega_b": 10e6, "gamma_b": 100.0,
    "kappa_c": 2e6, "kappa_a": 1.5e6, "kappa_m": 1.5e6,
    "g_a": 2.4e6, "lambda_over_kappa_c": 0.5, "theta": 0.0, "Delta_a": -10e6,
    "first_principles": {"Delta_c": 10e6, "Delta_m": -10e6, "g_1": 20.0, "g_2": 30.0,
                         "g_m": 5.0, "eps_L": 8e11, "Omega": 1e11},
}
params = build_params(config)
state = derive_state(params)
print(f"converged in {state.iterations} iterations")
print(f"Delta_c_eff / 2pi = {state.Delta_c_eff / 6.283185307179586 / 1e6:.6f} MHz")
print(f"G_c1 = sqrt2 g_1 |c_s| -> {2 ** 0.5 * state.G1 / 6.283185307179586 / 1e6:.4f} MHz")
print("residuals:", steady_state_residuals(state))

# %%
# Magnon amplitude three ways: exact real 2x2 solve, rational closed form
# (with the lambda^2 sign that matches), and the high-detuning approximation.
Dm = state.Delta_m_eff
m, _ = magnon_steady_exact(params, Dm)
print("exact      ", m)
print("closed form", magnon_steady_closed_form(params, Dm, lambda_sign=-1))
with warnings.catch_warnings():
    warnings.simplefilter("ignore", ApproximationWarning)
    print("approx     ", magnon_steady_approx(params, Dm))

# %%
# Push the drive harder and the damped iteration stops settling; the solver
# reports that instead of returning an arbitrary branch.
from optomagnon.steady_state import BistabilityError

strong = dict(config, first_principles=dict(config["first_principles"], eps_L=1.5e12))
try:
    derive_state(build_params(strong))
except BistabilityError as exc:
    print("bistable:", exc)
    print("last iterates:", exc.last_iterates)
