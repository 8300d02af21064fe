"""
Closed form against the sideband-matrix oracle
==============================================

The closed-form probe response eliminates the mechanical, magnon and
microwave sidebands by hand.  The oracle keeps all eight sideband
amplitudes and solves the linear system directly.
"""
import numpy as np

from optomagnon import derive_state, paper_preset
from optomagnon.oracle import coefficient_audit, random_draws, solve_sidebands, verify_closed_form
from optomagnon.response import susceptibility

params, sweep = paper_preset("fig2e")
state = derive_state(params)
d = sweep.deltas(params.omega_b1)

sol = solve_sidebands(state, d)
closed = susceptibility(state, d)
print("max rel err:", np.max(np.abs(closed - sol.c_minus) / np.abs(sol.c_minus)))
print(verify_closed_form(state, sweep, label="fig2e").as_dict())

# %%
# Coefficient-by-coefficient audit.  The "steady_state" reading of the
# ambiguous factor inside B, C and D is dimensionally wrong; the audit shows
# where it first departs from the oracle.
for reading in ("calligraphic", "steady_state"):
    res = coefficient_audit(state, d[1:], reading)
    print(reading, "first deviating:", res["first_deviating"])

# %%
print({k: v for k, v in random_draws(200, seed=1).items() if k != "failures"})
