import numpy as np
import pytest

from optomagnon import oracle
from optomagnon.model import SweepSpec, paper_preset, with_config_value
from optomagnon.response import group_delay, susceptibility
from optomagnon.steady_state import derive_state, solve_self_consistent

# pairs (c, c+*), (a, a+*), (m, m+*) swap under conjugation; q1, q2 stay
SWAP = [1, 0, 3, 2, 5, 4, 6, 7]


def state(fid="fig2e", **over):
    p, _ = paper_preset(fid)
    for k, v in over.items():
        p = with_config_value(p, k, v)
    return derive_state(p)


def grid(st, n=201):
    return np.linspace(0.01, 2, n) * st.params.omega_b1


def test_linear_in_probe_amplitude():
    st = state()
    d = grid(st, 11)
    A, b = oracle.sideband_system(st, d)
    A3, b3 = oracle.sideband_system(st, d, eps_p=3.0)
    x = np.linalg.solve(A, b[..., None])[..., 0]
    x3 = np.linalg.solve(A3, b3[..., None])[..., 0]
    np.testing.assert_allclose(x3, 3 * x, rtol=1e-13)


def test_conjugation_symmetry():
    st = state()
    d = grid(st, 7)
    A, _ = oracle.sideband_system(st, d)
    Am, _ = oracle.sideband_system(st, -d)
    np.testing.assert_allclose(np.conj(Am)[:, SWAP][:, :, SWAP], A, rtol=1e-15, atol=0)


def test_solution_residual():
    st = state()
    sol = oracle.solve_sidebands(st, grid(st))
    assert sol.residual.max() < 1e-13
    assert sol.vector().shape == (201, 8)


def test_decoupled_cavity():
    st = state(G_c1=0.0, G_c2=0.0)
    d = grid(st)
    sol = oracle.solve_sidebands(st, d)
    np.testing.assert_allclose(sol.c_minus, 1 / (st.params.kappa_c + 1j * (st.Delta_c_eff - d)),
                               rtol=1e-14)
    assert np.all(sol.q1_minus == 0) and np.all(sol.q2_minus == 0)


def test_singular_point_reported():
    st = state()
    with pytest.raises(oracle.SingularSystemError):
        oracle.solve_sidebands(st, np.array([1.0, np.nan]))


@pytest.mark.parametrize("fid", ["fig2a", "fig2e", "fig5a_fano", "fig_phase_d", "fig8"])
def test_closed_form_matches(fid):
    st = state(fid)
    rep = oracle.verify_closed_form(st, SweepSpec(0, 2, 801), tol=1e-9, label=fid)
    assert rep.passed, rep.as_dict()
    assert rep.max_rel_err < 1e-12


def test_self_consistent_matches():
    p = oracle.random_first_principles(np.random.default_rng(3))
    st = solve_self_consistent(p)
    rep = oracle.verify_closed_form(st, grid(st), tol=1e-9)
    assert rep.passed


def test_group_delay_exact_derivative():
    st = state("fig6b")
    d = np.linspace(0.9, 1.1, 101) * st.params.omega_b1
    exact = oracle.oracle_group_delay(st, d)
    np.testing.assert_allclose(group_delay(st, d, check=False), exact, rtol=1e-6)


def test_decoupled_poles():
    st = state(G_c1=0.0, G_c2=0.0, G_m=0.0, g_a=0.0, lambda_over_kappa_c=0.0)
    poles = oracle.response_poles(st)
    p = st.params
    assert np.min(np.abs(poles - (st.Delta_c_eff - 1j * p.kappa_c))) < 1e-6 * p.omega_b1
    assert np.all(poles.imag < 0)


def test_fig2e_is_dynamically_unstable():
    st = state()
    assert oracle.response_poles(st).imag.max() / st.params.omega_b1 > 0.05


def test_near_pole_mask():
    st = state(G_c1=0.0, G_c2=0.0, G_m=0.0, g_a=0.0, lambda_over_kappa_c=0.0)
    wb = st.params.omega_b1
    mask = oracle.near_pole_mask(st, np.array([wb, 1.5 * wb]))
    assert mask.tolist() == [True, False]


class TestCoefficientAudit:
    def test_calligraphic_reading_exact(self):
        st = state()
        res = oracle.coefficient_audit(st, grid(st), "calligraphic")
        assert res["first_deviating"] is None
        assert max(res["max_rel_err"].values()) < 1e-11

    def test_steady_state_reading_fails_at_B(self):
        st = state()
        res = oracle.coefficient_audit(st, grid(st), "steady_state")
        assert res["first_deviating"] == "B_cal"


def test_random_draws_pass():
    res = oracle.random_draws(40, seed=5)
    assert res["pass"] and res["n_checked"] == 40
    assert res["max_rel_err"] < 1e-11


def test_tolerance_below_precision_fails():
    st = state()
    assert not oracle.verify_closed_form(st, grid(st), tol=1e-17).passed


def test_ledger_deterministic():
    a = oracle.discrepancy_ledger(seed=7, n_draws=10)
    b = oracle.discrepancy_ledger(seed=7, n_draws=10)
    assert a == b
    assert a["pass"]
    assert a["stability"]["unstable"]
