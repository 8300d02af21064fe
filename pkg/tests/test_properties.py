"""Randomised invariants of the model, the response and the analysis layer."""
import dataclasses
import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from optomagnon import analysis, oracle, response
from optomagnon.model import (PRESETS, DetuningMode, FirstPrinciples, Prescribed, SystemParams,
                              build_params, emit_config, paper_preset, with_config_value)
from optomagnon.steady_state import (ApproximationWarning, BistabilityError, DegenerateDriveError,
                                     derive_state, magnon_steady_approx, magnon_steady_closed_form,
                                     magnon_steady_exact, solve_self_consistent,
                                     steady_state_residuals)

TWO_PI = 2 * math.pi
seeds = st.integers(0, 2 ** 32 - 1)
pos = st.floats(1.0, 1e9, allow_nan=False)
signed = st.floats(-1e9, 1e9, allow_nan=False)
nonneg = st.floats(0.0, 1e9, allow_nan=False)


@st.composite
def configs(draw, mode="prescribed"):
    cfg = {k: draw(pos) for k in ("omega_b1", "omega_b2", "kappa_c", "kappa_a", "kappa_m",
                                  "gamma_b1", "gamma_b2")}
    cfg.update(g_a=draw(nonneg), lambda_sq=draw(nonneg), Delta_a=draw(signed),
               theta=draw(st.floats(-10, 10)), eps_p=draw(st.floats(1e-6, 1e6)))
    if mode == "prescribed":
        cfg["prescribed"] = {"Delta_c_eff": draw(signed), "Delta_m_eff": draw(signed),
                             "G_c1": draw(nonneg), "G_c2": draw(nonneg), "G_m": draw(nonneg)}
    else:
        cfg["first_principles"] = {k: draw(signed) for k in
                                   ("Delta_c", "Delta_m", "g_1", "g_2", "g_m", "eps_L", "Omega")}
    return cfg


def rng_params(seed):
    return oracle.random_params(np.random.default_rng(seed))


def scaled(p: SystemParams, s: float) -> SystemParams:
    top = {k: getattr(p, k) * s for k in ("omega_b1", "omega_b2", "kappa_c", "kappa_a", "kappa_m",
                                          "gamma_b1", "gamma_b2", "g_a", "lambda_sq", "Delta_a")}
    pr = p.prescribed
    blk = Prescribed(*(getattr(pr, f.name) * s for f in dataclasses.fields(Prescribed)))
    return p.replace(prescribed=blk, **top)


# ---------------------------------------------------------------- model

@given(configs())
def test_round_trip_prescribed(cfg):
    p = build_params(cfg)
    assert build_params(emit_config(p)) == p


@given(configs("first_principles"))
def test_round_trip_first_principles(cfg):
    p = build_params(cfg)
    assert build_params(emit_config(p)) == p


@given(configs())
def test_unit_convention(cfg):
    p = build_params(cfg)
    for k in ("omega_b1", "kappa_c", "gamma_b2", "g_a", "lambda_sq", "Delta_a"):
        assert getattr(p, k) == TWO_PI * cfg[k]
    for k, v in cfg["prescribed"].items():
        assert getattr(p.prescribed, k) == TWO_PI * v
    assert p.theta == cfg["theta"]


# ---------------------------------------------------------------- steady state

@st.composite
def magnon_params(draw, squeeze=True):
    wb = 1e7
    cfg = {"omega_b": wb, "gamma_b": 100.0, "kappa_c": 2e6,
           "kappa_a": draw(st.floats(0.02, 0.5)) * wb, "kappa_m": draw(st.floats(0.02, 0.5)) * wb,
           "g_a": draw(st.floats(0, 0.5)) * wb,
           "lambda_sq": draw(st.floats(0, 0.3)) * wb if squeeze else 0.0,
           "theta": 0.0, "Delta_a": draw(st.floats(-2, 2)) * wb,
           "first_principles": {"Delta_c": wb, "Delta_m": draw(st.floats(-2, 2)) * wb,
                                "g_1": 1.0, "g_2": 1.0, "g_m": 1.0, "eps_L": 1.0,
                                "Omega": draw(st.floats(1e3, 1e9))}}
    return build_params(cfg)


@settings(max_examples=300)
@given(magnon_params())
def test_closed_form_with_corrected_sign(p):
    Dm = p.first_principles.Delta_m
    P = complex(p.kappa_m, Dm) + p.g_a ** 2 / complex(p.kappa_a, p.Delta_a)
    assume(abs(abs(P) ** 2 - 4 * p.lambda_sq ** 2) > 1e-6 * abs(P) ** 2)
    m, _ = magnon_steady_exact(p, Dm)
    cf = magnon_steady_closed_form(p, Dm, lambda_sign=-1)
    assert abs(cf - m) <= 1e-12 * abs(m)


@given(magnon_params(squeeze=False))
def test_closed_form_plus_sign_without_squeezing(p):
    Dm = p.first_principles.Delta_m
    m, _ = magnon_steady_exact(p, Dm)
    assert abs(magnon_steady_closed_form(p, Dm) - m) <= 1e-12 * abs(m)


@given(magnon_params(squeeze=False))
def test_approx_converges_as_damping_vanishes(p):
    Dm = p.first_principles.Delta_m
    assume(abs(Dm) > 0.05 * p.omega_b1 and abs(p.Delta_a) > 0.05 * p.omega_b1)
    assume(abs(Dm * p.Delta_a - p.g_a ** 2) > 1e-3 * p.omega_b1 ** 2)
    devs = []
    for s in (1, 1000, 2000):
        q = p.replace(kappa_a=p.kappa_a / s, kappa_m=p.kappa_m / s)
        m, _ = magnon_steady_exact(q, Dm)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ApproximationWarning)
            devs.append(abs(magnon_steady_approx(q, Dm) - m) / abs(m))
    # first-order convergence: halving kappa halves the deviation
    assert devs[1] < devs[0]
    assert devs[1] / devs[2] == pytest.approx(2.0, rel=0.05)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_self_consistent_residuals(seed):
    p = oracle.random_first_principles(np.random.default_rng(seed))
    try:
        state = solve_self_consistent(p)
    except (BistabilityError, DegenerateDriveError):
        assume(False)
    assert max(steady_state_residuals(state).values()) < 1e-10


# ---------------------------------------------------------------- response

@given(seeds, st.floats(0, 3))
def test_decoupled_exactness(seed, x):
    p = rng_params(seed)
    p = with_config_value(with_config_value(p, "G_c1", 0.0), "G_c2", 0.0)
    s = derive_state(p)
    d = x * p.omega_b1
    expected = 2 * p.kappa_c / complex(p.kappa_c, s.Delta_c_eff - d)
    assert response.output_field(s, d) == pytest.approx(expected, rel=1e-14, abs=1e-300)


@given(seeds)
def test_theta_irrelevant_without_squeezing(seed):
    p = with_config_value(rng_params(seed), "lambda_sq", 0.0)
    d = np.linspace(0, 2, 51) * p.omega_b1
    ref = response.output_field(derive_state(p.replace(theta=0.0)), d)
    for th in (math.pi / 3, math.pi):
        np.testing.assert_array_equal(response.output_field(derive_state(p.replace(theta=th)), d), ref)


@settings(deadline=None)
@given(seeds, st.floats(1e-3, 1e3))
def test_scale_invariance(seed, s):
    p = rng_params(seed)
    d = np.linspace(0.05, 2, 41) * p.omega_b1
    a, b = derive_state(p), derive_state(scaled(p, s))
    np.testing.assert_allclose(response.output_field(b, d * s), response.output_field(a, d),
                               rtol=1e-9, atol=1e-12)
    tau_a = response.group_delay(a, d, check=False)
    tau_b = response.group_delay(b, d * s, check=False)
    np.testing.assert_allclose(tau_b * s, tau_a, rtol=1e-6, atol=1e-9 * np.abs(tau_a).max())


@settings(deadline=None)
@given(seeds)
def test_derivative_forms_agree(seed):
    p = rng_params(seed)
    s = derive_state(p)
    d = np.linspace(0.02, 2, 64) * p.omega_b1
    T = lambda x: response.transmission(s, x)
    keep = np.abs(T(d)) > 1e-6
    h = 1e-7 * p.omega_b1
    # unwrapped phase difference over a short symmetric step
    dphi = np.angle(T(d + h) / T(d - h)) / (2 * h)
    exact = oracle.oracle_group_delay(s, d)
    assume(np.all(np.abs(exact[keep]) > 1e-6 * np.abs(exact).max()))
    np.testing.assert_allclose(dphi[keep], exact[keep], rtol=1e-3)


@pytest.mark.parametrize("fid", list(PRESETS))
def test_step_halving_at_extrema(fid):
    params, sweep = paper_preset(fid)
    values = sweep.swept_param[1] if sweep.swept_param else [None]
    for v in values:
        p = params if v is None else with_config_value(params, sweep.swept_param[0], v)
        s = derive_state(p)
        ext = analysis.delay_extrema(s, sweep)
        assert ext
        ratio = response.step_halving_ratio(s, np.array([e[0] for e in ext]))
        assert np.all(ratio < 1e-3)


@given(seeds, st.floats(0.01, 2.0))
def test_oracle_linearity(seed, x):
    s = derive_state(rng_params(seed))
    d = np.array([x * s.params.omega_b1])
    A, b = oracle.sideband_system(s, d)
    A2, b2 = oracle.sideband_system(s, d, eps_p=-2.5)
    assume(np.linalg.cond(A[0]) < 1e10)
    x1 = np.linalg.solve(A[0], b[0])
    x2 = np.linalg.solve(A2[0], b2[0])
    np.testing.assert_allclose(x2, -2.5 * x1, rtol=1e-9, atol=1e-12 * np.abs(x1).max())


@given(seeds, st.floats(0.01, 2.0))
def test_oracle_conjugation(seed, x):
    s = derive_state(rng_params(seed))
    d = np.array([x * s.params.omega_b1])
    swap = [1, 0, 3, 2, 5, 4, 6, 7]
    A, _ = oracle.sideband_system(s, d)
    Am, _ = oracle.sideband_system(s, -d)
    np.testing.assert_array_equal(np.conj(Am[0])[swap][:, swap], A[0])


# ---------------------------------------------------------------- analysis

X = np.linspace(0, 2, 1201)


@st.composite
def spectra(draw):
    y = np.zeros_like(X)
    for _ in range(draw(st.integers(1, 5))):
        x0, w, amp = draw(st.floats(0.1, 1.9)), draw(st.floats(0.005, 0.3)), draw(st.floats(-2, 2))
        y += amp * w ** 2 / ((X - x0) ** 2 + w ** 2)
    return y


@given(spectra(), st.floats(-100, 100))
def test_windows_offset_invariant(y, c):
    assume(abs(c) < 1e3)
    a = analysis.find_windows((X, y))
    b = analysis.find_windows((X, y + c))
    assert a.window_count == b.window_count
    assert [d[0] for d in a.dips] == [d[0] for d in b.dips]


@given(spectra())
def test_windows_interleave(y):
    rep = analysis.find_windows((X, y), prominence_threshold=0.0)
    kinds = [k for _, k in sorted([(p[0], 1) for p in rep.peaks] + [(d[0], 0) for d in rep.dips])]
    assert all(a != b for a, b in zip(kinds, kinds[1:]))


@given(spectra())
def test_fano_mirror_symmetric_is_zero(y):
    z = y + y[::-1]
    assert analysis.fano_asymmetry((X, z), 1.0, 0.5).asymmetry < 1e-12


@pytest.mark.parametrize("fid", ["fig5a_fano", "fig5b_fano", "fig2e"])
def test_fano_refinement(fid):
    p, _ = paper_preset(fid)
    s = derive_state(p)
    scores = []
    for n in (4001, 8001, 16001):
        sp = response.evaluate(s, np.linspace(0, 2, n) * p.omega_b1)
        scores.append(analysis.fano_asymmetry(sp).asymmetry)
    assert abs(scores[1] - scores[0]) < 1e-3 * scores[0]
    assert abs(scores[2] - scores[1]) < 1e-3 * scores[1]


@given(st.floats(-5, 5), st.floats(0.01, 5), st.floats(-1, 2), st.booleans())
def test_refinement_stays_in_bracket(a, w, c, maximize):
    b = a + w
    x0 = a + c * w
    f = (lambda x: -(x - x0) ** 2) if maximize else (lambda x: (x - x0) ** 2)
    t = analysis.golden_section(f, a, b, maximize=maximize)
    assert a <= t <= b
