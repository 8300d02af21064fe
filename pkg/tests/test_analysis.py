import numpy as np
import pytest

from optomagnon.analysis import (GridError, delay_extrema, fano_asymmetry, find_windows,
                                 golden_section, local_extrema, near_resonance_delay)
from optomagnon.model import SweepSpec, paper_preset, with_config_value
from optomagnon.response import spectrum
from optomagnon.steady_state import derive_state


def lorentz(x, x0, w):
    return w ** 2 / ((x - x0) ** 2 + w ** 2)


def two_dip_line(x):
    # broad absorption line with two narrow transparency dips
    return 2 * lorentz(x, 1.0, 0.4) - 0.8 * lorentz(x, 0.9, 0.01) - 0.6 * lorentz(x, 1.1, 0.01)


X = np.linspace(0, 2, 2001)


def test_local_extrema_plateau_counted_once():
    y = np.array([0, 1, 1, 0, -1, -1, 0])
    mx, mn = local_extrema(y)
    assert mx.tolist() == [1] and mn.tolist() == [4]


def test_two_windows():
    rep = find_windows((X, two_dip_line(X)))
    assert rep.window_count == 2
    assert len(rep.peaks) == 3
    assert [round(d[0], 2) for d in rep.dips] == [0.9, 1.1]


def test_peaks_and_dips_interleave():
    rep = find_windows((X, two_dip_line(X)))
    xs = sorted([(p[0], "p") for p in rep.peaks] + [(d[0], "d") for d in rep.dips])
    kinds = [k for _, k in xs]
    assert all(a != b for a, b in zip(kinds, kinds[1:]))


def test_threshold_is_absolute():
    y = two_dip_line(X)
    assert find_windows((X, y), prominence_threshold=10.0).window_count == 0
    assert find_windows((X, 0.01 * y)).window_count == 0


def test_no_dips_in_plain_lorentzian():
    assert find_windows((X, lorentz(X, 1.0, 0.1))).window_count == 0


def test_coarse_grid():
    x = np.linspace(0, 2, 100)
    with pytest.raises(GridError, match="coarse"):
        find_windows((x, lorentz(x, 1, 0.1)))


def test_nonuniform_grid():
    x = np.linspace(0, 1.4, 200) ** 2
    with pytest.raises(GridError, match="uniform"):
        find_windows((x, lorentz(x, 1, 0.1)))


def test_report_dict():
    d = find_windows((X, two_dip_line(X))).as_dict()
    assert d["window_count"] == 2 and d["n_peaks"] == 3 and d["prominence_threshold"] == 0.05


class TestFano:
    def test_symmetric_is_zero(self):
        assert fano_asymmetry((X, lorentz(X, 1.0, 0.1)), center=1.0, half_width=0.5).asymmetry < 1e-12

    def test_odd_is_one(self):
        y = np.tanh(X - 1.0)
        assert fano_asymmetry((X, y), 1.0, 0.5).asymmetry == pytest.approx(1.0)

    def test_needs_coverage(self):
        with pytest.raises(GridError):
            fano_asymmetry((X, X), center=1.8, half_width=0.5)

    def test_defaults_from_state(self):
        p, sweep = paper_preset("fig5a_fano")
        sp = spectrum(derive_state(p), sweep)
        s = fano_asymmetry(sp)
        assert s.center == p.omega_b1
        assert s.asymmetry == pytest.approx(0.5666903929948027, rel=1e-9)

    def test_resonant_control(self):
        p, sweep = paper_preset("fig5b_fano")
        s = fano_asymmetry(spectrum(derive_state(p), sweep))
        assert s.asymmetry == pytest.approx(0.3095132162248138, rel=1e-9)

    def test_raw_arrays_need_window(self):
        with pytest.raises(ValueError):
            fano_asymmetry((X, X))


class TestGoldenSection:
    def test_parabola(self):
        t = golden_section(lambda x: -(x - 0.3) ** 2, 0.0, 1.0, rtol=1e-9, maximize=True)
        assert t == pytest.approx(0.3, abs=1e-8)

    def test_stays_in_bracket(self):
        t = golden_section(lambda x: x, 2.0, 3.0)
        assert 2.0 <= t <= 3.0


class TestDelay:
    def bare(self):
        p, _ = paper_preset("fig2e")
        for k in ("G_c1", "G_c2"):
            p = with_config_value(p, k, 0.0)
        return derive_state(p)

    def test_bare_cavity_single_peak(self):
        st = self.bare()
        ext = delay_extrema(st, SweepSpec(0.5, 1.5, 401))
        assert len(ext) == 1
        d, tau, kind = ext[0]
        assert kind == "slow_peak"
        assert d == pytest.approx(st.Delta_c_eff, rel=1e-6)
        assert tau == pytest.approx(2 / st.params.kappa_c, rel=1e-8)

    def test_kinds_signs(self):
        p, _ = paper_preset("fig6b")
        st = derive_state(with_config_value(p, "g_a", 3e6))
        for _, tau, kind in delay_extrema(st, SweepSpec(0, 2, 4001)):
            assert (tau > 0) == (kind == "slow_peak")

    def test_near_resonance_in_window(self):
        st = self.bare()
        x, tau = near_resonance_delay(st)
        assert 0.98 <= x <= 1.02
        assert tau == pytest.approx(2 / st.params.kappa_c, rel=1e-6)
