"""
Observables extracted from spectra: transparency windows, Fano asymmetry and
group-delay extrema.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import peak_prominences

from .model import SweepSpec
from .response import Spectrum, group_delay
from .steady_state import DerivedState

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class WindowReport:
    peaks: list  # (delta, value, prominence)
    dips: list
    window_count: int
    threshold: float

    def as_dict(self) -> dict:
        return {"window_count": self.window_count, "n_peaks": len(self.peaks),
                "prominence_threshold": self.threshold,
                "peaks": [list(t) for t in self.peaks], "dips": [list(t) for t in self.dips]}


@dataclass(frozen=True)
class FanoScore:
    asymmetry: float
    center: float


def _xy(spectrum, y):
    if isinstance(spectrum, Spectrum):
        return spectrum.delta, (spectrum.eps_out.real if y is None else np.asarray(y))
    x, yy = spectrum
    return np.asarray(x, float), np.asarray(yy, float)


def local_extrema(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Interior maxima and minima by three-point comparison.

    A flat top counts once, at its left edge.
    """
    y = np.asarray(y)
    left, mid, right = y[:-2], y[1:-1], y[2:]
    maxima = np.flatnonzero((mid > left) & (mid >= right)) + 1
    minima = np.flatnonzero((mid < left) & (mid <= right)) + 1
    return maxima, minima


def find_windows(spectrum, prominence_threshold: float = 0.05, y=None) -> WindowReport:
    """Peaks and dips of the absorption Re[eps_out].

    ``spectrum`` is a :class:`Spectrum` or a ``(delta, values)`` pair on a
    uniform grid.  Prominence is the usual topographic one (climb to the
    lowest saddle separating the extremum from higher ground); a dip counts
    as a transparency window when its prominence reaches the threshold.
    """
    x, y = _xy(spectrum, y)
    if x.size < 101:
        raise GridError(f"grid too coarse: {x.size} points (need >= 101)")
    step = np.diff(x)
    if not np.allclose(step, step[0], rtol=1e-6, atol=0):
        raise GridError("detuning grid must be uniform")
    maxima, minima = local_extrema(y)
    # flat-topped extrema legitimately have zero prominence
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="some peaks have a prominence of 0")
        prom_max = peak_prominences(y, maxima)[0] if maxima.size else np.array([])
        prom_min = peak_prominences(-y, minima)[0] if minima.size else np.array([])
    peaks = [(float(x[i]), float(y[i]), float(p))
             for i, p in zip(maxima, prom_max) if p >= prominence_threshold]
    dips = [(float(x[i]), float(y[i]), float(p))
            for i, p in zip(minima, prom_min) if p >= prominence_threshold]
    return WindowReport(peaks, dips, len(dips), prominence_threshold)


def fano_asymmetry(spectrum, center: float | None = None, half_width: float | None = None,
                   y=None) -> FanoScore:
    """Mirror-integral asymmetry of Re[eps_out] about ``center``.

        A = int |y(c+u) - y(c-u)| du / int (|y(c+u)| + |y(c-u)|) du,  u in [0, w]

    Defaults: center = omega_b, w = omega_b / 2 (taken from the spectrum's
    state).  Zero for a mirror-symmetric lineshape.
    """
    x, y = _xy(spectrum, y)
    if center is None or half_width is None:
        if not isinstance(spectrum, Spectrum):
            raise ValueError("center and half_width are required for raw arrays")
        wb = spectrum.state.params.omega_b1
        center = wb if center is None else center
        half_width = 0.5 * wb if half_width is None else half_width
    eps = 1e-9 * max(abs(half_width), abs(center))
    if x[0] > center - half_width + eps or x[-1] < center + half_width - eps:
        raise GridError("grid does not cover [center - half_width, center + half_width]")
    n = max(int(round(half_width / abs(x[1] - x[0]))), 2) + 1
    u = np.linspace(0.0, half_width, n)
    yp = np.interp(center + u, x, y)
    ym = np.interp(center - u, x, y)
    den = trapezoid(np.abs(yp) + np.abs(ym), u)
    num = trapezoid(np.abs(yp - ym), u)
    return FanoScore(0.0 if den == 0 else float(num / den), float(center))


def golden_section(f, a: float, b: float, rtol: float = 1e-6, maximize: bool = False) -> float:
    """Golden-section search for an extremum of ``f`` inside [a, b]."""
    sign = -1.0 if maximize else 1.0
    g = lambda t: sign * f(t)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = g(c), g(d)
    scale = max(abs(a), abs(b))
    while abs(b - a) > rtol * scale:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = g(d)
    return 0.5 * (a + b)


def delay_extrema(state: DerivedState, sweep: SweepSpec | np.ndarray,
                  strict_paper_kappa: bool = False) -> list[tuple[float, float, str]]:
    """Refined local extrema of tau(delta): slow-light peaks and fast-light dips.

    Local maxima with tau > 0 are reported as ``slow_peak`` and local minima
    with tau < 0 as ``fast_dip``.  Each is refined by golden-section search
    inside its bracketing grid interval to relative precision 1e-6.
    Returns ``(delta, tau, kind)`` with delta in rad/s and tau in s.
    """
    d = sweep.deltas(state.params.omega_b1) if isinstance(sweep, SweepSpec) else np.asarray(sweep, float)
    tau = group_delay(state, d, strict_paper_kappa=strict_paper_kappa, check=False)
    f = lambda t: float(group_delay(state, np.array([t]), strict_paper_kappa=strict_paper_kappa,
                                    check=False)[0])
    maxima, minima = local_extrema(tau)
    out = []
    for i in maxima:
        if tau[i] > 0:
            t = golden_section(f, d[i - 1], d[i + 1], maximize=True)
            out.append((t, f(t), "slow_peak"))
    for i in minima:
        if tau[i] < 0:
            t = golden_section(f, d[i - 1], d[i + 1])
            out.append((t, f(t), "fast_dip"))
    return sorted(out)


def near_resonance_delay(state: DerivedState, lo: float = 0.98, hi: float = 1.02,
                         n_points: int = 4001, strict_paper_kappa: bool = False) -> tuple[float, float]:
    """(delta/omega_b, tau) of largest |tau| within [lo, hi] omega_b, extrema refined."""
    wb = state.params.omega_b1
    d = np.linspace(lo, hi, n_points) * wb
    tau = group_delay(state, d, strict_paper_kappa=strict_paper_kappa, check=False)
    cands = [(float(d[i]), float(tau[i])) for i in (int(np.argmax(np.abs(tau))),)]
    cands += [(t, v) for t, v, _ in delay_extrema(state, d, strict_paper_kappa)]
    t, v = max(cands, key=lambda c: abs(c[1]))
    return t / wb, v
