"""
Closed-form probe response.

The anti-Stokes sideband of the optical mode is

    c_- = eps_p / [alpha_1 + G_2^2/E + (G_1^2 M / N)(1 + G_2^2 / (E alpha_2))]

with the alpha_k and calligraphic coefficients below.  From it follow the
output field eps_out = 2 kappa_c c_- / eps_p (Re = absorption,
Im = dispersion), the transmission T = 1 - 2 kappa c_- / eps_p, its phase and
the group delay tau = dPhi/d omega_p.

All functions broadcast over ``delta`` (rad/s).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .model import SweepSpec, SystemParams, with_config_value
from .steady_state import DerivedState, derive_state

#: how the token "A." inside B, C, D is read
A_READINGS = ("calligraphic", "steady_state")


class SingularCoefficientError(ZeroDivisionError):
    def __init__(self, symbol, delta):
        self.symbol = symbol
        self.delta = np.atleast_1d(delta)
        super().__init__(f"coefficient {symbol} is zero or non-finite at delta = {self.delta[:5]} rad/s")


class PoleError(ZeroDivisionError):
    def __init__(self, delta):
        self.delta = np.atleast_1d(delta)
        super().__init__(f"response bracket vanishes (pole) at delta = {self.delta[:5]} rad/s")


class UndefinedPhaseError(ValueError):
    def __init__(self, delta):
        self.delta = np.atleast_1d(delta)
        super().__init__(f"transmission vanishes, phase undefined at delta = {self.delta[:5]} rad/s")


class GroupDelayWarning(UserWarning):
    """Step-halving check of the finite-difference derivative disagreed."""


@dataclass(frozen=True)
class AlphaSet:
    alpha1: np.ndarray
    alpha2: np.ndarray
    alpha3: np.ndarray
    alpha4: np.ndarray
    alpha5: np.ndarray
    alpha6: np.ndarray
    alpha7: np.ndarray
    alpha8: np.ndarray


@dataclass(frozen=True)
class CalSet:
    A_cal: np.ndarray
    B_cal: np.ndarray
    C_cal: np.ndarray
    D_cal: np.ndarray
    E_cal: np.ndarray
    M_cal: np.ndarray
    N_cal: np.ndarray


def alpha_coeffs(state: DerivedState, delta) -> AlphaSet:
    p = state.params
    d = np.asarray(delta, dtype=float)
    Dc, Dm, Da = state.Delta_c_eff, state.Delta_m_eff, p.Delta_a
    with np.errstate(invalid="ignore", over="ignore"):
        return AlphaSet(
            alpha1=p.kappa_c + 1j * (Dc - d),
            alpha2=p.kappa_c - 1j * (Dc + d),
            alpha3=p.kappa_a + 1j * (Da - d),
            alpha4=p.kappa_a - 1j * (Da + d),
            alpha5=p.kappa_m + 1j * (Dm - d),
            alpha6=p.kappa_m - 1j * (Dm + d),
            alpha7=p.omega_b1 - d / p.omega_b1 * (d + 1j * p.gamma_b1),
            alpha8=p.omega_b2 - d / p.omega_b2 * (d + 1j * p.gamma_b2),
        )


def _steady_state_A(state: DerivedState) -> complex:
    """The rate^4 denominator of the steady-state magnon closed form."""
    p = state.params
    ka, Da, km, Dm, ga = p.kappa_a, p.Delta_a, p.kappa_m, state.Delta_m_eff, p.g_a
    return ((complex(km, Dm) * complex(ka, Da) + ga ** 2)
            * (complex(km, -Dm) * complex(ka, -Da) + ga ** 2)
            + 4.0 * (ka ** 2 + Da ** 2) * p.lambda_sq ** 2)


def _check(symbol, value, delta, allow_zero=False):
    bad = ~np.isfinite(value)
    if not allow_zero:
        bad |= value == 0
    if np.any(bad):
        raise SingularCoefficientError(symbol, np.broadcast_to(delta, np.shape(value))[bad])


def cal_coeffs(state: DerivedState, delta, a_reading: str = "calligraphic",
               alphas: AlphaSet | None = None) -> CalSet:
    """Calligraphic coefficients A, B, C, D, E, M, N.

    ``a_reading`` selects what "A." inside B, C and D stands for: the
    calligraphic A defined alongside (default, dimensionally consistent) or
    the steady-state denominator (kept only to document that it fails).
    """
    if a_reading not in A_READINGS:
        raise ValueError(f"a_reading must be one of {A_READINGS}")
    p = state.params
    a = alphas if alphas is not None else alpha_coeffs(state, delta)
    G1s, G2s, Gms = state.G1 ** 2, state.G2 ** 2, state.Gmm ** 2
    ph = np.exp(1j * state.theta_eff)
    lam2 = 2.0 * p.lambda_sq
    with np.errstate(divide="ignore", invalid="ignore"):
        A_cal = 1.0 + p.g_a ** 2 / (a.alpha4 * a.alpha6)
        A_dot = A_cal if a_reading == "calligraphic" else _steady_state_A(state)
        B_cal = 1.0 / a.alpha5 + lam2 * ph / (A_dot * a.alpha5 * a.alpha6)
        C_cal = 1.0 + p.g_a ** 2 / (a.alpha3 * a.alpha5) - lam2 ** 2 / (A_dot * a.alpha5 * a.alpha6)
        _check("C", C_cal, delta)
        D_cal = (1j * a.alpha7 - G1s / a.alpha2 - Gms / (A_dot * a.alpha6)
                 + Gms * B_cal / C_cal * (1.0 - lam2 * np.conj(ph) / (A_dot * a.alpha6)))
        E_cal = 1j * a.alpha8 - G2s / a.alpha2
        _check("D", D_cal, delta)
        _check("E", E_cal, delta)
        M_cal = 1.0 / D_cal + G2s / (D_cal * E_cal * a.alpha2)
        N_cal = 1.0 - G1s * G2s / (D_cal * E_cal * a.alpha2 ** 2)
        _check("N", N_cal, delta)
    for sym, v in (("A", A_cal), ("B", B_cal), ("M", M_cal)):
        _check(sym, v, delta, allow_zero=True)
    return CalSet(A_cal, B_cal, C_cal, D_cal, E_cal, M_cal, N_cal)


def susceptibility(state: DerivedState, delta, a_reading: str = "calligraphic") -> np.ndarray:
    """Scale-free probe response c_- / eps_p."""
    a = alpha_coeffs(state, delta)
    c = cal_coeffs(state, delta, a_reading, alphas=a)
    G1s, G2s = state.G1 ** 2, state.G2 ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        bracket = (a.alpha1 + G2s / c.E_cal
                   + G1s * c.M_cal / c.N_cal * (1.0 + G2s / (c.E_cal * a.alpha2)))
    bad = ~np.isfinite(bracket) | (bracket == 0)
    if np.any(bad):
        raise PoleError(np.broadcast_to(delta, bracket.shape)[bad])
    return 1.0 / bracket


def probe_sideband(state: DerivedState, delta, a_reading: str = "calligraphic") -> np.ndarray:
    """Full complex amplitude c_- (in units of eps_p)."""
    return state.params.eps_p * susceptibility(state, delta, a_reading)


def output_field(state: DerivedState, delta) -> np.ndarray:
    return 2.0 * state.params.kappa_c * susceptibility(state, delta)


def transmission(state: DerivedState, delta, strict_paper_kappa: bool = False) -> np.ndarray:
    """T = 1 - 2 kappa c_-/eps_p, with kappa_c (default) or kappa_a."""
    p = state.params
    kappa = p.kappa_a if strict_paper_kappa else p.kappa_c
    return 1.0 - 2.0 * kappa * susceptibility(state, delta)


def phase(state: DerivedState, delta, strict_paper_kappa: bool = False) -> np.ndarray:
    """Principal argument of T in (-pi, pi]."""
    T = transmission(state, delta, strict_paper_kappa)
    if np.any(T == 0):
        raise UndefinedPhaseError(np.broadcast_to(delta, T.shape)[T == 0])
    phi = np.angle(T)
    # np.angle returns -pi for negative reals with a -0.0 imaginary part
    return np.where(phi == -np.pi, np.pi, phi)


def _tau(state, delta, h, strict):
    T0 = transmission(state, delta, strict)
    Tp = transmission(state, delta + h, strict)
    Tm = transmission(state, delta - h, strict)
    if np.any(T0 == 0):
        raise UndefinedPhaseError(np.broadcast_to(delta, T0.shape)[T0 == 0])
    return np.imag((Tp - Tm) / (2.0 * h * T0))


def group_delay(state: DerivedState, delta, step: float | None = None,
                strict_paper_kappa: bool = False, check: bool = True) -> np.ndarray:
    """Group delay tau = Im[T'/T] in seconds (tau > 0 slow light, tau < 0 fast light).

    Central difference of T itself rather than of the unwrapped phase, so deep
    dips where Phi jumps by ~pi need no special care.  With ``check`` the
    derivative is recomputed at half the step and a :class:`GroupDelayWarning`
    is issued where the two disagree by more than 0.5 %.
    """
    h = 1e-5 * state.params.omega_b1 if step is None else float(step)
    delta = np.asarray(delta, dtype=float)
    tau = _tau(state, delta, h, strict_paper_kappa)
    if check:
        ratio = step_halving_ratio(state, delta, h, strict_paper_kappa, tau)
        if np.any(ratio > 5e-3):
            warnings.warn(
                f"group delay step-halving disagreement up to {np.nanmax(ratio):.2e} "
                f"at {np.count_nonzero(ratio > 5e-3)} point(s)", GroupDelayWarning, stacklevel=2)
    return tau


def step_halving_ratio(state, delta, h=None, strict_paper_kappa=False, tau=None):
    """|tau(h) - tau(h/2)| / |tau(h/2)|."""
    h = 1e-5 * state.params.omega_b1 if h is None else h
    if tau is None:
        tau = _tau(state, delta, h, strict_paper_kappa)
    half = _tau(state, delta, h / 2, strict_paper_kappa)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(half == 0, np.where(tau == 0, 0.0, np.inf), np.abs(tau - half) / np.abs(half))


# --------------------------------------------------------------------------
# spectra

@dataclass(frozen=True)
class ResponsePoint:
    delta: float
    c_minus: complex
    eps_out: complex
    T: complex
    Phi: float
    tau: float


@dataclass
class Spectrum:
    """Response on a detuning grid.  Iterating yields :class:`ResponsePoint`."""

    state: DerivedState
    delta: np.ndarray
    c_minus: np.ndarray
    eps_out: np.ndarray
    T: np.ndarray
    Phi: np.ndarray
    tau: np.ndarray
    errors: dict[int, str] = field(default_factory=dict)

    @property
    def x(self) -> np.ndarray:
        """delta / omega_b1."""
        return self.delta / self.state.params.omega_b1

    def __len__(self):
        return len(self.delta)

    def __iter__(self) -> Iterator[ResponsePoint]:
        for i in range(len(self.delta)):
            yield self[i]

    def __getitem__(self, i) -> ResponsePoint:
        return ResponsePoint(float(self.delta[i]), complex(self.c_minus[i]), complex(self.eps_out[i]),
                             complex(self.T[i]), float(self.Phi[i]), float(self.tau[i]))


def evaluate(state: DerivedState, delta, strict_paper_kappa: bool = False,
             step: float | None = None) -> Spectrum:
    """Evaluate every response quantity on an explicit detuning array.

    A failing point is recorded in ``errors`` and filled with NaN; the rest of
    the grid is unaffected.
    """
    delta = np.asarray(delta, dtype=float)
    p = state.params
    h = 1e-5 * p.omega_b1 if step is None else step
    kappa = p.kappa_a if strict_paper_kappa else p.kappa_c
    errors: dict[int, str] = {}

    def safe_chi(d):
        try:
            return susceptibility(state, d)
        except (PoleError, SingularCoefficientError):
            out = np.empty(d.shape, complex)
            for i, di in enumerate(d):
                try:
                    out[i] = susceptibility(state, di)
                except (PoleError, SingularCoefficientError) as exc:
                    out[i] = np.nan
                    errors.setdefault(i, str(exc))
            return out

    chi = safe_chi(delta)
    chi_p, chi_m = safe_chi(delta + h), safe_chi(delta - h)
    T = 1.0 - 2.0 * kappa * chi
    Tp, Tm = 1.0 - 2.0 * kappa * chi_p, 1.0 - 2.0 * kappa * chi_m
    zero = T == 0
    for i in np.flatnonzero(zero):
        errors.setdefault(int(i), f"transmission vanishes at delta = {delta[i]!r}")
    with np.errstate(divide="ignore", invalid="ignore"):
        tau = np.imag((Tp - Tm) / (2.0 * h * np.where(zero, np.nan, T)))
        Phi = np.where(zero, np.nan, np.angle(T))
    Phi = np.where(Phi == -np.pi, np.pi, Phi)
    return Spectrum(state, delta, p.eps_p * chi, 2.0 * p.kappa_c * chi, T, Phi, tau, errors)


def spectrum(state: DerivedState, sweep: SweepSpec, strict_paper_kappa: bool = False) -> Spectrum:
    """Response on the sweep's delta grid (the swept parameter, if any, is ignored here)."""
    return evaluate(state, sweep.deltas(state.params.omega_b1), strict_paper_kappa)


def sweep_spectra(params: SystemParams, sweep: SweepSpec,
                  strict_paper_kappa: bool = False) -> list[tuple[float | None, Spectrum]]:
    """One spectrum per value of ``sweep.swept_param`` (or a single one without it)."""
    if sweep.swept_param is None:
        return [(None, spectrum(derive_state(params), sweep, strict_paper_kappa))]
    name, values = sweep.swept_param
    out = []
    for v in values:
        st = derive_state(with_config_value(params, name, v))
        out.append((v, spectrum(st, sweep, strict_paper_kappa)))
    return out
