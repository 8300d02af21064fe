"""
Zero-order (steady-state) amplitudes and effective detunings.

The magnon amplitude obeys

    m_s (kappa_m + i Delta_m_eff) = -i g_a a_s + 2 lambda e^{i theta} m_s^* + Omega,
    a_s = -i g_a m_s / (kappa_a + i Delta_a),

which is not holomorphic in m_s because of the conjugate term.  The reference
solution (:func:`magnon_steady_exact`) treats it as a real 2x2 system in
(Re m_s, Im m_s).  The rational closed form and its high-detuning
approximation are kept as cross-checks.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import constants

from .model import DetuningMode, SystemParams

SQRT2 = math.sqrt(2.0)


class DegenerateDriveError(ArithmeticError):
    """The real 2x2 magnon system is singular (parametric threshold)."""


class BistabilityError(RuntimeError):
    """Fixed-point iteration for the static displacements did not settle."""

    def __init__(self, msg, last_iterates):
        super().__init__(msg)
        self.last_iterates = last_iterates


class ApproximationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DerivedState:
    """Frozen input to every response calculation.

    ``G1c``, ``G2c`` and ``Gmmc`` are the complex effective couplings
    i g_1 c_s, i g_2 c_s and i g_m m_s.  ``G1``, ``G2`` and ``Gmm`` are their
    magnitudes (G_c1/sqrt2 etc.), which is what the closed-form response
    consumes.  The phase of ``Gmmc`` is folded into ``theta_eff``.
    """

    c_s: complex
    a_s: complex
    m_s: complex
    q1_s: float
    q2_s: float
    Delta_c_eff: float
    Delta_m_eff: float
    G1: float
    G2: float
    Gmm: float
    G1c: complex
    G2c: complex
    Gmmc: complex
    params: SystemParams
    iterations: int = 0

    p1_s = 0.0
    p2_s = 0.0

    @property
    def theta_eff(self) -> float:
        """Squeezing phase seen by the fluctuations once the G_mm phase is gauged away."""
        if self.Gmmc == 0:
            return self.params.theta
        return self.params.theta - 2.0 * float(np.angle(self.Gmmc))


# --------------------------------------------------------------------------
# drive helpers

def laser_drive_amplitude(kappa_c, power, omega_L):
    """eps_L = sqrt(2 kappa_c P_L / (hbar omega_L)) in s^-1 (rates in rad/s, P in W)."""
    return math.sqrt(2.0 * kappa_c * power / (constants.hbar * omega_L))


def magnon_rabi_drive(gamma0, n_spins, b_drive):
    """Omega = (sqrt5 / 4) gamma0 sqrt(N_s) B_d."""
    return math.sqrt(5.0) / 4.0 * gamma0 * math.sqrt(n_spins) * b_drive


# --------------------------------------------------------------------------
# individual steady-state relations

def cavity_steady(params: SystemParams, Delta_c_eff: float) -> complex:
    eps_L = params.first_principles.eps_L
    return eps_L / complex(params.kappa_c, Delta_c_eff)


def _magnon_P(params, Delta_m_eff):
    # m_s coefficient after eliminating a_s
    return complex(params.kappa_m, Delta_m_eff) + params.g_a ** 2 / complex(params.kappa_a, params.Delta_a)


def magnon_steady_exact(params: SystemParams, Delta_m_eff: float) -> tuple[complex, complex]:
    """Exact (m_s, a_s) from the real-linear 2x2 solve."""
    Omega = params.first_principles.Omega
    P = _magnon_P(params, Delta_m_eff)
    s = 2.0 * params.lambda_sq * complex(math.cos(params.theta), math.sin(params.theta))
    # P m - s m* = Omega, split into real and imaginary parts
    mat = np.array([[P.real - s.real, -P.imag - s.imag],
                    [P.imag - s.imag, P.real + s.real]])
    rhs = np.array([Omega.real if isinstance(Omega, complex) else Omega,
                    Omega.imag if isinstance(Omega, complex) else 0.0])
    det = np.linalg.det(mat)
    if abs(det) <= 1e-14 * np.abs(mat).max() ** 2:
        raise DegenerateDriveError(
            f"magnon steady state is degenerate: |P|^2 - 4 lambda^2 = {det:.3e} "
            "(parametric instability threshold)")
    x, y = np.linalg.solve(mat, rhs)
    m_s = complex(x, y)
    a_s = -1j * params.g_a * m_s / complex(params.kappa_a, params.Delta_a)
    return m_s, a_s


def magnon_steady_closed_form(params: SystemParams, Delta_m_eff: float,
                              lambda_sign: float = +1.0) -> complex:
    """Rational closed form for m_s with real drive and theta = 0.

    ``lambda_sign=+1`` evaluates the denominator with a plus sign,
    ``[..][..] + 4(kappa_a^2 + Delta_a^2) lambda^2``; the exact solution
    needs ``lambda_sign=-1``.  Only meaningful for theta = 0.
    """
    ka, Da, km, ga = params.kappa_a, params.Delta_a, params.kappa_m, params.g_a
    lam = params.lambda_sq
    Omega = params.first_principles.Omega
    K = ka ** 2 + Da ** 2
    A = ((complex(km, Delta_m_eff) * complex(ka, Da) + ga ** 2)
         * (complex(km, -Delta_m_eff) * complex(ka, -Da) + ga ** 2)
         + lambda_sign * 4.0 * K * lam ** 2)
    num = 2.0 * K * lam * Omega + K * complex(km, -Delta_m_eff) * Omega + complex(ka, Da) * Omega * ga ** 2
    return num / A


def magnon_steady_approx(params: SystemParams, Delta_m_eff: float) -> complex:
    """High-detuning approximation
    m_s ~ -i Delta_a (Delta_a Dm - g_a^2) Omega / ([-Dm Delta_a + g_a^2]^2 + 4 Delta_a^2 lambda^2).
    """
    ka, km, Da = params.kappa_a, params.kappa_m, params.Delta_a
    ratio = min(abs(Delta_m_eff), abs(Da)) / max(ka, km)
    if ratio < 10:
        warnings.warn(f"high-detuning approximation used at |Delta|/kappa = {ratio:.2f} < 10",
                      ApproximationWarning, stacklevel=2)
    ga, lam, Omega = params.g_a, params.lambda_sq, params.first_principles.Omega
    bracket = -Delta_m_eff * Da + ga ** 2
    return -1j * Da * (Da * Delta_m_eff - ga ** 2) * Omega / (bracket * bracket + 4 * Da ** 2 * lam ** 2)


def mechanical_steady(params: SystemParams, c_s: complex, m_s: complex) -> tuple[float, float]:
    fp = params.first_principles
    nc, nm = abs(c_s) ** 2, abs(m_s) ** 2
    q2 = fp.g_2 * nc / params.omega_b2
    q1 = (fp.g_1 * nc - fp.g_m * nm) / params.omega_b1
    return q1, q2


def effective_detunings(params: SystemParams, q1_s: float, q2_s: float) -> tuple[float, float]:
    fp = params.first_principles
    return (fp.Delta_c - fp.g_1 * q1_s - fp.g_2 * q2_s,
            fp.Delta_m + fp.g_m * q1_s)


# --------------------------------------------------------------------------
# assembled states

def _state_from_amplitudes(params, c_s, a_s, m_s, q1, q2, Dc, Dm, iterations):
    fp = params.first_principles
    G1c, G2c, Gmmc = 1j * fp.g_1 * c_s, 1j * fp.g_2 * c_s, 1j * fp.g_m * m_s
    return DerivedState(c_s=c_s, a_s=a_s, m_s=m_s, q1_s=q1, q2_s=q2,
                        Delta_c_eff=Dc, Delta_m_eff=Dm,
                        G1=abs(G1c), G2=abs(G2c), Gmm=abs(Gmmc),
                        G1c=G1c, G2c=G2c, Gmmc=Gmmc,
                        params=params, iterations=iterations)


def solve_self_consistent(params: SystemParams, damping: float = 0.5,
                          rtol: float = 1e-12, max_iter: int = 1000) -> DerivedState:
    """Damped fixed-point iteration on the static displacements (q1_s, q2_s)."""
    if params.first_principles is None:
        raise ValueError("solve_self_consistent needs the first_principles block")
    q = np.zeros(2)
    history = []
    for it in range(1, max_iter + 1):
        Dc, Dm = effective_detunings(params, *q)
        c_s = cavity_steady(params, Dc)
        m_s, _ = magnon_steady_exact(params, Dm)
        q_new = np.array(mechanical_steady(params, c_s, m_s))
        scale = max(np.abs(q_new).max(), np.abs(q).max())
        change = 0.0 if scale == 0 else np.abs(q_new - q).max() / scale
        history = (history + [q_new.copy()])[-2:]
        if change < rtol:
            q = q_new
            break
        q = damping * q + (1.0 - damping) * q_new
    else:
        raise BistabilityError(
            f"no fixed point after {max_iter} iterations (relative change {change:.3e}); "
            "bistable regime suspected", history)
    Dc, Dm = effective_detunings(params, *q)
    c_s = cavity_steady(params, Dc)
    m_s, a_s = magnon_steady_exact(params, Dm)
    return _state_from_amplitudes(params, c_s, a_s, m_s, float(q[0]), float(q[1]), Dc, Dm, it)


def steady_state_residuals(state: DerivedState) -> dict[str, float]:
    """Relative residuals of the five steady-state equations at ``state``."""
    p = state.params
    fp = p.first_principles
    Dc, Dm = effective_detunings(p, state.q1_s, state.q2_s)
    c_s, a_s, m_s = state.c_s, state.a_s, state.m_s

    def rel(lhs, rhs):
        scale = max(abs(lhs), abs(rhs))
        return 0.0 if scale == 0 else abs(lhs - rhs) / scale

    s = 2 * p.lambda_sq * complex(math.cos(p.theta), math.sin(p.theta))
    nc, nm = abs(c_s) ** 2, abs(m_s) ** 2
    return {
        "c_s": rel(c_s * complex(p.kappa_c, Dc), fp.eps_L),
        "a_s": rel(a_s * complex(p.kappa_a, p.Delta_a), -1j * p.g_a * m_s),
        "m_s": rel(m_s * complex(p.kappa_m, Dm), -1j * p.g_a * a_s + s * m_s.conjugate() + fp.Omega),
        "q2_s": rel(state.q2_s * p.omega_b2, fp.g_2 * nc),
        "q1_s": rel(state.q1_s * p.omega_b1, fp.g_1 * nc - fp.g_m * nm),
    }


def freeze_prescribed(params: SystemParams) -> DerivedState:
    """DerivedState for prescribed mode.

    The effective couplings are taken as real: c_s and m_s carry phase -i so
    that i g c_s is a positive real number.  Bare couplings are normalised
    to g_1^2 + g_2^2 = 1 and g_m = 1 (rad/s) to give the amplitudes a
    magnitude; nothing downstream depends on that choice.
    """
    pr = params.prescribed
    G1, G2, Gmm = pr.G_c1 / SQRT2, pr.G_c2 / SQRT2, pr.G_m / SQRT2
    c_s = -1j * math.hypot(G1, G2)
    m_s = -1j * Gmm
    a_s = -1j * params.g_a * m_s / complex(params.kappa_a, params.Delta_a)
    return DerivedState(c_s=c_s, a_s=a_s, m_s=m_s, q1_s=0.0, q2_s=0.0,
                        Delta_c_eff=pr.Delta_c_eff, Delta_m_eff=pr.Delta_m_eff,
                        G1=G1, G2=G2, Gmm=Gmm,
                        G1c=complex(G1), G2c=complex(G2), Gmmc=complex(Gmm),
                        params=params)


def derive_state(params: SystemParams) -> DerivedState:
    if params.detuning_mode is DetuningMode.PRESCRIBED:
        return freeze_prescribed(params)
    return solve_self_consistent(params)
