"""Analytic limits of the reduced dynamics.

Small amplitude: the atom performs vacuum Rabi oscillations and is driven to
``|g>`` at tau = (k - 1/2) pi. Large amplitude: the Fock sums are replaced by
Gaussian envelopes after linearising each frequency about the mean photon
number, giving collapse envelopes on top of a fast rotation about x by
Omega = 2 tau alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (BlochVector, QubitDensity, bloch_from_pure, fock_sum,
                   rx_matrix)
from .dynamics import _require_real_amplitude

FAMILIES = ("n", "plus", "minus")


@dataclass(frozen=True)
class FrequencyExpansion:
    """omega(n) ~ omega0 + beta (n - alpha^2)."""

    omega0: float
    beta: float
    family: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.omega0) and math.isfinite(self.beta)):
            raise ValueError("frequency expansion must be finite")


def frequency_expansion(family, alpha, exact=False):
    """Linearised frequency for one of the three frequency families.

    ``family`` is ``"n"`` (omega = 2 sqrt(n)), ``"plus"`` (sqrt(n+1) + sqrt(n))
    or ``"minus"`` (sqrt(n+1) - sqrt(n)). By default the large-alpha values
    are used: omega_n0 = omega_plus ~ 2 alpha, beta_n = beta_plus ~ 1/alpha,
    omega_minus ~ 1/(2 alpha), beta_minus ~ -1/(4 alpha^3). ``exact=True``
    evaluates omega and d omega/dn at n = alpha^2 instead.
    """
    if alpha <= 0:
        raise ValueError("frequency expansion needs alpha > 0")
    a = alpha
    if family == "n":
        return FrequencyExpansion(2 * a, 1 / a, family)
    if exact:
        m = a * a
        lo, hi = math.sqrt(m), math.sqrt(m + 1)
        if family == "plus":
            return FrequencyExpansion(hi + lo, 0.5 / hi + 0.5 / lo, family)
        if family == "minus":
            return FrequencyExpansion(hi - lo, 0.5 / hi - 0.5 / lo, family)
    else:
        if family == "plus":
            return FrequencyExpansion(2 * a, 1 / a, family)
        if family == "minus":
            return FrequencyExpansion(1 / (2 * a), -1 / (4 * a ** 3), family)
    raise ValueError(f"unknown frequency family {family!r}; expected one of {FAMILIES}")


@dataclass(frozen=True)
class AttractorSpec:
    k: int
    alpha: float

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("attractor index k starts at 1")

    @property
    def tau(self):
        return attractor_time(self.k, self.alpha)

    @property
    def big_omega(self):
        return 2 * self.tau * self.alpha


def attractor_time(k, alpha):
    """tau at which tau / (2 alpha) = (k - 1/2) pi."""
    if k < 1:
        raise ValueError("attractor index k starts at 1")
    return (2 * k - 1) * math.pi * alpha


def vacuum_limit_density(q, tau):
    """Reduced state for alpha -> 0 (vacuum Rabi oscillation)."""
    pg, pe = abs(q.c_g) ** 2, abs(q.c_e) ** 2
    s, c = math.sin(tau), math.cos(tau)
    off = q.c_g * q.c_e.conjugate() * c
    return QubitDensity(np.array([[pe * s * s + pg, off],
                                  [off.conjugate(), pe * c * c]]))


def damped_cosine_sum(field, fx, tau):
    """Gaussian approximation to sum_n P_n cos(omega(n) tau).

    Trustworthy only for |beta tau| << 1.
    """
    a = field.modulus
    return math.cos(fx.omega0 * tau) * math.exp(-0.5 * fx.beta ** 2 * a * a * tau * tau)


def direct_cosine_sum(field, omega, tau):
    """sum_n P_n cos(omega(n) tau) by explicit summation; ``omega`` maps n-array to frequencies."""
    n = np.arange(field.n_max + 1, dtype=float)
    return float(fock_sum(field.weights * np.cos(omega(n) * tau)))


def gaussian_bloch(q, alpha, tau):
    """Large-amplitude Bloch vector with Gaussian collapse envelopes.

    No validity gate is applied; the approximation is meant for alpha >> 1
    and tau small against 1/|beta|. The result is not forced into the
    unit ball.
    """
    r0 = bloch_from_pure(q).as_array()
    x_inf, y_inf, z_inf = rx_matrix(2 * tau * alpha) @ r0
    slow = tau / (2 * alpha)
    slow_env = math.exp(-tau * tau / (32 * alpha ** 4))
    fast_env = math.exp(-tau * tau / 2)
    return _loose_bloch(x_inf * math.cos(slow) * slow_env,
                        y_inf * fast_env - math.sin(slow) * slow_env,
                        z_inf * fast_env)


def _loose_bloch(x, y, z):
    # approximations may leave the unit ball by a little; skip the guard
    v = object.__new__(BlochVector)
    object.__setattr__(v, "x", float(x))
    object.__setattr__(v, "y", float(y))
    object.__setattr__(v, "z", float(z))
    return v


def intermediate_bloch_sums(q, field, tau):
    """Bloch sums after the amplitude-ratio approximation, before the Gaussian step.

    The ratios alpha/sqrt(n+1), sqrt(n)/alpha and sqrt(n/(n+1)) are set to 1,
    leaving weighted sums of cosines and sines of omega_n = 2 sqrt(n) and
    omega_pm = sqrt(n+1) +- sqrt(n).
    """
    _require_real_amplitude(field, "intermediate_bloch_sums")
    x0, y0, z0 = bloch_from_pure(q).as_array()
    n = np.arange(field.n_max + 1, dtype=float)
    w = field.weights
    om_n = 2 * np.sqrt(n)
    om_plus = np.sqrt(n + 1) + np.sqrt(n)
    om_minus = np.sqrt(n + 1) - np.sqrt(n)
    x = fock_sum(w * x0 * np.cos(tau * om_minus))
    y = fock_sum(w * (y0 * np.cos(tau * om_plus) - z0 * np.sin(tau * om_plus)
                      - np.sin(tau * om_minus)))
    z = fock_sum(w * (y0 * np.sin(tau * om_n) + z0 * np.cos(tau * om_n)))
    return _loose_bloch(x, y, z)
