"""Bayesian retrodiction of the initial qubit from a photon count.

The prior over initial pure states is uniform on the Bloch sphere (density
1/(4 pi) per steradian). For a fixed field and interaction time the
probability of counting n photons is affine in the initial Bloch vector,

    P(n | r) = Tr(E_n rho(r)) = a_n + m_n . r,   E_n = K_n^dagger K_n,

so every integral over the sphere reduces to a sum over grid nodes of that
affine response.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import CoherentField, EvolutionParams, PureQubit, fock_sum
from .dynamics import apply_channel_bloch, bloch_components, channel_for, kraus_set
from .errors import (JCError, OutcomeImpossibleError,
                     QuadratureConvergenceError, SurfacePointError)

MAX_AIG = 0.2787
# exact optimum of a projective qubit measurement under a uniform prior
DIRECT_MEASUREMENT_AIG = 1.0 - 1.0 / (2.0 * math.log(2.0))
CONVERGENCE_TOL = 1e-6
OUTCOME_FLOOR = 1e-300


@dataclass(frozen=True)
class SpherePoint:
    """Bloch polar angle ``theta`` and azimuth ``phi`` of a pure qubit."""

    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta!r}")
        object.__setattr__(self, "phi", float(self.phi) % (2 * math.pi))

    def qubit(self):
        return PureQubit.from_angles(self.theta, self.phi)

    def bloch(self):
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])


@dataclass(frozen=True)
class SphereGrid:
    """Product rule: Gauss-Legendre in cos(theta) times a periodic rule in phi.

    Arrays are flattened over the (theta, phi) product; ``weights`` are in
    steradians and sum to 4 pi.
    """

    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray
    n_theta: int
    n_phi: int

    @property
    def degree(self):
        """Largest spherical-harmonic degree integrated exactly."""
        return min(2 * self.n_theta - 1, self.n_phi - 1)

    def __len__(self):
        return len(self.weights)

    def points(self):
        return [SpherePoint(t, p) for t, p in zip(self.theta, self.phi)]

    def bloch_vectors(self):
        st = np.sin(self.theta)
        return np.stack([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)], axis=-1)

    def amplitudes(self):
        return np.cos(self.theta / 2), np.exp(1j * self.phi) * np.sin(self.theta / 2)

    def doubled(self):
        return sphere_grid(2 * self.n_theta, 2 * self.n_phi)


def sphere_grid(n_theta=64, n_phi=64):
    u, wu = np.polynomial.legendre.leggauss(n_theta)
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    theta = np.arccos(u)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    ww = np.outer(wu, np.full(n_phi, 2 * math.pi / n_phi))
    return SphereGrid(tt.ravel(), pp.ravel(), ww.ravel(), n_theta, n_phi)


@dataclass(frozen=True)
class ConditionalWeights:
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray


@dataclass(frozen=True)
class AIGMap:
    tau_axis: np.ndarray
    alpha_axis: np.ndarray
    values: np.ndarray      # [i_tau, i_alpha], bits


@dataclass(frozen=True)
class DifferenceMap:
    """I_avg, <r>^2 and I_avg - 0.2787 <r>^2 on a (tau, alpha) grid."""

    tau_axis: np.ndarray
    alpha_axis: np.ndarray
    i_avg: np.ndarray
    r_avg_sq: np.ndarray
    diff: np.ndarray


def outcome_response(ks):
    """Affine photon-count response: (a_n, m_n) with P(n|r) = a_n + m_n . r."""
    e = ks.effects()
    a = 0.5 * np.real(e[:, 0, 0] + e[:, 1, 1])
    m = np.stack([np.real(e[:, 0, 1]), -np.imag(e[:, 0, 1]),
                  0.5 * np.real(e[:, 0, 0] - e[:, 1, 1])], axis=-1)
    return a, m


def conditional_prob(n, field, params, point):
    """<psi| K_n^dagger K_n |psi> for the initial state at ``point``."""
    ks = kraus_set(field, params)
    if not 0 <= n <= ks.n_max:
        raise IndexError(f"outcome {n} outside 0..{ks.n_max}")
    psi = point.qubit().vector
    return float(np.real(psi.conj() @ ks.effects()[n] @ psi))


def conditional_weights(n, field, params):
    """f1, f2, f3 of the photon-count likelihood, straight from their formulas.

    ``n`` may be an int or an array of photon numbers. With the state
    convention used here the likelihood reads
    P_n [cos^2(theta/2) f1 + sin^2(theta/2) f2 - sin(theta) sin(phi) f3].
    """
    a = field.modulus
    if a <= 0:
        raise ValueError("conditional_weights needs alpha > 0")
    tau = params.tau
    n = np.asarray(n, dtype=float)
    sn, sn1 = np.sqrt(n), np.sqrt(n + 1)
    f1 = np.cos(tau * sn) ** 2 + a * a / (n + 1) * np.sin(tau * sn1) ** 2
    f2 = np.cos(tau * sn1) ** 2 + n / (a * a) * np.sin(tau * sn) ** 2
    f3 = 0.5 * (a / sn1 * np.sin(2 * tau * sn1) - sn / a * np.sin(2 * tau * sn))
    return ConditionalWeights(f1, f2, f3)


def outcome_prob(n, field, params):
    """Marginal P(n) = P_n (f1 + f2) / 2 under the uniform prior."""
    w = conditional_weights(n, field, params)
    pn = field.weights_to(int(np.max(n)))[n]
    return pn * 0.5 * (w.f1 + w.f2)


def outcome_prob_quadrature(n, field, params, grid):
    """P(n) as (1/4pi) * integral of P(n|theta, phi) over ``grid``."""
    a, m = outcome_response(channel_for(field, params))
    lik = a[n] + grid.bloch_vectors() @ m[n]
    return float(np.sum(grid.weights * lik) / (4 * math.pi))


def posterior(n, field, params, grid):
    """Posterior density per steradian at every node of ``grid``."""
    a, m = outcome_response(channel_for(field, params))
    if a[n] < OUTCOME_FLOOR:
        raise OutcomeImpossibleError(f"P({n}) = {a[n]!r}")
    lik = np.clip(a[n] + grid.bloch_vectors() @ m[n], 0.0, None)
    return lik / (4 * math.pi * a[n])


def _xlog2x_ratio(p, q):
    # p log2(p / q) with 0 log 0 = 0
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log2(p[pos] / q)
    return out


def _information_terms(a, m, grid):
    """(prior entropy term, posterior term, mutual-information form)."""
    r = grid.bloch_vectors()
    w = grid.weights
    prior = 1.0 / (4 * math.pi)
    prior_term = -float(np.sum(w * prior * math.log2(prior)))
    post_terms = []
    mi_terms = []
    for an, mn in zip(a, m):
        if an < OUTCOME_FLOOR:
            continue
        lik = np.clip(an + r @ mn, 0.0, None)
        post = lik / (4 * math.pi * an)
        post_terms.append(an * np.sum(w * _xlog2x_ratio(post, 1.0)))
        mi_terms.append(np.sum(w * prior * _xlog2x_ratio(lik, an)))
    return prior_term, float(fock_sum(post_terms)), float(fock_sum(mi_terms))


def information_gain_forms(field, params, grid):
    """I_avg by the entropy-difference form and by the mutual-information form."""
    a, m = outcome_response(channel_for(field, params))
    prior_term, post_term, mi = _information_terms(a, m, grid)
    return prior_term + post_term, mi


def average_information_gain(field, params, grid=None, guard=True):
    """Average information gain in bits about the initial qubit.

    Prior differential entropy minus the expected posterior entropy, both
    over solid angle. With ``guard`` the computation is repeated on a grid
    with doubled node counts and
    :class:`~jcqed.errors.QuadratureConvergenceError` is raised if the two
    differ by more than 1e-6.
    """
    grid = sphere_grid() if grid is None else grid
    a, m = outcome_response(channel_for(field, params))
    prior_term, post_term, _ = _information_terms(a, m, grid)
    value = prior_term + post_term
    if guard:
        fine = grid.doubled()
        p2, q2, _ = _information_terms(a, m, fine)
        shift = abs(p2 + q2 - value)
        if shift > CONVERGENCE_TOL:
            raise QuadratureConvergenceError(
                f"doubling grid {grid.n_theta}x{grid.n_phi} shifts I_avg by {shift:.3e}")
    return value


def average_state_radius(field, params, grid=None, method="quadrature"):
    """Length of the sphere-averaged output Bloch vector.

    ``method="quadrature"`` averages the closed-form Bloch vector over
    ``grid``; ``method="shortcut"`` keeps only the state-independent terms
    (populations averaged to 1/2, coherences to 0).
    """
    return float(np.linalg.norm(average_bloch(field, params, grid, method)))


def average_bloch(field, params, grid=None, method="quadrature"):
    if field.modulus == 0.0 or field.phase != 0.0:
        # no closed form here: average state = channel image of I/2
        return apply_channel_bloch(np.zeros(3), channel_for(field, params))
    a, w, tau = field.modulus, field.weights, params.tau
    if method == "quadrature":
        grid = sphere_grid() if grid is None else grid
        c_g, c_e = grid.amplitudes()
        x, y, z = bloch_components(c_g, c_e, a, w, tau)
        norm = grid.weights / (4 * math.pi)
        return np.array([np.sum(norm * x), np.sum(norm * y), np.sum(norm * z)])
    if method == "shortcut":
        n = np.arange(len(w), dtype=float)
        sn, sn1 = np.sqrt(n), np.sqrt(n + 1)
        y = -fock_sum(w * (a / sn1 * np.cos(tau * sn) * np.sin(tau * sn1)
                           - sn / a * np.cos(tau * sn1) * np.sin(tau * sn)))
        z = 0.5 * fock_sum(w * (np.cos(2 * tau * sn) - np.cos(2 * tau * sn1)))
        return np.array([0.0, float(y), float(z)])
    raise ValueError(f"unknown method {method!r}")


def _check_axis(axis, name):
    axis = np.asarray(axis, dtype=float)
    if axis.ndim != 1 or len(axis) == 0 or np.any(np.diff(axis) <= 0):
        raise ValueError(f"{name} must be a non-empty strictly increasing 1-D sequence")
    return axis


def aig_point(tau, alpha, n_theta=64, n_phi=64, guard=True):
    """I_avg at one (tau, alpha); module-level so it pickles for worker pools."""
    return average_information_gain(CoherentField(alpha), EvolutionParams(tau),
                                    sphere_grid(n_theta, n_phi), guard)


def difference_point(tau, alpha, n_theta=64, n_phi=64, guard=True):
    """(I_avg, <r>^2, I_avg - 0.2787 <r>^2) at one (tau, alpha)."""
    field, params = CoherentField(alpha), EvolutionParams(tau)
    grid = sphere_grid(n_theta, n_phi)
    i_avg = average_information_gain(field, params, grid, guard)
    r2 = average_state_radius(field, params, grid) ** 2
    return i_avg, r2, i_avg - MAX_AIG * r2


def _surface(fn, tau_axis, alpha_axis, workers, **kw):
    coords = [(t, a) for t in tau_axis for a in alpha_axis]
    pool = ProcessPoolExecutor(max_workers=workers) if workers and workers > 1 else None
    try:
        if pool is None:
            calls = [(lambda t=t, a=a: fn(t, a, **kw)) for t, a in coords]
        else:
            calls = [pool.submit(fn, t, a, **kw).result for t, a in coords]
        results = []
        for (t, a), call in zip(coords, calls):
            try:
                results.append(call())
            except JCError as exc:
                raise SurfacePointError(t, a, exc) from exc
        return results
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)


def aig_surface(tau_axis, alpha_axis, grid=None, guard=True, workers=1):
    """I_avg on the (tau, alpha) product grid, values indexed [i_tau, i_alpha]."""
    tau_axis = _check_axis(tau_axis, "tau_axis")
    alpha_axis = _check_axis(alpha_axis, "alpha_axis")
    grid = sphere_grid() if grid is None else grid
    vals = _surface(aig_point, tau_axis, alpha_axis, workers,
                    n_theta=grid.n_theta, n_phi=grid.n_phi, guard=guard)
    shape = (len(tau_axis), len(alpha_axis))
    return AIGMap(tau_axis, alpha_axis, np.array(vals).reshape(shape))


def aig_minus_rsq_surface(tau_axis, alpha_axis, grid=None, guard=True, workers=1):
    tau_axis = _check_axis(tau_axis, "tau_axis")
    alpha_axis = _check_axis(alpha_axis, "alpha_axis")
    grid = sphere_grid() if grid is None else grid
    vals = _surface(difference_point, tau_axis, alpha_axis, workers,
                    n_theta=grid.n_theta, n_phi=grid.n_phi, guard=guard)
    arr = np.array(vals).reshape(len(tau_axis), len(alpha_axis), 3)
    return DifferenceMap(tau_axis, alpha_axis, arr[..., 0], arr[..., 1], arr[..., 2])
