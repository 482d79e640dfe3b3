"""Exact finite-amplitude dynamics of the resonant Jaynes-Cummings model.

Three independent routes to the reduced atomic state:

* :func:`bloch_evolve` sums the closed-form Bloch components directly;
* :func:`kraus_set` / :func:`apply_channel` use the photon-counting Kraus
  operators K_n = <n| U(tau) |alpha>;
* :func:`oracle_evolve` propagates the joint atom-field state in a
  truncated Fock space and traces out the field. It is the ground truth
  for everything else, and the only route that handles complex amplitudes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (BlochVector, QubitDensity, PureQubit, bloch_array,
                   density_array, fock_sum)
from .errors import (DegenerateAmplitudeError, OutcomeImpossibleError,
                     PhaseNotSupportedError, TruncationError)

KRAUS_GUARD = 2
OUTCOME_FLOOR = 1e-300


def _require_real_amplitude(field, what):
    if field.phase != 0.0:
        raise PhaseNotSupportedError(
            f"{what} needs a real amplitude (phase 0); use the oracle path "
            f"for phase {field.phase!r}")


def bloch_components(c_g, c_e, modulus, weights, tau):
    """Vectorised closed-form Bloch components.

    ``c_g`` and ``c_e`` may be arrays of any common shape; the photon sum
    runs over ``weights`` (P_0..P_nmax) in ascending n. Returns ``(x, y, z)``
    arrays of the broadcast shape.
    """
    c_g = np.asarray(c_g, dtype=complex)
    c_e = np.asarray(c_e, dtype=complex)
    coh = c_g * c_e.conj()
    pop_g = np.abs(c_g) ** 2
    pop_e = np.abs(c_e) ** 2

    n = np.arange(len(weights), dtype=float)
    sn, sn1 = np.sqrt(n), np.sqrt(n + 1)
    c0, s0 = np.cos(tau * sn), np.sin(tau * sn)
    c1, s1 = np.cos(tau * sn1), np.sin(tau * sn1)
    ratio = np.sqrt(n / (n + 1))
    up = modulus / sn1          # alpha / sqrt(n+1)
    down = sn / modulus         # sqrt(n) / alpha, zero at n = 0

    extra = (slice(None),) + (None,) * coh.ndim
    w = np.asarray(weights)[extra]
    c0, s0, c1, s1 = c0[extra], s0[extra], c1[extra], s1[extra]
    ratio, up, down = ratio[extra], up[extra], down[extra]
    sin2_0 = np.sin(2 * tau * sn)[extra]

    x = fock_sum(w * 2 * coh.real * (c0 * c1 + ratio * s0 * s1))
    y = fock_sum(w * (-2 * coh.imag * (c0 * c1 - ratio * s0 * s1)
                      - 2 * (pop_g * up * c0 * s1 - pop_e * down * c1 * s0)))
    z = fock_sum(w * (pop_g * np.cos(2 * tau * sn)[extra]
                      - pop_e * np.cos(2 * tau * sn1)[extra]
                      - 2 * coh.imag * down * sin2_0))
    return x, y, z


def bloch_evolve(q, field, params):
    """Reduced Bloch vector at time ``params.tau`` from the closed-form sums.

    Only real amplitudes (phase 0) with modulus > 0 are accepted; the
    ``alpha -> 0`` limit and complex amplitudes go through the oracle.
    """
    _require_real_amplitude(field, "bloch_evolve")
    if field.modulus == 0.0:
        raise DegenerateAmplitudeError("closed form divides by alpha; use the oracle for alpha = 0")
    x, y, z = bloch_components(q.c_g, q.c_e, field.modulus, field.weights, params.tau)
    return BlochVector(float(x), float(y), float(z))


@dataclass(frozen=True)
class KrausSet:
    """Photon-number indexed measurement operators at fixed (alpha, tau).

    ``operators[n]`` is the 2x2 matrix K_n in the (|g>, |e>) basis.
    """

    alpha_modulus: float
    tau: float
    operators: np.ndarray
    n_max: int
    tail_tol: float
    phase: float = 0.0

    def __len__(self):
        return len(self.operators)

    def completeness_error(self):
        ops = self.operators
        total = fock_sum(np.einsum("nji,njk->nik", ops.conj(), ops))
        return float(np.max(np.abs(total - np.eye(2))))

    def effects(self):
        """K_n^dagger K_n for every n, shape (n_max + 1, 2, 2)."""
        ops = self.operators
        return np.einsum("nji,njk->nik", ops.conj(), ops)


def kraus_set(field, params, guard=KRAUS_GUARD):
    """Closed-form Kraus operators for a real amplitude.

    Operators are produced for n = 0 .. field.n_max + guard; the guard levels
    pick up the population pushed one photon above the certified support.
    """
    _require_real_amplitude(field, "kraus_set")
    alpha = field.modulus
    if alpha == 0.0:
        raise DegenerateAmplitudeError(
            "kraus_set is singular at alpha = 0 (sqrt(n)/alpha entry); "
            "use oracle_kraus_set or the vacuum limit")
    tau = params.tau
    n_max = field.n_max + guard
    weights = field.weights_to(n_max)
    n = np.arange(n_max + 1, dtype=float)
    sn, sn1 = np.sqrt(n), np.sqrt(n + 1)
    amp = np.sqrt(weights)
    ops = np.zeros((n_max + 1, 2, 2), dtype=complex)
    ops[:, 0, 0] = amp * np.cos(tau * sn)
    ops[:, 0, 1] = -1j * amp * (sn / alpha) * np.sin(tau * sn)
    ops[:, 1, 0] = -1j * amp * (alpha / sn1) * np.sin(tau * sn1)
    ops[:, 1, 1] = amp * np.cos(tau * sn1)
    ops.setflags(write=False)
    return KrausSet(alpha, tau, ops, n_max, field.tail_tol)


def _channel(matrices, operators):
    """sum_n K_n rho K_n^dagger for a stack of matrices (..., 2, 2)."""
    terms = np.einsum("nij,...jk,nlk->n...il", operators, matrices, operators.conj())
    return fock_sum(terms)


def apply_channel(rho, ks):
    """rho -> sum_n K_n rho K_n^dagger."""
    return QubitDensity(_channel(rho.matrix, ks.operators))


def apply_channel_bloch(vectors, ks):
    """Channel acting on a stack of Bloch vectors, shape (..., 3)."""
    return bloch_array(_channel(density_array(vectors), ks.operators))


def conditional_outcome_state(rho, ks, n):
    """Post-measurement state and probability for photon count ``n``."""
    if not 0 <= n <= ks.n_max:
        raise IndexError(f"outcome {n} outside 0..{ks.n_max}")
    k = ks.operators[n]
    unnorm = k @ rho.matrix @ k.conj().T
    p = float(np.real(np.trace(unnorm)))
    if p < OUTCOME_FLOOR:
        raise OutcomeImpossibleError(f"outcome n={n} has probability {p!r}")
    return QubitDensity(unnorm / p), p


@dataclass(frozen=True)
class JointState:
    """Atom-field amplitudes ``amplitudes[a, n]`` with a = 0 (g), 1 (e)."""

    amplitudes: np.ndarray
    n_max_joint: int

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def atom_density(self):
        psi = self.amplitudes
        return QubitDensity(psi @ psi.conj().T)

    def photon_distribution(self):
        return np.sum(np.abs(self.amplitudes) ** 2, axis=0)

    def excitation_number(self):
        """<a^dagger a + sigma_+ sigma_->."""
        probs = np.abs(self.amplitudes) ** 2
        n = np.arange(self.n_max_joint + 1)
        return float(np.sum(probs * n) + np.sum(probs[1]))

    def vector(self):
        """Flattened amplitudes in kron(atom, field) order."""
        return self.amplitudes.reshape(-1)


def _oracle_support(field):
    """Initial photon cutoff: certified n_max, extended until P_n < tail_tol."""
    n = field.n_max
    pmf = field.weights_to(n + 64)
    while pmf[n] >= field.tail_tol:
        n += 1
        if n >= len(pmf):
            raise TruncationError(f"oracle support for modulus {field.modulus} does not close")
    return n


def initial_joint_state(q, field):
    support = _oracle_support(field)
    n_cap = support + 2
    pmf = field.weights_to(support)
    n = np.arange(support + 1)
    field_amps = np.sqrt(pmf) * np.exp(1j * field.phase * n)
    amps = np.zeros((2, n_cap + 1), dtype=complex)
    amps[0, : support + 1] = q.c_g * field_amps
    amps[1, : support + 1] = q.c_e * field_amps
    return JointState(amps, n_cap)


def _sector_evolve(psi, tau):
    # |e,n> <-> |g,n+1> with coupling sqrt(n+1); |g,0> and the truncated
    # top level |e,N> are invariant, as in the truncated Hamiltonian.
    n_cap = psi.shape[1] - 1
    k = np.sqrt(np.arange(1, n_cap + 1))
    c, s = np.cos(tau * k), np.sin(tau * k)
    e_lo = psi[1, :n_cap]
    g_hi = psi[0, 1:]
    out = psi.copy()
    out[1, :n_cap] = c * e_lo - 1j * s * g_hi
    out[0, 1:] = -1j * s * e_lo + c * g_hi
    return out


def jc_hamiltonian(n_cap):
    """Truncated interaction Hamiltonian (units of g) in kron(atom, field) order."""
    a = np.diag(np.sqrt(np.arange(1, n_cap + 1)), 1)
    sigma_plus = np.array([[0.0, 0.0], [1.0, 0.0]])   # |e><g|
    return np.kron(sigma_plus, a) + np.kron(sigma_plus.T, a.T)


def _dense_evolve(psi, tau):
    n_cap = psi.shape[1] - 1
    evals, evecs = np.linalg.eigh(jc_hamiltonian(n_cap))
    u = (evecs * np.exp(-1j * tau * evals)) @ evecs.T
    return (u @ psi.reshape(-1)).reshape(2, n_cap + 1)


def evolve_joint(state, tau, method="sector"):
    """Apply exp(-i H tau) to a joint state; negative ``tau`` runs backwards."""
    if method == "sector":
        amps = _sector_evolve(state.amplitudes, tau)
    elif method == "dense":
        amps = _dense_evolve(state.amplitudes, tau)
    else:
        raise ValueError(f"unknown oracle method {method!r}")
    return JointState(amps, state.n_max_joint)


def oracle_evolve(q, field, params, method="sector"):
    """Brute-force joint evolution; returns (joint, atom density, photon distribution).

    ``method="dense"`` exponentiates the full truncated Hamiltonian by
    eigendecomposition instead of the 2x2 sector rotations.
    """
    start = initial_joint_state(q, field)
    joint = evolve_joint(start, params.tau, method)
    dist = joint.photon_distribution()
    edge = float(np.sum(dist[-2:]))
    if edge > field.tail_tol:
        raise TruncationError(
            f"population {edge:.3e} within two levels of the Fock cap {joint.n_max_joint}")
    return joint, joint.atom_density(), dist


def oracle_kraus_set(field, params, method="sector"):
    """Kraus operators K_n = <n| U |alpha> read off from the joint oracle.

    Valid for any complex amplitude including alpha = 0. Column ``a`` of
    K_n is the field-n component of U(|a> |alpha>).
    """
    cols = []
    for q in (PureQubit(1, 0), PureQubit(0, 1)):
        joint = evolve_joint(initial_joint_state(q, field), params.tau, method)
        cols.append(joint.amplitudes)
    ops = np.stack(cols, axis=-1)            # (2, N+1, 2): [out, n, in]
    ops = np.ascontiguousarray(np.transpose(ops, (1, 0, 2)))
    ops.setflags(write=False)
    n_cap = ops.shape[0] - 1
    return KrausSet(field.modulus, params.tau, ops, n_cap, field.tail_tol, field.phase)


def channel_for(field, params):
    """Kraus set for any field: closed form when it applies, oracle otherwise."""
    if field.phase == 0.0 and field.modulus > 0.0:
        return kraus_set(field, params)
    return oracle_kraus_set(field, params)


def phase_rotated_channel(rho, field, params):
    """Channel for a complex amplitude alpha_r e^{i phi}, computed by the oracle.

    No closed form for complex alpha is assumed. The result obeys
    out(phi) = R_z(phi) out_0(R_z(-phi) in).
    """
    return apply_channel(rho, oracle_kraus_set(field, params))
