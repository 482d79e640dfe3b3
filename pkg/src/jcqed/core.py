"""State representations, conversions and Poisson-weight machinery.

Conventions shared by the whole package:

* basis order is ``(|g>, |e>)`` and ``|g>`` is the +1 eigenstate of sigma_z,
  so the ground state has Bloch vector ``(0, 0, 1)``;
* hbar = 1 and times are the scaled ``tau = g t``;
* sums over photon number run in ascending ``n`` with compensated
  accumulation (:func:`fock_sum`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonPhysicalStateError, TruncationError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

DEFAULT_TAIL_TOL = 1e-12
NORM_TOL = 1e-12
BALL_TOL = 1e-9
# construction guard for densities produced by truncated channels
DENSITY_TOL = 1e-10


def fock_sum(terms):
    """Neumaier-compensated sum of ``terms`` along axis 0, in index order.

    Works on real or complex arrays of any trailing shape.
    """
    terms = np.asarray(terms)
    if np.iscomplexobj(terms):
        return fock_sum(terms.real) + 1j * fock_sum(terms.imag)
    terms = terms.astype(float, copy=False)
    total = np.zeros(terms.shape[1:])
    comp = np.zeros(terms.shape[1:])
    for term in terms:
        t = total + term
        comp += np.where(np.abs(total) >= np.abs(term),
                         (total - t) + term, (term - t) + total)
        total = t
    return total + comp


def hard_cap(modulus):
    return math.ceil(modulus * modulus + 12.0 * modulus + 40.0)


def poisson_pmf(modulus, n_max):
    """P_n(modulus) for n = 0..n_max by the upward recurrence.

    Falls back to log space when exp(-modulus**2) would underflow.
    """
    mean = modulus * modulus
    out = np.zeros(n_max + 1)
    if mean == 0.0:
        out[0] = 1.0
        return out
    if mean < 700.0:
        p = math.exp(-mean)
        for n in range(n_max + 1):
            out[n] = p
            p *= mean / (n + 1)
        return out
    log_mean = math.log(mean)
    for n in range(n_max + 1):
        out[n] = math.exp(-mean + n * log_mean - math.lgamma(n + 1))
    return out


def poisson_weights(modulus, tail_tol=DEFAULT_TAIL_TOL, cap=None):
    """Photon-number weights of a coherent state with a certified cutoff.

    Returns ``(weights, n_max)`` where ``n_max`` is the smallest cutoff
    whose tail sum_{n > n_max} P_n is provably below ``tail_tol``. Past the
    mean the ratio P_{m+1}/P_m is at most mean/(n+2), so the tail is bounded
    by a geometric series starting at P_{n_max+1}.
    """
    if modulus < 0 or not math.isfinite(modulus):
        raise ValueError(f"modulus must be finite and >= 0, got {modulus!r}")
    if not 0.0 < tail_tol < 1.0:
        raise ValueError(f"tail_tol must lie in (0, 1), got {tail_tol!r}")
    cap = hard_cap(modulus) if cap is None else cap
    mean = modulus * modulus
    if mean == 0.0:
        return np.array([1.0]), 0

    pmf = poisson_pmf(modulus, cap + 1)
    bound = math.inf
    for n in range(cap + 1):
        ratio = mean / (n + 2)
        if ratio >= 1.0:
            continue
        bound = pmf[n + 1] / (1.0 - ratio)
        if bound < tail_tol:
            weights = pmf[: n + 1].copy()
            weights.setflags(write=False)
            return weights, n
    raise TruncationError(
        f"Poisson tail for modulus={modulus} not below {tail_tol} "
        f"within hard cap n_max={cap} (last bound {bound:.3e})")


@dataclass(frozen=True)
class PureQubit:
    """Initial atomic state c_g|g> + c_e|e>."""

    c_g: complex
    c_e: complex

    def __post_init__(self):
        object.__setattr__(self, "c_g", complex(self.c_g))
        object.__setattr__(self, "c_e", complex(self.c_e))
        norm = abs(self.c_g) ** 2 + abs(self.c_e) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise NonPhysicalStateError(f"qubit not normalized: |c|^2 = {norm!r}")

    @classmethod
    def normalized(cls, c_g, c_e):
        norm = math.sqrt(abs(c_g) ** 2 + abs(c_e) ** 2)
        if norm == 0.0:
            raise NonPhysicalStateError("zero vector cannot be normalized")
        return cls(c_g / norm, c_e / norm)

    @classmethod
    def from_angles(cls, theta, phi):
        """cos(theta/2)|g> + e^{i phi} sin(theta/2)|e>."""
        return cls(math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2))

    @property
    def vector(self):
        return np.array([self.c_g, self.c_e], dtype=complex)

    def density(self):
        v = self.vector
        return QubitDensity(np.outer(v, v.conj()))


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.r > 1.0 + BALL_TOL:
            raise NonPhysicalStateError(f"Bloch vector outside unit ball: r = {self.r!r}")

    @classmethod
    def from_array(cls, arr):
        x, y, z = np.asarray(arr, dtype=float)
        return cls(x, y, z)

    @property
    def r(self):
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    @property
    def polar_angle(self):
        r = self.r
        return 0.0 if r == 0.0 else math.acos(max(-1.0, min(1.0, self.z / r)))

    @property
    def azimuth(self):
        return math.atan2(self.y, self.x) % (2 * math.pi)

    def as_array(self):
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class QubitDensity:
    """2x2 density matrix in the (|g>, |e>) basis."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise NonPhysicalStateError(f"expected 2x2 matrix, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > DENSITY_TOL:
            raise NonPhysicalStateError("density matrix not Hermitian")
        if abs(np.trace(m) - 1.0) > DENSITY_TOL:
            raise NonPhysicalStateError(f"density matrix trace {np.trace(m)!r} != 1")
        if np.linalg.eigvalsh(m)[0] < -DENSITY_TOL:
            raise NonPhysicalStateError("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def maximally_mixed(cls):
        return cls(IDENTITY / 2)

    def bloch(self):
        return bloch_from_density(self)

    def purity(self):
        return purity(self)


def bloch_from_pure(q):
    """Bloch vector (2 Re c_g c_e*, -2 Im c_g c_e*, |c_g|^2 - |c_e|^2)."""
    coherence = q.c_g * q.c_e.conjugate()
    return BlochVector(2 * coherence.real, -2 * coherence.imag,
                       abs(q.c_g) ** 2 - abs(q.c_e) ** 2)


def bloch_array(matrices):
    """Bloch components of a stack of 2x2 matrices, shape (..., 3)."""
    m = np.asarray(matrices)
    ge = m[..., 0, 1]
    return np.stack([2 * ge.real, -2 * ge.imag, (m[..., 0, 0] - m[..., 1, 1]).real], axis=-1)


def density_array(vectors):
    """Inverse of :func:`bloch_array` for a stack of Bloch vectors."""
    v = np.asarray(vectors, dtype=float)
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    out = np.empty(v.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = (1 + z) / 2
    out[..., 1, 1] = (1 - z) / 2
    out[..., 0, 1] = (x - 1j * y) / 2
    out[..., 1, 0] = (x + 1j * y) / 2
    return out


def bloch_from_density(rho):
    return BlochVector.from_array(bloch_array(rho.matrix))


def density_from_bloch(v):
    if v.r > 1.0 + BALL_TOL:
        raise NonPhysicalStateError(f"non-physical Bloch vector, r = {v.r!r}")
    return QubitDensity(density_array(v.as_array()))


def purity(rho):
    """Tr(rho^2), equal to (1 + r^2) / 2."""
    m = rho.matrix
    return float(np.real(np.trace(m @ m)))


def rz_matrix(phi):
    """Rotation of Bloch vectors about z by ``phi``."""
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rx_matrix(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


@dataclass(frozen=True)
class CoherentField:
    """Coherent state |modulus * e^{i phase}> with a certified Fock cutoff."""

    modulus: float
    phase: float = 0.0
    tail_tol: float = DEFAULT_TAIL_TOL
    n_max: int = field(init=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "modulus", float(self.modulus))
        object.__setattr__(self, "phase", float(self.phase) % (2 * math.pi))
        weights, n_max = poisson_weights(self.modulus, self.tail_tol)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "n_max", n_max)

    @property
    def amplitude(self):
        return self.modulus * np.exp(1j * self.phase)

    def weights_to(self, n_max):
        """P_n for n = 0..n_max, extending past the certified cutoff if asked."""
        return poisson_pmf(self.modulus, n_max)


@dataclass(frozen=True)
class EvolutionParams:
    tau: float
    g: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "tau", float(self.tau))
        if not math.isfinite(self.tau) or self.tau < 0:
            raise ValueError(f"tau must be finite and >= 0, got {self.tau!r}")
        if not self.g > 0:
            raise ValueError(f"coupling g must be positive, got {self.g!r}")

    @classmethod
    def from_time(cls, t, g=1.0):
        return cls(g * t, g)

    @property
    def time(self):
        return self.tau / self.g
