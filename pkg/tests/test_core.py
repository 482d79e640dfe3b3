import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jcqed.core import (BlochVector, CoherentField, EvolutionParams, PureQubit,
                        QubitDensity, bloch_from_density, bloch_from_pure,
                        density_from_bloch, fock_sum, hard_cap, poisson_weights,
                        purity)
from jcqed.errors import NonPhysicalStateError, TruncationError
from oracles import poisson_mp

angles = st.floats(0, math.pi)
azimuths = st.floats(0, 2 * math.pi)


def test_poisson_vacuum():
    w, n_max = poisson_weights(0.0)
    assert n_max == 0
    assert list(w) == [1.0]


def test_poisson_unit_amplitude_first_weight():
    w, _ = poisson_weights(1.0)
    assert w[0] == pytest.approx(math.exp(-1), rel=1e-15)


def test_poisson_sum_against_extended_precision():
    w, n_max = poisson_weights(2.0, 1e-12)
    total = math.fsum(w)
    assert 1 - 1e-12 < total <= 1.0
    ref = poisson_mp(2.0, 200)
    assert float(sum(ref[: n_max + 1])) == pytest.approx(total, abs=1e-15)
    np.testing.assert_allclose(w, [float(p) for p in ref[: n_max + 1]], rtol=1e-13)


@pytest.mark.parametrize("alpha", [1e-4, 0.3, 1.0, 2.0, 4.0, 8.0, 10.0, 20.0])
def test_poisson_cutoff_is_certified_and_minimal(alpha):
    tol = 1e-12
    w, n_max = poisson_weights(alpha, tol)
    ref = [float(p) for p in poisson_mp(alpha, n_max + 400)]
    assert sum(ref[n_max + 1:]) < tol
    assert n_max <= hard_cap(alpha)
    # mean of the truncated weights
    n = np.arange(n_max + 1)
    assert abs(fock_sum(n * w) - alpha ** 2) <= 10 * tol * max(n_max, 1)
    assert np.all(w >= 0)


def test_poisson_large_amplitude_uses_log_space():
    w, n_max = poisson_weights(30.0)
    assert 1 - 1e-12 < math.fsum(w) <= 1 + 1e-15
    assert np.argmax(w) in (899, 900)


def test_poisson_cap_failure():
    with pytest.raises(TruncationError, match="hard cap"):
        poisson_weights(5.0, 1e-12, cap=10)


@pytest.mark.parametrize("tol", [0.0, 1.0, -1e-3])
def test_poisson_rejects_bad_tolerance(tol):
    with pytest.raises(ValueError):
        poisson_weights(1.0, tol)


def test_fock_sum_compensates():
    terms = np.array([1.0, 1e-16, 1e-16, 1e-16, 1e-16, -1.0])
    assert fock_sum(terms) == pytest.approx(4e-16, rel=1e-12)
    assert fock_sum(terms[:, None] * np.ones((1, 3))).shape == (3,)


@pytest.mark.parametrize("c_g, c_e, expected", [
    (1, 0, (0, 0, 1)),
    (1 / math.sqrt(2), 1j / math.sqrt(2), (0, 1, 0)),
    (1 / math.sqrt(2), 1 / math.sqrt(2), (1, 0, 0)),
])
def test_bloch_from_pure_examples(c_g, c_e, expected):
    v = bloch_from_pure(PureQubit(c_g, c_e))
    np.testing.assert_allclose(v.as_array(), expected, atol=1e-15)


def test_pure_qubit_normalization_enforced():
    with pytest.raises(NonPhysicalStateError):
        PureQubit(1, 1)
    assert bloch_from_pure(PureQubit.normalized(1, 1)).x == pytest.approx(1.0)


@given(angles, azimuths)
def test_pure_state_has_unit_bloch_length(theta, phi):
    v = bloch_from_pure(PureQubit.from_angles(theta, phi))
    assert abs(v.r - 1) < 1e-12


@given(angles, azimuths)
def test_angle_convention_matches_bloch_angles(theta, phi):
    v = bloch_from_pure(PureQubit.from_angles(theta, phi)).as_array()
    expected = [math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)]
    np.testing.assert_allclose(v, expected, atol=1e-12)


def test_density_examples():
    np.testing.assert_allclose(density_from_bloch(BlochVector(0, 0, 1)).matrix, np.diag([1, 0]))
    np.testing.assert_allclose(density_from_bloch(BlochVector(0, 0, 0)).matrix, np.eye(2) / 2)
    m = density_from_bloch(BlochVector(0, 1, 0)).matrix
    assert m[0, 1] == pytest.approx(-0.5j)
    assert m[1, 0] == pytest.approx(0.5j)


def test_ground_state_projector_convention():
    ground = PureQubit(1, 0).density().matrix
    np.testing.assert_allclose(ground, [[1, 0], [0, 0]])
    assert bloch_from_density(PureQubit(1, 0).density()).z == 1.0


def test_density_rejects_outside_ball():
    v = object.__new__(BlochVector)
    object.__setattr__(v, "x", 0.0)
    object.__setattr__(v, "y", 0.0)
    object.__setattr__(v, "z", 1.01)
    with pytest.raises(NonPhysicalStateError):
        density_from_bloch(v)
    with pytest.raises(NonPhysicalStateError):
        BlochVector(1, 1, 0)


@settings(max_examples=200)
@given(st.floats(0, 1), angles, azimuths)
def test_bloch_density_round_trip(r, theta, phi):
    v = BlochVector(r * math.sin(theta) * math.cos(phi), r * math.sin(theta) * math.sin(phi),
                    r * math.cos(theta))
    back = bloch_from_density(density_from_bloch(v)).as_array()
    np.testing.assert_allclose(back, v.as_array(), atol=1e-12)


@pytest.mark.parametrize("r, expected", [(1.0, 1.0), (0.0, 0.5), (0.6, 0.68)])
def test_purity(r, expected):
    assert purity(density_from_bloch(BlochVector(0, 0, r))) == pytest.approx(expected, abs=1e-14)


@given(st.floats(0, 1), angles)
def test_purity_is_half_one_plus_r_squared(r, theta):
    v = BlochVector(r * math.sin(theta), 0, r * math.cos(theta))
    assert purity(density_from_bloch(v)) == pytest.approx((1 + r * r) / 2, abs=1e-14)


def test_density_validation():
    with pytest.raises(NonPhysicalStateError):
        QubitDensity(np.array([[1, 1], [0, 0]]))
    with pytest.raises(NonPhysicalStateError):
        QubitDensity(np.eye(2))
    with pytest.raises(NonPhysicalStateError):
        QubitDensity(np.diag([1.5, -0.5]))


def test_coherent_field_and_params():
    f = CoherentField(2.0, phase=-math.pi / 2)
    assert f.phase == pytest.approx(3 * math.pi / 2)
    assert f.amplitude == pytest.approx(-2j)
    assert len(f.weights) == f.n_max + 1
    assert EvolutionParams.from_time(2.0, g=0.5).tau == 1.0
    with pytest.raises(ValueError):
        EvolutionParams(-1.0)
    with pytest.raises(ValueError):
        EvolutionParams(math.inf)
