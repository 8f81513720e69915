import math

import numpy as np
import pytest
from scipy.linalg import expm

from ionmeter.dynamics import (
    PulseSpec,
    apply_pulse,
    carrier_pulse,
    carrier_unitary,
    evolve_generic,
    evolve_generic_grid,
    evolve_vibronic,
    heisenberg_sigma_z,
    vibronic_propagator,
)
from ionmeter.hilbert import (
    DimensionError,
    HermitianOperator,
    ModeLayout,
    Space,
    StateVector,
    atom_state,
    expectation,
    fock_state,
    sigma_x,
    sigma_y,
    sigma_z,
)
from ionmeter.observables import number, two_boson_jc_hamiltonian


def random_state(space, rng):
    v = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
    return StateVector.normalized(v, space)


def random_hermitian(d, rng):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return HermitianOperator((g + g.conj().T) / 2, Space(("x",), (d,)))


def test_propagator_matches_expm():
    rng = np.random.default_rng(3)
    A = random_hermitian(5, rng)
    u = vibronic_propagator(A, 0.8, 1.3).matrix
    np.testing.assert_allclose(u, expm(-1j * 0.8 * 1.3 * np.kron(A.matrix, sigma_x().matrix)), atol=1e-12)
    np.testing.assert_allclose(u @ u.conj().T, np.eye(10), atol=1e-12)


def test_evolve_vibronic_matches_propagator():
    rng = np.random.default_rng(5)
    A = random_hermitian(4, rng)
    psi = random_state(A.space.with_atom(), rng)
    out = evolve_vibronic(psi, A, -1.7, 0.4)
    np.testing.assert_allclose(out.amplitudes, vibronic_propagator(A, -1.7, 0.4).matrix @ psi.amplitudes, atol=1e-12)


def test_evolve_vibronic_embeds_single_mode_observable():
    lay = ModeLayout.of(x=3, y=3)
    psi = fock_state(lay, {"x": 1, "y": 2}).tensor(atom_state("-"))
    out = evolve_vibronic(psi, number("y", lay), 1.0, math.pi / 4)
    # eigenvalue 2: P_+ = sin^2(2 * pi/4) = 1
    assert np.sum(np.abs(out.amplitudes.reshape(-1, 2)[:, 0]) ** 2) == pytest.approx(1.0)


def test_evolve_vibronic_requires_atom():
    lay = ModeLayout.of(x=3)
    with pytest.raises(DimensionError):
        evolve_vibronic(fock_state(lay, {"x": 1}), number("x", lay), 1.0, 1.0)


def test_heisenberg_sigma_z_identity():
    rng = np.random.default_rng(8)
    A = random_hermitian(4, rng)
    u = vibronic_propagator(A, 1.1, 0.6).matrix
    direct = u.conj().T @ np.kron(np.eye(4), sigma_z().matrix) @ u
    np.testing.assert_allclose(heisenberg_sigma_z(A, 1.1, 0.6).matrix, direct, atol=1e-12)


def test_carrier_unitary_and_pulse():
    np.testing.assert_allclose(carrier_unitary(0.3), expm(-0.3j * sigma_x().matrix), atol=1e-15)
    flipped = carrier_pulse(atom_state("-"), math.pi / 2)
    assert abs(flipped.amplitudes[0]) == pytest.approx(1.0)


def test_preparation_angle_sign():
    # +pi/4 lands on the sigma_y = +1 eigenstate, -pi/4 on the -1 eigenstate
    plus_y = carrier_pulse(atom_state("-"), math.pi / 4)
    np.testing.assert_allclose(plus_y.amplitudes, np.array([-1j, 1]) / math.sqrt(2), atol=1e-15)
    assert expectation(plus_y, sigma_y()) == pytest.approx(1.0)
    minus_y = carrier_pulse(atom_state("-"), -math.pi / 4)
    np.testing.assert_allclose(minus_y.amplitudes, np.array([1j, 1]) / math.sqrt(2), atol=1e-15)
    assert expectation(minus_y, sigma_y()) == pytest.approx(-1.0)


def test_evolve_generic_and_grid_agree():
    lay = ModeLayout.of(x=4, y=4)
    H = two_boson_jc_hamiltonian(0.9, lay)
    psi = fock_state(lay, {"x": 2, "y": 1}).tensor(atom_state("-"))
    times = np.linspace(0, 3, 7)
    grid = evolve_generic_grid(psi, H, times)
    for t, row in zip(times, grid):
        np.testing.assert_allclose(row, evolve_generic(psi, H, t).amplitudes, atol=1e-12)
        np.testing.assert_allclose(row, expm(-1j * t * H.matrix) @ psi.amplitudes, atol=1e-12)


def test_pulse_spec_validation_and_apply():
    with pytest.raises(ValueError):
        PulseSpec("raman")
    with pytest.raises(ValueError):
        PulseSpec("carrier_x", angle=7.0)
    with pytest.raises(ValueError):
        PulseSpec("vibronic")
    lay = ModeLayout.of(x=3)
    psi = fock_state(lay, {"x": 1}).tensor(atom_state("-"))
    out = apply_pulse(psi, PulseSpec("vibronic", observable=number("x", lay), gamma=1.0, duration=math.pi / 2))
    assert np.sum(np.abs(out.amplitudes.reshape(-1, 2)[:, 0]) ** 2) == pytest.approx(1.0)
    out = apply_pulse(psi, PulseSpec("carrier_x", angle=-math.pi / 4))
    assert expectation(out, sigma_y()) == pytest.approx(-1.0)
