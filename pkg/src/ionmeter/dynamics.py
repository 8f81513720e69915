"""
Exact unitary evolution in the interaction picture.

The vibronic propagator ``exp(-i gamma t A sigma_x)`` is assembled from
``cos(gamma t A)`` and ``sin(gamma t A)``, both obtained from the spectral
decomposition of the vibrational operator ``A``; the composite matrix is
never exponentiated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hilbert import (
    ATOM,
    DimensionError,
    HermitianOperator,
    Operator,
    StateVector,
    matrix_function,
    sigma_x,
    sigma_y,
    sigma_z,
    tensor_embed,
)

__all__ = [
    "PulseSpec",
    "vibronic_propagator",
    "evolve_vibronic",
    "carrier_pulse",
    "carrier_unitary",
    "evolve_generic",
    "evolve_generic_grid",
    "heisenberg_sigma_z",
    "apply_pulse",
]


def _vib_branches(state: StateVector, A: HermitianOperator) -> np.ndarray:
    if state.space.factors[-1] != ATOM:
        raise DimensionError("state must carry the atom as its innermost factor")
    vib = state.space.without(ATOM)
    if A.space != vib:
        if not vib.contains(A.space):
            raise DimensionError(f"observable on {A.space} does not act on {vib}")
        A = tensor_embed(A, vib)
    return state.amplitudes.reshape(-1, 2), A


def vibronic_propagator(A: HermitianOperator, gamma: float, t: float) -> Operator:
    """``cos(gamma t A) x 1 - i sin(gamma t A) x sigma_x`` on ``A.space`` plus the atom."""
    theta = gamma * t
    c = matrix_function(A, lambda w: np.cos(theta * w)).matrix
    s = matrix_function(A, lambda w: np.sin(theta * w)).matrix
    u = np.kron(c, np.eye(2)) - 1j * np.kron(s, sigma_x().matrix)
    return Operator(u, A.space.with_atom())


def evolve_vibronic(state: StateVector, A: HermitianOperator, gamma: float, t: float) -> StateVector:
    """Evolve under ``H/hbar = gamma A sigma_x`` for time ``t``."""
    psi, A = _vib_branches(state, A)
    theta = gamma * t
    c = matrix_function(A, lambda w: np.cos(theta * w)).matrix
    s = matrix_function(A, lambda w: np.sin(theta * w)).matrix
    plus, minus = psi[:, 0], psi[:, 1]
    out = np.empty_like(psi)
    out[:, 0] = c @ plus - 1j * (s @ minus)
    out[:, 1] = c @ minus - 1j * (s @ plus)
    return StateVector(out.reshape(-1), state.space, state.capture)


def carrier_unitary(theta: float) -> np.ndarray:
    """``exp(-i theta sigma_x)`` as a 2x2 matrix."""
    return math.cos(theta) * np.eye(2) - 1j * math.sin(theta) * sigma_x().matrix


def carrier_pulse(state: StateVector, theta: float) -> StateVector:
    """Apply ``exp(-i theta sigma_x)`` to the atom.

    ``theta = pi/4`` is a pi/2 pulse in the Bloch-sphere sense; a negative
    ``theta`` is the same pulse driven with the opposite phase.
    """
    if state.space.factors[-1] != ATOM:
        raise DimensionError("state must carry the atom as its innermost factor")
    psi = state.amplitudes.reshape(-1, 2) @ carrier_unitary(theta).T
    return StateVector(psi.reshape(-1), state.space, state.capture)


def evolve_generic(state: StateVector, H: HermitianOperator, t: float) -> StateVector:
    """``exp(-i H t)|psi>`` for a time-independent ``H`` in rad/s."""
    if H.space != state.space:
        if not state.space.contains(H.space):
            raise DimensionError(f"Hamiltonian on {H.space} does not act on {state.space}")
        H = tensor_embed(H, state.space)
    w, v = H.eigh
    psi = v @ (np.exp(-1j * w * t) * (v.conj().T @ state.amplitudes))
    return StateVector(psi, state.space, state.capture)


def evolve_generic_grid(state: StateVector, H: HermitianOperator, times) -> np.ndarray:
    """Amplitudes at every time in ``times``, shape ``(len(times), dim)``; one diagonalisation."""
    if H.space != state.space:
        H = tensor_embed(H, state.space)
    w, v = H.eigh
    c0 = v.conj().T @ state.amplitudes
    phases = np.exp(-1j * np.outer(np.asarray(times, dtype=float), w))
    return (phases * c0[None, :]) @ v.T


def heisenberg_sigma_z(A: HermitianOperator, gamma: float, t: float) -> HermitianOperator:
    """``cos(2 gamma t A) sigma_z + sin(2 gamma t A) sigma_y``, i.e. ``U^dag sigma_z U``."""
    x = 2 * gamma * t
    c = matrix_function(A, lambda w: np.cos(x * w)).matrix
    s = matrix_function(A, lambda w: np.sin(x * w)).matrix
    m = np.kron(c, sigma_z().matrix) + np.kron(s, sigma_y().matrix)
    return HermitianOperator(m, A.space.with_atom())


@dataclass(frozen=True)
class PulseSpec:
    """A carrier rotation (``angle``) or a vibronic pulse (``observable``, ``gamma``, ``duration``)."""

    kind: str
    angle: float = 0.0
    observable: HermitianOperator | None = None
    gamma: float = 0.0
    duration: float = 0.0

    def __post_init__(self):
        if self.kind not in ("carrier_x", "vibronic"):
            raise ValueError(f"unknown pulse kind {self.kind!r}")
        if self.kind == "carrier_x" and not -2 * math.pi < self.angle < 2 * math.pi:
            raise ValueError("carrier angle must lie in (-2 pi, 2 pi)")
        if self.kind == "vibronic":
            if self.observable is None:
                raise ValueError("vibronic pulse needs an observable")
            if self.duration < 0:
                raise ValueError("pulse duration must be non-negative")
            if not math.isfinite(self.gamma):
                raise ValueError("gamma must be finite")


def apply_pulse(state: StateVector, pulse: PulseSpec) -> StateVector:
    if pulse.kind == "carrier_x":
        return carrier_pulse(state, pulse.angle)
    return evolve_vibronic(state, pulse.observable, pulse.gamma, pulse.duration)
