"""
Vibrational observables and the effective vibronic couplings that read them out.

All vibrational builders return operators on ``layout.vib_space``; the
coupling Hamiltonians return operators on ``layout.full_space`` in units
of rad/s (that is, H / hbar). Truncated ladder operators are exact on
every total-excitation block with ``N <= d - 1``; identities involving
products of ladder operators are only asserted there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_laguerre

from .hilbert import (
    DimensionError,
    HermitianOperator,
    ModeLayout,
    Operator,
    Space,
    matrix_function,
    sigma_plus,
    sigma_x,
    tensor_embed,
)

__all__ = [
    "RamanConfig",
    "annihilation",
    "creation",
    "number",
    "position_quadrature",
    "momentum_quadrature",
    "angular_momentum_z",
    "correlation",
    "beam_splitter",
    "rotated_number",
    "carrier_nonlinearity",
    "coupling_hamiltonian",
    "raman_cxy_hamiltonian",
    "raman_residual",
    "sideband_qx_hamiltonian",
    "two_boson_jc_hamiltonian",
    "total_number",
    "jc_conserved_quantity",
    "observable_by_name",
    "OBSERVABLE_NAMES",
]


def _ladder(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1).astype(complex)


def _single(mode: str, layout: ModeLayout, matrix) -> Operator:
    d = layout.dim_of(mode)
    return Operator(matrix, Space((mode,), (d,)))


def annihilation(mode: str, layout: ModeLayout) -> Operator:
    """Truncated lowering operator, ``<n-1|a|n> = sqrt(n)``, embedded in the vibrational space."""
    d = layout.dim_of(mode)
    return tensor_embed(_single(mode, layout, _ladder(d)), layout.vib_space)


def creation(mode: str, layout: ModeLayout) -> Operator:
    return annihilation(mode, layout).dag()


def number(mode: str, layout: ModeLayout) -> HermitianOperator:
    d = layout.dim_of(mode)
    op = HermitianOperator(np.diag(np.arange(d, dtype=float)), Space((mode,), (d,)))
    return tensor_embed(op, layout.vib_space)


def total_number(layout: ModeLayout, modes=None) -> HermitianOperator:
    modes = layout.modes if modes is None else modes
    out = number(modes[0], layout)
    for m in modes[1:]:
        out = out + number(m, layout)
    return out


def position_quadrature(mode: str, layout: ModeLayout) -> HermitianOperator:
    """Dimensionless position ``Q = (a + a^dag)/sqrt(2)``."""
    a = annihilation(mode, layout)
    return ((a + a.dag()) / math.sqrt(2)).hermitian()


def momentum_quadrature(mode: str, layout: ModeLayout) -> HermitianOperator:
    """Dimensionless momentum ``P = i(a^dag - a)/sqrt(2)``."""
    a = annihilation(mode, layout)
    return ((a.dag() - a) * (1j / math.sqrt(2))).hermitian()


def _pair(layout: ModeLayout, i: str, j: str) -> tuple[Operator, Operator]:
    if i == j:
        raise DimensionError(f"two distinct modes required, got {i!r} twice")
    if layout.dim_of(i) != layout.dim_of(j):
        raise DimensionError(f"modes {i!r} and {j!r} need equal truncations")
    return annihilation(i, layout), annihilation(j, layout)


def angular_momentum_z(layout: ModeLayout, modes: tuple[str, str] = ("x", "y")) -> HermitianOperator:
    """``L_z = i(a_x a_y^dag - a_x^dag a_y)`` in units of hbar.

    Oriented so that ``(|10> + i|01>)/sqrt(2)`` has eigenvalue +1.
    """
    ax, ay = _pair(layout, *modes)
    return ((ax @ ay.dag() - ax.dag() @ ay) * 1j).hermitian()


def correlation(layout: ModeLayout, modes: tuple[str, str] = ("x", "y")) -> HermitianOperator:
    """Space-correlation operator ``C_ij = a_i a_j^dag + a_j a_i^dag``."""
    ai, aj = _pair(layout, *modes)
    return (ai @ aj.dag() + aj @ ai.dag()).hermitian()


def beam_splitter(layout: ModeLayout, theta: float, modes: tuple[str, str] = ("x", "y")) -> Operator:
    """``exp(i theta L_z)``, the two-mode rotation generated by the angular momentum.

    Conjugation ``B a_x B^dag`` gives ``cos(theta) a_x - sin(theta) a_y``
    on truncation-safe blocks, so ``theta = -pi/4`` maps ``a_x`` to ``a_+``.
    """
    return matrix_function(angular_momentum_z(layout, modes), lambda w: np.exp(1j * theta * w))


def rotated_number(layout: ModeLayout, sign: int, modes: tuple[str, str] = ("x", "y")) -> HermitianOperator:
    """Number operator of ``a_(+/-) = (a_x +/- a_y)/sqrt(2)`` via an explicit beam splitter."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    b = beam_splitter(layout, -math.pi / 4, modes)
    source = number(modes[0] if sign == 1 else modes[1], layout)
    return (b @ source @ b.dag()).hermitian()


def carrier_nonlinearity(eta: float, n) -> np.ndarray:
    """Carrier Rabi-frequency factor ``exp(-eta^2/2) L_n(eta^2)``."""
    n = np.asarray(n)
    return np.exp(-(eta**2) / 2) * eval_laguerre(n, eta**2)


def coupling_hamiltonian(A: HermitianOperator, gamma: float, layout: ModeLayout) -> HermitianOperator:
    """``gamma * (A x sigma_x)`` on the full space, in rad/s."""
    if A.space != layout.vib_space:
        A = tensor_embed(A, layout.vib_space)
    return HermitianOperator(float(gamma) * np.kron(A.matrix, sigma_x().matrix), layout.full_space)


@dataclass(frozen=True)
class RamanConfig:
    """Lamb-Dicke parameter, Raman coupling strength (rad/s) and the excitation block used for checks."""

    eta: float
    Gamma: float = 1.0
    block_N: int = 2

    def __post_init__(self):
        if not 0 < self.eta < 1:
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")
        if not self.Gamma > 0:
            raise ValueError(f"Gamma must be positive, got {self.Gamma}")
        if self.block_N < 0:
            raise ValueError("block_N must be non-negative")

    @property
    def effective_gamma(self) -> float:
        """Signed coupling of the reduced model ``gamma * C_xy * sigma_x``."""
        return -self.Gamma * self.eta**2


def raman_cxy_hamiltonian(cfg: RamanConfig, layout: ModeLayout, modes: tuple[str, str] = ("x", "y")) -> HermitianOperator:
    """``Gamma [f(eta, n_+) - f(eta, n_-)] sigma_x`` with ``f`` the carrier nonlinearity."""
    _pair(layout, *modes)
    d = layout.dim_of(modes[0])
    levels = np.arange(d)
    fx = tensor_embed(HermitianOperator(np.diag(carrier_nonlinearity(cfg.eta, levels)), Space((modes[0],), (d,))), layout.vib_space)
    fy = tensor_embed(HermitianOperator(np.diag(carrier_nonlinearity(cfg.eta, levels)), Space((modes[1],), (d,))), layout.vib_space)
    b = beam_splitter(layout, -math.pi / 4, modes)
    diff = (b @ (fx - fy) @ b.dag()).hermitian()
    return coupling_hamiltonian(diff, cfg.Gamma, layout)


def raman_residual(cfg: RamanConfig, layout: ModeLayout, modes: tuple[str, str] = ("x", "y")) -> float:
    """Max-norm distance between ``H_raman / Gamma`` and ``-eta^2 C_xy sigma_x`` on the ``block_N`` subspace."""
    if cfg.block_N > layout.dim_of(modes[0]) - 1:
        raise DimensionError(f"block N={cfg.block_N} is not complete in dim {layout.dim_of(modes[0])}")
    h = raman_cxy_hamiltonian(cfg, layout, modes)
    reduced = coupling_hamiltonian(correlation(layout, modes), -(cfg.eta**2), layout)
    idx = layout.block_indices(cfg.block_N, with_atom=True)
    return float(np.max(np.abs((h.matrix / cfg.Gamma - reduced.matrix)[np.ix_(idx, idx)])))


def sideband_qx_hamiltonian(gamma1: float, gamma2: float, layout: ModeLayout, mode: str = "x") -> HermitianOperator:
    """Red sideband (strength ``gamma1``) plus blue sideband (``gamma2``) along ``mode``."""
    a = annihilation(mode, layout).matrix
    sp = sigma_plus().matrix
    sm = sp.conj().T
    red = np.kron(a, sp) + np.kron(a.conj().T, sm)
    blue = np.kron(a.conj().T, sp) + np.kron(a, sm)
    return HermitianOperator(gamma1 * red + gamma2 * blue, layout.full_space)


def two_boson_jc_hamiltonian(gamma: float, layout: ModeLayout, modes: tuple[str, str] = ("x", "y")) -> HermitianOperator:
    """Bimodal two-boson Jaynes-Cummings coupling ``gamma (a_x a_y |+><-| + h.c.)``."""
    ax, ay = annihilation(modes[0], layout), annihilation(modes[1], layout)
    if modes[0] == modes[1]:
        raise DimensionError("two distinct modes required")
    term = np.kron((ax @ ay).matrix, sigma_plus().matrix)
    return HermitianOperator(gamma * (term + term.conj().T), layout.full_space)


def jc_conserved_quantity(layout: ModeLayout, modes: tuple[str, str] = ("x", "y")) -> HermitianOperator:
    """``n_x + n_y + 2 |+><+|`` on the full space."""
    n = tensor_embed(total_number(layout, modes), layout.full_space)
    exc = np.kron(np.eye(layout.vib_dim), np.diag([2.0, 0.0]))
    return HermitianOperator(n.matrix + exc, layout.full_space)


OBSERVABLE_NAMES = ("n", "lz", "cxy", "qx", "px")


def observable_by_name(name: str, layout: ModeLayout, modes=None) -> HermitianOperator:
    """Resolve ``n | lz | cxy | qx | px`` on ``layout``.

    Single-mode names take the first entry of ``modes`` (default: the
    first layout mode, or ``x`` for the quadratures when present).
    """
    name = name.lower()
    if name in ("lz", "cxy"):
        pair = tuple(modes) if modes else ("x", "y")
        if len(pair) != 2:
            raise DimensionError(f"{name} needs two modes, got {pair}")
        return angular_momentum_z(layout, pair) if name == "lz" else correlation(layout, pair)
    if name in ("n", "qx", "px"):
        if modes:
            mode = modes[0]
        elif name in ("qx", "px") and "x" in layout.modes:
            mode = "x"
        else:
            mode = layout.modes[0]
        if name == "n":
            return number(mode, layout)
        return position_quadrature(mode, layout) if name == "qx" else momentum_quadrature(mode, layout)
    raise ValueError(f"unknown observable {name!r}; expected one of {OBSERVABLE_NAMES}")
