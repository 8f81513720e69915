"""
Composite Hilbert-space kernel for a trapped two-level ion.

The space is a tensor product of truncated Fock spaces (one per live
vibrational mode, labelled ``x``, ``y`` or ``z``) and the two-level
electronic system. Index convention: the vibrational multi-index is
row-major in layout order and the atomic index is innermost, so a
composite basis index is ``vib_index * 2 + atom_index``. The atomic
basis is ordered ``(|+>, |->)`` so that ``sigma_z = diag(+1, -1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "ATOM",
    "MODE_LABELS",
    "MAX_COMPOSITE_DIM",
    "DimensionError",
    "HermiticityError",
    "TruncationError",
    "Space",
    "ModeLayout",
    "Operator",
    "HermitianOperator",
    "StateVector",
    "SpectralWindow",
    "tensor_embed",
    "expectation",
    "matrix_function",
    "spectral_decomposition",
    "sigma_x",
    "sigma_y",
    "sigma_z",
    "sigma_plus",
    "atomic_excitation",
    "atom_state",
    "fock_state",
    "coherent_amplitudes",
    "coherent_state",
    "product_state",
    "superposition",
]

ATOM = "atom"
MODE_LABELS = ("x", "y", "z")
MAX_COMPOSITE_DIM = 4096

HERMITIAN_ATOL = 1e-12
NORM_ATOL = 1e-12
CAPTURE_MIN = 1.0 - 1e-8
RECONSTRUCTION_ATOL = 1e-9


class DimensionError(ValueError):
    """Operands live on incompatible spaces."""


class HermiticityError(ValueError):
    """A matrix that must be Hermitian is not."""


class TruncationError(ValueError):
    """A physical state does not fit inside the Fock truncation."""


@dataclass(frozen=True)
class Space:
    """Ordered tensor product of named factors."""

    factors: tuple[str, ...]
    dims: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if len(self.factors) != len(self.dims):
            raise DimensionError("factors and dims differ in length")
        if len(set(self.factors)) != len(self.factors):
            raise DimensionError(f"repeated factor in {self.factors}")
        if any(d < 1 for d in self.dims):
            raise DimensionError(f"non-positive dimension in {self.dims}")

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    def dim_of(self, factor: str) -> int:
        return self.dims[self.position(factor)]

    def position(self, factor: str) -> int:
        try:
            return self.factors.index(factor)
        except ValueError:
            raise DimensionError(f"unknown factor {factor!r} in {self.factors}") from None

    def contains(self, other: Space) -> bool:
        return all(f in self.factors and self.dim_of(f) == d for f, d in zip(other.factors, other.dims))

    def without(self, factor: str) -> Space:
        i = self.position(factor)
        return Space(self.factors[:i] + self.factors[i + 1 :], self.dims[:i] + self.dims[i + 1 :])

    def with_atom(self) -> Space:
        if ATOM in self.factors:
            return self
        return Space(self.factors + (ATOM,), self.dims + (2,))

    @property
    def has_atom(self) -> bool:
        return ATOM in self.factors

    def __str__(self):
        return " x ".join(f"{f}[{d}]" for f, d in zip(self.factors, self.dims))


ATOM_SPACE = Space((ATOM,), (2,))


@dataclass(frozen=True)
class ModeLayout:
    """Live vibrational modes, their Fock truncations, and the atom.

    ``trap_frequency`` and ``atomic_frequency`` (rad/s) are bookkeeping
    only; all dynamics here is in the interaction picture where the free
    Hamiltonian drops out.
    """

    modes: tuple[str, ...]
    dims: tuple[int, ...]
    trap_frequency: float | None = None
    atomic_frequency: float | None = None
    max_dim: int = MAX_COMPOSITE_DIM

    atom_levels = 2

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if not self.modes:
            raise DimensionError("layout needs at least one vibrational mode")
        if len(self.modes) != len(self.dims):
            raise DimensionError("modes and dims differ in length")
        for m in self.modes:
            if m not in MODE_LABELS:
                raise DimensionError(f"unknown mode label {m!r}; expected one of {MODE_LABELS}")
        if len(set(self.modes)) != len(self.modes):
            raise DimensionError(f"repeated mode in {self.modes}")
        if any(d < 2 for d in self.dims):
            raise DimensionError("every Fock truncation needs at least 2 levels")
        if self.dim > self.max_dim:
            raise DimensionError(f"composite dimension {self.dim} exceeds guard {self.max_dim}")

    @classmethod
    def of(cls, **dims: int) -> ModeLayout:
        """``ModeLayout.of(x=3, y=3)``; keyword order sets the mode order."""
        return cls(tuple(dims), tuple(dims.values()))

    @property
    def vib_dim(self) -> int:
        return math.prod(self.dims)

    @property
    def dim(self) -> int:
        return self.vib_dim * self.atom_levels

    def dim_of(self, mode: str) -> int:
        return self.vib_space.dim_of(mode)

    @property
    def vib_space(self) -> Space:
        return Space(self.modes, self.dims)

    @property
    def full_space(self) -> Space:
        return self.vib_space.with_atom()

    def occupations(self) -> np.ndarray:
        """Fock occupation of every vibrational basis index, shape ``(vib_dim, n_modes)``."""
        grids = np.indices(self.dims).reshape(len(self.dims), -1)
        return grids.T.copy()

    def total_excitation(self) -> np.ndarray:
        """Total phonon number of each vibrational basis index."""
        return self.occupations().sum(axis=1)

    def block_indices(self, N: int, *, with_atom: bool = False) -> np.ndarray:
        """Basis indices with total phonon number ``N`` (either atomic level if ``with_atom``)."""
        vib = np.flatnonzero(self.total_excitation() == N)
        if not with_atom:
            return vib
        return np.sort(np.concatenate([2 * vib, 2 * vib + 1]))

    def safe_blocks(self) -> range:
        """Total-N blocks that are complete under the truncation (``N <= min(dims) - 1``)."""
        return range(min(self.dims))


def _as_space(target: Space | ModeLayout) -> Space:
    return target.full_space if isinstance(target, ModeLayout) else target


class Operator:
    """Dense complex matrix acting on ``space``."""

    def __init__(self, matrix, space: Space):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"operator matrix must be square, got shape {m.shape}")
        if m.shape[0] != space.dim:
            raise DimensionError(f"matrix size {m.shape[0]} does not match space {space} (dim {space.dim})")
        m.setflags(write=False)
        self._matrix = m
        self.space = space

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self.space.dim

    def dag(self) -> Operator:
        return Operator(self.matrix.conj().T, self.space)

    def is_hermitian(self, atol: float = HERMITIAN_ATOL) -> bool:
        return _hermitian_residual(self.matrix) <= atol * max(1.0, _max_abs(self.matrix))

    def hermitian(self) -> HermitianOperator:
        return HermitianOperator(self.matrix, self.space)

    def restrict(self, indices: Sequence[int]) -> np.ndarray:
        """Sub-matrix on the given basis indices."""
        idx = np.asarray(indices)
        return self.matrix[np.ix_(idx, idx)]

    def _check_same(self, other: Operator):
        if self.space != other.space:
            raise DimensionError(f"operators on different spaces: {self.space} vs {other.space}")

    def _wrap(self, matrix) -> Operator:
        return Operator(matrix, self.space)

    def __add__(self, other):
        if isinstance(other, Operator):
            self._check_same(other)
            return self._combine(other, self.matrix + other.matrix)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Operator):
            self._check_same(other)
            return self._combine(other, self.matrix - other.matrix)
        return NotImplemented

    def __neg__(self):
        return self._wrap(-self.matrix)

    def __mul__(self, scalar):
        if isinstance(scalar, (int, float, complex, np.number)):
            return self._scaled(scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check_same(other)
            return Operator(self.matrix @ other.matrix, self.space)
        return NotImplemented

    def _combine(self, other, matrix):
        if isinstance(self, HermitianOperator) and isinstance(other, HermitianOperator):
            return HermitianOperator(matrix, self.space)
        return Operator(matrix, self.space)

    def _scaled(self, scalar):
        return Operator(self.matrix * scalar, self.space)

    def __repr__(self):
        return f"{type(self).__name__}(space={self.space})"


class HermitianOperator(Operator):
    """Hermitian operator with a lazily cached spectral decomposition.

    The decomposition is deterministic, so a concurrent double computation
    of the cache is harmless.
    """

    def __init__(self, matrix, space: Space):
        super().__init__(matrix, space)
        resid = _hermitian_residual(self.matrix)
        if resid > HERMITIAN_ATOL * max(1.0, _max_abs(self.matrix)):
            raise HermiticityError(f"matrix is not Hermitian (max |M - M^dag| = {resid:.3e})")

    def _wrap(self, matrix):
        return HermitianOperator(matrix, self.space)

    def _scaled(self, scalar):
        if np.isreal(scalar):
            return HermitianOperator(self.matrix * float(np.real(scalar)), self.space)
        return Operator(self.matrix * scalar, self.space)

    def dag(self) -> HermitianOperator:
        return self

    def hermitian(self) -> HermitianOperator:
        return self

    @cached_property
    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        return _decompose(self.matrix)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eigh[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        return self.eigh[1]


def _max_abs(m: np.ndarray) -> float:
    return float(np.max(np.abs(m))) if m.size else 0.0


def _hermitian_residual(m: np.ndarray) -> float:
    return _max_abs(m - m.conj().T)


def _decompose(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"eigendecomposition failed: {exc}") from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
        raise np.linalg.LinAlgError("eigendecomposition produced non-finite values")
    # first component above noise made real positive, column by column
    mag = np.abs(v)
    first = np.argmax(mag > 1e-10 * mag.max(axis=0, keepdims=True), axis=0)
    pivot = v[first, np.arange(v.shape[1])]
    v = v * (np.abs(pivot) / pivot)[None, :]
    w.setflags(write=False)
    v.setflags(write=False)
    scale = max(1.0, _max_abs(m))
    recon = _max_abs(m - (v * w) @ v.conj().T)
    ortho = _max_abs(v.conj().T @ v - np.eye(len(w)))
    if recon > RECONSTRUCTION_ATOL * scale or ortho > RECONSTRUCTION_ATOL:
        raise np.linalg.LinAlgError(f"inaccurate eigendecomposition (reconstruction {recon:.2e}, orthogonality {ortho:.2e})")
    return w, v


def spectral_decomposition(op: HermitianOperator) -> tuple[np.ndarray, np.ndarray]:
    """Ascending real eigenvalues and unitary eigenvector matrix (columns)."""
    if not isinstance(op, HermitianOperator):
        op = op.hermitian()
    return op.eigh


def matrix_function(op: HermitianOperator, g: Callable[[np.ndarray], np.ndarray]) -> Operator:
    """``V g(Lambda) V^dag``; the result is a :class:`HermitianOperator` when ``g`` is real on the spectrum.

    ``g`` is applied to the eigenvalue array, so it must be vectorised
    (numpy ufuncs, lambdas over arrays, ...).
    """
    w, v = spectral_decomposition(op)
    gw = np.asarray(g(w))
    if gw.shape != w.shape:
        gw = np.broadcast_to(gw, w.shape)
    out = (v * gw) @ v.conj().T
    if np.isrealobj(gw) or np.all(np.imag(gw) == 0):
        return HermitianOperator(0.5 * (out + out.conj().T), op.space)
    return Operator(out, op.space)


def tensor_embed(op: Operator, target: Space | ModeLayout) -> Operator:
    """Lift ``op`` to ``target`` by tensoring identities on the remaining factors.

    The factors of ``op`` may appear in any order; the result follows the
    ordering of ``target``.
    """
    target = _as_space(target)
    src = op.space
    for f, d in zip(src.factors, src.dims):
        if f not in target.factors:
            raise DimensionError(f"factor {f!r} not present in {target}")
        if target.dim_of(f) != d:
            raise DimensionError(f"factor {f!r} has dim {d} but target has {target.dim_of(f)}")
    if src == target:
        return op
    rest = [f for f in target.factors if f not in src.factors]
    rest_dims = [target.dim_of(f) for f in rest]
    big = np.kron(op.matrix, np.eye(math.prod(rest_dims), dtype=complex))
    order = list(src.factors) + rest
    dims = list(src.dims) + rest_dims
    n = len(order)
    perm = [order.index(f) for f in target.factors]
    t = big.reshape(dims + dims).transpose(perm + [p + n for p in perm])
    matrix = t.reshape(target.dim, target.dim)
    if isinstance(op, HermitianOperator):
        return HermitianOperator(matrix, target)
    return Operator(matrix, target)


def _embed_to(op: Operator, space: Space) -> Operator:
    if op.space == space:
        return op
    if space.contains(op.space):
        return tensor_embed(op, space)
    raise DimensionError(f"operator on {op.space} does not act on {space}")


def sigma_x() -> HermitianOperator:
    return HermitianOperator([[0, 1], [1, 0]], ATOM_SPACE)


def sigma_y() -> HermitianOperator:
    # right-handed Pauli set in the (|+>, |->) basis: sigma_x sigma_y = i sigma_z
    return HermitianOperator([[0, -1j], [1j, 0]], ATOM_SPACE)


def sigma_z() -> HermitianOperator:
    return HermitianOperator([[1, 0], [0, -1]], ATOM_SPACE)


def sigma_plus() -> Operator:
    """``|+><-|`` (raises the atom)."""
    return Operator([[0, 1], [0, 0]], ATOM_SPACE)


def atomic_excitation() -> HermitianOperator:
    """Projector ``|+><+|``."""
    return HermitianOperator([[1, 0], [0, 0]], ATOM_SPACE)


class StateVector:
    """Normalised pure state on ``space``.

    ``capture`` records the norm that a physical state kept inside the
    Fock truncation before renormalisation (1 for exactly representable
    states).
    """

    def __init__(self, amplitudes, space: Space, capture: float = 1.0):
        a = np.array(amplitudes, dtype=complex).reshape(-1)
        if a.shape[0] != space.dim:
            raise DimensionError(f"{a.shape[0]} amplitudes for space {space} (dim {space.dim})")
        norm = np.linalg.norm(a)
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state is not normalised (norm = {norm!r})")
        a.setflags(write=False)
        self._amplitudes = a
        self.space = space
        self.capture = float(capture)

    @classmethod
    def normalized(cls, amplitudes, space: Space, capture: float = 1.0) -> StateVector:
        a = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(a)
        if norm == 0:
            raise ValueError("cannot normalise the zero vector")
        return cls(a / norm, space, capture)

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amplitudes

    @property
    def dim(self) -> int:
        return self.space.dim

    def overlap(self, other: StateVector) -> complex:
        if self.space != other.space:
            raise DimensionError(f"states on different spaces: {self.space} vs {other.space}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: StateVector) -> float:
        return abs(self.overlap(other)) ** 2

    def tensor(self, other: StateVector) -> StateVector:
        overlap = set(self.space.factors) & set(other.space.factors)
        if overlap:
            raise DimensionError(f"factors {overlap} appear on both sides of the product")
        space = Space(self.space.factors + other.space.factors, self.space.dims + other.space.dims)
        return StateVector(np.kron(self.amplitudes, other.amplitudes), space, self.capture * other.capture)

    def atomic_branches(self) -> tuple[np.ndarray, np.ndarray]:
        """Unnormalised vibrational amplitudes attached to ``|+>`` and ``|->``."""
        if self.space.factors[-1] != ATOM:
            raise DimensionError("state has no innermost atomic factor")
        psi = self.amplitudes.reshape(-1, 2)
        return psi[:, 0].copy(), psi[:, 1].copy()

    def __repr__(self):
        return f"StateVector(space={self.space})"


def expectation(state: StateVector, op: HermitianOperator) -> float:
    """``<psi|O|psi>`` for Hermitian ``O``; ``O`` may act on a sub-space of the state's space."""
    if not isinstance(op, HermitianOperator):
        raise HermiticityError("expectation requires a HermitianOperator")
    op = _embed_to(op, state.space)
    value = np.vdot(state.amplitudes, op.matrix @ state.amplitudes)
    scale = max(1.0, _max_abs(op.matrix))
    if abs(value.imag) > 1e-10 * scale:
        raise HermiticityError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


@dataclass(frozen=True)
class SpectralWindow:
    """Eigenvalue cap ``alpha_max`` and the half-width of the linearisability zone."""

    alpha_max: float
    zone_half_width: float = 0.4

    def __post_init__(self):
        if not self.alpha_max >= 0:
            raise ValueError(f"alpha_max must be >= 0, got {self.alpha_max}")
        if not 0 < self.zone_half_width < math.pi / 2:
            raise ValueError(f"zone_half_width must lie in (0, pi/2), got {self.zone_half_width}")


# --- state constructors ------------------------------------------------------


def atom_state(level: str) -> StateVector:
    """``'+'`` or ``'-'``."""
    try:
        vec = {"+": [1, 0], "-": [0, 1]}[level]
    except KeyError:
        raise ValueError(f"atomic level must be '+' or '-', got {level!r}") from None
    return StateVector(vec, ATOM_SPACE)


def fock_state(layout: ModeLayout, occupations: Mapping[str, int] | None = None) -> StateVector:
    """Vibrational Fock state; modes not mentioned are in the vacuum."""
    occupations = dict(occupations or {})
    for m, n in occupations.items():
        d = layout.dim_of(m)
        if not 0 <= int(n) < d:
            raise TruncationError(f"occupation {n} of mode {m!r} outside truncation (dim {d})")
    idx = np.ravel_multi_index(tuple(int(occupations.get(m, 0)) for m in layout.modes), layout.dims)
    amps = np.zeros(layout.vib_dim, dtype=complex)
    amps[idx] = 1.0
    return StateVector(amps, layout.vib_space)


def coherent_amplitudes(alpha: complex, dim: int) -> tuple[np.ndarray, float]:
    """Truncated coherent-state amplitudes and the captured norm before renormalisation."""
    alpha = complex(alpha)
    n = np.arange(dim)
    if alpha == 0:
        amps = (n == 0).astype(complex)
        return amps, 1.0
    log_mag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * np.array([math.lgamma(k + 1) for k in n])
    amps = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    captured = float(np.sum(np.abs(amps) ** 2))
    return amps, captured


def coherent_state(layout: ModeLayout, alphas: Mapping[str, complex]) -> StateVector:
    """Product of single-mode coherent states; unspecified modes in the vacuum.

    Raises :class:`TruncationError` when the truncation keeps less than
    ``1 - 1e-8`` of the norm.
    """
    vecs = []
    capture = 1.0
    for m in alphas:
        layout.dim_of(m)
    for m, d in zip(layout.modes, layout.dims):
        amps, captured = coherent_amplitudes(alphas.get(m, 0.0), d)
        if captured < CAPTURE_MIN:
            raise TruncationError(
                f"coherent amplitude {alphas.get(m)} on mode {m!r} keeps only {captured:.10f} of the norm in dim {d}"
            )
        capture *= captured
        vecs.append(amps / math.sqrt(captured))
    return StateVector.normalized(reduce(np.kron, vecs), layout.vib_space, capture)


def product_state(layout: ModeLayout, per_mode: Mapping[str, Iterable[complex]]) -> StateVector:
    """Product of single-mode amplitude vectors (each renormalised)."""
    vecs = []
    for m, d in zip(layout.modes, layout.dims):
        v = np.zeros(d, dtype=complex)
        if m in per_mode:
            given = np.asarray(list(per_mode[m]), dtype=complex)
            if given.shape[0] > d:
                raise TruncationError(f"{given.shape[0]} amplitudes for mode {m!r} with dim {d}")
            v[: given.shape[0]] = given
        else:
            v[0] = 1.0
        nv = np.linalg.norm(v)
        if nv == 0:
            raise ValueError(f"zero amplitude vector for mode {m!r}")
        vecs.append(v / nv)
    for m in per_mode:
        layout.dim_of(m)
    return StateVector.normalized(reduce(np.kron, vecs), layout.vib_space)


def superposition(components: Sequence[tuple[complex, StateVector]]) -> StateVector:
    """Normalised ``sum_k w_k |psi_k>``."""
    if not components:
        raise ValueError("superposition needs at least one component")
    space = components[0][1].space
    total = np.zeros(space.dim, dtype=complex)
    for w, s in components:
        if s.space != space:
            raise DimensionError("superposed states live on different spaces")
        total = total + complex(w) * s.amplitudes
    capture = min(s.capture for _, s in components)
    return StateVector.normalized(total, space, capture)
