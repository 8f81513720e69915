"""
Indirect measurement of a vibrational mean value through the atomic populations.

Steps: pick ``alpha_max`` and calibrate the pulse area; rotate the atom
from ``|->`` into the ``sigma_y = -1`` eigenstate with a carrier pulse;
couple with ``gamma A sigma_x`` for time ``t``; read ``<sigma_z>`` and
return ``-<sigma_z> / (2 gamma t)``.

Finite-shot readout draws the number of ``|+>`` outcomes from
``numpy.random.default_rng(seed).binomial(M, P_plus)`` (PCG64 bit
generator).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import carrier_pulse, evolve_vibronic
from .hilbert import (
    ATOM,
    DimensionError,
    HermitianOperator,
    SpectralWindow,
    StateVector,
    atom_state,
    expectation,
    sigma_y,
    tensor_embed,
)

__all__ = [
    "DEFAULT_GAMMA",
    "PREPARATION_ANGLE",
    "TAIL_WARNING",
    "ZoneViolation",
    "FiniteSpectrumWarning",
    "ProtocolConfig",
    "EstimateResult",
    "calibrate",
    "prepare",
    "plus_probability",
    "readout",
    "estimate_mean",
    "estimate_mean_ensemble",
    "linearization_bound",
    "cubic_bound",
    "verify_finite_spectrum",
]

DEFAULT_GAMMA = 1.0e4
# exp(+i pi/4 sigma_x)|-> is the sigma_y = -1 eigenstate for the right-handed Pauli set
PREPARATION_ANGLE = -math.pi / 4
TAIL_WARNING = 1e-6
_ZONE_RTOL = 1e-12


class ZoneViolation(ValueError):
    """Pulse area ``2 gamma t alpha_max`` leaves the linearisability zone."""


class FiniteSpectrumWarning(UserWarning):
    """The state has non-negligible weight beyond ``alpha_max``."""


@dataclass(frozen=True)
class ProtocolConfig:
    """Coupling ``gamma`` (rad/s), duration ``t`` (s), shots (0 = exact) and the spectral window."""

    gamma: float
    t: float
    window: SpectralWindow
    shots: int = 0
    rng_seed: int = 0
    unsafe: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma != 0):
            raise ValueError(f"gamma must be finite and non-zero, got {self.gamma}")
        if not self.t > 0:
            raise ValueError(f"interaction time must be positive, got {self.t}")
        if int(self.shots) != self.shots or self.shots < 0:
            raise ValueError(f"shots must be a non-negative integer, got {self.shots}")

    @property
    def pulse_area(self) -> float:
        """``2 gamma t``."""
        return 2 * self.gamma * self.t

    @property
    def zone_load(self) -> float:
        """``2 |gamma| t alpha_max``, to be compared with the zone half-width."""
        return abs(self.pulse_area) * self.window.alpha_max

    @property
    def in_zone(self) -> bool:
        return self.zone_load <= self.window.zone_half_width * (1 + _ZONE_RTOL)

    def check_zone(self):
        if not self.in_zone and not self.unsafe:
            raise ZoneViolation(
                f"2 gamma t alpha_max = {self.zone_load:.6g} exceeds the zone half-width "
                f"{self.window.zone_half_width:.6g}; shorten the pulse or set unsafe"
            )

    def replace(self, **changes) -> ProtocolConfig:
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return ProtocolConfig(**values)


@dataclass
class EstimateResult:
    estimate: float
    sigma_z_mean: float
    shots_plus: int
    shots_minus: int
    stderr: float
    bias_bound: float
    pulse_area_2gt_amax: float
    gamma: float
    t: float
    shots: int
    tail_probability: float = 0.0
    unsafe: bool = False
    seed: int | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(d.pop("extras"))
        return d


def calibrate(alpha_max: float, zone_half_width: float = 0.4, gamma: float | None = None, t: float | None = None) -> tuple[float, float]:
    """Choose ``(gamma, t)`` so that ``2 gamma t alpha_max`` equals the zone half-width.

    Fix either ``gamma`` (solve for ``t``) or ``t`` (solve for ``gamma``);
    with neither, ``gamma`` defaults to 1e4 rad/s.
    """
    if not alpha_max > 0:
        raise ValueError(f"alpha_max must be positive, got {alpha_max}")
    SpectralWindow(alpha_max, zone_half_width)
    if gamma is not None and t is not None:
        raise ValueError("fix gamma or t, not both")
    if t is not None:
        if not t > 0:
            raise ValueError(f"t must be positive, got {t}")
        return zone_half_width / (2 * t * alpha_max), float(t)
    gamma = DEFAULT_GAMMA if gamma is None else gamma
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return float(gamma), zone_half_width / (2 * gamma * alpha_max)


def _check_vibrational(psi_vibr: StateVector):
    if psi_vibr.space.has_atom:
        raise DimensionError("expected a purely vibrational state")


def prepare(psi_vibr: StateVector) -> StateVector:
    """``|psi_vibr>|->`` followed by the carrier pulse that yields ``|psi_vibr>|->_y``."""
    _check_vibrational(psi_vibr)
    state = carrier_pulse(psi_vibr.tensor(atom_state("-")), PREPARATION_ANGLE)
    sy = expectation(state, tensor_embed(sigma_y(), state.space))
    if abs(sy + 1.0) > 1e-10:
        raise RuntimeError(f"preparation failed: <sigma_y> = {sy}")
    return state


def plus_probability(state: StateVector) -> float:
    """Exact population of the atomic ``|+>`` level."""
    if state.space.factors[-1] != ATOM:
        raise DimensionError("state must carry the atom as its innermost factor")
    norm = float(np.sum(np.abs(state.amplitudes) ** 2))
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"state is not normalised (norm^2 = {norm})")
    plus = state.amplitudes.reshape(-1, 2)[:, 0]
    return float(np.clip(np.sum(np.abs(plus) ** 2), 0.0, 1.0))


def _sample(p_plus: float, shots: int, rng_seed: int | None) -> tuple[float, int, int]:
    if shots == 0:
        return 2 * p_plus - 1, 0, 0
    rng = np.random.default_rng(rng_seed)
    n_plus = int(rng.binomial(shots, p_plus))
    return 2 * n_plus / shots - 1, n_plus, shots - n_plus


def readout(state: StateVector, shots: int = 0, rng_seed: int | None = None) -> tuple[float, tuple[int, int]]:
    """``(<sigma_z>, (shots_plus, shots_minus))``; exact when ``shots == 0``."""
    if shots < 0:
        raise ValueError("shots must be non-negative")
    mean, n_plus, n_minus = _sample(plus_probability(state), int(shots), rng_seed)
    return mean, (n_plus, n_minus)


def _small_x_minus_sin(x: float) -> float:
    # x - sin(x) without cancellation for small x
    if abs(x) > 1e-2:
        return x - math.sin(x)
    x2 = x * x
    return x * x2 / 6 * (1 - x2 / 20 * (1 - x2 / 42 * (1 - x2 / 72)))


def linearization_bound(alpha_max: float, gamma: float, t: float) -> float:
    """Worst-case bias ``[x - sin x] / (2 gamma t)`` with ``x = 2 |gamma| t alpha_max``.

    Valid whenever the state's support in the eigenbasis of ``A`` lies in
    ``[-alpha_max, alpha_max]``.
    """
    if alpha_max < 0:
        raise ValueError("alpha_max must be non-negative")
    k = abs(2 * gamma * t)
    if k == 0:
        raise ValueError("2 gamma t must be non-zero")
    return _small_x_minus_sin(k * alpha_max) / k


def cubic_bound(alpha_max: float, gamma: float, t: float) -> float:
    """The cubic envelope ``x^3 / (6 * 2 gamma t)``; always above :func:`linearization_bound`."""
    k = abs(2 * gamma * t)
    return (k * alpha_max) ** 3 / (6 * k)


def verify_finite_spectrum(psi_vibr: StateVector, A: HermitianOperator, alpha_max: float) -> float:
    """Probability weight of ``psi_vibr`` on eigenvalues of ``A`` with ``|alpha| > alpha_max``."""
    _check_vibrational(psi_vibr)
    if A.space != psi_vibr.space:
        A = tensor_embed(A, psi_vibr.space)
    w, v = A.eigh
    weights = np.abs(v.conj().T @ psi_vibr.amplitudes) ** 2
    # eigenvalues within rounding of the cap count as inside
    outside = np.abs(w) > alpha_max * (1 + 1e-12) + 1e-12
    return float(np.sum(weights[outside]))


def _result(p_plus: float, cfg: ProtocolConfig, tail: float, extras: dict | None = None) -> EstimateResult:
    mean, n_plus, n_minus = _sample(p_plus, cfg.shots, cfg.rng_seed)
    k = cfg.pulse_area
    stderr = math.sqrt(max(0.0, 1 - mean**2) / cfg.shots) / abs(k) if cfg.shots > 0 else 0.0
    return EstimateResult(
        estimate=-mean / k,
        sigma_z_mean=mean,
        shots_plus=n_plus,
        shots_minus=n_minus,
        stderr=stderr,
        bias_bound=linearization_bound(cfg.window.alpha_max, cfg.gamma, cfg.t),
        pulse_area_2gt_amax=cfg.zone_load,
        gamma=cfg.gamma,
        t=cfg.t,
        shots=cfg.shots,
        tail_probability=tail,
        unsafe=cfg.unsafe,
        seed=cfg.rng_seed if cfg.shots > 0 else None,
        extras=dict(extras or {}),
    )


def _warn_tail(tail: float, alpha_max: float):
    if tail > TAIL_WARNING:
        warnings.warn(
            f"state weight {tail:.3e} lies beyond alpha_max = {alpha_max}; the bias bound does not cover it",
            FiniteSpectrumWarning,
            stacklevel=3,
        )


def estimate_mean(psi_vibr: StateVector, A: HermitianOperator, cfg: ProtocolConfig) -> EstimateResult:
    """Run prepare -> couple -> read out and return the linearised estimate of ``<A>``."""
    cfg.check_zone()
    _check_vibrational(psi_vibr)
    if A.space != psi_vibr.space:
        A = tensor_embed(A, psi_vibr.space)
    tail = verify_finite_spectrum(psi_vibr, A, cfg.window.alpha_max)
    _warn_tail(tail, cfg.window.alpha_max)
    final = evolve_vibronic(prepare(psi_vibr), A, cfg.gamma, cfg.t)
    return _result(plus_probability(final), cfg, tail)


def estimate_mean_ensemble(
    branches: Sequence[tuple[float, StateVector]], A: HermitianOperator, cfg: ProtocolConfig
) -> EstimateResult:
    """Protocol on the mixture ``sum_b w_b |psi_b><psi_b|`` of vibrational states.

    Each shot prepares a fresh atom, so the ``|+>`` probability is the
    weighted average over branches and one binomial draw covers them all.
    """
    cfg.check_zone()
    weights = np.array([w for w, _ in branches], dtype=float)
    if np.any(weights < 0) or not math.isclose(weights.sum(), 1.0, abs_tol=1e-10):
        raise ValueError("branch weights must be non-negative and sum to 1")
    p_plus = 0.0
    tail = 0.0
    for w, psi in branches:
        if w == 0:
            continue
        _check_vibrational(psi)
        A_b = A if A.space == psi.space else tensor_embed(A, psi.space)
        tail += w * verify_finite_spectrum(psi, A_b, cfg.window.alpha_max)
        p_plus += w * plus_probability(evolve_vibronic(prepare(psi), A_b, cfg.gamma, cfg.t))
    _warn_tail(tail, cfg.window.alpha_max)
    return _result(min(1.0, max(0.0, p_plus)), cfg, tail, {"branches": len(branches)})
