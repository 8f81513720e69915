"""
End-to-end identity checks, each against an oracle that does not share the
code path it verifies (``scipy.linalg.expm``, closed forms, direct
expectation values).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .dynamics import evolve_vibronic, heisenberg_sigma_z
from .experiments import raman_reduction_study, rabi_scan, su2_coherent_state
from .hilbert import (
    HermitianOperator,
    ModeLayout,
    Space,
    SpectralWindow,
    StateVector,
    coherent_state,
    expectation,
    fock_state,
    sigma_x,
    sigma_z,
    superposition,
)
from .observables import (
    angular_momentum_z,
    annihilation,
    correlation,
    number,
    position_quadrature,
    sideband_qx_hamiltonian,
)
from .protocol import ProtocolConfig, estimate_mean, plus_probability, prepare

__all__ = ["CheckResult", "CHECKS", "reference_state_suite", "run_validation"]

REFERENCE_CONFIG = dict(gamma=1.0e4, t=1.0e-6, alpha_max=20.0, zone=0.4)


@dataclass
class CheckResult:
    name: str
    value: float
    tolerance: str
    passed: bool

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<28s} {self.value:.3e}  ({self.tolerance})"


def _max(m) -> float:
    return float(np.max(np.abs(m)))


def _expm_sin(A: np.ndarray, x: float) -> np.ndarray:
    return (expm(1j * x * A) - expm(-1j * x * A)) / 2j


def reference_state_suite() -> list[tuple[str, StateVector, HermitianOperator]]:
    """Fock, coherent, superposed and two-mode states paired with ``n``, ``L_z``, ``C_xy`` and ``Q_x``."""
    one = ModeLayout(("x",), (32,))
    two = ModeLayout(("x", "y"), (12, 12))
    n1, q1 = number("x", one), position_quadrature("x", one)
    n2, q2 = number("x", two), position_quadrature("x", two)
    lz, cxy = angular_momentum_z(two), correlation(two)
    singles = {
        "fock0": fock_state(one, {"x": 0}),
        "fock1": fock_state(one, {"x": 1}),
        "fock5": fock_state(one, {"x": 5}),
        "fock20": fock_state(one, {"x": 20}),
        "coh1": coherent_state(one, {"x": 1.0}),
        "coh2": coherent_state(one, {"x": 2.0}),
        "coh1.5i": coherent_state(one, {"x": 1.5j}),
        "coh(1+i)": coherent_state(one, {"x": 1 + 1j}),
        "sup03": superposition([(1, fock_state(one, {"x": 0})), (1, fock_state(one, {"x": 3}))]),
        "sup12": superposition([(1, fock_state(one, {"x": 1})), (1j, fock_state(one, {"x": 2}))]),
    }
    doubles = {
        "fock10": fock_state(two, {"x": 1}),
        "fock21": fock_state(two, {"x": 2, "y": 1}),
        "circ": superposition([(1, fock_state(two, {"x": 1})), (1j, fock_state(two, {"y": 1}))]),
        "sym": superposition([(1, fock_state(two, {"x": 1})), (1, fock_state(two, {"y": 1}))]),
        "su2(1,3)": su2_coherent_state(1.0, 3, two),
        "su2(.5+.5i,4)": su2_coherent_state(0.5 + 0.5j, 4, two),
        "coh(.5,.3i)": coherent_state(two, {"x": 0.5, "y": 0.3j}),
        "coh(1,-1)": coherent_state(two, {"x": 1.0, "y": -1.0}),
    }
    suite = []
    for label, psi in singles.items():
        suite += [(f"{label}/n", psi, n1), (f"{label}/qx", psi, q1)]
    for label, psi in doubles.items():
        suite += [(f"{label}/n", psi, n2), (f"{label}/lz", psi, lz), (f"{label}/cxy", psi, cxy), (f"{label}/qx", psi, q2)]
    return suite


def check_rabi_law() -> CheckResult:
    layout = ModeLayout(("x",), (8,))
    n = number("x", layout)
    times = np.linspace(0.0, 2 * math.pi, 100)
    worst = 0.0
    for k in range(6):
        table = rabi_scan(fock_state(layout, {"x": k}), n, 1.0, times)
        worst = max(worst, _max(table["p_plus"] - np.sin(k * times) ** 2))
    return CheckResult("rabi law", worst, "<= 1e-10", worst <= 1e-10)


def check_heisenberg(trials: int = 50, seed: int = 9) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        d = int(rng.integers(1, 9))
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        A = HermitianOperator((g + g.conj().T) / 2, Space(("x",), (d,)))
        gt = float(rng.uniform(0, 2))
        u = expm(-1j * gt * np.kron(A.matrix, sigma_x().matrix))
        direct = u.conj().T @ np.kron(np.eye(d), sigma_z().matrix) @ u
        worst = max(worst, _max(direct - heisenberg_sigma_z(A, gt, 1.0).matrix))
    return CheckResult("heisenberg sigma_z", worst, "<= 1e-9", worst <= 1e-9)


def check_readout_law(states: int = 20, seed: int = 11) -> CheckResult:
    rng = np.random.default_rng(seed)
    layout = ModeLayout(("x", "y"), (5, 5))
    ops = [number("x", layout), angular_momentum_z(layout), correlation(layout), position_quadrature("x", layout)]
    worst = 0.0
    for _ in range(states):
        v = rng.normal(size=layout.vib_dim) + 1j * rng.normal(size=layout.vib_dim)
        psi = StateVector.normalized(v, layout.vib_space)
        gt = float(rng.uniform(0, 2))
        for A in ops:
            final = evolve_vibronic(prepare(psi), A, gt, 1.0)
            sz = 2 * plus_probability(final) - 1
            s = _expm_sin(A.matrix, 2 * gt)
            mean_sin = float(np.real(np.vdot(psi.amplitudes, s @ psi.amplitudes)))
            worst = max(worst, abs(sz + mean_sin))
    return CheckResult("readout law", worst, "<= 1e-9", worst <= 1e-9)


def _reference_protocol() -> ProtocolConfig:
    c = REFERENCE_CONFIG
    return ProtocolConfig(c["gamma"], c["t"], SpectralWindow(c["alpha_max"], c["zone"]))


def check_bias_bound() -> CheckResult:
    cfg = _reference_protocol()
    worst = -np.inf
    for _, psi, A in reference_state_suite():
        r = estimate_mean(psi, A, cfg)
        worst = max(worst, abs(r.estimate - expectation(psi, A)) - r.bias_bound)
    layout = ModeLayout(("x",), (32,))
    r = estimate_mean(coherent_state(layout, {"x": 1.0}), number("x", layout), cfg)
    k = cfg.pulse_area
    oracle = math.exp(math.cos(k) - 1) * math.sin(math.sin(k)) / k
    closed = abs(r.estimate - oracle)
    ok = worst <= 0 and closed <= 1e-10
    return CheckResult("bias bound (lab regime)", max(worst, closed), "excess <= 0, closed form <= 1e-10", ok)


def check_bias_scaling() -> CheckResult:
    cfg = _reference_protocol()
    half = cfg.replace(t=cfg.t / 2)
    lo, hi = np.inf, -np.inf
    for _, psi, A in reference_state_suite():
        truth = expectation(psi, A)
        b1 = abs(estimate_mean(psi, A, cfg).estimate - truth)
        if b1 <= 1e-12:
            continue
        ratio = b1 / abs(estimate_mean(psi, A, half).estimate - truth)
        lo, hi = min(lo, ratio), max(hi, ratio)
    return CheckResult("bias halving ratio", lo if abs(lo - 4) > abs(hi - 4) else hi, "in [3, 5]", 3 <= lo and hi <= 5)


def check_sideband() -> CheckResult:
    layout = ModeLayout(("x",), (12,))
    gamma = 0.7
    a = annihilation("x", layout).matrix
    target = gamma * np.kron(a + a.conj().T, sigma_x().matrix)
    resid = _max(sideband_qx_hamiltonian(gamma, gamma, layout).matrix - target)
    return CheckResult("sideband sum", resid, "<= 1e-14", resid <= 1e-14)


def check_canonical_equivalence() -> CheckResult:
    layout = ModeLayout(("x", "y"), (6, 6))
    lz, c = angular_momentum_z(layout).matrix, correlation(layout).matrix
    diff = (number("x", layout) - number("y", layout)).matrix
    u = expm(-1j * math.pi / 4 * lz)
    lhs = u.conj().T @ c @ u
    worst = 0.0
    for N in layout.safe_blocks():
        idx = layout.block_indices(N)
        worst = max(worst, _max((lhs - diff)[np.ix_(idx, idx)]))
    return CheckResult("canonical equivalence", worst, "<= 1e-9", worst <= 1e-9)


def check_raman_slope() -> CheckResult:
    slope = float(raman_reduction_study([0.2, 0.1, 0.05, 0.025], block_N=2)["slope"][0])
    return CheckResult("raman reduction slope", slope, "in [3.5, 4.5]", 3.5 <= slope <= 4.5)


CHECKS: dict[str, Callable[[], CheckResult]] = {
    "rabi": check_rabi_law,
    "heisenberg": check_heisenberg,
    "readout": check_readout_law,
    "bias_bound": check_bias_bound,
    "bias_scaling": check_bias_scaling,
    "sideband": check_sideband,
    "canonical": check_canonical_equivalence,
    "raman": check_raman_slope,
}


def run_validation(names=None) -> list[CheckResult]:
    names = list(CHECKS) if names is None else names
    return [CHECKS[n]() for n in names]
