"""
Acceptance criteria 1-11, each at its stated tolerance.

Every test prints one ``PASS``/``FAIL`` line (visible in ``pytest -v``
output) and then asserts. Oracles are closed forms, ``scipy.linalg``
matrix functions or direct expectation values; none reuses the code path
under test.
"""

import math
import subprocess
import sys
import warnings

import numpy as np
import pytest
from scipy.linalg import cosm, expm, sinm

from ionmeter.dynamics import evolve_vibronic, heisenberg_sigma_z, vibronic_propagator
from ionmeter.experiments import ParityDemoConfig, parity_demo, rabi_scan, raman_reduction_study
from ionmeter.hilbert import (
    ATOM_SPACE,
    HermitianOperator,
    ModeLayout,
    Space,
    SpectralWindow,
    StateVector,
    coherent_state,
    fock_state,
)
from ionmeter.observables import (
    angular_momentum_z,
    correlation,
    number,
    position_quadrature,
    sideband_qx_hamiltonian,
)
from ionmeter.protocol import (
    ProtocolConfig,
    estimate_mean,
    plus_probability,
    prepare,
    readout,
)
from ionmeter.validation import reference_state_suite

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)


@pytest.fixture
def report(capsys):
    def _report(number, title, passed, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if passed else 'FAIL'}  criterion {number:>2}: {title} ({detail})")
        return passed

    return _report


def _direct_mean(psi, A):
    return float(np.real(np.vdot(psi.amplitudes, A.matrix @ psi.amplitudes)))


def test_criterion_01_rabi_law(report):
    layout = ModeLayout(("x",), (8,))
    n = number("x", layout)
    gamma = 1.0
    times = np.linspace(0.0, 2 * math.pi, 100)
    worst = 0.0
    for k in range(6):
        table = rabi_scan(fock_state(layout, {"x": k}), n, gamma, times)
        worst = max(worst, float(np.max(np.abs(table["p_plus"] - np.sin(gamma * k * times) ** 2))))
    assert report(1, "eigenstate Rabi law", worst <= 1e-10, f"max dev {worst:.2e} <= 1e-10")


def test_criterion_02_heisenberg_identity(report):
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for _ in range(50):
        d = int(rng.integers(1, 9))
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        m = (g + g.conj().T) / 2
        A = HermitianOperator(m, Space(("x",), (d,)))
        gt = float(rng.uniform(0, 2))
        u = vibronic_propagator(A, gt, 1.0).matrix
        lhs = u.conj().T @ np.kron(np.eye(d), SZ) @ u
        oracle = np.kron(cosm(2 * gt * m), SZ) + np.kron(sinm(2 * gt * m), SY)
        worst = max(worst, float(np.max(np.abs(lhs - oracle))))
        worst = max(worst, float(np.max(np.abs(heisenberg_sigma_z(A, gt, 1.0).matrix - oracle))))
    assert report(2, "Heisenberg sigma_z identity", worst <= 1e-9, f"max residual {worst:.2e} <= 1e-9")


def test_criterion_03_readout_law(report):
    rng = np.random.default_rng(77)
    layout = ModeLayout(("x", "y"), (5, 5))
    ops = [number("x", layout), angular_momentum_z(layout), correlation(layout), position_quadrature("x", layout)]
    worst = 0.0
    for _ in range(20):
        v = rng.normal(size=layout.vib_dim) + 1j * rng.normal(size=layout.vib_dim)
        psi = StateVector.normalized(v, layout.vib_space)
        gt = float(rng.uniform(0, 2))
        for A in ops:
            final = evolve_vibronic(prepare(psi), A, gt, 1.0)
            sz = 2 * plus_probability(final) - 1
            mean_sin = float(np.real(np.vdot(psi.amplitudes, sinm(2 * gt * A.matrix) @ psi.amplitudes)))
            worst = max(worst, abs(sz + mean_sin))
    assert report(3, "interaction-picture readout law", worst <= 1e-9, f"max |<sz> + <sin>| {worst:.2e} <= 1e-9")


def test_criterion_04_bias_bound(report):
    gamma, t, alpha_max = 1.0e4, 1.0e-6, 20.0
    cfg = ProtocolConfig(gamma, t, SpectralWindow(alpha_max, 0.4))
    k = 2 * gamma * t
    x = k * alpha_max
    bound = (x - math.sin(x)) / k
    worst = -np.inf
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for _, psi, A in reference_state_suite():
            r = estimate_mean(psi, A, cfg)
            worst = max(worst, abs(r.estimate - _direct_mean(psi, A)) - bound)
    layout = ModeLayout(("x",), (32,))
    r = estimate_mean(coherent_state(layout, {"x": 1.0}), number("x", layout), cfg)
    a2 = 1.0
    oracle = math.exp(a2 * (math.cos(k) - 1)) * math.sin(a2 * math.sin(k)) / k
    closed = abs(r.estimate - oracle)
    ok = worst <= 0 and closed <= 1e-10
    assert report(4, "estimator bias bound, laboratory regime", ok, f"max excess over bound {worst:.3e} <= 0, closed-form dev {closed:.2e} <= 1e-10")


def test_criterion_05_quadratic_scaling(report):
    cfg = ProtocolConfig(1.0e4, 1.0e-6, SpectralWindow(20.0, 0.4))
    half = cfg.replace(t=cfg.t / 2)
    ratios = []
    for _, psi, A in reference_state_suite():
        truth = _direct_mean(psi, A)
        b1 = abs(estimate_mean(psi, A, cfg).estimate - truth)
        if b1 <= 1e-12:
            continue
        ratios.append(b1 / abs(estimate_mean(psi, A, half).estimate - truth))
    lo, hi = min(ratios), max(ratios)
    ok = 3 <= lo and hi <= 5
    assert report(5, "quadratic bias scaling", ok, f"ratios in [{lo:.3f}, {hi:.3f}] over {len(ratios)} cases, need [3, 5]")


def test_criterion_06_sideband(report):
    layout = ModeLayout(("x",), (12,))
    gamma = 0.7
    a = np.diag(np.sqrt(np.arange(1, 12, dtype=float)), k=1)
    target = gamma * np.kron(a + a.T, SX)
    resid = float(np.max(np.abs(sideband_qx_hamiltonian(gamma, gamma, layout).matrix - target)))
    assert report(6, "sideband sum construction", resid <= 1e-14, f"residual {resid:.2e} <= 1e-14")


def test_criterion_07_canonical_equivalence(report):
    d = 7
    layout = ModeLayout(("x", "y"), (d, d))
    lz, c = angular_momentum_z(layout).matrix, correlation(layout).matrix
    n1 = np.diag(np.arange(d, dtype=float))
    diff = np.kron(n1, np.eye(d)) - np.kron(np.eye(d), n1)
    lhs = expm(1j * math.pi / 4 * lz) @ c @ expm(-1j * math.pi / 4 * lz)
    nx, ny = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    total = (nx + ny).reshape(-1)
    worst = 0.0
    for N in range(d):
        idx = np.flatnonzero(total == N)
        worst = max(worst, float(np.max(np.abs((lhs - diff)[np.ix_(idx, idx)]))))
    assert report(7, "canonical equivalence on N blocks", worst <= 1e-9, f"residual {worst:.2e} <= 1e-9 for N <= {d - 1}")


def test_criterion_08_raman_slope(report):
    etas = [0.2, 0.1, 0.05, 0.025]
    table = raman_reduction_study(etas, block_N=2)
    slope = float(np.polyfit(np.log(etas), np.log(table["residual"]), 1)[0])
    ok = 3.5 <= slope <= 4.5 and slope == pytest.approx(table["slope"][0])
    assert report(8, "Raman reduction log-log slope", ok, f"slope {slope:.4f} in [3.5, 4.5]")


def test_criterion_09_shot_noise(report):
    state = StateVector(np.array([math.sqrt(0.3), math.sqrt(0.7)]), ATOM_SPACE)
    small = [readout(state, 400, seed)[0] for seed in range(200)]
    large = [readout(state, 40000, 10_000 + seed)[0] for seed in range(200)]
    ratio = float(np.std(small, ddof=1) / np.std(large, ddof=1))
    ok = abs(ratio - 10) <= 2
    assert report(9, "shot-noise stderr ratio", ok, f"ratio {ratio:.3f}, need 10 +/- 20%")


@pytest.mark.parametrize("N0", [1, 2, 3, 4])
def test_criterion_10_parity_sign(N0, report):
    rep = parity_demo(ParityDemoConfig(N0=N0, tau=1.0))
    table = rep.table
    expected = (-1) ** (N0 + 1)
    # tracking checked here from the raw columns, not the report flag; the
    # bound is attained with equality when an eigenvalue sits at alpha_max,
    # so rounding at the 1e-12 level is tolerated
    excess = float(np.max(np.abs(table["estimate"] - table["cxy"]) - table["bound"]))
    ok = int(np.sign(rep.extremum)) == expected and excess <= 1e-12 and np.all(table["stderr"] == 0)
    assert report(
        10,
        f"parity-effect sign, N0={N0}",
        ok,
        f"extremum {rep.extremum:+.4f} at t={rep.t_star:.3f}, sign {expected:+d} expected, tracking excess {excess:.2e} <= 1e-12",
    )


def test_criterion_11_cli_validate(report):
    proc = subprocess.run([sys.executable, "-m", "ionmeter", "validate"], capture_output=True, text=True, timeout=300)
    lines = [ln for ln in proc.stdout.splitlines() if ln.startswith(("PASS", "FAIL"))]
    ok = proc.returncode == 0 and len(lines) == 8 and all(ln.startswith("PASS") for ln in lines)
    assert report(11, "ionmeter validate exits 0", ok, f"exit {proc.returncode}, {sum(ln.startswith('PASS') for ln in lines)}/8 checks passed")
