import math

import numpy as np
import pytest

from ionmeter.hilbert import (
    DimensionError,
    ModeLayout,
    SpectralWindow,
    TruncationError,
    coherent_state,
    expectation,
    fock_state,
)
from ionmeter.observables import angular_momentum_z, correlation, number
from ionmeter.protocol import ProtocolConfig
from ionmeter.experiments import (
    PARITY_COLUMNS,
    RABI_COLUMNS,
    SWEEP_COLUMNS,
    ParityDemoConfig,
    ScanGrid,
    StateSpec,
    estimator_sweep,
    fit_rabi_frequency,
    parity_demo,
    parse_complex,
    rabi_scan,
    raman_reduction_study,
    su2_coherent_state,
)


@pytest.mark.parametrize(
    "value, expected",
    [(1.5, 1.5), ([0.5, -2], 0.5 - 2j), ("1+2j", 1 + 2j), ("1 - 0.5j", 1 - 0.5j), (3, 3)],
)
def test_parse_complex(value, expected):
    assert parse_complex(value) == expected


def test_parse_complex_rejects_bad_pair():
    with pytest.raises(ValueError):
        parse_complex([1, 2, 3])


def test_su2_coherent_state_moments():
    lay = ModeLayout.of(x=6, y=6)
    tau, N0 = 0.7 + 0.2j, 4
    psi = su2_coherent_state(tau, N0, lay)
    p = abs(tau) ** 2 / (1 + abs(tau) ** 2)
    assert expectation(psi, number("x", lay)) == pytest.approx(N0 * p)
    assert expectation(psi, number("y", lay)) == pytest.approx(N0 * (1 - p))
    # <a_x a_y^dag + h.c.> = 2 N0 Re(tau) / (1 + |tau|^2)
    assert expectation(psi, correlation(lay)) == pytest.approx(2 * N0 * tau.real / (1 + abs(tau) ** 2))
    assert expectation(psi, angular_momentum_z(lay)) == pytest.approx(-2 * N0 * tau.imag / (1 + abs(tau) ** 2))


def test_su2_coherent_tau_one_is_eigenstate_of_c():
    lay = ModeLayout.of(x=5, y=5)
    psi = su2_coherent_state(1.0, 3, lay)
    c = correlation(lay).matrix
    np.testing.assert_allclose(c @ psi.amplitudes, 3 * psi.amplitudes, atol=1e-12)


def test_su2_coherent_truncation():
    with pytest.raises(TruncationError):
        su2_coherent_state(1.0, 5, ModeLayout.of(x=5, y=5))


def test_state_spec_kinds():
    lay = ModeLayout.of(x=8, y=8)
    fock = StateSpec.from_dict({"kind": "fock", "occupations": {"x": 2}}).build(lay)
    assert fock.fidelity(fock_state(lay, {"x": 2})) == pytest.approx(1.0)
    coh = StateSpec.from_dict({"kind": "coherent", "alpha": {"y": [0.3, 0.1]}}).build(lay)
    assert coh.fidelity(coherent_state(lay, {"y": 0.3 + 0.1j})) == pytest.approx(1.0)
    sup = StateSpec.from_dict(
        {
            "kind": "superposition",
            "components": [
                {"weight": 1, "state": {"kind": "fock", "occupations": {"x": 1}}},
                {"weight": "1j", "state": {"kind": "fock", "occupations": {"y": 1}}},
            ],
        }
    ).build(lay)
    assert expectation(sup, angular_momentum_z(lay)) == pytest.approx(1.0)
    prod = StateSpec.from_dict({"kind": "product", "modes": {"x": {"fock": 1}, "y": {"amplitudes": [1, 1]}}}).build(lay)
    assert expectation(prod, number("y", lay)) == pytest.approx(0.5)
    su2 = StateSpec.from_dict({"kind": "su2_coherent", "tau": 1, "N0": 2}).build(lay)
    assert expectation(su2, correlation(lay)) == pytest.approx(2.0)


def test_state_spec_unknown_kind():
    with pytest.raises(ValueError):
        StateSpec("squeezed")


def test_rabi_scan_columns_and_law():
    lay = ModeLayout.of(x=6)
    times = np.linspace(0, 3, 40)
    table = rabi_scan(fock_state(lay, {"x": 3}), number("x", lay), 0.5, times)
    assert tuple(table) == RABI_COLUMNS
    np.testing.assert_allclose(table["p_plus"], np.sin(1.5 * times) ** 2, atol=1e-12)
    assert fit_rabi_frequency(times, table["p_plus"]) == pytest.approx(1.5, rel=1e-6)


def test_rabi_scan_vacuum_is_flat():
    lay = ModeLayout.of(x=4)
    table = rabi_scan(fock_state(lay, {}), number("x", lay), 1.0, np.linspace(0, 5, 11))
    assert np.all(table["p_plus"] == 0)
    assert fit_rabi_frequency(table["t"], table["p_plus"]) == 0.0


def test_rabi_scan_rejects_non_eigenstate():
    lay = ModeLayout.of(x=20)
    with pytest.raises(ValueError):
        rabi_scan(coherent_state(lay, {"x": 1.0}), number("x", lay), 1.0, [0.0, 1.0])


def test_estimator_sweep_t_axis_bias_shrinks():
    lay = ModeLayout.of(x=30)
    psi = coherent_state(lay, {"x": 1.5})
    cfg = ProtocolConfig(1e4, 1e-6, SpectralWindow(20.0, 0.4))
    table = estimator_sweep(psi, number("x", lay), "t", [1e-6, 5e-7, 2.5e-7], cfg)
    assert tuple(table) == SWEEP_COLUMNS
    bias = np.abs(table["bias"])
    assert bias[0] > bias[1] > bias[2]
    assert np.all(bias <= table["bound"])
    assert np.all(table["true_mean"] == pytest.approx(2.25))


def test_estimator_sweep_shots_seeds():
    lay = ModeLayout.of(x=6)
    psi = fock_state(lay, {"x": 2})
    cfg = ProtocolConfig(1e4, 1e-6, SpectralWindow(5.0, 0.4), rng_seed=10)
    a = estimator_sweep(psi, number("x", lay), "M", [100, 100], cfg)
    b = estimator_sweep(psi, number("x", lay), "shots", [100, 100], cfg)
    np.testing.assert_array_equal(a["estimate"], b["estimate"])
    np.testing.assert_array_equal(a["shots"], [100, 100])


def test_estimator_sweep_rejects_bad_input():
    lay = ModeLayout.of(x=6)
    cfg = ProtocolConfig(1e4, 1e-6, SpectralWindow(5.0, 0.4))
    with pytest.raises(ValueError):
        estimator_sweep(fock_state(lay, {}), number("x", lay), "eta", [1.0], cfg)
    with pytest.raises(ValueError):
        estimator_sweep(fock_state(lay, {}), number("x", lay), "t", [], cfg)


def test_raman_reduction_slope():
    table = raman_reduction_study([0.2, 0.1, 0.05, 0.025])
    assert 3.5 <= table["slope"][0] <= 4.5
    assert np.all(np.diff(table["residual"]) < 0)
    with pytest.raises(ValueError):
        raman_reduction_study([])


def test_scan_grid_validation():
    assert ScanGrid(0, 1, 3).values().tolist() == [0, 0.5, 1]
    with pytest.raises(ValueError):
        ScanGrid(1, 0, 3)
    with pytest.raises(ValueError):
        ScanGrid(0, 1, 0)


def test_parity_config_defaults():
    cfg = ParityDemoConfig(N0=3)
    assert cfg.layout.dims == (5, 5)
    assert cfg.grid[-1] == pytest.approx(4 * math.pi)
    assert cfg.protocol.zone_load == pytest.approx(0.4)
    with pytest.raises(DimensionError):
        ParityDemoConfig(N0=4, dim=4)
    with pytest.raises(ValueError):
        ParityDemoConfig(N0=0)


@pytest.mark.parametrize("N0, frozen", [(1, 1.0), (2, -1.99994), (3, 1.916), (4, -3.899)])
def test_parity_demo_signs_frozen(N0, frozen):
    report = parity_demo(ParityDemoConfig(N0=N0))
    assert tuple(report.table) == PARITY_COLUMNS
    assert report.parity_ok and report.tracking_ok
    assert report.extremum == pytest.approx(frozen, abs=1e-3)
    assert report.conservation_drift < 1e-10
    assert report.table["cxy"][0] == pytest.approx(N0)


def test_parity_demo_summary_keys():
    s = parity_demo(ParityDemoConfig(N0=2, scan=ScanGrid(0, 2 * math.pi, 60))).summary()
    assert s["verdict"] == pytest.approx(s["sign"] * abs(s["extremum"]))
    assert len(s["notes"]) >= 2


def test_parity_demo_with_shots_is_seeded():
    g = 1e4
    overlay = ProtocolConfig(g, 0.4 / (2 * g * 2), SpectralWindow(2.0, 0.4), shots=200, rng_seed=5)
    cfg = ParityDemoConfig(N0=2, scan=ScanGrid(0, math.pi, 8), overlay=overlay)
    a, b = parity_demo(cfg), parity_demo(cfg)
    np.testing.assert_array_equal(a.table["estimate"], b.table["estimate"])
    assert np.all(a.table["stderr"] > 0)
