"""
Measuring the position quadrature with red and blue sidebands.

Driving the red sideband a sigma_+ + h.c. and the blue sideband
a^dag sigma_+ + h.c. with equal strength gamma adds up to
gamma (a + a^dag) sigma_x = sqrt(2) gamma Q_x sigma_x, which is the
protocol coupling for A = Q_x with effective strength sqrt(2) gamma.
"""
# %%
import numpy as np

from ionmeter import ModeLayout, ProtocolConfig, SpectralWindow, coherent_state, estimate_mean, expectation
from ionmeter import annihilation, position_quadrature, sideband_qx_hamiltonian, sigma_x

layout = ModeLayout.of(x=30)
gamma = 0.7
a = annihilation("x", layout).matrix
h = sideband_qx_hamiltonian(gamma, gamma, layout).matrix
print("max |H_red + H_blue - gamma (a + a^dag) sigma_x| =",
      np.abs(h - gamma * np.kron(a + a.conj().T, sigma_x().matrix)).max())

# %% unequal strengths leave an extra sigma_y-like term
h_bad = sideband_qx_hamiltonian(gamma, 0.5 * gamma, layout).matrix
print("with gamma_2 = gamma_1 / 2 the residual is", np.abs(h_bad - gamma * np.kron(a + a.conj().T, sigma_x().matrix)).max())

# %% read <Q_x> of a displaced state through the protocol
q = position_quadrature("x", layout)
psi = coherent_state(layout, {"x": 1.2 + 0.4j})
alpha_max = 7.0  # Q_x truncated to 30 levels has its spectrum within +/- 6.86
g_eff = np.sqrt(2) * 1e4
t = 0.4 / (2 * g_eff * alpha_max)
r = estimate_mean(psi, q, ProtocolConfig(g_eff, t, SpectralWindow(alpha_max, 0.4)))
print(f"<Q_x> = {expectation(psi, q):.6f}, estimate = {r.estimate:.6f}, bound = {r.bias_bound:.4f}")
