"""
Eigenstate Rabi oscillations.

For a vibrational eigenstate |alpha> of A, the coupling gamma A sigma_x
drives the atom from |-> to |+> at angular frequency gamma * alpha, so
P_+(t) = sin^2(gamma alpha t). Fitting the oscillation frequency
therefore reads off the eigenvalue.
"""
# %%
import numpy as np

from ionmeter import ModeLayout, fock_state, number
from ionmeter.experiments import fit_rabi_frequency, rabi_scan

layout = ModeLayout.of(x=8)
n_op = number("x", layout)
gamma = 1.0
times = np.linspace(0.0, 2 * np.pi, 100)

# %% one scan per Fock level; the fitted frequency should equal n
print(" n   fitted Omega   max |P+ - sin^2|")
for n in range(6):
    table = rabi_scan(fock_state(layout, {"x": n}), n_op, gamma, times)
    omega = fit_rabi_frequency(times, table["p_plus"])
    print(f"{n:2d}   {omega:12.8f}   {table['deviation'].max():.2e}")

# %% a coarse text plot of the n = 2 population
table = rabi_scan(fock_state(layout, {"x": 2}), n_op, gamma, times[:50])
for t, p in zip(table["t"][::4], table["p_plus"][::4]):
    print(f"t={t:5.2f}  " + "#" * int(round(40 * p)))
