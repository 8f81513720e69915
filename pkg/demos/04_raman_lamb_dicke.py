"""
Reading C_xy with a Raman carrier.

Two crossed Raman beams drive the carrier along the rotated modes a_+ and
a_-. Each carrier frequency carries the Debye-Waller factor
f(eta, n) = exp(-eta^2/2) L_n(eta^2), and the difference
f(eta, n_+) - f(eta, n_-) reduces to -eta^2 C_xy to leading order.
The residual of that reduction shrinks as eta^4.
"""
# %%
import numpy as np

from ionmeter.experiments import raman_reduction_study
from ionmeter.observables import RamanConfig, carrier_nonlinearity

print("f(eta, n) for eta = 0.1:", np.round(carrier_nonlinearity(0.1, np.arange(5)), 6))

# %%
etas = [0.2, 0.1, 0.05, 0.025]
table = raman_reduction_study(etas, block_N=2)
for eta, res in zip(table["eta"], table["residual"]):
    print(f"eta={eta:6.3f}  residual/Gamma={res:.3e}  residual/(Gamma eta^4)={res / eta**4:.4f}")
print(f"log-log slope: {table['slope'][0]:.3f}")

# %% the reduced model's coupling strength
for eta in etas:
    print(f"eta={eta:6.3f}  effective gamma = {RamanConfig(eta).effective_gamma:+.6f} Gamma")
