"""
L_z, C_xy and n_x - n_y are unitarily equivalent.

A pi/4 rotation generated by L_z maps the correlation operator C_xy onto
the number difference, and a pi/4 rotation generated by C_xy maps L_z onto
it. The three observables therefore share a spectrum, and a pulse built
for one can be converted into a pulse for another.

The second rotation must run as exp(-i pi/4 C) L exp(+i pi/4 C); with
the opposite orientation the result is n_y - n_x.
"""
# %%
import numpy as np
from scipy.linalg import expm

from ionmeter import ModeLayout, angular_momentum_z, correlation, number

layout = ModeLayout.of(x=6, y=6)
lz = angular_momentum_z(layout).matrix
c = correlation(layout).matrix
diff = (number("x", layout) - number("y", layout)).matrix


def block_residual(m):
    return max(np.abs(m[np.ix_(i, i)]).max() for i in map(layout.block_indices, layout.safe_blocks()))


# %%
u = expm(1j * np.pi / 4 * lz)
print("exp(i pi/4 L) C exp(-i pi/4 L) - (n_x - n_y):", f"{block_residual(u @ c @ u.conj().T - diff):.2e}")
v = expm(-1j * np.pi / 4 * c)
print("exp(-i pi/4 C) L exp(i pi/4 C) - (n_x - n_y):", f"{block_residual(v @ lz @ v.conj().T - diff):.2e}")
print("exp(+i pi/4 C) L exp(-i pi/4 C) + (n_x - n_y):", f"{block_residual(v.conj().T @ lz @ v + diff):.2e}")

# %% shared spectrum on the N = 3 block
idx = layout.block_indices(3)
for name, m in (("L_z", lz), ("C_xy", c), ("n_x - n_y", diff)):
    print(f"{name:10s}", np.round(np.linalg.eigvalsh(m[np.ix_(idx, idx)]), 10))
