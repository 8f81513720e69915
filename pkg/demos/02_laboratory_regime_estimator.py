"""
The linearised estimator in the laboratory regime.

gamma = 1e4 rad/s and t = 1 microsecond give 2 gamma t = 0.02. With the
spectral cap alpha_max = 20 the pulse area 2 gamma t alpha_max sits at
0.4, where sin(x) ~ x is still a good approximation. The estimate
-<sigma_z>/(2 gamma t) is compared against the exact mean and against the
worst-case bound [x - sin x]/(2 gamma t).
"""
# %%
from ionmeter import ModeLayout, ProtocolConfig, SpectralWindow, estimate_mean, expectation
from ionmeter import coherent_state, fock_state, number, position_quadrature
from ionmeter.protocol import cubic_bound

layout = ModeLayout.of(x=40)
cfg = ProtocolConfig(gamma=1e4, t=1e-6, window=SpectralWindow(alpha_max=20, zone_half_width=0.4))
print(f"2 gamma t = {cfg.pulse_area:.3f}, 2 gamma t alpha_max = {cfg.zone_load:.3f}")

# %%
cases = {
    "Fock |5>, n": (fock_state(layout, {"x": 5}), number("x", layout)),
    "coherent 1, n": (coherent_state(layout, {"x": 1.0}), number("x", layout)),
    "coherent 2, n": (coherent_state(layout, {"x": 2.0}), number("x", layout)),
    "coherent 1.5, Q": (coherent_state(layout, {"x": 1.5}), position_quadrature("x", layout)),
}
print(f"{'state, observable':18s} {'true':>10s} {'estimate':>12s} {'bias':>11s} {'bound':>8s}")
for label, (psi, A) in cases.items():
    r = estimate_mean(psi, A, cfg)
    truth = expectation(psi, A)
    print(f"{label:18s} {truth:10.5f} {r.estimate:12.7f} {r.estimate - truth:11.3e} {r.bias_bound:8.4f}")

# %% the worst case is set by the spectrum edge; the cubic envelope is slightly looser
r = estimate_mean(*cases["Fock |5>, n"], cfg)
print(f"bias bound for alpha_max = {cfg.window.alpha_max:g}: {r.bias_bound:.6f}, "
      f"cubic envelope: {cubic_bound(20, 1e4, 1e-6):.6f}")

# %% finite shots: the statistical error dominates the bias unless M is huge
psi, A = cases["coherent 2, n"]
for M in (10**3, 10**4, 10**5, 10**6):
    r = estimate_mean(psi, A, cfg.replace(shots=M, rng_seed=1))
    print(f"M={M:>8d}  estimate={r.estimate:8.4f}  stderr={r.stderr:.4f}")

# %% halving t cuts the bias by about four
r1 = estimate_mean(psi, A, cfg).estimate - 4.0
r2 = estimate_mean(psi, A, cfg.replace(t=cfg.t / 2)).estimate - 4.0
print(f"bias ratio under t -> t/2: {r1 / r2:.3f}")
