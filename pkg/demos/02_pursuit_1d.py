"""
Discrete vs geometrically refined pursuit on a burst signal
===========================================================

Decomposes a random burst signal over a coarse tau-adic grid twice: once
with plain grid selection (dmp), once refining each selected atom by
gradient ascent on the parameter manifold (gmp). The refined run drives
the residual down far faster on the same grid.
"""

import numpy as np

import geopursuit as gp

n = 4096
d = gp.Affine1DDictionary(n)
grid = gp.experiment_grid(n, b0=2, log2_tau=0.5)
print(f"grid: {grid.count} atoms, scales {grid.scale_span()[0]:.0f}..{grid.scale_span()[1]:.0f}")

signal = gp.BurstSignalSpec(n=n, n_bursts=100, kind="gaussian").sample(seed=1)

runs = {}
for mode in ("dmp", "gmp"):
    cfg = gp.PursuitConfig(mode=mode, kappa=10, max_iterations=12)
    runs[mode] = gp.run(signal, d, grid, cfg)

print(f"\n{'m':>3} {'||R^m||^2 dmp':>16} {'||R^m||^2 gmp':>16}")
for m, (e_d, e_g) in enumerate(zip(runs["dmp"].residual_energies(),
                                   runs["gmp"].residual_energies())):
    print(f"{m:>3} {e_d:>16.6f} {e_g:>16.6f}")

# The refined parameters sit off the grid; the seeds they started from are
# recorded with each step.
step = runs["gmp"].steps[0]
print(f"\nfirst gmp atom: seed (b, a) = ({step.seed[0]:.1f}, {step.seed[1]:.1f})"
      f" -> refined ({step.lam[0]:.3f}, {step.lam[1]:.3f})"
      f" after {step.ascent_steps} ascent steps")

# Energy bookkeeping: extracted coefficients plus the final residual
# reassemble the signal energy exactly.
dec = runs["gmp"]
total = np.sum(dec.coefficients() ** 2) + dec.final_residual.energy()
print(f"energy check: sum c_m^2 + ||R||^2 = {total:.12f} (signal energy 1)")

approx = gp.reconstruct(dec, d)
gap = np.linalg.norm(signal.data - approx.data - dec.final_residual.data)
print(f"reconstruction self-consistency: {gap:.2e}")
