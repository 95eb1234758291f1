"""
The dictionary as a curved parameter space
==========================================

The map from parameters to atoms pulls an inner product back onto the
parameter space: a metric, connection coefficients, and a curvature bound
follow, and they quantify what discretizing the parameters costs a greedy
decomposition.
"""

import math

import numpy as np

import geopursuit as gp

n = 1024
d = gp.Affine1DDictionary(n)

# The pullback metric of the translation-dilation family is diagonal and
# scales like 1/a^2: a translation error matters less under a wide atom.
for a in (4.0, 16.0, 64.0):
    G = gp.metric(d, d.point(n / 2, a))
    print(f"a={a:5.1f}:  G = diag({G.matrix[0, 0]:.6f}, {G.matrix[1, 1]:.6f})"
          f"   a^2 G = diag({a * a * G.matrix[0, 0]:.4f}, {a * a * G.matrix[1, 1]:.4f})")

# Connection coefficients match the closed form +-1/a of this metric.
gamma = gp.christoffel(d, d.point(n / 2, 16.0))
print(f"\nchristoffel at a=16: G^b_ba = {gamma[0, 0, 1]:.6f}, "
      f"G^a_bb = {gamma[1, 0, 0]:.6f}, G^a_aa = {gamma[1, 1, 1]:.6f}  (1/a = {1/16:.6f})")

# The curvature bound is scale-invariant for this family and at least 1.
rng = np.random.default_rng(0)
samples = [d.point(rng.uniform(300, 700), math.exp(rng.uniform(1, 4)))
           for _ in range(8)]
k_hat = gp.condition_bound(d, samples)
print(f"curvature bound K = {k_hat:.6f}")

# Distances between parameters are measured through the atom manifold.
L = gp.path_length(d, d.point(400.0, 16.0), d.point(432.0, 16.0), segments=8)
print(f"\npath length, 32 samples of translation at a=16: {L:.4f}")

# How well does a grid cover the continuum? The density radius is the
# worst-case distance from any parameter to its nearest grid point.
probes = [d.point(rng.uniform(0, n - 1), math.exp(rng.uniform(math.log(1.3), math.log(200))))
          for _ in range(300)]
grids = {
    "(b0=1, log2 tau=0.25)": gp.tau_grid_for_signal(n, b0=1, log2_tau=0.25),
    "(b0=2, log2 tau=0.50)": gp.tau_grid_for_signal(n, b0=2, log2_tau=0.5),
}
rhos = {}
for label, grid in grids.items():
    rhos[label] = gp.density_radius(d, grid, probes, segments=4)
    print(f"density radius {label}: {rhos[label]:.4f}  ({grid.count} atoms)")

# Plugging the pieces into the discretization bound: the effective
# weakness factor of grid selection, and its refined counterpart whose
# squared deficit is exactly half.
corpus = [gp.BurstSignalSpec(n=n, n_bursts=30, kind="gaussian", envelope=128).sample(s)
          for s in np.random.SeedSequence(3).spawn(6)]
beta = gp.beta_surrogate(d, grids["(b0=1, log2 tau=0.25)"], corpus)
report = gp.weakness_factors(1.0, beta, k_hat, 0.25 * rhos["(b0=1, log2 tau=0.25)"])
print(f"\nbeta surrogate = {beta:.4f}")
print(f"alpha' = {report.alpha_prime}, alpha'' = {report.alpha_dprime}, "
      f"density requirement met: {report.density_ok}")
