"""
Atoms, signals, and file formats
================================

Builds a few dictionary atoms, checks their norms (including atoms cut by
the signal boundary), and round-trips buffers through the on-disk formats.
"""

import tempfile
from pathlib import Path

import numpy as np

import geopursuit as gp

# A dictionary is tied to a sample grid; atoms come out unit-norm.
d = gp.Affine1DDictionary(512)

interior = d.synthesize(d.point(256.0, 8.0))
print(f"interior atom   (b=256, a=8):  norm = {interior.norm():.15f}")

# An atom centred on the edge loses half its mass to truncation, and is
# renormalized back to norm 1 on the samples that remain.
edge = d.synthesize(d.point(0.0, 16.0))
print(f"boundary atom   (b=0,  a=16):  norm = {edge.norm():.15f}")

# Inner products approximate the continuum integral at unit sample spacing.
close = d.synthesize(d.point(260.0, 8.0))
print(f"<g(256,8), g(260,8)> = {gp.inner_product(interior, close):.6f}")

# The 2-D dictionary adds rotation and anisotropic dilation (5 parameters).
d2 = gp.Aniso2DDictionary((64, 64))
ridge = d2.synthesize(d2.point(32.0, 32.0, 0.6, 2.0, 9.0))
print(f"2-D ridge atom: shape = {ridge.shape}, norm = {ridge.norm():.15f}")

# Buffers travel as raw float64 (bit-exact), CSV, or 8-bit PGM (lossy).
tmp = Path(tempfile.mkdtemp())
gp.save_signal(interior, tmp / "atom.bin")
assert gp.load_signal(tmp / "atom.bin").data.tobytes() == interior.data.tobytes()
print("raw-f64-le round trip: bit-exact")

image = gp.SignalBuffer(127.5 * (ridge.data / np.abs(ridge.data).max() + 1.0))
gp.save_signal(image, tmp / "ridge.pgm")
back = gp.load_signal(tmp / "ridge.pgm")
print(f"PGM round trip: max quantization error = "
      f"{np.abs(back.data - image.data).max():.3f} grey levels")
print(f"PSNR of the quantized ridge: {gp.psnr(image, back):.2f} dB")
