"""
Dyadic blocks of a rough field
==============================

A smooth partition of unity splits a periodic field into dyadic frequency
blocks.  Weighted block sup norms give the Hölder-Besov norm, and the
transport commutator of one block splits exactly into three interaction
pieces.
"""

import sys
from pathlib import Path

import numpy as np

from levy_smooth import FrequencyLattice
from levy_smooth.littlewood_paley import (
    besov_norm, bony_commutator_decomposition, build_partition, decompose, reconstruction_residual,
)
from levy_smooth.svg import line_plot

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)
rng = np.random.default_rng(1)
lat = FrequencyLattice(1, 256)
part = build_partition(lat)

# random phases with amplitudes |k|^(-1.3): roughly C^0.3
amp = np.where(lat.kmag > 0, np.maximum(lat.kmag, 1) ** -1.3, 0)
coef = amp * np.exp(2j * np.pi * rng.random(lat.shape))
coef[lat.nyquist_mask] = 0
theta = np.real(lat.ifft(coef)) * lat.N

print(f"blocks {part.indices[0]}..{part.J_max}, reconstruction residual "
      f"{reconstruction_residual(theta, part):.1e}")
for s in (0.2, 0.3, 0.5):
    rep = besov_norm(theta, s, np.inf, part, j_max=part.J_max)
    print(f"B^{s}_inf,inf norm {rep.total:8.4f}, dominant block {rep.dominant_block()}")

u = np.sin(lat.x[0]) + 0.3 * np.cos(5 * lat.x[0])
for j in (1, 3, 5):
    terms = bony_commutator_decomposition(u, theta, j, part)
    sizes = [np.abs(t).max() for t in (terms.I1, terms.I2, terms.I3)]
    print(f"j={j}: |I1|,|I2|,|I3| = {sizes[0]:.3e}, {sizes[1]:.3e}, {sizes[2]:.3e}, "
          f"identity residual {terms.residual:.1e}")

dec = decompose(theta, part)
line_plot(out / "blocks.svg", [(lat.x[0], dec[j], f"j={j}") for j in part.indices[:5]],
          title="dyadic blocks", xlabel="x", ylabel="Delta_j theta")
print(f"wrote {out / 'blocks.svg'}")
